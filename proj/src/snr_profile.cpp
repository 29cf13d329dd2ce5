#include "zpd/snr_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "zpd/error.hpp"
#include "zpd/passrate.hpp"

namespace zpd {

namespace {

bool canonical_less(const GradientRecord& a, const GradientRecord& b) {
  if (a.problem_id != b.problem_id) {
    return a.problem_id < b.problem_id;
  }
  if (a.pass_rate != b.pass_rate) {
    return a.pass_rate < b.pass_rate;
  }
  return std::lexicographical_compare(a.gradient.begin(), a.gradient.end(), b.gradient.begin(), b.gradient.end());
}

void fill_bin(SnrBin& bin, std::vector<const GradientRecord*>& members) {
  bin.count = members.size();
  if (members.empty()) {
    return;
  }
  std::sort(members.begin(), members.end(),
            [](const GradientRecord* a, const GradientRecord* b) { return canonical_less(*a, *b); });
  const auto n = static_cast<double>(members.size());
  const std::size_t dim = members.front()->gradient.size();

  double p_total = 0.0;
  std::vector<double> centroid(dim, 0.0);
  for (const auto* r : members) {
    p_total += r->pass_rate;
    for (std::size_t k = 0; k < dim; ++k) {
      centroid[k] += r->gradient[k];
    }
  }
  bin.mean_p = p_total / n;
  for (double& c : centroid) {
    c /= n;
  }

  double spread = 0.0;
  for (const auto* r : members) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = r->gradient[k] - centroid[k];
      spread += d * d;
    }
  }
  spread /= n;
  double signal = 0.0;
  for (double c : centroid) {
    signal += c * c;
  }
  if (!(spread > 0.0)) {
    bin.degenerate = true;
    return;
  }
  bin.snr = std::sqrt(signal) / std::sqrt(spread);
}

}  // namespace

SnrProfile compute_snr_bins(std::span<const GradientRecord> records, int num_bins) {
  require(!records.empty(), ErrorKind::domain, "SNR profile needs at least one gradient record");
  require(num_bins >= 2, ErrorKind::domain, fmt::format("SNR profile needs at least 2 bins, got {}", num_bins));
  const std::size_t dim = records.front().gradient.size();
  require(dim >= 1, ErrorKind::domain, "gradients must have at least one component");

  const auto edges = equal_width_edges(num_bins);
  std::vector<std::vector<const GradientRecord*>> members(static_cast<std::size_t>(num_bins));
  for (const auto& r : records) {
    require(r.gradient.size() == dim, ErrorKind::domain,
            fmt::format("gradient for '{}' has dimension {}, expected {}", r.problem_id, r.gradient.size(), dim));
    for (double g : r.gradient) {
      require(std::isfinite(g), ErrorKind::domain, fmt::format("non-finite gradient entry for '{}'", r.problem_id));
    }
    members[bin_index(r.pass_rate, edges)].push_back(&r);
  }

  SnrProfile profile;
  profile.bins.resize(static_cast<std::size_t>(num_bins));
  for (std::size_t j = 0; j < profile.bins.size(); ++j) {
    profile.bins[j].lo = edges[j];
    profile.bins[j].hi = edges[j + 1];
    fill_bin(profile.bins[j], members[j]);
  }
  return profile;
}

SnrProfile normalize_profile(SnrProfile profile) {
  double snr_max = 0.0;
  double theory_max = 0.0;
  bool any = false;
  for (const auto& b : profile.bins) {
    if (b.snr && b.count > 0) {
      any = true;
      snr_max = std::max(snr_max, *b.snr);
      theory_max = std::max(theory_max, std::sqrt(*b.mean_p * (1.0 - *b.mean_p)));
    }
  }
  require(any, ErrorKind::degenerate, "no bin has a defined SNR");
  for (auto& b : profile.bins) {
    b.snr_norm.reset();
    b.theory_norm.reset();
    if (!(b.snr && b.count > 0)) {
      continue;
    }
    if (snr_max > 0.0) {
      b.snr_norm = *b.snr / snr_max;
    }
    if (theory_max > 0.0) {
      b.theory_norm = std::sqrt(*b.mean_p * (1.0 - *b.mean_p)) / theory_max;
    }
  }
  return profile;
}

BellScore bell_shape_score(const SnrProfile& profile) {
  std::vector<double> mid;
  std::vector<double> edge;
  std::size_t defined = 0;
  for (const auto& b : profile.bins) {
    if (!b.snr_norm) {
      continue;
    }
    ++defined;
    const double p = *b.mean_p;
    if (p >= 0.35 && p <= 0.65) {
      mid.push_back(*b.snr_norm);
    } else if (p < 0.2 || p > 0.8) {
      edge.push_back(*b.snr_norm);
    }
  }
  require(defined >= 3, ErrorKind::insufficient_data,
          fmt::format("bell score needs at least 3 normalized bins, got {}", defined));
  require(!mid.empty() && !edge.empty(), ErrorKind::insufficient_data,
          "bell score needs at least one mid bin (0.35-0.65) and one edge bin (<0.2 or >0.8)");
  const double mid_mean = std::accumulate(mid.begin(), mid.end(), 0.0) / static_cast<double>(mid.size());
  const double edge_mean = std::accumulate(edge.begin(), edge.end(), 0.0) / static_cast<double>(edge.size());
  BellScore s;
  if (edge_mean > 0.0) {
    s.mid_over_edge_ratio = mid_mean / edge_mean;
  } else {
    require(mid_mean > 0.0, ErrorKind::degenerate, "mid and edge bins both have zero SNR");
    s.mid_over_edge_ratio = std::numeric_limits<double>::infinity();
  }
  s.is_bell = s.mid_over_edge_ratio > 1.0;
  return s;
}

}  // namespace zpd
