#include "zpd/passrate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "zpd/error.hpp"

namespace zpd {

void RolloutRecord::validate() const {
  require(!problem_id.empty(), ErrorKind::domain, "rollout record has an empty problem_id");
  require(!outcomes.empty(), ErrorKind::domain,
          fmt::format("rollout record '{}' has no outcomes", problem_id));
}

PassRate::PassRate(int successes, int k) : successes_(successes), k_(k) {
  require(k >= 1, ErrorKind::domain, fmt::format("pass rate needs k >= 1, got {}", k));
  require(successes >= 0 && successes <= k, ErrorKind::domain,
          fmt::format("successes must lie in [0, {}], got {}", k, successes));
  p_ = static_cast<double>(successes) / static_cast<double>(k);
}

PassRate estimate_pass_rate(const RolloutRecord& record) {
  record.validate();
  const auto successes = std::count(record.outcomes.begin(), record.outcomes.end(), true);
  return PassRate(static_cast<int>(successes), static_cast<int>(record.outcomes.size()));
}

std::vector<double> pass_rate_values(std::span<const PassRate> rates) {
  std::vector<double> out;
  out.reserve(rates.size());
  for (const auto& r : rates) {
    out.push_back(r.p());
  }
  return out;
}

bool hard_filter(double p, double lo, double hi) {
  require(lo >= 0.0 && hi <= 1.0, ErrorKind::domain,
          fmt::format("hard filter bounds must lie in [0, 1], got [{}, {}]", lo, hi));
  require(lo <= hi, ErrorKind::domain, fmt::format("hard filter needs lo <= hi, got [{}, {}]", lo, hi));
  return lo <= p && p <= hi;
}

bool hard_filter(const PassRate& p, double lo, double hi) { return hard_filter(p.p(), lo, hi); }

std::vector<double> equal_width_edges(int num_bins) {
  require(num_bins >= 1, ErrorKind::domain, fmt::format("need at least one bin, got {}", num_bins));
  std::vector<double> edges(static_cast<std::size_t>(num_bins) + 1);
  for (int i = 0; i <= num_bins; ++i) {
    edges[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(num_bins);
  }
  return edges;
}

void validate_edges(std::span<const double> edges) {
  require(edges.size() >= 2, ErrorKind::domain, "bin edges need at least two entries");
  require(edges.front() == 0.0 && edges.back() == 1.0, ErrorKind::domain,
          "bin edges must start at 0 and end at 1");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    require(edges[i] > edges[i - 1], ErrorKind::domain, "bin edges must be strictly increasing");
  }
}

std::size_t bin_index(double p, std::span<const double> edges) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::domain, fmt::format("pass rate {} outside [0, 1]", p));
  const auto it = std::upper_bound(edges.begin(), edges.end(), p);
  const auto idx = static_cast<std::size_t>(std::distance(edges.begin(), it));
  const std::size_t last = edges.size() - 2;
  return idx == 0 ? 0 : std::min(idx - 1, last);
}

PassRateHistogram histogram(std::span<const double> pass_rates, std::span<const double> edges) {
  require(!pass_rates.empty(), ErrorKind::domain, "histogram of an empty pass-rate list");
  validate_edges(edges);
  PassRateHistogram h;
  h.bin_edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  double total = 0.0;
  for (double p : pass_rates) {
    ++h.counts[bin_index(p, edges)];
    total += p;
  }
  const auto n = static_cast<double>(pass_rates.size());
  h.fractions.reserve(h.counts.size());
  for (std::size_t c : h.counts) {
    h.fractions.push_back(static_cast<double>(c) / n);
  }
  h.mean_p = total / n;
  return h;
}

PassRateHistogram histogram(std::span<const PassRate> pass_rates, std::span<const double> edges) {
  const auto values = pass_rate_values(pass_rates);
  return histogram(std::span<const double>(values), edges);
}

}  // namespace zpd
