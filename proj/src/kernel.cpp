#include "zpd/kernel.hpp"

#include <cmath>

#include <fmt/format.h>

#include "zpd/error.hpp"
#include "zpd/numerics.hpp"

namespace zpd {

void KernelParams::validate() const {
  require(std::isfinite(alpha) && std::isfinite(beta) && alpha >= 0.0 && beta >= 0.0, ErrorKind::domain,
          fmt::format("kernel exponents must be finite and nonnegative, got ({}, {})", alpha, beta));
}

double beta_weight(double p, const KernelParams& params) {
  params.validate();
  require(p >= 0.0 && p <= 1.0, ErrorKind::domain, fmt::format("pass rate {} outside [0, 1]", p));
  // std::pow(0, 0) == 1, which is the convention we want.
  return std::pow(p, params.alpha) * std::pow(1.0 - p, params.beta);
}

double kernel_peak(const KernelParams& params) {
  params.validate();
  const double total = params.alpha + params.beta;
  require(total > 0.0, ErrorKind::degenerate, "flat kernel (alpha = beta = 0) has no unique peak");
  return params.alpha / total;
}

std::vector<double> normalize_to_unit_mean(std::span<const double> raw) {
  require(!raw.empty(), ErrorKind::domain, "cannot normalize an empty weight list");
  double total = 0.0;
  for (double w : raw) {
    require(std::isfinite(w) && w >= 0.0, ErrorKind::domain, fmt::format("negative or non-finite weight {}", w));
    total += w;
  }
  const double mean_raw = total / static_cast<double>(raw.size());
  std::vector<double> out(raw.size(), 0.0);
  if (mean_raw > 0.0) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i] = raw[i] / mean_raw;
    }
  }
  return out;
}

WeightVector normalize_weights(std::span<const std::pair<std::string, double>> raw) {
  std::vector<double> values;
  values.reserve(raw.size());
  for (const auto& [id, w] : raw) {
    values.push_back(w);
  }
  const auto normalized = normalize_to_unit_mean(values);
  WeightVector out;
  out.mean_raw = mean(values);
  out.degenerate = !(out.mean_raw > 0.0);
  out.entries.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.entries.push_back({raw[i].first, raw[i].second, normalized[i]});
  }
  return out;
}

ZpdMoments zpd_moments(std::span<const double> pass_rates, double epsilon) {
  require(epsilon > 0.0 && epsilon < 0.5, ErrorKind::domain,
          fmt::format("epsilon must lie in (0, 0.5), got {}", epsilon));
  std::vector<double> band;
  for (double p : pass_rates) {
    if (p >= epsilon && p <= 1.0 - epsilon) {
      band.push_back(p);
    }
  }
  require(band.size() >= 2, ErrorKind::insufficient_data,
          fmt::format("need at least 2 pass rates in [{}, {}], found {}", epsilon, 1.0 - epsilon, band.size()));
  return ZpdMoments{epsilon, mean(band), population_variance(band), band.size()};
}

ZpdMoments zpd_moments(std::span<const PassRate> pass_rates, double epsilon) {
  const auto values = pass_rate_values(pass_rates);
  return zpd_moments(std::span<const double>(values), epsilon);
}

ExponentSelection select_exponents(const ZpdMoments& moments) {
  const double m = moments.mean_p;
  const double v = moments.var_p;
  require(m > 0.0 && m < 1.0, ErrorKind::domain, fmt::format("band mean {} must lie in (0, 1)", m));
  require(v >= 0.0, ErrorKind::domain, fmt::format("band variance {} is negative", v));
  require(v > 0.0, ErrorKind::degenerate, "band variance is zero; pass rates are identical");

  const double bound = m * (1.0 - m) / 3.0;
  // Beta(a, b) with mean m and variance v has a + b = m(1-m)/v - 1.
  const double concentration = m * (1.0 - m) / v - 1.0;
  if (std::abs(v - bound) <= 1e-9 * bound) {
    return {KernelParams{0.0, 0.0}, ExponentValidity::flat_boundary};
  }
  if (v > bound) {
    fail(ErrorKind::validity,
         fmt::format("band variance {} exceeds mean(1-mean)/3 = {}; pass rates are flatter than uniform, "
                     "use the flat kernel (alpha = beta = 0)",
                     v, bound));
  }
  return {KernelParams{m * concentration - 1.0, (1.0 - m) * concentration - 1.0}, ExponentValidity::valid};
}

double saturated_weight(double snr_sq) {
  require(snr_sq >= 0.0, ErrorKind::domain, fmt::format("squared SNR must be nonnegative, got {}", snr_sq));
  return snr_sq / (1.0 + snr_sq);
}

QSignal q_signal(double p, double a_prime, double b_prime) {
  require(a_prime > 0.0 && b_prime > 0.0, ErrorKind::domain,
          fmt::format("boundary exponents must be positive, got ({}, {})", a_prime, b_prime));
  require(p >= 0.0 && p <= 1.0, ErrorKind::domain, fmt::format("pass rate {} outside [0, 1]", p));
  const double left = a_prime / 2.0;
  const double right = b_prime / 2.0 + 1.0;
  return {std::pow(p, left) * std::pow(1.0 - p, right), left / (left + right)};
}

double fisher_info(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::singularity,
          fmt::format("Fisher information of a Bernoulli is singular at p = {}", p));
  return 1.0 / (p * (1.0 - p));
}

void validate_scheme(const WeightScheme& scheme) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BetaScheme>) {
          s.params.validate();
          require(s.floor >= 0.0, ErrorKind::domain, "weight floor must be nonnegative");
        } else if constexpr (std::is_same_v<T, HardFilterScheme>) {
          hard_filter(0.0, s.lo, s.hi);
        }
      },
      scheme);
}

double scheme_weight(const WeightScheme& scheme, double p) {
  return std::visit(
      [p](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BetaScheme>) {
          return std::max(beta_weight(p, s.params), s.floor);
        } else if constexpr (std::is_same_v<T, HardFilterScheme>) {
          return hard_filter(p, s.lo, s.hi) ? 1.0 : 0.0;
        } else {
          require(p >= 0.0 && p <= 1.0, ErrorKind::domain, fmt::format("pass rate {} outside [0, 1]", p));
          return 1.0;
        }
      },
      scheme);
}

std::vector<double> scheme_weights(const WeightScheme& scheme, std::span<const double> pass_rates) {
  std::vector<double> out;
  out.reserve(pass_rates.size());
  for (double p : pass_rates) {
    out.push_back(scheme_weight(scheme, p));
  }
  return out;
}

std::string describe(const WeightScheme& scheme) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BetaScheme>) {
          return fmt::format("beta(alpha={}, beta={}, floor={})", s.params.alpha, s.params.beta, s.floor);
        } else if constexpr (std::is_same_v<T, HardFilterScheme>) {
          return fmt::format("hard_filter(lo={}, hi={})", s.lo, s.hi);
        } else {
          return "unweighted";
        }
      },
      scheme);
}

}  // namespace zpd
