#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "zpd/passrate.hpp"

namespace zpd {

/// Exponents of the Beta kernel w(p) = p^alpha (1-p)^beta.
/// alpha = beta = 0 is the flat kernel.
struct KernelParams {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
};

/// p^alpha (1-p)^beta with 0^0 = 1. Boundary pass rates get exactly zero
/// weight whenever the matching exponent is positive.
double beta_weight(double p, const KernelParams& params);

/// alpha / (alpha + beta). Throws ErrorKind::degenerate for the flat kernel.
double kernel_peak(const KernelParams& params);

struct WeightEntry {
  std::string problem_id;
  double raw = 0.0;
  double normalized = 0.0;
};

/// Weights rescaled to unit mean. The mean runs over every entry, zero
/// weights included. If all raw weights are zero the normalized weights are
/// zero and `degenerate` is set.
struct WeightVector {
  std::vector<WeightEntry> entries;
  double mean_raw = 0.0;
  bool degenerate = false;
};

WeightVector normalize_weights(std::span<const std::pair<std::string, double>> raw);
std::vector<double> normalize_to_unit_mean(std::span<const double> raw);

/// Pass-rate moments restricted to the band [epsilon, 1 - epsilon].
struct ZpdMoments {
  double epsilon = 0.0;
  double mean_p = 0.0;
  double var_p = 0.0;
  std::size_t count = 0;
};

ZpdMoments zpd_moments(std::span<const double> pass_rates, double epsilon);
ZpdMoments zpd_moments(std::span<const PassRate> pass_rates, double epsilon);

enum class ExponentValidity { valid, flat_boundary };

struct ExponentSelection {
  KernelParams params;
  ExponentValidity validity = ExponentValidity::valid;
};

/// Method-of-moments exponents: Beta(alpha+1, beta+1) matches the band's
/// mean and variance. Requires var_p < mean_p (1 - mean_p) / 3; a variance
/// within 1e-9 (relative) of that bound returns the flat kernel flagged as
/// `flat_boundary`. Larger variances throw ErrorKind::validity, zero variance
/// throws ErrorKind::degenerate.
ExponentSelection select_exponents(const ZpdMoments& moments);

/// snr_sq / (1 + snr_sq).
double saturated_weight(double snr_sq);

struct QSignal {
  double value = 0.0;
  double peak = 0.0;
};

/// Learning-signal quality p^{a'/2} (1-p)^{b'/2+1} and its argmax.
QSignal q_signal(double p, double a_prime, double b_prime);

/// 1 / (p (1 - p)) on the open interval.
double fisher_info(double p);

// Weighting schemes used by the CLI and the simulator.

struct BetaScheme {
  KernelParams params;
  /// Lower bound applied to raw weights. 0 keeps the hard-zero boundary.
  double floor = 0.0;
};

struct HardFilterScheme {
  double lo = 0.2;
  double hi = 0.8;
};

struct UnweightedScheme {};

using WeightScheme = std::variant<BetaScheme, HardFilterScheme, UnweightedScheme>;

void validate_scheme(const WeightScheme& scheme);
double scheme_weight(const WeightScheme& scheme, double p);
std::vector<double> scheme_weights(const WeightScheme& scheme, std::span<const double> pass_rates);
std::string describe(const WeightScheme& scheme);

}  // namespace zpd
