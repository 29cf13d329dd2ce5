#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zpd {

/// One problem's gradient together with its estimated pass rate.
struct GradientRecord {
  std::string problem_id;
  double pass_rate = 0.0;
  std::vector<double> gradient;
};

struct SnrBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::optional<double> mean_p;       // undefined for empty bins
  std::optional<double> snr;          // undefined when empty or degenerate
  std::optional<double> snr_norm;
  std::optional<double> theory_norm;
  bool degenerate = false;            // non-empty, but zero spread around the bin mean
};

struct SnrProfile {
  std::vector<SnrBin> bins;
};

/// Cross-problem SNR per equal-width pass-rate bin:
///   ||mean g|| / sqrt(mean ||g - mean g||^2).
/// Records inside a bin are summed in a canonical order, so the result does
/// not depend on input order.
SnrProfile compute_snr_bins(std::span<const GradientRecord> records, int num_bins);

/// Divides every defined SNR by the largest one and fills the theoretical
/// profile sqrt(p(1-p)) / max sqrt(p(1-p)) from each bin's mean pass rate.
/// Bins with undefined SNR are skipped in both maxima and stay undefined.
SnrProfile normalize_profile(SnrProfile profile);

struct BellScore {
  bool is_bell = false;
  double mid_over_edge_ratio = 0.0;
};

/// Mean normalized SNR of bins with mean pass rate in [0.35, 0.65] divided by
/// that of bins below 0.2 or above 0.8.
BellScore bell_shape_score(const SnrProfile& profile);

}  // namespace zpd
