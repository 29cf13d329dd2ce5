#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace zpd {

/// Correctness outcomes of K student rollouts on one problem.
struct RolloutRecord {
  std::string problem_id;
  std::vector<bool> outcomes;

  /// Throws ErrorKind::domain on an empty id or empty outcome list.
  void validate() const;
};

/// Fraction of correct rollouts, kept as the exact count pair.
class PassRate {
 public:
  PassRate(int successes, int k);

  double p() const noexcept { return p_; }
  int successes() const noexcept { return successes_; }
  int k() const noexcept { return k_; }

 private:
  int successes_;
  int k_;
  double p_;
};

PassRate estimate_pass_rate(const RolloutRecord& record);

std::vector<double> pass_rate_values(std::span<const PassRate> rates);

/// Keep iff lo <= p <= hi (both ends inclusive).
bool hard_filter(double p, double lo = 0.2, double hi = 0.8);
bool hard_filter(const PassRate& p, double lo = 0.2, double hi = 0.8);

/// Bin edges {0, 0.2, 0.8, 1}: the Low / Med / High split used in curriculum
/// reports.
inline constexpr std::array<double, 4> kCurriculumEdges{0.0, 0.2, 0.8, 1.0};

/// `num_bins` equal-width bins over [0, 1]; edge i is exactly i / num_bins.
std::vector<double> equal_width_edges(int num_bins);

/// Throws unless edges are strictly increasing, start at 0 and end at 1.
void validate_edges(std::span<const double> edges);

/// Bin containing p. Bins are left-closed and right-open, except the last,
/// which also contains its right edge (so p = 1 is counted).
std::size_t bin_index(double p, std::span<const double> edges);

struct PassRateHistogram {
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
  std::vector<double> fractions;
  double mean_p = 0.0;
};

PassRateHistogram histogram(std::span<const double> pass_rates, std::span<const double> edges);
PassRateHistogram histogram(std::span<const PassRate> pass_rates, std::span<const double> edges);

}  // namespace zpd
