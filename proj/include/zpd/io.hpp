#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "zpd/distill_sim.hpp"
#include "zpd/passrate.hpp"
#include "zpd/robustness.hpp"
#include "zpd/snr_profile.hpp"

namespace zpd::io {

/// Formats a number for data files (10 significant digits).
std::string num(double v);

/// One JSON object per line: {"problem_id": "...", "outcomes": [true, false, ...]}.
/// Blank lines are skipped. Errors name the 1-based line number.
std::vector<RolloutRecord> read_rollouts(std::istream& in);
std::vector<RolloutRecord> load_rollouts(const std::string& path);
void write_rollouts(std::ostream& out, std::span<const RolloutRecord> records);

/// Header: problem_id,pass_rate,g0,...,g{D-1}
std::vector<GradientRecord> read_gradients(std::istream& in);
std::vector<GradientRecord> load_gradients(const std::string& path);
void write_gradients(std::ostream& out, std::span<const GradientRecord> records);

/// Header: bin_lo,bin_hi,mean_p,count,snr,snr_norm,theory_norm. Undefined
/// values are empty fields.
void write_profile(std::ostream& out, const SnrProfile& profile);
SnrProfile read_profile(std::istream& in);
SnrProfile load_profile(const std::string& path);

/// (mean_p, snr^2) for every bin with a defined SNR.
std::vector<SnrPoint> profile_points(const SnrProfile& profile);

/// One row per checkpoint.
void write_metrics(std::ostream& out, const sim::SimMetrics& metrics);

}  // namespace zpd::io
