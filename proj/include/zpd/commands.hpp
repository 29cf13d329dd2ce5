#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zpd/kernel.hpp"
#include "zpd/sim_config.hpp"
#include "zpd/variance.hpp"

// Command implementations behind the `zpd` executable. Each writes its data
// table to `out` and run metadata to `log`, and throws zpd::Error on failure.
namespace zpd::cmd {

struct WeightArgs {
  std::string rollouts;
  KernelParams params;
  std::optional<HardFilterScheme> hard_filter;
};

/// Rows: problem_id,p,w,w_tilde in input order.
void weight(const WeightArgs& args, std::ostream& out, std::ostream& log);

struct SelectArgs {
  std::string rollouts;
  /// Defaults to 1/K with K the largest rollout count in the file.
  std::optional<double> epsilon;
};

/// key,value report. A variance above the validity bound is reported (with
/// the flat-kernel recommendation) rather than thrown.
void select_exponents(const SelectArgs& args, std::ostream& out, std::ostream& log);

/// The four reference deltas followed by any extra ones.
inline const std::vector<double> kReferenceDeltas{0.1, 0.3, 0.5, 0.69314718055994530942};

struct RobustnessArgs {
  std::vector<double> extra_deltas;
};

/// Rows: delta,range_lo,range_hi,scale,efficiency
void robustness(const RobustnessArgs& args, std::ostream& out, std::ostream& log);

struct SignalExponents {
  double a_s = 0.0;
  double b_s = 0.0;
  double a_prime = 0.0;
  double b_prime = 0.0;
};

struct VarianceArgs {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  /// When set, gamma1 and gamma2 are derived from these.
  std::optional<SignalExponents> signal;
  std::optional<double> truncation_epsilon;
};

VarianceSpec variance_spec(const VarianceArgs& args);

/// key,value report.
void variance_ratio(const VarianceArgs& args, std::ostream& out, std::ostream& log);

struct SnrProfileArgs {
  std::string gradients;
  int bins = 10;
  /// Optional file receiving the bell report.
  std::string report;
};

void snr_profile(const SnrProfileArgs& args, std::ostream& out, std::ostream& log);

struct FitSnrArgs {
  std::string profile;
};

/// key,value report.
void fit_snr(const FitSnrArgs& args, std::ostream& out, std::ostream& log);

struct SimulateArgs {
  std::string config;
  std::optional<std::string> schedule;
  std::optional<double> stage1_fraction;
  std::optional<int> recompute_interval;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<int> k;
  /// Writes PREFIX_step<N>.csv gradient dumps at step 0 and dump_step.
  std::string dump_gradients;
  int dump_step = 20;
  int dump_bins = 10;
  /// Optional file receiving the weight-event log.
  std::string weights_log;
};

/// Applies command-line overrides to a loaded config.
sim::SimConfig simulate_config(const SimulateArgs& args);

void simulate(const SimulateArgs& args, std::ostream& out, std::ostream& log);

}  // namespace zpd::cmd
