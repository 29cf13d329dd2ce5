#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zpd/commands.hpp"
#include "zpd/error.hpp"

namespace {

// Runs `body` against --out (or stdout). Output is buffered so a failed
// command leaves no partial file behind.
int run(const std::string& out_path, const std::function<void(std::ostream&, std::ostream&)>& body) {
  try {
    std::ostringstream buffer;
    body(buffer, std::cerr);
    if (out_path.empty() || out_path == "-") {
      std::cout << buffer.str();
    } else {
      std::ofstream f(out_path);
      if (!f) zpd::fail(zpd::ErrorKind::io, "cannot write '" + out_path + "'");
      f << buffer.str();
    }
    return 0;
  } catch (const zpd::Error& e) {
    std::cerr << "error[" << zpd::to_string(e.kind()) << "]: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pass-rate weighting toolkit for distillation"};
  app.require_subcommand(1);
  std::string out_path;
  std::function<int()> action;

  auto* weight = app.add_subcommand("weight", "Beta-kernel or hard-filter weights from a rollout file");
  zpd::cmd::WeightArgs weight_args;
  std::vector<double> hard_bounds;
  weight->add_option("rollouts", weight_args.rollouts, "Rollout JSONL file")->required();
  weight->add_option("--alpha", weight_args.params.alpha, "Kernel exponent on p")->capture_default_str();
  weight->add_option("--beta", weight_args.params.beta, "Kernel exponent on 1-p")->capture_default_str();
  weight->add_option("--hard-filter", hard_bounds, "Keep lo <= p <= hi instead")->expected(2);
  weight->add_option("--out", out_path, "Output file (default stdout)");
  weight->callback([&] {
    if (!hard_bounds.empty()) weight_args.hard_filter = zpd::HardFilterScheme{hard_bounds[0], hard_bounds[1]};
    action = [&] { return run(out_path, [&](auto& o, auto& l) { zpd::cmd::weight(weight_args, o, l); }); };
  });

  auto* select = app.add_subcommand("select-exponents", "Moment-matched kernel exponents from a rollout file");
  zpd::cmd::SelectArgs select_args;
  double select_eps = 0.0;
  select->add_option("rollouts", select_args.rollouts, "Rollout JSONL file")->required();
  auto* eps_opt = select->add_option("--epsilon", select_eps, "Band cutoff (default 1/K)");
  select->add_option("--out", out_path, "Output file (default stdout)");
  select->callback([&] {
    if (eps_opt->count() > 0) select_args.epsilon = select_eps;
    action = [&] { return run(out_path, [&](auto& o, auto& l) { zpd::cmd::select_exponents(select_args, o, l); }); };
  });

  auto* robust = app.add_subcommand("robustness", "Minimax efficiency table");
  zpd::cmd::RobustnessArgs robust_args;
  robust->add_option("--delta", robust_args.extra_deltas, "Extra misspecification levels");
  robust->add_option("--out", out_path, "Output file (default stdout)");
  robust->callback([&] {
    action = [&] { return run(out_path, [&](auto& o, auto& l) { zpd::cmd::robustness(robust_args, o, l); }); };
  });

  auto* variance = app.add_subcommand("variance-ratio", "Closed-form variance ratio");
  zpd::cmd::VarianceArgs var_args;
  std::vector<double> signal;
  double trunc_eps = 0.0;
  variance->add_option("--alpha", var_args.alpha)->capture_default_str();
  variance->add_option("--beta", var_args.beta)->capture_default_str();
  variance->add_option("--gamma1", var_args.gamma1)->capture_default_str();
  variance->add_option("--gamma2", var_args.gamma2)->capture_default_str();
  variance->add_option("--signal", signal, "a_s b_s a' b' (derives gamma1, gamma2)")->expected(4);
  auto* trunc_opt = variance->add_option("--epsilon", trunc_eps, "Also report the ratio on [eps, 1-eps]");
  variance->add_option("--out", out_path, "Output file (default stdout)");
  variance->callback([&] {
    if (!signal.empty()) var_args.signal = zpd::cmd::SignalExponents{signal[0], signal[1], signal[2], signal[3]};
    if (trunc_opt->count() > 0) var_args.truncation_epsilon = trunc_eps;
    action = [&] { return run(out_path, [&](auto& o, auto& l) { zpd::cmd::variance_ratio(var_args, o, l); }); };
  });

  auto* snr = app.add_subcommand("snr-profile", "Binned cross-problem gradient SNR");
  zpd::cmd::SnrProfileArgs snr_args;
  snr->add_option("gradients", snr_args.gradients, "Gradient CSV file")->required();
  snr->add_option("--bins", snr_args.bins, "Number of equal-width bins")->capture_default_str();
  snr->add_option("--report", snr_args.report, "Write the bell report here");
  snr->add_option("--out", out_path, "Output file (default stdout)");
  snr->callback([&] {
    action = [&] { return run(out_path, [&](auto& o, auto& l) { zpd::cmd::snr_profile(snr_args, o, l); }); };
  });

  auto* fit = app.add_subcommand("fit-snr", "Fit the power-law SNR model to a profile");
  zpd::cmd::FitSnrArgs fit_args;
  fit->add_option("profile", fit_args.profile, "Profile CSV from snr-profile")->required();
  fit->add_option("--out", out_path, "Output file (default stdout)");
  fit->callback([&] {
    action = [&] { return run(out_path, [&](auto& o, auto& l) { zpd::cmd::fit_snr(fit_args, o, l); }); };
  });

  auto* simulate = app.add_subcommand("simulate", "Run the synthetic distillation simulator");
  zpd::cmd::SimulateArgs sim_args;
  std::string schedule;
  double fraction = 0.0;
  int interval = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  int k = 0;
  simulate->add_option("config", sim_args.config, "INI config file")->required();
  auto* schedule_opt = simulate->add_option("--schedule", schedule, "forward, reverse or two_stage");
  auto* fraction_opt = simulate->add_option("--stage1-fraction", fraction, "Share of steps before the switch");
  auto* interval_opt = simulate->add_option("--recompute-interval", interval, "Recompute weights every N steps");
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the config seed");
  auto* steps_opt = simulate->add_option("--steps", steps, "Override the step count");
  auto* k_opt = simulate->add_option("--k", k, "Override the rollout count");
  simulate->add_option("--dump-gradients", sim_args.dump_gradients, "Write PREFIX_step<N>.csv gradient dumps");
  simulate->add_option("--dump-step", sim_args.dump_step, "Later dump step")->capture_default_str();
  simulate->add_option("--bins", sim_args.dump_bins, "Bins for the logged bell score")->capture_default_str();
  simulate->add_option("--weights-log", sim_args.weights_log, "Write every weight recomputation here");
  simulate->add_option("--out", out_path, "Metrics file (default stdout)");
  simulate->callback([&] {
    if (schedule_opt->count() > 0) sim_args.schedule = schedule;
    if (fraction_opt->count() > 0) sim_args.stage1_fraction = fraction;
    if (interval_opt->count() > 0) sim_args.recompute_interval = interval;
    if (seed_opt->count() > 0) sim_args.seed = seed;
    if (steps_opt->count() > 0) sim_args.steps = steps;
    if (k_opt->count() > 0) sim_args.k = k;
    action = [&] { return run(out_path, [&](auto& o, auto& l) { zpd::cmd::simulate(sim_args, o, l); }); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << '\n';
    return 1;
  }
  return action();
}
