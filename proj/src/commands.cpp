#include "zpd/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "zpd/error.hpp"
#include "zpd/io.hpp"
#include "zpd/numerics.hpp"
#include "zpd/passrate.hpp"
#include "zpd/robustness.hpp"
#include "zpd/snr_profile.hpp"

namespace zpd::cmd {

namespace {

using io::num;

std::ofstream open_file(const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, fmt::format("cannot write '{}'", path));
  return f;
}

void kv(std::ostream& out, std::string_view key, const std::string& value) { out << key << ',' << value << '\n'; }

void kv(std::ostream& out, std::string_view key, double value) { kv(out, key, num(value)); }

void write_bell(std::ostream& out, const SnrProfile& profile) {
  try {
    const BellScore score = bell_shape_score(profile);
    kv(out, "is_bell", score.is_bell ? "true" : "false");
    kv(out, "mid_over_edge_ratio", score.mid_over_edge_ratio);
  } catch (const Error& e) {
    kv(out, "is_bell", "undefined");
    kv(out, "reason", e.what());
  }
}

std::string bell_line(const SnrProfile& profile) {
  try {
    const BellScore score = bell_shape_score(profile);
    return fmt::format("is_bell={} mid_over_edge_ratio={}", score.is_bell, num(score.mid_over_edge_ratio));
  } catch (const Error& e) {
    return fmt::format("is_bell=undefined ({})", e.what());
  }
}

}  // namespace

void weight(const WeightArgs& args, std::ostream& out, std::ostream& log) {
  const auto records = io::load_rollouts(args.rollouts);
  WeightScheme scheme = BetaScheme{args.params, 0.0};
  if (args.hard_filter) scheme = *args.hard_filter;
  validate_scheme(scheme);

  std::vector<double> p;
  p.reserve(records.size());
  for (const auto& r : records) p.push_back(estimate_pass_rate(r).p());
  const std::vector<double> w = scheme_weights(scheme, p);
  std::vector<std::pair<std::string, double>> raw;
  raw.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) raw.emplace_back(records[i].problem_id, w[i]);
  const WeightVector wv = normalize_weights(raw);

  log << fmt::format("log: weight scheme={} records={}\n", describe(scheme), records.size());
  if (wv.degenerate) log << "log: all raw weights are zero; normalized weights are all zero\n";
  out << "problem_id,p,w,w_tilde\n";
  for (std::size_t i = 0; i < records.size(); ++i)
    out << fmt::format("{},{},{},{}\n", records[i].problem_id, num(p[i]), num(w[i]), num(wv.entries[i].normalized));
}

void select_exponents(const SelectArgs& args, std::ostream& out, std::ostream& log) {
  const auto records = io::load_rollouts(args.rollouts);
  std::vector<PassRate> rates;
  rates.reserve(records.size());
  std::size_t k_max = 0;
  for (const auto& r : records) {
    rates.push_back(estimate_pass_rate(r));
    k_max = std::max(k_max, r.outcomes.size());
  }
  const double eps = args.epsilon.value_or(1.0 / static_cast<double>(k_max));
  const ZpdMoments m = zpd_moments(rates, eps);
  log << fmt::format("log: select-exponents records={} epsilon={} in_band={}\n", records.size(), num(eps), m.count);

  out << "key,value\n";
  kv(out, "epsilon", eps);
  kv(out, "count", std::to_string(m.count));
  kv(out, "mean_p", m.mean_p);
  kv(out, "var_p", m.var_p);
  kv(out, "bound", m.mean_p * (1.0 - m.mean_p) / 3.0);
  try {
    const ExponentSelection sel = select_exponents(m);
    kv(out, "alpha", sel.params.alpha);
    kv(out, "beta", sel.params.beta);
    kv(out, "validity", sel.validity == ExponentValidity::valid ? "valid" : "flat_boundary");
    if (sel.validity == ExponentValidity::flat_boundary) kv(out, "recommendation", "flat kernel (alpha = beta = 0)");
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::validity) throw;
    kv(out, "alpha", "");
    kv(out, "beta", "");
    kv(out, "validity", "invalid");
    kv(out, "recommendation", "flat kernel (alpha = beta = 0)");
    log << "log: " << e.what() << '\n';
  }
}

void robustness(const RobustnessArgs& args, std::ostream& out, std::ostream& log) {
  std::vector<double> deltas = kReferenceDeltas;
  for (double d : args.extra_deltas) {
    require(std::isfinite(d) && d >= 0.0, ErrorKind::domain, fmt::format("delta must be nonnegative, got {}", d));
    deltas.push_back(d);
  }
  log << fmt::format("log: robustness rows={}\n", deltas.size());
  out << "delta,range_lo,range_hi,scale,efficiency\n";
  for (double d : deltas) {
    out << fmt::format("{},{},{},{},{}\n", num(d), num(std::exp(-d)), num(std::exp(d)), num(minimax_scale(d)),
                       num(worst_case_efficiency(minimax_scale(d), d)));
  }
}

VarianceSpec variance_spec(const VarianceArgs& args) {
  VarianceSpec spec{args.alpha, args.beta, args.gamma1, args.gamma2};
  if (args.signal) {
    const auto [g1, g2] = gamma_from_signal(args.signal->a_s, args.signal->b_s, args.signal->a_prime,
                                            args.signal->b_prime);
    spec.gamma1 = g1;
    spec.gamma2 = g2;
  }
  return spec;
}

void variance_ratio(const VarianceArgs& args, std::ostream& out, std::ostream& log) {
  const VarianceSpec spec = variance_spec(args);
  const BetaRatioTerms t = variance_ratio_beta_terms(spec);
  log << fmt::format("log: variance-ratio alpha={} beta={} gamma1={} gamma2={}\n", num(spec.alpha), num(spec.beta),
                     num(spec.gamma1), num(spec.gamma2));
  out << "key,value\n";
  kv(out, "alpha", spec.alpha);
  kv(out, "beta", spec.beta);
  kv(out, "gamma1", spec.gamma1);
  kv(out, "gamma2", spec.gamma2);
  kv(out, "beta_numerator", t.beta_numerator);
  kv(out, "beta_kernel", t.beta_kernel);
  kv(out, "beta_moment", t.beta_moment);
  kv(out, "ratio", t.ratio);
  kv(out, "reduces_variance", t.ratio < 1.0 ? "true" : "false");
  kv(out, "reduction_factor", 1.0 / t.ratio);
  if (args.truncation_epsilon) {
    kv(out, "truncation_epsilon", *args.truncation_epsilon);
    kv(out, "ratio_truncated", variance_ratio_beta_truncated(spec, *args.truncation_epsilon));
  }
}

void snr_profile(const SnrProfileArgs& args, std::ostream& out, std::ostream& log) {
  const auto records = io::load_gradients(args.gradients);
  const SnrProfile profile = normalize_profile(compute_snr_bins(records, args.bins));
  io::write_profile(out, profile);
  log << fmt::format("log: snr-profile records={} bins={} {}\n", records.size(), args.bins, bell_line(profile));
  if (!args.report.empty()) {
    auto f = open_file(args.report);
    f << "key,value\n";
    write_bell(f, profile);
  }
}

void fit_snr(const FitSnrArgs& args, std::ostream& out, std::ostream& log) {
  const SnrProfile profile = io::load_profile(args.profile);
  const auto points = io::profile_points(profile);
  const SnrModelFit fit = fit_snr_model(points);
  log << fmt::format("log: fit-snr points={}\n", fit.num_points);
  out << "key,value\n";
  kv(out, "a_prime", fit.a_prime);
  kv(out, "b_prime", fit.b_prime);
  kv(out, "intercept", fit.intercept);
  kv(out, "c0", fit.c0);
  kv(out, "c1", fit.c1);
  kv(out, "median_remainder", fit.median_remainder);
  kv(out, "delta", fit.delta);
  kv(out, "efficiency_floor", fit.worst_case_efficiency());
  kv(out, "num_points", std::to_string(fit.num_points));
}

sim::SimConfig simulate_config(const SimulateArgs& args) {
  sim::SimConfig config = sim::load_sim_config(args.config);
  if (args.schedule) {
    const std::string& s = *args.schedule;
    if (s == "forward") {
      config.schedule.kind = sim::ScheduleKind::forward;
    } else if (s == "reverse") {
      config.schedule.kind = sim::ScheduleKind::reverse;
    } else if (s == "two_stage") {
      config.schedule.kind = sim::ScheduleKind::two_stage;
    } else {
      fail(ErrorKind::config, fmt::format("--schedule: expected forward, reverse or two_stage, got '{}'", s));
    }
  }
  if (args.stage1_fraction) config.schedule.stage1_fraction = *args.stage1_fraction;
  if (args.recompute_interval) config.recompute_interval = *args.recompute_interval;
  if (args.seed) config.seed = *args.seed;
  if (args.steps) config.steps = *args.steps;
  if (args.k) config.rollout_count = *args.k;
  config.validate();
  return config;
}

void simulate(const SimulateArgs& args, std::ostream& out, std::ostream& log) {
  const sim::SimConfig config = simulate_config(args);
  sim::SimWorld world = sim::build_world(config);
  log << fmt::format("log: simulate seed={} schedule={} weighting={} steps={}\n", config.seed,
                     sim::to_string(config.schedule.kind), describe(config.weighting), config.steps);

  sim::StepHook hook;
  if (!args.dump_gradients.empty()) {
    hook = [&](int step, const sim::SimWorld& w) {
      if (step != 0 && step != args.dump_step) return;
      const auto records = sim::measure_snr(w, sim::LossDirection::forward, config.rollout_count, step);
      const std::string path = fmt::format("{}_step{}.csv", args.dump_gradients, step);
      auto f = open_file(path);
      io::write_gradients(f, records);
      const SnrProfile profile = normalize_profile(compute_snr_bins(records, args.dump_bins));
      log << fmt::format("log: gradients step={} file={} {}\n", step, path, bell_line(profile));
    };
  }
  const sim::SimMetrics metrics = sim::train(world, config, hook);
  io::write_metrics(out, metrics);

  if (!args.weights_log.empty()) {
    auto f = open_file(args.weights_log);
    f << "step,reason,problem_id,p,w_tilde\n";
    for (const auto& e : metrics.weight_events)
      for (std::size_t i = 0; i < e.weights.size(); ++i)
        f << fmt::format("{},{},{},{},{}\n", e.step, e.reason, world.problem_ids[i], num(e.pass_rates[i]),
                         num(e.weights[i]));
  }
  const auto& last = metrics.checkpoints.back();
  log << fmt::format("log: final mean_p={} retention={} weight_events={}\n", num(last.mean_p), num(last.retention),
                     metrics.weight_events.size());
}

}  // namespace zpd::cmd
