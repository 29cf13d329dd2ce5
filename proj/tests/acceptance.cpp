// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "oracles.hpp"
#include "zpd/commands.hpp"
#include "zpd/distill_sim.hpp"
#include "zpd/io.hpp"
#include "zpd/kernel.hpp"
#include "zpd/numerics.hpp"
#include "zpd/robustness.hpp"
#include "zpd/sim_config.hpp"
#include "zpd/snr_profile.hpp"
#include "zpd/variance.hpp"

using namespace zpd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const std::vector<double> kDeltas{0.1, 0.3, 0.5, std::numbers::ln2};

sim::SimConfig golden() { return sim::load_sim_config(ZPD_GOLDEN_CONFIG); }

Outcome robustness_table() {
  std::ostringstream out, log;
  cmd::robustness({}, out, log);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  const std::vector<double> expected{0.990, 0.915, 0.786, 0.640};
  std::vector<double> got;
  while (std::getline(in, line)) got.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  bool ok = got.size() == expected.size();
  std::string detail;
  for (std::size_t i = 0; ok && i < got.size(); ++i) {
    ok = ok && std::abs(got[i] - expected[i]) <= 0.0005;
    detail += fmt::format("{}{:.4f}", i ? " " : "", got[i]);
  }
  return {ok, detail};
}

Outcome minimax_equalizer() {
  bool ok = true;
  double worst_gap = 0.0;
  for (double d : kDeltas) {
    const double s = 1.0 / std::cosh(d);
    ok = ok && std::abs(worst_case_efficiency(s, d) - sech2(d)) <= 1e-12;
    const double best = worst_case_efficiency(s, d);
    for (int i = 1; i <= 30000; ++i) {
      const double c = i * 1e-4;
      const double w = worst_case_efficiency(c, d);
      worst_gap = std::max(worst_gap, w - best);
      if (w > best) ok = false;
    }
  }
  return {ok, fmt::format("max grid excess {:.3g}", worst_gap)};
}

Outcome variance_closed_form() {
  const double r = variance_ratio_beta({1, 1, -0.5, -0.5});
  bool ok = r >= 0.839 && r <= 0.849;
  double lo = -0.5, hi = 0.0;
  const auto f = [](double g) { return variance_ratio_beta({1, 1, g, g}) - 1.0; };
  ok = ok && f(lo) < 0.0 && f(hi) > 0.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  CounterRng rng(3, StreamFamily::test, 0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const VarianceSpec s{3 * rng.uniform(), 3 * rng.uniform(), -0.6 + 2 * rng.uniform(), -0.6 + 2 * rng.uniform()};
    const double q = oracle::quadrature_variance_ratio(s);
    worst = std::max(worst, std::abs(variance_ratio_beta(s) - q) / q);
  }
  ok = ok && worst < 1e-6;
  return {ok, fmt::format("R={:.4f} crossover gamma={:.4f} quad rel err {:.2g}", r, lo, worst)};
}

Outcome moment_matching() {
  const auto one = select_exponents({0.05, 0.5, 0.05, 10});
  bool ok = std::abs(one.params.alpha - 1.0) <= 1e-10 && std::abs(one.params.beta - 1.0) <= 1e-10;
  ok = ok && select_exponents({0.05, 0.5, 1.0 / 12.0, 10}).validity == ExponentValidity::flat_boundary;
  CounterRng rng(5, StreamFamily::test, 0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double p = 0.05 + 0.9 * rng.uniform();
    const double v = (0.02 + 0.95 * rng.uniform()) * p * (1 - p) / 3.0;
    const auto s = select_exponents({0.01, p, v, 10});
    const double a = s.params.alpha + 1.0, b = s.params.beta + 1.0;
    const double m2 = a / (a + b);
    const double v2 = a * b / ((a + b) * (a + b) * (a + b + 1.0));
    worst = std::max({worst, std::abs(m2 - p), std::abs(v2 - v)});
  }
  ok = ok && worst <= 1e-10;
  return {ok, fmt::format("round-trip err {:.2g}", worst)};
}

Outcome theory_normalization() {
  SnrProfile p;
  for (double m : {0.1, 0.2, 0.5}) {
    SnrBin b;
    b.count = 4;
    b.mean_p = m;
    b.snr = 1.0;
    p.bins.push_back(b);
  }
  p = normalize_profile(p);
  const double a = *p.bins[0].theory_norm, b = *p.bins[1].theory_norm;
  return {std::abs(a - 0.6) <= 1e-12 && std::abs(b - 0.8) <= 1e-12, fmt::format("{:.15f} {:.15f}", a, b)};
}

Outcome gradient_check() {
  CounterRng rng(11, StreamFamily::test, 0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto f = static_cast<Eigen::Index>(1 + rng.below(16));
    const auto v = static_cast<Eigen::Index>(2 + rng.below(31));
    const sim::SimWorld w = oracle::random_world(rng, f, v);
    const auto i = static_cast<std::size_t>(rng.below(3));
    worst = std::max(worst, oracle::directional_check(w, i, sim::forward_kl, rng).rel_error);
    worst = std::max(worst, oracle::directional_check(w, i, sim::reverse_kl, rng).rel_error);
  }
  return {worst < 1e-5, fmt::format("max rel err {:.2g}", worst)};
}

Outcome empirical_variance() {
  CounterRng rng(19, StreamFamily::test, 0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto s = oracle::random_batch(rng);
    worst = std::max(worst, std::abs(variance_ratio_empirical(s).ratio - oracle::brute_force_variance_ratio(s, i)));
  }
  return {worst < 1e-10, fmt::format("max abs err {:.2g}", worst)};
}

Outcome bell_curve() {
  const auto c = golden();
  sim::SimWorld w = sim::build_world(c);
  std::vector<BellScore> scores;
  sim::train(w, c, [&](int step, const sim::SimWorld& world) {
    if (step != 0 && step != 20) return;
    const auto recs = sim::measure_snr(world, sim::LossDirection::forward, c.rollout_count, step);
    scores.push_back(bell_shape_score(normalize_profile(compute_snr_bins(recs, 10))));
  });
  bool ok = scores.size() == 2;
  for (const auto& s : scores) ok = ok && s.is_bell && s.mid_over_edge_ratio > 1.2;
  return {ok, scores.size() == 2 ? fmt::format("ratio step0={:.3f} step20={:.3f}", scores[0].mid_over_edge_ratio,
                                               scores[1].mid_over_edge_ratio)
                                 : "missing checkpoints"};
}

Outcome curriculum_migration() {
  const auto c = golden();
  sim::SimWorld w = sim::build_world(c);
  const auto m = sim::train(w, c);
  bool ok = m.checkpoints.size() >= 2;
  for (std::size_t i = 1; i < m.checkpoints.size(); ++i) ok = ok && m.checkpoints[i].mean_p > m.checkpoints[i - 1].mean_p;
  const auto& first = m.checkpoints.front().histogram.fractions;
  const auto& last = m.checkpoints.back().histogram.fractions;
  ok = ok && last[2] > first[2] && last[1] < first[1];
  return {ok, fmt::format("mean_p {:.4f}->{:.4f} med {:.3f}->{:.3f} high {:.3f}->{:.3f}", m.checkpoints.front().mean_p,
                          m.checkpoints.back().mean_p, first[1], last[1], first[2], last[2])};
}

Outcome plasticity_stability() {
  const auto run = [](WeightScheme scheme) {
    auto c = golden();
    c.weighting = scheme;
    sim::SimWorld w = sim::build_world(c);
    return sim::train(w, c).checkpoints.back();
  };
  const auto beta = run(BetaScheme{{1, 1}, 0.0});
  const auto unw = run(UnweightedScheme{});
  const auto hard = run(HardFilterScheme{0.2, 0.8});
  const double lo = std::min(beta.retention, unw.retention), hi = std::max(beta.retention, unw.retention);
  const bool between = hard.retention >= lo && hard.retention <= hi;
  const bool ties = std::abs(hard.retention - beta.retention) <= 1e-12;
  const bool ok = beta.retention <= unw.retention && beta.mean_p >= unw.mean_p && (between || ties);
  return {ok, fmt::format("retention beta={:.4f} hard={:.4f} unweighted={:.4f}; mean_p beta={:.4f} unweighted={:.4f}",
                          beta.retention, hard.retention, unw.retention, beta.mean_p, unw.mean_p)};
}

Outcome two_stage() {
  auto c = golden();
  c.schedule = {sim::ScheduleKind::two_stage, 0.5};
  c.eval_interval = 1;
  const int expected = static_cast<int>(std::lround(0.5 * c.steps));
  sim::SimWorld a = sim::build_world(c);
  const auto ma = sim::train(a, c);
  sim::SimWorld b = sim::build_world(c);
  const auto mb = sim::train(b, c);
  int switches = 0, switch_at = -1;
  for (const auto& e : ma.weight_events)
    if (e.reason == "stage_switch") {
      ++switches;
      switch_at = e.step;
    }
  bool ok = switches == 1 && switch_at == expected && ma.weight_events.size() == 2;
  for (const auto& cp : ma.checkpoints) ok = ok && cp.stage == (cp.step < expected ? "forward" : "reverse");
  std::ostringstream sa, sb;
  io::write_metrics(sa, ma);
  io::write_metrics(sb, mb);
  ok = ok && sa.str() == sb.str() && a.theta == b.theta;

  // Logged only: final pass rate and retention against forward KL alone.
  auto f = golden();
  sim::SimWorld fw = sim::build_world(f);
  const auto mf = sim::train(fw, f);
  return {ok, fmt::format("switch at {} events {}; final mean_p two-stage={:.4f} forward={:.4f}", switch_at,
                          ma.weight_events.size(), ma.checkpoints.back().mean_p, mf.checkpoints.back().mean_p)};
}

Outcome fit_recovery() {
  const auto points = [](double a, double b, double amp) {
    std::vector<SnrPoint> out;
    for (int i = 1; i <= 19; ++i) {
      const double p = i / 20.0;
      out.push_back({p, std::pow(p, a) * std::pow(1 - p, b) * std::exp(amp * std::sin(2 * std::numbers::pi * p))});
    }
    return out;
  };
  double worst = 0.0;
  for (auto [a, b] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {1.7, 0.3}}) {
    const auto f = fit_snr_model(points(a, b, 0.0));
    worst = std::max({worst, std::abs(f.a_prime - a), std::abs(f.b_prime - b)});
  }
  const double delta = fit_snr_model(points(1, 1, 0.2)).delta;
  return {worst <= 1e-6 && std::abs(delta - 0.2) <= 0.05, fmt::format("exponent err {:.2g} delta {:.4f}", worst, delta)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"robustness table", robustness_table},
      {"minimax equalizer", minimax_equalizer},
      {"variance ratio closed form", variance_closed_form},
      {"moment matching", moment_matching},
      {"snr theory normalization", theory_normalization},
      {"kl gradients", gradient_check},
      {"empirical variance oracle", empirical_variance},
      {"bell curve", bell_curve},
      {"curriculum migration", curriculum_migration},
      {"plasticity stability", plasticity_stability},
      {"two-stage schedule", two_stage},
      {"snr fit recovery", fit_recovery},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s (%.3f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
