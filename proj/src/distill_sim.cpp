#include "zpd/distill_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "zpd/error.hpp"
#include "zpd/numerics.hpp"

namespace zpd::sim {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd softmax_vec(const Eigen::VectorXd& z, double temperature = 1.0) {
  Eigen::VectorXd out(z.size());
  softmax(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())),
          std::span<double>(out.data(), static_cast<std::size_t>(out.size())), temperature);
  return out;
}

Eigen::VectorXd log_softmax_vec(const Eigen::VectorXd& z) {
  const double lse = log_sum_exp(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
  return z.array() - lse;
}

// Unit vector in the span of `basis` from a Gaussian draw.
Eigen::VectorXd random_direction(const Eigen::MatrixXd& basis, CounterRng& rng) {
  Eigen::VectorXd n(basis.cols());
  for (Eigen::Index j = 0; j < n.size(); ++j) n(j) = rng.normal();
  Eigen::VectorXd v = basis * n;
  const double norm = v.norm();
  if (norm == 0.0) return basis.col(0);
  return v / norm;
}

void check_index(const SimWorld& world, std::size_t i) {
  require(i < world.num_problems(), ErrorKind::domain,
          fmt::format("problem index {} out of range ({} problems)", i, world.num_problems()));
}

}  // namespace

int switch_step(const SimConfig& config) {
  const int s = static_cast<int>(std::lround(config.schedule.stage1_fraction * config.steps));
  return std::clamp(s, 1, std::max(1, config.steps - 1));
}

SimWorld build_world(const SimConfig& config) {
  const WorldParams& wp = config.world;
  require(wp.vocab_size >= 2, ErrorKind::domain, "vocab_size must be at least 2");
  require(wp.feature_dim >= 1, ErrorKind::domain, "feature_dim must be at least 1");
  config.validate();

  const auto N = static_cast<Eigen::Index>(wp.num_problems);
  const auto M = static_cast<Eigen::Index>(wp.num_anchors);
  const auto F = static_cast<Eigen::Index>(wp.feature_dim);
  const auto V = static_cast<Eigen::Index>(wp.vocab_size);

  SimWorld w;
  w.seed = config.seed;
  w.rollout_temperature = config.rollout_temperature;

  CounterRng global(config.seed, StreamFamily::world, 0, 0);
  Eigen::MatrixXd gauss(F, F);
  for (Eigen::Index c = 0; c < F; ++c)
    for (Eigen::Index r = 0; r < F; ++r) gauss(r, c) = global.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(F, F);
  w.skill_direction = Q.col(0);
  const Eigen::MatrixXd P = Q.rightCols(F - 1);

  w.theta.resize(F, V);
  for (Eigen::Index c = 0; c < V; ++c)
    for (Eigen::Index r = 0; r < F; ++r) w.theta(r, c) = wp.init_noise * global.normal();
  w.theta.col(0) += wp.misconception_strength * w.skill_direction;

  w.features.resize(N, F);
  w.teacher_logits.resize(N, V);
  w.problem_offsets.resize(N, V);
  w.answers.resize(wp.num_problems);
  w.difficulty.resize(wp.num_problems);
  w.problem_ids.resize(wp.num_problems);
  for (Eigen::Index i = 0; i < N; ++i) {
    CounterRng rng(config.seed, StreamFamily::world, static_cast<std::uint64_t>(i), 1);
    const double d = rng.uniform();
    const double dp = std::pow(d, wp.difficulty_power);
    Eigen::VectorXd x;
    if (F == 1) {
      x = w.skill_direction;
    } else {
      const Eigen::VectorXd xi = random_direction(P, rng);
      const double c = wp.skill_loading * (1.0 - wp.skill_falloff * dp);
      x = c * w.skill_direction + std::sqrt(std::max(0.0, 1.0 - c * c)) * xi;
    }
    w.features.row(i) = x.transpose();
    const int a = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(V - 1)));
    for (Eigen::Index k = 0; k < V; ++k) w.teacher_logits(i, k) = wp.teacher_tail_sd * rng.normal();
    w.teacher_logits(i, a) += wp.teacher_sharpness;
    for (Eigen::Index k = 0; k < V; ++k) w.problem_offsets(i, k) = wp.confusion_scale * dp * rng.normal();
    w.problem_offsets(i, a) += wp.knowledge_offset + wp.difficulty_spread * (1.0 - d);

    const auto iu = static_cast<std::size_t>(i);
    w.answers[iu] = a;
    w.difficulty[iu] = d;
    w.problem_ids[iu] = fmt::format("p{:04d}", i);
  }

  w.anchor_features.resize(M, F);
  w.anchor_targets.resize(M, V);
  for (Eigen::Index j = 0; j < M; ++j) {
    CounterRng rng(config.seed, StreamFamily::world, static_cast<std::uint64_t>(j), 2);
    const Eigen::VectorXd xa = F == 1 ? Eigen::VectorXd(w.skill_direction) : random_direction(P, rng);
    w.anchor_features.row(j) = xa.transpose();
    w.anchor_targets.row(j) = softmax_vec(w.theta.transpose() * xa).transpose();
  }
  return w;
}

Eigen::VectorXd student_logits(const SimWorld& world, std::size_t i) {
  check_index(world, i);
  const auto r = static_cast<Eigen::Index>(i);
  return world.theta.transpose() * world.features.row(r).transpose() + world.problem_offsets.row(r).transpose();
}

Eigen::VectorXd teacher_probs(const SimWorld& world, std::size_t i) {
  check_index(world, i);
  return softmax_vec(world.teacher_logits.row(static_cast<Eigen::Index>(i)).transpose());
}

double expected_pass_rate(const SimWorld& world, std::size_t i) {
  const Eigen::VectorXd probs = softmax_vec(student_logits(world, i), world.rollout_temperature);
  return probs(world.answers[i]);
}

std::vector<double> expected_pass_rates(const SimWorld& world) {
  std::vector<double> out(world.num_problems());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = expected_pass_rate(world, i);
  return out;
}

RolloutRecord rollout_problem(const SimWorld& world, std::size_t i, int k, int step, StreamFamily family) {
  require(k >= 1, ErrorKind::domain, "rollout count must be at least 1");
  const std::vector<double> probs = to_std(softmax_vec(student_logits(world, i), world.rollout_temperature));
  CounterRng rng(world.seed, family, i, static_cast<std::uint64_t>(step));
  RolloutRecord rec;
  rec.problem_id = world.problem_ids[i];
  rec.outcomes.reserve(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r)
    rec.outcomes.push_back(static_cast<int>(rng.categorical(probs)) == world.answers[i]);
  return rec;
}

std::vector<RolloutRecord> run_rollouts(const SimWorld& world, int k, int step, StreamFamily family) {
  std::vector<RolloutRecord> out;
  out.reserve(world.num_problems());
  for (std::size_t i = 0; i < world.num_problems(); ++i) out.push_back(rollout_problem(world, i, k, step, family));
  return out;
}

LossGrad forward_kl(const SimWorld& world, std::size_t i) {
  const Eigen::VectorXd zs = student_logits(world, i);
  const Eigen::VectorXd zt = world.teacher_logits.row(static_cast<Eigen::Index>(i)).transpose();
  const Eigen::VectorXd log_s = log_softmax_vec(zs);
  const Eigen::VectorXd log_t = log_softmax_vec(zt);
  const Eigen::VectorXd pt = log_t.array().exp();
  const Eigen::VectorXd ps = log_s.array().exp();
  LossGrad out;
  out.loss = (pt.array() * (log_t - log_s).array()).sum();
  out.grad = world.features.row(static_cast<Eigen::Index>(i)).transpose() * (ps - pt).transpose();
  return out;
}

LossGrad reverse_kl(const SimWorld& world, std::size_t i) {
  const Eigen::VectorXd zs = student_logits(world, i);
  const Eigen::VectorXd zt = world.teacher_logits.row(static_cast<Eigen::Index>(i)).transpose();
  const Eigen::VectorXd log_s = log_softmax_vec(zs);
  const Eigen::VectorXd log_t = log_softmax_vec(zt);
  const Eigen::VectorXd ps = log_s.array().exp();
  const Eigen::VectorXd diff = log_s - log_t;
  LossGrad out;
  out.loss = ps.dot(diff);
  const Eigen::VectorXd dz = ps.array() * (diff.array() - out.loss);
  out.grad = world.features.row(static_cast<Eigen::Index>(i)).transpose() * dz.transpose();
  return out;
}

LossGrad reverse_kl_sampled(const SimWorld& world, std::size_t i, int samples, int step) {
  require(samples >= 1, ErrorKind::domain, "reverse_kl_samples must be at least 1");
  const Eigen::VectorXd zs = student_logits(world, i);
  const Eigen::VectorXd zt = world.teacher_logits.row(static_cast<Eigen::Index>(i)).transpose();
  const Eigen::VectorXd log_s = log_softmax_vec(zs);
  const Eigen::VectorXd log_t = log_softmax_vec(zt);
  const Eigen::VectorXd ps = log_s.array().exp();
  const std::vector<double> probs = to_std(ps);

  CounterRng rng(world.seed, StreamFamily::sampled_reverse_kl, i, static_cast<std::uint64_t>(step));
  std::vector<Eigen::Index> draws(static_cast<std::size_t>(samples));
  std::vector<double> f(draws.size());
  double total = 0.0;
  for (std::size_t s = 0; s < draws.size(); ++s) {
    draws[s] = static_cast<Eigen::Index>(rng.categorical(probs));
    f[s] = log_s(draws[s]) - log_t(draws[s]);
    total += f[s];
  }
  const double n = static_cast<double>(samples);
  Eigen::VectorXd dz = Eigen::VectorXd::Zero(zs.size());
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const double baseline = samples > 1 ? (total - f[s]) / (n - 1.0) : 0.0;
    Eigen::VectorXd score = -ps;
    score(draws[s]) += 1.0;
    dz += (f[s] - baseline) * score;
  }
  dz /= n;
  LossGrad out;
  out.loss = total / n;
  out.grad = world.features.row(static_cast<Eigen::Index>(i)).transpose() * dz.transpose();
  return out;
}

double retention(const SimWorld& world) {
  const Eigen::Index m = world.anchor_features.rows();
  if (m == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd target = world.anchor_targets.row(j).transpose();
    const Eigen::VectorXd log_s = log_softmax_vec(world.theta.transpose() * world.anchor_features.row(j).transpose());
    double kl = 0.0;
    for (Eigen::Index k = 0; k < target.size(); ++k)
      if (target(k) > 0.0) kl += target(k) * (std::log(target(k)) - log_s(k));
    total += std::max(0.0, kl);
  }
  return total / static_cast<double>(m);
}

namespace {

LossGrad stage_loss(const SimWorld& world, std::size_t i, LossDirection dir, const SimConfig& config, int step) {
  if (dir == LossDirection::forward) return forward_kl(world, i);
  if (config.reverse_kl_estimator == ReverseKlEstimator::sampled)
    return reverse_kl_sampled(world, i, config.reverse_kl_samples, step);
  return reverse_kl(world, i);
}

double stage_loss_value(const SimWorld& world, std::size_t i, LossDirection dir) {
  return dir == LossDirection::forward ? forward_kl(world, i).loss : reverse_kl(world, i).loss;
}

std::vector<std::size_t> batch_indices(const SimConfig& config, std::size_t n, int step) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (config.batch_size == 0 || config.batch_size >= n) return idx;
  CounterRng rng(config.seed, StreamFamily::minibatch, 0, static_cast<std::uint64_t>(step));
  for (std::size_t j = 0; j < config.batch_size; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(idx[j], idx[pick]);
  }
  idx.resize(config.batch_size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

SimMetrics train_with_weights(SimWorld& world, const SimConfig& config, const WeightFn& weight_fn,
                              const StepHook& hook) {
  config.validate();
  require(static_cast<bool>(weight_fn), ErrorKind::domain, "weight function is empty");
  const std::size_t n = world.num_problems();
  require(n > 0, ErrorKind::domain, "world has no problems");

  SimMetrics metrics;
  std::vector<double> weights;
  int version = 0;
  const auto recompute = [&](int step, const char* reason) {
    const auto records = run_rollouts(world, config.rollout_count, step);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = estimate_pass_rate(records[i]).p();
    const std::vector<double> raw = weight_fn(p);
    require(raw.size() == n, ErrorKind::domain, "weight function returned the wrong number of weights");
    weights = normalize_to_unit_mean(raw);
    for (double& v : weights) v *= config.weight_scale;
    ++version;
    metrics.weight_events.push_back({step, reason, std::move(p), weights});
  };

  const bool two_stage = config.schedule.kind == ScheduleKind::two_stage;
  const int switch_at = two_stage ? switch_step(config) : -1;
  LossDirection dir = config.schedule.kind == ScheduleKind::reverse ? LossDirection::reverse : LossDirection::forward;

  recompute(0, "initial");
  const auto F = world.theta.rows();
  const auto V = world.theta.cols();
  for (int t = 0;; ++t) {
    if (t > 0) {
      if (t == switch_at) {
        dir = LossDirection::reverse;
        recompute(t, "stage_switch");
      } else if (config.recompute_interval > 0 && t % config.recompute_interval == 0 && t < config.steps) {
        recompute(t, "periodic");
      }
    }
    if (hook) hook(t, world);
    if (t % config.eval_interval == 0 || t == config.steps) {
      Checkpoint cp;
      cp.step = t;
      cp.stage = to_string(dir);
      const std::vector<double> p = expected_pass_rates(world);
      cp.mean_p = mean(p);
      cp.histogram = histogram(p, kCurriculumEdges);
      cp.retention = retention(world);
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) loss += weights[i] * stage_loss_value(world, i, dir);
      cp.loss = loss / static_cast<double>(n);
      cp.weights_version = version;
      metrics.checkpoints.push_back(std::move(cp));
    }
    if (t == config.steps) break;

    const auto batch = batch_indices(config, n, t);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(F, V);
    for (std::size_t i : batch) {
      if (weights[i] == 0.0) continue;
      g += weights[i] * stage_loss(world, i, dir, config, t).grad;
    }
    world.theta -= (config.learning_rate / static_cast<double>(batch.size())) * g;
  }
  return metrics;
}

SimMetrics train(SimWorld& world, const SimConfig& config, const StepHook& hook) {
  validate_scheme(config.weighting);
  const WeightScheme scheme = config.weighting;
  return train_with_weights(
      world, config, [scheme](std::span<const double> p) { return scheme_weights(scheme, p); }, hook);
}

std::vector<GradientRecord> measure_snr(const SimWorld& world, LossDirection direction, int k, int step) {
  const auto records = run_rollouts(world, k, step, StreamFamily::probe);
  std::vector<GradientRecord> out;
  out.reserve(world.num_problems());
  for (std::size_t i = 0; i < world.num_problems(); ++i) {
    const LossGrad lg = direction == LossDirection::forward ? forward_kl(world, i) : reverse_kl(world, i);
    GradientRecord rec;
    rec.problem_id = world.problem_ids[i];
    rec.pass_rate = estimate_pass_rate(records[i]).p();
    rec.gradient.reserve(static_cast<std::size_t>(lg.grad.size()));
    for (Eigen::Index r = 0; r < lg.grad.rows(); ++r)
      for (Eigen::Index c = 0; c < lg.grad.cols(); ++c) rec.gradient.push_back(lg.grad(r, c));
    out.push_back(std::move(rec));
  }
  return out;
}

std::string to_string(LossDirection direction) {
  return direction == LossDirection::forward ? "forward" : "reverse";
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::forward: return "forward";
    case ScheduleKind::reverse: return "reverse";
    case ScheduleKind::two_stage: return "two_stage";
  }
  return "unknown";
}

}  // namespace zpd::sim
