#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zpd/kernel.hpp"
#include "zpd/passrate.hpp"
#include "zpd/rng.hpp"
#include "zpd/snr_profile.hpp"

namespace zpd::sim {

enum class LossDirection { forward, reverse };

enum class ScheduleKind { forward, reverse, two_stage };

/// Forward KL, reverse KL, or forward KL for `stage1_fraction` of the steps
/// followed by reverse KL with one pass-rate recomputation at the switch.
struct LossSchedule {
  ScheduleKind kind = ScheduleKind::forward;
  double stage1_fraction = 0.5;
};

enum class ReverseKlEstimator { exact, sampled };

/// Shape of the synthetic world.
///
/// Every problem is a single next-token prediction. The student's logits on
/// problem i are theta^T x_i plus a frozen per-problem offset. Features share
/// a common "skill" direction u; the initial student has a misconception
/// (a bias toward token 0 along u) that the teacher never shows. A latent
/// difficulty d_i in [0, 1] controls how much the student already knows the
/// answer (offset knowledge_offset + difficulty_spread * (1 - d_i) on the
/// answer logit), how confused it is (random offsets of scale
/// confusion_scale * d_i^difficulty_power) and how far the problem's
/// features sit from the shared skill direction.
struct WorldParams {
  std::size_t num_problems = 200;
  std::size_t num_anchors = 50;
  std::size_t feature_dim = 16;
  std::size_t vocab_size = 16;
  double difficulty_spread = 9.0;
  double knowledge_offset = 0.8;
  double confusion_scale = 5.5;
  double difficulty_power = 3.3;
  double misconception_strength = 6.0;
  double skill_loading = 0.7;
  double skill_falloff = 0.8;
  double teacher_sharpness = 6.0;
  double teacher_tail_sd = 0.6;
  double init_noise = 0.3;
};

struct SimConfig {
  WorldParams world;
  int rollout_count = 8;
  double rollout_temperature = 1.0;
  WeightScheme weighting = BetaScheme{};
  LossSchedule schedule;
  ReverseKlEstimator reverse_kl_estimator = ReverseKlEstimator::exact;
  /// Samples per problem for the sampled reverse-KL estimator.
  int reverse_kl_samples = 8;
  double learning_rate = 2.5;
  int steps = 100;
  /// 0 disables periodic recomputation.
  int recompute_interval = 0;
  int eval_interval = 10;
  /// 0 means full batch.
  std::size_t batch_size = 0;
  /// Multiplies every normalized weight. Only the product with the learning
  /// rate matters; exposed so that property can be checked.
  double weight_scale = 1.0;
  std::uint64_t seed = 7;

  /// Throws ErrorKind::config naming the offending key.
  void validate() const;
};

/// Step at which a two-stage schedule switches to reverse KL.
int switch_step(const SimConfig& config);

struct SimWorld {
  Eigen::MatrixXd features;         // N x F, rows x_i
  std::vector<int> answers;         // a_i
  Eigen::MatrixXd teacher_logits;   // N x V
  Eigen::MatrixXd problem_offsets;  // N x V, frozen
  Eigen::MatrixXd anchor_features;  // M x F
  Eigen::MatrixXd anchor_targets;   // M x V, initial student distribution on anchors
  Eigen::MatrixXd theta;            // F x V, the trained parameters
  Eigen::VectorXd skill_direction;  // u
  std::vector<double> difficulty;
  std::vector<std::string> problem_ids;
  double rollout_temperature = 1.0;
  std::uint64_t seed = 0;

  std::size_t num_problems() const { return answers.size(); }
  std::size_t vocab_size() const { return static_cast<std::size_t>(teacher_logits.cols()); }
};

/// Deterministic in config.seed.
SimWorld build_world(const SimConfig& config);

Eigen::VectorXd student_logits(const SimWorld& world, std::size_t i);
Eigen::VectorXd teacher_probs(const SimWorld& world, std::size_t i);

/// Exact probability of the correct token at the rollout temperature.
double expected_pass_rate(const SimWorld& world, std::size_t i);
std::vector<double> expected_pass_rates(const SimWorld& world);

/// K sampled answers for problem i. The stream is keyed by (seed, i, step).
RolloutRecord rollout_problem(const SimWorld& world, std::size_t i, int k, int step,
                              StreamFamily family = StreamFamily::rollout);
std::vector<RolloutRecord> run_rollouts(const SimWorld& world, int k, int step = 0,
                                        StreamFamily family = StreamFamily::rollout);

struct LossGrad {
  double loss = 0.0;
  Eigen::MatrixXd grad;  // F x V
};

/// KL(teacher || student) and its gradient x_i (p_S - p_T)^T.
LossGrad forward_kl(const SimWorld& world, std::size_t i);

/// KL(student || teacher), exact expectation over the student distribution.
LossGrad reverse_kl(const SimWorld& world, std::size_t i);

/// Score-function estimate of the reverse-KL gradient from `samples` student
/// draws with a leave-one-out baseline.
LossGrad reverse_kl_sampled(const SimWorld& world, std::size_t i, int samples, int step);

/// Mean over anchors of KL(anchor target || current student).
double retention(const SimWorld& world);

struct Checkpoint {
  int step = 0;
  std::string stage;
  double mean_p = 0.0;
  PassRateHistogram histogram;
  double retention = 0.0;
  double loss = 0.0;  // weighted mean loss of the active stage
  int weights_version = 0;
};

/// A pass-rate estimation and weight computation.
struct WeightEvent {
  int step = 0;
  std::string reason;  // "initial", "periodic", "stage_switch"
  std::vector<double> pass_rates;
  std::vector<double> weights;
};

struct SimMetrics {
  std::vector<Checkpoint> checkpoints;
  std::vector<WeightEvent> weight_events;
};

/// Maps estimated pass rates to raw weights.
using WeightFn = std::function<std::vector<double>(std::span<const double>)>;

/// Called at the start of every step (before any update) and once after the
/// last one.
using StepHook = std::function<void(int step, const SimWorld& world)>;

/// Runs the weighted distillation loop in place on `world`.
SimMetrics train(SimWorld& world, const SimConfig& config, const StepHook& hook = {});

/// Same loop with a caller-supplied weight function in place of the
/// configured scheme.
SimMetrics train_with_weights(SimWorld& world, const SimConfig& config, const WeightFn& weight_fn,
                              const StepHook& hook = {});

/// One flattened gradient per problem (row-major F x V) with a fresh
/// K-rollout pass-rate estimate drawn from the probe streams.
std::vector<GradientRecord> measure_snr(const SimWorld& world, LossDirection direction, int k, int step);

std::string to_string(LossDirection direction);
std::string to_string(ScheduleKind kind);

}  // namespace zpd::sim
