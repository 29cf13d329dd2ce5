#include "zpd/variance.hpp"

#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include "zpd/error.hpp"
#include "zpd/numerics.hpp"

namespace zpd {

void VarianceSpec::validate() const {
  require(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma1) && std::isfinite(gamma2),
          ErrorKind::domain, "variance spec entries must be finite");
  require(alpha >= 0.0 && beta >= 0.0, ErrorKind::domain,
          fmt::format("kernel exponents must be nonnegative, got ({}, {})", alpha, beta));
  require(gamma1 + 1.0 > 0.0, ErrorKind::domain, fmt::format("γ1+1 must be positive (γ1 = {})", gamma1));
  require(gamma2 + 1.0 > 0.0, ErrorKind::domain, fmt::format("γ2+1 must be positive (γ2 = {})", gamma2));
  require(2.0 * alpha + gamma1 + 1.0 > 0.0, ErrorKind::domain,
          fmt::format("2α+γ1+1 must be positive (got {})", 2.0 * alpha + gamma1 + 1.0));
  require(2.0 * beta + gamma2 + 1.0 > 0.0, ErrorKind::domain,
          fmt::format("2β+γ2+1 must be positive (got {})", 2.0 * beta + gamma2 + 1.0));
}

void EmpiricalBatchStats::validate() const {
  require(!records.empty(), ErrorKind::domain, "batch statistics need at least one record");
  require(batch_size >= 1, ErrorKind::domain, "batch size must be at least 1");
  const std::size_t dim = records.front().mean_gradient.size();
  double weight_total = 0.0;
  for (const auto& r : records) {
    require(r.mean_gradient.size() == dim, ErrorKind::domain, "mean gradients have mismatched dimensions");
    require(r.weight >= 0.0, ErrorKind::domain, fmt::format("negative weight {}", r.weight));
    double norm_sq = 0.0;
    for (double g : r.mean_gradient) {
      norm_sq += g * g;
    }
    require(r.second_moment >= norm_sq * (1.0 - 1e-12), ErrorKind::domain,
            fmt::format("second moment {} is below the squared mean norm {}", r.second_moment, norm_sq));
    weight_total += r.weight;
  }
  const double weight_mean = weight_total / static_cast<double>(records.size());
  require(std::abs(weight_mean - 1.0) <= 1e-9, ErrorKind::domain,
          fmt::format("normalized weights must have mean 1, got {}", weight_mean));
}

namespace {

struct Moments {
  double mean_w = 0.0;
  double var_w = 0.0;
  double mean_w2 = 0.0;
  double mean_s2 = 0.0;
  double cov_w2_s2 = 0.0;
  double weighted_mean_grad_sq = 0.0;
  double mean_grad_sq = 0.0;
};

Moments population_moments(const EmpiricalBatchStats& stats) {
  const auto n = static_cast<double>(stats.records.size());
  const std::size_t dim = stats.records.front().mean_gradient.size();
  Moments m;
  std::vector<double> mean_g(dim, 0.0);
  std::vector<double> mean_wg(dim, 0.0);
  for (const auto& r : stats.records) {
    m.mean_w += r.weight;
    m.mean_w2 += r.weight * r.weight;
    m.mean_s2 += r.second_moment;
    for (std::size_t k = 0; k < dim; ++k) {
      mean_g[k] += r.mean_gradient[k];
      mean_wg[k] += r.weight * r.mean_gradient[k];
    }
  }
  m.mean_w /= n;
  m.mean_w2 /= n;
  m.mean_s2 /= n;
  for (std::size_t k = 0; k < dim; ++k) {
    mean_g[k] /= n;
    mean_wg[k] /= n;
    m.mean_grad_sq += mean_g[k] * mean_g[k];
    m.weighted_mean_grad_sq += mean_wg[k] * mean_wg[k];
  }
  for (const auto& r : stats.records) {
    m.var_w += (r.weight - m.mean_w) * (r.weight - m.mean_w);
    m.cov_w2_s2 += (r.weight * r.weight - m.mean_w2) * (r.second_moment - m.mean_s2);
  }
  m.var_w /= n;
  m.cov_w2_s2 /= n;
  return m;
}

}  // namespace

VarianceRatioTerms variance_ratio_empirical(const EmpiricalBatchStats& stats) {
  stats.validate();
  const Moments m = population_moments(stats);
  require(m.mean_s2 > 0.0, ErrorKind::degenerate, "mean second moment is zero");
  VarianceRatioTerms t;
  t.var_weight = m.var_w;
  t.cov_weight_sq_s2 = m.cov_w2_s2;
  t.mean_s2 = m.mean_s2;
  t.weighted_mean_grad_sq = m.weighted_mean_grad_sq;
  t.mean_grad_sq = m.mean_grad_sq;
  t.numerator = 1.0 + m.var_w + m.cov_w2_s2 / m.mean_s2 - m.weighted_mean_grad_sq / m.mean_s2;
  t.denominator = 1.0 - m.mean_grad_sq / m.mean_s2;
  const auto n = static_cast<double>(stats.batch_size);
  t.sigma_unif_sq = (m.mean_s2 - m.mean_grad_sq) / n;
  require(t.sigma_unif_sq > 0.0, ErrorKind::degenerate,
          "uniform-weighting variance is zero; every problem has a deterministic identical gradient");
  t.sigma_eff_sq = t.numerator * m.mean_s2 / n;
  t.ratio = t.numerator / t.denominator;
  return t;
}

CovCondition cov_condition(const EmpiricalBatchStats& stats) {
  stats.validate();
  const Moments m = population_moments(stats);
  CovCondition c;
  c.lhs = -m.cov_w2_s2;
  c.rhs = m.var_w * m.mean_s2;
  c.holds = c.lhs > c.rhs;
  return c;
}

BetaRatioTerms variance_ratio_beta_terms(const VarianceSpec& spec) {
  spec.validate();
  const double log_num = log_beta(2.0 * spec.alpha + spec.gamma1 + 1.0, 2.0 * spec.beta + spec.gamma2 + 1.0);
  const double log_kernel = log_beta(spec.alpha + 1.0, spec.beta + 1.0);
  const double log_moment = log_beta(spec.gamma1 + 1.0, spec.gamma2 + 1.0);
  BetaRatioTerms t;
  t.ratio = std::exp(log_num - 2.0 * log_kernel - log_moment);
  t.beta_numerator = std::exp(log_num);
  t.beta_kernel = std::exp(log_kernel);
  t.beta_moment = std::exp(log_moment);
  return t;
}

double variance_ratio_beta(const VarianceSpec& spec) { return variance_ratio_beta_terms(spec).ratio; }

double variance_ratio_beta_truncated(const VarianceSpec& spec, double epsilon) {
  spec.validate();
  require(epsilon >= 0.0 && epsilon < 0.5, ErrorKind::domain,
          fmt::format("epsilon must lie in [0, 0.5), got {}", epsilon));
  // ∫_eps^{1-eps} p^{a-1} (1-p)^{b-1} dp = B(a, b) [I_{1-eps}(a, b) - I_eps(a, b)]
  const auto log_partial = [epsilon](double a, double b) {
    const double mass = boost::math::ibeta(a, b, 1.0 - epsilon) - boost::math::ibeta(a, b, epsilon);
    return log_beta(a, b) + std::log(mass);
  };
  const double log_num = log_partial(2.0 * spec.alpha + spec.gamma1 + 1.0, 2.0 * spec.beta + spec.gamma2 + 1.0);
  const double log_kernel = log_partial(spec.alpha + 1.0, spec.beta + 1.0);
  const double log_moment = log_partial(spec.gamma1 + 1.0, spec.gamma2 + 1.0);
  // Each expectation carries a 1 / (1 - 2 eps) density factor.
  return (1.0 - 2.0 * epsilon) * std::exp(log_num - 2.0 * log_kernel - log_moment);
}

std::pair<double, double> gamma_from_signal(double a_s, double b_s, double a_prime, double b_prime) {
  require(std::isfinite(a_s) && std::isfinite(b_s) && std::isfinite(a_prime) && std::isfinite(b_prime),
          ErrorKind::domain, "exponents must be finite");
  return {2.0 * a_s - a_prime, 2.0 * b_s - b_prime};
}

ConvergenceBound convergence_bound(double loss_gap, double eta, double lipschitz, long long steps,
                                   double sigma_eff_sq) {
  require(loss_gap >= 0.0, ErrorKind::domain, fmt::format("loss gap must be nonnegative, got {}", loss_gap));
  require(eta > 0.0, ErrorKind::domain, fmt::format("learning rate must be positive, got {}", eta));
  require(lipschitz > 0.0, ErrorKind::domain, fmt::format("smoothness constant must be positive, got {}", lipschitz));
  require(steps >= 1, ErrorKind::domain, fmt::format("step count must be at least 1, got {}", steps));
  require(sigma_eff_sq >= 0.0, ErrorKind::domain, fmt::format("variance must be nonnegative, got {}", sigma_eff_sq));
  ConvergenceBound b;
  b.value = 2.0 * loss_gap / (eta * static_cast<double>(steps)) + eta * lipschitz * sigma_eff_sq;
  b.step_size_warning = eta > 1.0 / lipschitz;
  return b;
}

}  // namespace zpd
