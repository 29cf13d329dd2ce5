#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace zpd {

/// Kernel exponents plus the power-law exponents of the gradient second
/// moment s^2(p) ∝ p^gamma1 (1-p)^gamma2.
struct VarianceSpec {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;

  /// Throws ErrorKind::domain naming the first non-positive Beta argument.
  void validate() const;
};

/// One problem's contribution to a weighted minibatch gradient.
struct BatchRecord {
  double weight = 1.0;         // normalized weight, population mean 1
  double second_moment = 0.0;  // s^2 = E ||g||^2
  std::vector<double> mean_gradient;
};

struct EmpiricalBatchStats {
  std::vector<BatchRecord> records;
  std::size_t batch_size = 1;

  void validate() const;
};

/// Every term of the weighted-to-uniform variance ratio, population moments.
struct VarianceRatioTerms {
  double ratio = 0.0;
  double var_weight = 0.0;            // Var(w)
  double cov_weight_sq_s2 = 0.0;      // Cov(w^2, s^2)
  double mean_s2 = 0.0;               // E[s^2]
  double weighted_mean_grad_sq = 0.0; // ||E[w g]||^2
  double mean_grad_sq = 0.0;          // ||E[g]||^2
  double numerator = 0.0;
  double denominator = 0.0;
  double sigma_eff_sq = 0.0;          // per-sample variances divided by batch_size
  double sigma_unif_sq = 0.0;
};

VarianceRatioTerms variance_ratio_empirical(const EmpiricalBatchStats& stats);

struct CovCondition {
  bool holds = false;
  double lhs = 0.0;  // -Cov(w^2, s^2)
  double rhs = 0.0;  // Var(w) E[s^2]
};

/// Sufficient condition for a ratio below one when mean gradients vanish.
CovCondition cov_condition(const EmpiricalBatchStats& stats);

struct BetaRatioTerms {
  double ratio = 0.0;
  double beta_numerator = 0.0;  // B(2a + g1 + 1, 2b + g2 + 1)
  double beta_kernel = 0.0;     // B(a + 1, b + 1)
  double beta_moment = 0.0;     // B(g1 + 1, g2 + 1)
};

/// Closed-form ratio for uniform pass rates on [0, 1], evaluated in log space.
double variance_ratio_beta(const VarianceSpec& spec);
BetaRatioTerms variance_ratio_beta_terms(const VarianceSpec& spec);

/// Same ratio with pass rates uniform on [epsilon, 1 - epsilon] (regularized
/// incomplete Beta functions). Diagnostic only.
double variance_ratio_beta_truncated(const VarianceSpec& spec, double epsilon);

/// (2 a_s - a', 2 b_s - b').
std::pair<double, double> gamma_from_signal(double a_s, double b_s, double a_prime, double b_prime);

struct ConvergenceBound {
  double value = 0.0;
  /// Set when eta > 1 / L, outside the regime the bound assumes.
  bool step_size_warning = false;
};

/// 2 loss_gap / (eta T) + eta L sigma_eff_sq.
ConvergenceBound convergence_bound(double loss_gap, double eta, double lipschitz, long long steps,
                                   double sigma_eff_sq);

}  // namespace zpd
