#pragma once

#include <cstddef>
#include <span>

namespace zpd {

/// Quantities entering the one-step descent bound of a weighted gradient step.
struct DescentParams {
  double eta = 0.0;            // learning rate
  double signal_sq = 0.0;      // ||E g||^2
  double second_moment = 0.0;  // E ||g||^2, at least signal_sq
  double lambda_max = 0.0;     // curvature bound

  void validate() const;
};

/// eta w ||E g||^2 - (eta^2 / 2) w^2 E||g||^2 lambda_max.
double descent_rate(double w, const DescentParams& d);

/// Maximizer of descent_rate over w >= 0.
double optimal_weight(const DescentParams& d);

/// Descent achieved at rho * w_opt relative to the optimum: 2 rho - rho^2.
double efficiency_ratio(double rho);

/// Equalizing scale sech(delta).
double minimax_scale(double delta);

/// Worst case of efficiency_ratio over a multiplicative SNR^2 error in
/// [e^-delta, e^delta] when the weight is c times the nominal optimum.
double worst_case_efficiency(double c, double delta);

/// sech(delta) p^a' (1-p)^b'.
double minimax_weight(double p, double a_prime, double b_prime, double delta);

/// log snr_sq - a' log p - b' log(1-p).
double remainder(double p, double snr_sq, double a_prime, double b_prime);

struct SnrPoint {
  double p = 0.0;
  double snr_sq = 0.0;
};

/// Log-linear model snr^2 = exp(intercept) p^a' (1-p)^b' e^{r(p)}.
///
/// c0 and c1 are exp(r) at the lowest and highest fitted pass rate (the
/// boundary constants of the decomposition). `delta` is the largest
/// deviation of r from its median over the fitted points; a constant
/// offset in r rescales the weight and does not count as misspecification.
struct SnrModelFit {
  double a_prime = 0.0;
  double b_prime = 0.0;
  double intercept = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  double median_remainder = 0.0;
  double delta = 0.0;
  std::size_t num_points = 0;

  double worst_case_efficiency() const;
};

/// Joint least squares of log snr^2 on (log p, log(1-p), 1). Points with
/// p in {0, 1} are skipped. Needs at least 4 usable points with at least one
/// on each side of 1/2 and three distinct pass rates.
SnrModelFit fit_snr_model(std::span<const SnrPoint> points);

}  // namespace zpd
