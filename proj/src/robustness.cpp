#include "zpd/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "zpd/error.hpp"
#include "zpd/kernel.hpp"
#include "zpd/numerics.hpp"

namespace zpd {

void DescentParams::validate() const {
  require(std::isfinite(eta) && eta > 0.0, ErrorKind::domain, fmt::format("learning rate must be positive, got {}", eta));
  require(std::isfinite(signal_sq) && signal_sq >= 0.0, ErrorKind::domain,
          fmt::format("signal_sq must be nonnegative, got {}", signal_sq));
  require(std::isfinite(second_moment) && second_moment >= signal_sq, ErrorKind::domain,
          fmt::format("second moment {} is below the squared mean {}", second_moment, signal_sq));
  require(std::isfinite(lambda_max) && lambda_max > 0.0, ErrorKind::domain,
          fmt::format("lambda_max must be positive, got {}", lambda_max));
}

double descent_rate(double w, const DescentParams& d) {
  d.validate();
  require(w >= 0.0, ErrorKind::domain, fmt::format("weight must be nonnegative, got {}", w));
  return d.eta * w * d.signal_sq - 0.5 * d.eta * d.eta * w * w * d.second_moment * d.lambda_max;
}

double optimal_weight(const DescentParams& d) {
  d.validate();
  require(d.second_moment > 0.0, ErrorKind::degenerate, "zero gradient second moment");
  return d.signal_sq / (d.eta * d.second_moment * d.lambda_max);
}

double efficiency_ratio(double rho) {
  require(rho >= 0.0, ErrorKind::domain, fmt::format("rho must be nonnegative, got {}", rho));
  return 2.0 * rho - rho * rho;
}

double minimax_scale(double delta) {
  require(delta >= 0.0, ErrorKind::domain, fmt::format("delta must be nonnegative, got {}", delta));
  return sech(delta);
}

double worst_case_efficiency(double c, double delta) {
  require(c > 0.0, ErrorKind::domain, fmt::format("scale must be positive, got {}", c));
  require(delta >= 0.0, ErrorKind::domain, fmt::format("delta must be nonnegative, got {}", delta));
  // efficiency_ratio is concave in rho, so the minimum over the interval
  // [c e^-delta, c e^delta] sits at one of its endpoints.
  return std::min(efficiency_ratio(c * std::exp(delta)), efficiency_ratio(c * std::exp(-delta)));
}

double minimax_weight(double p, double a_prime, double b_prime, double delta) {
  require(a_prime > 0.0 && b_prime > 0.0, ErrorKind::domain,
          fmt::format("boundary exponents must be positive, got ({}, {})", a_prime, b_prime));
  return minimax_scale(delta) * beta_weight(p, KernelParams{a_prime, b_prime});
}

double remainder(double p, double snr_sq, double a_prime, double b_prime) {
  require(p > 0.0 && p < 1.0, ErrorKind::singularity, fmt::format("remainder is singular at p = {}", p));
  require(snr_sq > 0.0, ErrorKind::domain, fmt::format("squared SNR must be positive, got {}", snr_sq));
  return std::log(snr_sq) - a_prime * std::log(p) - b_prime * std::log1p(-p);
}

double SnrModelFit::worst_case_efficiency() const { return sech2(delta); }

SnrModelFit fit_snr_model(std::span<const SnrPoint> points) {
  std::vector<SnrPoint> usable;
  for (const auto& pt : points) {
    require(pt.p >= 0.0 && pt.p <= 1.0, ErrorKind::domain, fmt::format("pass rate {} outside [0, 1]", pt.p));
    if (pt.p == 0.0 || pt.p == 1.0) {
      continue;
    }
    require(pt.snr_sq > 0.0 && std::isfinite(pt.snr_sq), ErrorKind::domain,
            fmt::format("squared SNR at p = {} must be positive and finite, got {}", pt.p, pt.snr_sq));
    usable.push_back(pt);
  }
  require(usable.size() >= 4, ErrorKind::fit,
          fmt::format("SNR fit needs at least 4 interior points, got {}", usable.size()));
  const bool has_low = std::any_of(usable.begin(), usable.end(), [](const SnrPoint& s) { return s.p < 0.5; });
  const bool has_high = std::any_of(usable.begin(), usable.end(), [](const SnrPoint& s) { return s.p > 0.5; });
  require(has_low && has_high, ErrorKind::fit, "SNR fit needs points on both sides of p = 1/2");

  const auto n = static_cast<Eigen::Index>(usable.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = usable[static_cast<std::size_t>(i)];
    design(i, 0) = std::log(pt.p);
    design(i, 1) = std::log1p(-pt.p);
    design(i, 2) = 1.0;
    target(i) = std::log(pt.snr_sq);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  require(qr.rank() == 3, ErrorKind::fit, "SNR fit design is degenerate (fewer than 3 distinct pass rates)");
  const Eigen::Vector3d coef = qr.solve(target);

  SnrModelFit fit;
  fit.a_prime = coef(0);
  fit.b_prime = coef(1);
  fit.intercept = coef(2);
  fit.num_points = usable.size();
  require(fit.a_prime > 0.0 && fit.b_prime > 0.0, ErrorKind::fit,
          fmt::format("fitted exponents ({}, {}) are not both positive; the profile does not vanish at both ends",
                      fit.a_prime, fit.b_prime));

  std::vector<double> r(usable.size());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    r[i] = remainder(usable[i].p, usable[i].snr_sq, fit.a_prime, fit.b_prime);
  }
  const auto lowest = std::min_element(usable.begin(), usable.end(),
                                       [](const SnrPoint& x, const SnrPoint& y) { return x.p < y.p; });
  const auto highest = std::max_element(usable.begin(), usable.end(),
                                        [](const SnrPoint& x, const SnrPoint& y) { return x.p < y.p; });
  fit.c0 = std::exp(r[static_cast<std::size_t>(lowest - usable.begin())]);
  fit.c1 = std::exp(r[static_cast<std::size_t>(highest - usable.begin())]);

  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  fit.median_remainder = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  for (double ri : r) {
    fit.delta = std::max(fit.delta, std::abs(ri - fit.median_remainder));
  }
  return fit;
}

}  // namespace zpd
