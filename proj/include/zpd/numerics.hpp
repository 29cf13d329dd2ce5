#pragma once

#include <span>
#include <vector>

namespace zpd {

/// ln Γ(x) for x > 0. Lanczos approximation (g = 7, 9 terms) with the
/// reflection formula below 1/2; about 15 significant digits.
double log_gamma(double x);

/// ln B(a, b). Both arguments must be positive.
double log_beta(double a, double b);

/// B(a, b) evaluated as exp(log_beta(a, b)).
double beta_fn(double a, double b);

double sech(double x);

/// 1 / cosh²(delta) for delta >= 0.
double sech2(double delta);

double log_sum_exp(std::span<const double> values);

/// Softmax of logits / temperature, written into `out` (same size as logits).
void softmax(std::span<const double> logits, std::span<double> out, double temperature = 1.0);
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

/// Population mean and variance (divide by n).
double mean(std::span<const double> values);
double population_variance(std::span<const double> values);

}  // namespace zpd
