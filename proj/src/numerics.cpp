#include "zpd/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "zpd/error.hpp"

namespace zpd {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoef{
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

// Lanczos form, valid for x >= 0.5.
double log_gamma_lanczos(double x) {
  const double z = x - 1.0;
  double series = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) {
    series += kLanczosCoef[i] / (z + static_cast<double>(i));
  }
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

}  // namespace

double log_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    fail(ErrorKind::domain, fmt::format("log_gamma requires a finite positive argument, got {}", x));
  }
  if (x < 0.5) {
    // Γ(x)Γ(1-x) = π / sin(πx); sin(πx) > 0 on (0, 1/2).
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma_lanczos(1.0 - x);
  }
  return log_gamma_lanczos(x);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorKind::domain, fmt::format("Beta function requires positive arguments, got ({}, {})", a, b));
  }
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double beta_fn(double a, double b) { return std::exp(log_beta(a, b)); }

double sech(double x) {
  const double ax = std::abs(x);
  // 1/cosh(x) = 2e^{-|x|} / (1 + e^{-2|x|}); no overflow for large |x|.
  const double e = std::exp(-ax);
  return 2.0 * e / (1.0 + e * e);
}

double sech2(double delta) {
  if (!(delta >= 0.0)) {
    fail(ErrorKind::domain, fmt::format("sech2 requires delta >= 0, got {}", delta));
  }
  const double s = sech(delta);
  return s * s;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double hi = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(hi)) {
    return hi;
  }
  double acc = 0.0;
  for (double v : values) {
    acc += std::exp(v - hi);
  }
  return hi + std::log(acc);
}

void softmax(std::span<const double> logits, std::span<double> out, double temperature) {
  if (!(temperature > 0.0)) {
    fail(ErrorKind::domain, fmt::format("softmax temperature must be positive, got {}", temperature));
  }
  if (out.size() != logits.size()) {
    fail(ErrorKind::domain, "softmax output size mismatch");
  }
  if (logits.empty()) {
    return;
  }
  double hi = -std::numeric_limits<double>::infinity();
  for (double z : logits) {
    hi = std::max(hi, z / temperature);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] / temperature - hi);
    total += out[i];
  }
  for (double& v : out) {
    v /= total;
  }
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  std::vector<double> out(logits.size());
  softmax(logits, out, temperature);
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) {
    fail(ErrorKind::insufficient_data, "mean of an empty sample");
  }
  double acc = 0.0;
  for (double v : values) {
    acc += v;
  }
  return acc / static_cast<double>(values.size());
}

double population_variance(std::span<const double> values) {
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) {
    acc += (v - m) * (v - m);
  }
  return acc / static_cast<double>(values.size());
}

}  // namespace zpd
