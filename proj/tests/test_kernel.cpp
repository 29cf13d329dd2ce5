#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "zpd/error.hpp"
#include "zpd/kernel.hpp"
#include "zpd/rng.hpp"

using namespace zpd;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

// Closed-form Beta(a, b) moments.
std::pair<double, double> beta_moments(double a, double b) {
  const double m = a / (a + b);
  const double v = a * b / ((a + b) * (a + b) * (a + b + 1.0));
  return {m, v};
}

}  // namespace

TEST_CASE("beta_weight values") {
  CHECK(beta_weight(0.5, {1, 1}) == 0.25);
  CHECK(beta_weight(0.0, {2, 1}) == 0.0);
  CHECK(beta_weight(1.0, {1, 0.5}) == 0.0);
  CHECK(beta_weight(0.25, {1, 2}) == doctest::Approx(0.140625).epsilon(1e-15));
  CHECK(beta_weight(0.0, {0, 0}) == 1.0);
  CHECK(beta_weight(1.0, {0, 3}) == 0.0);
  CHECK(beta_weight(0.0, {0, 3}) == 1.0);
  CHECK(kind_of([] { beta_weight(1.2, {1, 1}); }) == ErrorKind::domain);
  CHECK(kind_of([] { beta_weight(0.5, {-1, 1}); }) == ErrorKind::domain);
}

TEST_CASE("beta_weight reflection and unimodality") {
  CounterRng rng(9, StreamFamily::test, 0);
  for (int t = 0; t < 30; ++t) {
    const KernelParams k{0.1 + 4 * rng.uniform(), 0.1 + 4 * rng.uniform()};
    for (double p = 0.0; p <= 1.0; p += 0.01)
      CHECK(beta_weight(p, k) == doctest::Approx(beta_weight(1.0 - p, {k.beta, k.alpha})).epsilon(1e-12));
    double best = -1.0, arg = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double p = i * 1e-4;
      const double w = beta_weight(p, k);
      if (w > best) {
        best = w;
        arg = p;
      }
    }
    CHECK(std::abs(arg - kernel_peak(k)) <= 1e-4);
  }
}

TEST_CASE("kernel_peak") {
  CHECK(kernel_peak({1, 1}) == 0.5);
  CHECK(kernel_peak({1, 2}) == doctest::Approx(1.0 / 3.0));
  CHECK(kernel_peak({3, 1}) == 0.75);
  CHECK(kind_of([] { kernel_peak({0, 0}); }) == ErrorKind::degenerate);
}

TEST_CASE("normalize_weights") {
  using Raw = std::vector<std::pair<std::string, double>>;
  const auto a = normalize_weights(Raw{{"a", 0.1}, {"b", 0.2}, {"c", 0.3}});
  CHECK(a.entries[0].normalized == doctest::Approx(0.5));
  CHECK(a.entries[1].normalized == doctest::Approx(1.0));
  CHECK(a.entries[2].normalized == doctest::Approx(1.5));
  CHECK(a.entries[2].problem_id == "c");
  const auto b = normalize_weights(Raw{{"a", 0}, {"b", 0}, {"c", 1}});
  CHECK(b.entries[2].normalized == 3.0);
  CHECK(b.entries[0].normalized == 0.0);
  const auto c = normalize_weights(Raw{{"a", 0.7}, {"b", 0.7}});
  CHECK(c.entries[0].normalized == 1.0);
  const auto z = normalize_weights(Raw{{"a", 0}, {"b", 0}});
  CHECK(z.degenerate);
  CHECK(z.entries[1].normalized == 0.0);
  CHECK(kind_of([] { normalize_weights(Raw{{"a", -1}}); }) == ErrorKind::domain);
}

TEST_CASE("normalize_weights unit mean and scale invariance") {
  CounterRng rng(2, StreamFamily::test, 0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> raw(1 + rng.below(50));
    for (double& v : raw) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    raw[0] = 0.5;
    const auto w = normalize_to_unit_mean(raw);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(std::abs(s / static_cast<double>(w.size()) - 1.0) < 1e-12);
    std::vector<double> scaled = raw;
    for (double& v : scaled) v *= 8.0;
    const auto w2 = normalize_to_unit_mean(scaled);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w2[i] == doctest::Approx(w[i]).epsilon(1e-14));
  }
}

TEST_CASE("zpd_moments") {
  auto m = zpd_moments(std::vector<double>{0, 0.5, 0.5, 1}, 1.0 / 8.0);
  CHECK(m.mean_p == 0.5);
  CHECK(m.var_p == 0.0);
  CHECK(m.count == 2);
  m = zpd_moments(std::vector<double>{0.25, 0.75}, 0.1);
  CHECK(m.mean_p == 0.5);
  CHECK(m.var_p == 0.0625);
  CHECK(kind_of([] { zpd_moments(std::vector<double>{0.0, 0.5, 1.0}, 0.1); }) == ErrorKind::insufficient_data);
  CHECK(kind_of([] { zpd_moments(std::vector<double>{0.3, 0.5}, 0.5); }) == ErrorKind::domain);

  CounterRng rng(1000, StreamFamily::test, 0);
  std::vector<double> u(1000);
  for (double& v : u) v = rng.uniform();
  m = zpd_moments(u, 0.01);
  CHECK(std::abs(m.mean_p - 0.5) < 0.03);
  CHECK(std::abs(m.var_p - 1.0 / 12.0) < 0.01);
}

TEST_CASE("select_exponents special cases") {
  const auto d = select_exponents({0.05, 0.5, 1.0 / 20.0, 10});
  CHECK(std::abs(d.params.alpha - 1.0) <= 1e-10);
  CHECK(std::abs(d.params.beta - 1.0) <= 1e-10);
  CHECK(d.validity == ExponentValidity::valid);
  const auto flat = select_exponents({0.05, 0.5, 1.0 / 12.0, 10});
  CHECK(flat.validity == ExponentValidity::flat_boundary);
  CHECK(flat.params.alpha == 0.0);
  CHECK(flat.params.beta == 0.0);
  const auto a = select_exponents({0.05, 0.4, 0.03, 10});
  CHECK(a.params.alpha == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(a.params.beta == doctest::Approx(3.2).epsilon(1e-12));
  const auto [m, v] = beta_moments(2.8, 4.2);
  CHECK(m == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(kind_of([] { select_exponents({0.05, 0.5, 0.1, 10}); }) == ErrorKind::validity);
  CHECK(kind_of([] { select_exponents({0.05, 0.5, 0.0, 10}); }) == ErrorKind::degenerate);
}

TEST_CASE("select_exponents round trip") {
  CounterRng rng(4, StreamFamily::test, 0);
  for (int t = 0; t < 100; ++t) {
    const double p = 0.05 + 0.9 * rng.uniform();
    const double v = (0.02 + 0.95 * rng.uniform()) * p * (1 - p) / 3.0;
    const auto sel = select_exponents({0.01, p, v, 10});
    const auto [m2, v2] = beta_moments(sel.params.alpha + 1.0, sel.params.beta + 1.0);
    CHECK(std::abs(m2 - p) < 1e-10);
    CHECK(std::abs(v2 - v) < 1e-10);
  }
}

TEST_CASE("saturated_weight") {
  CHECK(saturated_weight(0) == 0.0);
  CHECK(saturated_weight(1) == 0.5);
  CHECK(saturated_weight(9) == doctest::Approx(0.9));
  CHECK(kind_of([] { saturated_weight(-1); }) == ErrorKind::domain);
  double prev = -1.0;
  for (double s = 0.0; s < 50.0; s += 0.1) {
    const double w = saturated_weight(s);
    CHECK(w > prev);
    CHECK(w <= std::min(s, 1.0));
    prev = w;
  }
}

TEST_CASE("q_signal") {
  const auto q = q_signal(0.3, 1, 1);
  CHECK(q.peak == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(q.value == doctest::Approx(std::pow(0.3, 0.5) * std::pow(0.7, 1.5)));
  CHECK(q_signal(0.0, 1, 1).value == 0.0);
  CHECK(q_signal(1.0, 1, 1).value == 0.0);
  double best = -1.0, arg = 0.0;
  for (int i = 0; i <= 1000000; ++i) {
    const double p = i * 1e-6;
    const double v = q_signal(p, 1, 1).value;
    if (v > best) {
      best = v;
      arg = p;
    }
  }
  CHECK(std::abs(arg - 0.25) <= 1e-6);
  CHECK(q_signal(0.5, 2, 0.0001).peak == doctest::Approx(1.0 / (1.0 + 1.00005)).epsilon(1e-14));
  CHECK(kind_of([] { q_signal(0.5, 0, 1); }) == ErrorKind::domain);
}

TEST_CASE("fisher_info") {
  CHECK(fisher_info(0.5) == 4.0);
  CHECK(fisher_info(0.1) == doctest::Approx(1.0 / 0.09));
  for (double p = 0.001; p < 1.0; p += 0.001) CHECK(fisher_info(p) * beta_weight(p, {1, 1}) == doctest::Approx(1.0));
  CHECK(kind_of([] { fisher_info(0.0); }) == ErrorKind::singularity);
  CHECK(kind_of([] { fisher_info(1.0); }) == ErrorKind::singularity);
}

TEST_CASE("weight schemes") {
  CHECK(scheme_weight(BetaScheme{{1, 1}, 0.0}, 0.0) == 0.0);
  CHECK(scheme_weight(BetaScheme{{1, 1}, 0.05}, 0.0) == 0.05);
  CHECK(scheme_weight(HardFilterScheme{0.2, 0.8}, 0.2) == 1.0);
  CHECK(scheme_weight(HardFilterScheme{0.2, 0.8}, 0.875) == 0.0);
  CHECK(scheme_weight(UnweightedScheme{}, 0.0) == 1.0);
  CHECK_THROWS_AS(validate_scheme(HardFilterScheme{0.9, 0.1}), Error);
  CHECK(describe(HardFilterScheme{0.2, 0.8}).find("hard_filter") != std::string::npos);
}
