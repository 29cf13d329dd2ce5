#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <vector>

#include "zpd/error.hpp"
#include "zpd/numerics.hpp"
#include "zpd/rng.hpp"

using namespace zpd;

TEST_CASE("log_gamma known values") {
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-14));
  CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-14));
  CHECK(log_gamma(2.5) == doctest::Approx(std::log(1.5 * 0.5 * std::sqrt(std::numbers::pi))).epsilon(1e-14));
  CHECK(log_gamma(2.5) == doctest::Approx(0.2846828705).epsilon(1e-10));
}

TEST_CASE("log_gamma matches lgamma on [1e-3, 1e3]") {
  double worst = 0.0;
  for (double x = 1e-3; x <= 1e3; x *= 1.01) {
    const double ref = std::lgamma(x);
    const double err = std::abs(log_gamma(x) - ref) / std::max(1.0, std::abs(ref));
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("log_gamma recurrence") {
  for (double x = 0.1; x <= 50.0; x += 0.05)
    CHECK(std::abs(log_gamma(x + 1.0) - log_gamma(x) - std::log(x)) < 1e-11);
}

TEST_CASE("log_gamma rejects bad input") {
  for (double x : {0.0, -1.0, -0.5, std::nan(""), std::numeric_limits<double>::infinity()}) {
    try {
      log_gamma(x);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
  }
}

TEST_CASE("beta_fn values and identities") {
  CHECK(beta_fn(2, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(beta_fn(0.5, 0.5) == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  CHECK(beta_fn(2.5, 2.5) == doctest::Approx(0.0736310778).epsilon(1e-9));
  for (double a : {0.5, 1.0, 2.0, 7.0}) CHECK(std::abs(beta_fn(a, 1.0) - 1.0 / a) < 1e-12);
  CounterRng rng(1, StreamFamily::test, 0);
  for (int i = 0; i < 200; ++i) {
    const double a = 0.01 + 20 * rng.uniform();
    const double b = 0.01 + 20 * rng.uniform();
    CHECK(beta_fn(a, b) == beta_fn(b, a));
  }
  CHECK_THROWS_AS(beta_fn(0.0, 1.0), Error);
  CHECK_THROWS_AS(beta_fn(1.0, -2.0), Error);
  // Log space keeps large arguments finite.
  CHECK(std::isfinite(log_beta(400.0, 500.0)));
}

TEST_CASE("sech2") {
  CHECK(sech2(0.0) == 1.0);
  CHECK(sech2(0.3) == doctest::Approx(0.915).epsilon(5e-4));
  CHECK(std::abs(sech2(std::numbers::ln2) - 0.64) < 1e-15);
  CHECK_THROWS_AS(sech2(-0.1), Error);
  double prev = 2.0;
  for (double d = 0.0; d <= 5.0; d += 0.01) {
    const double s = sech2(d);
    CHECK(s < prev);
    prev = s;
    const double t = std::tanh(d);
    CHECK(std::abs(s + t * t - 1.0) < 1e-12);
    if (d <= 1.0) CHECK(s >= 1.0 - d * d);
  }
  CHECK(sech(800.0) == 0.0);
}

TEST_CASE("softmax and log_sum_exp are stable") {
  const std::vector<double> z{1000.0, 1000.0, -1000.0};
  CHECK(log_sum_exp(z) == doctest::Approx(1000.0 + std::log(2.0)));
  const auto p = softmax(z);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[2] == 0.0);
  const auto hot = softmax(std::vector<double>{1.0, 2.0}, 0.5);
  CHECK(hot[1] == doctest::Approx(std::exp(4.0) / (std::exp(2.0) + std::exp(4.0))));
}

TEST_CASE("population moments") {
  const std::vector<double> v{0.25, 0.75};
  CHECK(mean(v) == 0.5);
  CHECK(population_variance(v) == 0.0625);
}

TEST_CASE("counter rng is keyed and reproducible") {
  CounterRng a(7, StreamFamily::rollout, 3, 0);
  CounterRng b(7, StreamFamily::rollout, 3, 0);
  CounterRng c(7, StreamFamily::rollout, 4, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    seen.insert(x);
    seen.insert(c.next_u64());
  }
  CHECK(seen.size() == 200);
  // Fixed reference values pin the stream definition across platforms.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("rng distributions") {
  CounterRng rng(11, StreamFamily::test, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[rng.below(5)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
  const std::vector<double> probs{0.0, 0.25, 0.75};
  std::vector<int> cat(3, 0);
  for (int i = 0; i < 40000; ++i) ++cat[rng.categorical(probs)];
  CHECK(cat[0] == 0);
  CHECK(std::abs(cat[1] - 10000) < 400);
}
