#include <cmath>
#include <vector>

#include "doctest.h"
#include "polymer/rng.hpp"
#include "polymer/stats.hpp"

using namespace polymer;

TEST_CASE("rng streams are reproducible and splittable") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream parent(7);
  parent.next_u64();  // consumption must not move the split tree
  CHECK(RngStream(7).split(3).next_u64() == parent.split(3).next_u64());
  CHECK(RngStream(7).split(3).next_u64() != RngStream(7).split(4).next_u64());
}

TEST_CASE("uniform stays in [0,1) and is roughly uniform") {
  RngStream rng(1);
  RunningStat stat;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0);
    CHECK(u < 1);
    stat.add(u);
  }
  CHECK(std::abs(stat.mean() - 0.5) < 3 * stat.stderr_mean());
}

TEST_CASE("poisson sampler matches its first two moments") {
  RngStream rng(2);
  RunningStat stat;
  for (int i = 0; i < 20000; ++i) stat.add(static_cast<double>(rng.poisson(4.0)));
  CHECK(std::abs(stat.mean() - 4.0) < 3 * stat.stderr_mean());
  CHECK(std::abs(stat.variance() - 4.0) < 3 * stat.stderr_variance());
}

TEST_CASE("running stat against hand-computed moments") {
  RunningStat stat;
  for (double x : {1.0, 2.0, 3.0, 4.0}) stat.add(x);
  CHECK(stat.mean() == doctest::Approx(2.5));
  CHECK(stat.variance() == doctest::Approx(5.0 / 3.0));
  // central fourth moment of {1,2,3,4}: mean of (x-2.5)^4 = 2.5625 + ...
  const double m4 = (std::pow(1.5, 4) * 2 + std::pow(0.5, 4) * 2) / 4.0;
  CHECK(stat.fourth_central_moment() == doctest::Approx(m4));
}

TEST_CASE("log-mean accumulator equals direct computation") {
  LogMeanAccumulator acc;
  const std::vector<double> logs = {0.0, 1.0, -2.0, 3.5};
  double direct = 0;
  for (double l : logs) {
    acc.add(l);
    direct += std::exp(l);
  }
  direct /= logs.size();
  CHECK(acc.log_mean() == doctest::Approx(std::log(direct)).epsilon(1e-12));

  // killed replicas contribute zero mass
  LogMeanAccumulator killed;
  killed.add(std::log(2.0));
  killed.add(-std::numeric_limits<double>::infinity());
  CHECK(killed.log_mean() == doctest::Approx(std::log(1.0)).epsilon(1e-12));

  // constant values have zero standard error
  LogMeanAccumulator flat;
  for (int i = 0; i < 10; ++i) flat.add(5.0);
  CHECK(flat.stderr_of_log_mean() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("ks test accepts the true law and rejects a shifted one") {
  RngStream rng(3);
  std::vector<double> sample(20000);
  for (double& x : sample) x = rng.uniform();
  const auto uniform_cdf = [](double x) { return x < 0 ? 0.0 : (x > 1 ? 1.0 : x); };
  const double d = ks_statistic_one_sample(sample, uniform_cdf);
  CHECK(d < ks_critical_one_sample(sample.size(), 0.01));

  const auto shifted_cdf = [&](double x) { return uniform_cdf(x - 0.05); };
  CHECK(ks_statistic_one_sample(sample, shifted_cdf) >
        ks_critical_one_sample(sample.size(), 0.01));
}

TEST_CASE("poisson upper tail against direct summation") {
  // small-lambda branch (n > lambda)
  double direct = 0;
  for (int j = 5; j < 60; ++j) direct += std::exp(log_poisson_pmf(3.0, j));
  CHECK(log_poisson_upper_tail(3.0, 5) == doctest::Approx(std::log(direct)).epsilon(1e-12));

  // lower-tail branch (n <= lambda)
  double lower = 0;
  for (int j = 0; j < 3; ++j) lower += std::exp(log_poisson_pmf(10.0, j));
  CHECK(log_poisson_upper_tail(10.0, 3) ==
        doctest::Approx(std::log1p(-lower)).epsilon(1e-10));

  CHECK(log_poisson_upper_tail(3.0, 0) == 0.0);
  // huge-argument regime stays finite and ordered
  const double far = log_poisson_upper_tail(2e12, 6.9e15);
  CHECK(std::isfinite(far));
  CHECK(far < log_poisson_upper_tail(2e12, 3e15));
}

TEST_CASE("gamma cdf and truncated quantile are consistent") {
  CHECK(log_gamma_cdf(1, 2.0, 0.7) == doctest::Approx(std::log(1 - std::exp(-1.4))).epsilon(1e-12));
  // quantile inverts the conditional cdf
  const double b = 0.9;
  for (double u : {0.1, 0.5, 0.9}) {
    const double x = truncated_gamma_quantile(3, 2.0, b, u);
    CHECK(x > 0);
    CHECK(x < b);
    const double ratio =
        std::exp(log_gamma_cdf(3, 2.0, x) - log_gamma_cdf(3, 2.0, b));
    CHECK(ratio == doctest::Approx(u).epsilon(1e-9));
  }
}

TEST_CASE("adaptive simpson on known integrals") {
  CHECK(adaptive_simpson([](double x) { return x * x; }, 0, 1, 1e-12) ==
        doctest::Approx(1.0 / 3).epsilon(1e-10));
  const double analytic = 0.5 * (1.0 - std::pow(31.0, -2.0));
  CHECK(adaptive_simpson([](double x) { return std::pow(x + 1.0, -3.0); }, 0, 30, 1e-12) ==
        doctest::Approx(analytic).epsilon(1e-9));
}
