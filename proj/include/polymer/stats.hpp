#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace polymer {

// One-pass moment accumulator (Welford, extended to the fourth central
// moment so tests can attach a standard error to the sample variance).
class RunningStat {
 public:
  void add(double x);
  size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;          // unbiased
  double stddev() const;
  double stderr_mean() const;       // sd / sqrt(n)
  double stderr_variance() const;   // sqrt((m4 - s^4)/n), delta method
  double fourth_central_moment() const;

 private:
  size_t n_ = 0;
  double mean_ = 0, m2_ = 0, m3_ = 0, m4_ = 0;
};

// Streaming log-sum-exp over per-replica log-values. Yields the log of the
// sample mean of exp(values) plus a delta-method standard error for it.
// -inf entries are legal (killed replicas contribute zero mass).
class LogMeanAccumulator {
 public:
  void add(double log_value);
  size_t count() const { return n_; }
  size_t finite_count() const { return n_finite_; }
  double log_mean() const;
  double stderr_of_log_mean() const;

 private:
  size_t n_ = 0;
  size_t n_finite_ = 0;
  double max_ = -1.0 / 0.0;  // running max of log-values
  double s1_ = 0;            // sum exp(l - max)
  double s2_ = 0;            // sum exp(2(l - max))
};

// --- Kolmogorov-Smirnov ---------------------------------------------------

// sup |ECDF - F|; the sample is sorted internally
double ks_statistic_one_sample(std::vector<double> sample,
                               const std::function<double(double)>& cdf);
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

// asymptotic critical values, valid for the sample sizes used here (>= 1e3)
double ks_critical_one_sample(size_t n, double significance);
double ks_critical_two_sample(size_t n, size_t m, double significance);

// --- Poisson tails in log space --------------------------------------------

double log_poisson_pmf(double lambda, double k);
// log P[N >= x] for N ~ Poisson(lambda); x may be fractional (ceil applies)
double log_poisson_upper_tail(double lambda, double x);

// P(Gamma(n, rate) <= b) == P(Poisson(rate*b) >= n); kept explicit because
// the guided sampler conditions travel-phase arrival times on this event
double log_gamma_cdf(uint64_t n, double rate, double b);
// quantile of Gamma(n, rate) conditioned on being <= b, by bisection
double truncated_gamma_quantile(uint64_t n, double rate, double b, double u);

// --- Quadrature -------------------------------------------------------------

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

}  // namespace polymer
