#include "polymer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace polymer {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void RunningStat::add(double x) {
  // one-pass update of central moments up to order four
  const double n1 = static_cast<double>(n_);
  ++n_;
  const double n = static_cast<double>(n_);
  const double delta = x - mean_;
  const double delta_n = delta / n;
  const double delta_n2 = delta_n * delta_n;
  const double term1 = delta * delta_n * n1;
  mean_ += delta_n;
  m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
  m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
  m2_ += term1;
}

double RunningStat::variance() const {
  if (n_ < 2) return 0;
  return m2_ / static_cast<double>(n_ - 1);
}

double RunningStat::stddev() const { return std::sqrt(variance()); }

double RunningStat::stderr_mean() const {
  if (n_ < 2) return 0;
  return stddev() / std::sqrt(static_cast<double>(n_));
}

double RunningStat::fourth_central_moment() const {
  if (n_ == 0) return 0;
  return m4_ / static_cast<double>(n_);
}

double RunningStat::stderr_variance() const {
  if (n_ < 2) return 0;
  const double s2 = variance();
  const double v = fourth_central_moment() - s2 * s2;
  return std::sqrt(std::max(0.0, v) / static_cast<double>(n_));
}

void LogMeanAccumulator::add(double log_value) {
  ++n_;
  if (log_value == kNegInf) return;
  ++n_finite_;
  if (log_value <= max_) {
    const double e = std::exp(log_value - max_);
    s1_ += e;
    s2_ += e * e;
  } else {
    if (std::isfinite(max_)) {
      const double r = std::exp(max_ - log_value);
      s1_ = s1_ * r + 1.0;
      s2_ = s2_ * r * r + 1.0;
    } else {
      s1_ = 1.0;
      s2_ = 1.0;
    }
    max_ = log_value;
  }
}

double LogMeanAccumulator::log_mean() const {
  if (n_ == 0 || n_finite_ == 0) return kNegInf;
  return max_ + std::log(s1_ / static_cast<double>(n_));
}

double LogMeanAccumulator::stderr_of_log_mean() const {
  // se(log m) ~= sd(V)/(m sqrt(n)) for V = exp(L); all in log space
  if (n_ < 2 || n_finite_ == 0) return 0;
  const double n = static_cast<double>(n_);
  const double mean_scaled = s1_ / n;                       // m / e^max
  double var_scaled = s2_ / n - mean_scaled * mean_scaled;  // var / e^{2 max}
  var_scaled = std::max(0.0, var_scaled) * n / (n - 1.0);
  return std::sqrt(var_scaled) / (mean_scaled * std::sqrt(n));
}

double ks_statistic_one_sample(std::vector<double> sample,
                               const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace {
double ks_c(double significance) { return std::sqrt(-0.5 * std::log(significance / 2)); }
}

double ks_critical_one_sample(size_t n, double significance) {
  return ks_c(significance) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample(size_t n, size_t m, double significance) {
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return ks_c(significance) * std::sqrt((dn + dm) / (dn * dm));
}

double log_poisson_pmf(double lambda, double k) {
  if (lambda == 0) return k == 0 ? 0.0 : kNegInf;
  return k * std::log(lambda) - lambda - std::lgamma(k + 1);
}

double log_poisson_upper_tail(double lambda, double x) {
  if (lambda < 0) throw std::invalid_argument("poisson tail: lambda < 0");
  const double n = std::ceil(x);
  if (n <= 0) return 0.0;  // P = 1
  if (lambda == 0) return kNegInf;
  if (n > lambda) {
    // sum pmf upward from n; term ratio lambda/(j+1) < 1
    double rel = 1.0, acc = 1.0, j = n;
    while (true) {
      rel *= lambda / (j + 1.0);
      if (rel < 1e-18 * acc) break;
      acc += rel;
      j += 1.0;
      if (j > n + 1e7) break;  // unreachable for the regimes used here
    }
    return log_poisson_pmf(lambda, n) + std::log(acc);
  }
  // P[N >= n] = 1 - P[N <= n-1]; sum the lower tail downward from n-1
  double rel = 1.0, acc = 1.0, j = n - 1.0;
  while (j >= 1.0) {
    rel *= j / lambda;
    if (rel < 1e-18 * acc) break;
    acc += rel;
    j -= 1.0;
  }
  const double log_lower = log_poisson_pmf(lambda, n - 1.0) + std::log(acc);
  if (log_lower >= 0) return kNegInf;  // lower tail rounds to 1
  return std::log1p(-std::exp(log_lower));
}

double log_gamma_cdf(uint64_t n, double rate, double b) {
  if (n == 0) return 0.0;
  if (b <= 0) return kNegInf;
  return log_poisson_upper_tail(rate * b, static_cast<double>(n));
}

double truncated_gamma_quantile(uint64_t n, double rate, double b, double u) {
  if (n == 0) return 0.0;
  if (!(u >= 0 && u < 1)) throw std::invalid_argument("truncated_gamma_quantile: u outside [0,1)");
  const double log_total = log_gamma_cdf(n, rate, b);
  const double log_target = log_total + std::log(u);
  double lo = 0, hi = b;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * b; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_gamma_cdf(n, rate, mid) < log_target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace polymer
