#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "polymer/walk.hpp"

namespace polymer {

namespace {

// u' = A u with A the box Laplacian (killed outside) plus diag(xi)
struct HeatSystem {
  const PotentialField* field;
  std::vector<std::vector<int32_t>> neighbours;  // flat indices, -1 padded out

  explicit HeatSystem(const PotentialField& f) : field(&f) {
    const size_t n = f.site_count();
    const int d = f.d;
    neighbours.assign(n, {});
    for (size_t i = 0; i < n; ++i) {
      std::vector<int32_t> site = f.site_at(i);
      for (int c = 0; c < d; ++c) {
        for (int step : {-1, +1}) {
          site[c] += step;
          if (f.contains(site)) neighbours[i].push_back(static_cast<int32_t>(f.flat_index(site)));
          site[c] -= step;
        }
      }
    }
  }

  void deriv(const std::vector<double>& u, std::vector<double>& du) const {
    const double out_rate = 2.0 * field->d;
    for (size_t i = 0; i < u.size(); ++i) {
      double acc = (field->values[i] - out_rate) * u[i];
      for (int32_t nb : neighbours[i]) acc += u[nb];
      du[i] = acc;
    }
  }
};

}  // namespace

double pam_oracle(const PotentialField& field, double t) {
  if (!(t > 0)) throw std::invalid_argument("pam_oracle: t must be positive");
  const size_t n = field.site_count();
  const HeatSystem sys(field);

  std::vector<double> u(n, 0.0);
  u[field.flat_index(std::vector<int32_t>(field.d, 0))] = 1.0;

  // Dormand-Prince 5(4)
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double rtol = 1e-8, atol = 1e-12;
  const double xi_max = *std::max_element(field.values.begin(), field.values.end());
  const double dt_max = std::min(t, 0.1 / xi_max);

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), u5(n);

  double time = 0;
  double dt = dt_max;
  sys.deriv(u, k1);
  while (time < t) {
    dt = std::min(dt, t - time);
    if (dt < 1e-14 * std::max(t, 1.0))
      throw std::runtime_error("pam_oracle: step size underflow (stiff system, max xi = " +
                               std::to_string(xi_max) + ")");
    for (size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * a21 * k1[i];
    sys.deriv(tmp, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * (a31 * k1[i] + a32 * k2[i]);
    sys.deriv(tmp, k3);
    for (size_t i = 0; i < n; ++i)
      tmp[i] = u[i] + dt * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    sys.deriv(tmp, k4);
    for (size_t i = 0; i < n; ++i)
      tmp[i] = u[i] + dt * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    sys.deriv(tmp, k5);
    for (size_t i = 0; i < n; ++i)
      tmp[i] = u[i] + dt * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    sys.deriv(tmp, k6);
    for (size_t i = 0; i < n; ++i)
      u5[i] = u[i] + dt * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    sys.deriv(u5, k7);

    double err = 0;
    for (size_t i = 0; i < n; ++i) {
      const double e = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
      const double scale = atol + rtol * std::max(std::abs(u[i]), std::abs(u5[i]));
      err += (e / scale) * (e / scale);
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (err <= 1.0) {
      time += dt;
      u.swap(u5);
      k1.swap(k7);  // FSAL; on rejection k1 is still deriv(u)
    }
    const double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    dt *= std::clamp(factor, 0.2, 5.0);
    dt = std::min(dt, dt_max);
  }

  double mass = 0;
  for (double v : u) mass += v;
  return mass;
}

}  // namespace polymer
