#include "polymer/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace polymer {

namespace {

double objective(std::span<const double> f, double theta, const std::vector<double>& w) {
  double v = 0;
  for (size_t i = 0; i < f.size(); ++i) v += w[i] * f[i] - theta * w[i] * w[i];
  return v;
}

bool feasible(const std::vector<double>& w) {
  double s = 0;
  for (double x : w) {
    if (x < 0) return false;
    s += x;
  }
  return s <= 1.0 + 1e-15;
}

void grid_recurse(std::span<const double> f, double theta, std::vector<int>& cells, size_t pos,
                  int remaining, int resolution, double& best, std::vector<double>& best_w) {
  if (pos == cells.size()) {
    std::vector<double> w(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) w[i] = static_cast<double>(cells[i]) / resolution;
    const double v = objective(f, theta, w);
    if (v > best) {
      best = v;
      best_w = w;
    }
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    cells[pos] = c;
    grid_recurse(f, theta, cells, pos + 1, remaining - c, resolution, best, best_w);
  }
}

}  // namespace

OracleOptimum phi_grid_search(std::span<const double> f, double theta, int coarse_resolution,
                              double refine_tol) {
  const size_t k = f.size();
  if (k == 0) return {0.0, {}};
  std::vector<int> cells(k, 0);
  double best = 0.0;
  std::vector<double> w(k, 0.0);
  grid_recurse(f, theta, cells, 0, coarse_resolution, coarse_resolution, best, w);

  // pattern search: single-coordinate moves plus pairwise transfers, with
  // step halving; for this concave objective the local optimum is global
  double step = 1.0 / coarse_resolution;
  while (step > refine_tol) {
    bool improved = false;
    for (size_t i = 0; i < k; ++i) {
      for (double dir : {+1.0, -1.0}) {
        std::vector<double> cand = w;
        cand[i] += dir * step;
        if (!feasible(cand)) continue;
        const double v = objective(f, theta, cand);
        if (v > best + 1e-18) {
          best = v;
          w = cand;
          improved = true;
        }
      }
      for (size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        std::vector<double> cand = w;
        cand[i] += step;
        cand[j] -= step;
        if (!feasible(cand)) continue;
        const double v = objective(f, theta, cand);
        if (v > best + 1e-18) {
          best = v;
          w = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {best, w};
}

OracleOptimum phi_waterfilling(std::span<const double> f, double theta) {
  const size_t k = f.size();
  if (k == 0) return {0.0, {}};
  auto mass_at = [&](double lambda) {
    double s = 0;
    for (double fi : f) s += std::max(0.0, (fi - lambda) / (2 * theta));
    return s;
  };
  double lambda = 0;
  if (mass_at(0) > 1.0) {
    double lo = 0, hi = *std::max_element(f.begin(), f.end());
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mass_at(mid) > 1.0 ? lo : hi) = mid;
    }
    lambda = 0.5 * (lo + hi);
  }
  OracleOptimum out;
  out.weights.resize(k);
  for (size_t i = 0; i < k; ++i) out.weights[i] = std::max(0.0, (f[i] - lambda) / (2 * theta));
  out.value = objective(f, theta, out.weights);
  return out;
}

double d0_bruteforce(const std::vector<double>& points, int d) {
  if (d < 1 || points.size() % d != 0) throw std::invalid_argument("d0_bruteforce: bad input");
  const size_t n = points.size() / d;
  if (n == 0) return 0.0;
  if (n > 9) throw std::invalid_argument("d0_bruteforce: too many points");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0;
    const double* prev = nullptr;
    for (size_t i = 0; i < n; ++i) {
      const double* cur = &points[perm[i] * d];
      for (int c = 0; c < d; ++c) cost += std::abs(cur[c] - (prev ? prev[c] : 0.0));
      prev = cur;
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace polymer
