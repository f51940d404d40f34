#pragma once

#include <span>
#include <vector>

namespace polymer {

// Independent reference implementations used to cross-check the closed-form
// solver routines. Nothing here shares code with the solver paths it checks.

struct OracleOptimum {
  double value;
  std::vector<double> weights;
};

// maximize sum(w_i f_i - theta w_i^2) over {w >= 0, sum w <= 1} by a coarse
// simplex grid followed by pattern-search refinement of the best cell
OracleOptimum phi_grid_search(std::span<const double> f, double theta,
                              int coarse_resolution = 16, double refine_tol = 1e-10);

// same maximum via the KKT multiplier (water-filling), bisection on lambda
OracleOptimum phi_waterfilling(std::span<const double> f, double theta);

// exact shortest origin-anchored visiting path by full permutation
// enumeration; N <= 9
double d0_bruteforce(const std::vector<double>& points, int d);

}  // namespace polymer
