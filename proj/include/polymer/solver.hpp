#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "polymer/point_measure.hpp"
#include "polymer/rng.hpp"

namespace polymer {

// Sub-probability measure absolutely continuous w.r.t. a base point measure.
// Zero-weight points are not kept in the support.
struct WeightedMeasure {
  const PointMeasure* base = nullptr;
  std::vector<size_t> support;   // distinct indices into base
  std::vector<double> weights;   // aligned with support, strictly positive

  double total_mass() const;
  void validate() const;
};

// Exact shortest origin-anchored visiting path (l1 lengths).
struct D0Result {
  double cost = 0;
  std::vector<int> order;  // positions into the input point list
  bool exact = true;       // false when the instance exceeded the exact cap
};

// points: N x d row-major; N <= exact_cap solved by bitmask DP, larger
// instances fall back to nearest-neighbour + 2-opt and are flagged inexact
D0Result d0(const std::vector<double>& points, int d, int exact_cap = 18);

// one DP sweep giving the exact visiting cost of every subset (N <= 20)
std::vector<double> d0_all_subsets(const std::vector<double>& points, int d);

// number of active entries in the closed-form weight optimum,
// inf{ j : j f_{j+1} <= sum_{i<=j} f_i - 2 theta } ∧ k on descending marks;
// requires sum f >= 2 theta
int k_star(std::span<const double> f_desc, double theta);

struct PhiResult {
  double value = 0;
  std::vector<double> weights;  // in the caller's original order
  int active_count = 0;         // entries with positive weight
  bool saturated = false;       // true iff the mass constraint binds (sum w = 1)
};

// sup over {w >= 0, sum w <= 1} of sum(w_i f_i - theta w_i^2), closed form
PhiResult phi_k(std::span<const double> f, double theta);

// Psi = sum(f w - theta w^2) - q D0(support locations); nullopt encodes
// -infinity (mu not absolutely continuous w.r.t. P)
std::optional<double> psi(const PointMeasure& P, const WeightedMeasure& mu, double q,
                          double theta);

struct SolverOptions {
  size_t exact_cap = 40;   // refuse larger instances (use restrict_measure first)
  int d0_cap = 18;
  double tie_tol = 1e-9;
};

struct SolverTie {
  double xi;
  std::vector<size_t> support;
};

struct SolverResult {
  double xi = 0;       // phi - q*d0_cost, or 0 for the zero measure
  double phi = 0;
  double d0_cost = 0;
  std::vector<size_t> support;   // indices into P, ascending; empty = zero measure
  std::vector<double> weights;   // aligned with support
  std::vector<size_t> order;     // visiting order, positions into support
  std::vector<SolverTie> ties;   // alternative optima within tie_tol, winner excluded

  WeightedMeasure maximizer(const PointMeasure& P) const;
};

// exact maximum of Psi_P over finitely supported sub-probability measures
SolverResult solve_xi(const PointMeasure& P, double q, double theta,
                      const SolverOptions& options = {});

// k points with marks uniform in [L, L+2theta/k] and locations uniform in
// the closed l1-ball of radius eps = theta/(4 q k^4), L = 2theta+(q+1)eps+1;
// the unique maximizer over such a configuration has support size exactly k
PointMeasure build_multisupport_config(int k, double q, double theta, int d, RngStream& rng);

// d = 1 reduction: scan intervals [-x, z] spanned by support locations,
// score the closed-form energy of the marks inside minus q(x+z)+q*min(x,z)
double xi_d1_screening(const PointMeasure& P, double q, double theta);

// schema "solver/1"
nlohmann::json solver_result_to_json(const SolverResult& result, double q, double theta,
                                     const PointMeasure& P);

}  // namespace polymer
