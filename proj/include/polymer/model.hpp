#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "polymer/rng.hpp"

namespace polymer {

// Lattice dimension, Pareto tail exponent, self-repulsion strength and time
// horizon. alpha > d is required for the model to be defined at all.
struct ModelParams {
  int d = 1;
  double alpha = 3.0;
  double theta = 1.0;
  double t = 10.0;

  void validate() const;
};

struct ScaleSet {
  double q;        // d/(alpha - d)
  double beta_t;   // theta t^{q-1} / (log t)^q
  double r_t;      // (t/log t)^{1+q}, characteristic spatial scale
  double gamma_t;  // r_t log t, the free-energy scale
};

// requires t > 1 (log t > 0) and alpha > d
ScaleSet derive_scales(const ModelParams& params);

// (1-u)^{-1/alpha}, the inverse of F(r) = 1 - r^{-alpha} on [1,inf)
double pareto_quantile(double alpha, double u);
// inverse-CDF draw from the Pareto(alpha) law on [1,inf)
double sample_pareto(double alpha, RngStream& rng);

// i.i.d. Pareto potential on the lattice box [-R,R]^d, dense row-major
// storage with the last coordinate fastest. Values are a pure function of
// (seed, site index), so sampling is reproducible and order-independent.
struct PotentialField {
  int d = 1;
  double alpha = 3.0;
  int box_radius = 0;
  uint64_t seed = 0;
  std::vector<double> values;

  int side() const { return 2 * box_radius + 1; }
  size_t site_count() const { return values.size(); }
  bool contains(std::span<const int32_t> site) const;
  size_t flat_index(std::span<const int32_t> site) const;
  std::vector<int32_t> site_at(size_t flat) const;
  double value_at(std::span<const int32_t> site) const;
};

PotentialField sample_field(const ModelParams& params, int box_radius, uint64_t seed);

// schema "field/1"
nlohmann::json field_to_json(const PotentialField& field);
PotentialField field_from_json(const nlohmann::json& j);

}  // namespace polymer
