#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "polymer/model.hpp"
#include "polymer/rng.hpp"

namespace polymer {

enum class Provenance { RescaledField, SampledPPP, Synthetic };

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

// Sampling window for the limiting point process: marks in [f_min, inf),
// locations in the box Q_R = [-R,R]^d.
struct Window {
  double f_min;
  double R;
};

// Finite point measure on (0,inf) x R^d, stored flat (d location entries
// per point).
struct PointMeasure {
  int d = 1;
  Provenance provenance = Provenance::Synthetic;
  std::optional<Window> window;
  std::vector<double> marks;
  std::vector<double> locations;  // row-major, d per point

  size_t size() const { return marks.size(); }
  std::span<const double> location(size_t i) const {
    return {locations.data() + i * d, static_cast<size_t>(d)};
  }
  void add_point(double f, std::span<const double> y);
};

// membership: f > slope*|y|_1 + height
struct ConeSet {
  double height;
  double slope;
  bool contains(double f, double l1) const { return f > slope * l1 + height; }
};

double l1_norm(std::span<const double> y);

// one point per lattice site: (xi(z)/r_t^{d/alpha}, z/r_t)
PointMeasure rescale_field(const PotentialField& field, const ModelParams& params);

// Poisson process with intensity alpha f^{-1-alpha} df x dy restricted to
// [f_min,inf) x Q_R; the window is recorded in the result
PointMeasure sample_ppp(int d, double alpha, const Window& window, RngStream& rng);

size_t count_in_cone(const PointMeasure& pm, const ConeSet& cone);

// sup of marks over points with y in Q_R; 0 for no such point (sup over the
// empty set, kept as a sentinel so monotonicity in R stays testable)
double max_in_box(const PointMeasure& pm, double R);

// keeps exactly the points with f >= 1/L and y in Q_L
PointMeasure restrict_measure(const PointMeasure& pm, double L);

// ((Gamma_{n+1}/Gamma_1)^{1/alpha}, ..., (Gamma_{n+1}/Gamma_n)^{1/alpha})
// with Gamma_i a running sum of i.i.d. Exp(1); non-increasing
std::vector<double> pareto_order_statistics(size_t n, double alpha, RngStream& rng);

// integral of (slope*|y|_1 + height)^{-alpha} over the box Q_R, evaluated by
// nested quadrature with the innermost coordinate integrated analytically
double cone_intensity_in_box(const ConeSet& cone, int d, double R, double alpha);

// schema "pm/1"
nlohmann::json pm_to_json(const PointMeasure& pm);
PointMeasure pm_from_json(const nlohmann::json& j);

}  // namespace polymer
