#include "polymer/point_measure.hpp"

#include <cmath>
#include <stdexcept>

#include "polymer/stats.hpp"

namespace polymer {

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::RescaledField: return "rescaled_field";
    case Provenance::SampledPPP: return "sampled_ppp";
    case Provenance::Synthetic: return "synthetic";
  }
  throw std::logic_error("provenance_name: unknown value");
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "rescaled_field") return Provenance::RescaledField;
  if (name == "sampled_ppp") return Provenance::SampledPPP;
  if (name == "synthetic") return Provenance::Synthetic;
  throw std::runtime_error("unknown provenance: " + name);
}

void PointMeasure::add_point(double f, std::span<const double> y) {
  if (!(f > 0)) throw std::invalid_argument("PointMeasure: marks must be positive");
  if (static_cast<int>(y.size()) != d)
    throw std::invalid_argument("PointMeasure: location dimension mismatch");
  marks.push_back(f);
  locations.insert(locations.end(), y.begin(), y.end());
}

double l1_norm(std::span<const double> y) {
  double s = 0;
  for (double c : y) s += std::abs(c);
  return s;
}

PointMeasure rescale_field(const PotentialField& field, const ModelParams& params) {
  if (field.d != params.d || field.alpha != params.alpha)
    throw std::invalid_argument("rescale_field: field and params disagree on (d, alpha)");
  const ScaleSet scales = derive_scales(params);
  const double mark_scale = std::pow(scales.r_t, params.d / params.alpha);
  PointMeasure pm;
  pm.d = params.d;
  pm.provenance = Provenance::RescaledField;
  pm.marks.reserve(field.site_count());
  pm.locations.reserve(field.site_count() * params.d);
  for (size_t i = 0; i < field.site_count(); ++i) {
    pm.marks.push_back(field.values[i] / mark_scale);
    const std::vector<int32_t> site = field.site_at(i);
    for (int c = 0; c < params.d; ++c) pm.locations.push_back(site[c] / scales.r_t);
  }
  return pm;
}

PointMeasure sample_ppp(int d, double alpha, const Window& window, RngStream& rng) {
  if (d < 1) throw std::invalid_argument("sample_ppp: d must be positive");
  if (!(alpha > 0)) throw std::invalid_argument("sample_ppp: alpha must be positive");
  if (!(window.f_min > 0))
    throw std::invalid_argument("sample_ppp: f_min must be positive (total intensity infinite)");
  if (!(window.R > 0)) throw std::invalid_argument("sample_ppp: R must be positive");
  const double lambda =
      std::pow(window.f_min, -alpha) * std::pow(2.0 * window.R, static_cast<double>(d));
  const uint64_t n = rng.poisson(lambda);
  PointMeasure pm;
  pm.d = d;
  pm.provenance = Provenance::SampledPPP;
  pm.window = window;
  pm.marks.reserve(n);
  pm.locations.reserve(n * d);
  for (uint64_t i = 0; i < n; ++i) {
    // conditional mark tail above f_min is again Pareto-shaped
    pm.marks.push_back(window.f_min * std::pow(1.0 - rng.uniform(), -1.0 / alpha));
    for (int c = 0; c < d; ++c) pm.locations.push_back(rng.uniform(-window.R, window.R));
  }
  return pm;
}

size_t count_in_cone(const PointMeasure& pm, const ConeSet& cone) {
  size_t n = 0;
  for (size_t i = 0; i < pm.size(); ++i)
    if (cone.contains(pm.marks[i], l1_norm(pm.location(i)))) ++n;
  return n;
}

double max_in_box(const PointMeasure& pm, double R) {
  double m = 0;
  for (size_t i = 0; i < pm.size(); ++i) {
    const auto y = pm.location(i);
    bool inside = true;
    for (double c : y)
      if (std::abs(c) > R) { inside = false; break; }
    if (inside && pm.marks[i] > m) m = pm.marks[i];
  }
  return m;
}

PointMeasure restrict_measure(const PointMeasure& pm, double L) {
  if (!(L > 0)) throw std::invalid_argument("restrict_measure: L must be positive");
  PointMeasure out;
  out.d = pm.d;
  out.provenance = pm.provenance;
  out.window = Window{1.0 / L, L};
  for (size_t i = 0; i < pm.size(); ++i) {
    if (pm.marks[i] < 1.0 / L) continue;
    const auto y = pm.location(i);
    bool inside = true;
    for (double c : y)
      if (std::abs(c) > L) { inside = false; break; }
    if (inside) out.add_point(pm.marks[i], y);
  }
  return out;
}

std::vector<double> pareto_order_statistics(size_t n, double alpha, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("pareto_order_statistics: n must be >= 1");
  if (!(alpha > 0)) throw std::invalid_argument("pareto_order_statistics: alpha must be positive");
  std::vector<double> gamma(n + 1);
  double acc = 0;
  for (size_t i = 0; i <= n; ++i) {
    acc += rng.exponential(1.0);
    gamma[i] = acc;
  }
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = std::pow(gamma[n] / gamma[i], 1.0 / alpha);
  return out;
}

namespace {
// integral of (c + slope*sum x)^{-alpha} over [0,R]^(dim); innermost analytic
double octant_integral(int dim, double c, double slope, double R, double alpha) {
  if (dim == 1)
    return (std::pow(c, 1.0 - alpha) - std::pow(c + slope * R, 1.0 - alpha)) /
           (slope * (alpha - 1.0));
  return adaptive_simpson(
      [&](double x) { return octant_integral(dim - 1, c + slope * x, slope, R, alpha); }, 0.0, R,
      1e-12);
}
}  // namespace

double cone_intensity_in_box(const ConeSet& cone, int d, double R, double alpha) {
  if (d < 1) throw std::invalid_argument("cone_intensity_in_box: d must be positive");
  if (!(alpha > 1)) throw std::invalid_argument("cone_intensity_in_box: requires alpha > 1");
  return std::pow(2.0, d) * octant_integral(d, cone.height, cone.slope, R, alpha);
}

nlohmann::json pm_to_json(const PointMeasure& pm) {
  nlohmann::json points = nlohmann::json::array();
  for (size_t i = 0; i < pm.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    row.push_back(pm.marks[i]);
    for (double c : pm.location(i)) row.push_back(c);
    points.push_back(std::move(row));
  }
  nlohmann::json j{{"schema", "pm/1"},
                   {"d", pm.d},
                   {"provenance", provenance_name(pm.provenance)},
                   {"points", std::move(points)}};
  if (pm.window) j["window"] = {{"f_min", pm.window->f_min}, {"R", pm.window->R}};
  return j;
}

PointMeasure pm_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "pm/1")
    throw std::runtime_error("pm_from_json: unsupported schema");
  PointMeasure pm;
  pm.d = j.at("d").get<int>();
  pm.provenance = provenance_from_name(j.at("provenance").get<std::string>());
  if (j.contains("window"))
    pm.window = Window{j["window"].at("f_min").get<double>(), j["window"].at("R").get<double>()};
  for (const auto& row : j.at("points")) {
    if (static_cast<int>(row.size()) != pm.d + 1)
      throw std::runtime_error("pm_from_json: point row has wrong arity");
    std::vector<double> y(pm.d);
    for (int c = 0; c < pm.d; ++c) y[c] = row[c + 1].get<double>();
    pm.add_point(row[0].get<double>(), y);
  }
  return pm;
}

}  // namespace polymer
