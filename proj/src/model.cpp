#include "polymer/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polymer {

void ModelParams::validate() const {
  if (d < 1) throw std::invalid_argument("ModelParams: d must be a positive integer");
  if (!(alpha > d)) throw std::invalid_argument("ModelParams: alpha must exceed d");
  if (!(theta > 0)) throw std::invalid_argument("ModelParams: theta must be positive");
  if (!(t > 0)) throw std::invalid_argument("ModelParams: t must be positive");
}

ScaleSet derive_scales(const ModelParams& params) {
  params.validate();
  if (!(params.t > 1)) throw std::invalid_argument("derive_scales: requires t > 1");
  const double log_t = std::log(params.t);
  ScaleSet s;
  s.q = params.d / (params.alpha - params.d);
  s.beta_t = params.theta * std::pow(params.t, s.q - 1.0) / std::pow(log_t, s.q);
  s.r_t = std::pow(params.t / log_t, 1.0 + s.q);
  s.gamma_t = s.r_t * log_t;
  return s;
}

double pareto_quantile(double alpha, double u) {
  if (!(alpha > 0)) throw std::invalid_argument("pareto_quantile: alpha must be positive");
  if (!(u >= 0 && u < 1)) throw std::invalid_argument("pareto_quantile: u must lie in [0,1)");
  return std::pow(1.0 - u, -1.0 / alpha);
}

double sample_pareto(double alpha, RngStream& rng) {
  return pareto_quantile(alpha, rng.uniform());
}

bool PotentialField::contains(std::span<const int32_t> site) const {
  if (static_cast<int>(site.size()) != d) return false;
  for (int c : site)
    if (c < -box_radius || c > box_radius) return false;
  return true;
}

size_t PotentialField::flat_index(std::span<const int32_t> site) const {
  size_t idx = 0;
  for (int i = 0; i < d; ++i) idx = idx * side() + static_cast<size_t>(site[i] + box_radius);
  return idx;
}

std::vector<int32_t> PotentialField::site_at(size_t flat) const {
  std::vector<int32_t> site(d);
  for (int i = d - 1; i >= 0; --i) {
    site[i] = static_cast<int32_t>(flat % side()) - box_radius;
    flat /= side();
  }
  return site;
}

double PotentialField::value_at(std::span<const int32_t> site) const {
  if (!contains(site)) throw std::domain_error("PotentialField: site outside box");
  return values[flat_index(site)];
}

PotentialField sample_field(const ModelParams& params, int box_radius, uint64_t seed) {
  params.validate();
  if (box_radius < 0) throw std::invalid_argument("sample_field: box_radius must be >= 0");
  const double side = 2.0 * box_radius + 1.0;
  const double count = std::pow(side, params.d);
  if (count > (1u << 31))
    throw std::invalid_argument("sample_field: box has too many sites for dense storage");
  PotentialField field;
  field.d = params.d;
  field.alpha = params.alpha;
  field.box_radius = box_radius;
  field.seed = seed;
  const size_t n = static_cast<size_t>(count + 0.5);
  field.values.resize(n);
  RngStream base(seed);
  for (size_t i = 0; i < n; ++i) {
    RngStream site_stream = base.split(i);
    field.values[i] = sample_pareto(params.alpha, site_stream);
  }
  return field;
}

nlohmann::json field_to_json(const PotentialField& field) {
  return nlohmann::json{{"schema", "field/1"},
                        {"d", field.d},
                        {"alpha", field.alpha},
                        {"box_radius", field.box_radius},
                        {"seed", field.seed},
                        {"values", field.values}};
}

PotentialField field_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "field/1")
    throw std::runtime_error("field_from_json: unsupported schema");
  PotentialField field;
  field.d = j.at("d").get<int>();
  field.alpha = j.at("alpha").get<double>();
  field.box_radius = j.at("box_radius").get<int>();
  field.seed = j.at("seed").get<uint64_t>();
  field.values = j.at("values").get<std::vector<double>>();
  const double side = 2.0 * field.box_radius + 1.0;
  if (field.values.size() != static_cast<size_t>(std::pow(side, field.d) + 0.5))
    throw std::runtime_error("field_from_json: value count does not match box");
  return field;
}

}  // namespace polymer
