#include "polymer/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "polymer/model.hpp"
#include "polymer/oracles.hpp"
#include "polymer/point_measure.hpp"
#include "polymer/rng.hpp"
#include "polymer/solver.hpp"
#include "polymer/stats.hpp"
#include "polymer/walk.hpp"

namespace polymer {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::string ExperimentConfig::get_string(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw std::invalid_argument("config: missing key '" + key + "'");
  return it->second;
}

std::string ExperimentConfig::get_string_or(const std::string& key,
                                            const std::string& dflt) const {
  const auto it = values.find(key);
  return it == values.end() ? dflt : it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("config: key '" + key + "' is not a number");
  return x;
}

double ExperimentConfig::get_double_or(const std::string& key, double dflt) const {
  return has(key) ? get_double(key) : dflt;
}

int ExperimentConfig::get_int(const std::string& key) const {
  const double x = get_double(key);
  const int i = static_cast<int>(std::llround(x));
  if (i != x) throw std::invalid_argument("config: key '" + key + "' is not an integer");
  return i;
}

int ExperimentConfig::get_int_or(const std::string& key, int dflt) const {
  return has(key) ? get_int(key) : dflt;
}

uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  const std::string v = get_string(key);
  size_t pos = 0;
  const uint64_t x = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("config: key '" + key + "' is not an integer");
  return x;
}

bool ExperimentConfig::get_bool_or(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = strip_quotes(trim(line.substr(eq + 1)));
    if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
    cfg.values[key] = value;
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must be key=value: " + assignment);
  cfg.values[trim(assignment.substr(0, eq))] = strip_quotes(trim(assignment.substr(eq + 1)));
}

std::vector<std::string> split_list(const std::string& csv_list) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(csv_list);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

bool RunRecord::all_pass() const {
  for (const Verdict& v : verdicts)
    if (!v.pass) return false;
  return true;
}

nlohmann::json run_record_to_json(const RunRecord& record) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const Verdict& v : record.verdicts)
    verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  return nlohmann::json{{"schema", "run/1"},
                        {"config", record.config_echo},
                        {"artifact_version", record.artifact_version},
                        {"wall_ms", record.wall_ms},
                        {"results", record.results},
                        {"verdicts", std::move(verdicts)}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "run/1")
    throw std::runtime_error("run_record_from_json: unsupported schema");
  RunRecord rec;
  rec.config_echo = j.at("config");
  rec.artifact_version = j.at("artifact_version").get<std::string>();
  rec.wall_ms = j.at("wall_ms").get<double>();
  rec.results = j.at("results");
  for (const auto& v : j.at("verdicts"))
    rec.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>(),
                            v.at("detail").get<std::string>()});
  return rec;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// kind handlers
// ---------------------------------------------------------------------------

namespace {

const std::map<std::string, std::vector<std::string>>& kind_requirements() {
  static const std::map<std::string, std::vector<std::string>> reqs = {
      {"scales-check", {"d", "alpha", "theta", "t", "seed"}},
      {"ppp-convergence", {"d", "alpha", "replicas", "seed"}},
      {"phi-oracle", {"n_instances", "k_max", "seed"}},
      {"d0-oracle", {"n_instances", "n_points", "seed"}},
      {"xi-solve", {"theta", "seed"}},
      {"multisupport", {"k", "q", "theta", "n_seeds", "seed"}},
      {"mc-partition", {"d", "alpha", "theta", "t", "box_radius", "replicas", "seed"}},
      {"guided-vs-naive", {"d", "alpha", "theta", "t", "L", "replicas", "seed"}},
      {"d1-screening", {"n_configs", "max_points", "theta", "q", "seed"}},
      {"tail-bound", {"d", "alpha", "t", "R", "seed"}},
  };
  return reqs;
}

void validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  if (!cfg.has("kind")) {
    problems.push_back("kind: missing");
  } else if (!kind_requirements().count(cfg.get_string("kind"))) {
    problems.push_back("kind: unknown '" + cfg.get_string("kind") + "'");
  } else {
    for (const std::string& key : kind_requirements().at(cfg.get_string("kind")))
      if (!cfg.has(key)) problems.push_back(key + ": missing");
    const std::string kind = cfg.get_string("kind");
    if (kind == "xi-solve" && !cfg.has("input"))
      for (const std::string key : {"d", "alpha", "L"})
        if (!cfg.has(key)) problems.push_back(key + ": missing (required without 'input')");
    if (kind == "xi-solve" && cfg.has("input") && !cfg.has("q"))
      problems.push_back("q: missing (required with 'input')");
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
}

ModelParams params_from(const ExperimentConfig& cfg) {
  ModelParams params;
  params.d = cfg.get_int("d");
  params.alpha = cfg.get_double("alpha");
  params.theta = cfg.get_double("theta");
  params.t = cfg.get_double("t");
  params.validate();
  return params;
}

std::string csv_row(double x, double y, double se, const std::string& series) {
  std::ostringstream os;
  os.precision(17);
  os << x << "," << y << "," << se << "," << series << "\n";
  return os.str();
}

void run_scales_check(const ExperimentConfig& cfg, RunRecord& rec) {
  const ModelParams params = params_from(cfg);
  const ScaleSet s = derive_scales(params);
  const double log_t = std::log(params.t);
  const double lhs1 = std::pow(s.r_t, params.d / params.alpha) * params.t;
  const double rhs1 = s.r_t * log_t;
  const double rel1 = std::abs(lhs1 - rhs1) / rhs1;
  const double lhs2 = s.beta_t * params.t * params.t;
  const double rhs2 = params.theta * s.r_t * log_t;
  const double rel2 = std::abs(lhs2 - rhs2) / rhs2;
  rec.results = {{"q", s.q},       {"beta_t", s.beta_t}, {"r_t", s.r_t},
                 {"gamma_t", s.gamma_t}, {"rel_err_space_identity", rel1},
                 {"rel_err_beta_identity", rel2}};
  rec.verdicts.push_back({"space_identity", rel1 <= 1e-12,
                          "r_t^{d/alpha} t vs r_t log t rel err " + std::to_string(rel1)});
  rec.verdicts.push_back({"beta_identity", rel2 <= 1e-12,
                          "beta_t t^2 vs theta r_t log t rel err " + std::to_string(rel2)});
}

void run_ppp_convergence(const ExperimentConfig& cfg, RunRecord& rec) {
  const int d = cfg.get_int("d");
  const double alpha = cfg.get_double("alpha");
  const size_t replicas = cfg.get_u64("replicas");
  const double R = cfg.get_double_or("R", d == 1 ? 30.0 : 6.0);
  RngStream rng(cfg.get_u64("seed"));
  const std::vector<ConeSet> cones = {{1.0, 1.0}, {2.0, 1.0}, {1.5, 0.5}};
  nlohmann::json per_cone = nlohmann::json::array();
  std::string csv = "x,y,stderr,series\n";
  for (size_t c = 0; c < cones.size(); ++c) {
    const Window window{cones[c].height, R};  // f_min = height captures the cone
    RunningStat counts;
    RngStream cone_rng = rng.split(c);
    for (size_t r = 0; r < replicas; ++r) {
      RngStream rep = cone_rng.split(r);
      const PointMeasure pm = sample_ppp(d, alpha, window, rep);
      counts.add(static_cast<double>(count_in_cone(pm, cones[c])));
    }
    const double integral = cone_intensity_in_box(cones[c], d, R, alpha);
    const bool pass = std::abs(counts.mean() - integral) <= 3 * counts.stderr_mean();
    per_cone.push_back({{"height", cones[c].height},
                        {"slope", cones[c].slope},
                        {"mean", counts.mean()},
                        {"stderr", counts.stderr_mean()},
                        {"intensity_integral", integral}});
    rec.verdicts.push_back({"cone_" + std::to_string(c), pass,
                            "mean " + std::to_string(counts.mean()) + " vs integral " +
                                std::to_string(integral) + " (se " +
                                std::to_string(counts.stderr_mean()) + ")"});
    csv += csv_row(static_cast<double>(c), counts.mean(), counts.stderr_mean(), "empirical_mean");
    csv += csv_row(static_cast<double>(c), integral, 0.0, "intensity_integral");
  }
  rec.results = {{"cones", per_cone}, {"replicas", replicas}, {"R", R}};
  rec.csv = csv;
}

void run_phi_oracle(const ExperimentConfig& cfg, RunRecord& rec) {
  const int n_instances = cfg.get_int("n_instances");
  const int k_max = cfg.get_int("k_max");
  std::vector<double> thetas;
  for (const std::string& tok : split_list(cfg.get_string_or("thetas", "0.1,1,10")))
    thetas.push_back(std::stod(tok));
  RngStream rng(cfg.get_u64("seed"));
  double max_diff = 0;
  bool certificates = true;
  for (int i = 0; i < n_instances; ++i) {
    RngStream inst = rng.split(i);
    const int k = 1 + static_cast<int>(inst.uniform_below(k_max));
    const double theta = thetas[inst.uniform_below(thetas.size())];
    std::vector<double> f(k);
    for (double& v : f) v = std::exp(inst.uniform(-1.5, 1.5)) * theta * inst.uniform(0.2, 2.0);
    const PhiResult closed = phi_k(f, theta);
    const OracleOptimum grid = phi_grid_search(f, theta);
    max_diff = std::max(max_diff, std::abs(closed.value - grid.value));
    double mass = 0;
    for (double w : closed.weights) mass += w;
    if (closed.saturated ? std::abs(mass - 1) > 1e-12 : mass >= 1) certificates = false;
  }
  rec.results = {{"n_instances", n_instances}, {"max_abs_diff", max_diff},
                 {"certificates_ok", certificates}};
  rec.verdicts.push_back({"oracle_match", max_diff <= 1e-6,
                          "max |closed-form - grid| = " + std::to_string(max_diff)});
  rec.verdicts.push_back({"mass_dichotomy", certificates, "case mass certificates"});
}

void run_d0_oracle(const ExperimentConfig& cfg, RunRecord& rec) {
  const int n_instances = cfg.get_int("n_instances");
  const int n_points = cfg.get_int("n_points");
  if (n_points > 8) throw std::invalid_argument("d0-oracle: n_points must be <= 8");
  std::vector<int> dims;
  for (const std::string& tok : split_list(cfg.get_string_or("dims", "1,2,3")))
    dims.push_back(std::stoi(tok));
  RngStream rng(cfg.get_u64("seed"));
  double max_diff = 0;
  for (int i = 0; i < n_instances; ++i) {
    RngStream inst = rng.split(i);
    const int d = dims[inst.uniform_below(dims.size())];
    const int n = 1 + static_cast<int>(inst.uniform_below(n_points));
    std::vector<double> pts(n * d);
    for (double& c : pts) c = inst.uniform(-1, 1);
    const double dp = d0(pts, d).cost;
    const double brute = d0_bruteforce(pts, d);
    max_diff = std::max(max_diff, std::abs(dp - brute));
  }
  rec.results = {{"n_instances", n_instances}, {"max_abs_diff", max_diff}};
  rec.verdicts.push_back({"dp_equals_bruteforce", max_diff <= 1e-12,
                          "max |DP - permutations| = " + std::to_string(max_diff)});
}

void run_xi_solve(const ExperimentConfig& cfg, RunRecord& rec) {
  const double theta = cfg.get_double("theta");
  RngStream rng(cfg.get_u64("seed"));
  PointMeasure pm;
  double q;
  if (cfg.has("input")) {
    std::ifstream in(cfg.get_string("input"));
    if (!in) throw std::runtime_error("xi-solve: cannot open input " + cfg.get_string("input"));
    nlohmann::json j;
    in >> j;
    pm = pm_from_json(j);
    q = cfg.get_double("q");
  } else {
    const int d = cfg.get_int("d");
    const double alpha = cfg.get_double("alpha");
    const double L = cfg.get_double("L");
    q = d / (alpha - d);
    RngStream sampler = rng.split(0);
    pm = sample_ppp(d, alpha, Window{1.0 / L, L}, sampler);
  }
  const SolverResult sol = solve_xi(pm, q, theta);
  // dominance spot-check against random admissible measures
  const size_t nu_samples = cfg.has("nu_samples") ? cfg.get_u64("nu_samples") : 1000;
  RngStream nu_rng = rng.split(1);
  size_t dominated = 0;
  for (size_t r = 0; r < nu_samples; ++r) {
    RngStream rep = nu_rng.split(r);
    WeightedMeasure nu;
    nu.base = &pm;
    for (size_t i = 0; i < pm.size(); ++i)
      if (rep.uniform() < 0.5) nu.support.push_back(i);
    if (!nu.support.empty()) {
      double total = 0;
      nu.weights.resize(nu.support.size());
      for (double& w : nu.weights) {
        w = rep.exponential(1.0);
        total += w;
      }
      const double mass = rep.uniform();
      for (double& w : nu.weights) w *= mass / total;
    }
    const auto value = psi(pm, nu, q, theta);
    if (!value || *value <= sol.xi + 1e-9) ++dominated;
  }
  rec.results = {{"solver", solver_result_to_json(sol, q, theta, pm)},
                 {"points", pm.size()},
                 {"nu_samples", nu_samples},
                 {"dominated", dominated}};
  rec.verdicts.push_back({"xi_nonnegative", sol.xi >= 0, "xi = " + std::to_string(sol.xi)});
  rec.verdicts.push_back({"dominance", dominated == nu_samples,
                          std::to_string(dominated) + "/" + std::to_string(nu_samples) +
                              " random measures dominated"});
}

void run_multisupport(const ExperimentConfig& cfg, RunRecord& rec) {
  const int k = cfg.get_int("k");
  const double q = cfg.get_double("q");
  const double theta = cfg.get_double("theta");
  const int d = cfg.get_int_or("d", 2);
  const int n_seeds = cfg.get_int("n_seeds");
  RngStream rng(cfg.get_u64("seed"));
  std::map<size_t, int> histogram;
  bool all_exact = true;
  for (int s = 0; s < n_seeds; ++s) {
    RngStream seed_stream = rng.split(s);
    const PointMeasure pm = build_multisupport_config(k, q, theta, d, seed_stream);
    const SolverResult sol = solve_xi(pm, q, theta);
    ++histogram[sol.support.size()];
    if (sol.support.size() != static_cast<size_t>(k)) all_exact = false;
  }
  nlohmann::json hist = nlohmann::json::object();
  std::string csv = "x,y,stderr,series\n";
  for (const auto& [size, count] : histogram) {
    hist[std::to_string(size)] = count;
    csv += csv_row(static_cast<double>(size), count, 0.0, "support_size_count");
  }
  rec.results = {{"k", k}, {"n_seeds", n_seeds}, {"support_histogram", hist}};
  rec.csv = csv;
  rec.verdicts.push_back({"support_size", all_exact,
                          "maximizer support == k for all " + std::to_string(n_seeds) + " seeds"});
}

void run_mc_partition(const ExperimentConfig& cfg, RunRecord& rec) {
  const ModelParams params = params_from(cfg);
  const int box_radius = cfg.get_int("box_radius");
  const size_t replicas = cfg.get_u64("replicas");
  const uint64_t seed = cfg.get_u64("seed");
  const std::string beta_kind = cfg.get_string_or("beta", "scaled");
  const std::string mode_name = cfg.get_string_or("mode", "killed");
  const BoundaryMode mode = mode_name == "free" ? BoundaryMode::Free : BoundaryMode::Killed;
  const double beta = beta_kind == "zero" ? 0.0 : derive_scales(params).beta_t;
  RngStream rng(seed);
  const PotentialField field = sample_field(params, box_radius, rng.split(0).key());
  RngStream walker = rng.split(1);
  const McEstimate est = estimate_logZ_naive(params, field, beta, replicas, mode, walker);
  const double gamma_t = derive_scales(params).gamma_t;
  rec.results = {{"estimate", mc_to_json(est, params, beta, seed)}};
  rec.csv = "x,y,stderr,series\n" + csv_row(params.t, est.log_estimate / gamma_t,
                                            est.stderr_log / gamma_t, "logZ_per_gamma");
  rec.verdicts.push_back({"finite_estimate", std::isfinite(est.log_estimate),
                          "log Z estimate = " + std::to_string(est.log_estimate)});
  if (cfg.get_bool_or("pam_check", false)) {
    if (beta != 0 || mode != BoundaryMode::Killed)
      throw std::invalid_argument("mc-partition: pam_check requires beta=zero and mode=killed");
    const double mass = pam_oracle(field, params.t);
    const double diff = std::abs(est.log_estimate - std::log(mass));
    rec.results["pam_log_mass"] = std::log(mass);
    rec.verdicts.push_back({"pam_agreement", diff <= 3 * est.stderr_log,
                            "|logZ - log U(t)| = " + std::to_string(diff) + " vs 3se = " +
                                std::to_string(3 * est.stderr_log)});
  }
}

void run_guided_vs_naive(const ExperimentConfig& cfg, RunRecord& rec) {
  const ModelParams params = params_from(cfg);
  const double L = cfg.get_double("L");
  const size_t replicas = cfg.get_u64("replicas");
  const uint64_t seed = cfg.get_u64("seed");
  const ScaleSet scales = derive_scales(params);
  const int box_radius = cfg.get_int_or(
      "box_radius",
      static_cast<int>(std::ceil(std::max(6.0 * params.d * params.t, L * scales.r_t + 10.0))));
  RngStream rng(seed);
  const PotentialField field = sample_field(params, box_radius, rng.split(0).key());
  const PointMeasure rescaled = rescale_field(field, params);
  const PointMeasure window = restrict_measure(rescaled, L);
  if (window.size() > SolverOptions{}.exact_cap)
    throw std::invalid_argument("guided-vs-naive: window holds " +
                                std::to_string(window.size()) +
                                " points, beyond the exact solver cap; lower L");
  const SolverResult sol = solve_xi(window, scales.q, params.theta);

  RngStream naive_rng = rng.split(1);
  const McEstimate naive = estimate_logZ_naive(params, field, scales.beta_t, replicas,
                                               BoundaryMode::Killed, naive_rng);
  rec.results = {{"t", params.t},
                 {"window_points", window.size()},
                 {"xi_window", sol.xi},
                 {"naive", mc_to_json(naive, params, scales.beta_t, seed)}};
  std::string csv = "x,y,stderr,series\n";
  csv += csv_row(params.t, naive.log_estimate / scales.gamma_t,
                 naive.stderr_log / scales.gamma_t, "naive_per_gamma");
  csv += csv_row(params.t, sol.xi, 0.0, "xi_window");

  if (sol.support.empty()) {
    rec.results["note"] = "window maximizer is the zero measure; guided run skipped";
    rec.csv = csv;
    return;
  }

  // tour strategy from the window maximizer; sojourn fractions are the
  // maximizer weights renormalized to total 1 - s (the maximizer may be a
  // strict sub-probability measure when its marks sum below 2 theta)
  StrategySpec spec;
  spec.s = 1.0 / std::log(params.t);
  spec.delta = spec.s;
  spec.k = static_cast<int>(sol.support.size());
  spec.targets.resize(spec.k);
  spec.weights.resize(spec.k);
  double mass = 0;
  for (double w : sol.weights) mass += w;
  for (int i = 0; i < spec.k; ++i) {
    const size_t sup_pos = sol.order[i];  // visit in the D0-optimal order
    const auto y = window.location(sol.support[sup_pos]);
    Site site(params.d);
    for (int c = 0; c < params.d; ++c)
      site[c] = static_cast<int32_t>(std::llround(y[c] * scales.r_t));
    spec.targets[i] = site;
    spec.weights[i] = sol.weights[sup_pos] * (1.0 - spec.s) / mass;
  }
  RngStream guided_rng = rng.split(2);
  const McEstimate guided = estimate_logZ_guided(params, field, spec, scales.beta_t, replicas,
                                                 BoundaryMode::Killed, guided_rng);
  rec.results["guided"] = mc_to_json(guided, params, scales.beta_t, seed);
  rec.results["strategy_k"] = spec.k;
  csv += csv_row(params.t, guided.log_estimate / scales.gamma_t,
                 guided.stderr_log / scales.gamma_t, "guided_per_gamma");
  rec.csv = csv;

  // no verdict on guided vs naive here: at larger t the naive estimate sits
  // far below E[e^H] (too few replicas ever see the dominant tours), so the
  // ordering of the two estimates is not statistically assertable
  const double guided_per_gamma = guided.log_estimate / scales.gamma_t;
  const double bound = sol.xi + 3 * guided.stderr_log / scales.gamma_t;
  rec.verdicts.push_back({"guided_below_xi", guided_per_gamma <= bound,
                          "guided/gamma " + std::to_string(guided_per_gamma) + " vs xi " +
                              std::to_string(sol.xi)});
}

void run_d1_screening(const ExperimentConfig& cfg, RunRecord& rec) {
  const int n_configs = cfg.get_int("n_configs");
  const int max_points = cfg.get_int("max_points");
  const double theta = cfg.get_double("theta");
  const double q = cfg.get_double("q");
  RngStream rng(cfg.get_u64("seed"));
  double max_diff = 0;
  for (int i = 0; i < n_configs; ++i) {
    RngStream inst = rng.split(i);
    const int n = 1 + static_cast<int>(inst.uniform_below(max_points));
    PointMeasure pm;
    pm.d = 1;
    for (int p = 0; p < n; ++p) {
      const double f = 0.3 * sample_pareto(2.0, inst);
      const double y = inst.uniform(-2, 2);
      pm.add_point(f, std::vector<double>{y});
    }
    const double via_screening = xi_d1_screening(pm, q, theta);
    const double via_solver = solve_xi(pm, q, theta).xi;
    max_diff = std::max(max_diff, std::abs(via_screening - via_solver));
  }
  rec.results = {{"n_configs", n_configs}, {"max_abs_diff", max_diff}};
  rec.verdicts.push_back({"screening_matches_solver", max_diff <= 1e-9,
                          "max |screening - solver| = " + std::to_string(max_diff)});
}

void run_tail_bound(const ExperimentConfig& cfg, RunRecord& rec) {
  ModelParams params;
  params.d = cfg.get_int("d");
  params.alpha = cfg.get_double("alpha");
  params.theta = cfg.get_double_or("theta", 1.0);
  params.t = cfg.get_double("t");
  const double R = cfg.get_double("R");
  const LogTailBound lt = log_jump_tail_bound_check(params, R);
  rec.results = {{"R", R},
                 {"log_exact_tail", lt.log_exact_tail},
                 {"log_exponential_bound", lt.log_exponential_bound},
                 {"exact_tail", std::exp(lt.log_exact_tail)},
                 {"exponential_bound", std::exp(lt.log_exponential_bound)}};
  rec.csv = "x,y,stderr,series\n" + csv_row(R, lt.log_exact_tail, 0.0, "log_exact_tail") +
            csv_row(R, lt.log_exponential_bound, 0.0, "log_exponential_bound");
  rec.verdicts.push_back({"exact_below_bound", lt.log_exact_tail <= lt.log_exponential_bound,
                          "log exact " + std::to_string(lt.log_exact_tail) + " vs log bound " +
                              std::to_string(lt.log_exponential_bound)});
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  RunRecord rec;
  rec.artifact_version = kArtifactVersion;
  rec.config_echo = nlohmann::json::object();
  for (const auto& [k, v] : cfg.values) rec.config_echo[k] = v;
  const auto start = std::chrono::steady_clock::now();
  const std::string kind = cfg.get_string("kind");
  if (kind == "scales-check") run_scales_check(cfg, rec);
  else if (kind == "ppp-convergence") run_ppp_convergence(cfg, rec);
  else if (kind == "phi-oracle") run_phi_oracle(cfg, rec);
  else if (kind == "d0-oracle") run_d0_oracle(cfg, rec);
  else if (kind == "xi-solve") run_xi_solve(cfg, rec);
  else if (kind == "multisupport") run_multisupport(cfg, rec);
  else if (kind == "mc-partition") run_mc_partition(cfg, rec);
  else if (kind == "guided-vs-naive") run_guided_vs_naive(cfg, rec);
  else if (kind == "d1-screening") run_d1_screening(cfg, rec);
  else if (kind == "tail-bound") run_tail_bound(cfg, rec);
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
  return rec;
}

std::vector<RunRecord> sweep_experiment(const ExperimentConfig& base, const std::string& axis,
                                        const std::vector<std::string>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: no axis values");
  if (!base.has("seed")) throw std::invalid_argument("sweep: seed is mandatory");
  const uint64_t base_seed = base.get_u64("seed");
  std::vector<ExperimentConfig> configs;
  for (size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig cfg = base;
    cfg.values[axis] = values[i];
    cfg.values["seed"] = std::to_string(RngStream(base_seed).split(i).key());
    validate_config(cfg);
    configs.push_back(std::move(cfg));
  }
  std::vector<RunRecord> records(configs.size());
  size_t workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("POLYMER_WORKERS")) workers = std::stoul(env);
  workers = std::max<size_t>(1, std::min(workers, configs.size()));
  if (workers == 1) {
    for (size_t i = 0; i < configs.size(); ++i) records[i] = run_experiment(configs[i]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (size_t i = w; i < configs.size(); i += workers)
            records[i] = run_experiment(configs[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  return records;
}

std::string sweep_csv(const std::vector<RunRecord>& records, const std::string& axis,
                      const std::vector<std::string>& values) {
  std::string out = "axis,axis_value,x,y,stderr,series\n";
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].csv.empty()) continue;
    std::istringstream in(records[i].csv);
    std::string line;
    std::getline(in, line);  // drop the per-run header
    while (std::getline(in, line))
      if (!line.empty()) out += axis + "," + values[i] + "," + line + "\n";
  }
  return out;
}

}  // namespace polymer
