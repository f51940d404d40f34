#include "polymer/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "polymer/stats.hpp"

namespace polymer {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int32_t l1_int(const Site& a, const Site& b) {
  int32_t s = 0;
  for (size_t c = 0; c < a.size(); ++c) s += std::abs(a[c] - b[c]);
  return s;
}

int32_t l1_int(const Site& a) {
  int32_t s = 0;
  for (int32_t c : a) s += std::abs(c);
  return s;
}
}  // namespace

void WalkTrajectory::validate() const {
  if (sites.size() != jump_times.size() + 1)
    throw std::invalid_argument("WalkTrajectory: need jumps+1 sites");
  if (sites.empty()) throw std::invalid_argument("WalkTrajectory: empty");
  for (int32_t c : sites[0])
    if (c != 0) throw std::invalid_argument("WalkTrajectory: must start at the origin");
  double prev = 0;
  for (size_t j = 0; j < jump_times.size(); ++j) {
    if (!(jump_times[j] > prev) || jump_times[j] > horizon)
      throw std::invalid_argument("WalkTrajectory: jump times must increase within (0, horizon]");
    prev = jump_times[j];
    if (l1_int(sites[j], sites[j + 1]) != 1)
      throw std::invalid_argument("WalkTrajectory: consecutive sites must be unit steps");
  }
}

WalkTrajectory simulate_walk(double t, int d, RngStream& rng) {
  if (!(t > 0)) throw std::invalid_argument("simulate_walk: t must be positive");
  if (d < 1) throw std::invalid_argument("simulate_walk: d must be positive");
  WalkTrajectory traj;
  traj.horizon = t;
  traj.sites.push_back(Site(d, 0));
  double clock = rng.exponential(2.0 * d);
  while (clock <= t) {
    Site next = traj.sites.back();
    const int dim = static_cast<int>(rng.uniform_below(d));
    next[dim] += rng.uniform_below(2) ? 1 : -1;
    traj.jump_times.push_back(clock);
    traj.sites.push_back(std::move(next));
    clock += rng.exponential(2.0 * d);
  }
  return traj;
}

LocalTimeField local_times(const WalkTrajectory& traj) {
  traj.validate();
  LocalTimeField lt;
  lt.horizon = traj.horizon;
  double prev = 0;
  for (size_t j = 0; j < traj.jump_times.size(); ++j) {
    lt.occupation[traj.sites[j]] += traj.jump_times[j] - prev;
    prev = traj.jump_times[j];
  }
  lt.occupation[traj.sites.back()] += traj.horizon - prev;
  return lt;
}

double hamiltonian(const LocalTimeField& lt, const PotentialField& field, double beta) {
  double energy = 0, silt = 0;
  for (const auto& [site, ell] : lt.occupation) {
    if (!field.contains(site))
      throw std::domain_error("hamiltonian: occupied site outside the field box; enlarge the box");
    energy += field.value_at(site) * ell;
    silt += ell * ell;
  }
  return energy - beta * silt;
}

WeightedMeasure empirical_measure(const LocalTimeField& lt, const ModelParams& params,
                                  const PotentialField& field, const PointMeasure& base) {
  if (base.d != params.d || base.size() != field.site_count())
    throw std::invalid_argument("empirical_measure: base must be rescale_field(field)");
  WeightedMeasure mu;
  mu.base = &base;
  for (const auto& [site, ell] : lt.occupation) {
    if (!field.contains(site))
      throw std::domain_error("empirical_measure: occupied site outside the field box");
    if (ell <= 0) continue;
    mu.support.push_back(field.flat_index(site));
    mu.weights.push_back(ell / lt.horizon);
  }
  return mu;
}

void StrategySpec::validate(int d) const {
  if (k < 1) throw std::invalid_argument("StrategySpec: k must be >= 1");
  if (static_cast<int>(targets.size()) != k || static_cast<int>(weights.size()) != k)
    throw std::invalid_argument("StrategySpec: need k targets and k weights");
  if (!(delta > 0 && delta < 1) || !(s > 0 && s < 1))
    throw std::invalid_argument("StrategySpec: delta and s must lie in (0,1)");
  double sum = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("StrategySpec: weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum + s - 1.0) > 1e-12)
    throw std::invalid_argument("StrategySpec: weights must sum to 1 - s");
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(targets[i].size()) != d)
      throw std::invalid_argument("StrategySpec: target dimension mismatch");
    if (i >= 1 && targets[i] == targets[i - 1])
      throw std::invalid_argument("StrategySpec: consecutive targets must be distinct");
  }
}

namespace {

bool trajectory_in_box(const LocalTimeField& lt, const PotentialField& field) {
  for (const auto& [site, ell] : lt.occupation) {
    (void)ell;
    if (!field.contains(site)) return false;
  }
  return true;
}

McEstimate reduce_replicas(const ModelParams& params, const PotentialField& field, double beta,
                           size_t replicas, BoundaryMode mode, RngStream& rng,
                           const StrategySpec* spec) {
  if (replicas < 2) throw std::invalid_argument("estimator: need at least 2 replicas");
  LogMeanAccumulator acc;
  for (size_t r = 0; r < replicas; ++r) {
    RngStream stream = rng.split(r);
    double log_weight = 0;
    WalkTrajectory traj;
    if (spec) {
      GuidedSample gs = sample_guided_path(params.t, params.d, *spec, stream);
      traj = std::move(gs.traj);
      log_weight = gs.log_weight;
    } else {
      traj = simulate_walk(params.t, params.d, stream);
    }
    const LocalTimeField lt = local_times(traj);
    if (mode == BoundaryMode::Killed && !trajectory_in_box(lt, field)) {
      acc.add(kNegInf);
      continue;
    }
    acc.add(hamiltonian(lt, field, beta) + log_weight);
  }
  McEstimate est;
  est.log_estimate = acc.log_mean();
  est.stderr_log = acc.stderr_of_log_mean();
  est.replicas = replicas;
  est.kept = acc.finite_count();
  est.mode = mode;
  return est;
}

}  // namespace

McEstimate estimate_logZ_naive(const ModelParams& params, const PotentialField& field,
                               double beta, size_t replicas, BoundaryMode mode, RngStream& rng) {
  params.validate();
  return reduce_replicas(params, field, beta, replicas, mode, rng, nullptr);
}

GuidedSample sample_guided_path(double t, int d, const StrategySpec& spec, RngStream& rng) {
  spec.validate(d);
  for (double w : spec.weights)
    if (w == 0) throw std::invalid_argument("sample_guided_path: weights must be positive");
  const double budget = spec.s * t / spec.k;
  const double rate = 2.0 * d;

  GuidedSample out;
  out.log_weight = 0;
  WalkTrajectory& traj = out.traj;
  traj.horizon = t;
  traj.sites.push_back(Site(d, 0));
  double clock = 0;

  // one monotone jump toward `target`, uniform over the useful coordinates
  auto directed_jump = [&](const Site& target, double at) {
    const Site& cur = traj.sites.back();
    std::vector<int> useful;
    for (int c = 0; c < d; ++c)
      if (cur[c] != target[c]) useful.push_back(c);
    const int dim = useful[rng.uniform_below(useful.size())];
    Site next = cur;
    next[dim] += target[dim] > cur[dim] ? 1 : -1;
    traj.jump_times.push_back(at);
    traj.sites.push_back(std::move(next));
    out.log_weight += std::log(static_cast<double>(useful.size())) - std::log(rate);
  };

  // `steps` monotone jumps whose holding times are i.i.d. Exp(2d)
  // conditioned on the total elapsed time being <= budget; given the total,
  // the interior jump times are sorted uniforms
  auto conditioned_leg = [&](const Site& target, uint64_t steps) {
    if (steps == 0) return;
    const double span = truncated_gamma_quantile(steps, rate, budget, rng.uniform());
    std::vector<double> cuts(steps - 1);
    for (auto& c : cuts) c = rng.uniform();
    std::sort(cuts.begin(), cuts.end());
    for (uint64_t j = 0; j + 1 < steps; ++j) directed_jump(target, clock + cuts[j] * span);
    directed_jump(target, clock + span);
    out.log_weight += log_gamma_cdf(steps, rate, budget);
    clock += span;
  };

  for (int i = 0; i < spec.k; ++i) {
    const Site& target = spec.targets[i];
    // --- travel phase ---
    if (i == 0) {
      conditioned_leg(target, l1_int(target));
    } else {
      // the exit jump from the previous target starts the travel
      directed_jump(target, clock);
      conditioned_leg(target, l1_int(target, traj.sites.back()));
    }
    // --- hold phase: one sojourn in [(1-delta) t w_i, t w_i] ---
    const double a = (1 - spec.delta) * t * spec.weights[i];
    const double b = t * spec.weights[i];
    const double v = rng.uniform();
    const double sojourn = a - std::log1p(-v * (1.0 - std::exp(-rate * (b - a)))) / rate;
    out.log_weight += -rate * a + std::log1p(-std::exp(-rate * (b - a)));
    clock += sojourn;
  }

  // exit jump from the last target: unconstrained, then free evolution
  {
    const Site& cur = traj.sites.back();
    Site next = cur;
    const int dim = static_cast<int>(rng.uniform_below(d));
    next[dim] += rng.uniform_below(2) ? 1 : -1;
    traj.jump_times.push_back(clock);
    traj.sites.push_back(std::move(next));
  }
  for (double h = rng.exponential(rate); clock + h <= t; h = rng.exponential(rate)) {
    clock += h;
    Site next = traj.sites.back();
    const int dim = static_cast<int>(rng.uniform_below(d));
    next[dim] += rng.uniform_below(2) ? 1 : -1;
    traj.jump_times.push_back(clock);
    traj.sites.push_back(std::move(next));
  }
  return out;
}

McEstimate estimate_logZ_guided(const ModelParams& params, const PotentialField& field,
                                const StrategySpec& spec, double beta, size_t replicas,
                                BoundaryMode mode, RngStream& rng) {
  params.validate();
  spec.validate(params.d);
  for (const Site& y : spec.targets)
    if (!field.contains(y))
      throw std::invalid_argument("estimate_logZ_guided: target outside the field box");
  return reduce_replicas(params, field, beta, replicas, mode, rng, &spec);
}

namespace {

// site occupied at time u (right-continuous), plus segment end
struct SegmentCursor {
  const WalkTrajectory* traj;

  // first time >= from at which the walk sits at `site`; nan if never
  double first_hit(const Site& site, double from) const {
    const auto& jt = traj->jump_times;
    for (size_t j = 0; j <= jt.size(); ++j) {
      const double seg_start = j == 0 ? 0.0 : jt[j - 1];
      const double seg_end = j == jt.size() ? traj->horizon : jt[j];
      if (seg_end <= from && j != jt.size()) continue;  // right-continuous at jumps
      if (traj->sites[j] == site) return std::max(seg_start, from);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  // first jump strictly after `from` that leaves `site`; nan when the path
  // never leaves it before the horizon
  double exit_after(const Site& site, double from) const {
    const auto& jt = traj->jump_times;
    for (size_t j = 0; j <= jt.size(); ++j) {
      const double seg_start = j == 0 ? 0.0 : jt[j - 1];
      const double seg_end = j == jt.size() ? traj->horizon : jt[j];
      if (seg_end <= from) continue;
      if (seg_start > from) break;  // the walk moved elsewhere first
      if (traj->sites[j] == site) return j == jt.size() ? std::numeric_limits<double>::quiet_NaN()
                                                        : jt[j];
      break;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

}  // namespace

bool event_A(const WalkTrajectory& traj, const StrategySpec& spec) {
  spec.validate(traj.dimension());
  const double t = traj.horizon;
  const double budget = spec.s * t / spec.k;
  SegmentCursor cursor{&traj};
  double prev_exit = 0;  // sigma^{i-1}; 0 for i = 1
  for (int i = 0; i < spec.k; ++i) {
    const double entry = cursor.first_hit(spec.targets[i], prev_exit);
    if (std::isnan(entry) || entry - prev_exit > budget) return false;
    const double exit = cursor.exit_after(spec.targets[i], entry);
    if (std::isnan(exit)) return false;
    const double sojourn = exit - entry;
    const double w = spec.weights[i];
    if (sojourn < (1 - spec.delta) * t * w || sojourn > t * w) return false;
    prev_exit = exit;
  }
  return true;
}

bool event_direct_tour(const WalkTrajectory& traj, const StrategySpec& spec) {
  spec.validate(traj.dimension());
  const double t = traj.horizon;
  const double budget = spec.s * t / spec.k;
  const auto& jt = traj.jump_times;
  size_t j = 0;  // next unconsumed jump; the exit jump from target i doubles
                 // as the first travel jump toward target i+1
  for (int i = 0; i < spec.k; ++i) {
    const Site& target = spec.targets[i];
    const uint64_t steps = l1_int(target, traj.sites[j]);
    if (j + steps > jt.size()) return false;
    const double phase_start = i == 0 ? 0.0 : jt[j];  // sigma^{i-1} for i >= 1
    // monotone travel: every jump reduces the l1 distance to the target
    for (uint64_t m = 0; m < steps; ++m, ++j)
      if (l1_int(target, traj.sites[j + 1]) != l1_int(target, traj.sites[j]) - 1) return false;
    const double arrival = steps == 0 ? phase_start : jt[j - 1];
    if (arrival - phase_start > budget) return false;
    // single sojourn within the prescribed window, ended by a jump
    if (j >= jt.size()) return false;
    const double sojourn = jt[j] - arrival;
    const double w = spec.weights[i];
    if (sojourn < (1 - spec.delta) * t * w || sojourn > t * w) return false;
  }
  return true;
}

double log_prob_A_product_bound(const StrategySpec& spec, double t, int d) {
  if (!(t > 0)) throw std::invalid_argument("log_prob_A_product_bound: t must be positive");
  spec.validate(d);
  const double rate = 2.0 * d;
  double log_p = 0;
  Site prev(d, 0);
  for (int i = 0; i < spec.k; ++i) {
    const double n = l1_int(spec.targets[i], prev);
    const double w = spec.weights[i];
    log_p += log_poisson_pmf(rate * spec.s * t / spec.k, n);
    log_p += -rate * t * w * (1 - spec.delta);
    log_p += std::log1p(-std::exp(-rate * t * spec.delta * w));
    log_p += -n * std::log(rate);
    prev = spec.targets[i];
  }
  return log_p;
}

double hamiltonian_event_lower_bound(const StrategySpec& spec, const PotentialField& field,
                                     const ModelParams& params) {
  spec.validate(params.d);
  const ScaleSet scales = derive_scales(params);
  const double mark_scale = std::pow(scales.r_t, params.d / params.alpha);
  double energy = 0, silt = 0;
  for (int i = 0; i < spec.k; ++i) {
    energy += field.value_at(spec.targets[i]) / mark_scale * spec.weights[i];
    silt += spec.weights[i] * spec.weights[i];
  }
  const double slack = (spec.k + 5) * params.theta * (spec.delta + spec.s);
  return scales.gamma_t *
         ((1 - spec.delta) * energy - params.theta * silt - slack);
}

TailBound jump_tail_bound_check(const ModelParams& params, double R) {
  const LogTailBound lt = log_jump_tail_bound_check(params, R);
  return TailBound{std::exp(lt.log_exact_tail), std::exp(lt.log_exponential_bound)};
}

LogTailBound log_jump_tail_bound_check(const ModelParams& params, double R) {
  if (!(R >= 1)) throw std::invalid_argument("jump_tail_bound_check: requires R >= 1");
  const ScaleSet scales = derive_scales(params);
  LogTailBound out;
  out.log_exact_tail = log_poisson_upper_tail(2.0 * params.d * params.t, R * scales.r_t);
  out.log_exponential_bound = -(scales.q / 2) * R * scales.gamma_t;
  return out;
}

nlohmann::json mc_to_json(const McEstimate& est, const ModelParams& params, double beta,
                          uint64_t seed) {
  const ScaleSet scales = derive_scales(params);
  return nlohmann::json{
      {"schema", "mc/1"},
      {"mode", est.mode == BoundaryMode::Killed ? "killed" : "free"},
      {"params",
       {{"d", params.d}, {"alpha", params.alpha}, {"theta", params.theta}, {"t", params.t},
        {"beta", beta}}},
      {"replicas", est.replicas},
      {"kept", est.kept},
      {"log_estimate", est.log_estimate / scales.gamma_t},
      {"stderr", est.stderr_log / scales.gamma_t},
      {"log_estimate_raw", est.log_estimate},
      {"stderr_raw", est.stderr_log},
      {"normalization", "per gamma_t"},
      {"seed", seed}};
}

}  // namespace polymer
