#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "json.hpp"
#include "polymer/model.hpp"
#include "polymer/point_measure.hpp"
#include "polymer/rng.hpp"
#include "polymer/solver.hpp"

namespace polymer {

using Site = std::vector<int32_t>;

// Continuous-time simple random walk path on [0, horizon]: jump times are
// strictly increasing, sites start at the origin and move by unit steps.
struct WalkTrajectory {
  double horizon = 0;
  std::vector<double> jump_times;
  std::vector<Site> sites;

  int dimension() const { return sites.empty() ? 0 : static_cast<int>(sites[0].size()); }
  void validate() const;
};

// total jump rate 2d (generator = discrete Laplacian), uniform neighbours
WalkTrajectory simulate_walk(double t, int d, RngStream& rng);

struct LocalTimeField {
  double horizon = 0;
  std::map<Site, double> occupation;  // ordered, so reductions are deterministic
};

LocalTimeField local_times(const WalkTrajectory& traj);

// <xi, l> - beta ||l||_2^2; throws if an occupied site leaves the box
double hamiltonian(const LocalTimeField& lt, const PotentialField& field, double beta);

// weights l_t(z)/t attached to the rescaled field points; base must be
// rescale_field(field) (points indexed in the field's site order)
WeightedMeasure empirical_measure(const LocalTimeField& lt, const ModelParams& params,
                                  const PotentialField& field, const PointMeasure& base);

// Tour strategy: reach target i within s*t/k after leaving target i-1, then
// hold for a single sojourn in [(1-delta) t w_i, t w_i].
struct StrategySpec {
  int k = 1;
  std::vector<Site> targets;
  std::vector<double> weights;  // w_i >= 0, sum w = 1 - s
  double delta = 0.2;
  double s = 0.2;

  void validate(int d) const;
};

enum class BoundaryMode { Killed, Free };

struct McEstimate {
  double log_estimate = 0;  // log of the estimated partition function
  double stderr_log = 0;    // delta-method standard error of log_estimate
  size_t replicas = 0;
  size_t kept = 0;  // replicas that stayed inside the box
  BoundaryMode mode = BoundaryMode::Killed;
};

// log of the empirical mean of e^H over independent walks (streaming
// log-sum-exp). Killed mode zeroes replicas that exit the field box; Free
// mode requires the box to contain every visited site.
McEstimate estimate_logZ_naive(const ModelParams& params, const PotentialField& field,
                               double beta, size_t replicas, BoundaryMode mode, RngStream& rng);

struct GuidedSample {
  WalkTrajectory traj;
  double log_weight;  // log dP/dQ of the proposal at this path
};

// one conditional path through the tour event, with its exact likelihood
// ratio against the unconditioned walk law
GuidedSample sample_guided_path(double t, int d, const StrategySpec& spec, RngStream& rng);

// unbiased lower-bound estimator of Z via E[e^H ratio] over guided paths
McEstimate estimate_logZ_guided(const ModelParams& params, const PotentialField& field,
                                const StrategySpec& spec, double beta, size_t replicas,
                                BoundaryMode mode, RngStream& rng);

// indicator of the support of the guided proposal (direct monotone travel)
bool event_direct_tour(const WalkTrajectory& traj, const StrategySpec& spec);
// indicator of the tour event itself (first-entry/exit time constraints)
bool event_A(const WalkTrajectory& traj, const StrategySpec& spec);

// log of the product lower bound for the probability of the tour event
double log_prob_A_product_bound(const StrategySpec& spec, double t, int d);

// gamma_t * [ (1-delta) sum f_i w_i - theta sum w_i^2 - (k+5) theta (delta+s) ]
// with f_i the rescaled potential value at target i; valid on the event
double hamiltonian_event_lower_bound(const StrategySpec& spec, const PotentialField& field,
                                     const ModelParams& params);

// total mass of the heat equation with potential xi on the box, walk killed
// at the boundary; adaptive embedded Runge-Kutta pair
double pam_oracle(const PotentialField& field, double t);

struct TailBound {
  double exact_tail;
  double exponential_bound;
};
// exact Poisson(2dt) upper tail P[N >= R r_t] next to exp(-(q/2) R r_t log t)
TailBound jump_tail_bound_check(const ModelParams& params, double R);

struct LogTailBound {
  double log_exact_tail;
  double log_exponential_bound;
};
// same comparison in log space, usable where both sides underflow
LogTailBound log_jump_tail_bound_check(const ModelParams& params, double R);

// schema "mc/1"
nlohmann::json mc_to_json(const McEstimate& est, const ModelParams& params, double beta,
                          uint64_t seed);

}  // namespace polymer
