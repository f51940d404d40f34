#include "polymer/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace polymer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double l1_dist(const double* a, const double* b, int d) {
  double s = 0;
  for (int c = 0; c < d; ++c) s += std::abs(a[c] - b[c]);
  return s;
}

double l1_from_origin(const double* a, int d) {
  double s = 0;
  for (int c = 0; c < d; ++c) s += std::abs(a[c]);
  return s;
}

void check_points(const std::vector<double>& points, int d) {
  if (d < 1) throw std::invalid_argument("d0: d must be positive");
  if (points.size() % d != 0) throw std::invalid_argument("d0: point array not a multiple of d");
}

// nearest neighbour + 2-opt, used only above the exact cap
D0Result d0_heuristic(const std::vector<double>& points, int d) {
  const size_t n = points.size() / d;
  std::vector<int> order;
  std::vector<bool> used(n, false);
  std::vector<double> cur(d, 0.0);
  for (size_t step = 0; step < n; ++step) {
    int best = -1;
    double best_dist = kInf;
    for (size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double dist = l1_dist(cur.data(), &points[j * d], d);
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<int>(j);
      }
    }
    used[best] = true;
    order.push_back(best);
    for (int c = 0; c < d; ++c) cur[c] = points[best * d + c];
  }
  auto edge = [&](int i, int j) {  // i == -1 is the origin
    const double* a = i < 0 ? nullptr : &points[order[i] * d];
    const double* b = &points[order[j] * d];
    return a ? l1_dist(a, b, d) : l1_from_origin(b, d);
  };
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        // reverse order[i..j]; only the two boundary edges change
        const double before = edge(static_cast<int>(i) - 1, static_cast<int>(i)) +
                              (j + 1 < n ? edge(static_cast<int>(j), static_cast<int>(j) + 1) : 0);
        std::reverse(order.begin() + i, order.begin() + j + 1);
        const double after = edge(static_cast<int>(i) - 1, static_cast<int>(i)) +
                             (j + 1 < n ? edge(static_cast<int>(j), static_cast<int>(j) + 1) : 0);
        if (after < before - 1e-15) {
          improved = true;
        } else {
          std::reverse(order.begin() + i, order.begin() + j + 1);
        }
      }
    }
  }
  double cost = l1_from_origin(&points[order[0] * d], d);
  for (size_t i = 0; i + 1 < n; ++i)
    cost += l1_dist(&points[order[i] * d], &points[order[i + 1] * d], d);
  return D0Result{cost, order, false};
}

}  // namespace

D0Result d0(const std::vector<double>& points, int d, int exact_cap) {
  check_points(points, d);
  const size_t n = points.size() / d;
  if (n == 0) return D0Result{0.0, {}, true};
  // the DP table grows as n 2^n; 20 is a hard ceiling regardless of the cap
  if (n > static_cast<size_t>(exact_cap) || n > 20) return d0_heuristic(points, d);

  const uint32_t full = (1u << n) - 1;
  std::vector<double> dist0(n);
  std::vector<double> dist(n * n);
  for (size_t i = 0; i < n; ++i) {
    dist0[i] = l1_from_origin(&points[i * d], d);
    for (size_t j = 0; j < n; ++j) dist[i * n + j] = l1_dist(&points[i * d], &points[j * d], d);
  }
  std::vector<double> dp(static_cast<size_t>(full + 1) * n, kInf);
  std::vector<int8_t> parent(static_cast<size_t>(full + 1) * n, -1);
  for (size_t j = 0; j < n; ++j) dp[(1u << j) * n + j] = dist0[j];
  for (uint32_t mask = 1; mask <= full; ++mask) {
    if (std::popcount(mask) < 2) continue;
    for (uint32_t mj = mask; mj; mj &= mj - 1) {
      const int j = std::countr_zero(mj);
      const uint32_t prev = mask ^ (1u << j);
      double best = kInf;
      int8_t arg = -1;
      for (uint32_t mi = prev; mi; mi &= mi - 1) {
        const int i = std::countr_zero(mi);
        const double c = dp[prev * n + i] + dist[i * n + j];
        if (c < best) {
          best = c;
          arg = static_cast<int8_t>(i);
        }
      }
      dp[mask * n + j] = best;
      parent[mask * n + j] = arg;
    }
  }
  double cost = kInf;
  int last = -1;
  for (size_t j = 0; j < n; ++j) {
    if (dp[full * n + j] < cost) {
      cost = dp[full * n + j];
      last = static_cast<int>(j);
    }
  }
  std::vector<int> order(n);
  uint32_t mask = full;
  for (size_t pos = n; pos-- > 0;) {
    order[pos] = last;
    const int prev = parent[mask * n + last];
    mask ^= 1u << last;
    last = prev;
  }
  return D0Result{cost, order, true};
}

std::vector<double> d0_all_subsets(const std::vector<double>& points, int d) {
  check_points(points, d);
  const size_t n = points.size() / d;
  if (n > 20) throw std::invalid_argument("d0_all_subsets: table limited to 20 points");
  const uint32_t full = n == 0 ? 0 : (1u << n) - 1;
  std::vector<double> table(static_cast<size_t>(full) + 1, 0.0);
  if (n == 0) return table;
  std::vector<double> dist0(n);
  std::vector<double> dist(n * n);
  for (size_t i = 0; i < n; ++i) {
    dist0[i] = l1_from_origin(&points[i * d], d);
    for (size_t j = 0; j < n; ++j) dist[i * n + j] = l1_dist(&points[i * d], &points[j * d], d);
  }
  std::vector<double> dp(static_cast<size_t>(full + 1) * n, kInf);
  for (size_t j = 0; j < n; ++j) dp[(1u << j) * n + j] = dist0[j];
  for (uint32_t mask = 1; mask <= full; ++mask) {
    double best = kInf;
    const bool single = std::popcount(mask) == 1;
    for (uint32_t mj = mask; mj; mj &= mj - 1) {
      const int j = std::countr_zero(mj);
      if (!single) {
        const uint32_t prev = mask ^ (1u << j);
        double b = kInf;
        for (uint32_t mi = prev; mi; mi &= mi - 1) {
          const int i = std::countr_zero(mi);
          b = std::min(b, dp[prev * n + i] + dist[i * n + j]);
        }
        dp[mask * n + j] = b;
      }
      best = std::min(best, dp[mask * n + j]);
    }
    table[mask] = best;
  }
  return table;
}

int k_star(std::span<const double> f_desc, double theta) {
  const size_t k = f_desc.size();
  if (k == 0) throw std::invalid_argument("k_star: empty mark list");
  double sum = 0;
  for (size_t i = 0; i < k; ++i) {
    if (i > 0 && f_desc[i] > f_desc[i - 1])
      throw std::invalid_argument("k_star: marks must be non-increasing");
    sum += f_desc[i];
  }
  if (sum < 2 * theta) throw std::domain_error("k_star: requires sum f >= 2 theta");
  double prefix = 0;
  for (size_t j = 1; j < k; ++j) {
    prefix += f_desc[j - 1];
    if (static_cast<double>(j) * f_desc[j] <= prefix - 2 * theta) return static_cast<int>(j);
  }
  return static_cast<int>(k);
}

PhiResult phi_k(std::span<const double> f, double theta) {
  if (!(theta > 0)) throw std::invalid_argument("phi_k: theta must be positive");
  const size_t k = f.size();
  PhiResult res;
  res.weights.assign(k, 0.0);
  if (k == 0) return res;
  double sum = 0;
  for (double v : f) {
    if (!(v > 0)) throw std::invalid_argument("phi_k: marks must be positive");
    sum += v;
  }
  if (sum < 2 * theta) {
    // mass constraint slack: unconstrained optimum w_i = f_i / 2 theta
    double value = 0;
    for (size_t i = 0; i < k; ++i) {
      res.weights[i] = f[i] / (2 * theta);
      value += f[i] * f[i];
    }
    res.value = value / (4 * theta);
    res.active_count = static_cast<int>(k);
    res.saturated = false;
    return res;
  }
  std::vector<size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return f[a] > f[b]; });
  std::vector<double> sorted(k);
  for (size_t i = 0; i < k; ++i) sorted[i] = f[idx[i]];
  const int ks = k_star(sorted, theta);
  double top_sum = 0, top_sum_sq = 0;
  for (int i = 0; i < ks; ++i) {
    top_sum += sorted[i];
    top_sum_sq += sorted[i] * sorted[i];
  }
  const double lambda = (top_sum - 2 * theta) / ks;
  for (int i = 0; i < ks; ++i) res.weights[idx[i]] = (sorted[i] - lambda) / (2 * theta);
  res.value = (top_sum_sq - (top_sum - 2 * theta) * (top_sum - 2 * theta) / ks) / (4 * theta);
  res.active_count = ks;
  res.saturated = true;
  return res;
}

double WeightedMeasure::total_mass() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

void WeightedMeasure::validate() const {
  if (support.size() != weights.size())
    throw std::invalid_argument("WeightedMeasure: support/weight size mismatch");
  if (!support.empty() && base == nullptr)
    throw std::invalid_argument("WeightedMeasure: missing base measure");
  for (size_t i = 0; i < support.size(); ++i) {
    if (base && support[i] >= base->size())
      throw std::invalid_argument("WeightedMeasure: support index out of range");
    if (!(weights[i] > 0)) throw std::invalid_argument("WeightedMeasure: weights must be positive");
    for (size_t j = i + 1; j < support.size(); ++j)
      if (support[i] == support[j])
        throw std::invalid_argument("WeightedMeasure: duplicate support index");
  }
  if (total_mass() > 1 + 1e-12)
    throw std::invalid_argument("WeightedMeasure: total mass exceeds 1");
}

std::optional<double> psi(const PointMeasure& P, const WeightedMeasure& mu, double q,
                          double theta) {
  mu.validate();
  if (mu.support.empty()) return 0.0;  // the zero measure
  std::vector<double> locs;
  double energy = 0;
  for (size_t i = 0; i < mu.support.size(); ++i) {
    const size_t s = mu.support[i];
    const double f = mu.base->marks[s];
    const auto y = mu.base->location(s);
    bool found = false;
    if (mu.base == &P) {
      found = true;
    } else {
      for (size_t j = 0; j < P.size() && !found; ++j) {
        if (P.marks[j] != f) continue;
        const auto py = P.location(j);
        found = std::equal(y.begin(), y.end(), py.begin(), py.end());
      }
    }
    if (!found) return std::nullopt;  // mu not absolutely continuous w.r.t. P
    const double w = mu.weights[i];
    energy += f * w - theta * w * w;
    locs.insert(locs.end(), y.begin(), y.end());
  }
  return energy - q * d0(locs, P.d).cost;
}

WeightedMeasure SolverResult::maximizer(const PointMeasure& P) const {
  WeightedMeasure mu;
  mu.base = &P;
  mu.support = support;
  mu.weights = weights;
  return mu;
}

namespace {

struct Candidate {
  double value;
  uint64_t mask;
};

std::vector<size_t> mask_to_indices(uint64_t mask) {
  std::vector<size_t> idx;
  while (mask) {
    idx.push_back(static_cast<size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return idx;
}

bool lex_less(const std::vector<size_t>& a, const std::vector<size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

class CandidateSet {
 public:
  explicit CandidateSet(double tie_tol) : tie_tol_(tie_tol) {
    items_.push_back({0.0, 0});  // zero measure
  }

  double best() const { return best_; }

  void offer(double value, uint64_t mask) {
    if (value < best_ - tie_tol_) return;
    items_.push_back({value, mask});
    if (value > best_) best_ = value;
    if (items_.size() > 256) compact();
  }

  std::vector<Candidate> ties() {
    compact();
    return items_;
  }

 private:
  void compact() {
    std::erase_if(items_, [&](const Candidate& c) { return c.value < best_ - tie_tol_; });
  }

  double tie_tol_;
  double best_ = 0.0;
  std::vector<Candidate> items_;
};

// closed-form phi of an active set from running sums
double phi_active(double sum_f, double sum_f2, int m, double theta) {
  if (sum_f < 2 * theta) return sum_f2 / (4 * theta);
  const double excess = sum_f - 2 * theta;
  return (sum_f2 - excess * excess / m) / (4 * theta);
}

struct BnbContext {
  const PointMeasure* P;
  double q, theta, tie_tol;
  int d0_cap;
  std::vector<size_t> sorted;     // original indices, marks descending
  std::vector<double> suffix_f2;  // over sorted positions
  CandidateSet* out;
  std::vector<size_t> chosen;     // sorted positions
  std::vector<double> chosen_locs;
  double sum_f = 0, sum_f2 = 0, max_l1 = 0;
};

void bnb(BnbContext& ctx, size_t pos) {
  const size_t n = ctx.sorted.size();
  if (pos == n) return;
  const double bound = (ctx.sum_f2 + ctx.suffix_f2[pos]) / (4 * ctx.theta) - ctx.q * ctx.max_l1;
  if (bound < ctx.out->best() - ctx.tie_tol) return;

  const double f_new = ctx.P->marks[ctx.sorted[pos]];
  const double m = static_cast<double>(ctx.chosen.size());
  // adding f_new as the (m+1)-th mark keeps all weights positive only if
  // m f_new > sum f - 2 theta; smaller marks fail the same test, so the
  // whole include-subtree is dominated by already-enumerated sets
  if (m > 0 && m * f_new <= ctx.sum_f - 2 * ctx.theta) return;

  // include
  const auto y = ctx.P->location(ctx.sorted[pos]);
  ctx.chosen.push_back(pos);
  ctx.chosen_locs.insert(ctx.chosen_locs.end(), y.begin(), y.end());
  const double saved_max = ctx.max_l1;
  ctx.sum_f += f_new;
  ctx.sum_f2 += f_new * f_new;
  ctx.max_l1 = std::max(ctx.max_l1, l1_norm(y));
  {
    if (ctx.chosen.size() > static_cast<size_t>(ctx.d0_cap))
      throw std::domain_error("solve_xi: candidate subset exceeds the exact D0 cap; restrict the window");
    const double phi =
        phi_active(ctx.sum_f, ctx.sum_f2, static_cast<int>(ctx.chosen.size()), ctx.theta);
    if (phi - ctx.q * ctx.max_l1 >= ctx.out->best() - ctx.tie_tol) {
      const double value = phi - ctx.q * d0(ctx.chosen_locs, ctx.P->d, ctx.d0_cap).cost;
      uint64_t mask = 0;
      for (size_t p : ctx.chosen) mask |= uint64_t{1} << ctx.sorted[p];
      ctx.out->offer(value, mask);
    }
  }
  bnb(ctx, pos + 1);
  ctx.chosen.pop_back();
  ctx.chosen_locs.resize(ctx.chosen_locs.size() - ctx.P->d);
  ctx.sum_f -= f_new;
  ctx.sum_f2 -= f_new * f_new;
  ctx.max_l1 = saved_max;

  // exclude
  bnb(ctx, pos + 1);
}

}  // namespace

SolverResult solve_xi(const PointMeasure& P, double q, double theta,
                      const SolverOptions& options) {
  if (!(theta > 0)) throw std::invalid_argument("solve_xi: theta must be positive");
  if (!(q > 0)) throw std::invalid_argument("solve_xi: q must be positive");
  const size_t n = P.size();
  if (n > options.exact_cap)
    throw std::domain_error(
        "solve_xi: instance exceeds the exact cap; restrict_measure(P, L) to a window first");

  CandidateSet candidates(options.tie_tol);

  if (n > 0 && n <= 18) {
    // exhaustive scan over subsets with all-positive closed-form weights;
    // zero-weight supersets never score strictly better (D0 is monotone)
    const std::vector<double> d0_table = d0_all_subsets(P.locations, P.d);
    const uint32_t full = (1u << n) - 1;
    std::vector<double> marks;
    for (uint32_t mask = 1; mask <= full; ++mask) {
      marks.clear();
      for (uint32_t m = mask; m; m &= m - 1) marks.push_back(P.marks[std::countr_zero(m)]);
      const PhiResult phi = phi_k(marks, theta);
      if (phi.active_count != static_cast<int>(marks.size())) continue;
      candidates.offer(phi.value - q * d0_table[mask], mask);
    }
  } else if (n > 18) {
    BnbContext ctx;
    ctx.P = &P;
    ctx.q = q;
    ctx.theta = theta;
    ctx.tie_tol = options.tie_tol;
    ctx.d0_cap = options.d0_cap;
    ctx.sorted.resize(n);
    std::iota(ctx.sorted.begin(), ctx.sorted.end(), 0);
    std::stable_sort(ctx.sorted.begin(), ctx.sorted.end(),
                     [&](size_t a, size_t b) { return P.marks[a] > P.marks[b]; });
    ctx.suffix_f2.assign(n + 1, 0.0);
    for (size_t i = n; i-- > 0;) {
      const double f = P.marks[ctx.sorted[i]];
      ctx.suffix_f2[i] = ctx.suffix_f2[i + 1] + f * f;
    }
    ctx.out = &candidates;
    bnb(ctx, 0);
  }

  // deterministic winner: lexicographically smallest support among ties
  std::vector<Candidate> ties = candidates.ties();
  std::vector<std::vector<size_t>> supports(ties.size());
  for (size_t i = 0; i < ties.size(); ++i) supports[i] = mask_to_indices(ties[i].mask);
  size_t win = 0;
  for (size_t i = 1; i < ties.size(); ++i)
    if (lex_less(supports[i], supports[win])) win = i;

  SolverResult res;
  if (ties[win].mask == 0) {
    res.xi = 0;
  } else {
    res.support = supports[win];
    std::vector<double> marks, locs;
    for (size_t s : res.support) {
      marks.push_back(P.marks[s]);
      const auto y = P.location(s);
      locs.insert(locs.end(), y.begin(), y.end());
    }
    const PhiResult phi = phi_k(marks, theta);
    const D0Result path = d0(locs, P.d, options.d0_cap);
    res.phi = phi.value;
    res.weights = phi.weights;
    res.d0_cost = path.cost;
    res.order.assign(path.order.begin(), path.order.end());
    res.xi = res.phi - q * res.d0_cost;
  }
  for (size_t i = 0; i < ties.size(); ++i) {
    if (i == win) continue;
    res.ties.push_back(SolverTie{ties[i].value, supports[i]});
  }
  std::sort(res.ties.begin(), res.ties.end(), [](const SolverTie& a, const SolverTie& b) {
    if (a.xi != b.xi) return a.xi > b.xi;
    return lex_less(a.support, b.support);
  });
  return res;
}

PointMeasure build_multisupport_config(int k, double q, double theta, int d, RngStream& rng) {
  if (k < 1) throw std::invalid_argument("build_multisupport_config: k must be >= 1");
  if (d < 1) throw std::invalid_argument("build_multisupport_config: d must be >= 1");
  if (!(q > 0) || !(theta > 0))
    throw std::invalid_argument("build_multisupport_config: q and theta must be positive");
  const double k4 = std::pow(static_cast<double>(k), 4.0);
  const double eps = theta / (4 * q * k4);
  const double L = 2 * theta + (q + 1) * eps + 1;
  PointMeasure pm;
  pm.d = d;
  pm.provenance = Provenance::Synthetic;
  std::vector<double> y(d);
  for (int i = 0; i < k; ++i) {
    const double f = rng.uniform(L, L + 2 * theta / k);
    for (;;) {  // uniform in the closed l1 ball of radius eps, by rejection
      double s = 0;
      for (int c = 0; c < d; ++c) {
        y[c] = rng.uniform(-eps, eps);
        s += std::abs(y[c]);
      }
      if (s <= eps) break;
    }
    pm.add_point(f, y);
  }
  return pm;
}

double xi_d1_screening(const PointMeasure& P, double q, double theta) {
  if (P.d != 1) throw std::invalid_argument("xi_d1_screening: requires d = 1");
  if (!(q > 0) || !(theta > 0))
    throw std::invalid_argument("xi_d1_screening: q and theta must be positive");
  std::vector<double> left{0.0}, right{0.0};
  for (size_t i = 0; i < P.size(); ++i) {
    const double y = P.locations[i];
    if (y <= 0) left.push_back(-y);
    if (y >= 0) right.push_back(y);
  }
  double best = 0;
  std::vector<double> marks;
  for (double x : left) {
    for (double z : right) {
      if (x == 0 && z == 0) continue;
      marks.clear();
      for (size_t i = 0; i < P.size(); ++i)
        if (P.locations[i] >= -x && P.locations[i] <= z) marks.push_back(P.marks[i]);
      if (marks.empty()) continue;
      const double value =
          phi_k(marks, theta).value - q * (x + z) - q * std::min(x, z);
      best = std::max(best, value);
    }
  }
  return best;
}

nlohmann::json solver_result_to_json(const SolverResult& result, double q, double theta,
                                     const PointMeasure& P) {
  nlohmann::json support = nlohmann::json::array();
  for (size_t s : result.support) {
    nlohmann::json row = nlohmann::json::array();
    row.push_back(P.marks[s]);
    for (double c : P.location(s)) row.push_back(c);
    support.push_back(std::move(row));
  }
  nlohmann::json ties = nlohmann::json::array();
  for (const SolverTie& tie : result.ties)
    ties.push_back({{"xi", tie.xi}, {"support_indices", tie.support}});
  return nlohmann::json{{"schema", "solver/1"},
                        {"xi", result.xi},
                        {"phi", result.phi},
                        {"d0", result.d0_cost},
                        {"q", q},
                        {"theta", theta},
                        {"support", std::move(support)},
                        {"weights", result.weights},
                        {"order", result.order},
                        {"ties", std::move(ties)}};
}

}  // namespace polymer
