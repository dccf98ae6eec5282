#include "nrgap/bounds.hpp"

#include "nrgap/rng.hpp"
#include "nrgap/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace nrgap {

namespace {

constexpr double kMassSlack = 1e-12;
constexpr double kTieRelative = 1e-12;

// Candidate ordering: smaller value, then fewer states, then lexicographic.
bool better_set(double value, const std::vector<Index>& set, double best_value,
                const std::vector<Index>& best_set) {
  if (best_set.empty()) return true;
  const double slack = kTieRelative * std::max(1.0, std::abs(best_value));
  if (value < best_value - slack) return true;
  if (value > best_value + slack) return false;
  if (set.size() != best_set.size()) return set.size() < best_set.size();
  return set < best_set;
}

std::vector<Index> members(const std::vector<char>& in_set) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < in_set.size(); ++i)
    if (in_set[i]) out.push_back(static_cast<Index>(i));
  return out;
}

// Incremental cut bookkeeping for toggling single states in and out of A.
class CutState {
 public:
  explicit CutState(const FiniteChain& chain)
      : mu_(chain.stationary().weights()),
        flow_(mu_.asDiagonal() * chain.transition()),
        in_set_(static_cast<std::size_t>(chain.size()), 0),
        to_set_(Vector::Zero(chain.size())),
        from_set_(Vector::Zero(chain.size())),
        row_total_(flow_.rowwise().sum()) {}

  // Change in Q(A, A^c) if x were toggled.
  double cut_delta(Index x) const {
    const double self = flow_(x, x);
    if (!in_set_[x]) {
      // adding: x's outflow to the complement joins, inflow from A leaves.
      const double out_to_complement = row_total_[x] - self - to_set_[x];
      return out_to_complement - from_set_[x];
    }
    const double out_to_complement = row_total_[x] - to_set_[x];
    return -out_to_complement + (from_set_[x] - self);
  }

  double mass_delta(Index x) const { return in_set_[x] ? -mu_[x] : mu_[x]; }

  void toggle(Index x) {
    cut_ += cut_delta(x);
    mass_ += mass_delta(x);
    const double sign = in_set_[x] ? -1.0 : 1.0;
    in_set_[x] = !in_set_[x];
    count_ += in_set_[x] ? 1 : -1;
    to_set_ += sign * flow_.col(x);
    from_set_ += sign * flow_.row(x).transpose();
  }

  double cut() const { return cut_; }
  double mass() const { return mass_; }
  Index count() const { return count_; }
  bool contains(Index x) const { return in_set_[x] != 0; }
  std::vector<Index> set() const { return members(in_set_); }
  Index size() const { return mu_.size(); }

 private:
  Vector mu_;
  Matrix flow_;
  std::vector<char> in_set_;
  Vector to_set_;    // to_set_[y] = Q(y, A)
  Vector from_set_;  // from_set_[y] = Q(A, y)
  Vector row_total_;
  double cut_ = 0.0;
  double mass_ = 0.0;
  Index count_ = 0;
};

bool feasible(double mass, Index count) { return count > 0 && mass <= 0.5 + kMassSlack; }

}  // namespace

double conductance(const FiniteChain& chain, const std::vector<Index>& set) {
  const Vector& mu = chain.stationary().weights();
  const Matrix& p = chain.transition();
  std::vector<char> in_set(static_cast<std::size_t>(chain.size()), 0);
  for (Index x : set) in_set[x] = 1;
  double cut = 0.0, mass = 0.0;
  for (Index x : set) {
    mass += mu[x];
    for (Index y = 0; y < chain.size(); ++y)
      if (!in_set[y]) cut += mu[x] * p(x, y);
  }
  if (mass <= 0.0) throw Error(ErrorCode::BadArgument, "conductance of a null set");
  return cut / mass;
}

CheegerResult cheeger_exact(const FiniteChain& chain, Index limit) {
  chain.require_irreducible("cheeger_exact");
  const Index n = chain.size();
  if (n > limit)
    throw Error(ErrorCode::TooLargeForEnumeration,
                std::to_string(n) + " states exceeds the enumeration limit " + std::to_string(limit));
  CutState state(chain);
  CheegerResult best;
  best.xi = kInfinity;
  best.exact = true;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    // Gray code: toggle the lowest set bit of i.
    const Index bit = static_cast<Index>(std::countr_zero(i));
    state.toggle(bit);
    if (!feasible(state.mass(), state.count())) continue;
    const double value = state.cut() / state.mass();
    if (value > best.xi + kTieRelative * std::max(1.0, best.xi)) continue;
    std::vector<Index> set = state.set();
    if (better_set(value, set, best.xi, best.argmin_set)) {
      best.xi = value;
      best.argmin_set = std::move(set);
    }
  }
  best.xi = conductance(chain, best.argmin_set);
  return best;
}

CheegerResult cheeger_search(const FiniteChain& chain, int iters, std::uint64_t seed) {
  chain.require_irreducible("cheeger_search");
  const Index n = chain.size();
  const int restarts = static_cast<int>(std::max<Index>(n, 10));
  const int anneal_steps = std::max(iters / restarts, 0);
  const bool try_swaps = n <= 64;

  CheegerResult best;
  best.xi = kInfinity;
  best.exact = false;

  auto consider = [&](const CutState& s) {
    if (!feasible(s.mass(), s.count())) return;
    const double value = s.cut() / s.mass();
    std::vector<Index> set = s.set();
    if (better_set(value, set, best.xi, best.argmin_set)) {
      best.xi = value;
      best.argmin_set = std::move(set);
    }
  };

  auto value_after = [](const CutState& s, double cut_change, double mass_change, Index count_change) {
    const double mass = s.mass() + mass_change;
    if (!feasible(mass, s.count() + count_change)) return kInfinity;
    return (s.cut() + cut_change) / mass;
  };

  // Best-improvement descent over add/remove and (small chains) swap moves.
  auto descend = [&](CutState& s) {
    for (;;) {
      const double current = s.cut() / s.mass();
      double best_value = current;
      Index move_a = -1, move_b = -1;
      for (Index x = 0; x < n; ++x) {
        const double v = value_after(s, s.cut_delta(x), s.mass_delta(x), s.contains(x) ? -1 : 1);
        if (v < best_value - 1e-15) best_value = v, move_a = x, move_b = -1;
      }
      if (try_swaps) {
        for (Index x = 0; x < n; ++x) {
          if (!s.contains(x)) continue;
          s.toggle(x);
          for (Index y = 0; y < n; ++y) {
            if (y == x || s.contains(y)) continue;
            const double v = value_after(s, s.cut_delta(y), s.mass_delta(y), 1);
            if (v < best_value - 1e-15) best_value = v, move_a = x, move_b = y;
          }
          s.toggle(x);
        }
      }
      if (move_a < 0) return;
      s.toggle(move_a);
      if (move_b >= 0) s.toggle(move_b);
      consider(s);
    }
  };

  for (int r = 0; r < restarts; ++r) {
    Philox rng(seed, static_cast<std::uint64_t>(r));
    CutState s(chain);
    s.toggle(static_cast<Index>(r % n));
    if (!feasible(s.mass(), s.count())) continue;
    consider(s);
    descend(s);

    // Metropolis perturbations from the descended state.
    double temperature = 0.5 * std::max(s.cut() / s.mass(), 1e-6);
    for (int step = 0; step < anneal_steps; ++step) {
      const Index x = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      const double v = value_after(s, s.cut_delta(x), s.mass_delta(x), s.contains(x) ? -1 : 1);
      if (!std::isfinite(v)) continue;
      const double current = s.cut() / s.mass();
      if (v <= current || rng.uniform() < std::exp(-(v - current) / temperature)) {
        s.toggle(x);
        consider(s);
      }
      temperature *= 0.995;
    }
    descend(s);
  }

  // Polish the incumbent.
  CutState s(chain);
  for (Index x : best.argmin_set) s.toggle(x);
  descend(s);
  best.xi = conductance(chain, best.argmin_set);
  return best;
}

namespace {

using Adjacency = std::vector<std::vector<Index>>;

Adjacency edge_lists(const FiniteChain& chain) {
  const Matrix& p = chain.transition();
  const Vector& mu = chain.stationary().weights();
  Adjacency adj(chain.size());
  for (Index x = 0; x < chain.size(); ++x)
    for (Index y = 0; y < chain.size(); ++y)
      if (x != y && mu[x] * p(x, y) > 0.0) adj[x].push_back(y);
  return adj;
}

std::vector<Index> bfs_parents(const Adjacency& adj, Index source) {
  std::vector<Index> parent(adj.size(), -1);
  parent[source] = source;
  std::queue<Index> frontier;
  frontier.push(source);
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v : adj[u]) {
      if (parent[v] < 0) {
        parent[v] = u;
        frontier.push(v);
      }
    }
  }
  return parent;
}

std::vector<Index> vertex_path(const std::vector<Index>& parent, Index source, Index target) {
  if (parent[target] < 0)
    throw Error(ErrorCode::NoPathExists,
                "no directed path " + std::to_string(source) + " -> " + std::to_string(target));
  std::vector<Index> out{target};
  while (out.back() != source) out.push_back(parent[out.back()]);
  std::reverse(out.begin(), out.end());
  return out;
}

Path to_edges(const std::vector<Index>& vertices) {
  Path path;
  for (std::size_t i = 1; i < vertices.size(); ++i) path.emplace_back(vertices[i - 1], vertices[i]);
  return path;
}

std::vector<Index> loop_erase(const std::vector<Index>& walk) {
  std::vector<Index> out;
  for (Index v : walk) {
    auto it = std::find(out.begin(), out.end(), v);
    if (it != out.end()) out.erase(it + 1, out.end());
    else out.push_back(v);
  }
  return out;
}

}  // namespace

PathEnsemble default_paths(const FiniteChain& chain) {
  chain.require_irreducible("path_bound");
  const Adjacency adj = edge_lists(chain);
  PathEnsemble ensemble;
  for (Index x = 0; x < chain.size(); ++x) {
    const std::vector<Index> parent = bfs_parents(adj, x);
    for (Index y = 0; y < chain.size(); ++y)
      if (y != x) ensemble.paths[{x, y}] = to_edges(vertex_path(parent, x, y));
  }
  ensemble.congestion = congestion(chain, ensemble);
  return ensemble;
}

PathEnsemble random_paths(const FiniteChain& chain, std::uint64_t seed) {
  chain.require_irreducible("random_paths");
  Adjacency adj = edge_lists(chain);
  Philox rng(seed, 0);
  for (auto& list : adj)
    for (std::size_t i = list.size(); i > 1; --i) std::swap(list[i - 1], list[rng.below(i)]);
  std::vector<std::vector<Index>> parents;
  for (Index x = 0; x < chain.size(); ++x) parents.push_back(bfs_parents(adj, x));

  PathEnsemble ensemble;
  for (Index x = 0; x < chain.size(); ++x) {
    for (Index y = 0; y < chain.size(); ++y) {
      if (x == y) continue;
      const auto z = static_cast<Index>(rng.below(static_cast<std::uint64_t>(chain.size())));
      std::vector<Index> walk = vertex_path(parents[x], x, z);
      const std::vector<Index> tail = vertex_path(parents[z], z, y);
      walk.insert(walk.end(), tail.begin() + 1, tail.end());
      ensemble.paths[{x, y}] = to_edges(loop_erase(walk));
    }
  }
  ensemble.congestion = congestion(chain, ensemble);
  return ensemble;
}

double congestion(const FiniteChain& chain, const PathEnsemble& ensemble) {
  const Vector& mu = chain.stationary().weights();
  const Matrix& p = chain.transition();
  const Index n = chain.size();
  Matrix load = Matrix::Zero(n, n);
  for (Index x = 0; x < n; ++x) {
    for (Index y = 0; y < n; ++y) {
      if (x == y) continue;
      const auto it = ensemble.paths.find({x, y});
      if (it == ensemble.paths.end() || it->second.empty())
        throw Error(ErrorCode::NoPathExists,
                    "ensemble lacks a path " + std::to_string(x) + " -> " + std::to_string(y));
      const Path& path = it->second;
      if (path.front().first != x || path.back().second != y)
        throw Error(ErrorCode::BadArgument, "path endpoints do not match its key");
      std::set<Edge> distinct;
      for (std::size_t i = 0; i < path.size(); ++i) {
        const auto [a, b] = path[i];
        if (i > 0 && path[i - 1].second != a) throw Error(ErrorCode::BadArgument, "path is not contiguous");
        if (!(mu[a] * p(a, b) > 0.0)) throw Error(ErrorCode::BadArgument, "path uses an edge with Q(e) = 0");
        distinct.insert(path[i]);
      }
      const double weight = mu[x] * mu[y] * static_cast<double>(path.size());
      for (const auto& [a, b] : distinct) load(a, b) += weight;
    }
  }
  double b = 0.0;
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) {
      const double q = mu[x] * p(x, y);
      if (q > 0.0) b = std::max(b, load(x, y) / q);
    }
  return b;
}

PathBound path_bound(const FiniteChain& chain) {
  PathEnsemble ensemble = default_paths(chain);
  const double b = ensemble.congestion;
  return {b, b > 0.0 ? 1.0 / b : kInfinity, std::move(ensemble)};
}

PathBound path_bound(const FiniteChain& chain, PathEnsemble ensemble) {
  chain.require_irreducible("path_bound");
  ensemble.congestion = congestion(chain, ensemble);
  const double b = ensemble.congestion;
  return {b, b > 0.0 ? 1.0 / b : kInfinity, std::move(ensemble)};
}

double worst_tv(const Matrix& power, const Vector& mu) {
  double worst = 0.0;
  for (Index x = 0; x < power.rows(); ++x)
    worst = std::max(worst, 0.5 * (power.row(x).transpose() - mu).cwiseAbs().sum());
  return worst;
}

long long default_mixing_cap(Index size) { return 10 * static_cast<long long>(size) * size + 1000; }

MixingResult mixing_time(const FiniteChain& chain, double eps, long long cap) {
  chain.require_irreducible("mixing_time");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::BadArgument, "eps must lie in (0,1)");
  if (cap < 0) cap = default_mixing_cap(chain.size());
  const Vector& mu = chain.stationary().weights();
  const Index size = chain.size();
  const long long per = period(chain.transition());

  MixingResult result;
  auto record = [&](long long n, double d) { result.tv_curve.emplace_back(n, d); };
  auto finish = [&] {
    std::sort(result.tv_curve.begin(), result.tv_curve.end());
    return result;
  };

  const double d0 = worst_tv(Matrix::Identity(size, size), mu);
  record(0, d0);
  if (d0 <= eps) {
    result.tmix = 0;
    return finish();
  }
  // A period-p chain keeps mass 1/p on a single cyclic class: d(n) = 1 - 1/p.
  const bool periodic = per > 1;
  if (periodic && eps < 1.0 - 1.0 / static_cast<double>(per) - 1e-12) {
    record(1, worst_tv(chain.transition(), mu));
    result.finite = false;
    return finish();
  }

  // Doubling phase keeps P^(2^j).
  std::vector<Matrix> dyadic{chain.transition()};
  long long hi = 1;
  for (;;) {
    const double d = worst_tv(dyadic.back(), mu);
    record(hi, d);
    if (d <= eps) break;
    if (hi > cap) {
      if (periodic) {
        result.finite = false;
        return finish();
      }
      throw Error(ErrorCode::MixingCapExceeded,
                  "d(n) still above eps at n=" + std::to_string(hi) + " for an aperiodic chain");
    }
    dyadic.push_back(dyadic.back() * dyadic.back());
    hi *= 2;
  }

  // Binary search on (lo, hi]; d(lo) > eps, d(hi) <= eps.
  long long lo = hi / 2;
  if (hi == 1) lo = 0;
  auto power_of = [&](long long m) {
    Matrix out = Matrix::Identity(size, size);
    for (std::size_t j = 0; m > 0; ++j, m >>= 1)
      if (m & 1) out = out * dyadic[j];
    return out;
  };
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    const double d = worst_tv(power_of(mid), mu);
    record(mid, d);
    if (d <= eps) hi = mid;
    else lo = mid;
  }
  result.tmix = hi;
  return finish();
}

namespace {

std::string fmt_note(const std::string& label, double value) {
  std::ostringstream os;
  os.precision(6);
  os << label << "=" << value;
  return os.str();
}

}  // namespace

BoundAudit inequality_audit(const FiniteChain& chain, const AuditOptions& options) {
  chain.require_irreducible("inequality_audit");
  const double eps = options.eps;
  const GapResult gap = spectral_gap(chain);
  const double gamma = gap.gamma;
  const double tau = gap.tau;
  const double mu_min = chain.stationary().min();
  const bool lazy_half = chain.flags().laziness >= 0.5 - 1e-15;

  const double gamma_a = self_adjoint_gap(reversibilize(chain, Reversibilization::additive));
  const double gamma_m = self_adjoint_gap(reversibilize(chain, Reversibilization::multiplicative));

  BoundAudit audit;
  audit.add("additive_reversibilization_lower", gamma_a / 2.0, Relation::le, gamma, fmt_note("gamma_A", gamma_a));
  audit.add("additive_reversibilization_upper", gamma, Relation::le, std::sqrt(2.0 * gamma_a),
            fmt_note("gamma_A", gamma_a));
  audit.add("multiplicative_reversibilization_lower", gamma_m / 2.0, Relation::le, gamma,
            fmt_note("gamma_M", gamma_m));
  if (lazy_half)
    audit.add("multiplicative_reversibilization_upper_lazy", gamma, Relation::le, std::sqrt(2.0 * gamma_m),
              fmt_note("gamma_M", gamma_m));
  else
    audit.skip("multiplicative_reversibilization_upper_lazy", "requires P(x,x) >= 1/2");

  if (options.group_walk)
    audit.add("group_walk_tau_vs_symmetric_walk", tau, Relation::le, 2.0 / gamma_a,
              "twice the relaxation time of the A-union-inverse walk");

  // Mixing-time comparisons.
  std::optional<MixingResult> mix;
  std::string mix_reason;
  try {
    mix = mixing_time(chain, eps);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MixingCapExceeded) throw;
    mix_reason = e.what();
  }
  const bool mix_finite = mix && mix->finite;
  const double tmix = mix_finite ? static_cast<double>(mix->tmix) : kInfinity;

  if (!(eps > 0.0 && eps < 0.2)) {
    audit.skip("tau_vs_mixing_time", "eps outside (0, 1/5)");
  } else if (!mix_finite) {
    audit.skip("tau_vs_mixing_time", mix ? "mixing time infinite (periodic chain)" : mix_reason);
  } else {
    const double factor = 4.0 / std::log(2.0 / (1.0 + 4.0 * eps + 2.0 * eps * eps)) + 2.0;
    audit.add("tau_vs_mixing_time", tau, Relation::le, factor * tmix, fmt_note("tmix", tmix));
  }

  if (!lazy_half) {
    audit.skip("mixing_time_vs_tau_squared_lazy", "requires P(x,x) >= 1/2");
  } else if (!(eps > 0.0 && eps < 0.5)) {
    audit.skip("mixing_time_vs_tau_squared_lazy", "eps outside (0, 1/2)");
  } else if (!mix) {
    audit.skip("mixing_time_vs_tau_squared_lazy", mix_reason);
  } else {
    audit.add("mixing_time_vs_tau_squared_lazy", tmix, Relation::le,
              1.0 + 12.0 * tau * tau * std::log(1.0 / (2.0 * eps * mu_min)), fmt_note("tmix", tmix));
  }

  // Bottleneck ratio.
  std::optional<CheegerResult> cheeger;
  if (chain.size() <= kCheegerEnumerationLimit) cheeger = cheeger_exact(chain);
  if (cheeger) {
    const double xi = cheeger->xi;
    audit.add("cheeger_lower", xi * xi / 16.0, Relation::le, gamma, fmt_note("xi", xi));
    audit.add("cheeger_upper", gamma, Relation::le, 32.0 * xi, fmt_note("xi", xi));
  } else {
    audit.skip("cheeger_lower", "more states than the enumeration limit");
    audit.skip("cheeger_upper", "more states than the enumeration limit");
  }

  const PathBound paths = path_bound(chain);
  audit.add("canonical_path_lower", gamma, Relation::ge, paths.gap_lower, fmt_note("B", paths.congestion));

  const PseudoSpectralGap ps = pseudo_spectral_gap(chain, options.k_max);
  audit.add("pseudo_spectral_lower", gamma, Relation::ge, ps.value / 2.0,
            fmt_note("gamma_ps_lower", ps.value) + " k=" + std::to_string(ps.best_k));

  // Classical comparisons for reversible lazy chains.
  if (chain.flags().reversible && lazy_half && mix_finite && eps > 0.0 && eps < 0.5) {
    const double abs_gap = absolute_gap(chain);
    const double t_rel = abs_gap > 0.0 ? 1.0 / abs_gap : kInfinity;
    audit.add("classical_relaxation_lower", (t_rel - 1.0) * std::log(1.0 / (2.0 * eps)), Relation::le, tmix,
              fmt_note("t_rel", t_rel));
    audit.add("classical_relaxation_upper", tmix, Relation::le, t_rel * std::log(1.0 / (eps * mu_min)),
              fmt_note("t_rel", t_rel));
  } else {
    audit.skip("classical_relaxation_lower", "requires a reversible chain with P(x,x) >= 1/2");
    audit.skip("classical_relaxation_upper", "requires a reversible chain with P(x,x) >= 1/2");
  }
  if (chain.flags().reversible && cheeger) {
    try {
      const MixingResult quarter = mixing_time(chain, 0.25);
      if (quarter.finite)
        audit.add("mixing_quarter_vs_cheeger", static_cast<double>(quarter.tmix), Relation::ge,
                  1.0 / (4.0 * cheeger->xi));
      else
        audit.skip("mixing_quarter_vs_cheeger", "mixing time infinite (periodic chain)");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MixingCapExceeded) throw;
      audit.skip("mixing_quarter_vs_cheeger", e.what());
    }
  } else {
    audit.skip("mixing_quarter_vs_cheeger", "requires a reversible chain with exact xi");
  }
  return audit;
}

}  // namespace nrgap
