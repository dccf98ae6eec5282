#pragma once

#include "nrgap/audit.hpp"
#include "nrgap/chain.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace nrgap {

/// Bottleneck ratio min Q(A, A^c) / mu(A) over 0 < mu(A) <= 1/2.
struct CheegerResult {
  double xi = 0.0;
  std::vector<Index> argmin_set;  // sorted state indices
  bool exact = false;
};

inline constexpr Index kCheegerEnumerationLimit = 20;

/// Q(A, A^c) / mu(A) for an explicit set.
double conductance(const FiniteChain& chain, const std::vector<Index>& set);

/// Exhaustive minimum over all subsets.  Ties go to the set with fewer
/// states, then to the lexicographically smaller sorted index list.
CheegerResult cheeger_exact(const FiniteChain& chain, Index limit = kCheegerEnumerationLimit);

/// Randomized local search; the returned value is an upper bound on xi.
CheegerResult cheeger_search(const FiniteChain& chain, int iters, std::uint64_t seed);

using Edge = std::pair<Index, Index>;
using Path = std::vector<Edge>;

/// Canonical paths Gamma_{x,y} for all ordered pairs x != y.
struct PathEnsemble {
  std::map<std::pair<Index, Index>, Path> paths;
  double congestion = 0.0;
};

struct PathBound {
  double congestion = 0.0;
  double gap_lower = 0.0;
  PathEnsemble ensemble;
};

/// Breadth-first shortest paths in E = {Q > 0}, neighbors visited in index order.
PathEnsemble default_paths(const FiniteChain& chain);

/// max_e (1/Q(e)) sum_{Gamma_{x,y} containing e} mu(x) mu(y) |Gamma_{x,y}|.
/// Validates the ensemble; throws NoPathExists on a missing or broken path.
double congestion(const FiniteChain& chain, const PathEnsemble& ensemble);

PathBound path_bound(const FiniteChain& chain);
PathBound path_bound(const FiniteChain& chain, PathEnsemble ensemble);

/// Random loop-erased paths through a random intermediate state.
PathEnsemble random_paths(const FiniteChain& chain, std::uint64_t seed);

struct MixingResult {
  long long tmix = 0;  // valid only when finite
  bool finite = true;
  std::vector<std::pair<long long, double>> tv_curve;  // (n, d(n)) ascending in n
};

/// d(n) = max_x ||P^n_x - mu||_TV
double worst_tv(const Matrix& power, const Vector& mu);

long long default_mixing_cap(Index size);

/// First n with d(n) <= eps.  Periodic chains that never get there report
/// infinity; aperiodic chains that exceed the cap throw MixingCapExceeded.
MixingResult mixing_time(const FiniteChain& chain, double eps, long long cap = -1);

struct AuditOptions {
  double eps = 1.0 / 6.0;
  int k_max = 10;
  /// Chain is a random walk on a group; adds the A-union-inverse comparison.
  bool group_walk = false;
};

/// Evaluates every comparison inequality that applies to the chain.
BoundAudit inequality_audit(const FiniteChain& chain, const AuditOptions& options = {});

}  // namespace nrgap
