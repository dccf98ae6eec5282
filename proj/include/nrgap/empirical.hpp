#pragma once

#include "nrgap/audit.hpp"
#include "nrgap/chain.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nrgap {

struct DeltaEntry {
  long long n = 1;
  double delta_exact = 0.0;
  std::optional<double> delta_mc;
  std::optional<double> mc_stderr;
  std::optional<Vector> maximizer;
};

/// Worst-case L^2 deviation of empirical averages, indexed by n.
struct DeltaCurve {
  std::vector<DeltaEntry> entries;
};

struct DeltaResult {
  double delta = 0.0;
  Vector maximizer;  // mean zero, unit mu-norm
};

/// Exact Delta_n under a stationary start, with a maximizing test function.
DeltaResult delta_exact(const FiniteChain& chain, long long n);

/// Delta_n for every n in `n_list` (output sorted by n, duplicates removed).
DeltaCurve delta_curve(const FiniteChain& chain, std::vector<long long> n_list,
                       bool keep_maximizers = false);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// sqrt(E[(mu_n g)^2]) from `reps` stationary trajectories of length n.
MonteCarloEstimate delta_monte_carlo(const FiniteChain& chain, const Vector& g, long long n,
                                     long long reps, std::uint64_t seed);

/// Checks the three empirical-average inequalities for n <= n_max.
BoundAudit delta_audit(const FiniteChain& chain, long long n_max);

/// Draws X_{t+1} given X_t.  Alias tables above 64 states, inverse CDF below.
class TransitionSampler {
 public:
  explicit TransitionSampler(const Matrix& transition);
  Index step(Index from, double u1, double u2) const;
  bool uses_alias() const { return use_alias_; }

 private:
  struct Row {
    std::vector<Index> support;
    std::vector<double> cdf;         // inverse-CDF mode
    std::vector<double> keep;        // alias mode
    std::vector<std::size_t> alias;  // alias mode
  };
  bool use_alias_ = false;
  std::vector<Row> rows_;
};

}  // namespace nrgap
