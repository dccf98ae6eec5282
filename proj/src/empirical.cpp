#include "nrgap/empirical.hpp"

#include "nrgap/rng.hpp"
#include "nrgap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nrgap {

namespace {

constexpr Index kAliasThreshold = 64;

// Orthonormal basis of the complement of sqrt(mu) in Euclidean coordinates.
Matrix mean_zero_basis(const Vector& mu) {
  const Index n = mu.size();
  const Vector root = mu.cwiseSqrt();
  Eigen::HouseholderQR<Matrix> qr{Matrix(root)};
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - 1);
}

struct TopEigen {
  double value;
  Vector vector;
};

TopEigen top_restricted(const Matrix& gram, const Matrix& basis) {
  Matrix small = basis.transpose() * gram * basis;
  small = 0.5 * (small + small.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(small);
  const Index last = small.rows() - 1;
  return {solver.eigenvalues()[last], basis * solver.eigenvectors().col(last)};
}

DeltaEntry make_entry(long long n, const TopEigen& top, const Vector& mu, bool keep) {
  DeltaEntry e;
  e.n = n;
  e.delta_exact = std::clamp(std::sqrt(std::max(top.value, 0.0)), 0.0, 1.0);
  if (keep) {
    Vector g = top.vector.cwiseQuotient(mu.cwiseSqrt());
    g.array() -= g.dot(mu);
    g /= std::sqrt((g.array().square() * mu.array()).sum());
    e.maximizer = std::move(g);
  }
  return e;
}

}  // namespace

DeltaCurve delta_curve(const FiniteChain& chain, std::vector<long long> n_list, bool keep_maximizers) {
  chain.require_irreducible("delta_curve");
  if (chain.size() < 2) throw Error(ErrorCode::BadArgument, "delta_curve needs at least two states");
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  DeltaCurve curve;
  if (n_list.empty()) return curve;
  if (n_list.front() < 1) throw Error(ErrorCode::BadArgument, "n must be >= 1");

  const Vector& mu = chain.stationary().weights();
  const Index size = chain.size();
  const Matrix basis = mean_zero_basis(mu);
  const Matrix s = conjugate_by_measure(chain.transition(), mu);
  const Matrix identity = Matrix::Identity(size, size);

  // n^2 M_n = n I + 2 (n A1 - A2),  A1 = sum_{k<n} H_k,  A2 = sum_{k<n} k H_k,
  // H_k the symmetric part of S^k.
  Matrix power = identity;
  Matrix a1 = Matrix::Zero(size, size);
  Matrix a2 = Matrix::Zero(size, size);
  auto next = n_list.begin();
  for (long long n = 1; next != n_list.end(); ++n) {
    if (n == *next) {
      const double nd = static_cast<double>(n);
      const Matrix gram = (nd * identity + 2.0 * (nd * a1 - a2)) / (nd * nd);
      curve.entries.push_back(make_entry(n, top_restricted(gram, basis), mu, keep_maximizers));
      ++next;
    }
    power = power * s;
    const Matrix h = 0.5 * (power + power.transpose());
    a1 += h;
    a2 += static_cast<double>(n) * h;
  }
  return curve;
}

DeltaResult delta_exact(const FiniteChain& chain, long long n) {
  DeltaCurve curve = delta_curve(chain, {n}, true);
  return {curve.entries.front().delta_exact, std::move(*curve.entries.front().maximizer)};
}

TransitionSampler::TransitionSampler(const Matrix& transition)
    : use_alias_(transition.cols() > kAliasThreshold), rows_(transition.rows()) {
  for (Index x = 0; x < transition.rows(); ++x) {
    Row& row = rows_[x];
    std::vector<double> weights;
    for (Index y = 0; y < transition.cols(); ++y) {
      if (transition(x, y) > 0.0) {
        row.support.push_back(y);
        weights.push_back(transition(x, y));
      }
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (!use_alias_) {
      double acc = 0.0;
      for (double w : weights) row.cdf.push_back(acc += w / total);
      row.cdf.back() = 1.0;
      continue;
    }
    // Vose's alias method.
    const std::size_t k = weights.size();
    row.keep.assign(k, 1.0);
    row.alias.resize(k);
    std::vector<double> scaled(k);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < k; ++i) {
      scaled[i] = weights[i] / total * static_cast<double>(k);
      row.alias[i] = i;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back(), l = large.back();
      small.pop_back();
      row.keep[s] = scaled[s];
      row.alias[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
  }
}

Index TransitionSampler::step(Index from, double u1, double u2) const {
  const Row& row = rows_[from];
  if (!use_alias_) {
    const auto it = std::upper_bound(row.cdf.begin(), row.cdf.end(), u1);
    const auto i = std::min<std::size_t>(it - row.cdf.begin(), row.cdf.size() - 1);
    return row.support[i];
  }
  const std::size_t k = row.support.size();
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(u1 * static_cast<double>(k)), k - 1);
  return row.support[u2 < row.keep[i] ? i : row.alias[i]];
}

MonteCarloEstimate delta_monte_carlo(const FiniteChain& chain, const Vector& g, long long n,
                                     long long reps, std::uint64_t seed) {
  chain.require_irreducible("delta_monte_carlo");
  if (n < 1 || reps < 2) throw Error(ErrorCode::BadArgument, "need n >= 1 and reps >= 2");
  const Distribution& mu = chain.stationary();
  if (g.size() != chain.size()) throw Error(ErrorCode::BadTestFunction, "wrong length");
  if (std::abs(mu.mean(g)) > 1e-10) throw Error(ErrorCode::BadTestFunction, "mu g != 0");
  if (std::abs(mu.norm(g) - 1.0) > 1e-10) throw Error(ErrorCode::BadTestFunction, "||g||_mu != 1");

  const TransitionSampler steps(chain.transition());
  const TransitionSampler start(Matrix(mu.weights().transpose()));

  std::vector<double> squares(static_cast<std::size_t>(reps));
  for (long long r = 0; r < reps; ++r) {
    Philox rng(seed, static_cast<std::uint64_t>(r));
    Index x = start.step(0, rng.uniform(), rng.uniform());
    double sum = g[x];
    for (long long i = 1; i < n; ++i) {
      x = steps.step(x, rng.uniform(), rng.uniform());
      sum += g[x];
    }
    const double avg = sum / static_cast<double>(n);
    squares[static_cast<std::size_t>(r)] = avg * avg;
  }

  double mean = 0.0;
  for (double y : squares) mean += y;
  mean /= static_cast<double>(reps);
  double var = 0.0;
  for (double y : squares) var += (y - mean) * (y - mean);
  var /= static_cast<double>(reps - 1);

  MonteCarloEstimate out;
  out.estimate = std::sqrt(mean);
  const double se_mean = std::sqrt(var / static_cast<double>(reps));
  out.stderr_ = mean > 0.0 ? se_mean / (2.0 * out.estimate) : 0.0;
  return out;
}

BoundAudit delta_audit(const FiniteChain& chain, long long n_max) {
  if (n_max < 1) throw Error(ErrorCode::BadArgument, "n_max must be >= 1");
  const GapResult gap = spectral_gap(chain);
  if (!std::isfinite(gap.tau)) throw Error(ErrorCode::BadArgument, "relaxation time is infinite");
  const double tau = gap.tau;

  std::vector<long long> ns;
  for (long long n = 1; n <= n_max; ++n) ns.push_back(n);
  const DeltaCurve curve = delta_curve(chain, ns);
  auto delta = [&](long long n) { return curve.entries[static_cast<std::size_t>(n - 1)].delta_exact; };

  auto at = [](long long n) {
    std::ostringstream os;
    os << "worst at n=" << n;
    return os.str();
  };

  BoundAudit audit;
  {
    long long worst = 1;
    double worst_margin = kInfinity;
    for (long long n = 1; n <= n_max; ++n) {
      const double m = std::sqrt(4.0 * tau / static_cast<double>(n)) - delta(n);
      if (m < worst_margin) worst_margin = m, worst = n;
    }
    audit.add("delta_upper_sqrt_4tau_over_n", delta(worst), Relation::le,
              std::sqrt(4.0 * tau / static_cast<double>(worst)), at(worst));
  }
  {
    const long long limit = std::min<long long>(n_max, static_cast<long long>(std::floor(tau / 3.0)));
    if (limit < 1) {
      audit.skip("delta_floor_before_tau_over_3", "vacuous: tau < 3");
    } else {
      long long worst = 1;
      for (long long n = 1; n <= limit; ++n)
        if (delta(n) < delta(worst)) worst = n;
      audit.add("delta_floor_before_tau_over_3", delta(worst), Relation::ge, 1.0 / 132.0, at(worst));
    }
  }
  {
    if (n_max < 2) {
      audit.skip("delta_window_lower", "needs n_max >= 2");
    } else {
      long long worst = 1;
      double worst_margin = kInfinity, worst_lhs = 0.0, worst_rhs = 0.0;
      for (long long n = 1; 2 * n <= n_max; ++n) {
        double window = 0.0;
        for (long long k = n; k <= 2 * n; ++k) window = std::max(window, delta(k));
        const double rhs = tau / (2.0 * static_cast<double>(n) + 3.0 * tau);
        if (window - rhs < worst_margin) {
          worst_margin = window - rhs;
          worst = n;
          worst_lhs = window;
          worst_rhs = rhs;
        }
      }
      audit.add("delta_window_lower", worst_lhs, Relation::ge, worst_rhs, at(worst));
    }
  }
  return audit;
}

}  // namespace nrgap
