#pragma once

#include "nrgap/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nrgap {

/// A probability vector over the states of a chain.
class Distribution {
 public:
  explicit Distribution(Vector weights);

  const Vector& weights() const { return weights_; }
  Index size() const { return weights_.size(); }
  double operator[](Index i) const { return weights_[i]; }
  double min() const { return weights_.minCoeff(); }

  /// <f, g>_mu for real f, g.
  double inner(const Vector& f, const Vector& g) const;
  double norm(const Vector& f) const;
  /// mu f = sum_x f(x) mu(x).
  double mean(const Vector& f) const;

 private:
  Vector weights_;
};

struct StructureFlags {
  bool irreducible = false;
  bool reversible = false;
  bool normal = false;
  /// min_x P(x, x)
  double laziness = 0.0;
};

/// Facts a constructor may already know; anything left empty is computed.
struct ChainHints {
  std::optional<Vector> stationary;
  std::optional<bool> irreducible;
  std::optional<bool> reversible;
  std::optional<bool> normal;
};

/// Validated row-stochastic matrix with its stationary distribution.
///
/// Instances are immutable; every transform returns a new chain.
class FiniteChain {
 public:
  /// Validates `transition`, solves for the stationary distribution and
  /// sets the structure flags.  Throws Error{NotSquare, NotStochastic}.
  static FiniteChain build(Matrix transition, std::vector<std::string> labels = {},
                           const ChainHints& hints = {});

  Index size() const { return transition_.rows(); }
  const Matrix& transition() const { return transition_; }
  const Distribution& stationary() const { return stationary_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const StructureFlags& flags() const { return flags_; }

  /// True when the invariant measure is not unique (several closed classes).
  bool multiple_invariant_measures() const { return multiple_invariant_measures_; }

  /// Throws NotIrreducible / MultipleInvariantMeasures unless mu > 0 everywhere.
  void require_irreducible(const char* op) const;

  /// I - P
  Matrix generator() const;

 private:
  FiniteChain(Matrix transition, Distribution stationary, std::vector<std::string> labels,
              StructureFlags flags, bool multiple)
      : transition_(std::move(transition)),
        stationary_(std::move(stationary)),
        labels_(std::move(labels)),
        flags_(flags),
        multiple_invariant_measures_(multiple) {}

  Matrix transition_;
  Distribution stationary_;
  std::vector<std::string> labels_;
  StructureFlags flags_;
  bool multiple_invariant_measures_ = false;
};

enum class Reversibilization { additive, multiplicative };

FiniteChain build_chain(const Matrix& matrix, std::vector<std::string> labels = {});

/// Time reversal P*(x,y) = mu(y) P(y,x) / mu(x).
FiniteChain adjoint(const FiniteChain& chain);

/// mu-adjoint of an arbitrary operator with respect to the chain's measure.
Matrix adjoint_matrix(const Matrix& op, const Vector& mu);

/// A = (P + P*)/2 or M = P P*.
FiniteChain reversibilize(const FiniteChain& chain, Reversibilization kind);

/// theta I + (1 - theta) P, theta in [0, 1).
FiniteChain lazy(const FiniteChain& chain, double hold);

/// P^n by repeated squaring.
Matrix matrix_power(const FiniteChain& chain, long long n);
Matrix matrix_power(const Matrix& m, long long n);

/// Recomputes the structure flags from the matrix.
StructureFlags structure_flags(const FiniteChain& chain);

/// Relabels states: new state i is old state perm[i].
FiniteChain permute(const FiniteChain& chain, const std::vector<Index>& perm);

/// D^{1/2} op D^{-1/2}, the Euclidean picture of an operator on L^2(mu).
Matrix conjugate_by_measure(const Matrix& op, const Vector& mu);

/// Period of the positive-entry digraph (gcd of cycle lengths); 0 if not
/// strongly connected.
long long period(const Matrix& transition);

bool strongly_connected(const Matrix& transition);

}  // namespace nrgap
