#pragma once

#include "nrgap/chain.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace nrgap {

enum class SpectrumMethod { weighted_svd, normal_eigen, closed_form };

const char* to_string(SpectrumMethod method);

/// Singular values of the generator I - P in the mu-weighted inner product.
struct SingularSpectrum {
  std::vector<double> values;  // ascending
  double gap = 0.0;            // second-smallest singular value
  double relaxation = kInfinity;
  /// Eigenvalues of P sorted by |1 - lambda|; only for normal chains.
  std::optional<std::vector<Complex>> eigenvalues;
  SpectrumMethod method = SpectrumMethod::weighted_svd;
  double mu_min = 0.0;

  bool relaxation_finite() const { return std::isfinite(relaxation); }
};

struct GapResult {
  double gamma = 0.0;
  double tau = kInfinity;
  SpectrumMethod method = SpectrumMethod::weighted_svd;
};

/// Full singular spectrum via a dense SVD of D^{1/2}(I - P)D^{-1/2}.
SingularSpectrum weighted_singular_spectrum(const FiniteChain& chain);

/// gamma and tau = 1/gamma.  Normal chains take the eigenvalue route.
GapResult spectral_gap(const FiniteChain& chain);

/// 1 - lambda_2 for a chain that is self-adjoint in L^2(mu).
double self_adjoint_gap(const FiniteChain& chain);

/// Eigenvalue route for chains with P* P = P P*.
SingularSpectrum normal_gap(const FiniteChain& chain);

struct PseudoSpectralGap {
  double value = 0.0;  // max_k gap((P*)^k P^k) / k over k <= k_max
  int best_k = 1;
};

/// Truncated pseudo-spectral gap; a lower bound on the full supremum.
PseudoSpectralGap pseudo_spectral_gap(const FiniteChain& chain, int k_max = 10);

/// Absolute spectral gap 1 - max(lambda_2, |lambda_min|) of a reversible chain.
double absolute_gap(const FiniteChain& chain);

}  // namespace nrgap
