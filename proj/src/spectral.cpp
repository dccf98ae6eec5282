#include "nrgap/spectral.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace nrgap {

const char* to_string(SpectrumMethod method) {
  switch (method) {
    case SpectrumMethod::weighted_svd: return "weighted_svd";
    case SpectrumMethod::normal_eigen: return "normal_eigen";
    case SpectrumMethod::closed_form: return "closed_form";
  }
  return "unknown";
}

namespace {

void finish(SingularSpectrum& s) {
  std::sort(s.values.begin(), s.values.end());
  if (s.values.size() < 2) {
    s.gap = 0.0;
    s.relaxation = kInfinity;
    return;
  }
  s.gap = s.values[1];
  s.relaxation = s.gap <= zero_threshold(s.values.back()) ? kInfinity : 1.0 / s.gap;
}

void require_positive_measure(const FiniteChain& chain, const char* op) {
  if ((chain.stationary().weights().array() <= 0.0).any())
    throw Error(ErrorCode::NotIrreducible, std::string(op) + " needs mu(x) > 0 for all x");
}

Eigen::VectorXd symmetric_eigenvalues(const FiniteChain& chain) {
  const Vector& mu = chain.stationary().weights();
  Matrix s = conjugate_by_measure(chain.transition(), mu);
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();  // ascending
}

}  // namespace

SingularSpectrum weighted_singular_spectrum(const FiniteChain& chain) {
  chain.require_irreducible("weighted_singular_spectrum");
  const Vector& mu = chain.stationary().weights();
  const Matrix b = conjugate_by_measure(chain.generator(), mu);
  Eigen::BDCSVD<Matrix> svd(b);
  SingularSpectrum s;
  const Vector& sv = svd.singularValues();
  s.values.assign(sv.data(), sv.data() + sv.size());
  s.method = SpectrumMethod::weighted_svd;
  s.mu_min = mu.minCoeff();
  finish(s);
  return s;
}

SingularSpectrum normal_gap(const FiniteChain& chain) {
  chain.require_irreducible("normal_gap");
  if (!chain.flags().normal) throw Error(ErrorCode::NotNormal, "normal_gap requires P*P = PP*");
  const Vector& mu = chain.stationary().weights();
  const Matrix s = conjugate_by_measure(chain.transition(), mu);

  std::vector<Complex> lambdas;
  if (chain.flags().reversible) {
    Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    for (Index i = 0; i < solver.eigenvalues().size(); ++i) lambdas.emplace_back(solver.eigenvalues()[i], 0.0);
  } else {
    Eigen::EigenSolver<Matrix> solver(s, false);
    const auto& ev = solver.eigenvalues();
    lambdas.assign(ev.data(), ev.data() + ev.size());
  }
  std::stable_sort(lambdas.begin(), lambdas.end(), [](Complex a, Complex b) {
    return std::abs(1.0 - a) < std::abs(1.0 - b);
  });

  SingularSpectrum out;
  for (const Complex& l : lambdas) out.values.push_back(std::abs(1.0 - l));
  out.eigenvalues = std::move(lambdas);
  out.method = SpectrumMethod::normal_eigen;
  out.mu_min = mu.minCoeff();
  finish(out);
  return out;
}

GapResult spectral_gap(const FiniteChain& chain) {
  chain.require_irreducible("spectral_gap");
  const SingularSpectrum s = chain.flags().normal ? normal_gap(chain) : weighted_singular_spectrum(chain);
#ifndef NDEBUG
  if (chain.flags().normal && chain.size() <= 400) {
    const SingularSpectrum check = weighted_singular_spectrum(chain);
    assert(std::abs(check.gap - s.gap) <= 1e-8 * std::max(1.0, check.gap));
  }
#endif
  return {s.gap, s.relaxation, s.method};
}

double self_adjoint_gap(const FiniteChain& chain) {
  if (!chain.flags().reversible)
    throw Error(ErrorCode::NotReversible, "self_adjoint_gap requires a reversible chain");
  require_positive_measure(chain, "self_adjoint_gap");
  const Eigen::VectorXd ev = symmetric_eigenvalues(chain);
  if (ev.size() < 2) return 0.0;
  return 1.0 - ev[ev.size() - 2];
}

double absolute_gap(const FiniteChain& chain) {
  if (!chain.flags().reversible)
    throw Error(ErrorCode::NotReversible, "absolute_gap requires a reversible chain");
  require_positive_measure(chain, "absolute_gap");
  const Eigen::VectorXd ev = symmetric_eigenvalues(chain);
  if (ev.size() < 2) return 0.0;
  return 1.0 - std::max(ev[ev.size() - 2], std::abs(ev[0]));
}

PseudoSpectralGap pseudo_spectral_gap(const FiniteChain& chain, int k_max) {
  chain.require_irreducible("pseudo_spectral_gap");
  if (k_max < 1) throw Error(ErrorCode::BadArgument, "k_max must be >= 1");
  const Vector& mu = chain.stationary().weights();
  PseudoSpectralGap best;
  best.value = -kInfinity;
  Matrix pk = Matrix::Identity(chain.size(), chain.size());
  for (int k = 1; k <= k_max; ++k) {
    pk = pk * chain.transition();
    Matrix product = adjoint_matrix(pk, mu) * pk;
    // Enforce detailed balance against rounding in the product.
    Matrix flow = mu.asDiagonal() * product;
    flow = 0.5 * (flow + flow.transpose()).eval();
    product = mu.cwiseInverse().asDiagonal() * flow;
    for (Index x = 0; x < product.rows(); ++x) product.row(x) /= product.row(x).sum();
    product = product.cwiseMax(0.0).cwiseMin(1.0);
    ChainHints hints;
    hints.stationary = mu;
    hints.reversible = true;
    hints.normal = true;
    const double value = self_adjoint_gap(FiniteChain::build(std::move(product), {}, hints)) / k;
    if (value > best.value) {
      best.value = value;
      best.best_k = k;
    }
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

}  // namespace nrgap
