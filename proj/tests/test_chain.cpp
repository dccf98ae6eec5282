#include "doctest.h"

#include "oracles.hpp"

#include "nrgap/chain.hpp"
#include "nrgap/experiments.hpp"
#include "nrgap/families.hpp"
#include "nrgap/rng.hpp"
#include "nrgap/spectral.hpp"

#include <numeric>

using namespace nrgap;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix shift(Index n) {
  Matrix m = Matrix::Zero(n, n);
  for (Index x = 0; x < n; ++x) m(x, (x + 1) % n) = 1.0;
  return m;
}

Vector random_vector(Philox& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
  return v;
}

}  // namespace

TEST_CASE("flip chain is uniform, reversible and normal") {
  auto c = build_chain(mat2(0, 1, 1, 0));
  CHECK(c.stationary()[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.stationary()[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.flags().irreducible);
  CHECK(c.flags().reversible);
  CHECK(c.flags().normal);
  CHECK(c.flags().laziness == 0.0);
}

TEST_CASE("two-state stationary law matches the linear-solve oracle") {
  Matrix p = mat2(0.9, 0.1, 0.2, 0.8);
  auto c = build_chain(p);
  Vector mu = oracle::stationary(p);
  CHECK(std::abs(c.stationary()[0] - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(c.stationary()[1] - 1.0 / 3.0) < 1e-12);
  CHECK((c.stationary().weights() - mu).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity has several invariant measures") {
  auto c = build_chain(Matrix::Identity(2, 2));
  CHECK_FALSE(c.flags().irreducible);
  CHECK(c.multiple_invariant_measures());
  try {
    spectral_gap(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MultipleInvariantMeasures);
  }
}

TEST_CASE("reducible chain with one closed class is not irreducible") {
  Matrix p(3, 3);
  p << 0.5, 0.5, 0, 0, 0.5, 0.5, 0, 0.5, 0.5;
  auto c = build_chain(p);
  CHECK_FALSE(c.flags().irreducible);
  CHECK_FALSE(c.multiple_invariant_measures());
  CHECK(c.stationary()[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(spectral_gap(c), Error);
}

TEST_CASE("construction rejects malformed matrices") {
  auto code_of = [](const Matrix& m) {
    try {
      build_chain(m);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code_of(Matrix::Constant(2, 3, 1.0 / 3)) == ErrorCode::NotSquare);
  CHECK(code_of(mat2(0.5, 0.6, 0.5, 0.5)) == ErrorCode::NotStochastic);
  CHECK(code_of(mat2(1.5, -0.5, 0.5, 0.5)) == ErrorCode::NotStochastic);
  CHECK(code_of(mat2(0.5, 0.5 + 1e-9, 0.5, 0.5)) == ErrorCode::NotStochastic);
}

TEST_CASE("adjoint of the right shift is the left shift") {
  auto c = build_chain(shift(4));
  auto a = adjoint(c);
  CHECK((a.transition() - shift(4).transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("adjoint of a reversible chain is itself") {
  Matrix p = mat2(0.9, 0.1, 0.2, 0.8);
  auto c = build_chain(p);
  CHECK((adjoint(c).transition() - p).cwiseAbs().maxCoeff() < 1e-12);
  Matrix manual = oracle::mu_adjoint(p, c.stationary().weights());
  CHECK((manual - p).cwiseAbs().maxCoeff() < 1e-12);
  for (const auto& b : reference_battery()) {
    if (!b.chain.flags().reversible) continue;
    CHECK((adjoint(b.chain).transition() - b.chain.transition()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("reversibilizations of the shift") {
  auto c = build_chain(shift(4));
  auto a = reversibilize(c, Reversibilization::additive);
  Matrix expected = 0.5 * (shift(4) + shift(4).transpose());
  CHECK((a.transition() - expected).cwiseAbs().maxCoeff() < 1e-15);
  auto m = reversibilize(c, Reversibilization::multiplicative);
  CHECK((m.transition() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("additive reversibilization of the lazy right walk") {
  for (long long n : {3, 5, 8}) {
    auto c = circulant_chain(n, {{0, 0.5}, {1, 0.5}});
    auto a = reversibilize(c, Reversibilization::additive).transition();
    for (Index x = 0; x < n; ++x) {
      CHECK(a(x, x) == doctest::Approx(0.5));
      CHECK(a(x, (x + 1) % n) == doctest::Approx(0.25));
      CHECK(a(x, (x + n - 1) % n) == doctest::Approx(0.25));
    }
  }
}

TEST_CASE("reversibilizations always pass the reversibility check") {
  for (const auto& b : reference_battery()) {
    for (auto kind : {Reversibilization::additive, Reversibilization::multiplicative}) {
      auto r = reversibilize(b.chain, kind);
      CHECK_MESSAGE(structure_flags(r).reversible, b.name);
      const Vector& mu = r.stationary().weights();
      Matrix q = mu.asDiagonal() * r.transition();
      CHECK((q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("lazy wrapper") {
  auto flip = build_chain(mat2(0, 1, 1, 0));
  auto l = lazy(flip, 0.5);
  CHECK((l.transition() - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lazy(flip, 0.0).transition() - flip.transition()).cwiseAbs().maxCoeff() == 0.0);
  auto z3 = build_chain(shift(3));
  CHECK(spectral_gap(lazy(z3, 0.5)).gamma == doctest::Approx(0.5 * spectral_gap(z3).gamma).epsilon(1e-12));
  for (const auto& b : reference_battery()) CHECK(structure_flags(lazy(b.chain, 0.5)).laziness >= 0.5);
  CHECK_THROWS_AS(lazy(flip, 1.0), Error);
  CHECK_THROWS_AS(lazy(flip, -0.1), Error);
}

TEST_CASE("laziness scales the gap linearly") {
  auto battery = reference_battery();
  for (const auto& b : battery) {
    const double g = spectral_gap(b.chain).gamma;
    for (double theta : {0.25, 0.5, 0.9}) {
      const double gl = spectral_gap(lazy(b.chain, theta)).gamma;
      CHECK_MESSAGE(std::abs(gl - (1 - theta) * g) <= 1e-9 * (1 - theta) * g, b.name, " theta=", theta);
    }
  }
}

TEST_CASE("matrix powers") {
  auto flip = build_chain(mat2(0, 1, 1, 0));
  CHECK((matrix_power(flip, 0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((matrix_power(flip, 2) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((matrix_power(flip, 7) - flip.transition()).cwiseAbs().maxCoeff() == 0.0);
  Matrix u = Matrix::Constant(4, 4, 0.25);
  auto uc = build_chain(u);
  for (long long n : {1, 2, 5, 17}) CHECK((matrix_power(uc, n) - u).cwiseAbs().maxCoeff() < 1e-15);
  auto r = random_irreducible_chain(6, 1, 0);
  Matrix naive = Matrix::Identity(6, 6);
  for (int i = 0; i < 13; ++i) naive = naive * r.transition();
  CHECK((matrix_power(r, 13) - naive).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("structure flags of example chains") {
  auto z5 = build_chain(shift(5));
  CHECK(z5.flags().normal);
  CHECK_FALSE(z5.flags().reversible);
  auto f = structure_flags(cdg_chain(5));
  CHECK_FALSE(f.normal);
  CHECK_FALSE(f.reversible);
  CHECK(f.irreducible);
}

TEST_CASE("flags set analytically agree with numeric detection") {
  for (const auto& b : reference_battery()) {
    auto f = structure_flags(b.chain);
    CHECK_MESSAGE(f.reversible == b.chain.flags().reversible, b.name);
    CHECK_MESSAGE(f.normal == b.chain.flags().normal, b.name);
    CHECK_MESSAGE(f.irreducible == b.chain.flags().irreducible, b.name);
  }
}

TEST_CASE("every battery chain is stochastic with an invariant law") {
  for (const auto& b : reference_battery()) {
    const Matrix& p = b.chain.transition();
    const Vector& mu = b.chain.stationary().weights();
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 1.0);
    CHECK(std::abs(mu.sum() - 1.0) <= 1e-12);
    CHECK((mu.transpose() * p - mu.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(mu.minCoeff() > 0.0);
    CHECK((mu - oracle::stationary(p)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("adjoint identity on random test functions") {
  Philox rng(99, 0);
  for (const auto& b : reference_battery()) {
    const Matrix& p = b.chain.transition();
    const Matrix ps = adjoint(b.chain).transition();
    const auto& mu = b.chain.stationary();
    for (int t = 0; t < 100; ++t) {
      Vector f = random_vector(rng, p.rows());
      Vector g = random_vector(rng, p.rows());
      const double lhs = mu.inner(p * f, g);
      const double rhs = mu.inner(f, ps * g);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * mu.norm(f) * mu.norm(g));
    }
  }
}

TEST_CASE("relabeling states permutes mu and keeps the spectrum") {
  Philox rng(7, 3);
  for (const auto& b : reference_battery()) {
    const Index n = b.chain.size();
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (Index i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
    auto q = permute(b.chain, perm);
    for (Index i = 0; i < n; ++i) CHECK(std::abs(q.stationary()[i] - b.chain.stationary()[perm[i]]) <= 1e-10);
    auto s0 = weighted_singular_spectrum(b.chain).values;
    auto s1 = weighted_singular_spectrum(q).values;
    for (std::size_t i = 0; i < s0.size(); ++i) CHECK(std::abs(s0[i] - s1[i]) <= 1e-10);
    auto g0 = spectral_gap(b.chain), g1 = spectral_gap(q);
    CHECK(std::abs(g0.gamma - g1.gamma) <= 1e-10);
    CHECK(std::abs(g0.tau - g1.tau) <= 1e-10 * std::max(1.0, g0.tau));
  }
}

TEST_CASE("period of the transition digraph") {
  CHECK(period(shift(5)) == 5);
  CHECK(period(mat2(0, 1, 1, 0)) == 2);
  CHECK(period(mat2(0.5, 0.5, 0.5, 0.5)) == 1);
  CHECK(period(Matrix::Identity(2, 2)) == 0);
  CHECK(strongly_connected(shift(3)));
  CHECK_FALSE(strongly_connected(Matrix::Identity(3, 3)));
}
