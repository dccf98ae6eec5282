#include "doctest.h"

#include "oracles.hpp"

#include "nrgap/empirical.hpp"
#include "nrgap/experiments.hpp"
#include "nrgap/families.hpp"
#include "nrgap/spectral.hpp"

#include <cmath>

using namespace nrgap;

namespace {

FiniteChain flip() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return build_chain(m);
}

FiniteChain uniform(Index n) { return build_chain(Matrix::Constant(n, n, 1.0 / double(n))); }

const BoundCheck& find(const BoundAudit& a, const std::string& name) {
  for (const auto& c : a.checks)
    if (c.name == name) return c;
  FAIL("missing check " << name);
  return a.checks.front();
}

}  // namespace

TEST_CASE("delta_1 is one") {
  for (const auto& b : reference_battery()) {
    auto r = delta_exact(b.chain, 1);
    CHECK_MESSAGE(std::abs(r.delta - 1.0) <= 1e-10, b.name);
  }
}

TEST_CASE("flip chain curve") {
  auto c = delta_curve(flip(), {4, 1, 3, 2, 2});
  REQUIRE(c.entries.size() == 4);
  const double expected[] = {1.0, 0.0, 1.0 / 3.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(c.entries[i].n == i + 1);
    CHECK(std::abs(c.entries[i].delta_exact - expected[i]) < 1e-12);
    CHECK(std::abs(c.entries[i].delta_exact -
                   oracle::delta_bruteforce(flip().transition(), flip().stationary().weights(), i + 1)) < 1e-12);
  }
}

TEST_CASE("uniform chain curve is the iid rate") {
  auto c = delta_curve(uniform(3), {1, 2, 4});
  REQUIRE(c.entries.size() == 3);
  CHECK(c.entries[0].delta_exact == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.entries[1].delta_exact == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(c.entries[2].delta_exact == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(delta_exact(uniform(5), 4).delta == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(delta_curve(uniform(3), {1}).entries.size() == 1);
  CHECK(delta_curve(uniform(3), {}).entries.empty());
}

TEST_CASE("exact delta matches trajectory enumeration") {
  std::vector<FiniteChain> chains{flip(), uniform(3), lazy(circulant_chain(4, {{1, 0.7}, {-1, 0.3}}), 0.5),
                                  cdg_chain(5), random_irreducible_chain(4, 11, 0), random_irreducible_chain(3, 11, 1)};
  for (const auto& c : chains) {
    const int n_max = c.size() <= 3 ? 8 : (c.size() == 4 ? 6 : 5);
    std::vector<long long> ns;
    for (int n = 1; n <= n_max; ++n) ns.push_back(n);
    auto curve = delta_curve(c, ns);
    for (const auto& e : curve.entries) {
      const double ref = oracle::delta_bruteforce(c.transition(), c.stationary().weights(), static_cast<int>(e.n));
      CHECK(std::abs(e.delta_exact - ref) <= 1e-10);
    }
  }
}

TEST_CASE("maximizer is mean zero, unit norm and attains delta") {
  auto c = lazy(circulant_chain(8, {{1, 0.7}, {-1, 0.3}}), 0.5);
  auto curve = delta_curve(c, {3, 6}, true);
  const auto& mu = c.stationary();
  for (const auto& e : curve.entries) {
    REQUIRE(e.maximizer);
    const Vector& g = *e.maximizer;
    CHECK(std::abs(mu.mean(g)) < 1e-12);
    CHECK(mu.norm(g) == doctest::Approx(1.0).epsilon(1e-12));
    // E[(mu_n g)^2] = (1/n^2) sum_{s,t} <g, P^{|s-t|} g>_mu
    double second = 0.0;
    for (long long s = 0; s < e.n; ++s)
      for (long long t = 0; t < e.n; ++t) second += mu.inner(g, matrix_power(c, std::abs(s - t)) * g);
    second /= double(e.n) * e.n;
    CHECK(std::sqrt(second) == doctest::Approx(e.delta_exact).epsilon(1e-10));
  }
}

TEST_CASE("curve invariants on the battery") {
  for (const auto& b : reference_battery()) {
    std::vector<long long> ns;
    for (long long n = 1; n <= 24; ++n) ns.push_back(n);
    auto curve = delta_curve(b.chain, ns);
    for (const auto& e : curve.entries) {
      CHECK(e.delta_exact >= 0.0);
      CHECK(e.delta_exact <= 1.0);
    }
    for (const auto& e : curve.entries)
      for (long long a = 1; a < e.n; ++a) {
        const long long bb = e.n - a;
        const double lhs = double(e.n) * e.delta_exact;
        const double rhs = double(a) * curve.entries[a - 1].delta_exact + double(bb) * curve.entries[bb - 1].delta_exact;
        CHECK_MESSAGE(lhs <= rhs + 1e-9, b.name, " n=", e.n, " a=", a);
      }
  }
}

TEST_CASE("monte carlo on small chains") {
  auto u = delta_exact(uniform(4), 4);
  auto est = delta_monte_carlo(uniform(4), u.maximizer, 4, 10000, 42);
  CHECK(std::abs(est.estimate - 0.5) <= 4 * est.stderr_);
  CHECK(est.stderr_ > 0.0);

  auto f = delta_exact(flip(), 2);
  auto ef = delta_monte_carlo(flip(), f.maximizer, 2, 1000, 5);
  CHECK(ef.estimate <= 1e-12);

  for (const auto& b : reference_battery()) {
    if (b.name != "card3" && b.name != "cdg5" && b.name != "random8_0") continue;
    auto one = delta_exact(b.chain, 1);
    auto e1 = delta_monte_carlo(b.chain, one.maximizer, 1, 5000, 17);
    CHECK_MESSAGE(std::abs(e1.estimate - 1.0) <= 4 * e1.stderr_, b.name);
  }
}

TEST_CASE("monte carlo is reproducible and uses alias tables on large chains") {
  auto c = cdg_chain(101);
  auto d = delta_exact(c, 5);
  auto a = delta_monte_carlo(c, d.maximizer, 5, 2000, 9);
  auto b = delta_monte_carlo(c, d.maximizer, 5, 2000, 9);
  CHECK(a.estimate == b.estimate);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(std::abs(a.estimate - d.delta) <= 4 * a.stderr_);
  CHECK(TransitionSampler(c.transition()).uses_alias());
  CHECK_FALSE(TransitionSampler(cdg_chain(5).transition()).uses_alias());
}

TEST_CASE("monte carlo rejects unnormalized test functions") {
  auto c = uniform(3);
  Vector g(3);
  g << 1, 1, 1;
  CHECK_THROWS_AS(delta_monte_carlo(c, g, 2, 100, 1), Error);
  g << 2, -2, 0;
  CHECK_THROWS_AS(delta_monte_carlo(c, g, 2, 100, 1), Error);
}

TEST_CASE("audit values on flip and uniform") {
  auto fa = delta_audit(flip(), 2);
  CHECK(fa.all_pass());
  const auto& up = find(fa, "delta_upper_sqrt_4tau_over_n");
  CHECK(up.applicable);
  CHECK(find(fa, "delta_floor_before_tau_over_3").applicable == false);
  const auto& win = find(fa, "delta_window_lower");
  CHECK(win.applicable);
  CHECK(win.pass);

  auto ua = delta_audit(uniform(3), 4);
  CHECK(ua.all_pass());
}

TEST_CASE("the three bounds hold across the battery") {
  for (const auto& b : reference_battery()) {
    const double tau = spectral_gap(b.chain).tau;
    const auto n_max = static_cast<long long>(std::ceil(50 * tau));
    auto a = delta_audit(b.chain, std::max<long long>(n_max, 1));
    for (const auto& c : a.checks) CHECK_MESSAGE(c.pass, b.name, " ", c.name, " margin ", c.margin);
  }
}
