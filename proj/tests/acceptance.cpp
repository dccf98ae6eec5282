// Acceptance suite: one PASS/FAIL line per criterion.  Pass --extended to add
// the 7-card shuffle to criterion 8.

#include "nrgap/bounds.hpp"
#include "nrgap/empirical.hpp"
#include "nrgap/experiments.hpp"
#include "nrgap/families.hpp"
#include "nrgap/rng.hpp"
#include "nrgap/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace nrgap;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Records the first failure and keeps the worst value seen.
struct Tracker {
  bool pass = true;
  std::string first_failure;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) first_failure = what;
    pass = pass && ok;
  }
};

Outcome closed_form_anchors() {
  Tracker t;
  double worst = 0.0;
  for (long long n : {4, 8, 16, 64}) {
    const double pi_n = M_PI / double(n);
    const double lazy_exact = 1.0 / std::sin(pi_n);
    const double sym_exact = 1.0 / (1.0 - std::cos(2.0 * pi_n));
    const double lazy_svd = weighted_singular_spectrum(circulant_chain(n, {{0, 0.5}, {1, 0.5}})).relaxation;
    const double sym_svd = weighted_singular_spectrum(circulant_chain(n, {{1, 0.5}, {-1, 0.5}})).relaxation;
    worst = std::max({worst, rel(lazy_svd, lazy_exact), rel(sym_svd, sym_exact)});
    t.require(rel(lazy_svd, lazy_exact) <= 1e-9, "lazy right N=" + std::to_string(n));
    t.require(rel(sym_svd, sym_exact) <= 1e-9, "symmetric N=" + std::to_string(n));
  }
  return {t.pass, "max rel err " + fmt(worst) + (t.pass ? "" : "; " + t.first_failure)};
}

Outcome circulant_equivalence() {
  Tracker t;
  Philox rng(777, 0);
  double worst = 0.0;
  int done = 0, resampled = 0;
  while (done < 50) {
    const long long n = 2 + static_cast<long long>(rng.below(63));
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min<long long>(4, n))));
    std::vector<Step> steps;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    double total = 0.0;
    while (static_cast<int>(steps.size()) < k) {
      const auto a = static_cast<long long>(rng.below(static_cast<std::uint64_t>(n)));
      if (used[static_cast<std::size_t>(a)]) continue;
      used[static_cast<std::size_t>(a)] = 1;
      const double w = 0.05 + rng.uniform();
      steps.push_back({a, w});
      total += w;
    }
    for (auto& s : steps) s.p /= total;
    auto chain = circulant_chain(n, steps);
    if (!chain.flags().irreducible) {
      ++resampled;
      continue;
    }
    const double closed = circulant_tau(n, steps);
    const double svd = weighted_singular_spectrum(chain).relaxation;
    const double e = rel(closed, svd);
    worst = std::max(worst, e);
    t.require(e <= 1e-9, "N=" + std::to_string(n) + " k=" + std::to_string(k));
    ++done;
  }
  return {t.pass, "50 step sets (" + std::to_string(resampled) + " reducible resampled), max rel err " + fmt(worst) +
                      (t.pass ? "" : "; " + t.first_failure)};
}

Outcome delta_bounds(const std::vector<BatteryChain>& battery) {
  Tracker t;
  double worst2 = kInfinity, worst3 = kInfinity, worst4 = kInfinity;
  for (const auto& b : battery) {
    const double tau = spectral_gap(b.chain).tau;
    const auto n2 = static_cast<long long>(std::ceil(50.0 * tau));
    const auto n4 = static_cast<long long>(std::ceil(5.0 * tau));
    const long long n_max = std::max(n2, 2 * n4);
    std::vector<long long> ns;
    for (long long n = 1; n <= n_max; ++n) ns.push_back(n);
    const auto curve = delta_curve(b.chain, ns);
    auto delta = [&](long long n) { return curve.entries[static_cast<std::size_t>(n - 1)].delta_exact; };
    for (long long n = 1; n <= n2; ++n) {
      const double m = std::sqrt(4.0 * tau / double(n)) - delta(n);
      worst2 = std::min(worst2, m);
      t.require(m >= -1e-9, b.name + " upper n=" + std::to_string(n));
    }
    for (long long n = 1; double(n) <= tau / 3.0; ++n) {
      const double m = delta(n) - 1.0 / 132.0;
      worst3 = std::min(worst3, m);
      t.require(m >= -1e-9, b.name + " floor n=" + std::to_string(n));
    }
    for (long long n = 1; n <= n4; ++n) {
      double window = 0.0;
      for (long long k = n; k <= 2 * n; ++k) window = std::max(window, delta(k));
      const double m = window - tau / (2.0 * double(n) + 3.0 * tau);
      worst4 = std::min(worst4, m);
      t.require(m >= -1e-9, b.name + " window n=" + std::to_string(n));
    }
  }
  return {t.pass, std::to_string(battery.size()) + " chains; min margins upper " + fmt(worst2) + ", floor " +
                      fmt(worst3) + ", window " + fmt(worst4) + (t.pass ? "" : "; " + t.first_failure)};
}

Outcome full_audit(const std::vector<BatteryChain>& battery) {
  Tracker t;
  int applicable = 0, skipped = 0;
  double worst = kInfinity;
  std::string worst_name;
  for (const auto& b : battery) {
    AuditOptions opt;
    opt.eps = 1.0 / 6.0;
    opt.group_walk = b.group_walk;
    const auto audit = inequality_audit(b.chain, opt);
    for (const auto& c : audit.checks) {
      if (!c.applicable) {
        ++skipped;
        continue;
      }
      ++applicable;
      if (c.margin < worst) worst = c.margin, worst_name = b.name + "/" + c.name;
      t.require(c.pass, b.name + " " + c.name + " margin " + fmt(c.margin));
    }
  }
  return {t.pass, std::to_string(applicable) + " checks, " + std::to_string(skipped) + " gated; min margin " +
                      fmt(worst) + " (" + worst_name + ")" + (t.pass ? "" : "; " + t.first_failure)};
}

Outcome monte_carlo() {
  Tracker t;
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  const std::vector<std::pair<std::string, FiniteChain>> chains{
      {"flip", build_chain(flip)},
      {"uniform", build_chain(Matrix::Constant(4, 4, 0.25))},
      {"lazy_biased_Z8", lazy(circulant_chain(8, {{1, 0.7}, {-1, 0.3}}), 0.5)},
  };
  // Exact cancellation can leave ~1e-17 of rounding in the exact value.
  constexpr double kRoundoff = 1e-12;
  double worst_z = 0.0;
  for (const auto& [name, chain] : chains)
    for (long long n : {2, 8}) {
      const auto exact = delta_exact(chain, n);
      const auto est = delta_monte_carlo(chain, exact.maximizer, n, 20000, 20240601);
      const double diff = std::abs(est.estimate - exact.delta);
      if (est.stderr_ > 0) worst_z = std::max(worst_z, diff / est.stderr_);
      t.require(diff <= 4.0 * est.stderr_ + kRoundoff, name + " n=" + std::to_string(n) + " diff " + fmt(diff));
    }
  return {t.pass, "max |diff|/stderr " + fmt(worst_z) + (t.pass ? "" : "; " + t.first_failure)};
}

Outcome torus_scaling() {
  ChainSpec golden;
  golden.family = Family::torus;
  golden.probs = TorusProbs::up_right(Probability::from_json(nlohmann::json::parse(R"({"sqrt": [1, 2]})")));
  ChainSpec half = golden;
  half.probs = TorusProbs::up_right(Probability::from_json(nlohmann::json::parse(R"({"rational": [1, 2]})")));
  const std::vector<long long> grid{64, 128, 256, 512, 1024};
  const double s1 = fit_scaling(scan(golden, grid, ScanMethod::closed_form)).slope;
  const double s2 = fit_scaling(scan(half, grid, ScanMethod::closed_form)).slope;
  const bool pass = s1 >= 1.183 && s1 <= 1.483 && s2 >= 1.9 && s2 <= 2.1;
  return {pass, "slope(1/sqrt2) " + fmt(s1) + " in [1.183,1.483], slope(1/2) " + fmt(s2) + " in [1.9,2.1]"};
}

Outcome cdg_scaling() {
  ChainSpec spec;
  spec.family = Family::cdg;
  const auto rows = scan(spec, {101, 211, 401, 809, 1601}, ScanMethod::svd);
  double lo = kInfinity, hi = 0.0;
  std::ostringstream taus;
  for (const auto& r : rows) {
    const double ratio = r.tau / std::log(double(r.N));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    taus << (r.N == 101 ? "" : " ") << fmt(r.tau);
  }
  return {hi / lo <= 3.0, "tau " + taus.str() + "; ratio spread " + fmt(hi / lo) + " <= 3"};
}

Outcome card_scaling(bool extended) {
  Tracker t;
  ChainSpec spec;
  spec.family = Family::cardshuffle;
  const auto rows = scan(spec, {3, 4, 5, 6}, ScanMethod::svd);
  std::ostringstream taus;
  for (const auto& r : rows) {
    const double bound = 41.0 * std::pow(double(r.N), 3);
    t.require(r.tau <= bound, "N=" + std::to_string(r.N));
    taus << (r.N == 3 ? "" : " ") << fmt(r.tau);
  }
  const double slope = fit_scaling(rows).slope;
  t.require(slope >= 2.5 && slope <= 3.5, "slope " + fmt(slope));
  std::string detail = "tau " + taus.str() + "; slope " + fmt(slope) + " in [2.5,3.5]";
  if (extended) {
    const auto r7 = scan(spec, {7}, ScanMethod::svd).front();
    t.require(r7.tau <= 41.0 * 343.0, "N=7");
    detail += "; N=7 tau " + fmt(r7.tau);
  }
  return {t.pass, detail + (t.pass ? "" : "; " + t.first_failure)};
}

Outcome random_steps() {
  Tracker t;
  const auto r = random_step_ensemble(499, {0.5, 0.5}, 2000, {1, 2, 4, 8}, 20240601);
  std::ostringstream fr;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    t.require(row.fraction <= 3.0 * std::pow(row.L, -1.5), "L=" + fmt(row.L));
    if (i) t.require(row.fraction <= r.rows[i - 1].fraction, "monotone at L=" + fmt(row.L));
    fr << (i ? " " : "") << fmt(row.fraction);
  }
  return {t.pass, "fractions " + fr.str() + (t.pass ? "" : "; " + t.first_failure)};
}

Outcome laziness(const std::vector<BatteryChain>& battery) {
  Tracker t;
  double worst = 0.0;
  const std::vector<std::string> names{"flip", "biased_Z8", "cdg11", "card4", "random8_3"};
  for (const auto& b : battery) {
    if (std::find(names.begin(), names.end(), b.name) == names.end()) continue;
    const double g = spectral_gap(b.chain).gamma;
    for (double theta : {0.25, 0.5, 0.9}) {
      const double gl = spectral_gap(lazy(b.chain, theta)).gamma;
      const double e = rel(gl, (1.0 - theta) * g);
      worst = std::max(worst, e);
      t.require(e <= 1e-9, b.name + " theta=" + fmt(theta));
    }
  }
  return {t.pass, "5 chains x 3 holds, max rel err " + fmt(worst) + (t.pass ? "" : "; " + t.first_failure)};
}

}  // namespace

int main(int argc, char** argv) {
  bool extended = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--extended") == 0) extended = true;

  const auto battery = reference_battery();
  struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "closed-form anchors", 1, closed_form_anchors},
      {2, "circulant formula vs SVD", 10, circulant_equivalence},
      {3, "empirical-average bounds", 120, [&] { return delta_bounds(battery); }},
      {4, "inequality audit", 120, [&] { return full_audit(battery); }},
      {5, "Monte Carlo consistency", 30, monte_carlo},
      {6, "torus scaling", 60, torus_scaling},
      {7, "CDG log scaling", 300, cdg_scaling},
      {8, "card shuffle", extended ? 900.0 : 180.0, [&] { return card_scaling(extended); }},
      {9, "random step sets", 60, random_steps},
      {10, "laziness scaling", 10, [&] { return laziness(battery); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail += "; over time limit " + fmt(c.limit_s) + " s";
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d: %s  %s -- %s [%.2f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
