#include "nrgap/bounds.hpp"
#include "nrgap/empirical.hpp"
#include "nrgap/experiments.hpp"
#include "nrgap/families.hpp"
#include "nrgap/spectral.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nrgap::Error;
using nrgap::ErrorCode;
using nrgap::format_double;

struct Options {
  std::string spec_path;
  long long n_max = 0;
  double eps = 1.0 / 6.0;
  int k_max = 10;
  int trials = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  bool extended = false;
  bool group_walk = false;
  std::vector<long long> n_list;
  long long big_n = 0;
  int k = 2;
  std::vector<double> l_grid{1, 2, 4, 8};
  std::vector<double> probs;
  int iters = 2000;
};

nrgap::ChainSpec load_spec(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::InvalidSpec, "--spec is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed spec: ") + e.what());
  }
  return nrgap::ChainSpec::from_json(j);
}

std::uint64_t require_seed(const Options& o, const char* what) {
  if (!o.seed) throw Error(ErrorCode::BadArgument, std::string(what) + " requires --seed");
  return *o.seed;
}

void write(const Options& o, const std::string& content) {
  if (o.out.empty())
    std::cout << content;
  else
    nrgap::emit_report(o.out, content);
}

// Card shuffles above six cards need the dense 5040-state SVD.
void check_extended(const nrgap::ChainSpec& spec, const Options& o) {
  if (spec.family == nrgap::Family::cardshuffle && spec.N > 6 && !o.extended)
    throw Error(ErrorCode::BadArgument, "card shuffle with N > 6 requires --extended");
}

std::string render_audit(const nrgap::BoundAudit& audit, const Options& o) {
  if (o.format == "csv") return nrgap::audit_csv(audit);
  if (o.format == "table") return nrgap::audit_table(audit);
  return nrgap::dump_json(nrgap::audit_json(audit));
}

int run_gap(const Options& o) {
  auto spec = load_spec(o.spec_path);
  check_extended(spec, o);
  auto chain = nrgap::build_from_spec(spec);
  auto g = nrgap::spectral_gap(chain);
  auto ps = nrgap::pseudo_spectral_gap(chain, o.k_max);
  if (o.format == "csv") {
    write(o, "size,gamma,tau,method,pseudo_gap,pseudo_k\n" + std::to_string(chain.size()) + "," +
                 format_double(g.gamma) + "," + format_double(g.tau) + "," + nrgap::to_string(g.method) + "," +
                 format_double(ps.value) + "," + std::to_string(ps.best_k) + "\n");
    return 0;
  }
  nlohmann::json j{{"size", chain.size()},
                   {"gamma", g.gamma},
                   {"tau", std::isfinite(g.tau) ? nlohmann::json(g.tau) : nlohmann::json("inf")},
                   {"method", nrgap::to_string(g.method)},
                   {"pseudo_gap", ps.value},
                   {"pseudo_k", ps.best_k},
                   {"reversible", chain.flags().reversible},
                   {"normal", chain.flags().normal},
                   {"laziness", chain.flags().laziness}};
  if (chain.size() <= 400) j["spectrum"] = nrgap::spectrum_json(nrgap::weighted_singular_spectrum(chain));
  write(o, nrgap::dump_json(j));
  return 0;
}

int run_delta(const Options& o) {
  if (o.n_max < 1) throw Error(ErrorCode::BadArgument, "--n-max must be >= 1");
  auto chain = nrgap::build_from_spec(load_spec(o.spec_path));
  std::vector<long long> ns;
  for (long long n = 1; n <= o.n_max; ++n) ns.push_back(n);
  bool mc = o.trials > 0;
  auto curve = nrgap::delta_curve(chain, ns, mc);
  if (mc) {
    auto seed = require_seed(o, "Monte Carlo");
    for (auto& e : curve.entries) {
      auto est = nrgap::delta_monte_carlo(chain, *e.maximizer, e.n, o.trials, seed);
      e.delta_mc = est.estimate;
      e.mc_stderr = est.stderr_;
    }
  }
  auto audit = nrgap::delta_audit(chain, o.n_max);
  write(o, o.format == "csv" ? nrgap::curve_csv(curve) : nrgap::dump_json(nrgap::curve_json(curve)));
  std::cerr << nrgap::audit_table(audit);
  return audit.all_pass() ? 0 : 1;
}

int run_cheeger(const Options& o) {
  auto chain = nrgap::build_from_spec(load_spec(o.spec_path));
  nrgap::CheegerResult r = chain.size() <= nrgap::kCheegerEnumerationLimit
                               ? nrgap::cheeger_exact(chain)
                               : nrgap::cheeger_search(chain, o.iters, require_seed(o, "Cheeger search"));
  auto g = nrgap::spectral_gap(chain);
  nrgap::BoundAudit audit;
  if (r.exact) {
    audit.add("cheeger_lower", r.xi * r.xi / 16.0, nrgap::Relation::le, g.gamma);
    audit.add("cheeger_upper", g.gamma, nrgap::Relation::le, 32.0 * r.xi);
  } else {
    // A searched xi is only an upper bound; the lower check would not be sound.
    audit.add("cheeger_upper", g.gamma, nrgap::Relation::le, 32.0 * r.xi, "search");
  }
  if (o.format == "csv") {
    std::string set;
    for (std::size_t i = 0; i < r.argmin_set.size(); ++i) set += (i ? " " : "") + std::to_string(r.argmin_set[i]);
    write(o, "xi,exact,gamma,set\n" + format_double(r.xi) + "," + (r.exact ? "1" : "0") + "," +
                 format_double(g.gamma) + "," + set + "\n");
  } else {
    nlohmann::json j{{"xi", r.xi}, {"exact", r.exact}, {"set", r.argmin_set}, {"gamma", g.gamma},
                     {"audit", nrgap::audit_json(audit)}};
    write(o, nrgap::dump_json(j));
  }
  return audit.all_pass() ? 0 : 1;
}

int run_path_bound(const Options& o) {
  auto chain = nrgap::build_from_spec(load_spec(o.spec_path));
  auto pb = o.seed ? nrgap::path_bound(chain, nrgap::random_paths(chain, *o.seed)) : nrgap::path_bound(chain);
  auto g = nrgap::spectral_gap(chain);
  nrgap::BoundAudit audit;
  audit.add("canonical_path_lower", pb.gap_lower, nrgap::Relation::le, g.gamma);
  if (o.format == "csv") {
    write(o, "congestion,gap_lower,gamma\n" + format_double(pb.congestion) + "," + format_double(pb.gap_lower) +
                 "," + format_double(g.gamma) + "\n");
  } else {
    nlohmann::json j{{"congestion", pb.congestion}, {"gap_lower", pb.gap_lower}, {"gamma", g.gamma},
                     {"random", o.seed.has_value()}};
    write(o, nrgap::dump_json(j));
  }
  return audit.all_pass() ? 0 : 1;
}

int run_audit(const Options& o) {
  auto spec = load_spec(o.spec_path);
  check_extended(spec, o);
  auto chain = nrgap::build_from_spec(spec);
  nrgap::AuditOptions ao;
  ao.eps = o.eps;
  ao.k_max = o.k_max;
  ao.group_walk = o.group_walk;
  auto audit = nrgap::inequality_audit(chain, ao);
  if (o.n_max > 0) audit.append(nrgap::delta_audit(chain, o.n_max));
  write(o, render_audit(audit, o));
  return audit.all_pass() ? 0 : 1;
}

int run_scan(const Options& o) {
  auto spec = load_spec(o.spec_path);
  auto ns = o.n_list;
  if (ns.empty() && spec.N > 0) ns.push_back(spec.N);
  for (auto n : ns) check_extended(spec.with_n(n), o);
  auto rows = nrgap::scan(spec, ns);
  write(o, o.format == "csv" ? nrgap::rows_csv(rows) : nrgap::dump_json(nrgap::rows_json(rows)));
  if (rows.size() >= 3) {
    auto axis = spec.family == nrgap::Family::cdg ? nrgap::FitAxis::log_log_n : nrgap::FitAxis::log_n;
    auto fit = nrgap::fit_scaling(rows, axis);
    std::cerr << "slope " << format_double(fit.slope) << " intercept " << format_double(fit.intercept) << " r2 "
              << format_double(fit.r_squared) << "\n";
  }
  return 0;
}

int run_ensemble(const Options& o) {
  auto seed = require_seed(o, "ensemble");
  if (o.big_n <= 0) throw Error(ErrorCode::BadArgument, "--N is required");
  auto probs = o.probs;
  if (probs.empty()) probs.assign(o.k, 1.0 / o.k);
  int trials = o.trials > 0 ? o.trials : 2000;
  auto r = nrgap::random_step_ensemble(o.big_n, probs, trials, o.l_grid, seed);
  write(o, o.format == "csv" ? nrgap::ensemble_csv(r) : nrgap::dump_json(nrgap::ensemble_json(r)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral gap, relaxation time and comparison bounds for finite Markov chains"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_spec) {
    if (needs_spec) sub->add_option("--spec", o.spec_path, "ChainSpec JSON file")->required();
    sub->add_option("--out", o.out, "write the report here instead of stdout");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json", "table"}));
    sub->add_option("--seed", o.seed, "seed for randomized steps");
    sub->add_flag("--extended", o.extended, "allow the 5040-state card shuffle");
  };

  auto* gap = app.add_subcommand("gap", "gamma, tau and the singular spectrum");
  common(gap, true);
  gap->add_option("--k-max", o.k_max, "pseudo-spectral horizon");

  auto* delta = app.add_subcommand("delta", "exact Delta_n curve with its audit");
  common(delta, true);
  delta->add_option("--n-max", o.n_max)->required();
  delta->add_option("--trials", o.trials, "Monte Carlo replicates per n (0 = off)");

  auto* cheeger = app.add_subcommand("cheeger", "bottleneck ratio");
  common(cheeger, true);
  cheeger->add_option("--iters", o.iters, "local-search iterations above the enumeration limit");

  auto* path = app.add_subcommand("path-bound", "canonical-path congestion bound");
  common(path, true);

  auto* audit = app.add_subcommand("audit", "run every applicable comparison inequality");
  common(audit, true);
  audit->add_option("--eps", o.eps);
  audit->add_option("--k-max", o.k_max);
  audit->add_option("--n-max", o.n_max, "also audit Delta_n up to this n");
  audit->add_flag("--group-walk", o.group_walk, "chain is a random walk on a group");

  auto* scan = app.add_subcommand("scan", "tau over a list of N");
  common(scan, true);
  scan->add_option("--n-list", o.n_list)->delimiter(',');

  auto* ens = app.add_subcommand("ensemble", "tail fractions of tau over random step sets");
  common(ens, false);
  ens->add_option("--N", o.big_n, "prime modulus")->required();
  ens->add_option("--k", o.k, "number of steps");
  ens->add_option("--p", o.probs, "step probabilities (default uniform)")->delimiter(',');
  ens->add_option("--L", o.l_grid, "tail thresholds")->delimiter(',');
  ens->add_option("--trials", o.trials);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gap) return run_gap(o);
    if (*delta) return run_delta(o);
    if (*cheeger) return run_cheeger(o);
    if (*path) return run_path_bound(o);
    if (*audit) return run_audit(o);
    if (*scan) return run_scan(o);
    if (*ens) return run_ensemble(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
