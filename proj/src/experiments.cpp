#include "nrgap/experiments.hpp"

#include "nrgap/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace nrgap {

std::string params_digest(const ChainSpec& spec) {
  nlohmann::json j = spec.to_json();
  j.erase("N");
  const std::string text = j.dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

namespace {

std::vector<Step> lazy_steps(const std::vector<Step>& steps, long long n, double hold) {
  std::vector<Step> out;
  bool has_zero = false;
  for (const auto& s : steps) {
    Step t{s.a, (1.0 - hold) * s.p};
    if (((s.a % n) + n) % n == 0) {
      t.p += hold;
      has_zero = true;
    }
    out.push_back(t);
  }
  if (!has_zero && hold > 0.0) out.push_back({0, hold});
  return out;
}

TorusProbs lazy_probs(TorusProbs probs, double hold) {
  probs.p0 = Probability::number(hold + (1.0 - hold) * probs.p0.value);
  for (auto& p : probs.plus) p = Probability::number((1.0 - hold) * p.value);
  for (auto& p : probs.minus) p = Probability::number((1.0 - hold) * p.value);
  return probs;
}

}  // namespace

std::vector<ExperimentRow> scan(const ChainSpec& spec_template, std::vector<long long> n_list, ScanMethod method) {
  std::sort(n_list.begin(), n_list.end());
  std::vector<ExperimentRow> rows;
  const std::string digest = params_digest(spec_template);
  const bool has_closed_form =
      spec_template.family == Family::circulant || spec_template.family == Family::torus;
  if (method == ScanMethod::closed_form && !has_closed_form)
    throw Error(ErrorCode::BadArgument, std::string("no closed form for family ") + to_string(spec_template.family));
  const bool closed = method == ScanMethod::closed_form || (method == ScanMethod::automatic && has_closed_form);

  for (long long n : n_list) {
    const ChainSpec spec = spec_template.with_n(n);
    ExperimentRow row;
    row.family = to_string(spec.family);
    row.params_digest = digest;
    row.N = n;
    const auto start = std::chrono::steady_clock::now();
    if (closed) {
      row.method = to_string(SpectrumMethod::closed_form);
      if (spec.family == Family::circulant) {
        row.tau = circulant_tau(n, lazy_steps(spec.steps, n, spec.hold));
      } else {
        const TorusProbs probs = spec.hold > 0.0 ? lazy_probs(spec.probs, spec.hold) : spec.probs;
        row.tau = torus_gap_closed_form(n, probs.dims(), probs).tau;
      }
      row.gamma = std::isfinite(row.tau) ? 1.0 / row.tau : 0.0;
    } else {
      const SingularSpectrum s = weighted_singular_spectrum(build_from_spec(spec));
      row.method = to_string(s.method);
      row.gamma = s.gap;
      row.tau = s.relaxation;
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

ScalingFit fit_scaling(const std::vector<ExperimentRow>& rows, FitAxis axis) {
  if (rows.size() < 3) throw Error(ErrorCode::InsufficientData, "need at least 3 rows");
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (!std::isfinite(r.tau) || r.tau <= 0.0) throw Error(ErrorCode::InsufficientData, "tau must be finite");
    const double ln = std::log(static_cast<double>(r.N));
    if (axis == FitAxis::log_log_n && ln <= 0.0) throw Error(ErrorCode::InsufficientData, "log log N needs N > 1");
    xs.push_back(axis == FitAxis::log_n ? ln : std::log(ln));
    ys.push_back(std::log(r.tau));
  }
  const double count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorCode::InsufficientData, "all N identical");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.n_points = static_cast<int>(xs.size());
  return fit;
}

EnsembleResult random_step_ensemble(long long n, const std::vector<double>& probs, int trials,
                                const std::vector<double>& l_grid, std::uint64_t seed) {
  if (!is_prime(n)) throw Error(ErrorCode::NotPrime, std::to_string(n) + " is not prime");
  if (trials < 100) throw Error(ErrorCode::BadArgument, "need at least 100 trials");
  const auto k = static_cast<int>(probs.size());
  if (k < 1 || k > n) throw Error(ErrorCode::BadArgument, "need 1 <= k <= N step probabilities");

  EnsembleResult result;
  result.taus.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Philox rng(seed, static_cast<std::uint64_t>(t));
    std::vector<long long> a;
    do {
      a.clear();
      for (int r = 0; r < k; ++r) a.push_back(static_cast<long long>(rng.below(static_cast<std::uint64_t>(n))));
      std::vector<long long> sorted = a;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) break;
    } while (true);
    std::vector<Step> steps;
    for (int r = 0; r < k; ++r) steps.push_back({a[r], probs[r]});
    result.taus.push_back(circulant_tau(n, steps));
  }

  const double scale = std::pow(static_cast<double>(n), 2.0 / (k + 1.0));
  std::vector<double> grid = l_grid;
  std::sort(grid.begin(), grid.end());
  for (double l : grid) {
    TailRow row;
    row.L = l;
    row.threshold = l * scale;
    const auto above = std::count_if(result.taus.begin(), result.taus.end(),
                                     [&](double tau) { return tau > row.threshold; });
    row.fraction = static_cast<double>(above) / static_cast<double>(trials);
    result.rows.push_back(row);
  }
  return result;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

std::string rows_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "family,params_digest,N,gamma,tau,method,wall_ms\n";
  for (const auto& r : rows) {
    out += r.family + "," + r.params_digest + "," + std::to_string(r.N) + "," + format_double(r.gamma) + "," +
           format_double(r.tau) + "," + r.method + "," + format_double(r.wall_ms) + "\n";
  }
  return out;
}

nlohmann::json rows_json(const std::vector<ExperimentRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"family", r.family},
                   {"params_digest", r.params_digest},
                   {"N", r.N},
                   {"gamma", json_number(r.gamma)},
                   {"tau", json_number(r.tau)},
                   {"method", r.method},
                   {"wall_ms", r.wall_ms}});
  return arr;
}

std::string curve_csv(const DeltaCurve& curve) {
  std::string out = "n,delta_exact,delta_mc,mc_stderr\n";
  for (const auto& e : curve.entries) {
    out += std::to_string(e.n) + "," + format_double(e.delta_exact) + "," +
           (e.delta_mc ? format_double(*e.delta_mc) : "") + "," + (e.mc_stderr ? format_double(*e.mc_stderr) : "") +
           "\n";
  }
  return out;
}

nlohmann::json curve_json(const DeltaCurve& curve) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : curve.entries) {
    nlohmann::json j{{"n", e.n}, {"delta_exact", e.delta_exact}};
    j["delta_mc"] = e.delta_mc ? nlohmann::json(*e.delta_mc) : nlohmann::json();
    j["mc_stderr"] = e.mc_stderr ? nlohmann::json(*e.mc_stderr) : nlohmann::json();
    arr.push_back(j);
  }
  return arr;
}

std::string ensemble_csv(const EnsembleResult& result) {
  std::string out = "L,threshold,fraction\n";
  for (const auto& r : result.rows)
    out += format_double(r.L) + "," + format_double(r.threshold) + "," + format_double(r.fraction) + "\n";
  return out;
}

nlohmann::json ensemble_json(const EnsembleResult& result) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : result.rows) arr.push_back({{"L", r.L}, {"threshold", r.threshold}, {"fraction", r.fraction}});
  return {{"tail", arr}, {"trials", result.taus.size()}};
}

nlohmann::json audit_json(const BoundAudit& audit) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : audit.checks) {
    nlohmann::json j{{"name", c.name}, {"applicable", c.applicable}, {"pass", c.pass}, {"note", c.note}};
    if (c.applicable) {
      j["lhs"] = json_number(c.lhs);
      j["rhs"] = json_number(c.rhs);
      j["relation"] = to_string(c.relation);
      j["margin"] = json_number(c.margin);
    }
    checks.push_back(j);
  }
  return {{"checks", checks}, {"all_pass", audit.all_pass()}};
}

std::string audit_csv(const BoundAudit& audit) {
  std::string out = "name,applicable,pass,lhs,relation,rhs,margin,note\n";
  for (const auto& c : audit.checks) {
    std::string note = c.note;
    for (char& ch : note)
      if (ch == ',' || ch == '\n') ch = ';';
    out += c.name + "," + (c.applicable ? "1" : "0") + "," + (c.pass ? "1" : "0") + "," + format_double(c.lhs) +
           "," + to_string(c.relation) + "," + format_double(c.rhs) + "," + format_double(c.margin) + "," + note +
           "\n";
  }
  return out;
}

std::string audit_table(const BoundAudit& audit) {
  std::ostringstream os;
  os << std::left << std::setw(46) << "check" << std::setw(6) << "ok" << std::setw(16) << "lhs" << std::setw(4)
     << "" << std::setw(16) << "rhs"
     << "note\n";
  for (const auto& c : audit.checks) {
    os << std::setw(46) << c.name;
    if (!c.applicable) {
      os << std::setw(6) << "n/a" << c.note << "\n";
      continue;
    }
    os << std::setw(6) << (c.pass ? "PASS" : "FAIL") << std::setw(16) << std::setprecision(8) << c.lhs
       << std::setw(4) << to_string(c.relation) << std::setw(16) << c.rhs << c.note << "\n";
  }
  return os.str();
}

nlohmann::json spectrum_json(const SingularSpectrum& s) {
  nlohmann::json j{{"values", s.values},
                   {"gap", s.gap},
                   {"relaxation", json_number(s.relaxation)},
                   {"method", to_string(s.method)},
                   {"mu_min", s.mu_min}};
  if (s.eigenvalues) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& l : *s.eigenvalues) ev.push_back({l.real(), l.imag()});
    j["eigenvalues"] = ev;
  }
  return j;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void emit_report(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

FiniteChain random_irreducible_chain(Index size, std::uint64_t seed, std::uint64_t stream) {
  Philox rng(seed, stream);
  Matrix p = Matrix::Zero(size, size);
  for (Index x = 0; x < size; ++x) {
    for (Index y = 0; y < size; ++y) {
      const bool cycle_edge = y == (x + 1) % size;
      if (cycle_edge || rng.uniform() < 0.45) {
        const double u = rng.uniform();
        p(x, y) = 0.05 + u * u;
      }
    }
    p.row(x) /= p.row(x).sum();
  }
  return FiniteChain::build(std::move(p));
}

std::vector<BatteryChain> reference_battery(std::uint64_t seed) {
  std::vector<BatteryChain> out;
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  out.push_back({"flip", build_chain(flip), false});
  for (Index n : {2, 5}) out.push_back({"uniform" + std::to_string(n), build_chain(Matrix::Constant(n, n, 1.0 / n)), false});

  for (long long n : {3, 4, 8, 16}) {
    const std::string suffix = "_Z" + std::to_string(n);
    const std::vector<std::pair<std::string, std::vector<Step>>> walks = {
        {"symmetric", {{1, 0.5}, {-1, 0.5}}},
        {"biased", {{1, 0.7}, {-1, 0.3}}},
        {"shift", {{1, 1.0}}},
    };
    for (const auto& [name, steps] : walks) {
      const FiniteChain c = circulant_chain(n, steps);
      out.push_back({name + suffix, c, name != "biased"});
      out.push_back({"lazy_" + name + suffix, lazy(c, 0.5), false});
    }
  }
  const TorusProbs half = TorusProbs::up_right(Probability::number(0.5));
  for (long long n : {2, 4}) out.push_back({"torus2_N" + std::to_string(n), torus_chain(n, 2, half), true});
  for (long long n : {5, 11}) out.push_back({"cdg" + std::to_string(n), cdg_chain(n), false});
  for (int n : {3, 4}) out.push_back({"card" + std::to_string(n), card_chain(n), true});
  for (int i = 0; i < 20; ++i)
    out.push_back({"random8_" + std::to_string(i), random_irreducible_chain(8, seed, static_cast<std::uint64_t>(i)),
                   false});
  return out;
}

}  // namespace nrgap
