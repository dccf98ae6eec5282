#pragma once

#include "nrgap/audit.hpp"
#include "nrgap/empirical.hpp"
#include "nrgap/families.hpp"
#include "nrgap/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nrgap {

struct ExperimentRow {
  std::string family;
  std::string params_digest;
  long long N = 0;
  double gamma = 0.0;
  double tau = kInfinity;
  std::string method;
  double wall_ms = 0.0;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

enum class ScanMethod { automatic, closed_form, svd };

/// Stable hex digest of a spec with N removed.
std::string params_digest(const ChainSpec& spec);

/// One row per N (sorted ascending).  Closed forms are used for circulant
/// and torus families under `automatic`; everything else goes through SVD.
std::vector<ExperimentRow> scan(const ChainSpec& spec_template, std::vector<long long> n_list,
                                ScanMethod method = ScanMethod::automatic);

enum class FitAxis { log_n, log_log_n };

/// Least squares of log tau on log N (or on log log N).
ScalingFit fit_scaling(const std::vector<ExperimentRow>& rows, FitAxis axis = FitAxis::log_n);

struct TailRow {
  double L = 0.0;
  double threshold = 0.0;
  double fraction = 0.0;
};

struct EnsembleResult {
  std::vector<TailRow> rows;
  std::vector<double> taus;  // one per trial, in trial order
};

/// Tail fractions P(tau > L N^{2/(k+1)}) over random distinct step sets.
EnsembleResult random_step_ensemble(long long n, const std::vector<double>& probs, int trials,
                                const std::vector<double>& l_grid, std::uint64_t seed);

// Report rendering.  CSV uses LF endings and %.17g floats; JSON keys are sorted.
std::string format_double(double v);
std::string rows_csv(const std::vector<ExperimentRow>& rows);
nlohmann::json rows_json(const std::vector<ExperimentRow>& rows);
std::string curve_csv(const DeltaCurve& curve);
nlohmann::json curve_json(const DeltaCurve& curve);
std::string ensemble_csv(const EnsembleResult& result);
nlohmann::json ensemble_json(const EnsembleResult& result);
nlohmann::json audit_json(const BoundAudit& audit);
std::string audit_csv(const BoundAudit& audit);
std::string audit_table(const BoundAudit& audit);
nlohmann::json spectrum_json(const SingularSpectrum& spectrum);

/// Writes `content` verbatim; throws IoError.
void emit_report(const std::string& path, const std::string& content);
std::string dump_json(const nlohmann::json& j);

struct BatteryChain {
  std::string name;
  FiniteChain chain;
  bool group_walk = false;
};

/// Reference chains used by the audits and the acceptance suite.
std::vector<BatteryChain> reference_battery(std::uint64_t seed = 20240601);

/// Irreducible chain with a Hamiltonian cycle plus random extra edges.
FiniteChain random_irreducible_chain(Index size, std::uint64_t seed, std::uint64_t stream);

}  // namespace nrgap
