#pragma once

#include "nrgap/chain.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace nrgap {

/// Jump of size `a` (mod N) taken with probability `p`.
struct Step {
  long long a = 0;
  double p = 0.0;
};

/// A probability that may come from a symbolic form.
///
/// JSON forms: 0.25 | {"rational": [p, q]} | {"sqrt": [p, q]} (= sqrt(p/q)) |
/// {"literal": "0.7071067811865475244008443621"}.  Only the "rational" form
/// marks the value as rational; plain numbers are left untagged.
struct Probability {
  double value = 0.0;
  std::string form = "number";
  nlohmann::json source;  // original JSON for symbolic forms

  static Probability from_json(const nlohmann::json& j);
  static Probability number(double v) { return Probability{v, "number", nlohmann::json(v)}; }
  nlohmann::json to_json() const { return form == "number" ? nlohmann::json(value) : source; }
  bool tagged_rational() const { return form == "rational"; }
};

/// Torus walk probabilities: hold p0, +e_i with plus[i], -e_i with minus[i].
struct TorusProbs {
  Probability p0;
  std::vector<Probability> plus;
  std::vector<Probability> minus;

  /// Up with 1 - alpha, right with alpha on the 2-torus.
  static TorusProbs up_right(const Probability& alpha);
  int dims() const { return static_cast<int>(plus.size()); }
};

enum class Family { explicit_matrix, circulant, torus, cdg, cardshuffle };

const char* to_string(Family family);

/// Serializable description of a chain from one of the supported families.
struct ChainSpec {
  Family family = Family::explicit_matrix;
  long long N = 0;
  std::vector<Step> steps;          // circulant
  TorusProbs probs;                 // torus
  Matrix matrix;                    // explicit
  std::vector<std::string> labels;  // explicit
  double hold = 0.0;                // optional lazy wrapper

  static ChainSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Same spec with a different N (ignored for explicit chains).
  ChainSpec with_n(long long n) const;
};

FiniteChain build_from_spec(const ChainSpec& spec);

inline constexpr long long kDenseStateLimit = 6000;

FiniteChain circulant_chain(long long n, const std::vector<Step>& steps);

/// Relaxation time of a circulant walk from its Fourier symbol.
double circulant_tau(long long n, const std::vector<Step>& steps);

/// Validates a step set; throws InvalidSteps.
void validate_steps(long long n, const std::vector<Step>& steps);

FiniteChain torus_chain(long long n, int d, const TorusProbs& probs);

struct TorusGap {
  double gamma = 0.0;
  double tau = kInfinity;
  std::vector<long long> frequencies;  // minimizing nonzero frequency vector
};

/// min over nonzero m of |1 - lambda_m| without building the matrix.
TorusGap torus_gap_closed_form(long long n, int d, const TorusProbs& probs);

/// x -> 2x + e mod N, e uniform on {-1, 0, 1}.
FiniteChain cdg_chain(long long n);

/// Identity, top-two swap, or bottom-to-top, each with probability 1/3.
FiniteChain card_chain(int n);

/// Lexicographic (Lehmer-code) rank of a permutation of 0..n-1.
long long permutation_rank(const std::vector<int>& perm);
std::vector<int> permutation_unrank(long long rank, int n);

bool is_prime(long long n);

}  // namespace nrgap
