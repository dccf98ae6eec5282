#include "nrgap/families.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>

namespace nrgap {

const char* to_string(Family family) {
  switch (family) {
    case Family::explicit_matrix: return "explicit";
    case Family::circulant: return "circulant";
    case Family::torus: return "torus";
    case Family::cdg: return "cdg";
    case Family::cardshuffle: return "cardshuffle";
  }
  return "unknown";
}

namespace {

long long mod(long long a, long long n) {
  const long long r = a % n;
  return r < 0 ? r + n : r;
}

// e^{2 pi i m / n} with m reduced first so large products stay exact.
Complex root_of_unity(long long m, long long n) {
  const long double angle = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(mod(m, n)) /
                            static_cast<long double>(n);
  return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

ChainHints uniform_hints(Index size, bool normal, bool reversible) {
  ChainHints hints;
  hints.stationary = Vector::Constant(size, 1.0 / static_cast<double>(size));
  hints.normal = normal;
  hints.reversible = reversible;
  return hints;
}

}  // namespace

Probability Probability::from_json(const nlohmann::json& j) {
  Probability out;
  out.source = j;
  if (j.is_number()) {
    out.value = j.get<double>();
    out.form = "number";
  } else if (j.is_object() && j.contains("rational")) {
    const auto pq = j.at("rational").get<std::vector<long long>>();
    if (pq.size() != 2 || pq[1] == 0) throw Error(ErrorCode::InvalidSpec, "rational needs [p, q] with q != 0");
    out.value = static_cast<double>(static_cast<long double>(pq[0]) / static_cast<long double>(pq[1]));
    out.form = "rational";
  } else if (j.is_object() && j.contains("sqrt")) {
    const auto pq = j.at("sqrt").get<std::vector<long long>>();
    if (pq.size() != 2 || pq[1] <= 0 || pq[0] < 0) throw Error(ErrorCode::InvalidSpec, "sqrt needs [p, q], q > 0");
    out.value = static_cast<double>(std::sqrt(static_cast<long double>(pq[0]) / static_cast<long double>(pq[1])));
    out.form = "sqrt";
  } else if (j.is_object() && j.contains("one_minus")) {
    const Probability inner = from_json(j.at("one_minus"));
    out.value = 1.0 - inner.value;
    out.form = inner.form == "number" ? "number" : "derived";
  } else if (j.is_object() && j.contains("literal")) {
    const std::string text = j.at("literal").get<std::string>();
    char* end = nullptr;
    const long double v = std::strtold(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') throw Error(ErrorCode::InvalidSpec, "bad literal '" + text + "'");
    out.value = static_cast<double>(v);
    out.form = "literal";
  } else {
    throw Error(ErrorCode::InvalidSpec, "unrecognized probability " + j.dump());
  }
  return out;
}

TorusProbs TorusProbs::up_right(const Probability& alpha) {
  TorusProbs probs;
  probs.p0 = Probability::number(0.0);
  Probability up;
  up.value = 1.0 - alpha.value;
  up.form = alpha.form == "rational" ? "rational" : alpha.form == "number" ? "number" : "derived";
  up.source = nlohmann::json{{"one_minus", alpha.to_json()}};
  if (alpha.form == "rational") {
    const auto pq = alpha.source.at("rational").get<std::vector<long long>>();
    up.source = nlohmann::json{{"rational", {pq[1] - pq[0], pq[1]}}};
  }
  probs.plus = {alpha, up};
  probs.minus = {Probability::number(0.0), Probability::number(0.0)};
  return probs;
}

ChainSpec ChainSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) throw Error(ErrorCode::InvalidSpec, "spec needs a \"family\" field");
  ChainSpec spec;
  const std::string family = j.at("family").get<std::string>();
  try {
    if (j.contains("N")) spec.N = j.at("N").get<long long>();
    if (j.contains("hold")) spec.hold = j.at("hold").get<double>();
    if (family == "explicit") {
      spec.family = Family::explicit_matrix;
      const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
      const auto n = static_cast<Index>(rows.size());
      spec.matrix.resize(n, n);
      for (Index x = 0; x < n; ++x) {
        if (static_cast<Index>(rows[x].size()) != n) throw Error(ErrorCode::NotSquare, "matrix must be square");
        for (Index y = 0; y < n; ++y) spec.matrix(x, y) = rows[x][y];
      }
      spec.N = n;
      if (j.contains("labels")) spec.labels = j.at("labels").get<std::vector<std::string>>();
    } else if (family == "circulant") {
      spec.family = Family::circulant;
      for (const auto& s : j.at("steps"))
        spec.steps.push_back({s.at("a").get<long long>(), Probability::from_json(s.at("p")).value});
    } else if (family == "torus") {
      spec.family = Family::torus;
      if (j.contains("alpha")) {
        spec.probs = TorusProbs::up_right(Probability::from_json(j.at("alpha")));
      } else {
        const int d = j.at("d").get<int>();
        spec.probs.p0 = j.contains("p0") ? Probability::from_json(j.at("p0")) : Probability::number(0.0);
        for (const auto& p : j.at("plus")) spec.probs.plus.push_back(Probability::from_json(p));
        for (const auto& p : j.at("minus")) spec.probs.minus.push_back(Probability::from_json(p));
        if (spec.probs.dims() != d || static_cast<int>(spec.probs.minus.size()) != d)
          throw Error(ErrorCode::InvalidSpec, "plus/minus must each have d entries");
      }
    } else if (family == "cdg") {
      spec.family = Family::cdg;
    } else if (family == "cardshuffle") {
      spec.family = Family::cardshuffle;
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown family '" + family + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
  return spec;
}

nlohmann::json ChainSpec::to_json() const {
  nlohmann::json j;
  j["family"] = to_string(family);
  if (hold != 0.0) j["hold"] = hold;
  switch (family) {
    case Family::explicit_matrix: {
      nlohmann::json rows = nlohmann::json::array();
      for (Index x = 0; x < matrix.rows(); ++x) {
        std::vector<double> row(matrix.cols());
        for (Index y = 0; y < matrix.cols(); ++y) row[y] = matrix(x, y);
        rows.push_back(row);
      }
      j["matrix"] = rows;
      if (!labels.empty()) j["labels"] = labels;
      break;
    }
    case Family::circulant: {
      j["N"] = N;
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& s : steps) arr.push_back({{"a", s.a}, {"p", s.p}});
      j["steps"] = arr;
      break;
    }
    case Family::torus: {
      j["N"] = N;
      j["d"] = probs.dims();
      j["p0"] = probs.p0.to_json();
      nlohmann::json plus = nlohmann::json::array(), minus = nlohmann::json::array();
      for (const auto& p : probs.plus) plus.push_back(p.to_json());
      for (const auto& p : probs.minus) minus.push_back(p.to_json());
      j["plus"] = plus;
      j["minus"] = minus;
      break;
    }
    case Family::cdg:
    case Family::cardshuffle:
      j["N"] = N;
      break;
  }
  return j;
}

ChainSpec ChainSpec::with_n(long long n) const {
  ChainSpec out = *this;
  if (family != Family::explicit_matrix) out.N = n;
  return out;
}

FiniteChain build_from_spec(const ChainSpec& spec) {
  FiniteChain chain = [&] {
    switch (spec.family) {
      case Family::explicit_matrix: return FiniteChain::build(spec.matrix, spec.labels);
      case Family::circulant: return circulant_chain(spec.N, spec.steps);
      case Family::torus: return torus_chain(spec.N, spec.probs.dims(), spec.probs);
      case Family::cdg: return cdg_chain(spec.N);
      case Family::cardshuffle: return card_chain(static_cast<int>(spec.N));
    }
    throw Error(ErrorCode::InvalidSpec, "unknown family");
  }();
  return spec.hold > 0.0 ? lazy(chain, spec.hold) : chain;
}

void validate_steps(long long n, const std::vector<Step>& steps) {
  if (n < 2) throw Error(ErrorCode::InvalidSteps, "circulant walks need N >= 2");
  if (steps.empty()) throw Error(ErrorCode::InvalidSteps, "empty step set");
  std::vector<long long> seen;
  double total = 0.0;
  for (const auto& s : steps) {
    if (!(s.p >= 0.0 && s.p <= 1.0)) throw Error(ErrorCode::InvalidSteps, "step probability outside [0,1]");
    seen.push_back(mod(s.a, n));
    total += s.p;
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw Error(ErrorCode::InvalidSteps, "steps must be distinct mod N");
  if (std::abs(total - 1.0) > tol::kStochastic) throw Error(ErrorCode::InvalidSteps, "step probabilities must sum to 1");
}

FiniteChain circulant_chain(long long n, const std::vector<Step>& steps) {
  validate_steps(n, steps);
  if (n > kDenseStateLimit) throw Error(ErrorCode::TooLarge, "circulant chain too large for a dense matrix");
  std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
  for (const auto& s : steps) weight[static_cast<std::size_t>(mod(s.a, n))] += s.p;
  Matrix p = Matrix::Zero(n, n);
  for (long long x = 0; x < n; ++x)
    for (long long a = 0; a < n; ++a)
      if (weight[static_cast<std::size_t>(a)] > 0.0) p(x, mod(x + a, n)) = weight[static_cast<std::size_t>(a)];
  bool reversible = true;
  for (long long a = 0; a < n; ++a)
    if (weight[static_cast<std::size_t>(a)] != weight[static_cast<std::size_t>(mod(-a, n))]) reversible = false;
  return FiniteChain::build(std::move(p), {}, uniform_hints(n, true, reversible));
}

double circulant_tau(long long n, const std::vector<Step>& steps) {
  validate_steps(n, steps);
  double min_modulus = kInfinity, max_modulus = 0.0;
  for (long long j = 1; j < n; ++j) {
    Complex symbol = 0.0;
    for (const auto& s : steps) symbol += s.p * root_of_unity(mod(j, n) * mod(s.a, n) % n, n);
    const double modulus = std::abs(1.0 - symbol);
    min_modulus = std::min(min_modulus, modulus);
    max_modulus = std::max(max_modulus, modulus);
  }
  if (min_modulus <= zero_threshold(max_modulus)) return kInfinity;
  return 1.0 / min_modulus;
}

namespace {

void validate_torus(long long n, int d, const TorusProbs& probs) {
  if (n < 2 || d < 1) throw Error(ErrorCode::BadArgument, "torus needs N >= 2 and d >= 1");
  if (probs.dims() != d || static_cast<int>(probs.minus.size()) != d)
    throw Error(ErrorCode::BadArgument, "torus probabilities must have d entries per direction");
  double total = probs.p0.value;
  auto check = [](double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::BadArgument, "torus probability outside [0,1]");
  };
  check(probs.p0.value);
  for (int i = 0; i < d; ++i) {
    check(probs.plus[i].value);
    check(probs.minus[i].value);
    total += probs.plus[i].value + probs.minus[i].value;
  }
  if (std::abs(total - 1.0) > tol::kStochastic) throw Error(ErrorCode::BadArgument, "torus probabilities must sum to 1");
}

}  // namespace

FiniteChain torus_chain(long long n, int d, const TorusProbs& probs) {
  validate_torus(n, d, probs);
  long long states = 1;
  for (int i = 0; i < d; ++i) {
    states *= n;
    if (states > kDenseStateLimit) throw Error(ErrorCode::TooLarge, "N^d exceeds the dense state limit");
  }
  Matrix p = Matrix::Zero(states, states);
  std::vector<long long> stride(d, 1);
  for (int i = 1; i < d; ++i) stride[i] = stride[i - 1] * n;
  // On Z/2 the steps +1 and -1 coincide.
  bool reversible = true;
  for (int i = 0; i < d; ++i)
    if (n != 2 && probs.plus[i].value != probs.minus[i].value) reversible = false;
  for (long long x = 0; x < states; ++x) {
    p(x, x) += probs.p0.value;
    for (int i = 0; i < d; ++i) {
      const long long coord = (x / stride[i]) % n;
      const long long base = x - coord * stride[i];
      p(x, base + mod(coord + 1, n) * stride[i]) += probs.plus[i].value;
      p(x, base + mod(coord - 1, n) * stride[i]) += probs.minus[i].value;
    }
  }
  return FiniteChain::build(std::move(p), {}, uniform_hints(states, true, reversible));
}

TorusGap torus_gap_closed_form(long long n, int d, const TorusProbs& probs) {
  validate_torus(n, d, probs);
  // Per-direction contribution p_i e^{i theta} + p_{-i} e^{-i theta}.
  std::vector<std::vector<Complex>> table(d, std::vector<Complex>(static_cast<std::size_t>(n)));
  for (int i = 0; i < d; ++i)
    for (long long m = 0; m < n; ++m) {
      const Complex w = root_of_unity(m, n);
      table[i][static_cast<std::size_t>(m)] = probs.plus[i].value * w + probs.minus[i].value * std::conj(w);
    }

  TorusGap best;
  double best_sq = kInfinity, max_sq = 0.0;
  std::vector<long long> m(d, 0);
  // Lexicographic odometer with m[0] most significant; skips m = 0.
  auto advance = [&] {
    for (int i = d - 1; i >= 0; --i) {
      if (++m[i] < n) return true;
      m[i] = 0;
    }
    return false;
  };
  while (advance()) {
    // lambda_{-m} = conj(lambda_m): visit only the lexicographically smaller of m, -m.
    bool mirrored_smaller = false;
    for (int i = 0; i < d; ++i) {
      const long long neg = mod(-m[i], n);
      if (neg != m[i]) {
        mirrored_smaller = neg < m[i];
        break;
      }
    }
    if (mirrored_smaller) continue;
    Complex lambda = probs.p0.value;
    for (int i = 0; i < d; ++i) lambda += table[i][static_cast<std::size_t>(m[i])];
    const double sq = std::norm(1.0 - lambda);
    max_sq = std::max(max_sq, sq);
    if (sq < best_sq * (1.0 - 1e-13)) {
      best_sq = sq;
      best.frequencies = m;
    }
  }
  best.gamma = std::sqrt(best_sq);
  best.tau = best.gamma <= zero_threshold(std::sqrt(max_sq)) ? kInfinity : 1.0 / best.gamma;
  return best;
}

FiniteChain cdg_chain(long long n) {
  if (n < 3 || n % 2 == 0) throw Error(ErrorCode::BadArgument, "CDG chain needs odd N >= 3");
  if (n > kDenseStateLimit) throw Error(ErrorCode::TooLarge, "CDG chain too large for a dense matrix");
  Matrix p = Matrix::Zero(n, n);
  for (long long x = 0; x < n; ++x)
    for (long long e = -1; e <= 1; ++e) p(x, mod(2 * x + e, n)) += 1.0 / 3.0;
  ChainHints hints;
  hints.stationary = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return FiniteChain::build(std::move(p), {}, hints);
}

long long permutation_rank(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  long long rank = 0;
  for (int i = 0; i < n; ++i) {
    int smaller = 0;
    for (int j = i + 1; j < n; ++j)
      if (perm[j] < perm[i]) ++smaller;
    rank = rank * (n - i) + smaller;
  }
  return rank;
}

std::vector<int> permutation_unrank(long long rank, int n) {
  std::vector<int> digits(n);
  for (int i = n - 1; i >= 0; --i) {
    const int base = n - i;
    digits[i] = static_cast<int>(rank % base);
    rank /= base;
  }
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> perm;
  for (int i = 0; i < n; ++i) {
    perm.push_back(pool[digits[i]]);
    pool.erase(pool.begin() + digits[i]);
  }
  return perm;
}

FiniteChain card_chain(int n) {
  if (n < 3) throw Error(ErrorCode::BadArgument, "card shuffle needs N >= 3");
  if (n > 7) throw Error(ErrorCode::TooLarge, "card shuffle limited to N <= 7 (5040 states)");
  long long states = 1;
  for (int i = 2; i <= n; ++i) states *= i;
  Matrix p = Matrix::Zero(states, states);
  // Deck position 0 is the top card.
  for (long long r = 0; r < states; ++r) {
    const std::vector<int> deck = permutation_unrank(r, n);
    std::vector<int> swapped = deck;
    std::swap(swapped[0], swapped[1]);
    std::vector<int> rotated(n);
    rotated[0] = deck[n - 1];
    std::copy(deck.begin(), deck.end() - 1, rotated.begin() + 1);
    p(r, r) += 1.0 / 3.0;
    p(r, permutation_rank(swapped)) += 1.0 / 3.0;
    p(r, permutation_rank(rotated)) += 1.0 / 3.0;
  }
  ChainHints hints;
  hints.stationary = Vector::Constant(states, 1.0 / static_cast<double>(states));
  if (states > 1000) hints.normal = false;  // commutator check skipped; SVD route is exact regardless
  return FiniteChain::build(std::move(p), {}, hints);
}

bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long f = 2; f * f <= n; ++f)
    if (n % f == 0) return false;
  return true;
}

}  // namespace nrgap
