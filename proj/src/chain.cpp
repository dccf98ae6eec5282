#include "nrgap/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace nrgap {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::MultipleInvariantMeasures: return "MultipleInvariantMeasures";
    case ErrorCode::NotReversible: return "NotReversible";
    case ErrorCode::NotNormal: return "NotNormal";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::BadTestFunction: return "BadTestFunction";
    case ErrorCode::TooLargeForEnumeration: return "TooLargeForEnumeration";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NoPathExists: return "NoPathExists";
    case ErrorCode::MixingCapExceeded: return "MixingCapExceeded";
    case ErrorCode::InvalidSteps: return "InvalidSteps";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Distribution::Distribution(Vector weights) : weights_(std::move(weights)) {
  if ((weights_.array() < 0.0).any())
    throw Error(ErrorCode::BadArgument, "distribution has negative entries");
  if (std::abs(weights_.sum() - 1.0) > tol::kStochastic)
    throw Error(ErrorCode::BadArgument, "distribution does not sum to one");
}

double Distribution::inner(const Vector& f, const Vector& g) const {
  return (f.array() * g.array() * weights_.array()).sum();
}

double Distribution::norm(const Vector& f) const { return std::sqrt(inner(f, f)); }

double Distribution::mean(const Vector& f) const { return f.dot(weights_); }

namespace {

using Adjacency = std::vector<std::vector<Index>>;

Adjacency positive_digraph(const Matrix& p) {
  Adjacency adj(p.rows());
  for (Index x = 0; x < p.rows(); ++x)
    for (Index y = 0; y < p.cols(); ++y)
      if (p(x, y) > 0.0) adj[x].push_back(y);
  return adj;
}

// Tarjan's algorithm, iterative.  Returns component id per vertex.
std::vector<Index> strong_components(const Adjacency& adj, Index& count) {
  const Index n = static_cast<Index>(adj.size());
  std::vector<Index> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  Index next = 0;
  count = 0;
  struct Frame {
    Index v;
    std::size_t edge;
  };
  for (Index root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> calls{{root, 0}};
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!calls.empty()) {
      Frame& f = calls.back();
      if (f.edge < adj[f.v].size()) {
        const Index w = adj[f.v][f.edge++];
        if (index[w] < 0) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = true;
          calls.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const Index v = f.v;
      if (low[v] == index[v]) {
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      calls.pop_back();
      if (!calls.empty()) low[calls.back().v] = std::min(low[calls.back().v], low[v]);
    }
  }
  return comp;
}

// Solves mu (P - I) = 0, sum mu = 1 on the bordered system.
std::optional<Vector> solve_stationary(const Matrix& p) {
  const Index n = p.rows();
  Matrix a = p.transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::PartialPivLU<Matrix> lu(a);
  Vector mu = lu.solve(rhs);
  if (!mu.allFinite()) return std::nullopt;
  const double residual = (mu.transpose() * p - mu.transpose()).cwiseAbs().maxCoeff();
  if (residual > tol::kStationary) return std::nullopt;
  return mu;
}

Vector power_iteration_stationary(const Matrix& p) {
  const Index n = p.rows();
  const Matrix half = 0.5 * (Matrix::Identity(n, n) + p);
  Vector mu = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 100000; ++it) {
    Vector next = (mu.transpose() * half).transpose();
    next /= next.sum();
    const double change = (next - mu).cwiseAbs().maxCoeff();
    mu = next;
    if (change < 1e-16) break;
  }
  return mu;
}

void clean_distribution(Vector& mu) {
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] < 0.0 && mu[i] > -tol::kStationary) mu[i] = 0.0;
  mu /= mu.sum();
}

bool detailed_balance(const Matrix& p, const Vector& mu) {
  for (Index x = 0; x < p.rows(); ++x)
    for (Index y = x + 1; y < p.cols(); ++y)
      if (std::abs(mu[x] * p(x, y) - mu[y] * p(y, x)) > tol::kReversible) return false;
  return true;
}

bool commutes_with_adjoint(const Matrix& p, const Vector& mu) {
  if ((mu.array() <= 0.0).any()) return false;
  const Matrix star = adjoint_matrix(p, mu);
  const double scale = 1.0 + p.cwiseAbs().maxCoeff();
  return (star * p - p * star).cwiseAbs().maxCoeff() <= tol::kNormal * scale;
}

}  // namespace

bool strongly_connected(const Matrix& transition) {
  Index count = 0;
  strong_components(positive_digraph(transition), count);
  return count == 1;
}

long long period(const Matrix& transition) {
  const Adjacency adj = positive_digraph(transition);
  const Index n = static_cast<Index>(adj.size());
  Index count = 0;
  strong_components(adj, count);
  if (count != 1) return 0;
  std::vector<long long> level(n, -1);
  std::queue<Index> frontier;
  level[0] = 0;
  frontier.push(0);
  long long g = 0;
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v : adj[u]) {
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      } else {
        g = std::gcd(g, std::llabs(level[u] + 1 - level[v]));
      }
    }
  }
  return g;
}

FiniteChain FiniteChain::build(Matrix transition, std::vector<std::string> labels,
                               const ChainHints& hints) {
  const Index n = transition.rows();
  if (n == 0 || transition.cols() != n)
    throw Error(ErrorCode::NotSquare, "transition matrix must be square and nonempty");
  if (!transition.allFinite()) throw Error(ErrorCode::NotStochastic, "non-finite entry");
  if (!labels.empty() && static_cast<Index>(labels.size()) != n)
    throw Error(ErrorCode::BadArgument, "label count does not match state count");
  for (Index x = 0; x < n; ++x) {
    for (Index y = 0; y < n; ++y) {
      const double v = transition(x, y);
      if (v < 0.0 || v > 1.0)
        throw Error(ErrorCode::NotStochastic, "entry outside [0,1] at row " + std::to_string(x));
    }
    if (std::abs(transition.row(x).sum() - 1.0) > tol::kStochastic)
      throw Error(ErrorCode::NotStochastic, "row " + std::to_string(x) + " does not sum to 1");
  }

  const Adjacency adj = positive_digraph(transition);
  Index component_count = 0;
  const std::vector<Index> comp = strong_components(adj, component_count);
  bool irreducible = component_count == 1;
  if (hints.irreducible) irreducible = *hints.irreducible;

  // Closed classes: components with no edge leaving them.
  std::vector<bool> closed(component_count, true);
  for (Index x = 0; x < n; ++x)
    for (Index y : adj[x])
      if (comp[x] != comp[y]) closed[comp[x]] = false;
  const auto closed_count = std::count(closed.begin(), closed.end(), true);
  const bool multiple = closed_count > 1;

  Vector mu;
  if (hints.stationary) {
    mu = *hints.stationary;
  } else if (!multiple) {
    auto solved = solve_stationary(transition);
    mu = solved ? *solved : power_iteration_stationary(transition);
    clean_distribution(mu);
  } else {
    // Representative measure: stationary law of the first closed class.
    Index first = 0;
    while (!closed[comp[first]]) ++first;
    const Index target = comp[first];
    std::vector<Index> members;
    for (Index x = 0; x < n; ++x)
      if (comp[x] == target) members.push_back(x);
    Matrix sub(members.size(), members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = 0; j < members.size(); ++j) sub(i, j) = transition(members[i], members[j]);
    auto solved = solve_stationary(sub);
    Vector local = solved ? *solved : power_iteration_stationary(sub);
    clean_distribution(local);
    mu = Vector::Zero(n);
    for (std::size_t i = 0; i < members.size(); ++i) mu[members[i]] = local[i];
  }

  const double residual = (mu.transpose() * transition - mu.transpose()).cwiseAbs().maxCoeff();
  if (residual > tol::kStationary || std::abs(mu.sum() - 1.0) > tol::kStochastic)
    throw Error(ErrorCode::NotStochastic, "stationary distribution failed its residual check");

  StructureFlags flags;
  flags.irreducible = irreducible && (mu.array() > 0.0).all();
  flags.laziness = transition.diagonal().minCoeff();
  flags.reversible = hints.reversible ? *hints.reversible : detailed_balance(transition, mu);
  flags.normal = hints.normal ? *hints.normal : commutes_with_adjoint(transition, mu);

  return FiniteChain(std::move(transition), Distribution(std::move(mu)), std::move(labels),
                     flags, multiple);
}

void FiniteChain::require_irreducible(const char* op) const {
  if (multiple_invariant_measures_)
    throw Error(ErrorCode::MultipleInvariantMeasures,
                std::string(op) + " requires a unique invariant measure");
  if (!flags_.irreducible)
    throw Error(ErrorCode::NotIrreducible, std::string(op) + " requires an irreducible chain");
}

Matrix FiniteChain::generator() const {
  return Matrix::Identity(size(), size()) - transition_;
}

FiniteChain build_chain(const Matrix& matrix, std::vector<std::string> labels) {
  return FiniteChain::build(matrix, std::move(labels));
}

Matrix adjoint_matrix(const Matrix& op, const Vector& mu) {
  // op*(x,y) = mu(y) op(y,x) / mu(x)
  return mu.cwiseInverse().asDiagonal() * op.transpose() * mu.asDiagonal();
}

Matrix conjugate_by_measure(const Matrix& op, const Vector& mu) {
  const Vector root = mu.cwiseSqrt();
  return root.asDiagonal() * op * root.cwiseInverse().asDiagonal();
}

FiniteChain adjoint(const FiniteChain& chain) {
  chain.require_irreducible("adjoint");
  const Vector& mu = chain.stationary().weights();
  Matrix star = adjoint_matrix(chain.transition(), mu);
  // Rows of P* sum to (mu P)(x)/mu(x) = 1 up to rounding; renormalize.
  for (Index x = 0; x < star.rows(); ++x) star.row(x) /= star.row(x).sum();
  ChainHints hints;
  hints.stationary = mu;
  hints.irreducible = true;
  hints.reversible = chain.flags().reversible;
  hints.normal = chain.flags().normal;
  return FiniteChain::build(std::move(star), chain.labels(), hints);
}

FiniteChain reversibilize(const FiniteChain& chain, Reversibilization kind) {
  chain.require_irreducible("reversibilize");
  const Vector& mu = chain.stationary().weights();
  const Matrix& p = chain.transition();
  const Matrix star = adjoint_matrix(p, mu);
  Matrix r = kind == Reversibilization::additive ? Matrix(0.5 * (p + star)) : Matrix(p * star);
  // Symmetrize the flow matrix Q = D R so detailed balance holds to rounding.
  Matrix flow = mu.asDiagonal() * r;
  flow = 0.5 * (flow + flow.transpose()).eval();
  r = mu.cwiseInverse().asDiagonal() * flow;
  for (Index x = 0; x < r.rows(); ++x) r.row(x) /= r.row(x).sum();
  r = r.cwiseMax(0.0).cwiseMin(1.0);
  ChainHints hints;
  hints.stationary = mu;
  hints.reversible = true;
  hints.normal = true;
  return FiniteChain::build(std::move(r), chain.labels(), hints);
}

FiniteChain lazy(const FiniteChain& chain, double hold) {
  if (!(hold >= 0.0 && hold < 1.0)) throw Error(ErrorCode::BadArgument, "hold must lie in [0,1)");
  const Index n = chain.size();
  Matrix p = hold * Matrix::Identity(n, n) + (1.0 - hold) * chain.transition();
  ChainHints hints;
  hints.stationary = chain.stationary().weights();
  hints.irreducible = chain.flags().irreducible;
  hints.reversible = chain.flags().reversible;
  hints.normal = chain.flags().normal;
  return FiniteChain::build(std::move(p), chain.labels(), hints);
}

Matrix matrix_power(const Matrix& m, long long n) {
  if (n < 0) throw Error(ErrorCode::BadArgument, "matrix_power needs n >= 0");
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

Matrix matrix_power(const FiniteChain& chain, long long n) {
  return matrix_power(chain.transition(), n);
}

StructureFlags structure_flags(const FiniteChain& chain) {
  const Matrix& p = chain.transition();
  const Vector& mu = chain.stationary().weights();
  StructureFlags flags;
  flags.irreducible = strongly_connected(p) && (mu.array() > 0.0).all();
  flags.reversible = detailed_balance(p, mu);
  flags.normal = commutes_with_adjoint(p, mu);
  flags.laziness = p.diagonal().minCoeff();
  return flags;
}

FiniteChain permute(const FiniteChain& chain, const std::vector<Index>& perm) {
  const Index n = chain.size();
  if (static_cast<Index>(perm.size()) != n) throw Error(ErrorCode::BadArgument, "bad permutation");
  Matrix p(n, n);
  Vector mu(n);
  std::vector<std::string> labels;
  for (Index i = 0; i < n; ++i) {
    mu[i] = chain.stationary()[perm[i]];
    for (Index j = 0; j < n; ++j) p(i, j) = chain.transition()(perm[i], perm[j]);
    if (!chain.labels().empty()) labels.push_back(chain.labels()[perm[i]]);
  }
  ChainHints hints;
  hints.stationary = mu;
  return FiniteChain::build(std::move(p), std::move(labels), hints);
}

}  // namespace nrgap
