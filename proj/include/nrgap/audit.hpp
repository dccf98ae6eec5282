#pragma once

#include <string>
#include <vector>

namespace nrgap {

enum class Relation { le, ge };

/// One evaluated inequality `lhs <relation> rhs`.
struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  Relation relation = Relation::le;
  double margin = 0.0;
  bool applicable = true;
  bool pass = true;
  std::string note;
};

struct BoundAudit {
  std::vector<BoundCheck> checks;

  /// Records an applicable check; margin is rhs - lhs for <=, lhs - rhs for >=.
  BoundCheck& add(std::string name, double lhs, Relation relation, double rhs, std::string note = {});
  /// Records a gated check that was skipped.
  BoundCheck& skip(std::string name, std::string reason);

  bool all_pass() const;
  void append(const BoundAudit& other);
};

const char* to_string(Relation relation);

}  // namespace nrgap
