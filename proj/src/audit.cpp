#include "nrgap/audit.hpp"

#include "nrgap/types.hpp"

#include <cmath>

namespace nrgap {

const char* to_string(Relation relation) { return relation == Relation::le ? "<=" : ">="; }

BoundCheck& BoundAudit::add(std::string name, double lhs, Relation relation, double rhs,
                            std::string note) {
  BoundCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.relation = relation;
  c.margin = relation == Relation::le ? rhs - lhs : lhs - rhs;
  // inf <= inf and similar degenerate comparisons count as satisfied.
  if (std::isnan(c.margin)) c.margin = (lhs == rhs) ? 0.0 : -kInfinity;
  c.applicable = true;
  c.pass = c.margin >= -tol::kAuditMargin;
  c.note = std::move(note);
  checks.push_back(std::move(c));
  return checks.back();
}

BoundCheck& BoundAudit::skip(std::string name, std::string reason) {
  BoundCheck c;
  c.name = std::move(name);
  c.applicable = false;
  c.pass = true;
  c.note = std::move(reason);
  checks.push_back(std::move(c));
  return checks.back();
}

bool BoundAudit::all_pass() const {
  for (const auto& c : checks)
    if (c.applicable && !c.pass) return false;
  return true;
}

void BoundAudit::append(const BoundAudit& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

}  // namespace nrgap
