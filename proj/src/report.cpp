#include "fieldforms/report.hpp"

#include <sstream>

namespace fieldforms {

bool Report::verdict() const {
  for (const auto& c : conditions)
    if (!c.ok) return false;
  return true;
}

void Report::add(std::string label, bool ok, std::string witness) {
  conditions.push_back({std::move(label), ok, std::move(witness)});
}

void Report::merge(const Report& other, const std::string& prefix) {
  for (const auto& c : other.conditions)
    conditions.push_back({prefix + c.label, c.ok, c.witness});
}

std::string Report::text() const {
  std::ostringstream os;
  for (const auto& c : conditions) {
    os << (c.ok ? "  [pass] " : "  [FAIL] ") << c.label;
    if (!c.ok && !c.witness.empty()) os << "  witness: " << c.witness;
    os << "\n";
  }
  os << (verdict() ? "verdict: pass" : "verdict: fail") << "\n";
  return os.str();
}

}  // namespace fieldforms
