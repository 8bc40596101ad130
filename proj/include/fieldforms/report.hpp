#pragma once

#include <string>
#include <vector>

namespace fieldforms {

struct Condition {
  std::string label;
  bool ok = false;
  std::string witness;  // printed expression or index tuple on failure
};

struct Report {
  std::vector<Condition> conditions;

  bool verdict() const;
  void add(std::string label, bool ok, std::string witness = "");
  void merge(const Report& other, const std::string& prefix = "");
  std::string text() const;  // one line per condition, then the verdict
};

}  // namespace fieldforms
