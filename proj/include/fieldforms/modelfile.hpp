// JSON model files: one document per run, schema version 1.

#pragma once

#include <optional>
#include <string>

#include "fieldforms/correspond.hpp"
#include "fieldforms/numeval.hpp"
#include "fieldforms/nsymp.hpp"

namespace fieldforms {

struct ObservableSpec {
  int rank = 1;
  std::map<std::vector<int>, Expr> components;
};

struct ModelFile {
  ModelKind kind = ModelKind::k_tangent;
  int n = 1, k = 1;
  std::optional<Expr> lagrangian;         // on the jet / k_tangent chart
  std::optional<Expr> lagrangian_lifted;  // verbatim adapted-frame expression
  std::optional<Expr> hamiltonian;
  Rat tau = Rat(1);
  bool has_tau = false;
  ExprVec alpha;
  std::vector<std::vector<Rat>> metric;
  std::vector<Expr> s_functions;
  ExprMat u_section;
  ExprMat contravolume;
  std::vector<ObservableSpec> observables;
  std::map<std::string, Expr> candidates;
  GridSpec grid;
  std::string equations;  // system selector for residual runs
  double tolerance = -1;  // residual gate; < 0 disables
  int slot = 1;
  uint64_t seed = 0;
};

// throws Error with a schema/read message on malformed input
ModelFile load_model_file(const std::string& path);

// the Lagrangian as a lifted function on the adapted-frame chart
Expr lifted_lagrangian(const ModelFile& f, const BundleModel& adapted,
                       const BundleModel& jet);

}  // namespace fieldforms
