// Axiom and integrability checkers for tangent-like families, the
// cotangent-like structure zoo, and Reeb vector fields.

#pragma once

#include "fieldforms/exterior.hpp"
#include "fieldforms/report.hpp"

namespace fieldforms {

enum class TangentKind { almost_tangent, almost_k_tangent };

// J^A o J^B = 0, rank J^A = n, Im J^A /\ (+) Im J^B trivial
Report check_tangent_like(const std::vector<Tensor11>& J, TangentKind kind, int n);

enum class SymplecticKind {
  almost_cotangent,
  k_symplectic,
  almost_k_cotangent,
  k_cosymplectic,
  polysymplectic,
  multisymplectic
};

struct SymplecticInput {
  std::vector<Form> omegas;               // 2-forms; one (k+1)-form for multisymplectic
  std::vector<Form> etas;                 // k-cosymplectic 1-forms
  std::vector<VecField> V;                // spanning fields of the distribution
  std::vector<std::vector<VecField>> V_A; // per-index distributions
  int n = 0;                              // base dimension where the kind uses it
};

Report check_symplectic_like(const SymplecticInput& in, SymplecticKind kind);

// Nijenhuis brackets on coordinate basis pairs for tangent-like families.
Report check_integrability(const std::vector<Tensor11>& J);
// Closedness plus involutivity of the listed distributions.
Report check_integrability(const SymplecticInput& in, SymplecticKind kind);

// Unique fields with eta_A(xi_B) = delta_AB and xi_B _| omega_A = 0;
// throws SingularError when the defining system is not uniquely solvable.
std::vector<VecField> reeb_fields(const std::vector<Form>& etas,
                                  const std::vector<Form>& omegas);

// the matrix of X |-> X _| omega over the coordinate basis (rows: result
// components, columns: input components)
ExprMat contraction_matrix(const Form& omega);

bool involutive(const std::vector<VecField>& span);

}  // namespace fieldforms
