// Symbolic derivation of the field-equation systems: Euler-Lagrange,
// Hamilton (k-symplectic and k-cosymplectic), de Donder-Weyl, Ehresmann,
// the m-symplectic Hamilton equations, and Hamilton-Jacobi residuals.

#pragma once

#include "fieldforms/models.hpp"
#include "fieldforms/report.hpp"

namespace fieldforms {

// ---------------------------------------------------------------------------
// equation systems

struct EquationSystem {
  std::vector<Expr> residuals;
  std::vector<std::string> unknowns;  // function symbol base names
  std::vector<Sym> base;              // the coordinates they depend on
  std::string tag;

  std::string text() const;
};

struct KVectorField {
  std::vector<VecField> fields;  // X = (X_1, ..., X_k) on one chart
};

// ---------------------------------------------------------------------------
// Lagrangian data on (rk_)k_tangent models

struct LagrangeForms {
  std::vector<Form> beta;   // (beta_L)_A = d_{J^A} L   (stable variant on rk)
  std::vector<Form> omega;  // (omega_L)_A = -d (beta_L)_A
  Expr energy;              // E_L = C(L) - L
};
LagrangeForms lagrange_forms(const BundleModel& m, const Expr& L);

// Hessian d^2 L / dv^i_A dv^j_B as an (nk x nk) matrix
ExprMat velocity_hessian(const BundleModel& m, const Expr& L);

EquationSystem euler_lagrange(const BundleModel& m, const Expr& L);

// prolongation substitution: x^i -> phi_i(t), v^i_A -> D_A phi_i(t) on
// k_tangent; y^A -> phi_A(x), y^A_i -> D_i phi_A(x) on jet models
Expr prolong(const BundleModel& m, const Expr& e);

// ---------------------------------------------------------------------------
// evolution systems

enum class EvolutionMode { ksym_ham, kcosym_ham, lagrangian, kcosym_lagrangian };

struct EvolutionSystem {
  // general solution of the component linear system
  LinearSolution solution;                      // over the stacked unknowns
  std::vector<std::pair<int, int>> unknown_ix;  // (copy A, chart coordinate)
  EquationSystem pde;                           // classical residuals (Hamilton modes)
  KVectorField particular() const;
  const ChartPtr& chart() const { return chart_; }
  ChartPtr chart_;
  int copies = 0;
};
EvolutionSystem evolution_system(const BundleModel& m, const Expr& f, EvolutionMode mode);

Report sopde_check(const BundleModel& m, const KVectorField& x);

// ---------------------------------------------------------------------------
// Cartan-Hamilton-Poincare forms

struct ChpJet {
  Form Theta;  // L vol + dL o S_omega
  Form Omega;  // -d Theta
};
ChpJet chp_forms_jet(const BundleModel& jet, const Expr& lagr);

struct ChpAdapted {
  std::vector<Form> theta_base;   // theta^i_L = tau L theta^i + E*^i_A(L) theta^A
  std::vector<Form> theta_fiber;  // theta^A_L = theta^A
  Form theta_m;                   // L vol + dL o S~_omega (the CHP m-form)
  ExprMat H;                      // H^i_j = u^i_k h^k_j
  ExprMat h;                      // h^k_j = p^k_B u^B_j - tau L delta
  ExprMat P_base;                 // P^i_A = u^i_k p^k_A
  ExprMat P_mixed;                // P^A_j = -u^A_B u^B_j
  ExprMat P_fiber;                // P^A_B = u^A_B
};
// requires a lifted L (E*^i_j(L) = E*^A_B(L) = 0)
ChpAdapted chp_forms_adapted(const BundleModel& adapted, const Expr& L, const Rat& tau);

void require_lifted(const BundleModel& adapted, const Expr& L);
bool is_lifted(const BundleModel& adapted, const Expr& L);

// ---------------------------------------------------------------------------
// de Donder-Weyl Hamilton equations on the jet dual

struct DdwHamilton {
  Form Theta;  // -H d^n x + p^i_A dy^A ^ d^{n-1}x_i
  Form Omega;
  EquationSystem eqs;
};
DdwHamilton ddw_hamilton(const BundleModel& jet_dual, const Expr& hhat);

// ---------------------------------------------------------------------------
// Ehresmann-connection field equations on the jet model

struct EhresmannConnection {
  ExprMat gamma1;                // [A-1][i-1]: Gamma^A_i
  std::vector<ExprMat> gamma2;   // [A-1][j-1][i-1]: Gamma^A_{ji}
  static EhresmannConnection symbols(const BundleModel& jet);  // fresh symbols
};

struct EhresmannResult {
  std::vector<Expr> iago1;  // per fiber index A
  std::vector<Expr> iago2;  // per (A, i)
  std::vector<Expr> iago3;  // reduced system, per A
  bool regular_reduction = false;  // iago2 forced Gamma^B_j = y^B_j
};
EhresmannResult ehresmann_field_eqs(const BundleModel& jet, const Expr& lagr,
                                    const EhresmannConnection& conn);

// i_h applied with the horizontal projector built from conn
Form ehresmann_contraction(const BundleModel& jet, const Expr& lagr,
                           const EhresmannConnection& conn);

// ---------------------------------------------------------------------------
// m-symplectic Hamilton equations (adapted frame, barred coordinates)

struct MsympHamilton {
  Report regularity;        // det E*^i_A o E*^j_B (L) != 0
  ChartPtr barred;          // (x, y, u_i_j, p_i_A, u_A_B)
  ExprMat u_of_p;           // mixed block expressed through the new momenta
  ExprMat h;                // h^k_j over the barred chart
  Expr h_trace;
  EquationSystem eq_set_1;
  EquationSystem eq_set_2;
  EquationSystem eq_set_2_constant_u;
  EquationSystem ddw_pair;  // tau = 1/n traces
};
MsympHamilton msymp_hamilton_eqs(const BundleModel& adapted, const Expr& L,
                                 const Rat& tau);

// ---------------------------------------------------------------------------
// m-symplectic Hamilton-Jacobi residuals

struct HjResult {
  EquationSystem generalized;   // H^i_j o sigma + dS^i/dx^j
  EquationSystem ds_residuals;  // dS^A/dx^j = 0, multiplicity k n
  EquationSystem ddw_reduction; // trace form (emitted when u-section = id, tau = 1/n)
  Report transversality;        // Rund kernel check (tau = 1)
};
// s_funcs: m = n+k expressions S^alpha(x, y); u_section: the n x n block
// u^i_j o sigma (defaults to the identity when empty)
HjResult hj_residuals(const BundleModel& adapted, const Expr& L,
                      const std::vector<Expr>& s_funcs, const ExprMat& u_section,
                      const Rat& tau);

}  // namespace fieldforms
