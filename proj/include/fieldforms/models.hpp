// Constructors for the canonical bundle models: charts, canonical structure
// packs, projections and group actions.
//
// Coordinate naming (emitted verbatim everywhere):
//   x1..xn                      base
//   y1..yk                      fiber of E
//   t_1..t_k                    time components
//   v_<i>_<A>                   velocities on (rk_)k_tangent models
//   p_<A>_<i>                   momenta on (k_)cotangent and k_cosymplectic
//   p1..pn                      momenta on the plain cotangent model
//   y_<A>_<i>                   jet fiber coordinates
//   pi_<a>_<b>, v_<a>_<b>       frame momentum / velocity blocks
//   u_<a>_<b>                   adapted-frame Lagrangian blocks
//   p, p_<i>_<A>                multisymplectic fiber coordinates
// On adapted frames the fiber rows/columns run over n+1..n+k, so e.g. the
// pull-up of the jet coordinate y_<A>_<j> is u_<n+A>_<j>.

#pragma once

#include <optional>

#include "fieldforms/axioms.hpp"
#include "fieldforms/exterior.hpp"

namespace fieldforms {

enum class ModelKind {
  tangent,
  k_tangent,
  cotangent,
  k_cotangent,
  k_cosymplectic,
  frame,
  adapted_frame,
  jet,
  rk_k_tangent,
  multisym_n2,
  jet_dual,
  legendre_bundle
};

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind k);

struct StructurePack {
  std::map<std::string, Form> forms;
  std::map<std::string, std::vector<Form>> form_families;
  std::map<std::string, std::vector<Tensor11>> tensor_families;
  std::map<std::string, VecField> fields;
  std::map<std::string, std::vector<VecField>> field_families;
  std::map<std::string, VecValuedForm> vvforms;
};

class BundleModel {
 public:
  ModelKind kind;
  int n = 0, k = 0;
  ChartPtr chart;         // primary chart (see build_model)
  ChartPtr second_chart;  // frame: velocity; adapted_frame: momentum
  std::optional<ChartMap> to_second, from_second;
  StructurePack pack;

  int dim() const { return chart->dim(); }
  Sym coord(const std::string& name) const { return sym(name); }

  const Form& form(const std::string& name) const;
  const std::vector<Form>& form_family(const std::string& name) const;
  const std::vector<Tensor11>& tensor_family(const std::string& name) const;
  const VecField& field(const std::string& name) const;
  const std::vector<VecField>& field_family(const std::string& name) const;
  const VecValuedForm& vvform(const std::string& name) const;

  // volume form dx^1 ^ ... ^ dx^n on the primary chart
  Form volume_form() const;
  Form volume_contracted(int i) const;  // d/dx^i _| vol

  std::string describe() const;
};

// Builds the model and validates its canonical pack against the axiom
// checkers; throws on unsupported (kind, n, k).
BundleModel build_model(ModelKind kind, int n, int k = 0);

// --- named, possibly parameterized canonical structures ------------------

// "C" (k_tangent / rk_k_tangent), "soldering", "contact", ...
// Parameterized ones take index arguments through the dedicated functions.
VecField canonical_C(const BundleModel& m);
VecField canonical_C_A(const BundleModel& m, int A);          // C_A = C^A_A
VecField canonical_C_A_B(const BundleModel& m, int A, int B); // v^i_B d/dv^i_A

// S_alpha on a jet model for a 1-form alpha = sum alpha_j dx^j on the base
// (alpha_j as expressions in the base coordinates)
Tensor11 canonical_S_alpha(const BundleModel& m, const ExprVec& alpha);
// S_omega for the volume d^n x: tangent-valued n-form
VecValuedForm canonical_S_omega(const BundleModel& m);

// frame / adapted-frame fundamental vertical fields (1-based block indices;
// fiber indices run n+1..n+k on adapted frames)
VecField frame_Estar(const BundleModel& m, int a, int b);
// adapted-frame only: all three families keyed by the same call
// (a,b both base: E*^i_j; both fiber: E*^A_B; a base & b fiber: E*^i_A)

// J^i on the frame model (momentum chart): E*^i_j (x) theta^j
Tensor11 frame_J(const BundleModel& m, int i);
// adapted frame: J^i = E*^i_j (x) theta^j + E*^i_B (x) theta^B
Tensor11 adapted_J(const BundleModel& m, int i);
// adapted frame: E*^i_B (x) theta^B (the S_alpha building block)
Tensor11 adapted_vertical_endo(const BundleModel& m, int i);
// adapted frame: Jtilde^i = (1/n) E*^i_j (x) theta^j + E*^i_A (x) theta^A
Tensor11 adapted_Jtilde(const BundleModel& m, int i);

// stable k-tangent structures on rk_k_tangent
Tensor11 canonical_Jhat(const BundleModel& m, int A);    // J^A - C_A (x) dt^A
Tensor11 canonical_Jtilde(const BundleModel& m, int A);  // d/dt^A (x) dt^A + J^A

// Reeb fields of a k-cosymplectic pack (solved, not assumed)
std::vector<VecField> canonical_reeb(const BundleModel& m);

// --- block-inverse helpers on frame-like models ---------------------------

// frame model: v = pi^{-1} entries as expressions over the momentum chart
ExprMat frame_velocity_block(const BundleModel& m);
// adapted frame (Lagrangian chart): v^i_j, v^A_B, v^A_j expressions
ExprMat adapted_v_base(const BundleModel& m);   // (u^i_j)^{-1}
ExprMat adapted_v_fiber(const BundleModel& m);  // (u^A_B)^{-1}
ExprMat adapted_v_mixed(const BundleModel& m);  // v^A_j = u^A_i v^i_j

// --- projections, inclusions, actions -------------------------------------

// natural projection to the base chart (x's) or to the E chart (x,y)
ChartMap projection_to_base(const BundleModel& m);
ChartMap projection_to_E(const BundleModel& m);
// jet_dual from multisym_n2 (drop p)
ChartMap mu_projection(const BundleModel& multisym, const BundleModel& jetdual);
// rho: adapted_frame -> jet, rho^* y_<A>_<i> = u_<n+A>_<i>
ChartMap rho_projection(const BundleModel& adapted, const BundleModel& jet);
// i_A : tangent -> k_tangent
ChartMap inclusion_tangent(const BundleModel& tangent, const BundleModel& ktangent,
                           int A);
// bundle morphism k_tangent -> tangent with v^i = sum_B c_B v^i_B
ChartMap projection_k_tangent(const BundleModel& ktangent, const BundleModel& tangent,
                              const std::vector<Rat>& c);

// right translation R_g on the frame model's momentum chart:
// pi(u g) = g^{-1} pi(u); throws SingularError for singular g
ChartMap frame_right_action(const BundleModel& m, const std::vector<std::vector<Rat>>& g);
// block right action on the adapted frame Lagrangian chart for
// g = (A 0 / C B) in G_V
ChartMap adapted_right_action(const BundleModel& m,
                              const std::vector<std::vector<Rat>>& A,
                              const std::vector<std::vector<Rat>>& B,
                              const std::vector<std::vector<Rat>>& C);

// --- coordinate index helpers (1-based indices, name-based lookup) --------

std::string coord_name(const std::string& stem, int a, int b);
int ix_x(const BundleModel& m, int i);
int ix_y(const BundleModel& m, int A);
int ix_t(const BundleModel& m, int A);
int ix_v(const BundleModel& m, int i, int A);     // v_<i>_<A>
int ix_p(const BundleModel& m, int A, int i);     // p_<A>_<i>
int ix_pi(const BundleModel& m, int i);           // cotangent p<i>
int ix_pm(const BundleModel& m, int i, int A);    // p_<i>_<A>
int ix_jet(const BundleModel& m, int A, int i);   // y_<A>_<i>
int ix_u(const BundleModel& m, int a, int b);     // u_<a>_<b>
int ix_piblock(const BundleModel& m, int a, int b);  // pi_<a>_<b>
int ix_pscalar(const BundleModel& m);             // multisym p

}  // namespace fieldforms
