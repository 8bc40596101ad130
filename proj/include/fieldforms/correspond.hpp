// Inter-structure maps: the Legendre transformations FL, leg/Leg and phi_L,
// and the catalog of pullback/projection identities connecting the tangent-
// and cotangent-like structures across the canonical models.

#pragma once

#include "fieldforms/fieldeq.hpp"
#include "fieldforms/models.hpp"
#include "fieldforms/report.hpp"

namespace fieldforms {

// ---------------------------------------------------------------------------
// Legendre maps

struct FlResult {
  ChartMap fl;                 // (x, v) -> (x, dL/dv)
  std::vector<Form> omega_L;   // (omega_L)_A = -d d_{J^A} L
  Report report;
};
FlResult legendre_fl(const BundleModel& ktangent, const BundleModel& kcotangent,
                     const Expr& L);

struct LegResult {
  ChartMap leg;  // into the jet dual
  ChartMap Leg;  // into the multisymplectic bundle
  Report report;
};
LegResult legendre_leg(const BundleModel& jet, const BundleModel& jet_dual,
                       const BundleModel& multisym, const Expr& lagr);

struct MsympLegResult {
  ChartMap phi_L;  // adapted frame (Lagrangian chart) -> frame bundle of E
  Report report;
};
MsympLegResult legendre_msymp(const BundleModel& adapted, const BundleModel& frame_e,
                              const Expr& L, const Rat& tau);

// ---------------------------------------------------------------------------
// standard fields of a torsion-free linear connection on the adapted frame

struct ConnectionCoeffs {
  // vertical corrections of B_i and B_A along the frame-block directions,
  // indexed [leg][chart coordinate]; zero rows give the flat choice
  ExprMat Vi;
  ExprMat VA;
  static ConnectionCoeffs flat(const BundleModel& adapted);
  static ConnectionCoeffs sample(const BundleModel& adapted, uint64_t salt);
};

// B_i and B_A as vector fields on the adapted frame chart
std::vector<VecField> standard_fields_base(const BundleModel& adapted,
                                           const ConnectionCoeffs& conn);

// S~_alpha built from its definition ((pi o lambda)^* alpha)(B_i) E*^i_B (x) theta^B
Tensor11 stilde_alpha(const BundleModel& adapted, const ExprVec& alpha,
                      const ConnectionCoeffs& conn);

// S~_omega from the derivation rule, evaluated on argument fields; returns
// the value as a vector field on the adapted chart
VecField stilde_omega_apply(const BundleModel& adapted,
                            const std::vector<VecField>& args,
                            const ConnectionCoeffs& conn);

// ---------------------------------------------------------------------------
// identity catalog

enum class IdentityName {
  kt_from_t,
  t_from_frame,
  s_trivial,
  s_from_lpie,
  liouville_from_soldering,
  multisym_to_ksym,
  stilde_alpha_projects,
  stilde_omega_projects,
  rho_chp,
  chp_quotient,
  chp_sigma
};

IdentityName identity_from_string(const std::string& s);
std::string to_string(IdentityName n);
std::vector<std::string> identity_names();

struct IdentityParams {
  int n = 1, k = 1;
  std::optional<Expr> lagrangian;            // jet-side Lagrangian (CHP identities)
  ExprVec alpha;                             // 1-form coefficients on M
  std::vector<std::vector<Rat>> metric;      // t_from_frame metric h_ab
  std::vector<std::vector<Rat>> xis;         // t_from_frame xi samples
  std::optional<ConnectionCoeffs> conn;      // connection choice where used
  ExprMat contravolume;                      // chp_sigma frame alpha^i_j
  int slot = 1;                              // B index (s_trivial, multisym_to_ksym)
};

Report verify_correspondence(IdentityName name, const IdentityParams& params);

}  // namespace fieldforms
