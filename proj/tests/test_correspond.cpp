#include "doctest.h"
#include "fieldforms/correspond.hpp"

using namespace fieldforms;

TEST_CASE("legendre FL: quadratic Lagrangian at n=1, k=2") {
  BundleModel kt = build_model(ModelKind::k_tangent, 1, 2);
  BundleModel kc = build_model(ModelKind::k_cotangent, 1, 2);
  FlResult out = legendre_fl(kt, kc, Expr::parse("1/2*(v_1_1^2 + v_1_2^2)"));
  // p_1_1 -> v_1_1, p_2_1 -> v_1_2
  CHECK(are_equal(out.fl.exprs[kc.chart->index_of(sym("p_1_1"))], Expr(sym("v_1_1"))));
  CHECK(are_equal(out.fl.exprs[kc.chart->index_of(sym("p_2_1"))], Expr(sym("v_1_2"))));
  CHECK(out.report.verdict());

  // linear Lagrangian: regularity false but the pullback identity still holds
  FlResult lin = legendre_fl(kt, kc, Expr::parse("v_1_1"));
  CHECK_FALSE(lin.report.verdict());
  for (const auto& c : lin.report.conditions)
    if (c.label.find("FL* omega") != std::string::npos) CHECK(c.ok);
}

TEST_CASE("legendre leg/Leg: n=k=1 example") {
  BundleModel jm = build_model(ModelKind::jet, 1, 1);
  BundleModel jd = build_model(ModelKind::jet_dual, 1, 1);
  BundleModel ms = build_model(ModelKind::multisym_n2, 1, 1);
  LegResult out = legendre_leg(jm, jd, ms, Expr::parse("1/2*y_1_1^2"));
  // Leg gives p = -1/2 y_1_1^2 and p_1_1 = y_1_1
  CHECK(are_equal(out.Leg.exprs[ms.chart->index_of(sym("p"))],
                  Expr::parse("-1/2*y_1_1^2")));
  CHECK(are_equal(out.Leg.exprs[ms.chart->index_of(sym("p_1_1"))], Expr(sym("y_1_1"))));
  CHECK(out.report.verdict());

  LegResult sing = legendre_leg(jm, jd, ms, Expr(sym("y_1_1")));
  bool diffeo = true;
  for (const auto& c : sing.report.conditions)
    if (c.label.find("local diffeomorphism") != std::string::npos) diffeo = c.ok;
  CHECK_FALSE(diffeo);
}

TEST_CASE("m-symplectic legendre transformation") {
  BundleModel am = build_model(ModelKind::adapted_frame, 1, 1);
  BundleModel fe = build_model(ModelKind::frame, 2);
  // pull-up of 1/2 (y')^2 + 1: mixed-block expression
  Expr L = Expr::parse("1/2*u_2_1^2 + 1");
  MsympLegResult out = legendre_msymp(am, fe, L, rat(1));
  CHECK(out.report.verdict());

  CHECK_THROWS_AS(legendre_msymp(am, fe, Expr::parse("u_1_1^2"), rat(1)), DomainError);
  CHECK_THROWS_AS(legendre_msymp(am, fe, Expr(), rat(1)), DomainError);
}

TEST_CASE("identity catalog at n=1, k=1") {
  IdentityParams p;
  p.n = 1;
  p.k = 1;
  p.lagrangian = Expr::parse("1/2*y_1_1^2");
  for (const auto& name : identity_names()) {
    CAPTURE(name);
    Report rep = verify_correspondence(identity_from_string(name), p);
    CHECK(rep.verdict());
  }
}

TEST_CASE("identity catalog at mixed dimensions") {
  IdentityParams p;
  p.n = 1;
  p.k = 2;
  p.lagrangian = Expr::parse("1/2*(y_1_1^2 + y_2_1^2) + y1*y2");
  p.slot = 2;
  CHECK(verify_correspondence(IdentityName::s_trivial, p).verdict());
  CHECK(verify_correspondence(IdentityName::multisym_to_ksym, p).verdict());
  CHECK(verify_correspondence(IdentityName::stilde_alpha_projects, p).verdict());
  CHECK(verify_correspondence(IdentityName::rho_chp, p).verdict());
  CHECK(verify_correspondence(IdentityName::chp_quotient, p).verdict());

  IdentityParams q;
  q.n = 2;
  q.k = 1;
  q.lagrangian = Expr::parse("1/2*(y_1_1^2 + y_1_2^2) - y1^2");
  CHECK(verify_correspondence(IdentityName::kt_from_t, q).verdict());
  CHECK(verify_correspondence(IdentityName::t_from_frame, q).verdict());
  CHECK(verify_correspondence(IdentityName::s_from_lpie, q).verdict());
  CHECK(verify_correspondence(IdentityName::liouville_from_soldering, q).verdict());
  CHECK(verify_correspondence(IdentityName::chp_sigma, q).verdict());
  CHECK(verify_correspondence(IdentityName::stilde_omega_projects, q).verdict());
}

TEST_CASE("chp_sigma with a non-trivial contravariant volume") {
  IdentityParams p;
  p.n = 2;
  p.k = 1;
  p.lagrangian = Expr::parse("1/2*(y_1_1^2 + y_1_2^2)");
  p.contravolume = {{Expr(2), Expr(1)}, {Expr(0), Expr(3)}};
  CHECK(verify_correspondence(IdentityName::chp_sigma, p).verdict());
}
