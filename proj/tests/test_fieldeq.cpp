#include "doctest.h"
#include "fieldforms/fieldeq.hpp"

using namespace fieldforms;

namespace {

Expr tagged(const std::string& f, std::vector<int> tags, const std::vector<Expr>& a) {
  return Expr::apply_tagged(f, std::move(tags), a);
}

}  // namespace

TEST_CASE("lagrange forms on the k_tangent model") {
  BundleModel m = build_model(ModelKind::k_tangent, 1, 2);
  Expr L = Expr::parse("1/2*(v_1_1^2 + v_1_2^2)");
  LagrangeForms lf = lagrange_forms(m, L);
  // beta_1 = v_1_1 dx1
  Form want = Expr(sym("v_1_1")) * Form::d_coord(m.chart, ix_x(m, 1));
  CHECK(form_equal(lf.beta[0], want));
  // E_L = C(L) - L = L for quadratic L
  CHECK(are_equal(lf.energy, L));
  // (omega_L)_A = -d beta_A
  CHECK(form_equal(lf.omega[0], Expr(-1) * d(lf.beta[0])));

  BundleModel cot = build_model(ModelKind::cotangent, 1);
  CHECK_THROWS_AS(lagrange_forms(cot, L), DomainError);
}

TEST_CASE("lagrange forms on the stable model") {
  BundleModel m = build_model(ModelKind::rk_k_tangent, 1, 1);
  Expr L = Expr::parse("1/2*v_1_1^2 - t_1");
  LagrangeForms lf = lagrange_forms(m, L);
  Form want = Expr(sym("v_1_1")) * Form::d_coord(m.chart, ix_x(m, 1));
  CHECK(form_equal(lf.beta[0], want));
}

TEST_CASE("euler-lagrange: wave, laplace, mechanics") {
  BundleModel m = build_model(ModelKind::k_tangent, 1, 2);
  std::vector<Expr> t = {Expr(sym("t_1")), Expr(sym("t_2"))};

  EquationSystem wave = euler_lagrange(m, Expr::parse("1/2*(v_1_1^2 - v_1_2^2)"));
  REQUIRE(wave.residuals.size() == 1);
  Expr expect = tagged("phi1", {1, 1}, t) - tagged("phi1", {2, 2}, t);
  CHECK(are_equal(wave.residuals[0], expect));

  EquationSystem lap = euler_lagrange(m, Expr::parse("1/2*(v_1_1^2 + v_1_2^2)"));
  CHECK(are_equal(lap.residuals[0], tagged("phi1", {1, 1}, t) + tagged("phi1", {2, 2}, t)));

  BundleModel mech = build_model(ModelKind::k_tangent, 1, 1);
  EquationSystem cls = euler_lagrange(mech, Expr::parse("1/2*v_1_1^2 - U(x1)"));
  std::vector<Expr> t1 = {Expr(sym("t_1"))};
  Expr phi = Expr::apply("phi1", t1);
  CHECK(are_equal(cls.residuals[0],
                  tagged("phi1", {1, 1}, t1) + Expr::apply_tagged("U", {1}, {phi})));
}

TEST_CASE("euler-lagrange on the jet agrees with the k_tangent derivation") {
  // trivial-bundle identification: L(v_1_A) ~ Lagr(y_1_i)
  BundleModel kt = build_model(ModelKind::k_tangent, 1, 2);
  BundleModel jm = build_model(ModelKind::jet, 2, 1);
  EquationSystem a = euler_lagrange(kt, Expr::parse("1/2*(v_1_1^2 + 3*v_1_2^2) - x1^2"));
  EquationSystem b = euler_lagrange(jm, Expr::parse("1/2*(y_1_1^2 + 3*y_1_2^2) - y1^2"));
  REQUIRE(a.residuals.size() == 1);
  REQUIRE(b.residuals.size() == 1);
  // rename the jet-side unknowns/coordinates onto the k_tangent ones
  std::map<Sym, Expr> ren = {{sym("x1"), Expr(sym("t_1"))},
                             {sym("x2"), Expr(sym("t_2"))}};
  CHECK(are_equal(a.residuals[0], b.residuals[0].subs(ren)));
}

TEST_CASE("hamilton evolution on the 1,2 k-cotangent model") {
  BundleModel m = build_model(ModelKind::k_cotangent, 1, 2);
  Expr H = Expr::parse("1/2*(p_1_1^2 + p_2_1^2)");
  EvolutionSystem ev = evolution_system(m, H, EvolutionMode::ksym_ham);
  // residual set: dH/dx + sum_A d sigma_A/dt_A  and  dH/dp - d sigma/dt
  std::vector<Expr> t = {Expr(sym("t_1")), Expr(sym("t_2"))};
  REQUIRE(ev.pde.residuals.size() == 3);
  CHECK(are_equal(ev.pde.residuals[0],
                  tagged("sigma_1_1", {1}, t) + tagged("sigma_2_1", {2}, t)));
  CHECK(are_equal(ev.pde.residuals[1],
                  Expr::apply("sigma_1_1", t) - tagged("sigma1", {1}, t)));
  CHECK(are_equal(ev.pde.residuals[2],
                  Expr::apply("sigma_2_1", t) - tagged("sigma1", {2}, t)));
}

TEST_CASE("lagrangian evolution solutions are SOPDEs (with kernel freedom)") {
  BundleModel m = build_model(ModelKind::k_tangent, 1, 2);
  Expr L = Expr::parse("1/2*(v_1_1^2 + v_1_2^2)");
  EvolutionSystem ev = evolution_system(m, L, EvolutionMode::lagrangian);
  // general solution: particular + sum of kernel directions with fresh symbols
  KVectorField X = ev.particular();
  for (size_t kv = 0; kv < ev.solution.nullspace.size(); ++kv) {
    Sym lam = sym("lam" + std::to_string(kv));
    for (size_t j = 0; j < ev.unknown_ix.size(); ++j) {
      auto [a, c] = ev.unknown_ix[j];
      X.fields[a].comp[c] += Expr(lam) * ev.solution.nullspace[kv][j];
    }
  }
  Report rep = sopde_check(m, X);
  CHECK(rep.verdict());
}

TEST_CASE("sopde_check spec examples") {
  BundleModel m = build_model(ModelKind::k_tangent, 2, 2);
  // xi_A = v^i_A d/dx^i + f^i_AB d/dv^i_B passes
  KVectorField good;
  for (int a = 1; a <= 2; ++a) {
    VecField f = VecField::zero(m.chart);
    for (int i = 1; i <= 2; ++i) {
      f.comp[ix_x(m, i)] = Expr(m.chart->coord(ix_v(m, i, a)));
      for (int b = 1; b <= 2; ++b)
        f.comp[ix_v(m, i, b)] = Expr(sym("f" + std::to_string(i) + std::to_string(a) +
                                         std::to_string(b)));
    }
    good.fields.push_back(f);
  }
  CHECK(sopde_check(m, good).verdict());

  KVectorField bad = good;
  bad.fields[0].comp[ix_x(m, 1)] = 2 * Expr(m.chart->coord(ix_v(m, 1, 1)));
  CHECK_FALSE(sopde_check(m, bad).verdict());

  // stable model: dt^1(xi_2) = 1 fails the delta condition
  BundleModel rm = build_model(ModelKind::rk_k_tangent, 1, 2);
  KVectorField rx;
  for (int a = 1; a <= 2; ++a) {
    VecField f = VecField::zero(rm.chart);
    for (int b = 1; b <= 2; ++b) f.comp[ix_t(rm, b)] = Expr(1);  // wrong for b != a
    f.comp[ix_x(rm, 1)] = Expr(rm.chart->coord(ix_v(rm, 1, a)));
    rx.fields.push_back(f);
  }
  CHECK_FALSE(sopde_check(rm, rx).verdict());
}

TEST_CASE("CHP forms on the jet: local expression at n=k=1") {
  BundleModel jm = build_model(ModelKind::jet, 1, 1);
  ChpJet chp = chp_forms_jet(jm, Expr::parse("1/2*y_1_1^2"));
  // Theta = y_1_1 dy - 1/2 y_1_1^2 dx
  Form want = Expr(sym("y_1_1")) * Form::d_coord(jm.chart, ix_y(jm, 1)) -
              Expr::parse("1/2*y_1_1^2") * Form::d_coord(jm.chart, ix_x(jm, 1));
  CHECK(form_equal(chp.Theta, want));
}

TEST_CASE("S_omega satisfies its defining rule") {
  BundleModel jm = build_model(ModelKind::jet, 2, 1);
  VecValuedForm so = canonical_S_omega(jm);
  Tensor11 s_dx1 = canonical_S_alpha(jm, {Expr(1), Expr(0)});
  Tensor11 s_dx2 = canonical_S_alpha(jm, {Expr(0), Expr(1)});

  // sigma over the coordinate coframe; arguments over the coordinate basis
  for (int c = 0; c < jm.dim(); ++c) {
    for (int a1 = 0; a1 < jm.dim(); ++a1)
      for (int a2 = a1 + 1; a2 < jm.dim(); ++a2) {
        VecField X1 = VecField::basis(jm.chart, a1);
        VecField X2 = VecField::basis(jm.chart, a2);
        Expr lhs = evaluate(so.slots[c], {X1, X2});
        // S sigma (X): vector along pi_1 with x-components sigma(S_dxj(X))
        auto s_sigma = [&](const VecField& X) {
          ExprVec xcomp(2);
          xcomp[0] = tensor_apply(s_dx1, X).comp[c];
          xcomp[1] = tensor_apply(s_dx2, X).comp[c];
          return xcomp;
        };
        auto base_comp = [&](const VecField& X) {
          ExprVec xcomp(2);
          xcomp[0] = X.comp[ix_x(jm, 1)];
          xcomp[1] = X.comp[ix_x(jm, 2)];
          return xcomp;
        };
        // omega = dx1^dx2 on M: det of the 2x2 component matrix
        auto vol2 = [](const ExprVec& u, const ExprVec& v) {
          return u[0] * v[1] - u[1] * v[0];
        };
        Expr rhs = vol2(s_sigma(X1), base_comp(X2)) + vol2(base_comp(X1), s_sigma(X2));
        CHECK(are_equal(lhs, rhs));
      }
  }
}

TEST_CASE("de Donder-Weyl Hamilton system") {
  BundleModel jd = build_model(ModelKind::jet_dual, 1, 2);
  Expr H = Expr::parse("1/2*(p_1_1^2 + p_1_2^2)");
  DdwHamilton out = ddw_hamilton(jd, H);
  CHECK(d(out.Omega).is_zero());
  std::vector<Expr> x = {Expr(sym("x1"))};
  // d gamma^A/dx + p^1_A o gamma  and  d gamma^1_A/dx - 0
  REQUIRE(out.eqs.residuals.size() == 4);
  CHECK(are_equal(out.eqs.residuals[0],
                  tagged("gamma1", {1}, x) + Expr::apply("gamma_1_1", x)));
  CHECK(are_equal(out.eqs.residuals[2], tagged("gamma_1_1", {1}, x)));

  // Theta at H = 0 keeps only the momentum part
  DdwHamilton zero = ddw_hamilton(jd, Expr());
  Form want = Form::zero(jd.chart, 1);
  for (int a = 1; a <= 2; ++a)
    want = want + Expr(jd.chart->coord(ix_pm(jd, 1, a))) *
                      Form::d_coord(jd.chart, ix_y(jd, a));
  CHECK(form_equal(zero.Theta, want));
}

TEST_CASE("ehresmann equations: regular reduction and expansion span") {
  BundleModel jm = build_model(ModelKind::jet, 2, 1);
  Expr L = Expr::parse(
      "1/2*(y_1_1^2 + y_1_2^2) + 1/3*y_1_1*y_1_2 + y1*y_1_1 + x1*y1");
  EhresmannConnection conn = EhresmannConnection::symbols(jm);
  EhresmannResult res = ehresmann_field_eqs(jm, L, conn);
  CHECK(res.regular_reduction);

  // the contraction identity i_h Omega_L - (n-1) Omega_L vanishes exactly on
  // the span of iago1/iago2: compare affine row spaces in the Gamma symbols
  Form D = ehresmann_contraction(jm, L, conn);
  std::vector<Sym> gam;
  for (const auto& row : conn.gamma1)
    for (const auto& e : row) gam.push_back(e.free_symbols()[0]);
  for (const auto& mat : conn.gamma2)
    for (const auto& row : mat)
      for (const auto& e : row) gam.push_back(e.free_symbols()[0]);

  auto rows_of = [&](const std::vector<Expr>& es) {
    ExprMat rows;
    std::map<Sym, Expr> zero;
    for (Sym s : gam) zero.emplace(s, Expr());
    for (const auto& e : es) {
      ExprVec row;
      for (Sym s : gam) row.push_back(e.diff(s));
      row.push_back(e.subs(zero));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  std::vector<Expr> dcoeffs;
  for (const auto& [k, ce] : D.comp)
    if (!ce.is_zero()) dcoeffs.push_back(ce);
  std::vector<Expr> iago = res.iago1;
  for (const auto& e : res.iago2) iago.push_back(e);

  ExprMat A = rows_of(dcoeffs), B = rows_of(iago);
  int ra = symbolic_rank(A), rb = symbolic_rank(B);
  ExprMat AB = A;
  for (auto& r : B) AB.push_back(r);
  int rab = symbolic_rank(AB);
  CHECK(ra == rb);
  CHECK(rab == ra);

  // iago3 with the flat second-order part reproduces Euler-Lagrange
  EhresmannConnection flat = conn;
  for (auto& mat2 : flat.gamma2)
    for (auto& row : mat2)
      for (auto& e : row) e = Expr();
  EhresmannResult res2 = ehresmann_field_eqs(jm, L, flat);
  // substitute jet variables by a prolongation and compare with EL residuals
  EquationSystem el = euler_lagrange(jm, L);
  for (int A2 = 1; A2 <= jm.k; ++A2) {
    // iago3 has second-order terms Gamma^B_{ji}; under the prolongation
    // substitution Gamma^B_{ji} -> d^2 phi / dx^i dx^j the system becomes EL
    Expr r = res2.iago3[A2 - 1];
    // restore symbolic second-order part, then substitute prolongation data
    EhresmannResult res3 = ehresmann_field_eqs(jm, L, conn);
    Expr rr = res3.iago3[A2 - 1];
    std::map<Sym, Expr> sub;
    std::vector<Expr> xargs = {Expr(sym("x1")), Expr(sym("x2"))};
    for (int B = 1; B <= jm.k; ++B)
      for (int j = 1; j <= jm.n; ++j)
        for (int i = 1; i <= jm.n; ++i)
          sub.emplace(sym("Gam_" + std::to_string(B) + "_" + std::to_string(j) + "_" +
                          std::to_string(i)),
                      tagged("phi" + std::to_string(B), {j, i}, xargs));
    rr = prolong(jm, rr.subs(sub));
    CHECK(are_equal(Expr(-1) * rr, el.residuals[A2 - 1]));
  }
}

TEST_CASE("multisymplectic residuals against EL at n=1, k=1") {
  BundleModel jm = build_model(ModelKind::jet, 1, 1);
  Expr L = Expr::parse("1/2*y_1_1^2 - V(y1)");
  ChpJet chp = chp_forms_jet(jm, L);
  EquationSystem el = euler_lagrange(jm, L);

  // prolongation map from the base into the jet chart
  std::vector<CoordInfo> bi = {{sym("x1"), Role::Base}};
  ChartPtr base = make_chart(bi);
  std::vector<Expr> xargs = {Expr(sym("x1"))};
  ChartMap prol{base, jm.chart,
                {Expr(sym("x1")), Expr::apply("phi1", xargs),
                 tagged("phi1", {1}, xargs)}};

  Form ry = pullback(prol, interior(VecField::basis(jm.chart, ix_y(jm, 1)), chp.Omega));
  CHECK(are_equal(ry.coeff_signed({0}), el.residuals[0]));
  Form rx = pullback(prol, interior(VecField::basis(jm.chart, ix_x(jm, 1)), chp.Omega));
  CHECK(are_equal(rx.coeff_signed({0}), Expr(-1) * tagged("phi1", {1}, xargs) * el.residuals[0]));
  Form rj = pullback(prol, interior(VecField::basis(jm.chart, ix_jet(jm, 1, 1)), chp.Omega));
  CHECK(rj.is_zero());
}

TEST_CASE("m-symplectic hamilton equations for the quadratic pull-up") {
  BundleModel am = build_model(ModelKind::adapted_frame, 2, 1);
  // L = 1/2 sum (u^A_i)^2 over the mixed block
  Expr L = Expr::parse("1/2*(u_3_1^2 + u_3_2^2)");
  MsympHamilton out = msymp_hamilton_eqs(am, L, rat(1, 2));
  CHECK(out.regularity.verdict());
  // on shell h = h^i_i = 1/2 sum p^2
  CHECK(are_equal(out.h_trace, Expr::parse("1/2*(p_1_1^2 + p_2_1^2)")));
  // ddw pair: dh/dp^i_A o u = d(y^A o u)/dx^i
  std::vector<Expr> x = {Expr(sym("x1")), Expr(sym("x2"))};
  REQUIRE(out.ddw_pair.residuals.size() == 3);
  CHECK(are_equal(out.ddw_pair.residuals[0],
                  Expr::apply("pbar_1_1", x) - tagged("gamma1", {1}, x)));
  // constant-u reduction of the second set has dp/dx + dh/dy o u per (k,A,j)
  CHECK(out.eq_set_2_constant_u.residuals.size() == 4);
  for (const auto& r : out.eq_set_2_constant_u.residuals) {
    // h is y-independent for this L: the reduced equations are just dp/dx
    for (const auto& fn : r.function_names())
      CHECK(fn.substr(0, 5) == "pbar_");
  }

  // linear Lagrangian: regularity error
  CHECK_THROWS_AS(msymp_hamilton_eqs(am, Expr::parse("u_3_1"), rat(1, 2)),
                  SingularError);
  // non-lifted Lagrangian: precondition error
  CHECK_THROWS_AS(msymp_hamilton_eqs(am, Expr::parse("u_1_1^2"), rat(1, 2)),
                  DomainError);
}

TEST_CASE("hamilton-jacobi: mechanics candidate solves the dDW reduction") {
  BundleModel am = build_model(ModelKind::adapted_frame, 1, 1);
  Expr L = Expr::parse("1/2*u_2_1^2");
  // S^1 = y^2/(2x), S^2 = y
  std::vector<Expr> S = {Expr::parse("y1^2/(2*x1)"), Expr::parse("y1")};
  // missing S functions
  CHECK_THROWS_AS(hj_residuals(am, L, {Expr(1)}, {}, rat(1)), DomainError);

  HjResult res = hj_residuals(am, L, S, {}, rat(1, 1));
  REQUIRE(res.ddw_reduction.residuals.size() == 1);  // n = 1: tau = 1 = 1/n
  CHECK(are_equal(res.ddw_reduction.residuals[0], Expr()));
  CHECK(res.ds_residuals.residuals.size() == 1);  // k*n
  CHECK(res.transversality.verdict());
}
