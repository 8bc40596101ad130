#include "doctest.h"
#include "fieldforms/models.hpp"

#include <random>

using namespace fieldforms;

TEST_CASE("tangent model: chart and canonical J") {
  BundleModel m = build_model(ModelKind::tangent, 2);
  CHECK(m.chart->describe() == "x1 x2 v1 v2");
  const Tensor11& J = m.tensor_family("J")[0];
  // J = d/dv^i (x) dx^i
  CHECK(are_equal(J.m[2][0], Expr(1)));
  CHECK(are_equal(J.m[3][1], Expr(1)));
  CHECK(tensor_compose(J, J).is_zero());
  CHECK_THROWS_AS(canonical_reeb(m), DomainError);  // name invalid for kind
}

TEST_CASE("k_tangent model: C and C^A_B") {
  BundleModel m = build_model(ModelKind::k_tangent, 1, 2);
  CHECK(m.chart->describe() == "x1 v_1_1 v_1_2");
  VecField C = canonical_C(m);
  CHECK(are_equal(C.comp[ix_v(m, 1, 1)], Expr(sym("v_1_1"))));
  CHECK(are_equal(C.comp[ix_v(m, 1, 2)], Expr(sym("v_1_2"))));
  // C^1_2 = v^i_2 d/dv^i_1
  VecField c12 = canonical_C_A_B(m, 1, 2);
  CHECK(are_equal(c12.comp[ix_v(m, 1, 1)], Expr(sym("v_1_2"))));
}

TEST_CASE("cotangent model: omega_0 = dx^i ^ dp_i = -d theta_0") {
  BundleModel m = build_model(ModelKind::cotangent, 2);
  const Form& omega = m.form_family("omega")[0];
  Form expect = Form::zero(m.chart, 2);
  expect.add_term({ix_x(m, 1), ix_pi(m, 1)}, Expr(1));
  expect.add_term({ix_x(m, 2), ix_pi(m, 2)}, Expr(1));
  CHECK(form_equal(omega, expect));
}

TEST_CASE("k_cosymplectic model: Reeb fields are d/dt^A") {
  BundleModel m = build_model(ModelKind::k_cosymplectic, 1, 2);
  auto reeb = m.field_family("reeb");
  REQUIRE(reeb.size() == 2);
  for (int a = 1; a <= 2; ++a) {
    for (int c = 0; c < m.dim(); ++c) {
      Expr want = (c == ix_t(m, a)) ? Expr(1) : Expr();
      CHECK(are_equal(reeb[a - 1].comp[c], want));
    }
  }
  // interior of the Reeb field with omega_A vanishes
  for (const auto& w : m.form_family("omega"))
    CHECK(interior(reeb[0], w).is_zero());
}

TEST_CASE("frame model: velocity/momentum inverse pair and J structure") {
  BundleModel m = build_model(ModelKind::frame, 2);
  // v^i_j pi^j_k = delta^i_k as expressions over the momentum chart
  ExprMat v = frame_velocity_block(m);
  for (int i = 1; i <= 2; ++i)
    for (int kk = 1; kk <= 2; ++kk) {
      Expr acc;
      for (int j = 1; j <= 2; ++j)
        acc += v[i - 1][j - 1] * Expr(m.chart->coord(ix_piblock(m, j, kk)));
      CHECK(are_equal(acc, Expr(i == kk ? 1 : 0)));
    }
  // chart pair is involutive
  ChartMap round = compose(*m.from_second, *m.to_second);
  for (int t = 0; t < m.dim(); ++t)
    CHECK(are_equal(round.exprs[t], Expr(m.chart->coord(t))));

  // J^i = E*^i_j (x) theta^j reproduces the corrected local expression
  //   J^i = - pi^i_s pi^r_b  d/dpi^r_s (x) dx^b
  for (int i = 1; i <= 2; ++i) {
    Tensor11 J = m.tensor_family("J")[i - 1];
    for (int r = 1; r <= 2; ++r)
      for (int s = 1; s <= 2; ++s)
        for (int b = 1; b <= 2; ++b) {
          Expr want = -Expr(m.chart->coord(ix_piblock(m, i, s))) *
                      Expr(m.chart->coord(ix_piblock(m, r, b)));
          CHECK(are_equal(J.m[ix_piblock(m, r, s)][ix_x(m, b)], want));
        }
  }
}

TEST_CASE("frame equivariance under a sample right translation") {
  BundleModel m = build_model(ModelKind::frame, 2);
  std::vector<std::vector<Rat>> g = {{rat(2), rat(1)}, {rat(0), rat(1)}};
  ChartMap phi = frame_right_action(m, g);
  // R_g^*(pi^j_k) = (g^{-1})^j_a pi^a_k is the map itself; check one entry:
  // ginv = ((1/2, -1/2), (0, 1))
  CHECK(are_equal(phi.exprs[m.chart->index_of(sym("pi_1_1"))],
                  Expr(rat(1, 2)) * Expr(sym("pi_1_1")) - Expr(rat(1, 2)) * Expr(sym("pi_2_1"))));

  ExprMat dphi = jacobian(phi);
  auto pulled = [&](const Tensor11& t) {
    ExprMat out = t.m;
    for (auto& row : out)
      for (auto& e : row) e = phi.pull_expr(e);
    return out;
  };
  std::vector<std::vector<Rat>> ginv = {{rat(1, 2), rat(-1, 2)}, {rat(0), rat(1)}};
  for (int i = 1; i <= 2; ++i) {
    ExprMat lhs = mat_mul(pulled(m.tensor_family("J")[i - 1]), dphi);
    ExprMat rhs(m.dim(), ExprVec(m.dim()));
    for (int a = 1; a <= 2; ++a) {
      ExprMat term = mat_mul(dphi, m.tensor_family("J")[a - 1].m);
      for (int r = 0; r < m.dim(); ++r)
        for (int c = 0; c < m.dim(); ++c)
          rhs[r][c] += Expr(ginv[i - 1][a - 1]) * term[r][c];
    }
    for (int r = 0; r < m.dim(); ++r)
      for (int c = 0; c < m.dim(); ++c) CHECK(are_equal(lhs[r][c], rhs[r][c]));
  }
}

TEST_CASE("adapted frame model: soldering, blocks, chart pair") {
  BundleModel m = build_model(ModelKind::adapted_frame, 2, 1);
  // theta^A = u^A_B(dy^B - u^B_j dx^j) with A = B = 3
  const VecValuedForm& sol = m.vvform("soldering");
  const Form& thA = sol.slots[2];
  Expr u33(sym("u_3_3")), u31(sym("u_3_1")), u32(sym("u_3_2"));
  CHECK(are_equal(thA.coeff_signed({ix_y(m, 1)}), u33));
  CHECK(are_equal(thA.coeff_signed({ix_x(m, 1)}), -u33 * u31));
  CHECK(are_equal(thA.coeff_signed({ix_x(m, 2)}), -u33 * u32));

  // u^A_j = v^A_i pi^i_j = -v^A_B pi^B_j as identities between the blocks
  ExprMat vmix = adapted_v_mixed(m);   // v^A_s over the Lagrangian chart
  ExprMat vfib = adapted_v_fiber(m);
  const ChartMap& to_pi = *m.to_second;
  auto pi_expr = [&](int a, int b) {
    int t = m.second_chart->index_of(sym(coord_name("pi", a, b)));
    return to_pi.exprs[t];  // expressed over the Lagrangian chart
  };
  for (int j = 1; j <= 2; ++j) {
    Expr u3j(m.chart->coord(ix_u(m, 3, j)));
    Expr via_base;
    for (int i = 1; i <= 2; ++i) via_base += vmix[0][i - 1] * pi_expr(i, j);
    CHECK(are_equal(u3j, via_base));
    Expr via_fiber = -vfib[0][0] * pi_expr(3, j);
    CHECK(are_equal(u3j, via_fiber));
  }

  // involutive chart pair
  ChartMap round = compose(*m.from_second, *m.to_second);
  for (int t = 0; t < m.dim(); ++t)
    CHECK(are_equal(round.exprs[t], Expr(m.chart->coord(t))));

  // the vertical endomorphism matches its local expression:
  //   E*^i_B (x) theta^B = u^i_j (dy^B - u^B_t dx^t) (x) d/du^B_j
  for (int i = 1; i <= 2; ++i) {
    Tensor11 T = adapted_vertical_endo(m, i);
    Tensor11 want = Tensor11::zero(m.chart);
    for (int j = 1; j <= 2; ++j) {
      int row = ix_u(m, 3, j);
      Expr uij(m.chart->coord(ix_u(m, i, j)));
      want.m[row][ix_y(m, 1)] += uij;
      for (int t = 1; t <= 2; ++t)
        want.m[row][ix_x(m, t)] -= uij * Expr(m.chart->coord(ix_u(m, 3, t)));
    }
    CHECK(tensor_equal(T, want));
  }
}

TEST_CASE("multisym_n2 model: Theta and Omega") {
  BundleModel m = build_model(ModelKind::multisym_n2, 2, 1);
  const Form& Om = m.form("Omega_E2");
  // Omega^2_E = -dp ^ d^2x - dp^i_A ^ dy^A ^ d^1x_i
  Form want = Expr(-1) * wedge(Form::d_coord(m.chart, ix_pscalar(m)), m.volume_form());
  for (int i = 1; i <= 2; ++i)
    want = want - wedge(Form::d_coord(m.chart, ix_pm(m, i, 1)),
                        wedge(Form::d_coord(m.chart, ix_y(m, 1)),
                              m.volume_contracted(i)));
  CHECK(form_equal(Om, want));
}

TEST_CASE("jet model: S_alpha example at n=k=1") {
  BundleModel m = build_model(ModelKind::jet, 1, 1);
  // alpha = dx: S_alpha = (dy - y_1_1 dx) (x) d/dy_1_1
  Tensor11 s = canonical_S_alpha(m, {Expr(1)});
  int row = ix_jet(m, 1, 1);
  CHECK(are_equal(s.m[row][ix_y(m, 1)], Expr(1)));
  CHECK(are_equal(s.m[row][ix_x(m, 1)], -Expr(sym("y_1_1"))));
  for (int c = 0; c < m.dim(); ++c)
    for (int r = 0; r < m.dim(); ++r)
      if (r != row) CHECK(s.m[r][c].is_zero());
}

TEST_CASE("rho projection pulls jet coordinates to the mixed block") {
  BundleModel a = build_model(ModelKind::adapted_frame, 2, 1);
  BundleModel j = build_model(ModelKind::jet, 2, 1);
  ChartMap rho = rho_projection(a, j);
  int t = j.chart->index_of(sym("y_1_2"));
  CHECK(are_equal(rho.exprs[t], Expr(sym("u_3_2"))));
}

TEST_CASE("legendre bundle carries the closed polysymplectic slots") {
  BundleModel m = build_model(ModelKind::legendre_bundle, 2, 2);
  const VecValuedForm& om = m.vvform("Omega_Pi");
  REQUIRE(om.slots.size() == 2);
  for (const auto& slot : om.slots) {
    CHECK(slot.degree == 4);
    CHECK(d(slot).is_zero());
  }
}

TEST_CASE("unsupported combinations are rejected") {
  CHECK_THROWS_AS(build_model(ModelKind::k_tangent, 1, 0), DomainError);
  CHECK_THROWS_AS(build_model(ModelKind::tangent, 0), DomainError);
  CHECK_THROWS_AS(build_model(ModelKind::jet, 2, 0), DomainError);
}

TEST_CASE("rk_k_tangent: stable structures") {
  BundleModel m = build_model(ModelKind::rk_k_tangent, 1, 1);
  CHECK(m.chart->describe() == "t_1 x1 v_1_1");
  Tensor11 Jh = canonical_Jhat(m, 1);
  // Jhat^1 = J^1 - C_1 (x) dt^1
  CHECK(are_equal(Jh.m[ix_v(m, 1, 1)][ix_x(m, 1)], Expr(1)));
  CHECK(are_equal(Jh.m[ix_v(m, 1, 1)][ix_t(m, 1)], -Expr(sym("v_1_1"))));
  Tensor11 Jt = canonical_Jtilde(m, 1);
  CHECK(are_equal(Jt.m[ix_t(m, 1)][ix_t(m, 1)], Expr(1)));
}
