#include "doctest.h"
#include "fieldforms/axioms.hpp"
#include "fieldforms/models.hpp"

using namespace fieldforms;

TEST_CASE("duplicated J fails the image intersection condition") {
  BundleModel m = build_model(ModelKind::k_tangent, 1, 2);
  const auto& J = m.tensor_family("J");
  std::vector<Tensor11> dup = {J[0], J[0]};
  Report rep = check_tangent_like(dup, TangentKind::almost_k_tangent, 1);
  CHECK_FALSE(rep.verdict());
  bool found = false;
  for (const auto& c : rep.conditions)
    if (c.label.find("/\\") != std::string::npos && !c.ok) found = true;
  CHECK(found);
}

TEST_CASE("frame J family passes the n-tangent axioms at n=2") {
  BundleModel m = build_model(ModelKind::frame, 2);
  Report rep = check_tangent_like(m.tensor_family("J"),
                                  TangentKind::almost_k_tangent, 2);
  CHECK(rep.verdict());
}

TEST_CASE("kernel witness: omega = dx^dp on a 3-coordinate chart") {
  auto c = make_chart({{sym("x"), Role::Base},
                       {sym("p"), Role::Momentum},
                       {sym("s"), Role::Base}});
  Form omega = Form::zero(c, 2);
  omega.add_term({0, 1}, Expr(1));
  SymplecticInput in{{omega}, {}, {VecField::basis(c, 1)}, {}, 1};
  Report rep = check_symplectic_like(in, SymplecticKind::almost_cotangent);
  CHECK_FALSE(rep.verdict());  // d/ds sits in the kernel
}

TEST_CASE("canonical k-symplectic pack on the 1,2 k-cotangent model passes") {
  BundleModel m = build_model(ModelKind::k_cotangent, 1, 2);
  SymplecticInput in{m.form_family("omega"), {}, m.field_family("V"), {}, m.n};
  CHECK(check_symplectic_like(in, SymplecticKind::k_symplectic).verdict());
  // setting V = (+) V_A from the almost k-cotangent pack stays k-symplectic
  std::vector<VecField> V;
  for (int a = 1; a <= 2; ++a)
    for (const auto& f : m.field_family("V_" + std::to_string(a))) V.push_back(f);
  SymplecticInput in2{m.form_family("omega"), {}, V, {}, m.n};
  CHECK(check_symplectic_like(in2, SymplecticKind::k_symplectic).verdict());
}

TEST_CASE("perturbed almost tangent structure fails integrability with a witness") {
  auto c = make_chart({{sym("x1"), Role::Base},
                       {sym("x2"), Role::Base},
                       {sym("w1"), Role::Fiber},
                       {sym("w2"), Role::Fiber}});
  Tensor11 Jp = Tensor11::zero(c);
  Jp.m[2][0] = Expr(1);
  Jp.m[3][1] = Expr(sym("w1"));
  Report rep = check_integrability({Jp});
  CHECK_FALSE(rep.verdict());
  CHECK_FALSE(rep.conditions[0].witness.empty());
}

TEST_CASE("reeb solve: canonical pack and a degenerate one") {
  BundleModel m = build_model(ModelKind::k_cosymplectic, 1, 1);
  auto fields = reeb_fields(m.form_family("eta"), m.form_family("omega"));
  REQUIRE(fields.size() == 1);
  CHECK(are_equal(fields[0].comp[ix_t(m, 1)], Expr(1)));
  // degenerate: drop the omega family entirely -> non-unique system
  CHECK_THROWS_AS(reeb_fields(m.form_family("eta"), {}), SingularError);
}

TEST_CASE("report serialization carries labels and witnesses") {
  Report r;
  r.add("(i) something", true);
  r.add("(ii) other", false, "x+1");
  std::string t = r.text();
  CHECK(t.find("[pass] (i)") != std::string::npos);
  CHECK(t.find("[FAIL] (ii)") != std::string::npos);
  CHECK(t.find("witness: x+1") != std::string::npos);
  CHECK(t.find("verdict: fail") != std::string::npos);
}
