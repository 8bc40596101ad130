#include "fieldforms/models.hpp"

#include <sstream>

namespace fieldforms {

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "tangent") return ModelKind::tangent;
  if (s == "k_tangent") return ModelKind::k_tangent;
  if (s == "cotangent") return ModelKind::cotangent;
  if (s == "k_cotangent") return ModelKind::k_cotangent;
  if (s == "k_cosymplectic") return ModelKind::k_cosymplectic;
  if (s == "frame") return ModelKind::frame;
  if (s == "adapted_frame") return ModelKind::adapted_frame;
  if (s == "jet") return ModelKind::jet;
  if (s == "rk_k_tangent") return ModelKind::rk_k_tangent;
  if (s == "multisym_n2") return ModelKind::multisym_n2;
  if (s == "jet_dual") return ModelKind::jet_dual;
  if (s == "legendre_bundle") return ModelKind::legendre_bundle;
  throw DomainError("unknown model kind: " + s);
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::tangent: return "tangent";
    case ModelKind::k_tangent: return "k_tangent";
    case ModelKind::cotangent: return "cotangent";
    case ModelKind::k_cotangent: return "k_cotangent";
    case ModelKind::k_cosymplectic: return "k_cosymplectic";
    case ModelKind::frame: return "frame";
    case ModelKind::adapted_frame: return "adapted_frame";
    case ModelKind::jet: return "jet";
    case ModelKind::rk_k_tangent: return "rk_k_tangent";
    case ModelKind::multisym_n2: return "multisym_n2";
    case ModelKind::jet_dual: return "jet_dual";
    case ModelKind::legendre_bundle: return "legendre_bundle";
  }
  throw DomainError("bad model kind");
}

std::string coord_name(const std::string& stem, int a, int b) {
  return stem + "_" + std::to_string(a) + "_" + std::to_string(b);
}

namespace {

Sym nm(const std::string& stem, int a, int b) { return sym(coord_name(stem, a, b)); }
Sym nm1(const std::string& stem, int a) { return sym(stem + std::to_string(a)); }
Sym nmt(int a) { return sym("t_" + std::to_string(a)); }

}  // namespace

int ix_x(const BundleModel& m, int i) { return m.chart->index_of(nm1("x", i)); }
int ix_y(const BundleModel& m, int A) { return m.chart->index_of(nm1("y", A)); }
int ix_t(const BundleModel& m, int A) { return m.chart->index_of(nmt(A)); }
int ix_v(const BundleModel& m, int i, int A) { return m.chart->index_of(nm("v", i, A)); }
int ix_p(const BundleModel& m, int A, int i) { return m.chart->index_of(nm("p", A, i)); }
int ix_pi(const BundleModel& m, int i) { return m.chart->index_of(nm1("p", i)); }
int ix_pm(const BundleModel& m, int i, int A) { return m.chart->index_of(nm("p", i, A)); }
int ix_jet(const BundleModel& m, int A, int i) { return m.chart->index_of(nm("y", A, i)); }
int ix_u(const BundleModel& m, int a, int b) { return m.chart->index_of(nm("u", a, b)); }
int ix_piblock(const BundleModel& m, int a, int b) {
  return m.chart->index_of(nm("pi", a, b));
}
int ix_pscalar(const BundleModel& m) { return m.chart->index_of(sym("p")); }

// ===========================================================================
// pack accessors

namespace {

template <typename M>
const typename M::mapped_type& pack_get(const M& m, const std::string& name,
                                        const char* what) {
  auto it = m.find(name);
  if (it == m.end())
    throw DomainError(std::string("no ") + what + " named '" + name +
                      "' on this model");
  return it->second;
}

}  // namespace

const Form& BundleModel::form(const std::string& name) const {
  return pack_get(pack.forms, name, "form");
}
const std::vector<Form>& BundleModel::form_family(const std::string& name) const {
  return pack_get(pack.form_families, name, "form family");
}
const std::vector<Tensor11>& BundleModel::tensor_family(const std::string& name) const {
  return pack_get(pack.tensor_families, name, "tensor family");
}
const VecField& BundleModel::field(const std::string& name) const {
  return pack_get(pack.fields, name, "vector field");
}
const std::vector<VecField>& BundleModel::field_family(const std::string& name) const {
  return pack_get(pack.field_families, name, "field family");
}
const VecValuedForm& BundleModel::vvform(const std::string& name) const {
  return pack_get(pack.vvforms, name, "vector-valued form");
}

Form BundleModel::volume_form() const {
  std::vector<int> idx;
  for (int i = 1; i <= n; ++i) idx.push_back(ix_x(*this, i));
  return Form::volume(chart, idx);
}

Form BundleModel::volume_contracted(int i) const {
  return interior(VecField::basis(chart, ix_x(*this, i)), volume_form());
}

std::string BundleModel::describe() const {
  std::ostringstream os;
  os << to_string(kind) << " n=" << n;
  if (k > 0) os << " k=" << k;
  os << "\n  chart: " << chart->describe() << "\n";
  if (second_chart) os << "  linked chart: " << second_chart->describe() << "\n";
  auto list = [&os](const char* label, const auto& m) {
    if (m.empty()) return;
    os << "  " << label << ":";
    for (const auto& [name, v] : m) os << " " << name;
    os << "\n";
  };
  list("forms", pack.forms);
  list("form families", pack.form_families);
  list("tensor families", pack.tensor_families);
  list("fields", pack.fields);
  list("field families", pack.field_families);
  list("vector-valued forms", pack.vvforms);
  return os.str();
}

// ===========================================================================
// chart builders

namespace {

ChartPtr chart_tangent(int n) {
  std::vector<CoordInfo> c;
  for (int i = 1; i <= n; ++i) c.push_back({nm1("x", i), Role::Base});
  for (int i = 1; i <= n; ++i) c.push_back({nm1("v", i), Role::Velocity, i, 0});
  return make_chart(std::move(c));
}

ChartPtr chart_k_tangent(int n, int k, bool with_time) {
  std::vector<CoordInfo> c;
  if (with_time)
    for (int a = 1; a <= k; ++a) c.push_back({nmt(a), Role::Time, a, 0});
  for (int i = 1; i <= n; ++i) c.push_back({nm1("x", i), Role::Base});
  for (int a = 1; a <= k; ++a)
    for (int i = 1; i <= n; ++i) c.push_back({nm("v", i, a), Role::Velocity, i, a});
  return make_chart(std::move(c));
}

ChartPtr chart_cotangent(int n) {
  std::vector<CoordInfo> c;
  for (int i = 1; i <= n; ++i) c.push_back({nm1("x", i), Role::Base});
  for (int i = 1; i <= n; ++i) c.push_back({nm1("p", i), Role::Momentum, i, 0});
  return make_chart(std::move(c));
}

ChartPtr chart_k_cotangent(int n, int k, bool with_time) {
  std::vector<CoordInfo> c;
  if (with_time)
    for (int a = 1; a <= k; ++a) c.push_back({nmt(a), Role::Time, a, 0});
  for (int i = 1; i <= n; ++i) c.push_back({nm1("x", i), Role::Base});
  for (int a = 1; a <= k; ++a)
    for (int i = 1; i <= n; ++i) c.push_back({nm("p", a, i), Role::Momentum, a, i});
  return make_chart(std::move(c));
}

ChartPtr chart_frame(int n, const std::string& stem) {
  std::vector<CoordInfo> c;
  for (int i = 1; i <= n; ++i) c.push_back({nm1("x", i), Role::Base});
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) c.push_back({nm(stem, i, j), Role::FrameBlock, i, j});
  return make_chart(std::move(c));
}

ChartPtr chart_adapted(int n, int k, const std::string& stem) {
  std::vector<CoordInfo> c;
  for (int i = 1; i <= n; ++i) c.push_back({nm1("x", i), Role::Base});
  for (int a = 1; a <= k; ++a) c.push_back({nm1("y", a), Role::Fiber, a, 0});
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) c.push_back({nm(stem, i, j), Role::FrameBlock, i, j});
  for (int a = n + 1; a <= n + k; ++a)
    for (int j = 1; j <= n; ++j) c.push_back({nm(stem, a, j), Role::FrameBlock, a, j});
  for (int a = n + 1; a <= n + k; ++a)
    for (int b = n + 1; b <= n + k; ++b)
      c.push_back({nm(stem, a, b), Role::FrameBlock, a, b});
  return make_chart(std::move(c));
}

ChartPtr chart_jet(int n, int k) {
  std::vector<CoordInfo> c;
  for (int i = 1; i <= n; ++i) c.push_back({nm1("x", i), Role::Base});
  for (int a = 1; a <= k; ++a) c.push_back({nm1("y", a), Role::Fiber, a, 0});
  for (int a = 1; a <= k; ++a)
    for (int i = 1; i <= n; ++i) c.push_back({nm("y", a, i), Role::Velocity, a, i});
  return make_chart(std::move(c));
}

ChartPtr chart_multisym(int n, int k, bool with_p) {
  std::vector<CoordInfo> c;
  for (int i = 1; i <= n; ++i) c.push_back({nm1("x", i), Role::Base});
  for (int a = 1; a <= k; ++a) c.push_back({nm1("y", a), Role::Fiber, a, 0});
  if (with_p) c.push_back({sym("p"), Role::Momentum, 0, 0});
  for (int i = 1; i <= n; ++i)
    for (int a = 1; a <= k; ++a) c.push_back({nm("p", i, a), Role::Momentum, i, a});
  return make_chart(std::move(c));
}

void require(bool cond, const char* msg) {
  if (!cond) throw DomainError(msg);
}

void validate(const Report& rep, const std::string& what) {
  if (!rep.verdict())
    throw Error("canonical pack failed its axiom check (" + what + "):\n" +
                rep.text());
}

}  // namespace

// ===========================================================================
// canonical structures

VecField canonical_C(const BundleModel& m) {
  if (m.kind != ModelKind::tangent && m.kind != ModelKind::k_tangent &&
      m.kind != ModelKind::rk_k_tangent)
    throw DomainError("C lives on (rk_)k_tangent models");
  VecField c = VecField::zero(m.chart);
  if (m.kind == ModelKind::tangent) {
    for (int i = 1; i <= m.n; ++i) {
      int vi = m.chart->index_of(nm1("v", i));
      c.comp[vi] = Expr(m.chart->coord(vi));
    }
    return c;
  }
  for (int a = 1; a <= m.k; ++a)
    for (int i = 1; i <= m.n; ++i) {
      int vi = ix_v(m, i, a);
      c.comp[vi] = Expr(m.chart->coord(vi));
    }
  return c;
}

VecField canonical_C_A_B(const BundleModel& m, int A, int B) {
  if (m.kind != ModelKind::k_tangent && m.kind != ModelKind::rk_k_tangent)
    throw DomainError("C^A_B lives on (rk_)k_tangent models");
  VecField c = VecField::zero(m.chart);
  for (int i = 1; i <= m.n; ++i)
    c.comp[ix_v(m, i, A)] = Expr(m.chart->coord(ix_v(m, i, B)));
  return c;
}

VecField canonical_C_A(const BundleModel& m, int A) { return canonical_C_A_B(m, A, A); }

Tensor11 canonical_S_alpha(const BundleModel& m, const ExprVec& alpha) {
  if (m.kind != ModelKind::jet) throw DomainError("S_alpha lives on the jet model");
  if (static_cast<int>(alpha.size()) != m.n)
    throw DomainError("S_alpha needs one coefficient per base coordinate");
  Tensor11 s = Tensor11::zero(m.chart);
  for (int A = 1; A <= m.k; ++A)
    for (int j = 1; j <= m.n; ++j) {
      int row = ix_jet(m, A, j);
      s.m[row][ix_y(m, A)] += alpha[j - 1];
      for (int i = 1; i <= m.n; ++i)
        s.m[row][ix_x(m, i)] -=
            alpha[j - 1] * Expr(m.chart->coord(ix_jet(m, A, i)));
    }
  return s;
}

VecValuedForm canonical_S_omega(const BundleModel& m) {
  if (m.kind != ModelKind::jet) throw DomainError("S_omega lives on the jet model");
  VecValuedForm v{m.chart, std::vector<Form>(m.chart->dim(),
                                             Form::zero(m.chart, m.n))};
  for (int A = 1; A <= m.k; ++A)
    for (int i = 1; i <= m.n; ++i) {
      Form contact = Form::d_coord(m.chart, ix_y(m, A));
      for (int j = 1; j <= m.n; ++j)
        contact = contact - Expr(m.chart->coord(ix_jet(m, A, j))) *
                                Form::d_coord(m.chart, ix_x(m, j));
      v.slots[ix_jet(m, A, i)] = wedge(contact, m.volume_contracted(i));
    }
  return v;
}

VecField frame_Estar(const BundleModel& m, int a, int b) {
  VecField e = VecField::zero(m.chart);
  if (m.kind == ModelKind::frame) {
    // E*^a_b = -pi^a_s d/dpi^b_s
    for (int s = 1; s <= m.n; ++s)
      e.comp[ix_piblock(m, b, s)] = -Expr(m.chart->coord(ix_piblock(m, a, s)));
    return e;
  }
  if (m.kind != ModelKind::adapted_frame)
    throw DomainError("fundamental fields live on frame models");
  bool a_base = a <= m.n, b_base = b <= m.n;
  if (a_base && b_base) {
    for (int s = 1; s <= m.n; ++s)
      e.comp[ix_u(m, b, s)] = -Expr(m.chart->coord(ix_u(m, a, s)));
    return e;
  }
  if (!a_base && !b_base) {
    for (int c = m.n + 1; c <= m.n + m.k; ++c)
      e.comp[ix_u(m, b, c)] = -Expr(m.chart->coord(ix_u(m, a, c)));
    return e;
  }
  if (a_base && !b_base) {
    // E*^i_A = u^i_s v^B_A d/du^B_s
    ExprMat vf = adapted_v_fiber(m);
    for (int B = m.n + 1; B <= m.n + m.k; ++B)
      for (int s = 1; s <= m.n; ++s)
        e.comp[ix_u(m, B, s)] = Expr(m.chart->coord(ix_u(m, a, s))) *
                                vf[B - m.n - 1][b - m.n - 1];
    return e;
  }
  throw DomainError("E*^A_j is not tangent to the adapted frame bundle");
}

namespace {

// theta slot on the frame / adapted frame primary chart
Form soldering_slot(const BundleModel& m, int a) {
  if (m.kind == ModelKind::frame) {
    Form t = Form::zero(m.chart, 1);
    for (int j = 1; j <= m.n; ++j)
      t.add_term({ix_x(m, j)}, Expr(m.chart->coord(ix_piblock(m, a, j))));
    return t;
  }
  if (a <= m.n) {
    Form t = Form::zero(m.chart, 1);
    for (int j = 1; j <= m.n; ++j)
      t.add_term({ix_x(m, j)}, Expr(m.chart->coord(ix_u(m, a, j))));
    return t;
  }
  // theta^A = u^A_B (dy^B - u^B_j dx^j)
  Form t = Form::zero(m.chart, 1);
  for (int B = m.n + 1; B <= m.n + m.k; ++B) {
    Expr uAB(m.chart->coord(ix_u(m, a, B)));
    t.add_term({ix_y(m, B - m.n)}, uAB);
    for (int j = 1; j <= m.n; ++j)
      t.add_term({ix_x(m, j)}, -uAB * Expr(m.chart->coord(ix_u(m, B, j))));
  }
  return t;
}

// tensor (sum_b E*^a_b (x) theta^b) over a supplied list of b-indices
Tensor11 estar_theta(const BundleModel& m, int a, const std::vector<int>& bs,
                     const Expr& scale) {
  Tensor11 out = Tensor11::zero(m.chart);
  for (int b : bs) {
    VecField e = frame_Estar(m, a, b);
    Form th = soldering_slot(m, b);
    for (int r = 0; r < m.chart->dim(); ++r) {
      if (e.comp[r].is_zero()) continue;
      for (const auto& [key, cf] : th.comp) out.m[r][key[0]] += scale * e.comp[r] * cf;
    }
  }
  return out;
}

}  // namespace

Tensor11 frame_J(const BundleModel& m, int i) {
  if (m.kind != ModelKind::frame) throw DomainError("frame_J lives on the frame model");
  std::vector<int> bs;
  for (int b = 1; b <= m.n; ++b) bs.push_back(b);
  return estar_theta(m, i, bs, Expr(1));
}

Tensor11 adapted_J(const BundleModel& m, int i) {
  if (m.kind != ModelKind::adapted_frame)
    throw DomainError("adapted_J lives on the adapted frame model");
  std::vector<int> bs;
  for (int b = 1; b <= m.n + m.k; ++b) bs.push_back(b);
  return estar_theta(m, i, bs, Expr(1));
}

Tensor11 adapted_vertical_endo(const BundleModel& m, int i) {
  if (m.kind != ModelKind::adapted_frame)
    throw DomainError("adapted_vertical_endo lives on the adapted frame model");
  std::vector<int> bs;
  for (int b = m.n + 1; b <= m.n + m.k; ++b) bs.push_back(b);
  return estar_theta(m, i, bs, Expr(1));
}

Tensor11 adapted_Jtilde(const BundleModel& m, int i) {
  if (m.kind != ModelKind::adapted_frame)
    throw DomainError("adapted_Jtilde lives on the adapted frame model");
  std::vector<int> base, fiber;
  for (int b = 1; b <= m.n; ++b) base.push_back(b);
  for (int b = m.n + 1; b <= m.n + m.k; ++b) fiber.push_back(b);
  return estar_theta(m, i, base, Expr(rat(1, m.n))) +
         estar_theta(m, i, fiber, Expr(1));
}

Tensor11 canonical_Jhat(const BundleModel& m, int A) {
  if (m.kind != ModelKind::rk_k_tangent)
    throw DomainError("Jhat lives on the rk_k_tangent model");
  Tensor11 t = Tensor11::zero(m.chart);
  for (int i = 1; i <= m.n; ++i) t.m[ix_v(m, i, A)][ix_x(m, i)] = Expr(1);
  // - C_A (x) dt^A
  for (int i = 1; i <= m.n; ++i)
    t.m[ix_v(m, i, A)][ix_t(m, A)] -= Expr(m.chart->coord(ix_v(m, i, A)));
  return t;
}

Tensor11 canonical_Jtilde(const BundleModel& m, int A) {
  if (m.kind != ModelKind::rk_k_tangent)
    throw DomainError("Jtilde lives on the rk_k_tangent model");
  Tensor11 t = Tensor11::zero(m.chart);
  t.m[ix_t(m, A)][ix_t(m, A)] = Expr(1);
  for (int i = 1; i <= m.n; ++i) t.m[ix_v(m, i, A)][ix_x(m, i)] = Expr(1);
  return t;
}

std::vector<VecField> canonical_reeb(const BundleModel& m) {
  if (m.kind != ModelKind::k_cosymplectic)
    throw DomainError("reeb fields live on the k_cosymplectic model");
  return reeb_fields(m.form_family("eta"), m.form_family("omega"));
}

// ===========================================================================
// block inverses

ExprMat frame_velocity_block(const BundleModel& m) {
  if (m.kind != ModelKind::frame) throw DomainError("frame model expected");
  ExprMat pi(m.n, ExprVec(m.n));
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j)
      pi[i - 1][j - 1] = Expr(m.chart->coord(ix_piblock(m, i, j)));
  return mat_inverse(pi);
}

ExprMat adapted_v_base(const BundleModel& m) {
  if (m.kind != ModelKind::adapted_frame) throw DomainError("adapted frame expected");
  ExprMat u(m.n, ExprVec(m.n));
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j)
      u[i - 1][j - 1] = Expr(m.chart->coord(ix_u(m, i, j)));
  return mat_inverse(u);
}

ExprMat adapted_v_fiber(const BundleModel& m) {
  if (m.kind != ModelKind::adapted_frame) throw DomainError("adapted frame expected");
  ExprMat u(m.k, ExprVec(m.k));
  for (int a = 1; a <= m.k; ++a)
    for (int b = 1; b <= m.k; ++b)
      u[a - 1][b - 1] = Expr(m.chart->coord(ix_u(m, m.n + a, m.n + b)));
  return mat_inverse(u);
}

ExprMat adapted_v_mixed(const BundleModel& m) {
  // v^A_s = u^A_j v^j_s
  ExprMat vb = adapted_v_base(m);
  ExprMat out(m.k, ExprVec(m.n));
  for (int a = 1; a <= m.k; ++a)
    for (int s = 1; s <= m.n; ++s) {
      Expr acc;
      for (int j = 1; j <= m.n; ++j)
        acc += Expr(m.chart->coord(ix_u(m, m.n + a, j))) * vb[j - 1][s - 1];
      out[a - 1][s - 1] = acc;
    }
  return out;
}

// ===========================================================================
// build_model

namespace {

void build_tangent(BundleModel& m) {
  m.chart = chart_tangent(m.n);
  Tensor11 J = Tensor11::zero(m.chart);
  std::vector<VecField> V;
  for (int i = 1; i <= m.n; ++i) {
    int vi = m.chart->index_of(nm1("v", i));
    J.m[vi][ix_x(m, i)] = Expr(1);
    V.push_back(VecField::basis(m.chart, vi));
  }
  m.pack.tensor_families["J"] = {J};
  m.pack.field_families["V"] = V;
  m.pack.fields["C"] = canonical_C(m);
  validate(check_tangent_like(m.pack.tensor_families["J"],
                              TangentKind::almost_tangent, m.n),
           "tangent axioms");
  validate(check_integrability(m.pack.tensor_families["J"]), "tangent integrability");
}

void build_k_tangent(BundleModel& m) {
  m.chart = chart_k_tangent(m.n, m.k, false);
  std::vector<Tensor11> J;
  std::vector<VecField> V;
  std::vector<std::vector<VecField>> VA;
  for (int a = 1; a <= m.k; ++a) {
    Tensor11 t = Tensor11::zero(m.chart);
    std::vector<VecField> va;
    for (int i = 1; i <= m.n; ++i) {
      t.m[ix_v(m, i, a)][ix_x(m, i)] = Expr(1);
      va.push_back(VecField::basis(m.chart, ix_v(m, i, a)));
      V.push_back(va.back());
    }
    J.push_back(std::move(t));
    VA.push_back(std::move(va));
  }
  m.pack.tensor_families["J"] = J;
  m.pack.field_families["V"] = V;
  for (int a = 1; a <= m.k; ++a)
    m.pack.field_families["V_" + std::to_string(a)] = VA[a - 1];
  m.pack.fields["C"] = canonical_C(m);
  validate(check_tangent_like(J, TangentKind::almost_k_tangent, m.n),
           "k-tangent axioms");
  validate(check_integrability(J), "k-tangent integrability");
}

void build_cotangent(BundleModel& m) {
  m.chart = chart_cotangent(m.n);
  Form theta = Form::zero(m.chart, 1);
  std::vector<VecField> V;
  for (int i = 1; i <= m.n; ++i) {
    theta.add_term({ix_x(m, i)}, Expr(m.chart->coord(ix_pi(m, i))));
    V.push_back(VecField::basis(m.chart, ix_pi(m, i)));
  }
  m.pack.form_families["theta"] = {theta};
  m.pack.form_families["omega"] = {Expr(-1) * d(theta)};
  m.pack.form_families["dtheta"] = {d(theta)};
  m.pack.field_families["V"] = V;
  SymplecticInput in{m.pack.form_families["omega"], {}, V, {}, m.n};
  validate(check_symplectic_like(in, SymplecticKind::almost_cotangent),
           "almost cotangent axioms");
  validate(check_integrability(in, SymplecticKind::almost_cotangent),
           "cotangent integrability");
}

void build_k_cotangent(BundleModel& m) {
  m.chart = chart_k_cotangent(m.n, m.k, false);
  std::vector<Form> theta, omega, dtheta;
  std::vector<VecField> V;
  std::vector<std::vector<VecField>> VA;
  for (int a = 1; a <= m.k; ++a) {
    Form t = Form::zero(m.chart, 1);
    std::vector<VecField> va;
    for (int i = 1; i <= m.n; ++i) {
      t.add_term({ix_x(m, i)}, Expr(m.chart->coord(ix_p(m, a, i))));
      va.push_back(VecField::basis(m.chart, ix_p(m, a, i)));
      V.push_back(va.back());
    }
    theta.push_back(t);
    omega.push_back(Expr(-1) * d(t));
    dtheta.push_back(d(t));
    VA.push_back(std::move(va));
  }
  m.pack.form_families["theta"] = theta;
  m.pack.form_families["omega"] = omega;
  m.pack.form_families["dtheta"] = dtheta;
  m.pack.field_families["V"] = V;
  for (int a = 1; a <= m.k; ++a)
    m.pack.field_families["V_" + std::to_string(a)] = VA[a - 1];
  SymplecticInput in{omega, {}, V, VA, m.n};
  validate(check_symplectic_like(in, SymplecticKind::k_symplectic),
           "k-symplectic axioms");
  validate(check_symplectic_like(in, SymplecticKind::almost_k_cotangent),
           "almost k-cotangent axioms");
  validate(check_integrability(in, SymplecticKind::almost_k_cotangent),
           "k-cotangent integrability");
}

void build_k_cosymplectic(BundleModel& m) {
  m.chart = chart_k_cotangent(m.n, m.k, true);
  std::vector<Form> eta, theta, omega;
  std::vector<VecField> V;
  for (int a = 1; a <= m.k; ++a) {
    eta.push_back(Form::d_coord(m.chart, ix_t(m, a)));
    Form t = Form::zero(m.chart, 1);
    for (int i = 1; i <= m.n; ++i) {
      t.add_term({ix_x(m, i)}, Expr(m.chart->coord(ix_p(m, a, i))));
      V.push_back(VecField::basis(m.chart, ix_p(m, a, i)));
    }
    theta.push_back(t);
    omega.push_back(Expr(-1) * d(t));
  }
  m.pack.form_families["eta"] = eta;
  m.pack.form_families["theta"] = theta;
  m.pack.form_families["omega"] = omega;
  m.pack.field_families["V"] = V;
  SymplecticInput in{omega, eta, V, {}, m.n};
  validate(check_symplectic_like(in, SymplecticKind::k_cosymplectic),
           "k-cosymplectic axioms");
  m.pack.field_families["reeb"] = reeb_fields(eta, omega);
}

void build_frame(BundleModel& m) {
  m.chart = chart_frame(m.n, "pi");
  m.second_chart = chart_frame(m.n, "v");

  std::vector<Form> theta_slots;
  std::vector<VecField> V;
  for (int i = 1; i <= m.n; ++i) theta_slots.push_back(soldering_slot(m, i));
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j)
      V.push_back(VecField::basis(m.chart, ix_piblock(m, i, j)));
  m.pack.vvforms["soldering"] = VecValuedForm{m.chart, theta_slots};
  std::vector<Form> omega, dtheta;
  std::vector<Tensor11> J;
  for (int i = 1; i <= m.n; ++i) {
    dtheta.push_back(d(theta_slots[i - 1]));
    omega.push_back(Expr(-1) * dtheta.back());
    J.push_back(frame_J(m, i));
  }
  m.pack.form_families["omega_minus_dtheta"] = omega;
  m.pack.form_families["dtheta"] = dtheta;
  m.pack.tensor_families["J"] = J;
  m.pack.field_families["V"] = V;

  // involutive chart pair: pi = v^{-1} and back
  ExprMat vinv = frame_velocity_block(m);  // over the momentum chart
  ExprVec to2, from2;
  for (int i = 1; i <= m.n; ++i) to2.push_back(Expr(m.chart->coord(ix_x(m, i))));
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j) to2.push_back(vinv[i - 1][j - 1]);
  m.to_second = ChartMap{m.chart, m.second_chart, to2};
  {
    ExprMat v(m.n, ExprVec(m.n));
    for (int i = 1; i <= m.n; ++i)
      for (int j = 1; j <= m.n; ++j)
        v[i - 1][j - 1] = Expr(m.second_chart->coord(
            m.second_chart->index_of(nm("v", i, j))));
    ExprMat pinv = mat_inverse(v);
    for (int i = 1; i <= m.n; ++i)
      from2.push_back(Expr(m.second_chart->coord(i - 1)));
    for (int i = 1; i <= m.n; ++i)
      for (int j = 1; j <= m.n; ++j) from2.push_back(pinv[i - 1][j - 1]);
    m.from_second = ChartMap{m.second_chart, m.chart, from2};
  }

  validate(check_tangent_like(J, TangentKind::almost_k_tangent, m.n),
           "frame n-tangent axioms");
  validate(check_integrability(J), "frame integrability");
  SymplecticInput ksym{omega, {}, V, {}, m.n};
  validate(check_symplectic_like(ksym, SymplecticKind::k_symplectic),
           "frame n-symplectic axioms");
  SymplecticInput poly{dtheta, {}, V, {}, m.n};
  validate(check_symplectic_like(poly, SymplecticKind::polysymplectic),
           "frame polysymplectic axioms");
}

void build_adapted(BundleModel& m) {
  m.chart = chart_adapted(m.n, m.k, "u");
  m.second_chart = chart_adapted(m.n, m.k, "pi");
  int mm = m.n + m.k;

  std::vector<Form> theta_slots;
  for (int a = 1; a <= mm; ++a) theta_slots.push_back(soldering_slot(m, a));
  m.pack.vvforms["soldering"] = VecValuedForm{m.chart, theta_slots};
  std::vector<Form> dtheta, omega;
  for (auto& t : theta_slots) {
    dtheta.push_back(d(t));
    omega.push_back(Expr(-1) * dtheta.back());
  }
  m.pack.form_families["dtheta"] = dtheta;
  m.pack.form_families["omega_minus_dtheta"] = omega;
  std::vector<Tensor11> J;
  for (int i = 1; i <= m.n; ++i) J.push_back(adapted_J(m, i));
  m.pack.tensor_families["J"] = J;
  std::vector<VecField> V;
  for (int a = 0; a < m.chart->dim(); ++a)
    if (m.chart->info(a).role == Role::FrameBlock)
      V.push_back(VecField::basis(m.chart, a));
  m.pack.field_families["V"] = V;

  // Lagrangian -> momentum chart: pi^i_j = u^i_j, pi^A_B = u^A_B,
  // pi^A_j = -u^A_B u^B_j
  ExprVec to2;
  for (int i = 1; i <= m.n; ++i) to2.push_back(Expr(m.chart->coord(ix_x(m, i))));
  for (int a = 1; a <= m.k; ++a) to2.push_back(Expr(m.chart->coord(ix_y(m, a))));
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j)
      to2.push_back(Expr(m.chart->coord(ix_u(m, i, j))));
  for (int a = m.n + 1; a <= mm; ++a)
    for (int j = 1; j <= m.n; ++j) {
      Expr acc;
      for (int b = m.n + 1; b <= mm; ++b)
        acc -= Expr(m.chart->coord(ix_u(m, a, b))) *
               Expr(m.chart->coord(ix_u(m, b, j)));
      to2.push_back(acc);
    }
  for (int a = m.n + 1; a <= mm; ++a)
    for (int b = m.n + 1; b <= mm; ++b)
      to2.push_back(Expr(m.chart->coord(ix_u(m, a, b))));
  m.to_second = ChartMap{m.chart, m.second_chart, to2};

  // momentum -> Lagrangian: u^A_j = -v^A_B pi^B_j with v = (pi^A_B)^{-1}
  {
    const ChartPtr& mc = m.second_chart;
    auto pi_at = [&](int a, int b) {
      return Expr(mc->coord(mc->index_of(nm("pi", a, b))));
    };
    ExprMat piff(m.k, ExprVec(m.k));
    for (int a = 1; a <= m.k; ++a)
      for (int b = 1; b <= m.k; ++b) piff[a - 1][b - 1] = pi_at(m.n + a, m.n + b);
    ExprMat vff = mat_inverse(piff);
    ExprVec from2;
    for (int i = 1; i <= m.n; ++i)
      from2.push_back(Expr(mc->coord(mc->index_of(nm1("x", i)))));
    for (int a = 1; a <= m.k; ++a)
      from2.push_back(Expr(mc->coord(mc->index_of(nm1("y", a)))));
    for (int i = 1; i <= m.n; ++i)
      for (int j = 1; j <= m.n; ++j) from2.push_back(pi_at(i, j));
    for (int a = m.n + 1; a <= mm; ++a)
      for (int j = 1; j <= m.n; ++j) {
        Expr acc;
        for (int b = m.n + 1; b <= mm; ++b)
          acc -= vff[a - m.n - 1][b - m.n - 1] * pi_at(b, j);
        from2.push_back(acc);
      }
    for (int a = m.n + 1; a <= mm; ++a)
      for (int b = m.n + 1; b <= mm; ++b) from2.push_back(pi_at(a, b));
    m.from_second = ChartMap{m.second_chart, m.chart, from2};
  }

  SymplecticInput poly{dtheta, {}, V, {}, m.n};
  validate(check_symplectic_like(poly, SymplecticKind::polysymplectic),
           "adapted frame m-symplectic axioms");
  for (size_t i = 0; i < J.size(); ++i)
    for (size_t j = 0; j < J.size(); ++j)
      if (!tensor_compose(J[i], J[j]).is_zero())
        throw Error("adapted frame J^i o J^j != 0");
}

void build_jet(BundleModel& m) {
  m.chart = chart_jet(m.n, m.k);
  // canonical contact form, tangent-valued with vertical values
  VecValuedForm contact{m.chart,
                        std::vector<Form>(m.chart->dim(), Form::zero(m.chart, 1))};
  for (int a = 1; a <= m.k; ++a) {
    Form c = Form::d_coord(m.chart, ix_y(m, a));
    for (int j = 1; j <= m.n; ++j)
      c.add_term({ix_x(m, j)}, -Expr(m.chart->coord(ix_jet(m, a, j))));
    contact.slots[ix_y(m, a)] = c;
  }
  m.pack.vvforms["contact"] = contact;
  std::vector<VecField> V;
  for (int a = 1; a <= m.k; ++a)
    for (int i = 1; i <= m.n; ++i)
      V.push_back(VecField::basis(m.chart, ix_jet(m, a, i)));
  m.pack.field_families["V"] = V;
}

void build_rk_k_tangent(BundleModel& m) {
  m.chart = chart_k_tangent(m.n, m.k, true);
  std::vector<Form> eta;
  std::vector<Tensor11> J, Jhat, Jtilde;
  std::vector<VecField> V;
  for (int a = 1; a <= m.k; ++a) {
    eta.push_back(Form::d_coord(m.chart, ix_t(m, a)));
    Tensor11 t = Tensor11::zero(m.chart);
    for (int i = 1; i <= m.n; ++i) {
      t.m[ix_v(m, i, a)][ix_x(m, i)] = Expr(1);
      V.push_back(VecField::basis(m.chart, ix_v(m, i, a)));
    }
    J.push_back(t);
    Jhat.push_back(canonical_Jhat(m, a));
    Jtilde.push_back(canonical_Jtilde(m, a));
  }
  m.pack.form_families["eta"] = eta;
  m.pack.tensor_families["J"] = J;
  m.pack.tensor_families["Jhat"] = Jhat;
  m.pack.tensor_families["Jtilde"] = Jtilde;
  m.pack.field_families["V"] = V;
  m.pack.fields["C"] = canonical_C(m);
}

void build_multisym(BundleModel& m) {
  m.chart = chart_multisym(m.n, m.k, true);
  Form theta = Expr(m.chart->coord(ix_pscalar(m))) * m.volume_form();
  for (int i = 1; i <= m.n; ++i)
    for (int a = 1; a <= m.k; ++a) {
      Form dy = Form::d_coord(m.chart, ix_y(m, a));
      theta = theta + Expr(m.chart->coord(ix_pm(m, i, a))) *
                          wedge(dy, m.volume_contracted(i));
    }
  m.pack.forms["Theta_E2"] = theta;
  m.pack.forms["Omega_E2"] = Expr(-1) * d(theta);
  SymplecticInput in{{m.pack.forms["Omega_E2"]}, {}, {}, {}, m.n};
  validate(check_symplectic_like(in, SymplecticKind::multisymplectic),
           "multisymplectic axioms");
}

void build_jet_dual(BundleModel& m) { m.chart = chart_multisym(m.n, m.k, false); }

void build_legendre_bundle(BundleModel& m) {
  m.chart = chart_multisym(m.n, m.k, false);
  VecValuedForm omega{m.chart, {}};
  for (int i = 1; i <= m.n; ++i) {
    Form slot = Form::zero(m.chart, m.n + 2);
    for (int a = 1; a <= m.k; ++a) {
      Form w = wedge(Form::d_coord(m.chart, ix_pm(m, i, a)),
                     wedge(Form::d_coord(m.chart, ix_y(m, a)), m.volume_form()));
      slot = slot + w;
    }
    omega.slots.push_back(slot);
    if (!d(slot).is_zero()) throw Error("polysymplectic slot is not closed");
  }
  m.pack.vvforms["Omega_Pi"] = omega;
}

}  // namespace

BundleModel build_model(ModelKind kind, int n, int k) {
  require(n >= 1, "base dimension must be >= 1");
  BundleModel m;
  m.kind = kind;
  m.n = n;
  m.k = k;
  switch (kind) {
    case ModelKind::tangent:
      m.k = 0;
      build_tangent(m);
      break;
    case ModelKind::k_tangent:
      require(k >= 1, "k_tangent needs k >= 1");
      build_k_tangent(m);
      break;
    case ModelKind::cotangent:
      m.k = 0;
      build_cotangent(m);
      break;
    case ModelKind::k_cotangent:
      require(k >= 1, "k_cotangent needs k >= 1");
      build_k_cotangent(m);
      break;
    case ModelKind::k_cosymplectic:
      require(k >= 1, "k_cosymplectic needs k >= 1");
      build_k_cosymplectic(m);
      break;
    case ModelKind::frame:
      m.k = 0;
      build_frame(m);
      break;
    case ModelKind::adapted_frame:
      require(k >= 1, "adapted_frame needs k >= 1");
      build_adapted(m);
      break;
    case ModelKind::jet:
      require(k >= 1, "jet needs k >= 1");
      build_jet(m);
      break;
    case ModelKind::rk_k_tangent:
      require(k >= 1, "rk_k_tangent needs k >= 1");
      build_rk_k_tangent(m);
      break;
    case ModelKind::multisym_n2:
      require(k >= 1, "multisym_n2 needs k >= 1");
      build_multisym(m);
      break;
    case ModelKind::jet_dual:
      require(k >= 1, "jet_dual needs k >= 1");
      build_jet_dual(m);
      break;
    case ModelKind::legendre_bundle:
      require(k >= 1, "legendre_bundle needs k >= 1");
      build_legendre_bundle(m);
      break;
  }
  return m;
}

// ===========================================================================
// projections, inclusions, actions

ChartMap projection_to_base(const BundleModel& m) {
  std::vector<CoordInfo> base;
  for (int i = 1; i <= m.n; ++i) base.push_back({nm1("x", i), Role::Base});
  ChartPtr bc = make_chart(std::move(base));
  ExprVec exprs;
  for (int i = 1; i <= m.n; ++i) exprs.push_back(Expr(m.chart->coord(ix_x(m, i))));
  return ChartMap{m.chart, bc, exprs};
}

ChartMap projection_to_E(const BundleModel& m) {
  if (m.k == 0) throw DomainError("model has no fiber coordinates");
  std::vector<CoordInfo> e;
  for (int i = 1; i <= m.n; ++i) e.push_back({nm1("x", i), Role::Base});
  for (int a = 1; a <= m.k; ++a) e.push_back({nm1("y", a), Role::Fiber, a, 0});
  ChartPtr ec = make_chart(std::move(e));
  ExprVec exprs;
  for (int i = 1; i <= m.n; ++i) exprs.push_back(Expr(m.chart->coord(ix_x(m, i))));
  for (int a = 1; a <= m.k; ++a) exprs.push_back(Expr(m.chart->coord(ix_y(m, a))));
  return ChartMap{m.chart, ec, exprs};
}

ChartMap mu_projection(const BundleModel& multisym, const BundleModel& jetdual) {
  if (multisym.kind != ModelKind::multisym_n2 || jetdual.kind != ModelKind::jet_dual)
    throw DomainError("mu maps multisym_n2 onto jet_dual");
  ExprVec exprs;
  for (int t = 0; t < jetdual.chart->dim(); ++t) {
    Sym s = jetdual.chart->coord(t);
    exprs.push_back(Expr(multisym.chart->coord(multisym.chart->index_of(s))));
  }
  return ChartMap{multisym.chart, jetdual.chart, exprs};
}

ChartMap rho_projection(const BundleModel& adapted, const BundleModel& jet) {
  if (adapted.kind != ModelKind::adapted_frame || jet.kind != ModelKind::jet)
    throw DomainError("rho maps adapted_frame onto jet");
  if (adapted.n != jet.n || adapted.k != jet.k)
    throw DomainError("rho: dimension mismatch");
  ExprVec exprs;
  for (int i = 1; i <= jet.n; ++i)
    exprs.push_back(Expr(adapted.chart->coord(ix_x(adapted, i))));
  for (int a = 1; a <= jet.k; ++a)
    exprs.push_back(Expr(adapted.chart->coord(ix_y(adapted, a))));
  for (int a = 1; a <= jet.k; ++a)
    for (int i = 1; i <= jet.n; ++i)
      exprs.push_back(Expr(adapted.chart->coord(ix_u(adapted, adapted.n + a, i))));
  return ChartMap{adapted.chart, jet.chart, exprs};
}

ChartMap inclusion_tangent(const BundleModel& tangent, const BundleModel& ktangent,
                           int A) {
  if (tangent.kind != ModelKind::tangent || ktangent.kind != ModelKind::k_tangent)
    throw DomainError("inclusion maps tangent into k_tangent");
  ExprVec exprs;
  for (int t = 0; t < ktangent.chart->dim(); ++t) {
    const CoordInfo& info = ktangent.chart->info(t);
    if (info.role == Role::Base) {
      exprs.push_back(Expr(tangent.chart->coord(
          tangent.chart->index_of(info.s))));
    } else if (info.j == A) {
      exprs.push_back(Expr(tangent.chart->coord(
          tangent.chart->index_of(nm1("v", info.i)))));
    } else {
      exprs.push_back(Expr());
    }
  }
  return ChartMap{tangent.chart, ktangent.chart, exprs};
}

ChartMap projection_k_tangent(const BundleModel& ktangent, const BundleModel& tangent,
                              const std::vector<Rat>& c) {
  if (static_cast<int>(c.size()) != ktangent.k)
    throw DomainError("need one coefficient per copy");
  ExprVec exprs;
  for (int i = 1; i <= tangent.n; ++i)
    exprs.push_back(Expr(ktangent.chart->coord(ix_x(ktangent, i))));
  for (int i = 1; i <= tangent.n; ++i) {
    Expr acc;
    for (int b = 1; b <= ktangent.k; ++b)
      acc += Expr(c[b - 1]) * Expr(ktangent.chart->coord(ix_v(ktangent, i, b)));
    exprs.push_back(acc);
  }
  return ChartMap{ktangent.chart, tangent.chart, exprs};
}

namespace {

std::vector<std::vector<Rat>> rat_inverse(const std::vector<std::vector<Rat>>& g) {
  size_t nn = g.size();
  std::vector<std::vector<Rat>> m = g, inv(nn, std::vector<Rat>(nn, Rat(0)));
  for (size_t i = 0; i < nn; ++i) inv[i][i] = 1;
  for (size_t col = 0; col < nn; ++col) {
    size_t piv = col;
    while (piv < nn && m[piv][col] == 0) ++piv;
    if (piv == nn) throw SingularError("singular group element");
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    Rat p = m[col][col];
    for (size_t c2 = 0; c2 < nn; ++c2) {
      m[col][c2] /= p;
      inv[col][c2] /= p;
    }
    for (size_t r = 0; r < nn; ++r) {
      if (r == col || m[r][col] == 0) continue;
      Rat f = m[r][col];
      for (size_t c2 = 0; c2 < nn; ++c2) {
        m[r][c2] -= f * m[col][c2];
        inv[r][c2] -= f * inv[col][c2];
      }
    }
  }
  return inv;
}

}  // namespace

ChartMap frame_right_action(const BundleModel& m,
                            const std::vector<std::vector<Rat>>& g) {
  if (m.kind != ModelKind::frame) throw DomainError("frame model expected");
  if (static_cast<int>(g.size()) != m.n) throw DomainError("group element has wrong size");
  auto ginv = rat_inverse(g);
  ExprVec exprs;
  for (int i = 1; i <= m.n; ++i) exprs.push_back(Expr(m.chart->coord(ix_x(m, i))));
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j) {
      Expr acc;
      for (int a = 1; a <= m.n; ++a)
        acc += Expr(ginv[i - 1][a - 1]) *
               Expr(m.chart->coord(ix_piblock(m, a, j)));
      exprs.push_back(acc);
    }
  return ChartMap{m.chart, m.chart, exprs};
}

ChartMap adapted_right_action(const BundleModel& m,
                              const std::vector<std::vector<Rat>>& A,
                              const std::vector<std::vector<Rat>>& B,
                              const std::vector<std::vector<Rat>>& C) {
  if (m.kind != ModelKind::adapted_frame) throw DomainError("adapted frame expected");
  int n = m.n, k = m.k, mm = n + k;
  // assemble g = (A 0 / C B) and act on the velocity blocks: v(u g) = v g,
  // then translate to Lagrangian coordinates
  std::vector<std::vector<Rat>> g(mm, std::vector<Rat>(mm, Rat(0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g[i][j] = A[i][j];
  for (int a = 0; a < k; ++a)
    for (int j = 0; j < n; ++j) g[n + a][j] = C[a][j];
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) g[n + a][n + b] = B[a][b];
  auto ginv = rat_inverse(g);

  // u-block transformation in Lagrangian coordinates (derived from
  // pi(u g) = g^{-1} pi(u) on the momentum chart):
  //   u_base(g)   = Ainv u_base            (rows i)
  //   u_ff(g)     = Binv (C u_base... ) -- handled through the momentum chart
  // Work through the involutive pair to stay honest.
  const ChartMap& to_pi = *m.to_second;
  const ChartMap& to_u = *m.from_second;
  // momentum-side action: pi(u g) = g^{-1} pi(u), block lower triangular
  const ChartPtr& mc = m.second_chart;
  auto pi_at = [&](int a, int b) {
    return Expr(mc->coord(mc->index_of(nm("pi", a, b))));
  };
  ExprVec pi_exprs;
  for (int i = 1; i <= n; ++i)
    pi_exprs.push_back(Expr(mc->coord(mc->index_of(nm1("x", i)))));
  for (int a = 1; a <= k; ++a)
    pi_exprs.push_back(Expr(mc->coord(mc->index_of(nm1("y", a)))));
  auto push_rows = [&](int row_lo, int row_hi, int col_lo, int col_hi) {
    for (int a = row_lo; a <= row_hi; ++a)
      for (int b = col_lo; b <= col_hi; ++b) {
        Expr acc;
        for (int c2 = 1; c2 <= mm; ++c2) {
          Rat gi = ginv[a - 1][c2 - 1];
          if (gi == 0) continue;
          if (c2 <= n && b > n) continue;  // pi^i_B = 0 on the adapted bundle
          acc += Expr(gi) * pi_at(c2, b);
        }
        pi_exprs.push_back(acc);
      }
  };
  push_rows(1, n, 1, n);
  push_rows(n + 1, mm, 1, n);
  push_rows(n + 1, mm, n + 1, mm);
  ChartMap pi_action{mc, mc, pi_exprs};
  return compose(to_u, compose(pi_action, to_pi));
}

}  // namespace fieldforms
