#include "fieldforms/fieldeq.hpp"

#include <algorithm>
#include <sstream>

namespace fieldforms {

std::string EquationSystem::text() const {
  std::ostringstream os;
  os << "# " << tag << "\n# unknowns:";
  for (const auto& u : unknowns) os << " " << u;
  os << " over";
  for (const auto& s : base) os << " " << s.name();
  os << "\n";
  for (const auto& r : residuals) os << r.str() << "\n";
  return os.str();
}

KVectorField EvolutionSystem::particular() const {
  KVectorField out;
  out.fields.assign(copies, VecField::zero(chart_));
  for (size_t j = 0; j < unknown_ix.size(); ++j)
    out.fields[unknown_ix[j].first].comp[unknown_ix[j].second] =
        solution.particular[j];
  return out;
}

// ===========================================================================
// Lagrangian data

LagrangeForms lagrange_forms(const BundleModel& m, const Expr& L) {
  if (m.kind != ModelKind::k_tangent && m.kind != ModelKind::rk_k_tangent)
    throw DomainError("lagrange_forms expects a (rk_)k_tangent model");
  LagrangeForms out;
  const auto& J = m.tensor_family(m.kind == ModelKind::k_tangent ? "J" : "Jtilde");
  for (int a = 1; a <= m.k; ++a) {
    Form beta = vertical_derivation(J[a - 1], L);
    if (m.kind == ModelKind::rk_k_tangent) {
      // subtract xi_A(L) dt^A for the canonical Reeb field d/dt^A
      Expr lt = L.diff(m.chart->coord(ix_t(m, a)));
      beta = beta - lt * Form::d_coord(m.chart, ix_t(m, a));
    }
    out.omega.push_back(Expr(-1) * d(beta));
    out.beta.push_back(std::move(beta));
  }
  out.energy = apply_vf(canonical_C(m), L) - L;
  return out;
}

ExprMat velocity_hessian(const BundleModel& m, const Expr& L) {
  int nk = m.n * m.k;
  ExprMat h(nk, ExprVec(nk));
  int row = 0;
  for (int a = 1; a <= m.k; ++a)
    for (int i = 1; i <= m.n; ++i, ++row) {
      int col = 0;
      Expr dL = L.diff(m.chart->coord(ix_v(m, i, a)));
      for (int b = 1; b <= m.k; ++b)
        for (int j = 1; j <= m.n; ++j, ++col)
          h[row][col] = dL.diff(m.chart->coord(ix_v(m, j, b)));
    }
  return h;
}

Expr prolong(const BundleModel& m, const Expr& e) {
  std::map<Sym, Expr> sub;
  if (m.kind == ModelKind::k_tangent || m.kind == ModelKind::rk_k_tangent) {
    std::vector<Expr> targs;
    for (int a = 1; a <= m.k; ++a) targs.push_back(Expr(sym("t_" + std::to_string(a))));
    if (m.kind == ModelKind::rk_k_tangent)
      for (int a = 1; a <= m.k; ++a)
        sub.emplace(m.chart->coord(ix_t(m, a)), targs[a - 1]);
    for (int i = 1; i <= m.n; ++i) {
      std::string name = "phi" + std::to_string(i);
      sub.emplace(m.chart->coord(ix_x(m, i)), Expr::apply(name, targs));
      for (int a = 1; a <= m.k; ++a)
        sub.emplace(m.chart->coord(ix_v(m, i, a)),
                    Expr::apply_tagged(name, {a}, targs));
    }
    return e.subs(sub);
  }
  if (m.kind == ModelKind::jet) {
    std::vector<Expr> xargs;
    for (int i = 1; i <= m.n; ++i) xargs.push_back(Expr(m.chart->coord(ix_x(m, i))));
    for (int a = 1; a <= m.k; ++a) {
      std::string name = "phi" + std::to_string(a);
      sub.emplace(m.chart->coord(ix_y(m, a)), Expr::apply(name, xargs));
      for (int i = 1; i <= m.n; ++i)
        sub.emplace(m.chart->coord(ix_jet(m, a, i)),
                    Expr::apply_tagged(name, {i}, xargs));
    }
    return e.subs(sub);
  }
  throw DomainError("prolong expects a k_tangent or jet model");
}

EquationSystem euler_lagrange(const BundleModel& m, const Expr& L) {
  EquationSystem sys;
  if (m.kind == ModelKind::k_tangent || m.kind == ModelKind::rk_k_tangent) {
    sys.tag = "euler_lagrange(k_tangent)";
    for (int a = 1; a <= m.k; ++a) sys.base.push_back(sym("t_" + std::to_string(a)));
    for (int i = 1; i <= m.n; ++i) {
      sys.unknowns.push_back("phi" + std::to_string(i));
      Expr r;
      for (int a = 1; a <= m.k; ++a) {
        Expr p = prolong(m, L.diff(m.chart->coord(ix_v(m, i, a))));
        r += p.diff(sys.base[a - 1]);
      }
      r -= prolong(m, L.diff(m.chart->coord(ix_x(m, i))));
      sys.residuals.push_back(std::move(r));
    }
    return sys;
  }
  if (m.kind == ModelKind::jet) {
    sys.tag = "euler_lagrange(jet)";
    for (int i = 1; i <= m.n; ++i) sys.base.push_back(m.chart->coord(ix_x(m, i)));
    for (int a = 1; a <= m.k; ++a) {
      sys.unknowns.push_back("phi" + std::to_string(a));
      Expr r;
      for (int i = 1; i <= m.n; ++i) {
        Expr p = prolong(m, L.diff(m.chart->coord(ix_jet(m, a, i))));
        r += p.diff(sys.base[i - 1]);
      }
      r -= prolong(m, L.diff(m.chart->coord(ix_y(m, a))));
      sys.residuals.push_back(std::move(r));
    }
    return sys;
  }
  throw DomainError("euler_lagrange expects a k_tangent or jet model");
}

// ===========================================================================
// evolution systems

namespace {

// linear extraction of affine expressions in the given parameter symbols
void affine_rows(const std::vector<Expr>& exprs, const std::vector<Sym>& params,
                 ExprMat& mat, ExprVec& rhs) {
  std::map<Sym, Expr> zero;
  for (Sym s : params) zero.emplace(s, Expr());
  for (const auto& e : exprs) {
    ExprVec row;
    for (Sym s : params) row.push_back(e.diff(s));
    mat.push_back(std::move(row));
    rhs.push_back(-e.subs(zero));
  }
}

}  // namespace

EvolutionSystem evolution_system(const BundleModel& m, const Expr& f,
                                 EvolutionMode mode) {
  const ChartPtr& chart = m.chart;
  int k = 0;
  std::vector<Form> omegas, etas;
  std::vector<VecField> reeb;
  Expr target;  // H or E_L
  switch (mode) {
    case EvolutionMode::ksym_ham: {
      if (m.kind != ModelKind::k_cotangent)
        throw DomainError("ksym_ham expects the k_cotangent model");
      k = m.k;
      omegas = m.form_family("omega");
      target = f;
      break;
    }
    case EvolutionMode::kcosym_ham: {
      if (m.kind != ModelKind::k_cosymplectic)
        throw DomainError("kcosym_ham expects the k_cosymplectic model");
      k = m.k;
      omegas = m.form_family("omega");
      etas = m.form_family("eta");
      reeb = m.field_family("reeb");
      target = f;
      break;
    }
    case EvolutionMode::lagrangian: {
      if (m.kind != ModelKind::k_tangent)
        throw DomainError("lagrangian mode expects the k_tangent model");
      k = m.k;
      LagrangeForms lf = lagrange_forms(m, f);
      omegas = lf.omega;
      target = lf.energy;
      break;
    }
    case EvolutionMode::kcosym_lagrangian: {
      if (m.kind != ModelKind::rk_k_tangent)
        throw DomainError("kcosym_lagrangian expects the rk_k_tangent model");
      k = m.k;
      LagrangeForms lf = lagrange_forms(m, f);
      omegas = lf.omega;
      for (int a = 1; a <= k; ++a) etas.push_back(Form::d_coord(chart, ix_t(m, a)));
      reeb = reeb_fields(etas, omegas);  // throws SingularError when L is singular
      target = lf.energy;
      break;
    }
  }

  EvolutionSystem out;
  out.chart_ = chart;
  out.copies = k;
  std::vector<Sym> params;
  std::vector<VecField> X(k, VecField::zero(chart));
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < chart->dim(); ++c) {
      Sym s = sym("XC_" + std::to_string(a + 1) + "_" + std::to_string(c));
      params.push_back(s);
      out.unknown_ix.emplace_back(a, c);
      X[a].comp[c] = Expr(s);
    }

  Form sharp = Form::zero(chart, 1);
  for (int a = 0; a < k; ++a) {
    sharp = sharp + interior(X[a], omegas[a]);
    if (!etas.empty()) {
      Expr ea = evaluate(etas[a], {X[a]});
      sharp = sharp + ea * etas[a];
    }
  }
  Form rhs_form = Form::zero(chart, 1);
  {
    for (int c = 0; c < chart->dim(); ++c) {
      Expr dc = target.diff(chart->coord(c));
      if (!dc.is_zero()) rhs_form.add_term({c}, dc);
    }
    for (size_t a = 0; a < reeb.size(); ++a)
      rhs_form = rhs_form + (Expr(1) - apply_vf(reeb[a], target)) * etas[a];
  }
  Form total = sharp - rhs_form;

  std::vector<Expr> eqs;
  for (int c = 0; c < chart->dim(); ++c) eqs.push_back(total.coeff_signed({c}));
  if (!etas.empty()) {
    // dt^A(X_B) = delta_AB
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        eqs.push_back(evaluate(etas[a], {X[b]}) - Expr(a == b ? 1 : 0));
  }

  ExprMat mat;
  ExprVec rhs;
  affine_rows(eqs, params, mat, rhs);
  auto sol = solve_linear(mat, rhs);
  if (!sol) throw SingularError("evolution system is inconsistent (singular data)");
  out.solution = *sol;

  if (mode == EvolutionMode::ksym_ham || mode == EvolutionMode::kcosym_ham) {
    EquationSystem pde;
    pde.tag = mode == EvolutionMode::ksym_ham ? "hamilton(k_symplectic)"
                                              : "hamilton(k_cosymplectic)";
    std::vector<Expr> targs;
    std::vector<Sym> tsyms;
    for (int a = 1; a <= k; ++a) {
      tsyms.push_back(sym("t_" + std::to_string(a)));
      targs.push_back(Expr(tsyms.back()));
    }
    pde.base = tsyms;
    std::map<Sym, Expr> sub;
    if (mode == EvolutionMode::kcosym_ham)
      for (int a = 1; a <= k; ++a)
        sub.emplace(chart->coord(ix_t(m, a)), targs[a - 1]);
    for (int i = 1; i <= m.n; ++i) {
      pde.unknowns.push_back("sigma" + std::to_string(i));
      sub.emplace(chart->coord(ix_x(m, i)),
                  Expr::apply("sigma" + std::to_string(i), targs));
    }
    for (int a = 1; a <= k; ++a)
      for (int i = 1; i <= m.n; ++i) {
        std::string fname = "sigma_" + std::to_string(a) + "_" + std::to_string(i);
        pde.unknowns.push_back(fname);
        sub.emplace(chart->coord(ix_p(m, a, i)), Expr::apply(fname, targs));
      }
    for (int i = 1; i <= m.n; ++i) {
      Expr r = f.diff(chart->coord(ix_x(m, i))).subs(sub);
      for (int a = 1; a <= k; ++a) {
        std::string fname = "sigma_" + std::to_string(a) + "_" + std::to_string(i);
        r += Expr::apply(fname, targs).diff(tsyms[a - 1]);
      }
      pde.residuals.push_back(r);
    }
    for (int a = 1; a <= k; ++a)
      for (int i = 1; i <= m.n; ++i) {
        Expr r = f.diff(chart->coord(ix_p(m, a, i))).subs(sub) -
                 Expr::apply("sigma" + std::to_string(i), targs).diff(tsyms[a - 1]);
        pde.residuals.push_back(r);
      }
    out.pde = std::move(pde);
  }
  return out;
}

Report sopde_check(const BundleModel& m, const KVectorField& x) {
  Report rep;
  if (m.kind == ModelKind::k_tangent) {
    const auto& J = m.tensor_family("J");
    for (int a = 1; a <= m.k; ++a) {
      VecField lhs = tensor_apply(J[a - 1], x.fields[a - 1]);
      VecField ca = canonical_C_A(m, a);
      VecField diff = lhs - ca;
      bool ok = true;
      std::string witness;
      for (int c = 0; c < m.dim() && ok; ++c)
        if (!are_equal(diff.comp[c], Expr())) {
          ok = false;
          witness = diff.comp[c].str();
        }
      rep.add("J^" + std::to_string(a) + "(xi_" + std::to_string(a) + ") = C_" +
                  std::to_string(a),
              ok, witness);
    }
    if (rep.verdict()) {
      for (int a = 1; a <= m.k; ++a)
        for (int b = 1; b <= m.k; ++b)
          for (int i = 1; i <= m.n; ++i)
            rep.add("(xi_" + std::to_string(a) + ")^" + std::to_string(i) + "_" +
                        std::to_string(b) + " = " +
                        x.fields[a - 1].comp[ix_v(m, i, b)].str(),
                    true);
    }
    return rep;
  }
  if (m.kind == ModelKind::rk_k_tangent) {
    for (int a = 1; a <= m.k; ++a) {
      Tensor11 jh = canonical_Jhat(m, a);
      VecField lhs = tensor_apply(jh, x.fields[a - 1]);
      bool ok = true;
      std::string witness;
      for (int c = 0; c < m.dim() && ok; ++c)
        if (!are_equal(lhs.comp[c], Expr())) {
          ok = false;
          witness = lhs.comp[c].str();
        }
      rep.add("Jhat^" + std::to_string(a) + "(xi_" + std::to_string(a) + ") = 0", ok,
              witness);
    }
    for (int a = 1; a <= m.k; ++a)
      for (int b = 1; b <= m.k; ++b) {
        Expr v = x.fields[b - 1].comp[ix_t(m, a)] - Expr(a == b ? 1 : 0);
        rep.add("dt^" + std::to_string(a) + "(xi_" + std::to_string(b) + ") = delta",
                are_equal(v, Expr()), v.str());
      }
    return rep;
  }
  throw DomainError("sopde_check expects a (rk_)k_tangent model");
}

// ===========================================================================
// CHP forms

ChpJet chp_forms_jet(const BundleModel& jet, const Expr& lagr) {
  if (jet.kind != ModelKind::jet) throw DomainError("chp_forms_jet expects a jet model");
  VecValuedForm somega = canonical_S_omega(jet);
  ChpJet out;
  out.Theta = lagr * jet.volume_form() + contract_gradient(lagr, somega);
  out.Omega = Expr(-1) * d(out.Theta);
  return out;
}

bool is_lifted(const BundleModel& adapted, const Expr& L) {
  for (int i = 1; i <= adapted.n; ++i)
    for (int j = 1; j <= adapted.n; ++j)
      if (!are_equal(apply_vf(frame_Estar(adapted, i, j), L), Expr())) return false;
  for (int a = adapted.n + 1; a <= adapted.n + adapted.k; ++a)
    for (int b = adapted.n + 1; b <= adapted.n + adapted.k; ++b)
      if (!are_equal(apply_vf(frame_Estar(adapted, a, b), L), Expr())) return false;
  return true;
}

void require_lifted(const BundleModel& adapted, const Expr& L) {
  if (!is_lifted(adapted, L))
    throw DomainError(
        "Lagrangian is not lifted: E*^i_j(L) = 0 and E*^A_B(L) = 0 must hold");
}

// S~_omega in its local expression: (dy^A - u^A_t dx^t) ^ (d/dx^i _| vol)
// with values along d/du^A_i
static VecValuedForm stilde_omega_local(const BundleModel& m) {
  VecValuedForm v{m.chart,
                  std::vector<Form>(m.chart->dim(), Form::zero(m.chart, m.n))};
  for (int a = m.n + 1; a <= m.n + m.k; ++a)
    for (int i = 1; i <= m.n; ++i) {
      Form contact = Form::d_coord(m.chart, ix_y(m, a - m.n));
      for (int t = 1; t <= m.n; ++t)
        contact.add_term({ix_x(m, t)}, -Expr(m.chart->coord(ix_u(m, a, t))));
      v.slots[ix_u(m, a, i)] = wedge(contact, m.volume_contracted(i));
    }
  return v;
}

ChpAdapted chp_forms_adapted(const BundleModel& m, const Expr& L, const Rat& tau) {
  if (m.kind != ModelKind::adapted_frame)
    throw DomainError("chp_forms_adapted expects the adapted frame model");
  require_lifted(m, L);
  ChpAdapted out;
  const VecValuedForm& sol = m.vvform("soldering");
  Expr tauL = Expr(tau) * L;
  for (int i = 1; i <= m.n; ++i) {
    Form t = tauL * sol.slots[i - 1];
    for (int a = m.n + 1; a <= m.n + m.k; ++a) {
      Expr coeff = apply_vf(frame_Estar(m, i, a), L);
      t = t + coeff * sol.slots[a - 1];
    }
    out.theta_base.push_back(std::move(t));
  }
  for (int a = m.n + 1; a <= m.n + m.k; ++a)
    out.theta_fiber.push_back(sol.slots[a - 1]);

  out.theta_m = L * m.volume_form() + contract_gradient(L, stilde_omega_local(m));

  out.h.assign(m.n, ExprVec(m.n));
  out.H.assign(m.n, ExprVec(m.n));
  out.P_base.assign(m.n, ExprVec(m.k));
  out.P_mixed.assign(m.k, ExprVec(m.n));
  out.P_fiber.assign(m.k, ExprVec(m.k));
  auto u = [&](int a, int b) { return Expr(m.chart->coord(ix_u(m, a, b))); };
  auto p = [&](int kk, int B) { return L.diff(m.chart->coord(ix_u(m, B, kk))); };
  for (int kk = 1; kk <= m.n; ++kk)
    for (int j = 1; j <= m.n; ++j) {
      Expr acc;
      for (int B = m.n + 1; B <= m.n + m.k; ++B) acc += p(kk, B) * u(B, j);
      if (kk == j) acc -= tauL;
      out.h[kk - 1][j - 1] = acc;
    }
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j) {
      Expr acc;
      for (int kk = 1; kk <= m.n; ++kk) acc += u(i, kk) * out.h[kk - 1][j - 1];
      out.H[i - 1][j - 1] = acc;
    }
  for (int i = 1; i <= m.n; ++i)
    for (int B = 1; B <= m.k; ++B) {
      Expr acc;
      for (int kk = 1; kk <= m.n; ++kk) acc += u(i, kk) * p(kk, m.n + B);
      out.P_base[i - 1][B - 1] = acc;
    }
  for (int A = 1; A <= m.k; ++A)
    for (int j = 1; j <= m.n; ++j) {
      Expr acc;
      for (int B = m.n + 1; B <= m.n + m.k; ++B) acc -= u(m.n + A, B) * u(B, j);
      out.P_mixed[A - 1][j - 1] = acc;
    }
  for (int A = 1; A <= m.k; ++A)
    for (int B = 1; B <= m.k; ++B) out.P_fiber[A - 1][B - 1] = u(m.n + A, m.n + B);
  return out;
}

// ===========================================================================
// de Donder-Weyl Hamilton equations

DdwHamilton ddw_hamilton(const BundleModel& m, const Expr& hhat) {
  if (m.kind != ModelKind::jet_dual)
    throw DomainError("ddw_hamilton expects the jet_dual model");
  DdwHamilton out;
  out.Theta = Expr(-1) * hhat * m.volume_form();
  for (int i = 1; i <= m.n; ++i)
    for (int a = 1; a <= m.k; ++a)
      out.Theta = out.Theta + Expr(m.chart->coord(ix_pm(m, i, a))) *
                                  wedge(Form::d_coord(m.chart, ix_y(m, a)),
                                        m.volume_contracted(i));
  out.Omega = Expr(-1) * d(out.Theta);

  EquationSystem sys;
  sys.tag = "ddw_hamilton";
  std::vector<Expr> xargs;
  for (int i = 1; i <= m.n; ++i) {
    sys.base.push_back(m.chart->coord(ix_x(m, i)));
    xargs.push_back(Expr(sys.base.back()));
  }
  std::map<Sym, Expr> sub;
  for (int a = 1; a <= m.k; ++a) {
    std::string fname = "gamma" + std::to_string(a);
    sys.unknowns.push_back(fname);
    sub.emplace(m.chart->coord(ix_y(m, a)), Expr::apply(fname, xargs));
  }
  for (int i = 1; i <= m.n; ++i)
    for (int a = 1; a <= m.k; ++a) {
      std::string fname = "gamma_" + std::to_string(i) + "_" + std::to_string(a);
      sys.unknowns.push_back(fname);
      sub.emplace(m.chart->coord(ix_pm(m, i, a)), Expr::apply(fname, xargs));
    }
  for (int a = 1; a <= m.k; ++a)
    for (int i = 1; i <= m.n; ++i) {
      Expr r = Expr::apply("gamma" + std::to_string(a), xargs).diff(sys.base[i - 1]) +
               hhat.diff(m.chart->coord(ix_pm(m, i, a))).subs(sub);
      sys.residuals.push_back(r);
    }
  for (int a = 1; a <= m.k; ++a) {
    Expr r;
    for (int i = 1; i <= m.n; ++i)
      r += Expr::apply("gamma_" + std::to_string(i) + "_" + std::to_string(a), xargs)
               .diff(sys.base[i - 1]);
    r -= hhat.diff(m.chart->coord(ix_y(m, a))).subs(sub);
    sys.residuals.push_back(r);
  }
  out.eqs = std::move(sys);
  return out;
}

// ===========================================================================
// Ehresmann connections

EhresmannConnection EhresmannConnection::symbols(const BundleModel& jet) {
  EhresmannConnection c;
  c.gamma1.assign(jet.k, ExprVec(jet.n));
  for (int a = 1; a <= jet.k; ++a)
    for (int i = 1; i <= jet.n; ++i)
      c.gamma1[a - 1][i - 1] =
          Expr(sym("Gam_" + std::to_string(a) + "_" + std::to_string(i)));
  c.gamma2.assign(jet.k, ExprMat(jet.n, ExprVec(jet.n)));
  for (int a = 1; a <= jet.k; ++a)
    for (int j = 1; j <= jet.n; ++j)
      for (int i = 1; i <= jet.n; ++i)
        c.gamma2[a - 1][j - 1][i - 1] = Expr(sym("Gam_" + std::to_string(a) + "_" +
                                                 std::to_string(j) + "_" +
                                                 std::to_string(i)));
  return c;
}

Form ehresmann_contraction(const BundleModel& jet, const Expr& lagr,
                           const EhresmannConnection& conn) {
  ChpJet chp = chp_forms_jet(jet, lagr);
  Tensor11 h = Tensor11::zero(jet.chart);
  for (int i = 1; i <= jet.n; ++i) {
    int xi = ix_x(jet, i);
    h.m[xi][xi] = Expr(1);
    for (int a = 1; a <= jet.k; ++a) {
      h.m[ix_y(jet, a)][xi] = conn.gamma1[a - 1][i - 1];
      for (int j = 1; j <= jet.n; ++j)
        h.m[ix_jet(jet, a, j)][xi] = conn.gamma2[a - 1][j - 1][i - 1];
    }
  }
  return insert_tensor(h, chp.Omega) - Expr(jet.n - 1) * chp.Omega;
}

EhresmannResult ehresmann_field_eqs(const BundleModel& jet, const Expr& lagr,
                                    const EhresmannConnection& conn) {
  if (jet.kind != ModelKind::jet)
    throw DomainError("ehresmann_field_eqs expects a jet model");
  EhresmannResult out;
  auto y = [&](int a) { return jet.chart->coord(ix_y(jet, a)); };
  auto yj = [&](int a, int i) { return jet.chart->coord(ix_jet(jet, a, i)); };
  auto x = [&](int i) { return jet.chart->coord(ix_x(jet, i)); };

  for (int A = 1; A <= jet.k; ++A) {
    Expr r = lagr.diff(y(A));
    for (int i = 1; i <= jet.n; ++i) {
      Expr dLi = lagr.diff(yj(A, i));
      r -= dLi.diff(x(i));
      for (int B = 1; B <= jet.k; ++B) {
        r -= conn.gamma1[B - 1][i - 1] * dLi.diff(y(B));
        for (int j = 1; j <= jet.n; ++j)
          r -= conn.gamma2[B - 1][i - 1][j - 1] * dLi.diff(yj(B, j));
        r += (conn.gamma1[B - 1][i - 1] - Expr(yj(B, i))) *
             lagr.diff(y(A)).diff(yj(B, i));
      }
    }
    out.iago1.push_back(r);
  }
  for (int A = 1; A <= jet.k; ++A)
    for (int i = 1; i <= jet.n; ++i) {
      Expr r;
      for (int B = 1; B <= jet.k; ++B)
        for (int j = 1; j <= jet.n; ++j)
          r += (conn.gamma1[B - 1][j - 1] - Expr(yj(B, j))) *
               lagr.diff(yj(A, i)).diff(yj(B, j));
      out.iago2.push_back(r);
    }

  // does iago2 force Gamma^B_j = y^B_j?  solve for symbolic Gamma^B_j
  {
    std::vector<Sym> params;
    std::vector<Expr> eqs;
    for (int B = 1; B <= jet.k; ++B)
      for (int j = 1; j <= jet.n; ++j)
        params.push_back(sym("GSOL_" + std::to_string(B) + "_" + std::to_string(j)));
    for (int A = 1; A <= jet.k; ++A)
      for (int i = 1; i <= jet.n; ++i) {
        Expr r;
        int idx = 0;
        for (int B = 1; B <= jet.k; ++B)
          for (int j = 1; j <= jet.n; ++j, ++idx)
            r += (Expr(params[idx]) - Expr(yj(B, j))) *
                 lagr.diff(yj(A, i)).diff(yj(B, j));
        eqs.push_back(r);
      }
    ExprMat mat;
    ExprVec rhs;
    affine_rows(eqs, params, mat, rhs);
    auto sol = solve_linear(mat, rhs);
    out.regular_reduction = sol.has_value() && sol->nullspace.empty();
    if (out.regular_reduction) {
      int idx = 0;
      for (int B = 1; B <= jet.k; ++B)
        for (int j = 1; j <= jet.n; ++j, ++idx)
          if (!are_equal(sol->particular[idx], Expr(yj(B, j))))
            out.regular_reduction = false;
    }
  }

  for (int A = 1; A <= jet.k; ++A) {
    Expr r = lagr.diff(y(A));
    for (int i = 1; i <= jet.n; ++i) {
      Expr dLi = lagr.diff(yj(A, i));
      r -= dLi.diff(x(i));
      for (int B = 1; B <= jet.k; ++B) {
        r -= Expr(yj(B, i)) * dLi.diff(y(B));
        for (int j = 1; j <= jet.n; ++j)
          r -= conn.gamma2[B - 1][i - 1][j - 1] * dLi.diff(yj(B, j));
      }
    }
    out.iago3.push_back(r);
  }
  return out;
}

// ===========================================================================
// m-symplectic Hamilton equations

namespace {

// invert the momentum map p^i_A = dL/du^A_i for a lifted Lagrangian that is
// (at most) quadratic in the mixed block; p entries are arbitrary expressions
ExprMat invert_momenta(const BundleModel& m, const Expr& L, const ExprMat& p) {
  int n = m.n, k = m.k, nk = n * k;
  std::vector<Sym> mixed;
  for (int A = n + 1; A <= n + k; ++A)
    for (int i = 1; i <= n; ++i) mixed.push_back(m.chart->coord(ix_u(m, A, i)));
  ExprMat hess(nk, ExprVec(nk));
  for (int r = 0; r < nk; ++r) {
    Expr dr = L.diff(mixed[r]);
    for (int c = 0; c < nk; ++c) {
      hess[r][c] = dr.diff(mixed[c]);
      for (Sym s : mixed)
        if (hess[r][c].depends_on(s))
          throw SingularError(
              "momentum coordinate change needs a Lagrangian quadratic in the "
              "mixed block");
    }
  }
  Expr det = mat_det(hess);
  if (det.is_zero()) throw SingularError("non-regular Lagrangian: singular Hessian");
  ExprMat hinv = mat_inverse(hess);
  std::map<Sym, Expr> zero;
  for (Sym s : mixed) zero.emplace(s, Expr());
  ExprVec g0;
  for (int r = 0; r < nk; ++r) g0.push_back(L.diff(mixed[r]).subs(zero));
  ExprMat out(k, ExprVec(n));
  for (int r = 0; r < nk; ++r) {
    Expr acc;
    int c = 0;
    for (int A = 0; A < k; ++A)
      for (int i = 0; i < n; ++i, ++c) acc += hinv[r][c] * (p[i][A] - g0[c]);
    out[r / n][r % n] = acc;
  }
  return out;
}

}  // namespace

MsympHamilton msymp_hamilton_eqs(const BundleModel& m, const Expr& L,
                                 const Rat& tau) {
  if (m.kind != ModelKind::adapted_frame)
    throw DomainError("msymp_hamilton_eqs expects the adapted frame model");
  require_lifted(m, L);
  if (L.is_zero()) throw DomainError("the Lagrangian must be non-zero");
  MsympHamilton out;

  {
    int nk = m.n * m.k;
    ExprMat mm(nk, ExprVec(nk));
    int r = 0;
    for (int i = 1; i <= m.n; ++i)
      for (int A = m.n + 1; A <= m.n + m.k; ++A, ++r) {
        VecField Ei = frame_Estar(m, i, A);
        int c = 0;
        for (int j = 1; j <= m.n; ++j)
          for (int B = m.n + 1; B <= m.n + m.k; ++B, ++c) {
            VecField Ej = frame_Estar(m, j, B);
            mm[r][c] = apply_vf(Ei, apply_vf(Ej, L));
          }
      }
    Expr det = mat_det(mm);
    out.regularity.add("det(E*^i_A o E*^j_B(L)) != 0", !det.is_zero(), det.str());
    if (det.is_zero())
      throw SingularError("non-regular Lagrangian: coordinate change unavailable");
  }

  // barred chart (x, y, u_i_j, p_i_A, u_A_B)
  std::vector<CoordInfo> bc;
  for (int i = 1; i <= m.n; ++i) bc.push_back({sym("x" + std::to_string(i)), Role::Base});
  for (int a = 1; a <= m.k; ++a)
    bc.push_back({sym("y" + std::to_string(a)), Role::Fiber, a, 0});
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j)
      bc.push_back({sym(coord_name("u", i, j)), Role::FrameBlock, i, j});
  for (int i = 1; i <= m.n; ++i)
    for (int a = 1; a <= m.k; ++a)
      bc.push_back({sym(coord_name("p", i, a)), Role::Momentum, i, a});
  for (int a = m.n + 1; a <= m.n + m.k; ++a)
    for (int b = m.n + 1; b <= m.n + m.k; ++b)
      bc.push_back({sym(coord_name("u", a, b)), Role::FrameBlock, a, b});
  out.barred = make_chart(std::move(bc));

  ExprMat pmat(m.n, ExprVec(m.k));
  for (int i = 1; i <= m.n; ++i)
    for (int a = 1; a <= m.k; ++a)
      pmat[i - 1][a - 1] = Expr(sym(coord_name("p", i, a)));
  out.u_of_p = invert_momenta(m, L, pmat);

  std::map<Sym, Expr> usub;
  for (int A = 1; A <= m.k; ++A)
    for (int i = 1; i <= m.n; ++i)
      usub.emplace(m.chart->coord(ix_u(m, m.n + A, i)), out.u_of_p[A - 1][i - 1]);
  Expr Lbar = L.subs(usub);
  out.h.assign(m.n, ExprVec(m.n));
  for (int kk = 1; kk <= m.n; ++kk)
    for (int j = 1; j <= m.n; ++j) {
      Expr acc;
      for (int B = 1; B <= m.k; ++B)
        acc += pmat[kk - 1][B - 1] * out.u_of_p[B - 1][j - 1];
      if (kk == j) acc -= Expr(tau) * Lbar;
      out.h[kk - 1][j - 1] = acc;
    }
  out.h_trace = Expr();
  for (int i = 0; i < m.n; ++i) out.h_trace += out.h[i][i];

  std::vector<Expr> xargs;
  std::vector<Sym> xsyms;
  for (int i = 1; i <= m.n; ++i) {
    xsyms.push_back(sym("x" + std::to_string(i)));
    xargs.push_back(Expr(xsyms.back()));
  }
  std::map<Sym, Expr> sec;
  std::vector<std::string> unknowns;
  for (int a = 1; a <= m.k; ++a) {
    std::string fname = "gamma" + std::to_string(a);
    unknowns.push_back(fname);
    sec.emplace(sym("y" + std::to_string(a)), Expr::apply(fname, xargs));
  }
  for (int i = 1; i <= m.n; ++i)
    for (int a = 1; a <= m.k; ++a) {
      std::string fname = "pbar_" + std::to_string(i) + "_" + std::to_string(a);
      unknowns.push_back(fname);
      sec.emplace(sym(coord_name("p", i, a)), Expr::apply(fname, xargs));
    }
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j) {
      std::string fname = "ubar_" + std::to_string(i) + "_" + std::to_string(j);
      unknowns.push_back(fname);
      sec.emplace(sym(coord_name("u", i, j)), Expr::apply(fname, xargs));
    }
  auto on_section = [&](const Expr& e) { return e.subs(sec); };

  out.eq_set_1.tag = "msymp_hamilton_eq_set_1";
  out.eq_set_1.base = xsyms;
  out.eq_set_1.unknowns = unknowns;
  for (int i = 1; i <= m.n; ++i)
    for (int A = 1; A <= m.k; ++A)
      for (int j = 1; j <= m.n; ++j)
        for (int kk = 1; kk <= m.n; ++kk) {
          Expr r = on_section(out.h[j - 1][kk - 1].diff(sym(coord_name("p", i, A))));
          if (j == i)
            r -= Expr::apply("gamma" + std::to_string(A), xargs).diff(xsyms[kk - 1]);
          out.eq_set_1.residuals.push_back(r);
        }

  out.eq_set_2.tag = "msymp_hamilton_eq_set_2";
  out.eq_set_2.base = xsyms;
  out.eq_set_2.unknowns = unknowns;
  for (int i = 1; i <= m.n; ++i)
    for (int A = 1; A <= m.k; ++A)
      for (int j = 1; j <= m.n; ++j) {
        Expr lhs;
        for (int kk = 1; kk <= m.n; ++kk)
          lhs += Expr::apply("ubar_" + std::to_string(i) + "_" + std::to_string(kk),
                             xargs) *
                 Expr::apply("pbar_" + std::to_string(kk) + "_" + std::to_string(A),
                             xargs);
        Expr r = lhs.diff(xsyms[j - 1]);
        for (int kk = 1; kk <= m.n; ++kk)
          r += Expr::apply("ubar_" + std::to_string(i) + "_" + std::to_string(kk),
                           xargs) *
               on_section(out.h[kk - 1][j - 1].diff(sym("y" + std::to_string(A))));
        out.eq_set_2.residuals.push_back(r);
      }

  out.eq_set_2_constant_u.tag = "msymp_hamilton_eq_set_2(constant_u)";
  out.eq_set_2_constant_u.base = xsyms;
  out.eq_set_2_constant_u.unknowns = unknowns;
  for (int kk = 1; kk <= m.n; ++kk)
    for (int A = 1; A <= m.k; ++A)
      for (int j = 1; j <= m.n; ++j) {
        Expr r = Expr::apply("pbar_" + std::to_string(kk) + "_" + std::to_string(A),
                             xargs)
                     .diff(xsyms[j - 1]) +
                 on_section(out.h[kk - 1][j - 1].diff(sym("y" + std::to_string(A))));
        out.eq_set_2_constant_u.residuals.push_back(r);
      }

  out.ddw_pair.tag = "msymp_hamilton_ddw_pair";
  out.ddw_pair.base = xsyms;
  out.ddw_pair.unknowns = unknowns;
  for (int i = 1; i <= m.n; ++i)
    for (int A = 1; A <= m.k; ++A) {
      Expr r = on_section(out.h_trace.diff(sym(coord_name("p", i, A)))) -
               Expr::apply("gamma" + std::to_string(A), xargs).diff(xsyms[i - 1]);
      out.ddw_pair.residuals.push_back(r);
    }
  for (int A = 1; A <= m.k; ++A) {
    Expr r;
    for (int i = 1; i <= m.n; ++i)
      r += Expr::apply("pbar_" + std::to_string(i) + "_" + std::to_string(A), xargs)
               .diff(xsyms[i - 1]);
    r += on_section(out.h_trace.diff(sym("y" + std::to_string(A))));
    out.ddw_pair.residuals.push_back(r);
  }
  return out;
}

// ===========================================================================
// Hamilton-Jacobi residuals

HjResult hj_residuals(const BundleModel& m, const Expr& L,
                      const std::vector<Expr>& s_funcs, const ExprMat& u_section,
                      const Rat& tau) {
  if (m.kind != ModelKind::adapted_frame)
    throw DomainError("hj_residuals expects the adapted frame model");
  require_lifted(m, L);
  if (static_cast<int>(s_funcs.size()) != m.n + m.k)
    throw DomainError("need n+k Hamilton-Jacobi functions S^alpha");
  HjResult out;

  ExprMat ut = u_section;
  if (ut.empty()) {
    ut.assign(m.n, ExprVec(m.n));
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j) ut[i][j] = Expr(i == j ? 1 : 0);
  }
  bool identity_section = true;
  for (int i = 0; i < m.n && identity_section; ++i)
    for (int j = 0; j < m.n && identity_section; ++j)
      identity_section = are_equal(ut[i][j], Expr(i == j ? 1 : 0));

  ExprMat vt = mat_inverse(ut);
  auto xs = [&](int i) { return sym("x" + std::to_string(i)); };
  auto ys = [&](int a) { return sym("y" + std::to_string(a)); };

  ExprMat ptilde(m.n, ExprVec(m.k));
  for (int kk = 1; kk <= m.n; ++kk)
    for (int A = 1; A <= m.k; ++A) {
      Expr acc;
      for (int i = 1; i <= m.n; ++i)
        acc += vt[kk - 1][i - 1] * s_funcs[i - 1].diff(ys(A));
      ptilde[kk - 1][A - 1] = acc;
    }
  ExprMat umix = invert_momenta(m, L, ptilde);  // [A-1][j-1]
  std::map<Sym, Expr> sec;
  for (int A = 1; A <= m.k; ++A)
    for (int j = 1; j <= m.n; ++j)
      sec.emplace(m.chart->coord(ix_u(m, m.n + A, j)), umix[A - 1][j - 1]);
  Expr Ltilde = L.subs(sec);

  out.generalized.tag = "hj_generalized";
  for (int i = 1; i <= m.n; ++i) out.generalized.base.push_back(xs(i));
  for (int i = 1; i <= m.n; ++i)
    for (int j = 1; j <= m.n; ++j) {
      Expr acc;
      for (int kk = 1; kk <= m.n; ++kk) {
        Expr h_kj;
        for (int B = 1; B <= m.k; ++B)
          h_kj += ptilde[kk - 1][B - 1] * umix[B - 1][j - 1];
        if (kk == j) h_kj -= Expr(tau) * Ltilde;
        acc += ut[i - 1][kk - 1] * h_kj;
      }
      acc += s_funcs[i - 1].diff(xs(j));
      out.generalized.residuals.push_back(acc);
    }

  out.ds_residuals.tag = "hj_dS_A";
  out.ds_residuals.base = out.generalized.base;
  for (int A = 1; A <= m.k; ++A)
    for (int j = 1; j <= m.n; ++j) {
      Expr r = s_funcs[m.n + A - 1].diff(xs(j));
      for (int B = 1; B <= m.k; ++B)
        r += s_funcs[m.n + A - 1].diff(ys(B)) * umix[B - 1][j - 1];
      out.ds_residuals.residuals.push_back(r);
    }

  if (identity_section && tau == rat(1, m.n)) {
    out.ddw_reduction.tag = "hj_ddw_reduction";
    out.ddw_reduction.base = out.generalized.base;
    Expr r;
    for (int i = 1; i <= m.n; ++i) {
      for (int B = 1; B <= m.k; ++B) r += ptilde[i - 1][B - 1] * umix[B - 1][i - 1];
      r += s_funcs[i - 1].diff(xs(i));
    }
    r -= Ltilde;
    out.ddw_reduction.residuals.push_back(r);
  }

  // transversality: the tau = 1 Caratheodory/Rund kernel condition
  {
    ChpAdapted chp = chp_forms_adapted(m, L, rat(1));
    VecField X = VecField::zero(m.chart);
    for (int A = 1; A <= m.k; ++A)
      X.comp[ix_y(m, A)] = Expr(sym("XT_y" + std::to_string(A)));
    for (int c = 0; c < m.dim(); ++c)
      if (m.chart->info(c).role == Role::FrameBlock)
        X.comp[c] = Expr(sym("XT_f" + std::to_string(c)));
    ExprMat hmat = chp.h;
    ExprVec rhs(m.n);
    for (int kk = 1; kk <= m.n; ++kk) {
      Expr acc;
      for (int A = 1; A <= m.k; ++A) {
        Expr p_kA = L.diff(m.chart->coord(ix_u(m, m.n + A, kk)));
        acc += p_kA * Expr(sym("XT_y" + std::to_string(A)));
      }
      rhs[kk - 1] = acc;
    }
    auto sol = solve_linear(hmat, rhs);
    if (!sol) {
      out.transversality.add("transversality system solvable", false);
    } else {
      for (int j = 1; j <= m.n; ++j) X.comp[ix_x(m, j)] = sol->particular[j - 1];
      bool ok = true;
      std::string witness;
      for (int i = 1; i <= m.n && ok; ++i) {
        Form c = interior(X, chp.theta_base[i - 1]);
        Expr v = c.scalar_value();
        if (!are_equal(v, Expr())) {
          ok = false;
          witness = v.str();
        }
      }
      out.transversality.add("kernel of (-h X + p X) annihilates theta^i_L", ok,
                             witness);
    }
  }
  return out;
}

}  // namespace fieldforms
