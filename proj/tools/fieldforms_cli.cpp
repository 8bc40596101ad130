// fieldforms: batch frontend for the symbolic field-theory engine.
//
//   fieldforms model    --kind jet --n 2 --k 1
//   fieldforms check    --kind k_cotangent --n 1 --k 2 [--integrability]
//   fieldforms derive   --equations el --file wave.json
//   fieldforms verify   --identity rho_chp --file wave.json
//   fieldforms bracket  --file observables.json
//   fieldforms residual --file wave.json
//
// exit codes: 0 all-pass, 1 verification failure, 2 usage or schema error

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fieldforms/modelfile.hpp"

using namespace fieldforms;

namespace {

struct Output {
  std::ostringstream buffer;
  template <typename T>
  Output& operator<<(const T& v) {
    buffer << v;
    return *this;
  }
  void flush(const std::string& out_path) {
    std::cout << buffer.str();
    if (!out_path.empty()) {
      std::ofstream f(out_path);
      f << buffer.str();
    }
  }
};

int report_exit(const Report& rep) { return rep.verdict() ? 0 : 1; }

BundleModel model_from(const ModelFile& f) { return build_model(f.kind, f.n, f.k); }

int run_check(ModelKind kind, int n, int k, bool integrability, Output& out) {
  BundleModel m = build_model(kind, n, k);
  out << "model: " << m.describe();
  bool pass = true;
  auto show = [&](const char* label, const Report& rep) {
    out << label << "\n" << rep.text();
    pass = pass && rep.verdict();
  };
  switch (kind) {
    case ModelKind::tangent:
      show("axioms: almost tangent",
           check_tangent_like(m.tensor_family("J"), TangentKind::almost_tangent, n));
      if (integrability)
        show("integrability", check_integrability(m.tensor_family("J")));
      break;
    case ModelKind::k_tangent:
    case ModelKind::frame:
      show("axioms: almost k-tangent",
           check_tangent_like(m.tensor_family("J"), TangentKind::almost_k_tangent,
                              n));
      if (integrability)
        show("integrability", check_integrability(m.tensor_family("J")));
      if (kind == ModelKind::frame) {
        SymplecticInput in{m.form_family("omega_minus_dtheta"), {},
                           m.field_family("V"), {}, n};
        show("axioms: n-symplectic",
             check_symplectic_like(in, SymplecticKind::k_symplectic));
        SymplecticInput poly{m.form_family("dtheta"), {}, m.field_family("V"), {}, n};
        show("axioms: polysymplectic (C-1, C-2)",
             check_symplectic_like(poly, SymplecticKind::polysymplectic));
      }
      break;
    case ModelKind::cotangent: {
      SymplecticInput in{m.form_family("omega"), {}, m.field_family("V"), {}, n};
      show("axioms: almost cotangent",
           check_symplectic_like(in, SymplecticKind::almost_cotangent));
      if (integrability)
        show("integrability",
             check_integrability(in, SymplecticKind::almost_cotangent));
      break;
    }
    case ModelKind::k_cotangent: {
      std::vector<std::vector<VecField>> va;
      for (int a = 1; a <= k; ++a)
        va.push_back(m.field_family("V_" + std::to_string(a)));
      SymplecticInput in{m.form_family("omega"), {}, m.field_family("V"), va, n};
      show("axioms: k-symplectic",
           check_symplectic_like(in, SymplecticKind::k_symplectic));
      show("axioms: almost k-cotangent",
           check_symplectic_like(in, SymplecticKind::almost_k_cotangent));
      if (integrability)
        show("integrability",
             check_integrability(in, SymplecticKind::almost_k_cotangent));
      break;
    }
    case ModelKind::k_cosymplectic: {
      SymplecticInput in{m.form_family("omega"), m.form_family("eta"),
                         m.field_family("V"), {}, n};
      show("axioms: k-cosymplectic (conditions 1-2)",
           check_symplectic_like(in, SymplecticKind::k_cosymplectic));
      if (integrability)
        show("integrability", check_integrability(in, SymplecticKind::k_symplectic));
      out << "reeb fields:\n";
      auto reeb = m.field_family("reeb");
      for (size_t a = 0; a < reeb.size(); ++a) {
        out << "  xi_" << (a + 1) << ":";
        for (int c = 0; c < m.dim(); ++c)
          if (!reeb[a].comp[c].is_zero())
            out << " (" << m.chart->coord(c).name() << ") " << reeb[a].comp[c].str();
        out << "\n";
      }
      break;
    }
    case ModelKind::adapted_frame: {
      SymplecticInput poly{m.form_family("dtheta"), {}, m.field_family("V"), {}, n};
      show("axioms: m-symplectic (C-1, C-2)",
           check_symplectic_like(poly, SymplecticKind::polysymplectic));
      break;
    }
    case ModelKind::multisym_n2: {
      SymplecticInput in{{m.form("Omega_E2")}, {}, {}, {}, n};
      show("axioms: multisymplectic",
           check_symplectic_like(in, SymplecticKind::multisymplectic));
      break;
    }
    default:
      out << "no axiom set is attached to this kind\n";
  }
  return pass ? 0 : 1;
}

int run_derive(const ModelFile& f, const std::string& equations, Output& out) {
  std::string eq = equations.empty() ? f.equations : equations;
  if (eq == "el") {
    BundleModel m = model_from(f);
    if (!f.lagrangian) throw Error("derive el needs a lagrangian");
    out << euler_lagrange(m, *f.lagrangian).text();
    return 0;
  }
  if (eq == "ham" || eq == "kcosym") {
    BundleModel m = model_from(f);
    if (!f.hamiltonian) throw Error("derive " + eq + " needs a hamiltonian");
    EvolutionSystem ev = evolution_system(
        m, *f.hamiltonian,
        eq == "ham" ? EvolutionMode::ksym_ham : EvolutionMode::kcosym_ham);
    out << ev.pde.text();
    out << "# kernel dimension of the component system: "
        << ev.solution.nullspace.size() << "\n";
    return 0;
  }
  if (eq == "ddw") {
    BundleModel m = build_model(ModelKind::jet_dual, f.n, f.k);
    if (!f.hamiltonian) throw Error("derive ddw needs a hamiltonian");
    out << ddw_hamilton(m, *f.hamiltonian).eqs.text();
    return 0;
  }
  if (eq == "ehresmann") {
    BundleModel m = build_model(ModelKind::jet, f.n, f.k);
    if (!f.lagrangian) throw Error("derive ehresmann needs a lagrangian");
    EhresmannConnection conn = EhresmannConnection::symbols(m);
    EhresmannResult res = ehresmann_field_eqs(m, *f.lagrangian, conn);
    out << "# iago1\n";
    for (const auto& r : res.iago1) out << r.str() << "\n";
    out << "# iago2\n";
    for (const auto& r : res.iago2) out << r.str() << "\n";
    out << "# regular reduction (iago2 forces Gamma^B_j = y^B_j): "
        << (res.regular_reduction ? "yes" : "no") << "\n";
    out << "# iago3\n";
    for (const auto& r : res.iago3) out << r.str() << "\n";
    return 0;
  }
  if (eq == "msymp") {
    BundleModel am = build_model(ModelKind::adapted_frame, f.n, f.k);
    BundleModel jm = build_model(ModelKind::jet, f.n, f.k);
    Expr L = lifted_lagrangian(f, am, jm);
    Rat tau = f.has_tau ? f.tau : rat(1, f.n);
    MsympHamilton res = msymp_hamilton_eqs(am, L, tau);
    out << "regularity:\n" << res.regularity.text();
    out << "# h trace\n" << res.h_trace.str() << "\n";
    out << res.eq_set_1.text() << res.eq_set_2.text()
        << res.eq_set_2_constant_u.text() << res.ddw_pair.text();
    return report_exit(res.regularity);
  }
  if (eq == "hj") {
    BundleModel am = build_model(ModelKind::adapted_frame, f.n, f.k);
    BundleModel jm = build_model(ModelKind::jet, f.n, f.k);
    Expr L = lifted_lagrangian(f, am, jm);
    Rat tau = f.has_tau ? f.tau : rat(1, f.n);
    HjResult res = hj_residuals(am, L, f.s_functions, f.u_section, tau);
    out << res.generalized.text() << res.ds_residuals.text();
    if (!res.ddw_reduction.residuals.empty()) out << res.ddw_reduction.text();
    out << "transversality:\n" << res.transversality.text();
    return report_exit(res.transversality);
  }
  throw Error("unknown equation set: " + eq +
              " (expected el|ham|kcosym|ddw|ehresmann|msymp|hj)");
}

int run_verify(const ModelFile& f, const std::string& token, Output& out) {
  if (token == "fl") {
    BundleModel kt = build_model(ModelKind::k_tangent, f.n, f.k);
    BundleModel kc = build_model(ModelKind::k_cotangent, f.n, f.k);
    if (!f.lagrangian) throw Error("verify fl needs a lagrangian");
    FlResult res = legendre_fl(kt, kc, *f.lagrangian);
    out << "FL:\n";
    for (int t = 0; t < kc.chart->dim(); ++t)
      out << "  " << kc.chart->coord(t).name() << " <- " << res.fl.exprs[t].str()
          << "\n";
    out << res.report.text();
    return report_exit(res.report);
  }
  if (token == "leg") {
    BundleModel jm = build_model(ModelKind::jet, f.n, f.k);
    BundleModel jd = build_model(ModelKind::jet_dual, f.n, f.k);
    BundleModel ms = build_model(ModelKind::multisym_n2, f.n, f.k);
    if (!f.lagrangian) throw Error("verify leg needs a lagrangian");
    LegResult res = legendre_leg(jm, jd, ms, *f.lagrangian);
    out << res.report.text();
    return report_exit(res.report);
  }
  if (token == "msymp-legendre") {
    BundleModel am = build_model(ModelKind::adapted_frame, f.n, f.k);
    BundleModel jm = build_model(ModelKind::jet, f.n, f.k);
    BundleModel fe = build_model(ModelKind::frame, f.n + f.k);
    Expr L = lifted_lagrangian(f, am, jm);
    Rat tau = f.has_tau ? f.tau : Rat(1);
    MsympLegResult res = legendre_msymp(am, fe, L, tau);
    out << res.report.text();
    return report_exit(res.report);
  }
  IdentityParams p;
  p.n = f.n;
  p.k = f.k;
  p.lagrangian = f.lagrangian;
  p.alpha = f.alpha;
  p.metric = f.metric;
  p.contravolume = f.contravolume;
  p.slot = f.slot;
  Report rep = verify_correspondence(identity_from_string(token), p);
  out << rep.text();
  return report_exit(rep);
}

int run_bracket(const ModelFile& f, Output& out) {
  if (f.observables.size() < 2)
    throw Error("bracket needs at least two observables in the model file");
  BundleModel m = model_from(f);
  CanonicalCoords cc = canonical_coords(m);
  SymObservable a = make_observable(cc, f.observables[0].rank,
                                    f.observables[0].components);
  SymObservable b = make_observable(cc, f.observables[1].rank,
                                    f.observables[1].components);
  SymObservable ab = poisson(a, b);
  out << "# poisson bracket, rank " << ab.rank << "\n";
  for (const auto& [idx, value] : ab.comp) {
    out << "{";
    for (size_t i = 0; i < idx.size(); ++i) out << (i ? "," : "") << idx[i];
    out << "} = " << value.str() << "\n";
  }
  Report rep = vf_class_bracket(a, b);
  out << rep.text();
  return report_exit(rep);
}

int run_residual(const ModelFile& f, Output& out) {
  BundleModel m = model_from(f);
  EquationSystem sys;
  if (f.equations == "el" || f.equations.empty()) {
    if (!f.lagrangian) throw Error("residual run needs a lagrangian");
    sys = euler_lagrange(m, *f.lagrangian);
  } else if (f.equations == "ham") {
    if (!f.hamiltonian) throw Error("residual run needs a hamiltonian");
    sys = evolution_system(m, *f.hamiltonian, EvolutionMode::ksym_ham).pde;
  } else if (f.equations == "ddw") {
    if (!f.hamiltonian) throw Error("residual run needs a hamiltonian");
    sys = ddw_hamilton(m, *f.hamiltonian).eqs;
  } else {
    throw Error("residual supports el|ham|ddw systems");
  }
  CandidateSolution sol;
  sol.closed = f.candidates;
  ResidualStats st = eval_residuals(sys, sol, f.grid);
  out << "grid points: " << st.points << "\n";
  out << "max |residual|: " << st.max_abs << "\n";
  out << "argmax:";
  for (double v : st.argmax) out << " " << v;
  out << "\n";
  if (f.tolerance >= 0) {
    bool ok = st.max_abs <= f.tolerance;
    out << (ok ? "within" : "exceeds") << " tolerance " << f.tolerance << "\n";
    return ok ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic geometry engine for classical field theory"};
  app.require_subcommand(1);

  std::string file, out_path, kind_str = "k_tangent", identity, equations;
  int n = 1, k = 1;
  uint64_t seed = 0;
  std::string tau_str;
  bool integrability = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--file", file, "model file (JSON, schema 1)");
    cmd->add_option("--out", out_path, "duplicate the report into a file");
    cmd->add_option("--seed", seed, "seed for randomized checks");
    cmd->add_option("--n", n, "base dimension");
    cmd->add_option("--k", k, "fiber count / dimension");
    cmd->add_option("--kind", kind_str, "model kind");
    cmd->add_option("--tau", tau_str, "tau parameter (rational)");
  };

  CLI::App* c_model = app.add_subcommand("model", "build and describe a model");
  add_common(c_model);
  CLI::App* c_check = app.add_subcommand("check", "run axiom/integrability checks");
  add_common(c_check);
  c_check->add_flag("--axioms", "run the axiom checkers (default)");
  c_check->add_flag("--integrability", integrability, "also run integrability checks");
  CLI::App* c_derive = app.add_subcommand("derive", "derive a field-equation system");
  add_common(c_derive);
  c_derive->add_option("--equations", equations,
                       "el | ham | kcosym | ddw | ehresmann | msymp | hj");
  CLI::App* c_verify = app.add_subcommand("verify", "verify a catalog identity");
  add_common(c_verify);
  c_verify->add_option("--identity", identity,
                       "identity token, or fl | leg | msymp-legendre");
  CLI::App* c_bracket = app.add_subcommand("bracket", "n-symplectic Poisson bracket");
  add_common(c_bracket);
  CLI::App* c_residual = app.add_subcommand("residual", "numeric residual evaluation");
  add_common(c_residual);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Output out;
  try {
    ModelFile mf;
    bool have_file = !file.empty();
    if (have_file) mf = load_model_file(file);
    // command-line overrides
    auto apply_overrides = [&](CLI::App* cmd) {
      if (!have_file) {
        mf.kind = model_kind_from_string(kind_str);
        mf.n = n;
        mf.k = k;
      } else {
        if (cmd->count("--kind")) mf.kind = model_kind_from_string(kind_str);
        if (cmd->count("--n")) mf.n = n;
        if (cmd->count("--k")) mf.k = k;
      }
      if (cmd->count("--seed")) mf.seed = seed;
      if (cmd->count("--tau")) {
        mf.tau = rat_from_string(tau_str);
        mf.has_tau = true;
      }
    };

    int code = 2;
    if (c_model->parsed()) {
      apply_overrides(c_model);
      set_global_seed(mf.seed);
      out << build_model(mf.kind, mf.n, mf.k).describe();
      code = 0;
    } else if (c_check->parsed()) {
      apply_overrides(c_check);
      set_global_seed(mf.seed);
      code = run_check(mf.kind, mf.n, mf.k, integrability, out);
    } else if (c_derive->parsed()) {
      apply_overrides(c_derive);
      set_global_seed(mf.seed);
      code = run_derive(mf, equations, out);
    } else if (c_verify->parsed()) {
      apply_overrides(c_verify);
      set_global_seed(mf.seed);
      if (identity.empty()) throw Error("verify needs --identity");
      code = run_verify(mf, identity, out);
    } else if (c_bracket->parsed()) {
      apply_overrides(c_bracket);
      set_global_seed(mf.seed);
      code = run_bracket(mf, out);
    } else if (c_residual->parsed()) {
      apply_overrides(c_residual);
      set_global_seed(mf.seed);
      code = run_residual(mf, out);
    }
    out.flush(out_path);
    return code;
  } catch (const ParseError& e) {
    out.flush(out_path);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    out.flush(out_path);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
