#include "fieldforms/axioms.hpp"

#include <sstream>

namespace fieldforms {

namespace {

std::string idx(int a) { return std::to_string(a + 1); }
std::string idx2(int a, int b) { return "(" + idx(a) + "," + idx(b) + ")"; }

// columns of the tensor's matrix span its image
ExprMat image_columns(const Tensor11& j) {
  int n = j.chart->dim();
  ExprMat cols;
  for (int b = 0; b < n; ++b) {
    ExprVec col(n);
    for (int a = 0; a < n; ++a) col[a] = j.m[a][b];
    cols.push_back(std::move(col));
  }
  return cols;  // [column][component]
}

int span_rank(const ExprMat& vectors) {
  if (vectors.empty()) return 0;
  return symbolic_rank(vectors);
}

ExprMat field_rows(const std::vector<VecField>& fields) {
  ExprMat rows;
  for (const auto& f : fields) rows.push_back(f.comp);
  return rows;
}

}  // namespace

ExprMat contraction_matrix(const Form& omega) {
  // result keys of degree deg-1, enumerated in key order
  const ChartPtr& c = omega.chart;
  std::vector<VecField> basis;
  for (int a = 0; a < c->dim(); ++a) basis.push_back(VecField::basis(c, a));
  std::map<FormKey, int> key_index;
  std::vector<Form> columns;
  for (int b = 0; b < c->dim(); ++b) {
    columns.push_back(interior(basis[b], omega));
    for (const auto& [k, v] : columns.back().comp)
      key_index.emplace(k, 0);
  }
  int row = 0;
  for (auto& [k, i] : key_index) i = row++;
  ExprMat m(row, ExprVec(c->dim()));
  for (int b = 0; b < c->dim(); ++b)
    for (const auto& [k, v] : columns[b].comp) m[key_index[k]][b] = v;
  return m;
}

Report check_tangent_like(const std::vector<Tensor11>& J, TangentKind kind, int n) {
  Report rep;
  if (J.empty()) throw DomainError("empty tangent-like family");
  const ChartPtr& chart = J.front().chart;
  int k = static_cast<int>(J.size());
  if (kind == TangentKind::almost_tangent && k != 1)
    throw DomainError("almost_tangent expects a single tensor");
  if (chart->dim() != n * (1 + k))
    throw DomainError("chart dimension is not n(1+k)");

  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      Tensor11 comp = tensor_compose(J[a], J[b]);
      bool ok = comp.is_zero();
      std::string witness;
      if (!ok) {
        for (size_t r = 0; r < comp.m.size() && witness.empty(); ++r)
          for (size_t s = 0; s < comp.m.size() && witness.empty(); ++s)
            if (!comp.m[r][s].is_zero()) witness = comp.m[r][s].str();
      }
      rep.add("J^" + idx(a) + " o J^" + idx(b) + " = 0", ok, witness);
    }

  std::vector<int> ranks;
  for (int a = 0; a < k; ++a) {
    int r = span_rank(image_columns(J[a]));
    ranks.push_back(r);
    rep.add("rank J^" + idx(a) + " = n", r == n, "rank = " + std::to_string(r));
  }

  for (int a = 0; a < k; ++a) {
    ExprMat rest;
    int rank_rest_expected = 0;
    for (int b = 0; b < k; ++b) {
      if (b == a) continue;
      for (auto& col : image_columns(J[b])) rest.push_back(col);
      rank_rest_expected += ranks[b];
    }
    if (rest.empty()) {
      rep.add("Im J^" + idx(a) + " independent", true);
      continue;
    }
    int r_rest = span_rank(rest);
    ExprMat all = rest;
    for (auto& col : image_columns(J[a])) all.push_back(col);
    int r_all = span_rank(all);
    rep.add("Im J^" + idx(a) + " /\\ sum of others = 0", r_all == ranks[a] + r_rest,
            "ranks " + std::to_string(r_all) + " vs " +
                std::to_string(ranks[a] + r_rest));
  }
  return rep;
}

namespace {

void check_closed(Report& rep, const std::vector<Form>& forms, const std::string& name) {
  for (size_t a = 0; a < forms.size(); ++a) {
    Form df = d(forms[a]);
    bool ok = df.is_zero();
    std::string witness;
    if (!ok) witness = df.comp.begin()->second.str();
    rep.add("d " + name + "_" + idx(static_cast<int>(a)) + " = 0", ok, witness);
  }
}

void check_restriction(Report& rep, const Form& omega,
                       const std::vector<VecField>& V, const std::string& label) {
  bool ok = true;
  std::string witness;
  for (size_t i = 0; i < V.size() && ok; ++i)
    for (size_t j = i + 1; j < V.size() && ok; ++j) {
      Expr v = evaluate(omega, {V[i], V[j]});
      if (!are_equal(v, Expr())) {
        ok = false;
        witness = v.str();
      }
    }
  rep.add(label, ok, witness);
}

int joint_kernel_dim(const std::vector<Form>& omegas,
                     const std::vector<Form>& etas = {}) {
  ExprMat stacked;
  for (const auto& w : omegas)
    for (auto& row : contraction_matrix(w)) stacked.push_back(row);
  for (const auto& e : etas) {
    ExprVec row(e.chart->dim());
    for (int b = 0; b < e.chart->dim(); ++b) row[b] = e.coeff_signed({b});
    stacked.push_back(row);
  }
  if (stacked.empty()) return omegas.empty() ? 0 : omegas.front().chart->dim();
  int dim = static_cast<int>(stacked.front().size());
  return dim - symbolic_rank(stacked);
}

}  // namespace

bool involutive(const std::vector<VecField>& span) {
  if (span.empty()) return true;
  ExprMat rows = field_rows(span);
  int r = span_rank(rows);
  for (size_t i = 0; i < span.size(); ++i)
    for (size_t j = i + 1; j < span.size(); ++j) {
      ExprMat aug = rows;
      aug.push_back(lie_bracket(span[i], span[j]).comp);
      if (span_rank(aug) != r) return false;
    }
  return true;
}

Report check_symplectic_like(const SymplecticInput& in, SymplecticKind kind) {
  Report rep;
  if (in.omegas.empty()) throw DomainError("no forms supplied");
  const ChartPtr& chart = in.omegas.front().chart;
  int dim = chart->dim();
  int k = static_cast<int>(in.omegas.size());

  switch (kind) {
    case SymplecticKind::almost_cotangent: {
      if (k != 1) throw DomainError("almost_cotangent expects one 2-form");
      check_closed(rep, in.omegas, "omega");
      check_restriction(rep, in.omegas[0], in.V, "(i) omega|VxV = 0");
      rep.add("(ii) ker omega = 0", joint_kernel_dim(in.omegas) == 0);
      rep.add("dim V = n", static_cast<int>(in.V.size()) == dim / 2,
              std::to_string(in.V.size()));
      break;
    }
    case SymplecticKind::k_symplectic: {
      check_closed(rep, in.omegas, "omega");
      for (int a = 0; a < k; ++a)
        check_restriction(rep, in.omegas[a], in.V,
                          "(i) omega_" + idx(a) + "|VxV = 0");
      rep.add("(ii) /\\ ker omega_A = 0", joint_kernel_dim(in.omegas) == 0);
      rep.add("dim V = nk", static_cast<int>(in.V.size()) == dim - in.n,
              std::to_string(in.V.size()));
      break;
    }
    case SymplecticKind::almost_k_cotangent: {
      int n = in.n;
      for (int a = 0; a < k; ++a) {
        int r = symbolic_rank(contraction_matrix(in.omegas[a]));
        rep.add("rank omega_" + idx(a) + " = 2n", r == 2 * n, std::to_string(r));
      }
      for (int a = 0; a < k; ++a) {
        ExprMat rest;
        for (int b = 0; b < k; ++b)
          if (b != a)
            for (auto& row : field_rows(in.V_A[b])) rest.push_back(row);
        ExprMat own = field_rows(in.V_A[a]);
        int r_own = span_rank(own), r_rest = span_rank(rest);
        ExprMat all = rest;
        for (auto& row : own) all.push_back(row);
        rep.add("(i) V_" + idx(a) + " /\\ sum of others = 0",
                rest.empty() || span_rank(all) == r_own + r_rest);
      }
      for (int a = 0; a < k; ++a) {
        // ker omega_a containment of the other V_B and dimension count
        bool contained = true;
        std::string witness;
        for (int b = 0; b < k && contained; ++b) {
          if (b == a) continue;
          for (const auto& f : in.V_A[b]) {
            Form c = interior(f, in.omegas[a]);
            if (!c.is_zero() &&
                !std::all_of(c.comp.begin(), c.comp.end(), [](const auto& kv) {
                  return are_equal(kv.second, Expr());
                })) {
              contained = false;
              witness = "field of V_" + idx(b);
              break;
            }
          }
        }
        int kd = joint_kernel_dim({in.omegas[a]});
        rep.add("(ii) ker omega_" + idx(a) + " = sum of other V_B",
                contained && kd == (k - 1) * n,
                witness.empty() ? "dim ker = " + std::to_string(kd) : witness);
        check_restriction(rep, in.omegas[a], in.V_A[a],
                          "(iii) omega_" + idx(a) + "|V_AxV_A = 0");
      }
      break;
    }
    case SymplecticKind::k_cosymplectic: {
      check_closed(rep, in.etas, "eta");
      check_closed(rep, in.omegas, "omega");
      Form w = in.etas.empty() ? Form::zero(chart, 0) : in.etas[0];
      for (size_t a = 1; a < in.etas.size(); ++a) w = wedge(w, in.etas[a]);
      rep.add("1: eta_1 ^ ... ^ eta_k != 0", !in.etas.empty() && !w.is_zero());
      for (int a = 0; a < static_cast<int>(in.etas.size()); ++a) {
        bool ok = true;
        std::string witness;
        for (const auto& f : in.V) {
          Expr v = evaluate(in.etas[a], {f});
          if (!are_equal(v, Expr())) {
            ok = false;
            witness = v.str();
            break;
          }
        }
        rep.add("1: eta_" + idx(a) + "|V = 0", ok, witness);
      }
      for (int a = 0; a < k; ++a)
        check_restriction(rep, in.omegas[a], in.V,
                          "1: omega_" + idx(a) + "|VxV = 0");
      rep.add("2: (/\\ ker eta) /\\ (/\\ ker omega) = 0",
              joint_kernel_dim(in.omegas, in.etas) == 0);
      rep.add("2: dim /\\ ker omega_A = k",
              joint_kernel_dim(in.omegas) == static_cast<int>(in.etas.size()));
      rep.add("V involutive", involutive(in.V));
      break;
    }
    case SymplecticKind::polysymplectic: {
      bool closed = true;
      std::string witness;
      for (const auto& f : in.omegas) {
        Form df = d(f);
        if (!df.is_zero()) {
          closed = false;
          witness = df.comp.begin()->second.str();
          break;
        }
      }
      rep.add("C-1 d omega^alpha = 0", closed, witness);
      rep.add("C-2 X _| omega = 0 iff X = 0", joint_kernel_dim(in.omegas) == 0);
      break;
    }
    case SymplecticKind::multisymplectic: {
      if (k != 1) throw DomainError("multisymplectic expects one form");
      Form df = d(in.omegas[0]);
      rep.add("closed", df.is_zero(),
              df.is_zero() ? "" : df.comp.begin()->second.str());
      rep.add("non-degenerate: X _| alpha = 0 iff X = 0",
              joint_kernel_dim(in.omegas) == 0);
      break;
    }
  }
  return rep;
}

Report check_integrability(const std::vector<Tensor11>& J) {
  Report rep;
  const ChartPtr& chart = J.front().chart;
  int dim = chart->dim();
  for (size_t A = 0; A < J.size(); ++A)
    for (size_t B = A; B < J.size(); ++B) {
      bool ok = true;
      std::string witness;
      for (int a = 0; a < dim && ok; ++a)
        for (int b = a + 1; b < dim && ok; ++b) {
          VecField v = nijenhuis_bracket(J[A], J[B], VecField::basis(chart, a),
                                         VecField::basis(chart, b));
          if (!v.is_zero()) {
            ok = false;
            witness = "basis pair (" + chart->coord(a).name() + "," +
                      chart->coord(b).name() + ")";
          }
        }
      rep.add("{J^" + idx(static_cast<int>(A)) + ",J^" +
                  idx(static_cast<int>(B)) + "} = 0",
              ok, witness);
    }
  return rep;
}

Report check_integrability(const SymplecticInput& in, SymplecticKind kind) {
  Report rep;
  bool closed = true;
  std::string witness;
  for (const auto& f : in.omegas) {
    Form df = d(f);
    if (!df.is_zero()) {
      closed = false;
      witness = df.comp.begin()->second.str();
      break;
    }
  }
  rep.add("forms closed", closed, witness);
  if (kind == SymplecticKind::almost_k_cotangent) {
    // all partial sums of the V_A must be involutive
    int k = static_cast<int>(in.V_A.size());
    for (int mask = 1; mask < (1 << k); ++mask) {
      std::vector<VecField> span;
      std::string label = "V_sum{";
      for (int a = 0; a < k; ++a)
        if (mask & (1 << a)) {
          for (const auto& f : in.V_A[a]) span.push_back(f);
          label += idx(a);
        }
      label += "} involutive";
      rep.add(label, involutive(span));
    }
  } else {
    rep.add("V involutive", involutive(in.V));
  }
  return rep;
}

std::vector<VecField> reeb_fields(const std::vector<Form>& etas,
                                  const std::vector<Form>& omegas) {
  if (etas.empty()) throw DomainError("reeb_fields needs the eta family");
  const ChartPtr& chart = etas.front().chart;
  int dim = chart->dim();
  int k = static_cast<int>(etas.size());

  // rows shared by every xi_B: the omega contractions and eta evaluations
  ExprMat base_rows;
  for (const auto& w : omegas)
    for (auto& row : contraction_matrix(w)) base_rows.push_back(row);
  ExprMat eta_rows;
  for (const auto& e : etas) {
    ExprVec row(dim);
    for (int b = 0; b < dim; ++b) row[b] = e.coeff_signed({b});
    eta_rows.push_back(row);
  }

  std::vector<VecField> out;
  for (int B = 0; B < k; ++B) {
    ExprMat m = base_rows;
    ExprVec rhs(base_rows.size(), Expr());
    for (int A = 0; A < k; ++A) {
      m.push_back(eta_rows[A]);
      rhs.push_back(Expr(A == B ? 1 : 0));
    }
    auto sol = solve_linear(m, rhs);
    if (!sol || !sol->nullspace.empty())
      throw SingularError("Reeb system is not uniquely solvable");
    VecField xi{chart, sol->particular};
    out.push_back(std::move(xi));
  }
  return out;
}

}  // namespace fieldforms
