#include "fieldforms/nsymp.hpp"

#include <algorithm>
#include <sstream>

namespace fieldforms {

namespace {

std::string istr(int i) { return std::to_string(i); }

std::vector<std::vector<int>> sorted_tuples(int slots, int rank) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(rank, 1);
  while (true) {
    out.push_back(cur);
    int pos = rank - 1;
    while (pos >= 0 && cur[pos] == slots) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int q = pos + 1; q < rank; ++q) cur[q] = cur[pos];
  }
  return out;
}

// all p! position permutations (repeated index values count separately, so
// diagonal components pick up their multiplicity)
std::vector<std::vector<int>> permutations_of(const std::vector<int>& idx) {
  std::vector<int> pos(idx.size());
  for (size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);
  std::vector<std::vector<int>> out;
  do {
    std::vector<int> arranged;
    for (int p : pos) arranged.push_back(idx[p]);
    out.push_back(std::move(arranged));
  } while (std::next_permutation(pos.begin(), pos.end()));
  return out;
}

long factorial(int p) {
  long f = 1;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

}  // namespace

CanonicalCoords canonical_coords(const BundleModel& m) {
  CanonicalCoords cc;
  cc.chart = m.chart;
  if (m.kind == ModelKind::frame) {
    for (int a = 1; a <= m.n; ++a) cc.z.push_back(ix_x(m, a));
    for (int al = 1; al <= m.n; ++al) {
      std::vector<int> row;
      for (int a = 1; a <= m.n; ++a) row.push_back(ix_piblock(m, al, a));
      cc.pi.push_back(row);
    }
    cc.omega = m.form_family("dtheta");
    return cc;
  }
  if (m.kind == ModelKind::k_cotangent) {
    for (int a = 1; a <= m.n; ++a) cc.z.push_back(ix_x(m, a));
    for (int al = 1; al <= m.k; ++al) {
      std::vector<int> row;
      for (int a = 1; a <= m.n; ++a) row.push_back(ix_p(m, al, a));
      cc.pi.push_back(row);
    }
    cc.omega = m.form_family("dtheta");
    return cc;
  }
  throw DomainError("canonical coordinates live on frame or k_cotangent models");
}

Expr SymObservable::component(std::vector<int> idx) const {
  std::sort(idx.begin(), idx.end());
  auto it = comp.find(idx);
  return it == comp.end() ? Expr() : it->second;
}

SymObservable make_observable(const CanonicalCoords& cc, int rank,
                              const std::map<std::vector<int>, Expr>& components) {
  if (rank >= 4) throw DomainError("rank >= 4 observables are unsupported");
  if (rank == 3)
    throw DomainError("rank 3 observables arise only as bracket values");
  if (rank < 1) throw DomainError("observable rank must be >= 1");
  SymObservable f;
  f.rank = rank;
  f.cc = cc;
  for (const auto& [idx, value] : components) {
    if (static_cast<int>(idx.size()) != rank)
      throw DomainError("component index tuple has wrong length");
    for (int a : idx)
      if (a < 1 || a > cc.slots()) throw DomainError("component index out of range");
    std::vector<int> key = idx;
    std::sort(key.begin(), key.end());
    auto it = f.comp.find(key);
    if (it == f.comp.end()) {
      f.comp.emplace(std::move(key), value);
    } else if (!are_equal(it->second, value)) {
      throw DomainError("non-symmetric component array");
    }
  }
  return f;
}

const VecField& HamClass::field(std::vector<int> idx) const {
  std::sort(idx.begin(), idx.end());
  auto it = rep.find(idx);
  if (it == rep.end()) throw DomainError("missing representative component");
  return it->second;
}

// ===========================================================================
// hamiltonian classes

HamClass hamiltonian_class(const SymObservable& f) {
  const CanonicalCoords& cc = f.cc;
  int N = cc.slots(), nb = cc.base();
  HamClass out;
  out.rank = f.rank;
  out.cc = cc;
  auto zsym = [&](int c) { return cc.chart->coord(cc.z[c - 1]); };
  auto pisym = [&](int al, int a) { return cc.chart->coord(cc.pi[al - 1][a - 1]); };

  if (f.rank == 1) {
    // d f^alpha = -X _| omega^alpha with a single scalar field X
    VecField X = VecField::zero(cc.chart);
    // xi^c from df^alpha / dpi^alpha_c, equal across alpha; off-diagonal
    // dpi-coefficients must vanish
    for (int al = 1; al <= N; ++al)
      for (int mu = 1; mu <= N; ++mu)
        for (int c = 1; c <= nb; ++c) {
          Expr d = f.component({al}).diff(pisym(mu, c));
          if (mu == al) continue;
          if (!are_equal(d, Expr()))
            throw DomainError("not an allowable observable: d f^" + istr(al) +
                              " / d pi^" + istr(mu) + "_" + istr(c) + " = " +
                              d.str());
        }
    for (int c = 1; c <= nb; ++c) {
      Expr xi = f.component({1}).diff(pisym(1, c));
      for (int al = 2; al <= N; ++al) {
        Expr other = f.component({al}).diff(pisym(al, c));
        if (!are_equal(xi, other))
          throw DomainError(
              "not an allowable observable: slot-diagonal velocities disagree at "
              "z^" + istr(c));
      }
      X.comp[cc.z[c - 1]] = xi;
    }
    for (int al = 1; al <= N; ++al)
      for (int c = 1; c <= nb; ++c)
        X.comp[cc.pi[al - 1][c - 1]] = -f.component({al}).diff(zsym(c));
    // the z-components must not depend on pi (they came from a pi-derivative,
    // but f may be quadratic in pi, which the off-diagonal test can miss when
    // N = 1); verify the structure equation directly
    out.rep.emplace(std::vector<int>{}, X);
    Report check = structure_equation_check(f, out);
    if (!check.verdict())
      throw DomainError("not an allowable observable: structure equation fails: " +
                        check.conditions.front().witness);
    return out;
  }

  if (f.rank != 2) throw DomainError("hamiltonian classes exist for ranks 1 and 2");

  // xi^{alpha c} := 1/2 d f^{alpha alpha} / d pi^alpha_c, then verify all
  // dpi-coefficient equations
  ExprMat xi(N, ExprVec(nb));
  for (int al = 1; al <= N; ++al)
    for (int c = 1; c <= nb; ++c)
      xi[al - 1][c - 1] = Expr(rat(1, 2)) * f.component({al, al}).diff(pisym(al, c));
  for (int al = 1; al <= N; ++al)
    for (int be = al; be <= N; ++be)
      for (int mu = 1; mu <= N; ++mu)
        for (int c = 1; c <= nb; ++c) {
          Expr lhs = f.component({al, be}).diff(pisym(mu, c));
          Expr rhs;
          if (mu == be) rhs += xi[al - 1][c - 1];
          if (mu == al) rhs += xi[be - 1][c - 1];
          if (!are_equal(lhs, rhs))
            throw DomainError("not an allowable observable: d f^{" + istr(al) +
                              istr(be) + "} / d pi^" + istr(mu) + "_" + istr(c) +
                              " = " + lhs.str() + " but the velocity system needs " +
                              rhs.str());
        }

  for (int al = 1; al <= N; ++al) {
    VecField X = VecField::zero(cc.chart);
    for (int c = 1; c <= nb; ++c) X.comp[cc.z[c - 1]] = xi[al - 1][c - 1];
    for (int si = 1; si <= N; ++si)
      for (int c = 1; c <= nb; ++c)
        X.comp[cc.pi[si - 1][c - 1]] =
            Expr(rat(-1, 2)) * f.component({al, si}).diff(zsym(c));
    out.rep.emplace(std::vector<int>{al}, std::move(X));
  }
  // kernel basis: Y^{alpha beta}_gamma antisymmetric in (alpha, beta)
  for (int a = 1; a <= N; ++a)
    for (int b = a + 1; b <= N; ++b)
      for (int g = 1; g <= nb; ++g) {
        std::map<std::vector<int>, VecField> ker;
        for (int al = 1; al <= N; ++al)
          ker.emplace(std::vector<int>{al}, VecField::zero(cc.chart));
        ker[{a}].comp[cc.pi[b - 1][g - 1]] = Expr(1);
        ker[{b}].comp[cc.pi[a - 1][g - 1]] = Expr(-1);
        out.kernel.push_back(std::move(ker));
      }
  Report check = structure_equation_check(f, out);
  if (!check.verdict())
    throw DomainError("not an allowable observable: structure equation fails: " +
                      check.conditions.front().witness);
  return out;
}

Report structure_equation_check(const SymObservable& f, const HamClass& x) {
  Report rep;
  const CanonicalCoords& cc = f.cc;
  int p = f.rank;
  for (const auto& K : sorted_tuples(cc.slots(), p)) {
    // d f^K + sum over permutations sigma of X^{sigma_1..sigma_{p-1}} _|
    // omega^{sigma_p}
    Form total = Form::zero(cc.chart, 1);
    Expr fk = f.component(K);
    for (int c = 0; c < cc.chart->dim(); ++c) {
      Expr dcomp = fk.diff(cc.chart->coord(c));
      if (!dcomp.is_zero()) total.add_term({c}, dcomp);
    }
    for (const auto& perm : permutations_of(K)) {
      std::vector<int> head(perm.begin(), perm.end() - 1);
      total = total + interior(x.field(head), cc.omega[perm.back() - 1]);
    }
    bool ok = true;
    std::string witness;
    for (const auto& [kk, ce] : total.comp)
      if (!are_equal(ce, Expr())) {
        ok = false;
        witness = ce.str();
        break;
      }
    std::string key;
    for (int a : K) key += istr(a);
    rep.add("structure equation, component {" + key + "}", ok, witness);
  }
  return rep;
}

// ===========================================================================
// brackets and products

SymObservable poisson(const SymObservable& f, const SymObservable& g) {
  if (f.rank > 2) throw DomainError("poisson needs rank(f) <= 2");
  int r = f.rank + g.rank - 1;
  if (r > 3) throw DomainError("poisson bracket output rank exceeds 3");
  HamClass xf = hamiltonian_class(f);
  const CanonicalCoords& cc = f.cc;

  SymObservable out;
  out.rank = r;
  out.cc = cc;
  Rat norm = rat(factorial(f.rank), factorial(r));
  for (const auto& K : sorted_tuples(cc.slots(), r)) {
    Expr acc;
    for (const auto& perm : permutations_of(K)) {
      std::vector<int> head(perm.begin(), perm.begin() + (f.rank - 1));
      std::vector<int> tail(perm.begin() + (f.rank - 1), perm.end());
      acc += apply_vf(xf.field(head), g.component(tail));
    }
    out.comp.emplace(K, Expr(norm) * acc);
  }
  return out;
}

SymObservable sym_product(const SymObservable& f, const SymObservable& g) {
  int r = f.rank + g.rank;
  if (r > 3) throw DomainError("sym_product output rank exceeds 3");
  const CanonicalCoords& cc = f.cc;
  SymObservable out;
  out.rank = r;
  out.cc = cc;
  Rat norm = rat(1, factorial(r));
  for (const auto& K : sorted_tuples(cc.slots(), r)) {
    Expr acc;
    for (const auto& perm : permutations_of(K)) {
      std::vector<int> head(perm.begin(), perm.begin() + f.rank);
      std::vector<int> tail(perm.begin() + f.rank, perm.end());
      acc += f.component(head) * g.component(tail);
    }
    out.comp.emplace(K, Expr(norm) * acc);
  }
  return out;
}

Report vf_class_bracket(const SymObservable& f, const SymObservable& g) {
  Report rep;
  if (f.rank > 2 || g.rank > 2)
    throw DomainError("class brackets are built from ranks <= 2");
  int r = f.rank + g.rank - 1;
  if (r > 3) throw DomainError("class bracket output rank exceeds 3");
  HamClass xf = hamiltonian_class(f);
  HamClass xg = hamiltonian_class(g);
  const CanonicalCoords& cc = f.cc;
  int order = f.rank + g.rank - 2;

  // W^{J} = symmetrized Lie brackets of representatives
  std::map<std::vector<int>, VecField> W;
  for (const auto& K : sorted_tuples(std::max(cc.slots(), 1), order)) {
    if (order > 0 && *std::max_element(K.begin(), K.end()) > cc.slots()) continue;
    VecField acc = VecField::zero(cc.chart);
    std::vector<std::vector<int>> perms =
        order == 0 ? std::vector<std::vector<int>>{{}} : permutations_of(K);
    for (const auto& perm : perms) {
      std::vector<int> head(perm.begin(), perm.begin() + (f.rank - 1));
      std::vector<int> tail(perm.begin() + (f.rank - 1), perm.end());
      acc = acc + lie_bracket(xf.field(head), xg.field(tail));
    }
    Rat norm = rat(1, factorial(order));
    W.emplace(K, Expr(norm) * acc);
  }

  // bracket observable and the proportionality through its structure equation:
  // d {f,g}^K + (p! q!/ r!) sum_{perm} W^{head} _| omega^{last} = 0
  SymObservable h = poisson(f, g);
  Rat factor = rat(factorial(f.rank) * factorial(g.rank), factorial(r));
  for (const auto& K : sorted_tuples(cc.slots(), r)) {
    Form total = Form::zero(cc.chart, 1);
    Expr hk = h.component(K);
    for (int c = 0; c < cc.chart->dim(); ++c) {
      Expr dcomp = hk.diff(cc.chart->coord(c));
      if (!dcomp.is_zero()) total.add_term({c}, dcomp);
    }
    for (const auto& perm : permutations_of(K)) {
      std::vector<int> head(perm.begin(), perm.end() - 1);
      std::sort(head.begin(), head.end());
      total = total + Expr(factor) * interior(W.at(head), cc.omega[perm.back() - 1]);
    }
    bool ok = true;
    std::string witness;
    for (const auto& [kk, ce] : total.comp)
      if (!are_equal(ce, Expr())) {
        ok = false;
        witness = ce.str();
        break;
      }
    std::string key;
    for (int a : K) key += istr(a);
    rep.add("[[X_f, X_g]] = (p+q-1)!/(p!q!) X_{f,g}, component {" + key + "}", ok,
            witness);
  }
  return rep;
}

}  // namespace fieldforms
