#include "fieldforms/exterior.hpp"

#include <algorithm>
#include <sstream>

namespace fieldforms {

// ===========================================================================
// charts

Chart::Chart(std::vector<CoordInfo> coords) : coords_(std::move(coords)) {
  for (int a = 0; a < dim(); ++a) {
    auto [it, fresh] = index_.emplace(coords_[a].s, a);
    if (!fresh) throw DomainError("duplicate chart coordinate " + coords_[a].s.name());
  }
}

int Chart::index_of(Sym s) const {
  auto it = index_.find(s);
  if (it == index_.end())
    throw DomainError("symbol " + s.name() + " is not a chart coordinate");
  return it->second;
}

bool Chart::contains(Sym s) const { return index_.count(s) > 0; }

std::vector<Sym> Chart::syms() const {
  std::vector<Sym> out;
  for (const auto& c : coords_) out.push_back(c.s);
  return out;
}

std::string Chart::describe() const {
  std::ostringstream os;
  for (int a = 0; a < dim(); ++a) {
    if (a) os << " ";
    os << coords_[a].s.name();
  }
  return os.str();
}

ChartPtr make_chart(std::vector<CoordInfo> coords) {
  return std::make_shared<Chart>(std::move(coords));
}

static void require_same_chart(const ChartPtr& a, const ChartPtr& b) {
  if (a.get() != b.get()) throw DomainError("objects live on different charts");
}

// ===========================================================================
// vector fields

VecField VecField::zero(ChartPtr c) {
  VecField x{c, ExprVec(c->dim())};
  return x;
}

VecField VecField::basis(ChartPtr c, int a) {
  VecField x = zero(c);
  x.comp[a] = Expr(1);
  return x;
}

bool VecField::is_zero() const {
  for (const auto& e : comp)
    if (!e.is_zero()) return false;
  return true;
}

VecField operator+(const VecField& a, const VecField& b) {
  require_same_chart(a.chart, b.chart);
  VecField out = a;
  for (size_t i = 0; i < out.comp.size(); ++i) out.comp[i] += b.comp[i];
  return out;
}

VecField operator-(const VecField& a, const VecField& b) {
  require_same_chart(a.chart, b.chart);
  VecField out = a;
  for (size_t i = 0; i < out.comp.size(); ++i) out.comp[i] -= b.comp[i];
  return out;
}

VecField operator*(const Expr& f, const VecField& x) {
  VecField out = x;
  for (auto& e : out.comp) e = f * e;
  return out;
}

Expr apply_vf(const VecField& x, const Expr& f) {
  Expr out;
  for (int a = 0; a < x.chart->dim(); ++a) {
    if (x.comp[a].is_zero()) continue;
    out += x.comp[a] * f.diff(x.chart->coord(a));
  }
  return out;
}

VecField lie_bracket(const VecField& x, const VecField& y) {
  require_same_chart(x.chart, y.chart);
  VecField out = VecField::zero(x.chart);
  for (int a = 0; a < x.chart->dim(); ++a)
    out.comp[a] = apply_vf(x, y.comp[a]) - apply_vf(y, x.comp[a]);
  return out;
}

// ===========================================================================
// forms

namespace {

// sorts the key in place, returns the permutation sign; 0 on repeats
int sort_sign(FormKey& key) {
  int sign = 1;
  for (size_t i = 1; i < key.size(); ++i)
    for (size_t j = i; j > 0 && key[j] < key[j - 1]; --j) {
      std::swap(key[j], key[j - 1]);
      sign = -sign;
    }
  for (size_t i = 1; i < key.size(); ++i)
    if (key[i] == key[i - 1]) return 0;
  return sign;
}

}  // namespace

Form Form::zero(ChartPtr c, int degree) {
  if (degree < 0) throw DomainError("negative form degree");
  return Form{c, degree, {}};
}

Form Form::scalar(ChartPtr c, Expr f) {
  Form out = zero(c, 0);
  if (!f.is_zero()) out.comp.emplace(FormKey{}, std::move(f));
  return out;
}

Form Form::d_coord(ChartPtr c, int a) {
  Form out = zero(c, 1);
  out.comp.emplace(FormKey{a}, Expr(1));
  return out;
}

Form Form::volume(ChartPtr c, const std::vector<int>& idx) {
  Form out = zero(c, static_cast<int>(idx.size()));
  FormKey k = idx;
  int s = sort_sign(k);
  if (s != 0) out.comp.emplace(std::move(k), Expr(s));
  return out;
}

void Form::add_term(FormKey key, Expr c) {
  if (static_cast<int>(key.size()) != degree)
    throw DomainError("form term of wrong degree");
  if (c.is_zero()) return;
  int s = sort_sign(key);
  if (s == 0) return;
  Expr val = (s == 1) ? c : -c;
  auto it = comp.find(key);
  if (it == comp.end()) {
    comp.emplace(std::move(key), std::move(val));
  } else {
    it->second += val;
    if (it->second.is_zero()) comp.erase(it);
  }
}

Expr Form::coeff_signed(FormKey key) const {
  int s = sort_sign(key);
  if (s == 0) return Expr();
  auto it = comp.find(key);
  if (it == comp.end()) return Expr();
  return s == 1 ? it->second : -it->second;
}

bool Form::is_zero() const {
  for (const auto& [k, c] : comp)
    if (!c.is_zero()) return false;
  return true;
}

Expr Form::scalar_value() const {
  if (degree != 0) throw DomainError("scalar_value on a form of positive degree");
  auto it = comp.find(FormKey{});
  return it == comp.end() ? Expr() : it->second;
}

Form operator+(const Form& a, const Form& b) {
  require_same_chart(a.chart, b.chart);
  if (a.degree != b.degree) throw DomainError("adding forms of different degree");
  Form out = a;
  for (const auto& [k, c] : b.comp) out.add_term(k, c);
  return out;
}

Form operator-(const Form& a, const Form& b) {
  require_same_chart(a.chart, b.chart);
  if (a.degree != b.degree) throw DomainError("subtracting forms of different degree");
  Form out = a;
  for (const auto& [k, c] : b.comp) out.add_term(k, -c);
  return out;
}

Form operator*(const Expr& f, const Form& a) {
  Form out = Form::zero(a.chart, a.degree);
  for (const auto& [k, c] : a.comp) out.add_term(k, f * c);
  return out;
}

Form wedge(const Form& a, const Form& b) {
  require_same_chart(a.chart, b.chart);
  Form out = Form::zero(a.chart, a.degree + b.degree);
  if (out.degree > a.chart->dim()) return out;  // identically zero
  for (const auto& [ka, ca] : a.comp)
    for (const auto& [kb, cb] : b.comp) {
      FormKey k = ka;
      k.insert(k.end(), kb.begin(), kb.end());
      out.add_term(std::move(k), ca * cb);
    }
  return out;
}

Form d(const Form& a) {
  Form out = Form::zero(a.chart, a.degree + 1);
  for (const auto& [k, c] : a.comp)
    for (int s = 0; s < a.chart->dim(); ++s) {
      Expr dc = c.diff(a.chart->coord(s));
      if (dc.is_zero()) continue;
      FormKey nk;
      nk.push_back(s);
      nk.insert(nk.end(), k.begin(), k.end());
      out.add_term(std::move(nk), std::move(dc));
    }
  return out;
}

Form interior(const VecField& x, const Form& a) {
  require_same_chart(x.chart, a.chart);
  if (a.degree == 0) throw DomainError("interior product with a degree-0 form");
  Form out = Form::zero(a.chart, a.degree - 1);
  for (const auto& [k, c] : a.comp)
    for (size_t t = 0; t < k.size(); ++t) {
      if (x.comp[k[t]].is_zero()) continue;
      FormKey nk;
      for (size_t i = 0; i < k.size(); ++i)
        if (i != t) nk.push_back(k[i]);
      Expr contrib = x.comp[k[t]] * c;
      if (t % 2 == 1) contrib = -contrib;
      out.add_term(std::move(nk), std::move(contrib));
    }
  return out;
}

Expr evaluate(const Form& a, const std::vector<VecField>& xs) {
  if (static_cast<int>(xs.size()) != a.degree)
    throw DomainError("argument count != form degree");
  if (a.degree == 0) return a.scalar_value();
  Expr out;
  for (const auto& [k, c] : a.comp) {
    ExprMat m(a.degree, ExprVec(a.degree));
    for (int i = 0; i < a.degree; ++i)
      for (int j = 0; j < a.degree; ++j) m[i][j] = xs[j].comp[k[i]];
    out += c * mat_det(m);
  }
  return out;
}

bool form_equal(const Form& a, const Form& b) {
  if (a.chart.get() != b.chart.get() || a.degree != b.degree) return false;
  Form diff = a - b;
  for (const auto& [k, c] : diff.comp)
    if (!are_equal(c, Expr())) return false;
  return true;
}

// ===========================================================================
// tensors

Tensor11 Tensor11::zero(ChartPtr c) {
  return Tensor11{c, ExprMat(c->dim(), ExprVec(c->dim()))};
}

Tensor11 Tensor11::identity(ChartPtr c) {
  Tensor11 t = zero(c);
  for (int a = 0; a < c->dim(); ++a) t.m[a][a] = Expr(1);
  return t;
}

bool Tensor11::is_zero() const {
  for (const auto& row : m)
    for (const auto& e : row)
      if (!e.is_zero()) return false;
  return true;
}

Tensor11 operator+(const Tensor11& a, const Tensor11& b) {
  require_same_chart(a.chart, b.chart);
  Tensor11 out = a;
  for (size_t i = 0; i < out.m.size(); ++i)
    for (size_t j = 0; j < out.m.size(); ++j) out.m[i][j] += b.m[i][j];
  return out;
}

Tensor11 operator-(const Tensor11& a, const Tensor11& b) {
  require_same_chart(a.chart, b.chart);
  Tensor11 out = a;
  for (size_t i = 0; i < out.m.size(); ++i)
    for (size_t j = 0; j < out.m.size(); ++j) out.m[i][j] -= b.m[i][j];
  return out;
}

Tensor11 operator*(const Expr& f, const Tensor11& a) {
  Tensor11 out = a;
  for (auto& row : out.m)
    for (auto& e : row) e = f * e;
  return out;
}

VecField tensor_apply(const Tensor11& j, const VecField& x) {
  require_same_chart(j.chart, x.chart);
  VecField out = VecField::zero(x.chart);
  for (int a = 0; a < x.chart->dim(); ++a) {
    Expr acc;
    for (int b = 0; b < x.chart->dim(); ++b) {
      if (j.m[a][b].is_zero() || x.comp[b].is_zero()) continue;
      acc += j.m[a][b] * x.comp[b];
    }
    out.comp[a] = acc;
  }
  return out;
}

Tensor11 tensor_compose(const Tensor11& j, const Tensor11& k) {
  require_same_chart(j.chart, k.chart);
  Tensor11 out = Tensor11::zero(j.chart);
  int n = j.chart->dim();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Expr acc;
      for (int c = 0; c < n; ++c) {
        if (j.m[a][c].is_zero() || k.m[c][b].is_zero()) continue;
        acc += j.m[a][c] * k.m[c][b];
      }
      out.m[a][b] = acc;
    }
  return out;
}

Tensor11 tensor_from_pairing(ChartPtr c,
                             const std::vector<std::pair<int, Form>>& terms) {
  Tensor11 out = Tensor11::zero(c);
  for (const auto& [a, f] : terms) {
    if (f.degree != 1) throw DomainError("tensor_from_pairing needs 1-forms");
    for (const auto& [k, coeff] : f.comp) out.m[a][k[0]] += coeff;
  }
  return out;
}

bool tensor_equal(const Tensor11& a, const Tensor11& b) {
  if (a.chart.get() != b.chart.get()) return false;
  for (size_t i = 0; i < a.m.size(); ++i)
    for (size_t j = 0; j < a.m.size(); ++j)
      if (!are_equal(a.m[i][j], b.m[i][j])) return false;
  return true;
}

Form insert_tensor(const Tensor11& j, const Form& a) {
  require_same_chart(j.chart, a.chart);
  if (a.degree == 0) return Form::zero(a.chart, 0);  // i_J f = 0
  Form out = Form::zero(a.chart, a.degree);
  int n = a.chart->dim();
  for (const auto& [k, c] : a.comp)
    for (size_t t = 0; t < k.size(); ++t) {
      int aidx = k[t];
      for (int b = 0; b < n; ++b) {
        if (j.m[aidx][b].is_zero()) continue;
        FormKey nk = k;
        nk[t] = b;
        out.add_term(std::move(nk), j.m[aidx][b] * c);
      }
    }
  return out;
}

Form vertical_derivation(const Tensor11& j, const Form& a) {
  // d_J = i_J o d - d o i_J
  return insert_tensor(j, d(a)) - d(insert_tensor(j, a));
}

Form vertical_derivation(const Tensor11& j, const Expr& f) {
  Form out = Form::zero(j.chart, 1);
  int n = j.chart->dim();
  for (int b = 0; b < n; ++b) {
    Expr acc;
    for (int a = 0; a < n; ++a) {
      if (j.m[a][b].is_zero()) continue;
      acc += f.diff(j.chart->coord(a)) * j.m[a][b];
    }
    if (!acc.is_zero()) out.add_term(FormKey{b}, acc);
  }
  return out;
}

VecField nijenhuis_bracket(const Tensor11& j, const Tensor11& k, const VecField& x,
                           const VecField& y) {
  VecField jx = tensor_apply(j, x), ky = tensor_apply(k, y);
  VecField term1 = lie_bracket(jx, ky);
  VecField term2 = tensor_apply(j, tensor_apply(k, lie_bracket(x, y)));
  VecField term3 = tensor_apply(j, lie_bracket(x, ky));
  VecField term4 = tensor_apply(k, lie_bracket(jx, y));
  return term1 + term2 - term3 - term4;
}

Form lie_derivative(const VecField& x, const Form& a) {
  if (a.degree == 0) return Form::scalar(a.chart, apply_vf(x, a.scalar_value()));
  return interior(x, d(a)) + d(interior(x, a));
}

// ===========================================================================
// vector-valued forms

Form contract_gradient(const Expr& f, const VecValuedForm& v) {
  if (static_cast<int>(v.slots.size()) != v.chart->dim())
    throw DomainError("contract_gradient needs tangent-valued slots");
  Form out = Form::zero(v.chart, v.degree());
  for (int a = 0; a < v.chart->dim(); ++a) {
    if (v.slots[a].is_zero()) continue;
    Expr g = f.diff(v.chart->coord(a));
    if (g.is_zero()) continue;
    out = out + g * v.slots[a];
  }
  return out;
}

VecField apply_vecvalued(const VecValuedForm& v, const std::vector<VecField>& xs) {
  if (static_cast<int>(v.slots.size()) != v.chart->dim())
    throw DomainError("apply_vecvalued needs tangent-valued slots");
  VecField out = VecField::zero(v.chart);
  for (int a = 0; a < v.chart->dim(); ++a) {
    if (v.slots[a].is_zero()) continue;
    out.comp[a] = evaluate(v.slots[a], xs);
  }
  return out;
}

// ===========================================================================
// chart maps

ChartMap ChartMap::identity(ChartPtr c) {
  ChartMap m{c, c, {}};
  for (int a = 0; a < c->dim(); ++a) m.exprs.push_back(Expr(c->coord(a)));
  return m;
}

Expr ChartMap::pull_expr(const Expr& f) const {
  std::map<Sym, Expr> sub;
  for (int t = 0; t < target->dim(); ++t) sub.emplace(target->coord(t), exprs[t]);
  return f.subs(sub);
}

ChartMap compose(const ChartMap& outer, const ChartMap& inner) {
  if (outer.source.get() != inner.target.get())
    throw DomainError("chart map composition mismatch");
  ChartMap out{inner.source, outer.target, {}};
  std::map<Sym, Expr> sub;
  for (int t = 0; t < inner.target->dim(); ++t)
    sub.emplace(inner.target->coord(t), inner.exprs[t]);
  for (const auto& e : outer.exprs) out.exprs.push_back(e.subs(sub));
  return out;
}

ExprMat jacobian(const ChartMap& m) {
  ExprMat out(m.target->dim(), ExprVec(m.source->dim()));
  for (int t = 0; t < m.target->dim(); ++t)
    for (int s = 0; s < m.source->dim(); ++s)
      out[t][s] = m.exprs[t].diff(m.source->coord(s));
  return out;
}

Form pullback(const ChartMap& m, const Form& a) {
  if (a.chart.get() != m.target.get())
    throw DomainError("pullback: form does not live on the map's target");
  if (a.degree == 0) return Form::scalar(m.source, m.pull_expr(a.scalar_value()));
  // differentials of the component functions
  std::vector<Form> dm;
  for (int t = 0; t < m.target->dim(); ++t) {
    Form f = Form::zero(m.source, 1);
    for (int s = 0; s < m.source->dim(); ++s) {
      Expr de = m.exprs[t].diff(m.source->coord(s));
      if (!de.is_zero()) f.add_term(FormKey{s}, de);
    }
    dm.push_back(std::move(f));
  }
  Form out = Form::zero(m.source, a.degree);
  for (const auto& [k, c] : a.comp) {
    Form w = Form::scalar(m.source, m.pull_expr(c));
    for (int idx : k) {
      Form next = Form::zero(m.source, w.degree + 1);
      for (const auto& [kw, cw] : w.comp)
        for (const auto& [kd, cd] : dm[idx].comp) {
          FormKey nk = kw;
          nk.insert(nk.end(), kd.begin(), kd.end());
          next.add_term(std::move(nk), cw * cd);
        }
      w = std::move(next);
    }
    out = out + w;
  }
  return out;
}

ExprVec pushforward_components(const ChartMap& m, const VecField& x) {
  if (x.chart.get() != m.source.get())
    throw DomainError("pushforward: field does not live on the map's source");
  ExprVec out(m.target->dim());
  for (int t = 0; t < m.target->dim(); ++t) out[t] = apply_vf(x, m.exprs[t]);
  return out;
}

VecField pushforward(const ChartMap& m, const ChartMap& inverse, const VecField& x) {
  if (inverse.source.get() != m.target.get() || inverse.target.get() != m.source.get())
    throw DomainError("pushforward: inverse map has wrong charts");
  ExprVec comps = pushforward_components(m, x);
  std::map<Sym, Expr> sub;
  for (int s = 0; s < m.source->dim(); ++s)
    sub.emplace(m.source->coord(s), inverse.exprs[s]);
  VecField out = VecField::zero(m.target);
  for (int t = 0; t < m.target->dim(); ++t) out.comp[t] = comps[t].subs(sub);
  return out;
}

// ===========================================================================
// linear algebra over the function field

ExprMat mat_identity(int n) {
  ExprMat out(n, ExprVec(n));
  for (int i = 0; i < n; ++i) out[i][i] = Expr(1);
  return out;
}

ExprMat mat_mul(const ExprMat& a, const ExprMat& b) {
  size_t n = a.size(), m = b[0].size(), k = b.size();
  ExprMat out(n, ExprVec(m));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) {
      Expr acc;
      for (size_t c = 0; c < k; ++c) acc += a[i][c] * b[c][j];
      out[i][j] = acc;
    }
  return out;
}

Expr mat_det(const ExprMat& a) {
  size_t n = a.size();
  if (n == 0) return Expr(1);
  // Bareiss with row-wise denominator clearing; the final pivot is the
  // determinant of the cleared matrix, rescaled at the end
  ExprMat m = a;
  Expr scale(1);
  for (auto& row : m)
    for (size_t c = 0; c < n; ++c) {
      Expr den = row[c].denominator_expr();
      if (den.is_one()) continue;
      for (auto& e : row) e *= den;
      scale *= den;
    }
  int sign = 1;
  Expr prev(1);
  for (size_t col = 0; col + 1 < n; ++col) {
    size_t piv = col;
    while (piv < n && m[piv][col].is_zero()) ++piv;
    if (piv == n) return Expr();
    if (piv != col) {
      std::swap(m[piv], m[col]);
      sign = -sign;
    }
    for (size_t r = col + 1; r < n; ++r) {
      for (size_t c = col + 1; c < n; ++c)
        m[r][c] = div_exact(m[r][c] * m[col][col] - m[r][col] * m[col][c], prev);
      m[r][col] = Expr();
    }
    prev = m[col][col];
  }
  Expr det = m[n - 1][n - 1];
  if (sign < 0) det = -det;
  return det / scale;
}

ExprMat mat_inverse(const ExprMat& a) {
  size_t n = a.size();
  ExprMat m = a, inv = mat_identity(static_cast<int>(n));
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    while (piv < n && m[piv][col].is_zero()) ++piv;
    if (piv == n) throw SingularError("matrix is singular");
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    Expr p = m[col][col];
    for (size_t c = 0; c < n; ++c) {
      m[col][c] /= p;
      inv[col][c] /= p;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col].is_zero()) continue;
      Expr f = m[r][col];
      for (size_t c = 0; c < n; ++c) {
        m[r][c] -= f * m[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

namespace {

// clears denominators row by row so Bareiss elimination stays polynomial
void clear_denominators(ExprMat& m) {
  for (auto& row : m)
    for (size_t c = 0; c < row.size(); ++c) {
      Expr den = row[c].denominator_expr();
      if (den.is_one()) continue;
      for (auto& e : row) e *= den;
    }
}

// fraction-free (Bareiss) elimination rank; avoids rational-function gcds
int elimination_rank(ExprMat m) {
  if (m.empty()) return 0;
  clear_denominators(m);
  size_t rows = m.size(), cols = m[0].size();
  int rank = 0;
  size_t row = 0;
  Expr prev(1);
  for (size_t col = 0; col < cols && row < rows; ++col) {
    size_t piv = row;
    while (piv < rows && m[piv][col].is_zero()) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[row]);
    for (size_t r = row + 1; r < rows; ++r) {
      for (size_t c = col + 1; c < cols; ++c)
        m[r][c] = div_exact(m[r][c] * m[row][col] - m[r][col] * m[row][c], prev);
      m[r][col] = Expr();
    }
    prev = m[row][col];
    ++row;
    ++rank;
  }
  return rank;
}

int rational_rank(std::vector<std::vector<Rat>> m) {
  if (m.empty()) return 0;
  size_t rows = m.size(), cols = m[0].size();
  int rank = 0;
  size_t row = 0;
  for (size_t col = 0; col < cols && row < rows; ++col) {
    size_t piv = row;
    while (piv < rows && m[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[row]);
    for (size_t r = row + 1; r < rows; ++r) {
      if (m[r][col] == 0) continue;
      Rat f = m[r][col] / m[row][col];
      for (size_t c = col; c < cols; ++c) m[r][c] -= f * m[row][c];
    }
    ++row;
    ++rank;
  }
  return rank;
}

}  // namespace

int symbolic_rank(const ExprMat& a) {
  int sym_rank = elimination_rank(a);
  if (a.empty() || sym_rank == 0) return sym_rank;
  // cross-check at random rational specializations of the atoms
  int best = -1;
  for (uint64_t salt = 1; salt <= 5; ++salt) {
    AtomProbe probe(salt * 7919);
    std::vector<std::vector<Rat>> m;
    bool ok = true;
    for (const auto& row : a) {
      std::vector<Rat> r;
      for (const auto& e : row) {
        auto v = probe.eval(e);
        if (!v) {
          ok = false;
          break;
        }
        r.push_back(*v);
      }
      if (!ok) break;
      m.push_back(std::move(r));
    }
    if (!ok) continue;
    best = std::max(best, rational_rank(std::move(m)));
    if (best == sym_rank) return sym_rank;
  }
  if (best < 0) throw Error("rank cross-check: all specializations hit poles");
  if (best != sym_rank)
    throw Error("rank mismatch between elimination (" + std::to_string(sym_rank) +
                ") and specialization (" + std::to_string(best) + ")");
  return sym_rank;
}

std::optional<LinearSolution> solve_linear(const ExprMat& a, const ExprVec& b) {
  size_t rows = a.size();
  size_t cols = rows ? a[0].size() : 0;
  ExprMat m = a;
  ExprVec rhs = b;
  std::vector<int> pivot_col;  // per pivot row
  size_t row = 0;
  for (size_t col = 0; col < cols && row < rows; ++col) {
    size_t piv = row;
    while (piv < rows && m[piv][col].is_zero()) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[row]);
    std::swap(rhs[piv], rhs[row]);
    Expr p = m[row][col];
    for (size_t c = 0; c < cols; ++c) m[row][c] /= p;
    rhs[row] /= p;
    for (size_t r = 0; r < rows; ++r) {
      if (r == row || m[r][col].is_zero()) continue;
      Expr f = m[r][col];
      for (size_t c = 0; c < cols; ++c) m[r][c] -= f * m[row][c];
      rhs[r] -= f * rhs[row];
    }
    pivot_col.push_back(static_cast<int>(col));
    ++row;
  }
  for (size_t r = row; r < rows; ++r)
    if (!rhs[r].is_zero()) return std::nullopt;

  LinearSolution sol;
  sol.particular.assign(cols, Expr());
  for (size_t pr = 0; pr < pivot_col.size(); ++pr)
    sol.particular[pivot_col[pr]] = rhs[pr];
  std::vector<bool> is_pivot(cols, false);
  for (int pc : pivot_col) is_pivot[pc] = true;
  for (size_t fc = 0; fc < cols; ++fc) {
    if (is_pivot[fc]) continue;
    ExprVec v(cols, Expr());
    v[fc] = Expr(1);
    for (size_t pr = 0; pr < pivot_col.size(); ++pr) v[pivot_col[pr]] = -m[pr][fc];
    sol.nullspace.push_back(std::move(v));
  }
  return sol;
}

}  // namespace fieldforms
