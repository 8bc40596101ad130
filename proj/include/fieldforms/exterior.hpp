// Differential forms, vector fields and (1,1)-tensors on a fixed chart,
// with wedge, exterior derivative, interior product, Lie bracket, pullback,
// Nijenhuis-type brackets and the vertical derivation d_J.
//
// Everything is componentwise in the chart's coordinate basis; forms are
// stored sparsely keyed by strictly increasing coordinate index tuples.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fieldforms/expr.hpp"
#include "fieldforms/linalg.hpp"

namespace fieldforms {

// ---------------------------------------------------------------------------
// charts

enum class Role { Base, Fiber, Time, Momentum, Velocity, FrameBlock };

struct CoordInfo {
  Sym s;
  Role role = Role::Base;
  int i = 0, j = 0;  // block index pair where applicable
};

class Chart {
 public:
  explicit Chart(std::vector<CoordInfo> coords);
  int dim() const { return static_cast<int>(coords_.size()); }
  Sym coord(int a) const { return coords_[a].s; }
  const CoordInfo& info(int a) const { return coords_[a]; }
  int index_of(Sym s) const;           // throws DomainError when absent
  bool contains(Sym s) const;
  std::vector<Sym> syms() const;
  std::string describe() const;

 private:
  std::vector<CoordInfo> coords_;
  std::map<Sym, int> index_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::vector<CoordInfo> coords);

// ---------------------------------------------------------------------------
// vector fields

struct VecField {
  ChartPtr chart;
  ExprVec comp;  // X = sum comp[a] d/d coord(a)

  static VecField zero(ChartPtr c);
  static VecField basis(ChartPtr c, int a);
  Expr coeff(int a) const { return comp[a]; }
  bool is_zero() const;
};

VecField operator+(const VecField&, const VecField&);
VecField operator-(const VecField&, const VecField&);
VecField operator*(const Expr&, const VecField&);
VecField lie_bracket(const VecField& x, const VecField& y);
// X applied to a function
Expr apply_vf(const VecField& x, const Expr& f);

// ---------------------------------------------------------------------------
// forms

// strictly increasing coordinate index tuple
using FormKey = std::vector<int>;

struct Form {
  ChartPtr chart;
  int degree = 0;
  std::map<FormKey, Expr> comp;

  static Form zero(ChartPtr c, int degree);
  static Form scalar(ChartPtr c, Expr f);      // degree 0
  static Form d_coord(ChartPtr c, int a);      // the 1-form d(coord a)
  static Form volume(ChartPtr c, const std::vector<int>& idx);  // dx^{i1}^...^

  // adds c * d(key[0]) ^ ... with the key in any order; sign normalized
  void add_term(FormKey key, Expr c);
  // component with arbitrary index order (0 on repeated indices)
  Expr coeff_signed(FormKey key) const;
  bool is_zero() const;
  Expr scalar_value() const;  // degree 0 only
};

Form operator+(const Form&, const Form&);
Form operator-(const Form&, const Form&);
Form operator*(const Expr&, const Form&);
Form wedge(const Form& a, const Form& b);
Form d(const Form& a);
Form interior(const VecField& x, const Form& a);  // throws on degree 0
Expr evaluate(const Form& a, const std::vector<VecField>& xs);
bool form_equal(const Form& a, const Form& b);

// ---------------------------------------------------------------------------
// (1,1)-tensors, entry (a,b) = coefficient of d/d a (x) d b

struct Tensor11 {
  ChartPtr chart;
  ExprMat m;

  static Tensor11 zero(ChartPtr c);
  static Tensor11 identity(ChartPtr c);
  bool is_zero() const;
};

Tensor11 operator+(const Tensor11&, const Tensor11&);
Tensor11 operator-(const Tensor11&, const Tensor11&);
Tensor11 operator*(const Expr&, const Tensor11&);
VecField tensor_apply(const Tensor11& j, const VecField& x);
Tensor11 tensor_compose(const Tensor11& j, const Tensor11& k);  // j after k
// d/d a (x) form  accumulated into a tensor
Tensor11 tensor_from_pairing(ChartPtr c, const std::vector<std::pair<int, Form>>& terms);
bool tensor_equal(const Tensor11& a, const Tensor11& b);

// insertion derivation i_J and vertical derivation d_J = [i_J, d]
Form insert_tensor(const Tensor11& j, const Form& a);
Form vertical_derivation(const Tensor11& j, const Form& a);
Form vertical_derivation(const Tensor11& j, const Expr& f);  // df o J

// {J,K}(X,Y) = [JX,KY] + JK[X,Y] - J[X,KY] - K[JX,Y]
VecField nijenhuis_bracket(const Tensor11& j, const Tensor11& k, const VecField& x,
                           const VecField& y);

// Lie derivative via Cartan's identity
Form lie_derivative(const VecField& x, const Form& a);

// ---------------------------------------------------------------------------
// vector-valued forms: ordered list of slot forms (slot alpha carries r_alpha)

struct VecValuedForm {
  ChartPtr chart;
  std::vector<Form> slots;

  int degree() const { return slots.empty() ? 0 : slots.front().degree; }
};

// For forms valued in the tangent bundle, slots are indexed by chart
// coordinates; (df o V) contracts the value against the gradient of f.
Form contract_gradient(const Expr& f, const VecValuedForm& v);
// V with tangent-valued slots applied to argument fields -> vector field
VecField apply_vecvalued(const VecValuedForm& v, const std::vector<VecField>& xs);

// ---------------------------------------------------------------------------
// chart maps

struct ChartMap {
  ChartPtr source;
  ChartPtr target;
  ExprVec exprs;  // one expression over source symbols per target symbol

  static ChartMap identity(ChartPtr c);
  Expr pull_expr(const Expr& f) const;  // substitute target syms
};

ChartMap compose(const ChartMap& outer, const ChartMap& inner);
ExprMat jacobian(const ChartMap& m);  // d exprs[t] / d source[s], [t][s]
Form pullback(const ChartMap& m, const Form& a);
// pushforward along an invertible map (inverse supplied explicitly)
VecField pushforward(const ChartMap& m, const ChartMap& inverse, const VecField& x);
// pushforward along a submersion: components of the image vector in the
// target basis, still expressed over the source chart
ExprVec pushforward_components(const ChartMap& m, const VecField& x);

}  // namespace fieldforms
