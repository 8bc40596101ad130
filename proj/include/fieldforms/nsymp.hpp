// The n-symplectic observable algebra: symmetric Hamiltonian functions of
// rank 1 and 2, their equivalence classes of Hamiltonian vector fields, the
// symmetric Poisson bracket and the symmetrized tensor product.

#pragma once

#include "fieldforms/models.hpp"
#include "fieldforms/report.hpp"

namespace fieldforms {

// canonical coordinates (z^a, pi^alpha_a) with omega^alpha = d pi^alpha_a ^ dz^a
struct CanonicalCoords {
  ChartPtr chart;
  std::vector<int> z;                 // chart index of z^a
  std::vector<std::vector<int>> pi;   // [alpha][a] chart index of pi^alpha_a
  std::vector<Form> omega;            // the d theta family
  int slots() const { return static_cast<int>(pi.size()); }
  int base() const { return static_cast<int>(z.size()); }
};
// frame and k_cotangent models carry canonical coordinates
CanonicalCoords canonical_coords(const BundleModel& m);

struct SymObservable {
  int rank = 1;
  CanonicalCoords cc;
  std::map<std::vector<int>, Expr> comp;  // sorted index tuples

  Expr component(std::vector<int> idx) const;
};

// components may be keyed by unsorted tuples; conflicting values for the
// same symmetric slot raise a symmetry error; rank 3 is reachable only as a
// bracket value, never by direct construction
SymObservable make_observable(const CanonicalCoords& cc, int rank,
                              const std::map<std::vector<int>, Expr>& components);

struct HamClass {
  int rank = 1;                                // p
  CanonicalCoords cc;
  std::map<std::vector<int>, VecField> rep;    // X^{alpha_1..alpha_{p-1}}, sorted keys
  // kernel basis: each entry is a family of fields of the same index shape
  std::vector<std::map<std::vector<int>, VecField>> kernel;

  const VecField& field(std::vector<int> idx) const;
};

// throws DomainError("not an allowable observable ...") with a witness when
// the structure equation has no solution
HamClass hamiltonian_class(const SymObservable& f);

// d f^K + p! X^{(J} _| omega^{alpha)} = 0 componentwise
Report structure_equation_check(const SymObservable& f, const HamClass& x);

SymObservable poisson(const SymObservable& f, const SymObservable& g);
SymObservable sym_product(const SymObservable& f, const SymObservable& g);

// verifies [[X_f, X_g]] = (p+q-1)!/(p! q!) X_{{f,g}} through the structure
// equation of the bracket observable
Report vf_class_bracket(const SymObservable& f, const SymObservable& g);

}  // namespace fieldforms
