// Exact symbolic scalars over named coordinates and opaque function symbols.
//
// An Expr is kept permanently in rational normal form: a pair of multivariate
// polynomials num/den over "atoms" (plain symbols and function applications),
// with gcd(num, den) = 1 and den monic in the lexicographic term order.
// Equality of rational functions is therefore a structural comparison, and
// are_equal() additionally confirms it by exact evaluation at random rational
// points (see DESIGN notes in the README).

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace fieldforms {

using Int = mpz_class;
using Rat = mpq_class;  // the spec's Scalar: reduced, positive denominator

Rat rat(long num, long den = 1);
Rat rat_from_string(const std::string& text);
std::string str(const Rat& q);
double to_double(const Rat& q);

// ---------------------------------------------------------------------------
// errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : Error { using Error::Error; };
struct ArityError : Error { using Error::Error; };
struct EvalError : Error { using Error::Error; };
struct DivByZeroError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct SingularError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// symbols

class Expr;

// Interned identifier. The empty Sym (default constructed) is invalid.
struct Sym {
  uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
  const std::string& name() const;
  bool operator==(const Sym&) const = default;
  auto operator<=>(const Sym&) const = default;
};

// Intern a symbol by name. Names must match the grammar's ident rule.
Sym sym(std::string_view name);

// ---------------------------------------------------------------------------
// function symbols
//
// A function symbol has a fixed arity.  Differentiating an application of a
// symbol without a derivative rule produces a formal partial: the symbol
// tagged with the slot index.  Tags are kept sorted, so mixed partials agree
// structurally.  The textual form of a tagged symbol is "D<slot>_..._<name>".

struct FuncDef {
  std::string name;
  int arity = 1;
  // Per-slot derivative rules; empty -> formal partials.
  std::vector<std::function<Expr(const std::vector<Expr>&)>> slot_rules;
  // Numeric bodies; null -> evaluation through a Binding only.
  std::function<double(const std::vector<double>&)> float_body;
  std::function<Rat(const std::vector<Rat>&)> exact_body;
};

// Registers a function symbol; re-registration with a different arity throws.
void register_function(FuncDef def);
bool function_registered(std::string_view name);
int function_arity(std::string_view name);  // throws if unknown

// Mangled name of the formal partial of `name` w.r.t. sorted slot list `tags`.
std::string tagged_name(std::string_view name, const std::vector<int>& tags);

// ---------------------------------------------------------------------------
// evaluation bindings

struct Binding {
  std::map<Sym, Rat> symbols;
  // keyed by (possibly tagged) function name
  std::map<std::string, std::function<Rat(const std::vector<Rat>&)>> functions;
};

struct FloatBinding {
  std::map<Sym, double> symbols;
  std::map<std::string, std::function<double(const std::vector<double>&)>> functions;
};

// ---------------------------------------------------------------------------
// Expr

namespace detail {
struct RF;  // rational function payload
}

class Expr {
 public:
  Expr();  // zero
  Expr(long value);
  Expr(const Rat& value);
  Expr(Sym s);

  // f(args...) for the function symbol `name` (auto-registered on first use).
  static Expr apply(std::string_view name, std::vector<Expr> args);
  // formal partial application D<tags>[name](args...)
  static Expr apply_tagged(std::string_view name, std::vector<int> tags,
                           std::vector<Expr> args);

  static Expr parse(std::string_view text);

  Expr operator-() const;
  friend Expr operator+(const Expr&, const Expr&);
  friend Expr operator-(const Expr&, const Expr&);
  friend Expr operator*(const Expr&, const Expr&);
  friend Expr operator/(const Expr&, const Expr&);  // throws DivByZeroError
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }
  Expr& operator/=(const Expr& o) { return *this = *this / o; }
  Expr pow(long e) const;

  Expr diff(Sym s) const;

  bool is_zero() const;
  bool is_one() const;
  bool is_rational() const;       // no atoms at all
  Rat rational_value() const;     // requires is_rational()
  bool is_polynomial() const;     // den == 1

  // All plain symbols occurring anywhere (including inside function args).
  std::vector<Sym> free_symbols() const;
  bool depends_on(Sym s) const;
  // Base names of function symbols occurring anywhere.
  std::vector<std::string> function_names() const;

  Expr subs(const std::map<Sym, Expr>& m) const;
  // Replace applications of `name` (and its formal partials) by `body`,
  // a closed form in the parameter symbols.
  Expr subs_function(std::string_view name, const std::vector<Sym>& params,
                     const Expr& body) const;

  Rat eval_exact(const Binding& b) const;
  double eval_float(const FloatBinding& b) const;

  std::string str() const;

  // canonical-representation comparison (true equality for the rational class)
  bool same(const Expr& o) const;
  uint64_t hash() const;

  // numerator / denominator as polynomial expressions
  Expr numerator_expr() const;
  Expr denominator_expr() const;

  const detail::RF& rf() const { return *p_; }
  explicit Expr(std::shared_ptr<const detail::RF> p) : p_(std::move(p)) {}

 private:
  std::shared_ptr<const detail::RF> p_;
};

// a - b normalizes to zero, confirmed at >= 8 random rational points.
bool are_equal(const Expr& a, const Expr& b);

// exact polynomial division (both arguments polynomial, divisor divides the
// dividend); bypasses gcd normalization, used by fraction-free elimination
Expr div_exact(const Expr& a, const Expr& b);

// Identity on the canonical representation; kept as the spec's normalize().
inline Expr normalize(const Expr& e) { return e; }

// Global seed from which every randomized check in the repo draws.
void set_global_seed(uint64_t seed);
uint64_t global_seed();

// Deterministic random rational assignment to atoms (symbols and function
// applications alike), shared across expressions; used to cross-check
// symbolic ranks and equalities by exact specialization.
class AtomProbe {
 public:
  explicit AtomProbe(uint64_t salt);
  // nullopt when a denominator vanishes at the sample point
  std::optional<Rat> eval(const Expr& e);

 private:
  uint64_t salt_;
  std::map<uint32_t, Rat> values_;
};

inline Expr operator+(const Expr& a, long b) { return a + Expr(b); }
inline Expr operator+(long a, const Expr& b) { return Expr(a) + b; }
inline Expr operator-(const Expr& a, long b) { return a - Expr(b); }
inline Expr operator-(long a, const Expr& b) { return Expr(a) - b; }
inline Expr operator*(const Expr& a, long b) { return a * Expr(b); }
inline Expr operator*(long a, const Expr& b) { return Expr(a) * b; }
inline Expr operator/(const Expr& a, long b) { return a / Expr(b); }
inline Expr operator/(long a, const Expr& b) { return Expr(a) / b; }

}  // namespace fieldforms
