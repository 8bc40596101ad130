#include "fieldforms/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <sstream>

namespace fieldforms {

// ===========================================================================
// rationals

Rat rat(long num, long den) {
  if (den == 0) throw DivByZeroError("rational with zero denominator");
  Rat q(num, den);
  q.canonicalize();
  return q;
}

Rat rat_from_string(const std::string& text) {
  Rat q;
  if (q.set_str(text, 10) != 0) throw ParseError("bad rational literal: " + text);
  q.canonicalize();
  return q;
}

std::string str(const Rat& q) { return q.get_str(); }
double to_double(const Rat& q) { return q.get_d(); }

// ===========================================================================
// atom table

namespace detail {

struct Atom {
  bool is_func = false;
  std::string name;        // symbol name, or function base name
  int arity = 0;           // functions only
  std::vector<int> tags;   // sorted formal-partial slots
  std::vector<Expr> args;  // canonical argument expressions
  std::string key;         // total-order key; also the printed head for syms
};

struct Registry {
  std::shared_mutex mu;
  std::vector<Atom> atoms;
  std::map<std::string, uint32_t> by_key;
  std::map<std::string, FuncDef, std::less<>> funcs;
};

Registry& reg() {
  static Registry* r = new Registry;
  return *r;
}

const Atom& atom(uint32_t id) {
  std::shared_lock lk(reg().mu);
  return reg().atoms[id];
}

bool atom_less(uint32_t a, uint32_t b) {
  if (a == b) return false;
  std::shared_lock lk(reg().mu);
  return reg().atoms[a].key < reg().atoms[b].key;
}

uint32_t intern(Atom a) {
  auto& r = reg();
  std::unique_lock lk(r.mu);
  auto it = r.by_key.find(a.key);
  if (it != r.by_key.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(r.atoms.size());
  r.atoms.push_back(std::move(a));
  r.by_key.emplace(r.atoms.back().key, id);
  return id;
}

// ---------------------------------------------------------------------------
// monomials and polynomials

// variable-exponent pairs sorted ascending by atom order, exponents > 0
using Mono = std::vector<std::pair<uint32_t, int>>;

// lex compare: walk atoms in ascending order; first exponent difference wins
int mono_cmp(const Mono& a, const Mono& b) {
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (i == a.size()) return -1;  // exponents are positive by invariant
    if (j == b.size()) return 1;
    if (a[i].first == b[j].first) {
      if (a[i].second != b[j].second) return a[i].second > b[j].second ? 1 : -1;
      ++i, ++j;
    } else if (atom_less(a[i].first, b[j].first)) {
      return 1;  // a has an earlier atom with positive exponent
    } else {
      return -1;
    }
  }
  return 0;
}

Mono mono_mul(const Mono& a, const Mono& b) {
  Mono out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i, ++j;
    } else if (atom_less(a[i].first, b[j].first)) {
      out.push_back(a[i++]);
    } else {
      out.push_back(b[j++]);
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

// a / b if b divides a
std::optional<Mono> mono_div(const Mono& a, const Mono& b) {
  Mono out;
  size_t i = 0;
  for (const auto& [v, e] : b) {
    while (i < a.size() && a[i].first != v) {
      out.push_back(a[i]);
      ++i;
    }
    if (i == a.size() || a[i].second < e) return std::nullopt;
    if (a[i].second > e) out.emplace_back(v, a[i].second - e);
    ++i;
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  return out;
}

struct Term {
  Mono m;
  Rat c;
};

// terms sorted descending, nonzero coefficients
using Poly = std::vector<Term>;

Poly poly_zero() { return {}; }

Poly poly_const(const Rat& c) {
  if (c == 0) return {};
  return {Term{{}, c}};
}

Poly poly_atom(uint32_t id) { return {Term{{{id, 1}}, Rat(1)}}; }

bool poly_is_zero(const Poly& p) { return p.empty(); }

bool poly_is_const(const Poly& p) {
  return p.empty() || (p.size() == 1 && p[0].m.empty());
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int c = mono_cmp(a[i].m, b[j].m);
    if (c > 0) {
      out.push_back(a[i++]);
    } else if (c < 0) {
      out.push_back(b[j++]);
    } else {
      Rat s = a[i].c + b[j].c;
      if (s != 0) out.push_back(Term{a[i].m, s});
      ++i, ++j;
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

Poly poly_neg(const Poly& a) {
  Poly out = a;
  for (auto& t : out) t.c = -t.c;
  return out;
}

Poly poly_sub(const Poly& a, const Poly& b) { return poly_add(a, poly_neg(b)); }

Poly poly_term_mul(const Poly& a, const Mono& m, const Rat& c) {
  Poly out;
  out.reserve(a.size());
  for (const auto& t : a) out.push_back(Term{mono_mul(t.m, m), t.c * c});
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  if (b.size() == 1) return poly_term_mul(a, b[0].m, b[0].c);
  if (a.size() == 1) return poly_term_mul(b, a[0].m, a[0].c);
  struct MonoGreater {
    bool operator()(const Mono& x, const Mono& y) const { return mono_cmp(x, y) > 0; }
  };
  std::map<Mono, Rat, MonoGreater> acc;
  for (const auto& ta : a)
    for (const auto& tb : b) acc[mono_mul(ta.m, tb.m)] += ta.c * tb.c;
  Poly out;
  out.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (c != 0) out.push_back(Term{m, c});
  return out;
}

Poly poly_pow(const Poly& a, long e) {
  Poly out = poly_const(Rat(1));
  Poly base = a;
  while (e > 0) {
    if (e & 1) out = poly_mul(out, base);
    e >>= 1;
    if (e) base = poly_mul(base, base);
  }
  return out;
}

// exact division; throws on failure (internal use after gcd)
Poly poly_divexact(const Poly& a, const Poly& b) {
  if (poly_is_zero(b)) throw DivByZeroError("polynomial division by zero");
  Poly rem = a, quot;
  while (!rem.empty()) {
    auto q = mono_div(rem[0].m, b[0].m);
    if (!q) throw Error("internal: inexact polynomial division");
    Rat c = rem[0].c / b[0].c;
    quot.push_back(Term{*q, c});
    rem = poly_sub(rem, poly_term_mul(b, *q, c));
  }
  return quot;
}

std::vector<uint32_t> poly_vars(const Poly& p) {
  std::set<uint32_t> s;
  for (const auto& t : p)
    for (const auto& [v, e] : t.m) s.insert(v);
  return {s.begin(), s.end()};
}

int poly_deg_in(const Poly& p, uint32_t v) {
  int d = 0;
  for (const auto& t : p)
    for (const auto& [var, e] : t.m)
      if (var == v) d = std::max(d, e);
  return d;
}

// coefficients of p viewed as univariate in v (index = degree)
std::vector<Poly> poly_coeffs_in(const Poly& p, uint32_t v) {
  std::vector<Poly> cs(poly_deg_in(p, v) + 1);
  for (const auto& t : p) {
    int d = 0;
    Mono rest;
    for (const auto& [var, e] : t.m) {
      if (var == v)
        d = e;
      else
        rest.emplace_back(var, e);
    }
    cs[d] = poly_add(cs[d], Poly{Term{rest, t.c}});
  }
  return cs;
}

Poly poly_from_coeffs(const std::vector<Poly>& cs, uint32_t v) {
  Poly out;
  for (size_t d = 0; d < cs.size(); ++d) {
    if (poly_is_zero(cs[d])) continue;
    Mono m;
    if (d > 0) m = Mono{{v, int(d)}};
    out = poly_add(out, poly_term_mul(cs[d], m, Rat(1)));
  }
  return out;
}

Poly poly_gcd(const Poly& a, const Poly& b);

// makes leading coefficient 1
Poly poly_monic(const Poly& p) {
  if (p.empty()) return p;
  Rat lc = p[0].c;
  Poly out = p;
  for (auto& t : out) t.c /= lc;
  return out;
}

// content of p w.r.t. main variable v = gcd of its univariate coefficients
Poly poly_content_in(const Poly& p, uint32_t v) {
  auto cs = poly_coeffs_in(p, v);
  Poly g;
  for (const auto& c : cs) {
    if (poly_is_zero(c)) continue;
    g = poly_gcd(g, c);
    if (poly_is_const(g) && !poly_is_zero(g)) break;
  }
  return poly_is_zero(g) ? poly_const(Rat(1)) : g;
}

// pseudo-remainder of a by b in variable v
Poly poly_prem(Poly a, const Poly& b, uint32_t v) {
  int db = poly_deg_in(b, v);
  auto bc = poly_coeffs_in(b, v);
  const Poly& lcb = bc[db];
  int da = poly_deg_in(a, v);
  while (!poly_is_zero(a) && (da = poly_deg_in(a, v)) >= db) {
    auto ac = poly_coeffs_in(a, v);
    const Poly& lca = ac[da];
    // a <- lcb * a - lca * v^(da-db) * b
    Mono shift;
    if (da - db > 0) shift = Mono{{v, da - db}};
    Poly t = poly_term_mul(poly_mul(lca, b), shift, Rat(1));
    a = poly_sub(poly_mul(a, lcb), t);
    if (poly_deg_in(a, v) == da && !poly_is_zero(a)) {
      // degree must strictly drop; guard against stalls
      throw Error("internal: pseudo-division stall");
    }
  }
  return a;
}

// gcd over Q[atoms], primitive PRS; result is monic
namespace {

// univariate gcd degree after specializing every atom but `v` at random
// rational values; -1 when the sample was degenerate.  A result of 0 is a
// sound certificate that the true gcd is constant in `v` (specialization can
// only enlarge the gcd).
int specialized_gcd_degree(const Poly& a, const Poly& b, uint32_t v,
                           const std::map<uint32_t, Rat>& point) {
  auto univ = [&](const Poly& p) -> std::vector<Rat> {
    std::vector<Rat> coeff;
    for (const auto& t : p) {
      Rat c = t.c;
      int deg = 0;
      for (const auto& [var, e] : t.m) {
        if (var == v) {
          deg = e;
          continue;
        }
        auto it = point.find(var);
        for (int i = 0; i < e; ++i) c *= it->second;
      }
      if (static_cast<int>(coeff.size()) <= deg) coeff.resize(deg + 1, Rat(0));
      coeff[deg] += c;
    }
    while (!coeff.empty() && coeff.back() == 0) coeff.pop_back();
    return coeff;
  };
  std::vector<Rat> pa = univ(a), pb = univ(b);
  if (pa.empty() || pb.empty()) return -1;  // degenerate sample
  // euclidean algorithm over Q[v]
  while (!pb.empty()) {
    if (pb.size() == 1) return 0;
    // pa mod pb
    std::vector<Rat> r = pa;
    while (r.size() >= pb.size()) {
      Rat f = r.back() / pb.back();
      size_t off = r.size() - pb.size();
      for (size_t i = 0; i < pb.size(); ++i) r[off + i] -= f * pb[i];
      while (!r.empty() && r.back() == 0) r.pop_back();
    }
    pa = pb;
    pb = r;
  }
  return static_cast<int>(pa.size()) - 1;
}

}  // namespace

Poly poly_gcd(const Poly& a, const Poly& b) {
  if (poly_is_zero(a)) return poly_monic(b);
  if (poly_is_zero(b)) return poly_monic(a);
  if (poly_is_const(a) || poly_is_const(b)) return poly_const(Rat(1));
  if (mono_cmp(a[0].m, b[0].m) == 0 && a.size() == b.size()) {
    // quick path: proportional polynomials
    Rat k = b[0].c / a[0].c;
    bool prop = true;
    for (size_t i = 0; i < a.size() && prop; ++i)
      prop = mono_cmp(a[i].m, b[i].m) == 0 && a[i].c * k == b[i].c;
    if (prop) return poly_monic(a);
  }
  auto va = poly_vars(a), vb = poly_vars(b);
  std::vector<uint32_t> shared;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(),
                        std::back_inserter(shared));
  if (shared.empty()) return poly_const(Rat(1));

  // coprimality certificate: if each shared variable has a constant
  // specialized gcd, the multivariate gcd is constant
  {
    std::set<uint32_t> all(va.begin(), va.end());
    all.insert(vb.begin(), vb.end());
    std::mt19937_64 rng(0x5eedc0de ^ (shared.front() * 2654435761u));
    std::uniform_int_distribution<int> num_dist(-23, 23);
    std::uniform_int_distribution<int> den_dist(1, 7);
    bool all_const = true;
    for (uint32_t v : shared) {
      bool certified = false;
      for (int attempt = 0; attempt < 3 && !certified; ++attempt) {
        std::map<uint32_t, Rat> point;
        for (uint32_t var : all)
          if (var != v) point.emplace(var, rat(num_dist(rng), den_dist(rng)));
        certified = specialized_gcd_degree(a, b, v, point) == 0;
      }
      if (!certified) {
        all_const = false;
        break;
      }
    }
    if (all_const) return poly_const(Rat(1));
  }
  uint32_t v = shared.front();  // lowest shared atom as the main variable

  Poly ca = poly_content_in(a, v), cb = poly_content_in(b, v);
  Poly g = poly_gcd(ca, cb);
  Poly pa = poly_divexact(a, ca), pb = poly_divexact(b, cb);
  if (poly_deg_in(pa, v) < poly_deg_in(pb, v)) std::swap(pa, pb);
  while (true) {
    Poly r = poly_prem(pa, pb, v);
    if (poly_is_zero(r)) break;
    if (poly_deg_in(r, v) == 0) {
      pb = poly_const(Rat(1));
      break;
    }
    r = poly_divexact(r, poly_content_in(r, v));
    pa = pb;
    pb = r;
  }
  return poly_monic(poly_mul(g, pb));
}

Poly poly_diff_atom(const Poly& p, uint32_t v) {
  Poly out;
  for (const auto& t : p) {
    for (size_t i = 0; i < t.m.size(); ++i) {
      if (t.m[i].first != v) continue;
      Term nt;
      nt.c = t.c * t.m[i].second;
      nt.m = t.m;
      if (nt.m[i].second == 1)
        nt.m.erase(nt.m.begin() + i);
      else
        nt.m[i].second -= 1;
      out = poly_add(out, Poly{nt});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// rational-function payload

struct RF {
  Poly num;
  Poly den;  // monic, gcd(num, den) = 1; den = 1 when num = 0
};

std::shared_ptr<const RF> make_rf(Poly num, Poly den) {
  if (poly_is_zero(den)) throw DivByZeroError("zero denominator after normalization");
  if (poly_is_zero(num)) return std::make_shared<RF>(RF{{}, poly_const(Rat(1))});
  if (!poly_is_const(den)) {
    Poly g = poly_gcd(num, den);
    if (!poly_is_const(g) || (!g.empty() && g[0].c != 1)) {
      num = poly_divexact(num, g);
      den = poly_divexact(den, g);
    }
  }
  Rat lc = den[0].c;
  if (lc != 1) {
    for (auto& t : den) t.c /= lc;
    for (auto& t : num) t.c /= lc;
  }
  return std::make_shared<RF>(RF{std::move(num), std::move(den)});
}

}  // namespace detail

using detail::Poly;
using detail::RF;

// ===========================================================================
// Sym

const std::string& Sym::name() const { return detail::atom(id).name; }

static bool valid_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

Sym sym(std::string_view name) {
  if (!valid_ident(name)) throw ParseError("bad symbol name: " + std::string(name));
  detail::Atom a;
  a.is_func = false;
  a.name = std::string(name);
  a.key = "s:" + a.name;
  return Sym{detail::intern(std::move(a))};
}

// ===========================================================================
// function registry

void register_function(FuncDef def) {
  if (!valid_ident(def.name)) throw ParseError("bad function name: " + def.name);
  if (def.arity < 1) throw ArityError("function arity must be >= 1: " + def.name);
  if (!def.slot_rules.empty() && int(def.slot_rules.size()) != def.arity)
    throw ArityError("derivative rule count != arity for " + def.name);
  auto& r = detail::reg();
  std::unique_lock lk(r.mu);
  auto it = r.funcs.find(def.name);
  if (it != r.funcs.end()) {
    if (it->second.arity != def.arity)
      throw ArityError("function " + def.name + " re-registered with different arity");
    it->second = std::move(def);
    return;
  }
  r.funcs.emplace(def.name, std::move(def));
}

static void ensure_builtins() {
  static std::once_flag once;
  std::call_once(once, [] {
    FuncDef s;
    s.name = "sin";
    s.arity = 1;
    s.slot_rules = {[](const std::vector<Expr>& a) { return Expr::apply("cos", a); }};
    s.float_body = [](const std::vector<double>& a) { return std::sin(a[0]); };
    register_function(s);
    FuncDef c;
    c.name = "cos";
    c.arity = 1;
    c.slot_rules = {[](const std::vector<Expr>& a) { return -Expr::apply("sin", a); }};
    c.float_body = [](const std::vector<double>& a) { return std::cos(a[0]); };
    register_function(c);
    FuncDef e;
    e.name = "exp";
    e.arity = 1;
    e.slot_rules = {[](const std::vector<Expr>& a) { return Expr::apply("exp", a); }};
    e.float_body = [](const std::vector<double>& a) { return std::exp(a[0]); };
    register_function(e);
  });
}

bool function_registered(std::string_view name) {
  ensure_builtins();
  auto& r = detail::reg();
  std::shared_lock lk(r.mu);
  return r.funcs.find(name) != r.funcs.end();
}

int function_arity(std::string_view name) {
  ensure_builtins();
  auto& r = detail::reg();
  std::shared_lock lk(r.mu);
  auto it = r.funcs.find(name);
  if (it == r.funcs.end()) throw DomainError("unknown function: " + std::string(name));
  return it->second.arity;
}

static std::optional<FuncDef> find_func(std::string_view name) {
  ensure_builtins();
  auto& r = detail::reg();
  std::shared_lock lk(r.mu);
  auto it = r.funcs.find(name);
  if (it == r.funcs.end()) return std::nullopt;
  return it->second;
}

// Arity is pinned by explicit registration; unregistered names are opaque
// function symbols whose identity includes the argument count.
static void check_registered_arity(std::string_view name, int arity) {
  ensure_builtins();
  auto& r = detail::reg();
  std::shared_lock lk(r.mu);
  auto it = r.funcs.find(name);
  if (it != r.funcs.end() && it->second.arity != arity)
    throw ArityError("arity mismatch for registered function " + std::string(name) +
                     ": got " + std::to_string(arity) + ", registered " +
                     std::to_string(it->second.arity));
}

std::string tagged_name(std::string_view name, const std::vector<int>& tags) {
  std::string out;
  for (int t : tags) out += "D" + std::to_string(t) + "_";
  out += std::string(name);
  return out;
}

// ===========================================================================
// Expr construction

static const std::shared_ptr<const RF>& zero_rf() {
  static auto z = detail::make_rf(detail::poly_zero(), detail::poly_const(Rat(1)));
  return z;
}

Expr::Expr() : p_(zero_rf()) {}
Expr::Expr(long v)
    : p_(detail::make_rf(detail::poly_const(Rat(v)), detail::poly_const(Rat(1)))) {}
Expr::Expr(const Rat& v)
    : p_(detail::make_rf(detail::poly_const(v), detail::poly_const(Rat(1)))) {}
Expr::Expr(Sym s)
    : p_(detail::make_rf(detail::poly_atom(s.id), detail::poly_const(Rat(1)))) {}

Expr Expr::apply_tagged(std::string_view name, std::vector<int> tags,
                        std::vector<Expr> args) {
  check_registered_arity(name, static_cast<int>(args.size()));
  std::sort(tags.begin(), tags.end());
  for (int t : tags)
    if (t < 1 || t > int(args.size())) throw ArityError("bad derivative slot tag");
  detail::Atom a;
  a.is_func = true;
  a.name = std::string(name);
  a.arity = static_cast<int>(args.size());
  a.tags = std::move(tags);
  a.args = std::move(args);
  a.key = "f:" + tagged_name(a.name, a.tags);
  for (const auto& arg : a.args) a.key += "|" + arg.str();
  uint32_t id = detail::intern(std::move(a));
  return Expr(detail::make_rf(detail::poly_atom(id), detail::poly_const(Rat(1))));
}

Expr Expr::apply(std::string_view name, std::vector<Expr> args) {
  return apply_tagged(name, {}, std::move(args));
}

// ===========================================================================
// arithmetic

Expr operator+(const Expr& a, const Expr& b) {
  const RF &x = a.rf(), &y = b.rf();
  using namespace detail;
  Poly num = poly_add(poly_mul(x.num, y.den), poly_mul(y.num, x.den));
  return Expr(make_rf(std::move(num), poly_mul(x.den, y.den)));
}

Expr operator-(const Expr& a, const Expr& b) {
  const RF &x = a.rf(), &y = b.rf();
  using namespace detail;
  Poly num = poly_sub(poly_mul(x.num, y.den), poly_mul(y.num, x.den));
  return Expr(make_rf(std::move(num), poly_mul(x.den, y.den)));
}

Expr operator*(const Expr& a, const Expr& b) {
  const RF &x = a.rf(), &y = b.rf();
  using namespace detail;
  return Expr(make_rf(poly_mul(x.num, y.num), poly_mul(x.den, y.den)));
}

Expr operator/(const Expr& a, const Expr& b) {
  const RF &x = a.rf(), &y = b.rf();
  using namespace detail;
  if (poly_is_zero(y.num)) throw DivByZeroError("division by zero expression");
  return Expr(make_rf(poly_mul(x.num, y.den), poly_mul(x.den, y.num)));
}

Expr Expr::operator-() const {
  using namespace detail;
  return Expr(make_rf(poly_neg(p_->num), p_->den));
}

Expr Expr::pow(long e) const {
  using namespace detail;
  if (e == 0) {
    if (is_zero()) throw DomainError("0^0 is undefined");
    return Expr(1);
  }
  if (e > 0) return Expr(make_rf(poly_pow(p_->num, e), poly_pow(p_->den, e)));
  if (is_zero()) throw DivByZeroError("zero base with negative exponent");
  return Expr(make_rf(poly_pow(p_->den, -e), poly_pow(p_->num, -e)));
}

bool Expr::is_zero() const { return detail::poly_is_zero(p_->num); }

bool Expr::is_one() const {
  return p_->num.size() == 1 && p_->num[0].m.empty() && p_->num[0].c == 1 &&
         detail::poly_is_const(p_->den);
}

bool Expr::is_rational() const {
  return detail::poly_is_const(p_->num) && detail::poly_is_const(p_->den);
}

Rat Expr::rational_value() const {
  if (!is_rational()) throw DomainError("expression is not a constant");
  if (p_->num.empty()) return Rat(0);
  return p_->num[0].c / p_->den[0].c;
}

bool Expr::is_polynomial() const { return detail::poly_is_const(p_->den); }

// ===========================================================================
// structure walks

static void collect_atoms(const Expr& e, std::set<uint32_t>& out);

static void collect_atoms_poly(const Poly& p, std::set<uint32_t>& out) {
  for (const auto& t : p)
    for (const auto& [v, ex] : t.m) {
      if (out.insert(v).second) {
        const auto& a = detail::atom(v);
        if (a.is_func)
          for (const auto& arg : a.args) collect_atoms(arg, out);
      }
    }
}

static void collect_atoms(const Expr& e, std::set<uint32_t>& out) {
  collect_atoms_poly(e.rf().num, out);
  collect_atoms_poly(e.rf().den, out);
}

std::vector<Sym> Expr::free_symbols() const {
  std::set<uint32_t> ids;
  collect_atoms(*this, ids);
  std::vector<Sym> out;
  for (uint32_t id : ids)
    if (!detail::atom(id).is_func) out.push_back(Sym{id});
  std::sort(out.begin(), out.end(),
            [](Sym a, Sym b) { return a.name() < b.name(); });
  return out;
}

bool Expr::depends_on(Sym s) const {
  std::set<uint32_t> ids;
  collect_atoms(*this, ids);
  return ids.count(s.id) > 0;
}

std::vector<std::string> Expr::function_names() const {
  std::set<uint32_t> ids;
  collect_atoms(*this, ids);
  std::set<std::string> names;
  for (uint32_t id : ids) {
    const auto& a = detail::atom(id);
    if (a.is_func) names.insert(a.name);
  }
  return {names.begin(), names.end()};
}

// ===========================================================================
// differentiation

static Expr diff_atom(uint32_t id, Sym s);

static Expr diff_poly(const Poly& p, Sym s) {
  std::set<uint32_t> ids;
  collect_atoms_poly(p, ids);
  Expr out;
  for (uint32_t v : ids) {
    Poly partial = detail::poly_diff_atom(p, v);
    if (detail::poly_is_zero(partial)) continue;
    Expr dv = diff_atom(v, s);
    if (dv.is_zero()) continue;
    out += Expr(detail::make_rf(std::move(partial), detail::poly_const(Rat(1)))) * dv;
  }
  return out;
}

static Expr diff_atom(uint32_t id, Sym s) {
  const detail::Atom a = detail::atom(id);
  if (!a.is_func) return id == s.id ? Expr(1) : Expr();
  Expr out;
  auto def = find_func(a.name);
  for (int slot = 1; slot <= a.arity; ++slot) {
    Expr inner = a.args[slot - 1].diff(s);
    if (inner.is_zero()) continue;
    Expr outer;
    if (def && !def->slot_rules.empty()) {
      if (!a.tags.empty())
        throw DomainError("formal partial of rule-bearing function " + a.name);
      outer = def->slot_rules[slot - 1](a.args);
    } else {
      std::vector<int> tags = a.tags;
      tags.push_back(slot);
      outer = Expr::apply_tagged(a.name, std::move(tags), a.args);
    }
    out += outer * inner;
  }
  return out;
}

Expr Expr::diff(Sym s) const {
  const RF& x = *p_;
  Expr dn = diff_poly(x.num, s);
  if (detail::poly_is_const(x.den)) return dn;
  Expr dd = diff_poly(x.den, s);
  Expr den(detail::make_rf(x.den, detail::poly_const(Rat(1))));
  Expr num(detail::make_rf(x.num, detail::poly_const(Rat(1))));
  return (dn * den - num * dd) / (den * den);
}

// ===========================================================================
// substitution

static Expr eval_poly_expr(const Poly& p, const std::map<uint32_t, Expr>& values) {
  Expr out;
  for (const auto& t : p) {
    Expr term(t.c);
    for (const auto& [v, e] : t.m) term *= values.at(v).pow(e);
    out += term;
  }
  return out;
}

Expr Expr::subs(const std::map<Sym, Expr>& m) const {
  std::set<uint32_t> ids;
  collect_atoms_poly(p_->num, ids);
  collect_atoms_poly(p_->den, ids);
  std::map<uint32_t, Expr> values;
  bool touched = false;
  for (uint32_t id : ids) {
    const detail::Atom a = detail::atom(id);
    if (!a.is_func) {
      auto it = m.find(Sym{id});
      if (it != m.end()) {
        values.emplace(id, it->second);
        touched = true;
      } else {
        values.emplace(id, Expr(Sym{id}));
      }
    } else {
      std::vector<Expr> args;
      bool arg_touched = false;
      for (const auto& arg : a.args) {
        Expr na = arg.subs(m);
        arg_touched = arg_touched || !na.same(arg);
        args.push_back(std::move(na));
      }
      values.emplace(id, Expr::apply_tagged(a.name, a.tags, std::move(args)));
      touched = touched || arg_touched;
    }
  }
  if (!touched) return *this;
  Expr num = eval_poly_expr(p_->num, values);
  Expr den = eval_poly_expr(p_->den, values);
  return num / den;
}

Expr Expr::subs_function(std::string_view name, const std::vector<Sym>& params,
                         const Expr& body) const {
  std::set<uint32_t> ids;
  collect_atoms_poly(p_->num, ids);
  collect_atoms_poly(p_->den, ids);
  std::map<uint32_t, Expr> values;
  for (uint32_t id : ids) {
    const detail::Atom a = detail::atom(id);
    if (!a.is_func) {
      values.emplace(id, Expr(Sym{id}));
      continue;
    }
    std::vector<Expr> args;
    for (const auto& arg : a.args)
      args.push_back(arg.subs_function(name, params, body));
    if (a.name != name) {
      values.emplace(id, Expr::apply_tagged(a.name, a.tags, std::move(args)));
      continue;
    }
    if (int(params.size()) != a.arity)
      throw ArityError("parameter count does not match arity of " + a.name);
    Expr b = body;
    for (int t : a.tags) b = b.diff(params[t - 1]);
    std::map<Sym, Expr> m;
    for (size_t i = 0; i < params.size(); ++i) m.emplace(params[i], args[i]);
    values.emplace(id, b.subs(m));
  }
  Expr num = eval_poly_expr(p_->num, values);
  Expr den = eval_poly_expr(p_->den, values);
  return num / den;
}

// ===========================================================================
// evaluation

namespace {

template <typename T>
struct EvalOps;

template <>
struct EvalOps<Rat> {
  static Rat from_rat(const Rat& q) { return q; }
  static bool is_zero(const Rat& v) { return v == 0; }
  using Fn = std::function<Rat(const std::vector<Rat>&)>;
  static Fn body(const FuncDef& d) { return d.exact_body; }
  static const std::map<std::string, Fn>& functions(const Binding& b) {
    return b.functions;
  }
  static const std::map<Sym, Rat>& symbols(const Binding& b) { return b.symbols; }
};

template <>
struct EvalOps<double> {
  static double from_rat(const Rat& q) { return q.get_d(); }
  static bool is_zero(double v) { return v == 0.0; }
  using Fn = std::function<double(const std::vector<double>&)>;
  static Fn body(const FuncDef& d) { return d.float_body; }
  static const std::map<std::string, Fn>& functions(const FloatBinding& b) {
    return b.functions;
  }
  static const std::map<Sym, double>& symbols(const FloatBinding& b) {
    return b.symbols;
  }
};

template <typename T, typename B>
T eval_atom(uint32_t id, const B& b, std::map<uint32_t, T>& memo);

template <typename T, typename B>
T eval_poly(const Poly& p, const B& b, std::map<uint32_t, T>& memo) {
  T out = EvalOps<T>::from_rat(Rat(0));
  for (const auto& t : p) {
    T term = EvalOps<T>::from_rat(t.c);
    for (const auto& [v, e] : t.m) {
      T base = eval_atom<T>(v, b, memo);
      for (int i = 0; i < e; ++i) term = term * base;
    }
    out = out + term;
  }
  return out;
}

template <typename T, typename B>
T eval_atom(uint32_t id, const B& b, std::map<uint32_t, T>& memo) {
  auto it = memo.find(id);
  if (it != memo.end()) return it->second;
  const detail::Atom a = detail::atom(id);
  T value;
  if (!a.is_func) {
    const auto& syms = EvalOps<T>::symbols(b);
    auto sit = syms.find(Sym{id});
    if (sit == syms.end()) throw EvalError("unbound symbol: " + a.name);
    value = sit->second;
  } else {
    std::vector<T> args;
    for (const auto& arg : a.args) {
      T n = eval_poly<T>(arg.rf().num, b, memo);
      T d = eval_poly<T>(arg.rf().den, b, memo);
      if (EvalOps<T>::is_zero(d))
        throw DivByZeroError("division by zero inside argument of " + a.name);
      args.push_back(n / d);
    }
    std::string key = tagged_name(a.name, a.tags);
    const auto& fns = EvalOps<T>::functions(b);
    auto fit = fns.find(key);
    if (fit != fns.end()) {
      value = fit->second(args);
    } else {
      auto def = find_func(a.name);
      auto body = def ? EvalOps<T>::body(*def) : typename EvalOps<T>::Fn{};
      if (!body || !a.tags.empty())
        throw EvalError("no evaluator for function " + key);
      value = body(args);
    }
  }
  memo.emplace(id, value);
  return value;
}

template <typename T, typename B>
T eval_rf(const RF& rf, const B& b) {
  std::map<uint32_t, T> memo;
  T n = eval_poly<T>(rf.num, b, memo);
  T d = eval_poly<T>(rf.den, b, memo);
  if (EvalOps<T>::is_zero(d)) throw DivByZeroError("division by zero at evaluation point");
  return n / d;
}

}  // namespace

Rat Expr::eval_exact(const Binding& b) const { return eval_rf<Rat>(*p_, b); }
double Expr::eval_float(const FloatBinding& b) const { return eval_rf<double>(*p_, b); }

// ===========================================================================
// printing

namespace {

void print_poly(std::ostream& os, const Poly& p);

void print_mono_factor(std::ostream& os, uint32_t id, int e) {
  const detail::Atom a = detail::atom(id);
  if (!a.is_func) {
    os << a.name;
  } else {
    os << tagged_name(a.name, a.tags) << "(";
    for (size_t i = 0; i < a.args.size(); ++i) {
      if (i) os << ", ";
      os << a.args[i].str();
    }
    os << ")";
  }
  if (e != 1) os << "^" << e;
}

void print_term(std::ostream& os, const detail::Term& t, bool first) {
  Rat c = t.c;
  if (first) {
    if (c < 0) {
      os << "-";
      c = -c;
    }
  } else {
    os << (c < 0 ? " - " : " + ");
    if (c < 0) c = -c;
  }
  bool printed = false;
  if (c != 1 || t.m.empty()) {
    os << c.get_str();
    printed = true;
  }
  for (const auto& [v, e] : t.m) {
    if (printed) os << "*";
    print_mono_factor(os, v, e);
    printed = true;
  }
}

void print_poly(std::ostream& os, const Poly& p) {
  if (p.empty()) {
    os << "0";
    return;
  }
  for (size_t i = 0; i < p.size(); ++i) print_term(os, p[i], i == 0);
}

}  // namespace

std::string Expr::str() const {
  std::ostringstream os;
  if (detail::poly_is_const(p_->den)) {
    print_poly(os, p_->num);
  } else {
    os << "(";
    print_poly(os, p_->num);
    os << ")/(";
    print_poly(os, p_->den);
    os << ")";
  }
  return os.str();
}

bool Expr::same(const Expr& o) const {
  if (p_ == o.p_) return true;
  const RF &x = *p_, &y = *o.p_;
  auto eq = [](const Poly& a, const Poly& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i].c != b[i].c || detail::mono_cmp(a[i].m, b[i].m) != 0) return false;
    return true;
  };
  return eq(x.num, y.num) && eq(x.den, y.den);
}

uint64_t Expr::hash() const {
  std::string s = str();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ===========================================================================
// equality with randomized confirmation

namespace {
uint64_t g_seed = 0;
}

void set_global_seed(uint64_t seed) { g_seed = seed; }
uint64_t global_seed() { return g_seed; }

bool are_equal(const Expr& a, const Expr& b) {
  Expr d = a - b;
  if (!d.is_zero()) return false;
  if (a.is_rational() && b.is_rational()) return true;

  // Confirm by exact evaluation at random rational points, treating every
  // atom (including function applications) as an independent variable.
  std::set<uint32_t> ids;
  collect_atoms_poly(a.rf().num, ids);
  collect_atoms_poly(a.rf().den, ids);
  collect_atoms_poly(b.rf().num, ids);
  collect_atoms_poly(b.rf().den, ids);

  uint64_t h = a.hash() ^ (b.hash() << 1) ^ g_seed;
  std::mt19937_64 rng(h ^ 0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<int> num_dist(-97, 97);
  std::uniform_int_distribution<int> den_dist(1, 97);

  auto eval_at = [&](const RF& rf,
                     const std::map<uint32_t, Rat>& pt) -> std::optional<Rat> {
    auto eval_p = [&](const Poly& p) {
      Rat out(0);
      for (const auto& t : p) {
        Rat term = t.c;
        for (const auto& [v, e] : t.m)
          for (int i = 0; i < e; ++i) term *= pt.at(v);
        out += term;
      }
      return out;
    };
    Rat den = eval_p(rf.den);
    if (den == 0) return std::nullopt;
    return eval_p(rf.num) / den;
  };

  int confirmed = 0, attempts = 0;
  while (confirmed < 8 && attempts < 256) {
    ++attempts;
    std::map<uint32_t, Rat> pt;
    for (uint32_t id : ids) pt.emplace(id, rat(num_dist(rng), den_dist(rng)));
    auto va = eval_at(a.rf(), pt);
    auto vb = eval_at(b.rf(), pt);
    if (!va || !vb) continue;  // pole hit: resample
    if (*va != *vb)
      throw Error("internal: normal form claims equality but evaluation differs");
    ++confirmed;
  }
  return true;
}

Expr Expr::numerator_expr() const {
  return Expr(std::make_shared<RF>(RF{p_->num, detail::poly_const(Rat(1))}));
}

Expr Expr::denominator_expr() const {
  return Expr(std::make_shared<RF>(RF{p_->den, detail::poly_const(Rat(1))}));
}

Expr div_exact(const Expr& a, const Expr& b) {
  if (!a.is_polynomial() || !b.is_polynomial())
    throw DomainError("div_exact expects polynomial arguments");
  if (a.is_zero()) return Expr();
  using namespace detail;
  // canonical polynomials carry the constant denominator 1
  Poly q = poly_divexact(a.rf().num, b.rf().num);
  return Expr(std::make_shared<RF>(RF{std::move(q), poly_const(Rat(1))}));
}

// ===========================================================================
// atom probes

AtomProbe::AtomProbe(uint64_t salt) : salt_(salt) {}

std::optional<Rat> AtomProbe::eval(const Expr& e) {
  auto value_for = [&](uint32_t id) -> Rat {
    auto it = values_.find(id);
    if (it != values_.end()) return it->second;
    // seed from the atom's identity so values do not depend on query order
    const auto& a = detail::atom(id);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : a.key) {
      h ^= c;
      h *= 1099511628211ull;
    }
    std::mt19937_64 rng(h ^ salt_ ^ g_seed ^ 0x6a09e667f3bcc908ull);
    std::uniform_int_distribution<int> num_dist(-97, 97);
    std::uniform_int_distribution<int> den_dist(1, 97);
    Rat v = rat(num_dist(rng), den_dist(rng));
    values_.emplace(id, v);
    return v;
  };
  auto eval_p = [&](const Poly& p) {
    Rat out(0);
    for (const auto& t : p) {
      Rat term = t.c;
      for (const auto& [v, ex] : t.m)
        for (int i = 0; i < ex; ++i) term *= value_for(v);
      out += term;
    }
    return out;
  };
  Rat den = eval_p(e.rf().den);
  if (den == 0) return std::nullopt;
  return eval_p(e.rf().num) / den;
}

// ===========================================================================
// parser
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? atom ('^' integer)?
//   atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

namespace {

struct Lexer {
  std::string_view text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  char get() {
    char c = peek();
    if (pos < text.size()) ++pos;
    return c;
  }
  bool eat(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg + " at offset " + std::to_string(pos) + " in \"" +
                     std::string(text) + "\"");
  }
  std::string ident() {
    skip_ws();
    size_t start = pos;
    if (pos >= text.size() || !std::isalpha(static_cast<unsigned char>(text[pos])))
      fail("expected identifier");
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    return std::string(text.substr(start, pos - start));
  }
  Int integer() {
    skip_ws();
    size_t start = pos;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      fail("expected integer");
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    return Int(std::string(text.substr(start, pos - start)), 10);
  }
};

struct Parser {
  Lexer lx;

  Expr parse_expr() {
    Expr e = parse_term();
    while (true) {
      char c = lx.peek();
      if (c == '+') {
        lx.get();
        e = e + parse_term();
      } else if (c == '-') {
        lx.get();
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    while (true) {
      char c = lx.peek();
      if (c == '*') {
        lx.get();
        e = e * parse_factor();
      } else if (c == '/') {
        lx.get();
        e = e / parse_factor();
      } else {
        return e;
      }
    }
  }

  Expr parse_factor() {
    bool neg = false;
    if (lx.peek() == '-') {
      lx.get();
      neg = true;
    }
    Expr e = parse_atom();
    if (lx.peek() == '^') {
      lx.get();
      Int z = lx.integer();
      if (!z.fits_slong_p()) lx.fail("exponent out of range");
      e = e.pow(z.get_si());
      if (lx.peek() == '^') lx.fail("'^' is non-associative");
    }
    return neg ? -e : e;
  }

  Expr parse_atom() {
    char c = lx.peek();
    if (c == '(') {
      lx.get();
      Expr e = parse_expr();
      if (!lx.eat(')')) lx.fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      Int z = lx.integer();
      return Expr(Rat(z));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string name = lx.ident();
      if (lx.peek() == '(') {
        lx.get();
        std::vector<Expr> args;
        args.push_back(parse_expr());
        while (lx.eat(',')) args.push_back(parse_expr());
        if (!lx.eat(')')) lx.fail("expected ')' after argument list");
        auto [base, tags] = split_tags(name);
        return Expr::apply_tagged(base, tags, std::move(args));
      }
      return Expr(sym(name));
    }
    lx.fail(std::string("unexpected token '") + c + "'");
  }

  // "D2_D1_f" -> ("f", {1,2}); applies only to applications
  static std::pair<std::string, std::vector<int>> split_tags(const std::string& name) {
    std::vector<int> tags;
    std::string rest = name;
    while (rest.size() > 2 && rest[0] == 'D' &&
           std::isdigit(static_cast<unsigned char>(rest[1]))) {
      size_t i = 1;
      while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
      if (i >= rest.size() || rest[i] != '_' || i + 1 >= rest.size()) break;
      if (!std::isalpha(static_cast<unsigned char>(rest[i + 1]))) break;
      tags.push_back(std::stoi(rest.substr(1, i - 1)));
      rest = rest.substr(i + 1);
    }
    return {rest, tags};
  }
};

}  // namespace

Expr Expr::parse(std::string_view text) {
  Parser p{Lexer{text}};
  Expr e = p.parse_expr();
  p.lx.skip_ws();
  if (p.lx.pos != text.size()) p.lx.fail("trailing input");
  return e;
}

}  // namespace fieldforms
