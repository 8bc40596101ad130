#include "doctest.h"
#include "fieldforms/expr.hpp"

#include <random>

using namespace fieldforms;

namespace {

// small random expression generator for property tests
Expr random_expr(std::mt19937_64& rng, int depth = 3) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 6 : 2);
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> var(0, 2);
  static const char* names[] = {"x", "y", "z"};
  switch (pick(rng)) {
    case 0:
      return Expr(coef(rng));
    case 1:
    case 2:
      return Expr(sym(names[var(rng)]));
    case 3:
      return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 4:
      return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 5: {
      Expr d = random_expr(rng, depth - 1);
      if (d.is_zero()) d = Expr(sym("z")) + 1;
      return random_expr(rng, depth - 1) / d;
    }
    default:
      return Expr::apply("g", {random_expr(rng, depth - 1)});
  }
}

}  // namespace

TEST_CASE("parsing matches the stated grammar") {
  Expr a = Expr::parse("1/2*(v_1_1^2 - v_1_2^2)");
  Expr v11(sym("v_1_1")), v12(sym("v_1_2"));
  CHECK(are_equal(a, (v11 * v11 - v12 * v12) / 2));

  CHECK_NOTHROW(Expr::parse("f(x1, x2) + x1^3"));
  CHECK_THROWS_AS(Expr::parse("x1 + * 2"), ParseError);
  CHECK_THROWS_AS(Expr::parse("(x1"), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1 )"), ParseError);
  CHECK_THROWS_AS(Expr::parse("x^2^3"), ParseError);

  // precedence: '^' > unary '-' > '*','/' > '+','-'
  CHECK(are_equal(Expr::parse("-x^2"), -Expr::parse("x^2")));
  CHECK(are_equal(Expr::parse("2*x^3"), 2 * Expr(sym("x")).pow(3)));
  CHECK(are_equal(Expr::parse("1 - 2 - 3"), Expr(-4)));
  CHECK(are_equal(Expr::parse("12/3/2"), Expr(2)));
  CHECK(are_equal(Expr::parse("x^-2"), Expr(1) / Expr::parse("x^2")));
}

TEST_CASE("arity is enforced for registered function symbols") {
  register_function({"h2", 2, {}, nullptr, nullptr});
  CHECK_NOTHROW(Expr::parse("h2(x, y)"));
  CHECK_THROWS_AS(Expr::parse("h2(x)"), ArityError);
  // unregistered names are opaque; distinct arities are distinct symbols
  CHECK_NOTHROW(Expr::parse("h3(x)"));
  CHECK_NOTHROW(Expr::parse("h3(x, y)"));
}

TEST_CASE("differentiation") {
  Sym x = sym("x1"), v = sym("v");
  Expr e = Expr(x).pow(2);
  CHECK(are_equal(e.diff(x), 2 * Expr(x)));
  CHECK(Expr(x).diff(v).is_zero());

  Expr f = Expr::parse("f(x1, x2)");
  Expr df = f.diff(x);
  CHECK(df.same(Expr::parse("D1_f(x1, x2)")));

  // formal mixed partials commute structurally
  Sym x2 = sym("x2");
  CHECK(f.diff(x).diff(x2).same(f.diff(x2).diff(x)));

  // chain rule through arguments
  Expr g = Expr::parse("f(x1^2, x2)");
  CHECK(are_equal(g.diff(x), 2 * Expr(x) * Expr::parse("D1_f(x1^2, x2)")));

  // registered rules: sin/cos
  Expr s = Expr::parse("sin(x1^2)");
  CHECK(are_equal(s.diff(x), 2 * Expr(x) * Expr::parse("cos(x1^2)")));
}

TEST_CASE("rational-function semantics") {
  Expr x(sym("x")), y(sym("y"));
  CHECK(are_equal((x + y).pow(2), x * x + 2 * x * y + y * y));
  CHECK(are_equal(x / x, Expr(1)));
  CHECK_FALSE(are_equal(x, y));
  CHECK(are_equal((x * x - y * y) / (x - y), x + y));
  CHECK_THROWS_AS(x / (y - y), DivByZeroError);
}

TEST_CASE("exact evaluation") {
  Sym x = sym("x");
  Binding b;
  b.symbols[x] = rat(3, 2);
  CHECK(Expr::parse("x^2+1").eval_exact(b) == rat(13, 4));

  Binding bf;
  bf.symbols[x] = rat(2);
  bf.functions["fsq"] = [](const std::vector<Rat>& a) { return a[0] * a[0]; };
  CHECK(Expr::parse("fsq(x)").eval_exact(bf) == rat(4));

  Binding b0;
  b0.symbols[x] = rat(0);
  CHECK_THROWS_AS(Expr::parse("1/x").eval_exact(b0), DivByZeroError);
  Binding empty;
  CHECK_THROWS_AS(Expr::parse("x+1").eval_exact(empty), EvalError);
}

TEST_CASE("float evaluation with builtin bodies") {
  FloatBinding b;
  b.symbols[sym("t")] = 0.5;
  double v = Expr::parse("sin(t)^2 + cos(t)^2").eval_float(b);
  CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("print-parse round trip up to normalization") {
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 40; ++i) {
    Expr e = random_expr(rng);
    Expr back = Expr::parse(e.str());
    CHECK(back.same(e));
  }
}

TEST_CASE("derivative is linear and satisfies Leibniz") {
  std::mt19937_64 rng(777);
  Sym x = sym("x");
  for (int i = 0; i < 25; ++i) {
    Expr a = random_expr(rng), b = random_expr(rng);
    CHECK(are_equal((a + b).diff(x), a.diff(x) + b.diff(x)));
    CHECK(are_equal((a * b).diff(x), a.diff(x) * b + a * b.diff(x)));
  }
}

TEST_CASE("mixed partials commute on random expressions") {
  std::mt19937_64 rng(4242);
  Sym x = sym("x"), y = sym("y");
  for (int i = 0; i < 25; ++i) {
    Expr e = random_expr(rng);
    CHECK(are_equal(e.diff(x).diff(y), e.diff(y).diff(x)));
  }
}

TEST_CASE("evaluation agrees before and after normalization") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> pt(-20, 20);
  for (int i = 0; i < 20; ++i) {
    Expr e = random_expr(rng);
    Binding b;
    b.symbols[sym("x")] = rat(pt(rng), 7);
    b.symbols[sym("y")] = rat(pt(rng), 5);
    b.symbols[sym("z")] = rat(pt(rng), 3);
    b.functions["g"] = [](const std::vector<Rat>& a) { return a[0] + 1; };
    try {
      Rat v1 = e.eval_exact(b);
      Rat v2 = normalize(e).eval_exact(b);
      CHECK(v1 == v2);
    } catch (const DivByZeroError&) {
      continue;  // pole at the sample point
    }
  }
}

TEST_CASE("substitution") {
  Sym x = sym("x"), y = sym("y");
  Expr e = Expr::parse("x^2 + q(x) + y");
  Expr sub = e.subs({{x, Expr(y) + 1}});
  CHECK(are_equal(sub, (Expr(y) + 1).pow(2) + Expr::apply("q", {Expr(y) + 1}) + Expr(y)));

  // closed-form function replacement expands formal partials
  Expr r = Expr::parse("D1_q(y) + q(y)");
  Expr out = r.subs_function("q", {x}, Expr(x).pow(3));
  CHECK(are_equal(out, 3 * Expr(y).pow(2) + Expr(y).pow(3)));
}

TEST_CASE("scalar invariants") {
  Rat q = rat(6, -4);
  CHECK(q == rat(-3, 2));
  CHECK(str(q) == "-3/2");
  CHECK(rat_from_string("22/7") == rat(22, 7));
}
