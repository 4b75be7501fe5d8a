#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mint/expr.hpp"
#include "mint/rng.hpp"

using namespace mint;

namespace {
const std::vector<std::string> kXY = {"x", "y"};
const std::vector<std::string> kXYZ = {"x", "y", "z"};

double eval_at(const Expr& e, double x, double y) {
  std::vector<std::pair<std::string, double>> b = {{"x", x}, {"y", y}};
  return e.eval(b);
}
}  // namespace

TEST_CASE("basic parsing and evaluation") {
  Expr e = parse_expr("sin(x)*y + 2", kXY);
  CHECK(eval_at(e, 0.0, 5.0) == doctest::Approx(2.0));
  CHECK(eval_at(e, M_PI / 2, 3.0) == doctest::Approx(5.0));

  CHECK(eval_at(parse_expr("exp(-(x^2))", kXY), 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(eval_at(parse_expr("pi", kXY), 0, 0) == doctest::Approx(M_PI));
  CHECK(eval_at(parse_expr("x^-2", kXY), 2.0, 0.0) == doctest::Approx(0.25));
  CHECK(eval_at(parse_expr("2/x", kXY), 4.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    parse_expr("x + * y", kXY);
    FAIL("expected parse error");
  } catch (const parse_error& e) {
    CHECK(e.offset == 4);
  }
  CHECK_THROWS_AS(parse_expr("", kXY), parse_error);
  CHECK_THROWS_AS(parse_expr("x + (y", kXY), parse_error);
  CHECK_THROWS_AS(parse_expr("x^y", kXY), parse_error);  // non-integer exponent

  try {
    parse_expr("x + bogus", kXY);
    FAIL("expected unknown identifier");
  } catch (const parse_error& e) {
    CHECK(e.offset == 4);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("division by zero is a reported domain error") {
  Expr e = parse_expr("1/x", kXY);
  CHECK_THROWS_AS(eval_at(e, 0.0, 0.0), eval_error);
}

TEST_CASE("symbolic derivatives") {
  Expr xy = parse_expr("x*y", kXY);
  CHECK(xy.diff("x").same_as(Expr::var("y")));
  CHECK(parse_expr("sin(x)", kXY).diff("x").same_as(parse_expr("cos(x)", kXY)));
  CHECK(parse_expr("3", kXY).diff("x").is_zero());
  CHECK(parse_expr("x^3", kXY).diff("x").same_as(parse_expr("3*x^2", kXY)));
  // quotient rule through negative powers
  Expr q = parse_expr("x/y", kXY).diff("y");
  CHECK(q.same_as(parse_expr("-x/y^2", kXY)));
}

TEST_CASE("derivative agrees with central finite differences") {
  // random-ish smooth expressions
  std::vector<Expr> exprs = {
      parse_expr("x^3*y + 2*x*y^2 - 7*x", kXY),
      parse_expr("sin(x*y) + cos(x)^2", kXY),
      parse_expr("exp(0.3*x)*sin(y)", kXY),
      parse_expr("(x + y)^4 - x*y", kXY),
  };
  Rng rng(3);
  const double h = 1e-5;
  for (const auto& e : exprs) {
    Expr dx = e.diff("x");
    for (int s = 0; s < 20; ++s) {
      double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
      double fd = (eval_at(e, x + h, y) - eval_at(e, x - h, y)) / (2 * h);
      double sym = eval_at(dx, x, y);
      CHECK(std::abs(fd - sym) <= 1e-7 * std::max(1.0, std::abs(sym)));
    }
  }
}

TEST_CASE("mixed partials commute structurally") {
  for (const char* text : {"x*y^2 + sin(x*y)", "exp(x*y)*cos(x + y)", "(x + 2*y)^3"}) {
    Expr e = parse_expr(text, kXY);
    CHECK(e.diff("x").diff("y").same_as(e.diff("y").diff("x")));
  }
}

TEST_CASE("canonical printer round-trips") {
  for (const char* text :
       {"sin(x)*y + 2", "x^2 - 3*x*y + y^2", "exp(-(x^2))*cos(y)", "x/y + y/x", "-x + 1",
        "0.125*x^4"}) {
    Expr e = parse_expr(text, kXY);
    Expr back = parse_expr(e.str(), kXY);
    CHECK(back.same_as(e));
  }
}

TEST_CASE("normal form identities") {
  CHECK((parse_expr("x + y", kXY) - parse_expr("y + x", kXY)).is_zero());
  CHECK((parse_expr("x*(y + 1)", kXY) - parse_expr("x*(1 + y)", kXY)).is_zero());
  CHECK((parse_expr("x*x", kXY) - parse_expr("x^2", kXY)).is_zero());
  CHECK((parse_expr("2*x - x - x", kXY)).is_zero());
}

TEST_CASE("substitution composes exactly") {
  Expr e = parse_expr("x^2 + y", kXY);
  Expr sub = e.subst({{"x", parse_expr("x + y", kXY)}});
  CHECK(sub.same_as(parse_expr("(x + y)^2 + y", kXY)));
}

TEST_CASE("compiled evaluation matches the tree walk") {
  Rng rng(17);
  for (const char* text : {"sin(x*y) + exp(0.2*x) - y^3", "x/(y + 2) + pi"}) {
    Expr e = parse_expr(text, kXY);
    CompiledExpr c(e, kXY);
    for (int s = 0; s < 25; ++s) {
      double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
      std::vector<double> vals = {x, y};
      CHECK(c(vals) == doctest::Approx(eval_at(e, x, y)).epsilon(1e-14));
    }
  }
}

TEST_CASE("variables are tracked") {
  Expr e = parse_expr("x*z + cos(z)", kXYZ);
  auto vars = e.variables();
  CHECK(vars == std::vector<std::string>{"x", "z"});
}
