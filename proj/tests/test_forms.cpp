#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mint/chains.hpp"
#include "mint/forms.hpp"
#include "mint/rng.hpp"

using namespace mint;

namespace {

const std::vector<std::string> kChart3 = ambient_chart(3);

LieValuedForm su2_test_alpha() {
  std::vector<FormTerm> terms;
  terms.push_back({parse_expr("0.4*y", kChart3), 0, {0}});
  terms.push_back({parse_expr("0.3*sin(x)", kChart3), 1, {1}});
  terms.push_back({parse_expr("0.2*(x + z)", kChart3), 2, {2}});
  return LieValuedForm(1, kChart3, spec_su2(), terms);
}

Eigen::MatrixXd frame2(int d, int i, int j) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, 2);
  v(i, 0) = v(j, 1) = 1;
  return v;
}

}  // namespace

TEST_CASE("wedge canonicalization") {
  // dy^dx enters as -dx^dy
  std::vector<FormTerm> terms;
  terms.push_back({Expr::constant(1.0), 0, {1, 0}});
  LieValuedForm w(2, kChart3, spec_u1(), terms);
  REQUIRE(w.terms().size() == 1);
  CHECK(w.terms()[0].wedge == std::vector<int>{0, 1});
  CHECK(w.terms()[0].coeff.constant_value() == doctest::Approx(-1.0));

  // repeated index vanishes; opposite terms cancel to the zero form
  std::vector<FormTerm> dup;
  dup.push_back({Expr::constant(2.0), 0, {1, 1}});
  CHECK(LieValuedForm(2, kChart3, spec_u1(), dup).is_zero());
  std::vector<FormTerm> cancel;
  cancel.push_back({parse_expr("x", kChart3), 0, {0, 1}});
  cancel.push_back({parse_expr("x", kChart3), 0, {1, 0}});
  CHECK(LieValuedForm(2, kChart3, spec_u1(), cancel).is_zero());
}

TEST_CASE("evaluation is multilinear and alternating") {
  LieValuedForm a = su2_test_alpha();
  LieValuedForm f = curvature(a);
  Rng rng(3);
  Eigen::Vector3d x(0.3, 0.7, 0.2);
  Eigen::MatrixXd v(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) v(i, j) = rng.uniform_sym();
  Eigen::MatrixXd swapped = v;
  swapped.col(0).swap(swapped.col(1));
  CHECK((f.eval(x, v).matrix + f.eval(x, swapped).matrix).norm() == 0.0);
  Eigen::MatrixXd doubled = v;
  doubled.col(0) *= 2.0;
  CHECK((f.eval(x, doubled).matrix - 2.0 * f.eval(x, v).matrix).norm() <= 1e-14);
}

TEST_CASE("exterior derivative") {
  // constant form
  std::vector<FormTerm> ct;
  ct.push_back({Expr::constant(2.5), 0, {0}});
  CHECK(exterior_d(LieValuedForm(1, kChart3, spec_u1(), ct)).is_zero());

  // d(z dx^dy) = dx^dy^dz with coefficient +1
  std::vector<FormTerm> zt;
  zt.push_back({parse_expr("z", kChart3), 0, {0, 1}});
  LieValuedForm d = exterior_d(LieValuedForm(2, kChart3, spec_u1(), zt));
  REQUIRE(d.terms().size() == 1);
  CHECK(d.terms()[0].wedge == std::vector<int>{0, 1, 2});
  CHECK(d.terms()[0].coeff.constant_value() == doctest::Approx(1.0));

  // d^2 = 0 symbolically on assorted 1-forms
  for (const char* c : {"x*y*z", "sin(x*y)", "exp(0.2*z)*y^2"}) {
    std::vector<FormTerm> t;
    t.push_back({parse_expr(c, kChart3), 0, {0}});
    t.push_back({parse_expr("cos(z)*x", kChart3), 1, {2}});
    LieValuedForm w(1, kChart3, spec_su2(), t);
    CHECK(exterior_d(exterior_d(w)).is_zero());
  }

  // top-degree d vanishes by wedge exhaustion
  std::vector<FormTerm> top;
  top.push_back({parse_expr("x*y", kChart3), 0, {0, 1, 2}});
  CHECK(exterior_d(LieValuedForm(3, kChart3, spec_u1(), top)).is_zero());
}

TEST_CASE("curvature") {
  // constant alpha = X dx has no curvature
  std::vector<FormTerm> t1;
  t1.push_back({Expr::constant(0.7), 0, {0}});
  CHECK(curvature(LieValuedForm(1, kChart3, spec_su2(), t1)).is_zero());

  // alpha = E0 dx + E1 dy: F(ex, ey) = [E0, E1] = E2
  std::vector<FormTerm> t2;
  t2.push_back({Expr::constant(1.0), 0, {0}});
  t2.push_back({Expr::constant(1.0), 1, {1}});
  LieValuedForm f = curvature(LieValuedForm(1, kChart3, spec_su2(), t2));
  Eigen::Vector3d x(0.1, 0.2, 0.3);
  Mat expected = spec_su2()->basis(0) * spec_su2()->basis(1) -
                 spec_su2()->basis(1) * spec_su2()->basis(0);
  CHECK((f.eval(x, frame2(3, 0, 1)).matrix - expected).norm() <= 1e-14);

  // abelian curvature is exactly d(alpha)
  std::vector<FormTerm> ta;
  ta.push_back({parse_expr("x*y + sin(z)", kChart3), 0, {0}});
  LieValuedForm aa(1, kChart3, spec_u1(), ta);
  LieValuedForm diff = curvature(aa) - exterior_d(aa);
  CHECK(diff.is_zero());
}

TEST_CASE("three curvature") {
  auto id2 = catalog("identity_su2");
  auto ab = catalog("abelian_bu1");

  // alpha = 0: H = d(beta)
  std::vector<FormTerm> bt;
  bt.push_back({parse_expr("x*z", kChart3), 0, {0, 1}});
  LieValuedForm beta(2, kChart3, spec_su2(), bt);
  LieValuedForm h = three_curvature(*id2, LieValuedForm::zero(1, kChart3, spec_su2()), beta);
  CHECK((h - exterior_d(beta)).is_zero());

  // abelian: beta = z dx^dy gives H = dx^dy^dz
  std::vector<FormTerm> bz;
  bz.push_back({parse_expr("z", kChart3), 0, {0, 1}});
  LieValuedForm hb = three_curvature(*ab, LieValuedForm::zero(1, kChart3, spec_trivial()),
                                     LieValuedForm(2, kChart3, spec_u1(), bz));
  REQUIRE(hb.terms().size() == 1);
  CHECK(hb.terms()[0].coeff.constant_value() == doctest::Approx(1.0));

  // abelian reduction is term-by-term d(beta)
  CHECK((hb - exterior_d(LieValuedForm(2, kChart3, spec_u1(), bz))).is_zero());
}

TEST_CASE("three curvature matches a finite-difference oracle") {
  auto id2 = catalog("identity_su2");
  LieValuedForm alpha = su2_test_alpha();
  TwoConnection conn = TwoConnection::fake_flat(id2, alpha);
  LieValuedForm h3 = conn.three_curv();

  // oracle: central differences of d(beta) plus the action term evaluated
  // from the cyclic formula
  auto beta_at = [&](const Eigen::Vector3d& x, int i, int j) {
    return conn.beta().eval(x, frame2(3, i, j)).matrix;
  };
  auto alpha_at = [&](const Eigen::Vector3d& x, int i) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(3, 1);
    v(i, 0) = 1;
    return conn.alpha().eval(x, v).matrix;
  };
  const double h = 1e-5;
  Rng rng(21);
  for (int s = 0; s < 20; ++s) {
    Eigen::Vector3d x(rng.uniform01(), rng.uniform01(), rng.uniform01());
    // frame (e0, e1, e2)
    auto shift = [&](int axis, double eps) {
      Eigen::Vector3d y = x;
      y(axis) += eps;
      return y;
    };
    // d(beta)(e0,e1,e2) = sum_cyc d_i beta(e_j, e_k)
    Mat dbeta = (beta_at(shift(0, h), 1, 2) - beta_at(shift(0, -h), 1, 2)) / (2 * h) -
                (beta_at(shift(1, h), 0, 2) - beta_at(shift(1, -h), 0, 2)) / (2 * h) +
                (beta_at(shift(2, h), 0, 1) - beta_at(shift(2, -h), 0, 1)) / (2 * h);
    auto br = [](const Mat& a, const Mat& b) { return Mat(a * b - b * a); };
    Mat act = br(alpha_at(x, 0), beta_at(x, 1, 2)) - br(alpha_at(x, 1), beta_at(x, 0, 2)) +
              br(alpha_at(x, 2), beta_at(x, 0, 1));
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(3, 3);
    CHECK((h3.eval(x, v).matrix - (dbeta + act)).norm() <= 1e-6);
  }
}

TEST_CASE("fake flatness") {
  auto id2 = catalog("identity_su2");
  LieValuedForm alpha = su2_test_alpha();
  TwoConnection conn = TwoConnection::fake_flat(id2, alpha);
  auto pts = sample_points(3, 32, 5);
  CHECK(fake_flat_residual(*id2, conn.alpha(), conn.beta(), pts) <= 1e-10);

  // perturbing beta by 0.1 of a basis 2-form breaks it by at least 0.05
  std::vector<FormTerm> pert;
  pert.push_back({Expr::constant(0.1), 0, {0, 1}});
  LieValuedForm beta2 = conn.beta() + LieValuedForm(2, kChart3, spec_su2(), pert);
  CHECK(fake_flat_residual(*id2, conn.alpha(), beta2, pts) >= 0.05);
  CHECK_THROWS_AS(TwoConnection(id2, conn.alpha(), beta2), std::invalid_argument);
  TwoConnection opted(id2, conn.alpha(), beta2, false);
  CHECK_FALSE(opted.fake_flat_report().enforced);

  // abelian with alpha = 0 is flat by construction
  auto ab = catalog("abelian_bu1");
  std::vector<FormTerm> bz;
  bz.push_back({parse_expr("x*y", kChart3), 0, {0, 1}});
  CHECK(fake_flat_residual(*ab, LieValuedForm::zero(1, kChart3, spec_trivial()),
                           LieValuedForm(2, kChart3, spec_u1(), bz), pts) == 0.0);
}

TEST_CASE("inert extra term preserves fake flatness") {
  auto ab = catalog("abelian_bu1");
  std::vector<FormTerm> et;
  et.push_back({parse_expr("x", kChart3), 0, {0, 1}});
  LieValuedForm extra(2, kChart3, spec_u1(), et);
  LieValuedForm zero_a = LieValuedForm::zero(1, kChart3, spec_trivial());
  TwoConnection conn = TwoConnection::fake_flat(ab, zero_a, extra);
  CHECK((conn.beta() - extra).is_zero());  // full kernel keeps the whole term
}

TEST_CASE("pullback") {
  // constant map kills positive-degree forms
  std::vector<FormTerm> t;
  t.push_back({parse_expr("x + 1", kChart3), 0, {0}});
  LieValuedForm w(1, kChart3, spec_u1(), t);
  std::vector<Expr> const_map = {Expr::constant(0.5), Expr::constant(0.1), Expr::constant(0.9)};
  CHECK(pullback(w, const_map, reference_chart(1)).is_zero());

  // c dx along sigma(s) = (s, 0, 0) is c ds
  std::vector<FormTerm> ct;
  ct.push_back({Expr::constant(0.8), 0, {0}});
  LieValuedForm cw(1, kChart3, spec_u1(), ct);
  std::vector<Expr> line = {Expr::var("s"), Expr(), Expr()};
  LieValuedForm pb = pullback(cw, line, reference_chart(1));
  REQUIRE(pb.terms().size() == 1);
  CHECK(pb.terms()[0].coeff.constant_value() == doctest::Approx(0.8));
}

TEST_CASE("pullback agrees with push-forward evaluation") {
  // random 2-form against an affine triangle
  Rng rng(33);
  std::vector<FormTerm> t;
  t.push_back({parse_expr("x*y - z", kChart3), 0, {0, 1}});
  t.push_back({parse_expr("sin(y)", kChart3), 2, {1, 2}});
  t.push_back({parse_expr("0.3*z^2", kChart3), 1, {0, 2}});
  LieValuedForm w(2, kChart3, spec_su2(), t);

  std::vector<Eigen::VectorXd> verts = {Eigen::Vector3d(0.1, 0.0, 0.2),
                                        Eigen::Vector3d(0.9, 0.1, 0.3),
                                        Eigen::Vector3d(0.2, 0.8, 0.1)};
  Simplex tri = Simplex::affine_from_vertices(verts);
  LieValuedForm pb = pullback(w, tri);

  Eigen::MatrixXd ref_frame = Eigen::MatrixXd::Identity(2, 2);
  for (int s = 0; s < 20; ++s) {
    Eigen::Vector2d p(rng.uniform01() * 0.5, rng.uniform01() * 0.5);
    Mat via_pullback = pb.eval(p, ref_frame).matrix;
    Mat direct = w.eval(tri.eval(p), tri.jacobian(p)).matrix;
    CHECK((via_pullback - direct).norm() <= 1e-10);
  }
}

TEST_CASE("gauge transform basics") {
  auto id2 = catalog("identity_su2");
  LieValuedForm alpha = su2_test_alpha();
  std::vector<FormTerm> bt;
  bt.push_back({parse_expr("0.35*z", kChart3), 0, {0, 1}});
  LieValuedForm beta(2, kChart3, spec_su2(), bt);

  // identity gauge: angle 0
  GaugeMap id_gauge{AlgebraElement::from_coordinates(spec_su2(), Eigen::Vector3d(1, 0, 0)),
                    Expr()};
  auto [a0, b0] = gauge_transform(*id2, alpha, beta, id_gauge);
  CHECK((a0 - alpha).is_zero());
  CHECK((b0 - beta).is_zero());

  // constant gauge: alpha transforms by conjugation only
  GaugeMap const_gauge{AlgebraElement::from_coordinates(spec_su2(), Eigen::Vector3d(0.3, -0.2, 0.5)),
                       Expr::constant(0.8)};
  auto [ac, bc] = gauge_transform(*id2, alpha, beta, const_gauge);
  GroupElement g = exp_alg({spec_su2(), Mat(0.8 * const_gauge.axis.matrix)});
  Eigen::Vector3d x(0.4, 0.6, 0.1);
  for (int i = 0; i < 3; ++i) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(3, 1);
    v(i, 0) = 1;
    Mat lhs = ac.eval(x, v).matrix;
    Mat rhs = g.matrix.adjoint() * alpha.eval(x, v).matrix * g.matrix;
    CHECK((lhs - rhs).norm() <= 1e-13);
  }
}

TEST_CASE("gauge variation: trivial and generic cases") {
  auto id2 = catalog("identity_su2");
  LieValuedForm alpha = su2_test_alpha();
  std::vector<FormTerm> bt;
  bt.push_back({parse_expr("0.35*z", kChart3), 0, {0, 1}});
  bt.push_back({parse_expr("0.25*x", kChart3), 2, {1, 2}});
  LieValuedForm beta(2, kChart3, spec_su2(), bt);
  GaugeMap lam{AlgebraElement::from_coordinates(spec_su2(), Eigen::Vector3d(0.2, 0.5, -0.3)),
               parse_expr("0.6*x + 0.3*y", kChart3)};
  auto pts = sample_points(3, 10, 4);

  // B = 0: both the difference and the scale vanish
  auto rz = gauge_variation_check(*id2, alpha, LieValuedForm::zero(2, kChart3, spec_su2()), lam,
                                  1e-3, pts);
  CHECK(rz.residual <= 1e-12);
  CHECK(rz.rhs_scale <= 1e-12);

  // generic: first order in the step
  auto r1 = gauge_variation_check(*id2, alpha, beta, lam, 1e-3, pts);
  auto r2 = gauge_variation_check(*id2, alpha, beta, lam, 5e-4, pts);
  CHECK(r1.residual / r2.residual == doctest::Approx(2.0).epsilon(0.2));
  CHECK(r1.residual <= 1e-2 * r1.rhs_scale);
}

TEST_CASE("bianchi identity for the 3-curvature in four dimensions") {
  // act(F_A, B) as a 4-form equals dH + A |> H; this pins the sign and
  // weight conventions of the graded action wedge
  auto id2 = catalog("identity_su2");
  auto chart4 = ambient_chart(4);
  std::vector<FormTerm> at, bt;
  at.push_back({parse_expr("0.4*y", chart4), 0, {0}});
  at.push_back({parse_expr("0.3*sin(x)", chart4), 1, {1}});
  at.push_back({parse_expr("0.2*w", chart4), 2, {3}});
  bt.push_back({parse_expr("0.35*z", chart4), 0, {0, 1}});
  bt.push_back({parse_expr("0.25*x*w", chart4), 2, {1, 2}});
  bt.push_back({parse_expr("0.15*y", chart4), 1, {2, 3}});
  LieValuedForm A(1, chart4, spec_su2(), at);
  LieValuedForm B(2, chart4, spec_su2(), bt);

  LieValuedForm H = three_curvature(*id2, A, B);
  LieValuedForm lhs = wedge_bilinear(curvature(A), B, spec_su2(), [&](int i, int j) {
    return bracket(AlgebraElement{spec_su2(), spec_su2()->basis(i)},
                   AlgebraElement{spec_su2(), spec_su2()->basis(j)});
  });
  LieValuedForm rhs = exterior_d(H) + action_wedge(*id2, A, H);
  LieValuedForm diff = lhs - rhs;
  // canonicalization does not distribute products over sums, so compare
  // by evaluation on the full 4-frame at sample points
  Eigen::MatrixXd frame = Eigen::MatrixXd::Identity(4, 4);
  for (const auto& p : sample_points(4, 20, 9))
    CHECK(diff.eval(p, frame).matrix.norm() <= 1e-12);
}
