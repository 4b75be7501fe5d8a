#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mint/lie.hpp"
#include "mint/rng.hpp"

using namespace mint;
using cd = std::complex<double>;

namespace {

AlgebraElement random_alg(const SpecPtr& s, Rng& rng, double scale = 1.0) {
  Vec c(s->dim());
  for (int i = 0; i < s->dim(); ++i) c(i) = scale * rng.uniform_sym();
  return AlgebraElement::from_coordinates(s, c);
}

}  // namespace

TEST_CASE("spec construction validates the basis") {
  CHECK(spec_su2()->dim() == 3);
  CHECK(spec_so3()->dim() == 3);
  CHECK(spec_u1()->dim() == 1);
  CHECK(spec_trivial()->dim() == 0);
  // dependent basis rejected
  Mat e1(1, 1), e2(1, 1);
  e1 << cd(0, 1);
  e2 << cd(0, 2);
  CHECK_THROWS_AS(GroupSpec("bad", 1, true, {e1, e2}, ExpMethod::ClosedForm),
                  std::invalid_argument);
}

TEST_CASE("exp closed forms") {
  CHECK(group_dist(exp_alg(AlgebraElement::zero(spec_su2())), GroupElement::identity(spec_su2())) ==
        doctest::Approx(0.0));

  // diagonal su(2) case: exp(i pi/2 diag(1,-1)) = diag(i, -i)
  Mat x = Mat::Zero(2, 2);
  x(0, 0) = cd(0, M_PI / 2);
  x(1, 1) = cd(0, -M_PI / 2);
  Mat expected = Mat::Zero(2, 2);
  expected(0, 0) = cd(0, 1);
  expected(1, 1) = cd(0, -1);
  CHECK((exp_alg({spec_su2(), x}).matrix - expected).norm() <= 1e-14);

  // u(1) scalar phase
  AlgebraElement u = AlgebraElement::from_coordinates(spec_u1(), Vec::Constant(1, 0.3));
  CHECK(std::abs(exp_alg(u).matrix(0, 0) - std::polar(1.0, 0.3)) <= 1e-15);
}

TEST_CASE("exp inverse product oracle over random samples") {
  Rng rng(11);
  for (const auto& spec : {spec_su2(), spec_so3()}) {
    for (int s = 0; s < 100; ++s) {
      AlgebraElement x = random_alg(spec, rng);
      AlgebraElement nx{spec, Mat(-x.matrix)};
      GroupElement p = exp_alg(x) * exp_alg(nx);
      CHECK(group_dist(p, GroupElement::identity(spec)) <= 1e-12);
      CHECK(exp_alg(x).membership_residual() <= spec->tol());
    }
  }
}

TEST_CASE("exp is a homomorphism on commuting arguments") {
  Rng rng(5);
  for (int s = 0; s < 20; ++s) {
    AlgebraElement x = random_alg(spec_su2(), rng, 0.5);
    AlgebraElement y{spec_su2(), Mat(0.7 * x.matrix)};  // commutes with x
    AlgebraElement sum{spec_su2(), Mat(x.matrix + y.matrix)};
    CHECK(group_dist(exp_alg(sum), exp_alg(x) * exp_alg(y)) <= 1e-12);
  }
}

TEST_CASE("log round trips on the unit ball") {
  Rng rng(23);
  for (const auto& spec : {spec_su2(), spec_so3(), spec_u1()}) {
    for (int s = 0; s < 100; ++s) {
      AlgebraElement x = random_alg(spec, rng, 0.57);  // |X| <= 1 for all specs
      if (x.norm() > 1.0) continue;
      GroupElement g = exp_alg(x);
      AlgebraElement back = log_grp(g);
      CHECK((back.matrix - x.matrix).norm() <= 1e-10);
      CHECK((exp_alg(back).matrix - g.matrix).norm() <= 1e-10);
    }
  }
}

TEST_CASE("log closed forms and branch cut") {
  CHECK(log_grp(GroupElement::identity(spec_su2())).norm() <= 1e-14);

  // diag(e^{i theta}, e^{-i theta}) with theta = 0.3
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = std::polar(1.0, 0.3);
  g(1, 1) = std::polar(1.0, -0.3);
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = cd(0, 0.3);
  expect(1, 1) = cd(0, -0.3);
  CHECK((log_grp({spec_su2(), g}).matrix - expect).norm() <= 1e-12);

  // u(1) phase near the cut is a distinct error, not a wrong value
  Mat pi_ish(1, 1);
  pi_ish(0, 0) = std::polar(1.0, M_PI - 1e-9);
  CHECK_THROWS_AS(log_grp({spec_u1(), pi_ish}), branch_cut_error);

  Mat su2_pi = Mat::Zero(2, 2);
  su2_pi(0, 0) = std::polar(1.0, M_PI - 1e-8);
  su2_pi(1, 1) = std::polar(1.0, -(M_PI - 1e-8));
  CHECK_THROWS_AS(log_grp({spec_su2(), su2_pi}), branch_cut_error);
}

TEST_CASE("bracket structure constants and antisymmetry") {
  const SpecPtr s = spec_su2();
  AlgebraElement e1{s, s->basis(0)}, e2{s, s->basis(1)}, e3{s, s->basis(2)};
  CHECK((bracket(e1, e2).matrix - e3.matrix).norm() <= 1e-14);
  CHECK((bracket(e2, e3).matrix - e1.matrix).norm() <= 1e-14);
  CHECK((bracket(e3, e1).matrix - e2.matrix).norm() <= 1e-14);

  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    AlgebraElement x = random_alg(s, rng), y = random_alg(s, rng);
    CHECK(bracket(x, x).norm() <= 1e-14);
    CHECK((bracket(x, y).matrix + bracket(y, x).matrix).norm() <= 1e-14);
  }
  CHECK_THROWS_AS(bracket(e1, AlgebraElement::zero(spec_so3())), spec_mismatch);
}

TEST_CASE("group distance") {
  GroupElement one = GroupElement::identity(spec_u1());
  Mat m(1, 1);
  m(0, 0) = std::polar(1.0, M_PI);
  GroupElement minus{spec_u1(), m};
  CHECK(group_dist(one, minus) == doctest::Approx(2.0));
  CHECK(group_dist(one, one) == 0.0);

  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    GroupElement g = exp_alg(random_alg(spec_su2(), rng));
    GroupElement h = exp_alg(random_alg(spec_su2(), rng));
    CHECK(group_dist(g, h) == doctest::Approx(group_dist(h, g)));
  }
}

TEST_CASE("projection to the group") {
  Rng rng(13);
  GroupElement g = exp_alg(random_alg(spec_su2(), rng));
  CHECK(group_dist(project_to_group(g.matrix, spec_su2()), g) <= 1e-14);

  Mat scaled = (1.0 + 1e-6) * Mat::Identity(2, 2);
  CHECK(group_dist(project_to_group(scaled, spec_su2()), GroupElement::identity(spec_su2())) <=
        1e-5);

  Mat far = 5.0 * Mat::Identity(2, 2);
  CHECK_THROWS_AS(project_to_group(far, spec_su2()), projection_error);
}

TEST_CASE("ordered products control membership drift") {
  // 4^6 near-identity factors, as in a level-6 surface product
  Rng rng(41);
  OrderedProduct prod(spec_su2());
  const int n = 4096;
  for (int i = 0; i < n; ++i) {
    AlgebraElement x = random_alg(spec_su2(), rng, 1e-3);
    prod.append(exp_alg(x));
  }
  CHECK(prod.value().membership_residual() <= 1e-10);
}

TEST_CASE("truncated BCH bound") {
  Rng rng(19);
  double worst = 0;
  for (int s = 0; s < 100; ++s) {
    AlgebraElement x = random_alg(spec_su2(), rng, 0.0577);  // |X| <= 0.1
    AlgebraElement y = random_alg(spec_su2(), rng, 0.0577);
    Mat z = x.matrix + y.matrix + 0.5 * bracket(x, y).matrix;
    double lhs = group_dist(exp_alg(x) * exp_alg(y), exp_alg({spec_su2(), z}));
    double scale = std::pow(x.norm() + y.norm(), 3);
    worst = std::max(worst, lhs / scale);
  }
  // remainder constant observed ~0.04; 0.5 leaves an order of magnitude
  CHECK(worst <= 0.5);
}

TEST_CASE("tolerance override copies the spec") {
  SpecPtr loose = with_tolerance(spec_su2(), 1e-6);
  CHECK(loose->tol() == 1e-6);
  CHECK(loose->dim() == 3);
  CHECK(spec_su2()->tol() == 1e-10);
}
