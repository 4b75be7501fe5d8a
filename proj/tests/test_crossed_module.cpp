#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "mint/crossed_module.hpp"
#include "mint/rng.hpp"

using namespace mint;

namespace {

GroupElement random_grp(const SpecPtr& s, Rng& rng) {
  if (s->dim() == 0) return GroupElement::identity(s);
  Vec c(s->dim());
  for (int i = 0; i < s->dim(); ++i) c(i) = rng.uniform_sym();
  return exp_alg(AlgebraElement::from_coordinates(s, c));
}

}  // namespace

TEST_CASE("catalog names") {
  for (const auto& n : catalog_names()) CHECK(catalog(n)->name() == n);
  CHECK_THROWS_AS(catalog("nope"), std::invalid_argument);
}

TEST_CASE("well-formed catalog modules validate to 1e-10") {
  for (const char* name : {"abelian_bu1", "identity_su2", "cover_su2_so3"}) {
    ValidationReport rep = validate(*catalog(name), 200, 1e-10, 42);
    INFO(name, " max residual ", rep.max_residual);
    CHECK(rep.pass);
  }
}

TEST_CASE("the naive torus module fails equivariance with a witness") {
  ValidationReport rep = validate(*catalog("torus_su2_naive"), 1000, 1e-10, 42);
  CHECK_FALSE(rep.pass);
  const auto& eq = rep.records[0];
  CHECK(eq.axiom == "equivariance");
  CHECK(eq.max_residual >= 0.1);
  CHECK_FALSE(eq.worst_witness.empty());
  // peiffer holds on the torus itself
  CHECK(rep.records[1].max_residual <= 1e-10);
}

TEST_CASE("validation is deterministic under a fixed seed") {
  ValidationReport a = validate(*catalog("identity_su2"), 100, 1e-10, 99);
  ValidationReport b = validate(*catalog("identity_su2"), 100, 1e-10, 99);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].max_residual == b.records[i].max_residual);
    CHECK(a.records[i].worst_witness == b.records[i].worst_witness);
  }
}

TEST_CASE("covering map: lift and projection invert each other") {
  Rng rng(3);
  for (int s = 0; s < 50; ++s) {
    GroupElement u = random_grp(spec_su2(), rng);
    GroupElement r = su2_to_so3(u);
    CHECK(r.membership_residual() <= 1e-10);
    GroupElement lift = so3_lift_to_su2(r);
    // lifts agree up to the center {+-1}
    double d1 = group_dist(lift, u);
    double d2 = (lift.matrix + u.matrix).norm();
    CHECK(std::min(d1, d2) <= 1e-9);
    CHECK(group_dist(su2_to_so3(lift), r) <= 1e-9);
  }
}

TEST_CASE("cover module differential data is an isomorphism") {
  auto cm = catalog("cover_su2_so3");
  CHECK(cm->dphi_invertible());
  Rng rng(5);
  for (int s = 0; s < 30; ++s) {
    Vec xc(3), mc(3);
    for (int i = 0; i < 3; ++i) {
      xc(i) = rng.uniform_sym();
      mc(i) = rng.uniform_sym();
    }
    AlgebraElement X = AlgebraElement::from_coordinates(cm->G(), xc);
    AlgebraElement m = AlgebraElement::from_coordinates(cm->H(), mc);
    Mat lhs = cm->dphi(cm->act_alg(X, m)).matrix;
    Mat rhs = bracket(X, cm->dphi(m)).matrix;
    CHECK((lhs - rhs).norm() <= 1e-12);
  }
}

TEST_CASE("inert component") {
  auto id2 = catalog("identity_su2");
  auto ab = catalog("abelian_bu1");
  auto cov = catalog("cover_su2_so3");
  Rng rng(77);

  Vec mc(3);
  for (int i = 0; i < 3; ++i) mc(i) = rng.uniform_sym();
  AlgebraElement m = AlgebraElement::from_coordinates(id2->H(), mc);
  CHECK(inert_component(*id2, m).norm() <= 1e-14);
  CHECK(inert_component(*cov, AlgebraElement::from_coordinates(cov->H(), mc)).norm() <= 1e-14);

  AlgebraElement u = AlgebraElement::from_coordinates(ab->H(), Vec::Constant(1, 0.4));
  AlgebraElement proj = inert_component(*ab, u);
  CHECK((proj.matrix - u.matrix).norm() <= 1e-14);

  // idempotent and in the kernel of dphi
  auto tor = catalog("torus_su2_naive");
  AlgebraElement tm = AlgebraElement::from_coordinates(tor->H(), Vec::Constant(1, 0.9));
  AlgebraElement p1 = inert_component(*tor, tm);
  AlgebraElement p2 = inert_component(*tor, p1);
  CHECK((p1.matrix - p2.matrix).norm() <= 1e-14);
  CHECK(tor->dphi(p1).norm() <= 1e-10);
}

TEST_CASE("group action is an automorphism on sampled pairs") {
  Rng rng(9);
  for (const char* name : {"identity_su2", "cover_su2_so3", "abelian_bu1"}) {
    auto cm = catalog(name);
    for (int s = 0; s < 25; ++s) {
      GroupElement g = random_grp(cm->G(), rng);
      GroupElement h1 = random_grp(cm->H(), rng);
      GroupElement h2 = random_grp(cm->H(), rng);
      Mat lhs = cm->act(g, h1 * h2).matrix;
      Mat rhs = (cm->act(g, h1) * cm->act(g, h2)).matrix;
      CHECK((lhs - rhs).norm() <= 1e-10);
    }
  }
}

TEST_CASE("psi is a homomorphism on sampled arguments") {
  Rng rng(15);
  for (const char* name : {"identity_su2", "cover_su2_so3"}) {
    auto cm = catalog(name);
    for (int s = 0; s < 25; ++s) {
      GroupElement g1 = random_grp(cm->G(), rng);
      GroupElement g2 = random_grp(cm->G(), rng);
      Eigen::MatrixXd lhs = cm->psi(g1 * g2);
      Eigen::MatrixXd rhs = cm->psi(g1) * cm->psi(g2);
      CHECK((lhs - rhs).norm() <= 1e-9);
    }
  }
}

TEST_CASE("tolerance overrides rebuild the specs") {
  auto cm = catalog("identity_su2", {{"su2", 1e-8}});
  CHECK(cm->G()->tol() == 1e-8);
  CHECK(validate(*cm, 50, 1e-10, 1).pass);
  CHECK_THROWS_AS(catalog("identity_su2", {{"su9", 1.0}}), std::invalid_argument);
}
