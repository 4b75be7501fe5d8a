#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>

#include "doctest.h"
#include "mint/chains.hpp"

using namespace mint;

namespace {

Simplex unit_tet() {
  return Simplex::affine_from_vertices({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0),
                                        Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 0, 1)});
}

// signed volume of an affine 3-simplex image
double signed_volume(const Simplex& t) {
  Eigen::Matrix3d j = t.jacobian(Eigen::Vector3d(0.25, 0.25, 0.25));
  return j.determinant() / 6.0;
}

}  // namespace

TEST_CASE("boundary of a path") {
  Simplex seg = Simplex::affine_from_vertices({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 2, 3)});
  auto faces = boundary(seg);
  REQUIRE(faces.size() == 2);
  CHECK(faces[0].second == 1);
  CHECK((faces[0].first.vertex(0) - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);
  CHECK(faces[1].second == -1);
  CHECK((faces[1].first.vertex(0)).norm() == 0.0);
}

TEST_CASE("boundary of a triangle closes") {
  Simplex tri = Simplex::affine_from_vertices(
      {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)});
  // the signed edge endpoints cancel
  std::map<std::string, int> points;
  for (auto& [e, s] : boundary(tri))
    for (auto& [p, ps] : boundary(e)) {
      FaceKey dummy;  // endpoints keyed by coordinates
      char buf[64];
      Eigen::VectorXd v = p.vertex(0);
      std::snprintf(buf, sizeof buf, "%.9f,%.9f,%.9f", v(0), v(1), v(2));
      points[buf] += s * ps;
      (void)dummy;
    }
  std::erase_if(points, [](const auto& kv) { return kv.second == 0; });
  CHECK(points.empty());

  // boundary_loop traverses the edges in cyclic order
  auto loop = boundary_loop(tri);
  CHECK((loop[0].end() - loop[1].start()).norm() <= 1e-15);
  CHECK((loop[1].end() - loop[2].start()).norm() <= 1e-15);
  CHECK((loop[2].end() - loop[0].start()).norm() <= 1e-15);
}

TEST_CASE("del del is zero for a tetrahedron") {
  auto faces = boundary(unit_tet());
  REQUIRE(faces.size() == 4);
  std::map<std::string, int> edges;
  for (auto& [f, s] : faces)
    for (auto& [e, es] : boundary(f)) {
      FaceKey k = edge_key(e);
      edges[k.key] += k.parity * s * es;
    }
  std::erase_if(edges, [](const auto& kv) { return kv.second == 0; });
  CHECK(edges.empty());
}

TEST_CASE("path subdivision") {
  Simplex seg = Simplex::affine_from_vertices({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0)});
  CHECK(subdivide_path(seg, 0).size() == 1);
  auto parts = subdivide_path(seg, 2);
  REQUIRE(parts.size() == 4);
  CHECK(parts[0].end()(0) == doctest::Approx(0.25));
  CHECK(parts[1].end()(0) == doctest::Approx(0.5));
  CHECK(parts[2].end()(0) == doctest::Approx(0.75));
  for (std::size_t i = 0; i + 1 < parts.size(); ++i)
    CHECK((parts[i].end() - parts[i + 1].start()).norm() == 0.0);
}

TEST_CASE("kite refinement") {
  Simplex tri = Simplex::affine_from_vertices(
      {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)});
  Kite k = Kite::based(tri);
  auto children = subdivide_kite(k);

  for (const auto& ch : children) {
    // kite invariant holds exactly
    if (!ch.tail.empty())
      CHECK((ch.tail.end() - ch.face.vertex(0)).norm() <= 1e-15);
    // each sub-face has an eighth of the parent reference area
    Eigen::MatrixXd j = ch.face.jacobian(Eigen::Vector2d(0.25, 0.25));
    double area = 0.5 * std::abs(j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0));
    CHECK(area == doctest::Approx(0.125));
    // children keep the parent orientation
    CHECK(j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0) > 0);
  }

  // two levels tile the parent: signed boundary edges of the 16 children
  // reduce to the parent boundary
  auto grand = subdivide_kite(k, 2);
  CHECK(grand.size() == 16);
  std::map<std::string, int> edges;
  auto add_edges = [&](const Simplex& f, int sgn) {
    for (auto& [e, s] : boundary(f)) {
      FaceKey ek = edge_key(e);
      edges[ek.key] += ek.parity * s * sgn;
    }
  };
  for (const auto& ch : grand) add_edges(ch.face, 1);
  // subtract the parent boundary at matching resolution (2 splits per edge)
  for (auto& [e, s] : boundary(tri))
    for (const auto& piece : subdivide_path(e, 2)) {
      FaceKey ek = edge_key(piece);
      edges[ek.key] -= ek.parity * s;
    }
  std::erase_if(edges, [](const auto& kv) { return kv.second == 0; });
  CHECK(edges.empty());
}

TEST_CASE("tail growth is bounded") {
  Simplex tri = Simplex::affine_from_vertices(
      {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)});
  std::vector<Kite> level = {Kite::based(tri)};
  for (int l = 1; l <= 4; ++l) {
    std::vector<Kite> next;
    for (auto& k : level)
      for (auto& ch : subdivide_kite(k)) next.push_back(ch);
    level = std::move(next);
    for (const auto& k : level)
      CHECK(static_cast<int>(k.tail.segments().size()) <= 2 * l);
  }
}

TEST_CASE("tet subdivision") {
  Simplex tet = unit_tet();
  auto children = subdivide_tet(tet);
  REQUIRE(children.size() == 8);

  double vol = 0;
  for (const auto& ch : children) {
    double v = signed_volume(ch);
    CHECK(v > 0);  // orientation preserved
    vol += v;
  }
  CHECK(vol == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  // internal faces cancel pairwise: of the 8 x 4 child faces, the 16
  // inner ones vanish and the 16 outer ones tile the parent boundary
  std::vector<std::pair<Simplex, int>> faces;
  for (const auto& ch : children)
    for (auto& f : boundary(ch)) faces.push_back(f);
  auto survivors = reduce_signed_faces(std::move(faces));
  CHECK(survivors.size() == 16);

  // diameters shrink for any affine tet (the octahedron diagonal can
  // exceed half the parent diameter off the self-similar family)
  auto diam = [](const Simplex& t) {
    std::vector<Eigen::VectorXd> v = {t.vertex(0), t.vertex(1), t.vertex(2), t.vertex(3)};
    double d = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) d = std::max(d, (v[i] - v[j]).norm());
    return d;
  };
  double dp = diam(tet);
  for (const auto& ch : children) CHECK(diam(ch) <= 0.75 * dp + 1e-12);
}

TEST_CASE("kuhn tets halve their diameter under subdivision") {
  auto cube = std::make_shared<SmoothMap>(
      3, 3, std::vector<Expr>{Expr::var("s"), Expr::var("t"), Expr::var("u")});
  auto diam = [](const Simplex& t) {
    std::vector<Eigen::VectorXd> v = {t.vertex(0), t.vertex(1), t.vertex(2), t.vertex(3)};
    double d = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) d = std::max(d, (v[i] - v[j]).norm());
    return d;
  };
  for (auto& [tet, sgn] : triangulate_box(cube, 0).tets) {
    double dp = diam(tet);
    for (const auto& ch : subdivide_tet(tet)) {
      CHECK(diam(ch) <= 0.5 * dp + 1e-12);
      for (const auto& grand : subdivide_tet(ch))
        CHECK(diam(grand) <= 0.25 * dp + 1e-12);
    }
  }
}

TEST_CASE("kuhn box decomposition") {
  auto cube = std::make_shared<SmoothMap>(
      3, 3, std::vector<Expr>{Expr::var("s"), Expr::var("t"), Expr::var("u")});
  Chain3 chain = triangulate_box(cube, 0);
  REQUIRE(chain.tets.size() == 6);
  double vol = 0;
  for (auto& [t, s] : chain.tets) vol += s * signed_volume(t);
  CHECK(vol == doctest::Approx(1.0));

  // one refinement: 48 tets, same volume
  Chain3 fine = chain.refined(1);
  CHECK(fine.tets.size() == 48);
  double vol2 = 0;
  for (auto& [t, s] : fine.tets) vol2 += s * signed_volume(t);
  CHECK(vol2 == doctest::Approx(1.0).epsilon(1e-10));

  // internal faces cancel: 6 tets x 4 faces = 24, 12 internal
  auto faces = reduce_signed_faces(chain.boundary_faces());
  CHECK(faces.size() == 12);
}

TEST_CASE("degeneracy detection") {
  // constant face
  std::vector<Expr> cc = {Expr::constant(0.2), Expr::constant(0.5), Expr::constant(0.0)};
  CHECK(degenerate(Simplex(std::make_shared<SmoothMap>(2, 3, cc), 2)));

  // face factoring through a curve
  Expr st = Expr::var("s") + Expr::var("t");
  std::vector<Expr> curve = {st, st * st, Expr::constant(0.0)};
  CHECK(degenerate(Simplex(std::make_shared<SmoothMap>(2, 3, curve), 2)));

  // embedded affine triangle
  CHECK_FALSE(degenerate(Simplex::affine_from_vertices(
      {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)})));
}

TEST_CASE("reversal flips orientation exactly") {
  Simplex tri = Simplex::affine_from_vertices(
      {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)});
  FaceKey a = face_key(tri);
  FaceKey b = face_key(tri.reversed());
  CHECK(a.key == b.key);
  CHECK(a.parity == -b.parity);
  auto reduced =
      reduce_signed_faces({{tri, 1}, {tri.reversed(), 1}});
  CHECK(reduced.empty());

  Simplex seg = Simplex::affine_from_vertices({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 0)});
  CHECK((seg.reversed().start() - seg.end()).norm() == 0.0);
  CHECK((seg.reversed().end() - seg.start()).norm() == 0.0);
}

TEST_CASE("surface pair invariants") {
  auto S = Expr::var("s"), T = Expr::var("t"), U = Expr::var("u");
  Expr bump = Expr::constant(8.0) * S * (Expr::constant(1) - S) * T * (Expr::constant(1) - T);
  auto box = std::make_shared<SmoothMap>(3, 3, std::vector<Expr>{S, T, U * bump});
  SurfacePair pair = box_surface_pair(box);
  CHECK(pair.sigma0.size() == 2);
  CHECK(pair.sigma1.size() == 10);
  CHECK_NOTHROW(pair.validate());

  // dropping a surface face breaks the boundary identity with a report
  SurfacePair broken = pair;
  broken.sigma1.pop_back();
  CHECK_THROWS_WITH_AS(broken.validate(),
                       doctest::Contains("unmatched"), std::invalid_argument);
}

TEST_CASE("piecewise paths chain and reverse") {
  Simplex a = Simplex::affine_from_vertices({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0)});
  Simplex b = Simplex::affine_from_vertices({Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 1, 0)});
  PiecewisePath p = PiecewisePath(a).then(b);
  CHECK((p.start() - Eigen::Vector3d(0, 0, 0)).norm() == 0);
  CHECK((p.end() - Eigen::Vector3d(1, 1, 0)).norm() == 0);
  PiecewisePath r = p.reversed();
  CHECK((r.start() - p.end()).norm() == 0);
  CHECK((r.end() - p.start()).norm() == 0);

  Simplex c = Simplex::affine_from_vertices({Eigen::Vector3d(5, 0, 0), Eigen::Vector3d(6, 0, 0)});
  CHECK_THROWS_AS(PiecewisePath(std::vector<Simplex>{a, c}), std::invalid_argument);
}

TEST_CASE("smooth maps detect affine structure") {
  auto aff = std::make_shared<SmoothMap>(
      2, 3,
      std::vector<Expr>{Expr::var("s") + Expr::var("t"), Expr::var("t"), Expr::constant(1.0)});
  CHECK(aff->affine());
  auto curved = std::make_shared<SmoothMap>(
      2, 3, std::vector<Expr>{Expr::var("s"), Expr::var("t"), Expr::sin(Expr::var("s"))});
  CHECK_FALSE(curved->affine());
}
