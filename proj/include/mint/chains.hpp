#ifndef MINT_CHAINS_HPP
#define MINT_CHAINS_HPP

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "mint/expr.hpp"
#include "mint/forms.hpp"

namespace mint {

/**
 * A smooth map from a reference domain (coordinates s,t,u) into the
 * ambient chart, with compiled component and Jacobian evaluators shared
 * by every simplex cut out of it.
 */
class SmoothMap {
 public:
  SmoothMap(int domain_dim, int ambient_dim, std::vector<Expr> components);

  int domain_dim() const { return domain_dim_; }
  int ambient_dim() const { return ambient_dim_; }
  const std::vector<Expr>& components() const { return components_; }
  bool affine() const { return affine_; }

  Eigen::VectorXd eval(const Eigen::VectorXd& t) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& t) const;  // ambient x domain

 private:
  int domain_dim_, ambient_dim_;
  std::vector<Expr> components_;
  std::vector<CompiledExpr> comp_;
  std::vector<CompiledExpr> jac_;  // row-major ambient x domain
  bool affine_ = false;
  Eigen::MatrixXd const_jac_;
  Eigen::VectorXd const_b_;
};

using SmoothMapPtr = std::shared_ptr<const SmoothMap>;

/**
 * Parametric n-simplex: a shared smooth map composed with an affine
 * embedding of the reference simplex into the map's domain. Subdivision
 * and boundary extraction only touch the affine part, so shared points
 * chain exactly.
 */
class Simplex {
 public:
  Simplex() = default;
  // the identity embedding of the reference simplex
  Simplex(SmoothMapPtr map, int dim);
  Simplex(SmoothMapPtr map, Eigen::MatrixXd affine_a, Eigen::VectorXd affine_b);

  // an affine simplex through the given vertex images (column per vertex offset)
  static Simplex affine_from_vertices(const std::vector<Eigen::VectorXd>& verts);

  int dim() const { return static_cast<int>(a_.cols()); }
  int ambient_dim() const { return map_->ambient_dim(); }
  const SmoothMapPtr& map() const { return map_; }
  const Eigen::MatrixXd& affine_a() const { return a_; }
  const Eigen::VectorXd& affine_b() const { return b_; }

  Eigen::VectorXd eval(const Eigen::VectorXd& t) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& t) const;  // ambient x dim
  Eigen::VectorXd vertex(int i) const;

  // restrict to an affine sub-simplex of the reference domain
  Simplex compose_affine(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) const;
  // sub-simplex through reference points (columns of `ref_verts`)
  Simplex sub_simplex(const Eigen::MatrixXd& ref_verts) const;

  // orientation reversal (reference coordinate swap; exact)
  Simplex reversed() const;

  // n=1 helpers
  Eigen::VectorXd start() const;
  Eigen::VectorXd end() const;

  // symbolic components over the reference chart (materialized on demand)
  std::vector<Expr> component_exprs() const;

 private:
  SmoothMapPtr map_;
  Eigen::MatrixXd a_;  // map domain_dim x dim
  Eigen::VectorXd b_;
};

// convenience: build a map/simplex from component strings over s,t,u
Simplex make_simplex(int dim, int ambient_dim, const std::vector<std::string>& components);

LieValuedForm pullback(const LieValuedForm& w, const Simplex& f);

// faces with alternating signs (-1)^i by omitted vertex; dim >= 1
std::vector<std::pair<Simplex, int>> boundary(const Simplex& s);

// the edges v0->v1, v1->v2, v2->v0 of a 2-simplex in traversal order
std::array<Simplex, 3> boundary_loop(const Simplex& face);

// equal reference subintervals in orientation order; exact chaining
std::vector<Simplex> subdivide_path(const Simplex& path, int k);

// affine restriction of a path to [a,b] in reference parameter
Simplex restrict_path(const Simplex& path, double a, double b);

/** Piecewise-smooth path: segments in traversal order, endpoints chained. */
class PiecewisePath {
 public:
  PiecewisePath() = default;
  explicit PiecewisePath(Simplex seg) { segments_.push_back(std::move(seg)); }
  explicit PiecewisePath(std::vector<Simplex> segs);

  const std::vector<Simplex>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  Eigen::VectorXd start() const;
  Eigen::VectorXd end() const;

  PiecewisePath then(const Simplex& seg) const;
  PiecewisePath then(const PiecewisePath& p) const;
  PiecewisePath reversed() const;

 private:
  std::vector<Simplex> segments_;
};

PiecewisePath concat(const PiecewisePath& first, const PiecewisePath& second);

/** Kite: a tail path whose endpoint is the face's first vertex. */
struct Kite {
  PiecewisePath tail;  // may be empty (face based at the kite base point)
  Simplex face;        // dim 2

  Kite(PiecewisePath t, Simplex f);
  static Kite based(Simplex face) { return Kite(PiecewisePath{}, std::move(face)); }
  Eigen::VectorXd base_point() const;
  Kite reversed() const { return Kite(tail, face.reversed()); }
};

/**
 * One edgewise refinement step of a kite face. Children are listed in
 * product order (corner at v0, middle, corner at v1, corner at v2); the
 * middle triangle is traversed (m01, m12, m02). Each child's route runs
 * from the parent face's v0 along a subdivision edge to the child's v0.
 */
struct KiteRefinement {
  std::array<Simplex, 4> faces;
  std::array<std::vector<Simplex>, 4> routes;
};
KiteRefinement refine_face(const Simplex& face);

std::array<Kite, 4> subdivide_kite(const Kite& k);
std::vector<Kite> subdivide_kite(const Kite& k, int levels);

// edgewise subdivision of a 3-simplex into 8 (4 corners + 4 octahedron
// pieces split along the m02-m13 diagonal); all children orientation-preserving
std::vector<Simplex> subdivide_tet(const Simplex& tet);

// true iff the Jacobian has rank < 2 at all quadrature sample points
bool degenerate(const Simplex& face, double tol = 1e-10);

/** Signed chain of 3-simplices. */
struct Chain3 {
  std::vector<std::pair<Simplex, int>> tets;

  std::vector<std::pair<Simplex, int>> boundary_faces() const;
  Chain3 refined(int levels) const;
};

// signature of a face up to reparametrization: quantized sorted vertex
// images plus barycenter image; `parity` distinguishes the two orientations
struct FaceKey {
  std::string key;
  int parity = 1;
  bool collapsed = false;  // repeated vertex images; parity is meaningless
  bool operator==(const FaceKey& o) const { return key == o.key; }
};
FaceKey face_key(const Simplex& face);
FaceKey edge_key(const Simplex& edge);

// cancel oppositely-oriented duplicates; returns survivors
std::vector<std::pair<Simplex, int>> reduce_signed_faces(
    std::vector<std::pair<Simplex, int>> faces);

/**
 * Kuhn (permutation) decomposition of the reference cube [0,1]^3 mapped
 * through `box_map`, refined `levels` times. All tets positively
 * oriented in the cube.
 */
Chain3 triangulate_box(const SmoothMapPtr& box_map, int levels);

/** Two surfaces with common boundary plus a filling 3-chain. */
struct SurfacePair {
  std::vector<Kite> sigma0;
  std::vector<Kite> sigma1;
  PiecewisePath gamma;
  Chain3 filling;

  // verifies d(filling) = sigma1 - sigma0 and the shared boundary loop;
  // throws with the unmatched face keys otherwise
  void validate() const;
};

/**
 * The standard box surface pair: sigma0 = bottom facet (upward), sigma1
 * = top facet plus the four walls (outward), filling = Kuhn
 * decomposition. The bottom and top squares are presented as coherent
 * 2-kite products based at a diagonal corner; intended for box maps
 * whose walls are degenerate (a homotopy between two graph surfaces
 * with fixed boundary), in which case the wall kites contribute
 * identity factors.
 */
SurfacePair box_surface_pair(const SmoothMapPtr& box_map);

// all 12 outward-oriented boundary triangles of the box as kites
std::vector<Kite> box_closed_surface(const SmoothMapPtr& box_map, int levels = 0);

}  // namespace mint

#endif
