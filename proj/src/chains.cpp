#include "mint/chains.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace mint {

namespace {

std::vector<std::pair<std::string, Expr>> affine_bindings(const std::vector<std::string>& from,
                                                          const Eigen::MatrixXd& a,
                                                          const Eigen::VectorXd& b,
                                                          const std::vector<std::string>& to) {
  // expressions for t_i = b_i + sum_j a_ij s_j
  std::vector<std::pair<std::string, Expr>> bind;
  for (int i = 0; i < a.rows(); ++i) {
    Expr e = Expr::constant(b(i));
    for (int j = 0; j < a.cols(); ++j)
      e = e + Expr::constant(a(i, j)) * Expr::var(to[static_cast<std::size_t>(j)]);
    bind.emplace_back(from[static_cast<std::size_t>(i)], e);
  }
  return bind;
}

}  // namespace

SmoothMap::SmoothMap(int domain_dim, int ambient_dim, std::vector<Expr> components)
    : domain_dim_(domain_dim), ambient_dim_(ambient_dim), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != ambient_dim_)
    throw std::invalid_argument("smooth map component count does not match ambient dimension");
  auto chart = reference_chart(domain_dim_);
  comp_.reserve(components_.size());
  for (const auto& c : components_) comp_.emplace_back(c, chart);
  jac_.reserve(static_cast<std::size_t>(ambient_dim_ * domain_dim_));
  affine_ = true;
  std::vector<Expr> jac_exprs;
  for (int i = 0; i < ambient_dim_; ++i)
    for (int j = 0; j < domain_dim_; ++j) {
      Expr d = components_[static_cast<std::size_t>(i)].diff(chart[static_cast<std::size_t>(j)]);
      if (!d.is_constant()) affine_ = false;
      jac_exprs.push_back(d);
      jac_.emplace_back(d, chart);
    }
  if (affine_) {
    const_jac_.resize(ambient_dim_, domain_dim_);
    for (int i = 0; i < ambient_dim_; ++i)
      for (int j = 0; j < domain_dim_; ++j)
        const_jac_(i, j) = jac_exprs[static_cast<std::size_t>(i * domain_dim_ + j)].constant_value();
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(domain_dim_);
    const_b_.resize(ambient_dim_);
    std::vector<double> z(static_cast<std::size_t>(domain_dim_), 0.0);
    for (int i = 0; i < ambient_dim_; ++i) const_b_(i) = comp_[static_cast<std::size_t>(i)](z);
  }
}

Eigen::VectorXd SmoothMap::eval(const Eigen::VectorXd& t) const {
  if (affine_) return const_b_ + const_jac_ * t;
  Eigen::VectorXd out(ambient_dim_);
  std::span<const double> ts(t.data(), static_cast<std::size_t>(t.size()));
  for (int i = 0; i < ambient_dim_; ++i) out(i) = comp_[static_cast<std::size_t>(i)](ts);
  return out;
}

Eigen::MatrixXd SmoothMap::jacobian(const Eigen::VectorXd& t) const {
  if (affine_) return const_jac_;
  Eigen::MatrixXd out(ambient_dim_, domain_dim_);
  std::span<const double> ts(t.data(), static_cast<std::size_t>(t.size()));
  for (int i = 0; i < ambient_dim_; ++i)
    for (int j = 0; j < domain_dim_; ++j)
      out(i, j) = jac_[static_cast<std::size_t>(i * domain_dim_ + j)](ts);
  return out;
}

Simplex::Simplex(SmoothMapPtr map, int dim)
    : map_(std::move(map)),
      a_(Eigen::MatrixXd::Identity(map_->domain_dim(), dim)),
      b_(Eigen::VectorXd::Zero(map_->domain_dim())) {
  if (dim > map_->domain_dim())
    throw std::invalid_argument("simplex dimension exceeds map domain dimension");
}

Simplex::Simplex(SmoothMapPtr map, Eigen::MatrixXd affine_a, Eigen::VectorXd affine_b)
    : map_(std::move(map)), a_(std::move(affine_a)), b_(std::move(affine_b)) {
  if (a_.rows() != map_->domain_dim() || b_.size() != map_->domain_dim())
    throw std::invalid_argument("affine embedding has wrong shape");
}

Simplex Simplex::affine_from_vertices(const std::vector<Eigen::VectorXd>& verts) {
  if (verts.empty()) throw std::invalid_argument("need at least one vertex");
  const int n = static_cast<int>(verts.size()) - 1;
  const int d = static_cast<int>(verts[0].size());
  auto chart = reference_chart(n);
  std::vector<Expr> comps;
  for (int i = 0; i < d; ++i) {
    Expr e = Expr::constant(verts[0](i));
    for (int j = 0; j < n; ++j)
      e = e + Expr::constant(verts[static_cast<std::size_t>(j + 1)](i) - verts[0](i)) *
                  Expr::var(chart[static_cast<std::size_t>(j)]);
    comps.push_back(e);
  }
  return Simplex(std::make_shared<SmoothMap>(n, d, std::move(comps)), n);
}

Eigen::VectorXd Simplex::eval(const Eigen::VectorXd& t) const { return map_->eval(b_ + a_ * t); }

Eigen::MatrixXd Simplex::jacobian(const Eigen::VectorXd& t) const {
  return map_->jacobian(b_ + a_ * t) * a_;
}

Eigen::VectorXd Simplex::vertex(int i) const {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(dim());
  if (i > 0) t(i - 1) = 1.0;
  return eval(t);
}

Simplex Simplex::compose_affine(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) const {
  return Simplex(map_, a_ * a, b_ + a_ * b);
}

Simplex Simplex::sub_simplex(const Eigen::MatrixXd& ref_verts) const {
  const int n = static_cast<int>(ref_verts.cols()) - 1;
  Eigen::MatrixXd a(ref_verts.rows(), n);
  for (int j = 0; j < n; ++j) a.col(j) = ref_verts.col(j + 1) - ref_verts.col(0);
  return compose_affine(a, ref_verts.col(0));
}

Simplex Simplex::reversed() const {
  const int n = dim();
  if (n == 0) return *this;
  Eigen::MatrixXd swap = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
  if (n == 1) {
    swap(0, 0) = -1;
    shift(0) = 1;  // s -> 1 - s
  } else {
    swap.col(0).swap(swap.col(1));  // exchange the first two reference coordinates
  }
  return compose_affine(swap, shift);
}

Eigen::VectorXd Simplex::start() const {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(1);
  return eval(t);
}

Eigen::VectorXd Simplex::end() const {
  Eigen::VectorXd t = Eigen::VectorXd::Ones(1);
  return eval(t);
}

std::vector<Expr> Simplex::component_exprs() const {
  auto inner = reference_chart(map_->domain_dim());
  auto outer = reference_chart(dim());
  auto bind = affine_bindings(inner, a_, b_, outer);
  std::vector<Expr> out;
  out.reserve(map_->components().size());
  for (const auto& c : map_->components()) out.push_back(c.subst(bind));
  return out;
}

Simplex make_simplex(int dim, int ambient_dim, const std::vector<std::string>& components) {
  auto chart = reference_chart(dim);
  std::vector<Expr> comps;
  comps.reserve(components.size());
  for (const auto& c : components) comps.push_back(parse_expr(c, chart));
  return Simplex(std::make_shared<SmoothMap>(dim, ambient_dim, std::move(comps)), dim);
}

LieValuedForm pullback(const LieValuedForm& w, const Simplex& f) {
  return pullback(w, f.component_exprs(), reference_chart(f.dim()));
}

std::vector<std::pair<Simplex, int>> boundary(const Simplex& s) {
  const int n = s.dim();
  if (n < 1) throw std::invalid_argument("boundary of a point");
  // reference vertices v0 = 0, v_i = e_i as columns
  Eigen::MatrixXd verts = Eigen::MatrixXd::Zero(n, n + 1);
  for (int i = 1; i <= n; ++i) verts(i - 1, i) = 1.0;
  std::vector<std::pair<Simplex, int>> out;
  int sign = 1;
  for (int omit = 0; omit <= n; ++omit, sign = -sign) {
    Eigen::MatrixXd kept(n, n);
    int c = 0;
    for (int i = 0; i <= n; ++i)
      if (i != omit) kept.col(c++) = verts.col(i);
    out.emplace_back(s.sub_simplex(kept), sign);
  }
  return out;
}

std::array<Simplex, 3> boundary_loop(const Simplex& face) {
  if (face.dim() != 2) throw std::invalid_argument("boundary_loop expects a 2-simplex");
  Eigen::MatrixXd v0(2, 1), v1(2, 1), v2(2, 1);
  v0 << 0, 0;
  v1 << 1, 0;
  v2 << 0, 1;
  auto edge = [&](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    Eigen::MatrixXd verts(2, 2);
    verts.col(0) = p;
    verts.col(1) = q;
    return face.sub_simplex(verts);
  };
  return {edge(v0, v1), edge(v1, v2), edge(v2, v0)};
}

std::vector<Simplex> subdivide_path(const Simplex& path, int k) {
  if (path.dim() != 1) throw std::invalid_argument("subdivide_path expects a 1-simplex");
  if (k < 0) throw std::invalid_argument("negative subdivision level");
  const int n = 1 << k;
  std::vector<Simplex> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.push_back(restrict_path(path, double(i) / n, double(i + 1) / n));
  return out;
}

Simplex restrict_path(const Simplex& path, double a, double b) {
  Eigen::MatrixXd sc(1, 1);
  sc(0, 0) = b - a;
  Eigen::VectorXd sh(1);
  sh(0) = a;
  return path.compose_affine(sc, sh);
}

PiecewisePath::PiecewisePath(std::vector<Simplex> segs) : segments_(std::move(segs)) {
  for (std::size_t i = 1; i < segments_.size(); ++i)
    if ((segments_[i - 1].end() - segments_[i].start()).norm() > 1e-9)
      throw std::invalid_argument("piecewise path segments do not chain");
}

Eigen::VectorXd PiecewisePath::start() const {
  if (empty()) throw std::logic_error("empty path has no start");
  return segments_.front().start();
}

Eigen::VectorXd PiecewisePath::end() const {
  if (empty()) throw std::logic_error("empty path has no end");
  return segments_.back().end();
}

PiecewisePath PiecewisePath::then(const Simplex& seg) const {
  std::vector<Simplex> segs = segments_;
  segs.push_back(seg);
  return PiecewisePath(std::move(segs));
}

PiecewisePath PiecewisePath::then(const PiecewisePath& p) const {
  std::vector<Simplex> segs = segments_;
  segs.insert(segs.end(), p.segments_.begin(), p.segments_.end());
  return PiecewisePath(std::move(segs));
}

PiecewisePath PiecewisePath::reversed() const {
  std::vector<Simplex> segs;
  segs.reserve(segments_.size());
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it)
    segs.push_back(it->reversed());
  return PiecewisePath(std::move(segs));
}

PiecewisePath concat(const PiecewisePath& first, const PiecewisePath& second) {
  return first.then(second);
}

Kite::Kite(PiecewisePath t, Simplex f) : tail(std::move(t)), face(std::move(f)) {
  if (face.dim() != 2) throw std::invalid_argument("kite face must be a 2-simplex");
  if (!tail.empty() && (tail.end() - face.vertex(0)).norm() > 1e-12)
    throw std::invalid_argument("kite tail endpoint does not match the face base point");
}

Eigen::VectorXd Kite::base_point() const {
  return tail.empty() ? face.vertex(0) : tail.start();
}

KiteRefinement refine_face(const Simplex& face) {
  if (face.dim() != 2) throw std::invalid_argument("refine_face expects a 2-simplex");
  Eigen::Vector2d p0(0, 0), p1(1, 0), p2(0, 1);
  Eigen::Vector2d m01(0.5, 0), m12(0.5, 0.5), m02(0, 0.5);
  auto tri = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    Eigen::MatrixXd verts(2, 3);
    verts.col(0) = a;
    verts.col(1) = b;
    verts.col(2) = c;
    return face.sub_simplex(verts);
  };
  auto edge = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    Eigen::MatrixXd verts(2, 2);
    verts.col(0) = a;
    verts.col(1) = b;
    return face.sub_simplex(verts);
  };
  // Order and vertex starts make the conjugated cell boundary loops
  // telescope freely to the parent boundary loop: far corner, corner at
  // v1, middle, corner at v0, with routes through m02 for the first
  // three and the direct edge for the last.
  KiteRefinement r{
      {tri(m02, m12, p2), tri(m12, m01, p1), tri(m01, m12, m02), tri(m01, m02, p0)},
      {std::vector<Simplex>{edge(p0, m02)},
       {edge(p0, m02), edge(m02, m12)},
       {edge(p0, m02), edge(m02, m01)},
       {edge(p0, m01)}}};
  return r;
}

std::array<Kite, 4> subdivide_kite(const Kite& k) {
  KiteRefinement r = refine_face(k.face);
  auto child = [&](int i) {
    PiecewisePath tail = k.tail;
    for (const auto& e : r.routes[static_cast<std::size_t>(i)]) tail = tail.then(e);
    return Kite(std::move(tail), r.faces[static_cast<std::size_t>(i)]);
  };
  return {child(0), child(1), child(2), child(3)};
}

std::vector<Kite> subdivide_kite(const Kite& k, int levels) {
  std::vector<Kite> cur{k};
  for (int l = 0; l < levels; ++l) {
    std::vector<Kite> next;
    next.reserve(cur.size() * 4);
    for (const auto& kk : cur) {
      auto ch = subdivide_kite(kk);
      next.insert(next.end(), std::make_move_iterator(ch.begin()),
                  std::make_move_iterator(ch.end()));
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<Simplex> subdivide_tet(const Simplex& tet) {
  if (tet.dim() != 3) throw std::invalid_argument("subdivide_tet expects a 3-simplex");
  using V = Eigen::Vector3d;
  V v0(0, 0, 0), v1(1, 0, 0), v2(0, 1, 0), v3(0, 0, 1);
  V m01 = (v0 + v1) / 2, m02 = (v0 + v2) / 2, m03 = (v0 + v3) / 2;
  V m12 = (v1 + v2) / 2, m13 = (v1 + v3) / 2, m23 = (v2 + v3) / 2;

  // cut the interior octahedron along its shortest diagonal (measured in
  // the image); this keeps the cube-corner family self-similar so
  // diameters halve under repeated refinement
  auto image_len = [&](const V& a, const V& b) {
    return (tet.eval(a) - tet.eval(b)).norm();
  };
  struct Cut {
    V d0, d1;
    std::array<V, 4> equator;
  };
  const Cut cuts[3] = {{m02, m13, {m01, m12, m23, m03}},
                       {m01, m23, {m02, m03, m13, m12}},
                       {m03, m12, {m01, m02, m23, m13}}};
  int best = 0;
  double best_len = std::numeric_limits<double>::max();
  for (int i = 0; i < 3; ++i) {
    double len = image_len(cuts[i].d0, cuts[i].d1);
    if (len < best_len - 1e-12) {
      best_len = len;
      best = i;
    }
  }
  const Cut& cut = cuts[best];

  auto t = [&](V a, V b, V c, V d) {
    Eigen::Matrix3d cols;
    cols.col(0) = b - a;
    cols.col(1) = c - a;
    cols.col(2) = d - a;
    if (cols.determinant() < 0) std::swap(c, d);
    Eigen::MatrixXd verts(3, 4);
    verts.col(0) = a;
    verts.col(1) = b;
    verts.col(2) = c;
    verts.col(3) = d;
    return tet.sub_simplex(verts);
  };
  std::vector<Simplex> out = {t(v0, m01, m02, m03), t(m01, v1, m12, m13), t(m02, m12, v2, m23),
                              t(m03, m13, m23, v3)};
  for (int i = 0; i < 4; ++i)
    out.push_back(t(cut.d0, cut.d1, cut.equator[static_cast<std::size_t>(i)],
                    cut.equator[static_cast<std::size_t>((i + 1) % 4)]));
  return out;
}

bool degenerate(const Simplex& face, double tol) {
  if (face.dim() != 2) throw std::invalid_argument("degenerate expects a 2-simplex");
  // midpoint-rule nodes plus the barycenter
  std::vector<Eigen::Vector2d> pts = {{0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}, {1.0 / 3, 1.0 / 3}};
  for (const auto& p : pts) {
    Eigen::MatrixXd j = face.jacobian(p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    if (svd.singularValues().size() > 1 && svd.singularValues()(1) > tol) return false;
  }
  return true;
}

std::vector<std::pair<Simplex, int>> Chain3::boundary_faces() const {
  std::vector<std::pair<Simplex, int>> out;
  for (const auto& [tet, sgn] : tets)
    for (auto& [face, fs] : boundary(tet)) out.emplace_back(face, fs * sgn);
  return out;
}

Chain3 Chain3::refined(int levels) const {
  Chain3 cur = *this;
  for (int l = 0; l < levels; ++l) {
    Chain3 next;
    for (const auto& [tet, sgn] : cur.tets)
      for (auto& child : subdivide_tet(tet)) next.tets.emplace_back(std::move(child), sgn);
    cur = std::move(next);
  }
  return cur;
}

namespace {

std::string quantize_point(const Eigen::VectorXd& p) {
  std::string out;
  char buf[32];
  for (int i = 0; i < p.size(); ++i) {
    double q = std::round(p(i) * 1e9) / 1e9;
    if (q == 0.0) q = 0.0;  // normalize -0
    std::snprintf(buf, sizeof buf, "%.9f,", q);
    out += buf;
  }
  return out;
}

int sort3_parity(std::array<std::string, 3>& k) {
  int parity = 1;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2 - i; ++j)
      if (k[static_cast<std::size_t>(j)] > k[static_cast<std::size_t>(j + 1)]) {
        std::swap(k[static_cast<std::size_t>(j)], k[static_cast<std::size_t>(j + 1)]);
        parity = -parity;
      }
  return parity;
}

}  // namespace

FaceKey face_key(const Simplex& face) {
  std::array<std::string, 3> vk = {quantize_point(face.vertex(0)), quantize_point(face.vertex(1)),
                                   quantize_point(face.vertex(2))};
  bool collapsed = vk[0] == vk[1] || vk[1] == vk[2] || vk[0] == vk[2];
  int parity = sort3_parity(vk);
  Eigen::Vector2d bc(1.0 / 3, 1.0 / 3);
  std::string key = vk[0] + "|" + vk[1] + "|" + vk[2] + "|" + quantize_point(face.eval(bc));
  return {key, parity, collapsed};
}

FaceKey edge_key(const Simplex& edge) {
  std::array<std::string, 2> vk = {quantize_point(edge.vertex(0)), quantize_point(edge.vertex(1))};
  bool collapsed = vk[0] == vk[1];
  int parity = 1;
  if (vk[0] > vk[1]) {
    std::swap(vk[0], vk[1]);
    parity = -1;
  }
  Eigen::VectorXd mid = Eigen::VectorXd::Constant(1, 0.5);
  std::string key = vk[0] + "|" + vk[1] + "|" + quantize_point(edge.eval(mid));
  return {key, parity, collapsed};
}

std::vector<std::pair<Simplex, int>> reduce_signed_faces(
    std::vector<std::pair<Simplex, int>> faces) {
  struct Member {
    std::size_t idx;
    int signed_parity;
    bool collapsed;
  };
  std::map<std::string, std::vector<Member>> groups;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    FaceKey fk = face_key(faces[i].first);
    groups[fk.key].push_back({i, fk.parity * faces[i].second, fk.collapsed});
  }
  std::vector<bool> keep(faces.size(), true);
  for (auto& [key, members] : groups) {
    // cancel pairs with opposite signed parity; collapsed faces have no
    // meaningful orientation and pair with anything sharing their key
    std::vector<Member> stack;
    for (auto& m : members) {
      bool cancelled = false;
      for (auto it = stack.begin(); it != stack.end(); ++it)
        if (it->signed_parity == -m.signed_parity || m.collapsed) {
          keep[it->idx] = false;
          keep[m.idx] = false;
          stack.erase(it);
          cancelled = true;
          break;
        }
      if (!cancelled) stack.push_back(m);
    }
  }
  std::vector<std::pair<Simplex, int>> out;
  for (std::size_t i = 0; i < faces.size(); ++i)
    if (keep[i]) out.push_back(std::move(faces[i]));
  return out;
}

Chain3 triangulate_box(const SmoothMapPtr& box_map, int levels) {
  if (box_map->domain_dim() != 3)
    throw std::invalid_argument("box triangulation needs a 3-dimensional reference domain");
  using V = Eigen::Vector3d;
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  Chain3 chain;
  Simplex cube_id(box_map, 3);
  for (const auto& p : perms) {
    V p0 = V::Zero(), p1 = V::Zero(), p2 = V::Zero(), p3 = V::Ones();
    p1(p[0]) = 1;
    p2(p[0]) = 1;
    p2(p[1]) = 1;
    Eigen::Matrix3d cols;
    cols.col(0) = p1 - p0;
    cols.col(1) = p2 - p0;
    cols.col(2) = p3 - p0;
    Eigen::MatrixXd verts(3, 4);
    if (cols.determinant() > 0) {
      verts.col(0) = p0;
      verts.col(1) = p1;
      verts.col(2) = p2;
      verts.col(3) = p3;
    } else {
      verts.col(0) = p0;
      verts.col(1) = p2;
      verts.col(2) = p1;
      verts.col(3) = p3;
    }
    chain.tets.emplace_back(cube_id.sub_simplex(verts), 1);
  }
  return chain.refined(levels);
}

namespace {

// cube-reference coordinates of a face's reference points
Eigen::VectorXd cube_coords(const Simplex& face, const Eigen::Vector2d& t) {
  return face.affine_b() + face.affine_a() * t;
}

// does the face lie on the cube facet {coordinate axis == value}?
bool face_on_facet(const Simplex& face, int axis, double value) {
  for (auto& t : {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)})
    if (std::abs(cube_coords(face, t)(axis) - value) > 1e-12) return false;
  return true;
}

Kite kite_with_corner_tail(const SmoothMapPtr& box_map, const Simplex& face) {
  // straight reference segment from the cube origin to the face's first vertex
  Eigen::VectorXd target = cube_coords(face, Eigen::Vector2d(0, 0));
  if (target.norm() < 1e-14) return Kite::based(face);
  Eigen::MatrixXd a(3, 1);
  a.col(0) = target;
  Simplex tail(box_map, a, Eigen::VectorXd::Zero(3));
  return Kite(PiecewisePath(tail), face);
}

std::string face_sort_key(const Simplex& face) {
  Eigen::Vector2d bc(1.0 / 3, 1.0 / 3);
  std::ostringstream os;
  Eigen::VectorXd c = cube_coords(face, bc);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f,%.9f,%.9f", c(0), c(1), c(2));
  os << buf;
  return os.str();
}

// rotate a triangle's vertex order cyclically so vertex `r` comes first
Simplex rotate_triangle(const Simplex& face, int r) {
  Eigen::MatrixXd verts(2, 3);
  verts.col(0) << 0, 0;
  verts.col(1) << 1, 0;
  verts.col(2) << 0, 1;
  Eigen::MatrixXd rot(2, 3);
  for (int i = 0; i < 3; ++i) rot.col(i) = verts.col((r + i) % 3);
  return face.sub_simplex(rot);
}

std::string cube_vertex_key(const Simplex& face, int i) {
  Eigen::Vector2d t(0, 0);
  if (i == 1) t << 1, 0;
  if (i == 2) t << 0, 1;
  Eigen::VectorXd c = cube_coords(face, t);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f,%.9f,%.9f", c(0), c(1), c(2));
  return buf;
}

/**
 * Present a square facet given as two consistently-oriented triangles as
 * two kites whose conjugated boundary loops telescope to the square
 * boundary: both based at one diagonal endpoint with a shared tail, the
 * triangle whose first edge lies on the square boundary multiplied
 * first.
 */
std::vector<Kite> square_kites(const SmoothMapPtr& box_map, const Simplex& t0,
                               const Simplex& t1) {
  // the diagonal is the vertex pair present in both triangles
  std::array<std::string, 3> k0, k1;
  for (int i = 0; i < 3; ++i) {
    k0[static_cast<std::size_t>(i)] = cube_vertex_key(t0, i);
    k1[static_cast<std::size_t>(i)] = cube_vertex_key(t1, i);
  }
  std::vector<std::string> shared;
  for (auto& a : k0)
    for (auto& b : k1)
      if (a == b) shared.push_back(a);
  if (shared.size() != 2)
    throw std::invalid_argument("square facet triangles do not share a diagonal");
  const std::string& q0 = std::min(shared[0], shared[1]);

  auto rotated_to = [&](const Simplex& tri, const std::string& key) {
    for (int i = 0; i < 3; ++i)
      if (cube_vertex_key(tri, i) == key) return rotate_triangle(tri, i);
    throw std::logic_error("vertex key not found in triangle");
  };
  Simplex r0 = rotated_to(t0, q0);
  Simplex r1 = rotated_to(t1, q0);

  // the triangle whose last vertex is the other diagonal endpoint has the
  // diagonal as its first clockwise edge; it goes second
  const std::string& q2 = shared[0] == q0 ? shared[1] : shared[0];
  bool r0_diag_first = cube_vertex_key(r0, 2) == q2;
  Simplex first = r0_diag_first ? r1 : r0;
  Simplex second = r0_diag_first ? r0 : r1;

  Eigen::VectorXd base = cube_coords(first, Eigen::Vector2d(0, 0));
  std::vector<Kite> out;
  if (base.norm() < 1e-14) {
    out.push_back(Kite::based(first));
    out.push_back(Kite::based(second));
  } else {
    Eigen::MatrixXd a(3, 1);
    a.col(0) = base;
    Simplex tail(box_map, a, Eigen::VectorXd::Zero(3));
    out.push_back(Kite(PiecewisePath(tail), first));
    out.push_back(Kite(PiecewisePath(tail), second));
  }
  return out;
}

}  // namespace

SurfacePair box_surface_pair(const SmoothMapPtr& box_map) {
  Chain3 chain = triangulate_box(box_map, 0);
  auto faces = reduce_signed_faces(chain.boundary_faces());

  auto oriented = [](const std::pair<Simplex, int>& f) {
    return f.second > 0 ? f.first : f.first.reversed();
  };

  std::vector<Simplex> bottom, top, sides;
  for (auto& f : faces) {
    if (face_on_facet(f.first, 2, 0.0))
      bottom.push_back(oriented(f).reversed());  // flip: sigma0 enters dV with a minus sign
    else if (face_on_facet(f.first, 2, 1.0))
      top.push_back(oriented(f));
    else
      sides.push_back(oriented(f));
  }
  if (bottom.size() != 2 || top.size() != 2)
    throw std::logic_error("box boundary does not split into square facets");

  SurfacePair pair;
  pair.sigma0 = square_kites(box_map, bottom[0], bottom[1]);
  pair.sigma1 = square_kites(box_map, top[0], top[1]);
  std::vector<std::pair<std::string, Simplex>> side_sorted;
  for (auto& s : sides) side_sorted.emplace_back(face_sort_key(s), std::move(s));
  std::sort(side_sorted.begin(), side_sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [k, s] : side_sorted) pair.sigma1.push_back(kite_with_corner_tail(box_map, s));
  pair.filling = std::move(chain);

  // gamma: the bottom square boundary through the box map
  using V2 = Eigen::Vector3d;
  std::vector<V2> loop = {V2(0, 0, 0), V2(1, 0, 0), V2(1, 1, 0), V2(0, 1, 0), V2(0, 0, 0)};
  std::vector<Simplex> segs;
  for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
    Eigen::MatrixXd a(3, 1);
    a.col(0) = loop[i + 1] - loop[i];
    segs.emplace_back(box_map, a, Eigen::VectorXd(loop[i]));
  }
  pair.gamma = PiecewisePath(std::move(segs));
  return pair;
}

std::vector<Kite> box_closed_surface(const SmoothMapPtr& box_map, int levels) {
  Chain3 chain = triangulate_box(box_map, levels);
  auto faces = reduce_signed_faces(chain.boundary_faces());
  std::vector<std::pair<std::string, Simplex>> sorted;
  for (auto& f : faces) {
    Simplex s = f.second > 0 ? f.first : f.first.reversed();
    sorted.emplace_back(face_sort_key(s), std::move(s));
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Kite> out;
  out.reserve(sorted.size());
  for (auto& [k, s] : sorted) out.push_back(kite_with_corner_tail(box_map, s));
  return out;
}

void SurfacePair::validate() const {
  // d(filling) must equal sigma1 - sigma0 as signed face sets
  std::vector<std::pair<Simplex, int>> lhs = filling.boundary_faces();
  for (const auto& k : sigma1) lhs.emplace_back(k.face, -1);
  for (const auto& k : sigma0) lhs.emplace_back(k.face, 1);
  auto leftover = reduce_signed_faces(std::move(lhs));
  if (!leftover.empty()) {
    std::ostringstream os;
    os << "surface pair boundary identity failed; " << leftover.size()
       << " unmatched faces, first at key " << face_key(leftover.front().first).key;
    throw std::invalid_argument(os.str());
  }
  // both surfaces must share the boundary loop gamma
  auto edge_multiset = [](const std::vector<Kite>& kites) {
    std::map<std::string, int> acc;
    for (const auto& k : kites)
      for (auto& [e, s] : boundary(k.face)) {
        FaceKey ek = edge_key(e);
        if (ek.collapsed) continue;
        acc[ek.key] += s * ek.parity;
      }
    std::erase_if(acc, [](const auto& kv) { return kv.second == 0; });
    return acc;
  };
  std::map<std::string, int> gamma_edges;
  for (const auto& seg : gamma.segments()) {
    FaceKey ek = edge_key(seg);
    if (ek.collapsed) continue;
    gamma_edges[ek.key] += ek.parity;
  }
  std::erase_if(gamma_edges, [](const auto& kv) { return kv.second == 0; });
  if (edge_multiset(sigma0) != gamma_edges || edge_multiset(sigma1) != gamma_edges)
    throw std::invalid_argument("surface pair boundary loops do not match gamma");
}

}  // namespace mint
