#include "mint/mi.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace mint {

namespace {

// 3-point Gauss-Legendre on [0,1]
const double kGlNodes[3] = {0.5 - std::sqrt(15.0) / 10.0, 0.5, 0.5 + std::sqrt(15.0) / 10.0};
const double kGlWeights[3] = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};

// degree-2 midpoint rule on the reference triangle (area 1/2)
const double kTriNodes[3][2] = {{0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}};
const double kTriWeight = 1.0 / 6.0;

// degree-2 4-point rule on the reference tetrahedron (volume 1/6)
const double kTetA = 0.5854101966249685;
const double kTetB = 0.1381966011250105;

Vec edge_integral_coords(const LieValuedForm& alpha, const Simplex& seg) {
  Vec acc = Vec::Zero(alpha.spec()->dim());
  Eigen::VectorXd t(1);
  for (int q = 0; q < 3; ++q) {
    t(0) = kGlNodes[q];
    acc += kGlWeights[q] * alpha.eval_coords(seg.eval(t), seg.jacobian(t));
  }
  return acc;
}

Vec tri_integral_coords(const LieValuedForm& beta, const Simplex& face) {
  Vec acc = Vec::Zero(beta.spec()->dim());
  Eigen::VectorXd t(2);
  for (auto& node : kTriNodes) {
    t(0) = node[0];
    t(1) = node[1];
    acc += kTriWeight * beta.eval_coords(face.eval(t), face.jacobian(t));
  }
  return acc;
}

MIResult assemble_result(std::vector<std::pair<int, GroupElement>> levels, double tol) {
  MIResult r;
  r.per_level = std::move(levels);
  r.tol = tol;
  r.value = r.per_level.back().second;
  for (std::size_t i = 1; i < r.per_level.size(); ++i)
    r.diffs.push_back(group_dist(r.per_level[i].second, r.per_level[i - 1].second));
  r.converged = !r.diffs.empty() && r.diffs.back() <= tol;
  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < r.diffs.size(); ++i)
    if (r.diffs[i] > 1e-14 && r.diffs[i + 1] > 1e-14)
      orders.push_back(std::log2(r.diffs[i] / r.diffs[i + 1]));
  if (!orders.empty()) {
    std::sort(orders.begin(), orders.end());
    std::size_t mid = orders.size() / 2;
    r.observed_order = orders.size() % 2 ? orders[mid]
                                         : 0.5 * (orders[mid - 1] + orders[mid]);
  }
  return r;
}

template <typename T>
std::vector<T> parallel_map(int n, int jobs, const std::function<T(int)>& fn) {
  std::vector<T> out(static_cast<std::size_t>(n));
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
      out[static_cast<std::size_t>(i)] = fn(i);
  };
  std::vector<std::thread> pool;
  int nw = std::min(jobs, n);
  pool.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace

GroupElement rp_path(const LieValuedForm& alpha, const Simplex& path, int k) {
  if (path.dim() != 1) throw std::invalid_argument("rp_path expects a 1-simplex");
  if (alpha.degree() != 1) throw std::invalid_argument("rp_path expects a 1-form");
  const SpecPtr& g = alpha.spec();
  OrderedProduct prod(g);
  const int n = 1 << k;
  for (int i = 0; i < n; ++i) {
    Simplex piece = restrict_path(path, double(i) / n, double(i + 1) / n);
    Vec coords = edge_integral_coords(alpha, piece);
    if (!coords.allFinite()) throw eval_error("non-finite path integrand");
    prod.append(exp_alg(AlgebraElement::from_coordinates(g, coords)));
  }
  return prod.value();
}

GroupElement rp_path(const LieValuedForm& alpha, const PiecewisePath& path, int k) {
  OrderedProduct prod(alpha.spec());
  for (const auto& seg : path.segments()) prod.append(rp_path(alpha, seg, k));
  return prod.value();
}

MIResult mi_path(const LieValuedForm& alpha, const PiecewisePath& path, double tol, int k_max) {
  if (tol <= 0) throw std::invalid_argument("tolerance must be positive");
  std::vector<std::pair<int, GroupElement>> levels;
  for (int k = 0; k <= k_max; ++k) {
    levels.emplace_back(k, rp_path(alpha, path, k));
    if (k > 0 && group_dist(levels.back().second, levels[levels.size() - 2].second) <= tol) break;
  }
  return assemble_result(std::move(levels), tol);
}

namespace {

struct SurfaceAccumulator {
  const TwoConnection& conn;
  const LieValuedForm& alpha;
  const LieValuedForm& beta;
  int k;
  OrderedProduct prod;

  SurfaceAccumulator(const TwoConnection& c, int level)
      : conn(c), alpha(c.alpha()), beta(c.beta()), k(level), prod(c.cm().H()) {}

  void walk(const Simplex& face, const GroupElement& tail_holonomy, int depth) {
    if (depth == k) {
      Vec m = tri_integral_coords(beta, face);
      if (!m.allFinite()) throw eval_error("non-finite surface integrand");
      AlgebraElement cell{conn.cm().H(), conn.cm().H()->from_coordinates(m)};
      prod.append(exp_alg(conn.cm().apply_psi(tail_holonomy, cell)));
      return;
    }
    KiteRefinement r = refine_face(face);
    int route_level = std::max(0, k - depth - 1);
    for (int i = 0; i < 4; ++i) {
      GroupElement g = tail_holonomy;
      for (const auto& e : r.routes[static_cast<std::size_t>(i)])
        g = g * rp_path(alpha, e, route_level);
      walk(r.faces[static_cast<std::size_t>(i)], g, depth + 1);
    }
  }
};

}  // namespace

GroupElement rp_surface(const TwoConnection& conn, const Kite& kite, int k) {
  GroupElement g0 = kite.tail.empty() ? GroupElement::identity(conn.cm().G())
                                      : rp_path(conn.alpha(), kite.tail, k);
  SurfaceAccumulator acc(conn, k);
  acc.walk(kite.face, g0, 0);
  return acc.prod.value();
}

MIResult mi_surface(const TwoConnection& conn, const Kite& kite, double tol, int k_max) {
  if (tol <= 0) throw std::invalid_argument("tolerance must be positive");
  std::vector<std::pair<int, GroupElement>> levels;
  for (int k = 0; k <= k_max; ++k) {
    levels.emplace_back(k, rp_surface(conn, kite, k));
    if (k > 0 && group_dist(levels.back().second, levels[levels.size() - 2].second) <= tol) break;
  }
  return assemble_result(std::move(levels), tol);
}

PiecewisePath kite_boundary_path(const Kite& kite) {
  // The surface transport of a cell projects under Phi to the holonomy
  // of the boundary traversed v0 -> v2 -> v1 -> v0 (the orientation
  // opposite to the face's own), conjugated through the tail.
  auto edges = boundary_loop(kite.face.reversed());
  PiecewisePath loop = kite.tail;
  for (const auto& e : edges) loop = loop.then(e);
  return loop.then(kite.tail.reversed());
}

GroupElement surface_product(const TwoConnection& conn, const std::vector<Kite>& kites, int k,
                             int jobs) {
  auto values = parallel_map<GroupElement>(
      static_cast<int>(kites.size()), jobs,
      [&](int i) { return rp_surface(conn, kites[static_cast<std::size_t>(i)], k); });
  OrderedProduct prod(conn.cm().H());
  for (const auto& v : values) prod.append(v);
  return prod.value();
}

GroupElement tet_boundary_product(const TwoConnection& conn, const Simplex& tet, int k) {
  if (tet.dim() != 3) throw std::invalid_argument("tet_boundary_product expects a 3-simplex");
  auto faces = boundary(tet);
  OrderedProduct prod(conn.cm().H());
  for (auto& [face, sign] : faces) {
    Simplex oriented = sign > 0 ? face : face.reversed();
    // straight reference segment from the tet's v0 to the face's v0
    Eigen::VectorXd from = tet.affine_b();
    Eigen::VectorXd to = oriented.affine_b();
    Kite kite = (to - from).norm() < 1e-14
                    ? Kite::based(oriented)
                    : Kite(PiecewisePath(Simplex(tet.map(), Eigen::MatrixXd(to - from),
                                                 Eigen::VectorXd(from))),
                           oriented);
    prod.append(rp_surface(conn, kite, k));
  }
  return prod.value();
}

AlgebraElement integrate_3form(const LieValuedForm& h3, const Chain3& chain, int refine_levels) {
  if (h3.degree() != 3) throw std::invalid_argument("integrate_3form expects a 3-form");
  Chain3 work = refine_levels > 0 ? chain.refined(refine_levels) : chain;
  Vec acc = Vec::Zero(h3.spec()->dim());
  Eigen::VectorXd t(3);
  const double nodes[4][3] = {{kTetB, kTetB, kTetB},
                              {kTetA, kTetB, kTetB},
                              {kTetB, kTetA, kTetB},
                              {kTetB, kTetB, kTetA}};
  for (const auto& [tet, sign] : work.tets) {
    Vec local = Vec::Zero(h3.spec()->dim());
    for (auto& node : nodes) {
      t(0) = node[0];
      t(1) = node[1];
      t(2) = node[2];
      local += h3.eval_coords(tet.eval(t), tet.jacobian(t));
    }
    acc += (sign / 24.0) * local;  // weights 1/4 on reference volume 1/6
  }
  return AlgebraElement::from_coordinates(h3.spec(), acc);
}

StokesReport stokes3_defect(const TwoConnection& conn, const SurfacePair& pair, int max_level,
                            int jobs) {
  pair.validate();
  StokesReport rep;
  rep.surfaces_validated = true;
  AlgebraElement flux = integrate_3form(conn.three_curv(), pair.filling, 3);
  rep.flux_norm = flux.norm();
  GroupElement expflux = exp_alg(flux);
  for (int level = 1; level <= max_level; ++level) {
    GroupElement lhs = surface_product(conn, pair.sigma1, level, jobs);
    GroupElement rhs = surface_product(conn, pair.sigma0, level, jobs) * expflux;
    rep.levels.push_back(level);
    rep.defects.push_back(group_dist(lhs, rhs));
  }
  rep.defect = rep.defects.empty() ? 0.0 : rep.defects.back();
  return rep;
}

GroupElement closed_surface_mi(const TwoConnection& conn, const std::vector<Kite>& kites, int k,
                               int jobs) {
  std::map<std::string, int> edges;
  for (const auto& kite : kites)
    for (auto& [e, s] : boundary(kite.face)) {
      FaceKey ek = edge_key(e);
      if (ek.collapsed) continue;
      edges[ek.key] += s * ek.parity;
    }
  std::erase_if(edges, [](const auto& kv) { return kv.second == 0; });
  if (!edges.empty())
    throw std::invalid_argument("closed_surface_mi: surface is not closed (" +
                                std::to_string(edges.size()) + " unmatched edges)");
  return surface_product(conn, kites, k, jobs);
}

}  // namespace mint
