#ifndef MINT_MI_HPP
#define MINT_MI_HPP

#include <vector>

#include "mint/chains.hpp"
#include "mint/forms.hpp"

namespace mint {

/**
 * Result of a multiplicative integral: the converged value plus the
 * per-level approximants, successive differences, and the observed
 * convergence order (median of log2 of successive diff ratios).
 */
struct MIResult {
  GroupElement value;
  std::vector<std::pair<int, GroupElement>> per_level;
  std::vector<double> diffs;
  double observed_order = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  double tol = 0.0;
};

// Engine-wide defaults.
constexpr double kDefaultTol = 1e-6;
constexpr int kDefaultPathLevels = 7;
constexpr int kDefaultSurfaceLevels = 6;

// ordered product over the 2^k equal subintervals of exp of the
// 3-point Gauss-Legendre integral of the pullback; factors multiply in
// increasing (traversal) order, leftmost first
GroupElement rp_path(const LieValuedForm& alpha, const Simplex& path, int k);
GroupElement rp_path(const LieValuedForm& alpha, const PiecewisePath& path, int k);

MIResult mi_path(const LieValuedForm& alpha, const PiecewisePath& path,
                 double tol = kDefaultTol, int k_max = kDefaultPathLevels);
inline MIResult mi_path(const LieValuedForm& alpha, const Simplex& path,
                        double tol = kDefaultTol, int k_max = kDefaultPathLevels) {
  return mi_path(alpha, PiecewisePath(path), tol, k_max);
}

// H-valued Riemann product over the 4^k edgewise sub-kites; each cell
// contributes exp_H(Psi(tail holonomy) * triangle integral of beta)
GroupElement rp_surface(const TwoConnection& conn, const Kite& kite, int k);

MIResult mi_surface(const TwoConnection& conn, const Kite& kite, double tol = kDefaultTol,
                    int k_max = kDefaultSurfaceLevels);

// The based boundary loop of a kite: tail, then the face edges in the
// cyclic order that matches the surface transport, then the tail back.
PiecewisePath kite_boundary_path(const Kite& kite);

// Ordered product of kite surface products in the declared order.
// jobs > 1 computes the independent kite values concurrently; the
// combination order (and hence the result) is unchanged.
GroupElement surface_product(const TwoConnection& conn, const std::vector<Kite>& kites, int k,
                             int jobs = 1);

// Ordered product of the four face surface integrals of a 3-simplex,
// faces carrying their boundary orientations, each based at the image
// of the tet's first vertex.
GroupElement tet_boundary_product(const TwoConnection& conn, const Simplex& tet, int k);

// Signed sum of degree-2 tetrahedral quadrature of the pullback.
AlgebraElement integrate_3form(const LieValuedForm& h3, const Chain3& chain,
                               int refine_levels = 0);

struct StokesReport {
  std::vector<int> levels;
  std::vector<double> defects;     // per level
  double defect = 0.0;             // at the last level
  double flux_norm = 0.0;          // |integral of the 3-curvature|
  bool surfaces_validated = false;
};

// dist(MI(sigma1), MI(sigma0) * exp_H(integral_V H)) per surface level.
StokesReport stokes3_defect(const TwoConnection& conn, const SurfacePair& pair,
                            int max_level, int jobs = 1);

// Ordered product over a closed triangulated surface; throws if the
// signed edge multiset of the faces does not cancel.
GroupElement closed_surface_mi(const TwoConnection& conn, const std::vector<Kite>& kites, int k,
                               int jobs = 1);

}  // namespace mint

#endif
