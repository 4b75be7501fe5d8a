#ifndef MINT_CROSSED_MODULE_HPP
#define MINT_CROSSED_MODULE_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mint/lie.hpp"

namespace mint {

/**
 * A Lie crossed module (Phi: H -> G, action of G on H) together with its
 * differential data: the algebra map on coordinates, the algebra action,
 * and the derivative Psi(g) of the group action at the identity of H.
 *
 * All maps are pure; a module value is immutable after construction and
 * safe to share between threads.
 */
class CrossedModule {
 public:
  using GroupMap = std::function<GroupElement(const GroupElement&)>;
  using ActionMap = std::function<GroupElement(const GroupElement&, const GroupElement&)>;
  using AlgebraAction = std::function<AlgebraElement(const AlgebraElement&, const AlgebraElement&)>;
  using PsiMap = std::function<Eigen::MatrixXd(const GroupElement&)>;  // on H-coordinates

  CrossedModule(std::string name, SpecPtr G, SpecPtr H, GroupMap phi, ActionMap act,
                Eigen::MatrixXd dphi_coords, AlgebraAction act_alg, PsiMap psi);

  const std::string& name() const { return name_; }
  const SpecPtr& G() const { return G_; }
  const SpecPtr& H() const { return H_; }

  GroupElement phi(const GroupElement& h) const { return phi_(h); }
  GroupElement act(const GroupElement& g, const GroupElement& h) const { return act_(g, h); }
  AlgebraElement dphi(const AlgebraElement& m) const;
  AlgebraElement act_alg(const AlgebraElement& x, const AlgebraElement& m) const {
    return act_alg_(x, m);
  }
  // Psi(g) as a linear map on h-coordinates.
  Eigen::MatrixXd psi(const GroupElement& g) const { return psi_(g); }
  AlgebraElement apply_psi(const GroupElement& g, const AlgebraElement& m) const;

  const Eigen::MatrixXd& dphi_coords() const { return dphi_; }

  // Basis of ker(dphi) in h-coordinates (columns, Frobenius-orthonormal).
  const Eigen::MatrixXd& inert_basis() const { return inert_basis_; }
  bool dphi_invertible() const;
  // Solves dphi(m) = x for m; requires dphi invertible.
  Eigen::MatrixXd dphi_inverse_coords() const;

 private:
  std::string name_;
  SpecPtr G_, H_;
  GroupMap phi_;
  ActionMap act_;
  Eigen::MatrixXd dphi_;
  AlgebraAction act_alg_;
  PsiMap psi_;
  Eigen::MatrixXd inert_basis_;
};

using CrossedModulePtr = std::shared_ptr<const CrossedModule>;

// Orthogonal projection (Frobenius inner product) onto ker(dphi).
AlgebraElement inert_component(const CrossedModule& cm, const AlgebraElement& m);

struct ValidationReport {
  struct Record {
    std::string axiom;
    double max_residual = 0.0;
    std::string worst_witness;
  };
  std::vector<Record> records;
  double max_residual = 0.0;
  bool pass = false;
  int samples = 0;
  std::uint64_t seed = 0;
};

/**
 * Randomized axiom check: equivariance, Peiffer, their differential
 * versions, and Psi against a finite difference of the group action.
 * Sampling draws algebra coordinates uniformly from [-1,1] and
 * exponentiates; deterministic for a fixed seed.
 */
ValidationReport validate(const CrossedModule& cm, int n_samples, double tol,
                          std::uint64_t seed = 1);

// Catalog: abelian_bu1, identity_su2, cover_su2_so3, torus_su2_naive.
// The last one reproduces a torus-inclusion setup whose action does not
// stay on the torus; it is shipped to make the validator demonstrate the
// failure and must not be used for transport scenarios.
// `tolerance_overrides` maps spec names (u1, su2, so3, trivial) to
// membership tolerances; the module is then built on fresh specs.
CrossedModulePtr catalog(const std::string& name,
                         const std::map<std::string, double>& tolerance_overrides = {});
std::vector<std::string> catalog_names();

// SU(2) -> SO(3) covering map helpers (shared with the catalog).
GroupElement su2_to_so3(const GroupElement& u);
GroupElement so3_lift_to_su2(const GroupElement& r);

}  // namespace mint

#endif
