#ifndef MINT_LIE_HPP
#define MINT_LIE_HPP

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mint {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;

struct spec_mismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Principal logarithm requested too close to the branch cut; this is a
// distinct condition from a wrong value and callers may retry with a
// rescaled input.
struct branch_cut_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct projection_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExpMethod { ClosedForm, ScalingSquaring };

/**
 * A matrix Lie group in a fixed faithful representation together with an
 * ordered basis of its Lie algebra. All elements of the group and the
 * algebra reference one of these.
 */
class GroupSpec {
 public:
  GroupSpec(std::string name, int matrix_size, bool complex_field,
            std::vector<Mat> algebra_basis, ExpMethod method,
            double membership_tolerance = 1e-10, bool det_one = true);

  const std::string& name() const { return name_; }
  int size() const { return n_; }
  bool complex_field() const { return complex_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<Mat>& basis() const { return basis_; }
  const Mat& basis(int i) const { return basis_[static_cast<std::size_t>(i)]; }
  ExpMethod exp_method() const { return method_; }
  double tol() const { return tol_; }
  bool det_one() const { return det_one_; }

  // Residual of the group-membership conditions (unitarity, det).
  double membership_residual(const Mat& g) const;

  // Real coordinates of an algebra matrix against the basis (Gram solve).
  Vec coordinates_of(const Mat& m) const;
  Mat from_coordinates(const Vec& c) const;

  Mat identity() const { return Mat::Identity(n_, n_); }

 private:
  std::string name_;
  int n_;
  bool complex_;
  std::vector<Mat> basis_;
  ExpMethod method_;
  double tol_;
  bool det_one_;
  Eigen::MatrixXd gram_inv_;
};

using SpecPtr = std::shared_ptr<const GroupSpec>;

// Built-in representations: U(1) as unit complex scalars, SU(2) as 2x2
// complex with basis E_k = -(i/2) sigma_k, SO(3) as 3x3 real rotations
// with [L_i, L_j] = eps_ijk L_k, and the one-element trivial group.
SpecPtr spec_u1();
SpecPtr spec_su2();
SpecPtr spec_so3();
SpecPtr spec_trivial();

// Copy of a spec with a different membership tolerance.
SpecPtr with_tolerance(const SpecPtr& s, double tol);

struct AlgebraElement {
  SpecPtr spec;
  Mat matrix;

  AlgebraElement() = default;
  AlgebraElement(SpecPtr s, Mat m) : spec(std::move(s)), matrix(std::move(m)) {}
  static AlgebraElement zero(const SpecPtr& s) {
    return {s, Mat::Zero(s->size(), s->size())};
  }
  static AlgebraElement from_coordinates(const SpecPtr& s, const Vec& c) {
    return {s, s->from_coordinates(c)};
  }
  Vec coordinates() const { return spec->coordinates_of(matrix); }
  double norm() const { return matrix.norm(); }
};

struct GroupElement {
  SpecPtr spec;
  Mat matrix;

  GroupElement() = default;
  GroupElement(SpecPtr s, Mat m) : spec(std::move(s)), matrix(std::move(m)) {}
  static GroupElement identity(const SpecPtr& s) { return {s, s->identity()}; }
  GroupElement inverse() const { return {spec, matrix.adjoint()}; }  // unitary reps
  double membership_residual() const { return spec->membership_residual(matrix); }
};

GroupElement operator*(const GroupElement& a, const GroupElement& b);

// exp of an algebra element; closed forms for the builtin representations,
// scaling-and-squaring with a Taylor kernel otherwise.
GroupElement exp_alg(const AlgebraElement& x);
Mat exp_matrix(const Mat& x);

// Principal matrix logarithm. Throws branch_cut_error near the cut.
AlgebraElement log_grp(const GroupElement& g);

AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y);

double group_dist(const GroupElement& g, const GroupElement& h);

// Nearest group element under polar-type projection.
GroupElement project_to_group(const Mat& m, const SpecPtr& spec);

/**
 * Accumulator for long ordered products. Factors are appended on the
 * right (increasing index order); the running value is re-projected to
 * the group every 64 factors to bound membership drift.
 */
class OrderedProduct {
 public:
  explicit OrderedProduct(const SpecPtr& spec)
      : spec_(spec), value_(spec->identity()), count_(0) {}

  void append(const Mat& factor);
  void append(const GroupElement& g) { append(g.matrix); }
  GroupElement value() const { return {spec_, value_}; }

  static constexpr int reprojection_period = 64;

 private:
  SpecPtr spec_;
  Mat value_;
  long count_;
};

}  // namespace mint

#endif
