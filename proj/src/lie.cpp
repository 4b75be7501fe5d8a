#include "mint/lie.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <complex>

namespace mint {

using cd = std::complex<double>;

GroupSpec::GroupSpec(std::string name, int matrix_size, bool complex_field,
                     std::vector<Mat> algebra_basis, ExpMethod method,
                     double membership_tolerance, bool det_one)
    : name_(std::move(name)),
      n_(matrix_size),
      complex_(complex_field),
      basis_(std::move(algebra_basis)),
      method_(method),
      tol_(membership_tolerance),
      det_one_(det_one) {
  for (const auto& b : basis_) {
    if (b.rows() != n_ || b.cols() != n_)
      throw std::invalid_argument("algebra basis element with wrong size in spec " + name_);
    if (!b.allFinite()) throw std::invalid_argument("non-finite basis element in spec " + name_);
  }
  const int d = dim();
  if (d > 0) {
    Eigen::MatrixXd gram(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        gram(i, j) = (basis_[i].adjoint() * basis_[j]).trace().real();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
      throw std::invalid_argument("algebra basis is linearly dependent in spec " + name_);
    gram_inv_ = lu.inverse();
    // basis must close under the bracket
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        Mat br = basis_[i] * basis_[j] - basis_[j] * basis_[i];
        Mat rec = from_coordinates(coordinates_of(br));
        if ((br - rec).norm() > 1e-8)
          throw std::invalid_argument("algebra basis does not close under bracket in spec " + name_);
      }
  }
}

double GroupSpec::membership_residual(const Mat& g) const {
  double r = (g.adjoint() * g - identity()).norm();
  if (det_one_) r = std::max(r, std::abs(g.determinant() - cd(1.0, 0.0)));
  if (!complex_) r = std::max(r, g.imag().norm());
  return r;
}

Vec GroupSpec::coordinates_of(const Mat& m) const {
  const int d = dim();
  Vec rhs(d);
  for (int i = 0; i < d; ++i) rhs(i) = (basis_[i].adjoint() * m).trace().real();
  return gram_inv_ * rhs;
}

Mat GroupSpec::from_coordinates(const Vec& c) const {
  Mat m = Mat::Zero(n_, n_);
  for (int i = 0; i < dim(); ++i) m += cd(c(i), 0.0) * basis_[i];
  return m;
}

SpecPtr spec_u1() {
  static SpecPtr s = [] {
    Mat b(1, 1);
    b << cd(0, 1);
    return std::make_shared<GroupSpec>("u1", 1, true, std::vector<Mat>{b},
                                       ExpMethod::ClosedForm, 1e-10, false);
  }();
  return s;
}

SpecPtr spec_su2() {
  static SpecPtr s = [] {
    // E_k = -(i/2) sigma_k, so [E_i, E_j] = eps_ijk E_k
    Mat e1(2, 2), e2(2, 2), e3(2, 2);
    e1 << cd(0, 0), cd(0, -0.5), cd(0, -0.5), cd(0, 0);
    e2 << cd(0, 0), cd(-0.5, 0), cd(0.5, 0), cd(0, 0);
    e3 << cd(0, -0.5), cd(0, 0), cd(0, 0), cd(0, 0.5);
    return std::make_shared<GroupSpec>("su2", 2, true, std::vector<Mat>{e1, e2, e3},
                                       ExpMethod::ClosedForm, 1e-10, true);
  }();
  return s;
}

SpecPtr spec_so3() {
  static SpecPtr s = [] {
    // (L_k)_{ij} = -eps_{kij}, giving [L_i, L_j] = eps_ijk L_k
    Mat l1 = Mat::Zero(3, 3), l2 = Mat::Zero(3, 3), l3 = Mat::Zero(3, 3);
    l1(2, 1) = 1;
    l1(1, 2) = -1;
    l2(0, 2) = 1;
    l2(2, 0) = -1;
    l3(1, 0) = 1;
    l3(0, 1) = -1;
    return std::make_shared<GroupSpec>("so3", 3, false, std::vector<Mat>{l1, l2, l3},
                                       ExpMethod::ClosedForm, 1e-10, true);
  }();
  return s;
}

SpecPtr spec_trivial() {
  static SpecPtr s = std::make_shared<GroupSpec>(
      "trivial", 1, true, std::vector<Mat>{}, ExpMethod::ClosedForm, 1e-10, true);
  return s;
}

SpecPtr with_tolerance(const SpecPtr& s, double tol) {
  return std::make_shared<GroupSpec>(s->name(), s->size(), s->complex_field(), s->basis(),
                                     s->exp_method(), tol, s->det_one());
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  if (a.spec != b.spec) throw spec_mismatch("group product across different specs");
  return {a.spec, a.matrix * b.matrix};
}

namespace {

void check_finite_square(const Mat& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("non-square matrix");
  if (!x.allFinite()) throw std::invalid_argument("non-finite matrix entries");
}

Mat exp_taylor_scaled(const Mat& x) {
  // scale so the norm is at most 2^-5, Taylor, then square back
  double nrm = x.norm();
  int s = 0;
  while (nrm > 1.0 / 32.0) {
    nrm /= 2;
    ++s;
  }
  Mat y = x / std::pow(2.0, s);
  Mat acc = Mat::Identity(x.rows(), x.cols());
  Mat term = acc;
  for (int k = 1; k <= 14; ++k) {
    term = (term * y) / double(k);
    acc += term;
  }
  for (int i = 0; i < s; ++i) acc = acc * acc;
  return acc;
}

}  // namespace

Mat exp_matrix(const Mat& x) {
  check_finite_square(x);
  const auto n = x.rows();
  if (n == 1) {
    Mat g(1, 1);
    g(0, 0) = std::exp(x(0, 0));
    return g;
  }
  if (n == 2 && std::abs(x.trace()) < 1e-14) {
    // traceless 2x2: X^2 = -det(X) I, Rodrigues-type closed form
    cd det = x.determinant();
    if (std::abs(det.imag()) < 1e-14 && det.real() > -1e-14) {
      double theta = std::sqrt(std::max(det.real(), 0.0));
      double c = std::cos(theta);
      double sHalf = theta < 1e-6 ? 1.0 - theta * theta / 6.0 : std::sin(theta) / theta;
      return c * Mat::Identity(2, 2) + cd(sHalf, 0) * x;
    }
  }
  if (n == 3 && x.imag().norm() < 1e-14 && (x + x.transpose()).norm() < 1e-12) {
    // real antisymmetric: Rodrigues
    Eigen::Matrix3d w = x.real();
    double theta = std::sqrt(0.5 * (w.transpose() * w).trace());
    Eigen::Matrix3d r;
    if (theta < 1e-8) {
      r = Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
    } else {
      r = Eigen::Matrix3d::Identity() + (std::sin(theta) / theta) * w +
          ((1 - std::cos(theta)) / (theta * theta)) * (w * w);
    }
    return r.cast<cd>();
  }
  return exp_taylor_scaled(x);
}

GroupElement exp_alg(const AlgebraElement& x) {
  if (!x.spec) throw std::invalid_argument("algebra element without spec");
  check_finite_square(x.matrix);
  Mat g = exp_matrix(x.matrix);
  GroupElement out{x.spec, g};
  if (x.spec->exp_method() == ExpMethod::ScalingSquaring ||
      out.membership_residual() > x.spec->tol()) {
    out = project_to_group(g, x.spec);
  }
  return out;
}

AlgebraElement log_grp(const GroupElement& g) {
  const SpecPtr& spec = g.spec;
  const Mat& m = g.matrix;
  check_finite_square(m);
  const auto n = m.rows();
  constexpr double kBranchGap = 1e-6;

  if (n == 1) {
    double phase = std::arg(m(0, 0));
    if (M_PI - std::abs(phase) < kBranchGap)
      throw branch_cut_error("phase within " + std::to_string(kBranchGap) + " of pi");
    Mat x(1, 1);
    x(0, 0) = cd(std::log(std::abs(m(0, 0))), phase);
    return {spec, x};
  }
  if (n == 2 && std::abs(m.determinant() - cd(1, 0)) < 1e-8 &&
      (m.adjoint() * m - Mat::Identity(2, 2)).norm() < 1e-8) {
    // SU(2): U = cos(t) I + (sin(t)/t) X with X traceless, t = |X|
    double c = 0.5 * m.trace().real();
    c = std::clamp(c, -1.0, 1.0);
    double theta = std::acos(c);
    if (M_PI - theta < kBranchGap) throw branch_cut_error("rotation angle within tolerance of pi");
    Mat x = m - cd(c, 0) * Mat::Identity(2, 2);
    double s = std::sin(theta);
    double f = theta < 1e-6 ? 1.0 + theta * theta / 6.0 : theta / s;
    return {spec, cd(f, 0) * x};
  }
  if (n == 3 && m.imag().norm() < 1e-10) {
    Eigen::Matrix3d r = m.real();
    if ((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() < 1e-8 &&
        std::abs(r.determinant() - 1.0) < 1e-8) {
      double c = 0.5 * (r.trace() - 1.0);
      c = std::clamp(c, -1.0, 1.0);
      double theta = std::acos(c);
      if (M_PI - theta < kBranchGap)
        throw branch_cut_error("rotation angle within tolerance of pi");
      Eigen::Matrix3d a = 0.5 * (r - r.transpose());
      double s = std::sin(theta);
      double f = theta < 1e-6 ? 1.0 + theta * theta / 6.0 : theta / s;
      return {spec, (f * a).cast<cd>()};
    }
  }
  // generic: eigen-decomposition (the builtin groups are all normal matrices)
  Eigen::ComplexEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed in log");
  Mat v = es.eigenvectors();
  Eigen::VectorXcd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) {
    if (M_PI - std::abs(std::arg(lam(i))) < kBranchGap)
      throw branch_cut_error("eigenvalue within tolerance of the negative real axis");
    lam(i) = std::log(lam(i));
  }
  Mat x = v * lam.asDiagonal() * v.inverse();
  if ((exp_matrix(x) - m).norm() > 1e-9)
    throw std::runtime_error("matrix log reconstruction failed (non-normal input?)");
  if (!g.spec->complex_field()) x = x.real().cast<cd>();
  return {spec, x};
}

AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
  if (x.spec != y.spec) throw spec_mismatch("bracket across different specs");
  return {x.spec, x.matrix * y.matrix - y.matrix * x.matrix};
}

double group_dist(const GroupElement& g, const GroupElement& h) {
  if (g.spec != h.spec) throw spec_mismatch("distance across different specs");
  return (g.matrix - h.matrix).norm();
}

GroupElement project_to_group(const Mat& m, const SpecPtr& spec) {
  check_finite_square(m);
  if (spec->dim() == 0) return GroupElement::identity(spec);
  Mat g;
  if (m.rows() == 1) {
    double a = std::abs(m(0, 0));
    if (a < 1e-12) throw projection_error("cannot project the zero scalar to U(1)");
    g = m / a;
  } else {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    g = svd.matrixU() * svd.matrixV().adjoint();
    cd det = g.determinant();
    if (spec->det_one() && std::abs(det - cd(1, 0)) > 1e-15) {
      // push the determinant phase back to 1 (special groups)
      cd corr = std::pow(det, -1.0 / double(m.rows()));
      g *= corr;
    }
    if (!spec->complex_field()) g = g.real().cast<cd>();
  }
  if ((g - m).norm() > 0.1)
    throw projection_error("matrix is too far from the group manifold of " + spec->name());
  return {spec, g};
}

void OrderedProduct::append(const Mat& factor) {
  value_ = value_ * factor;
  if (++count_ % reprojection_period == 0)
    value_ = project_to_group(value_, spec_).matrix;
}

}  // namespace mint
