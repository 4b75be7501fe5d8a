#include "mint/forms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mint/rng.hpp"

namespace mint {

std::vector<std::string> ambient_chart(int dim) {
  static const std::vector<std::string> names = {"x", "y", "z", "w"};
  if (dim < 1 || dim > 4) throw std::invalid_argument("ambient dimension must be 1..4");
  return {names.begin(), names.begin() + dim};
}

std::vector<std::string> reference_chart(int dim) {
  static const std::vector<std::string> names = {"s", "t", "u"};
  if (dim < 0 || dim > 3) throw std::invalid_argument("reference dimension must be 0..3");
  return {names.begin(), names.begin() + dim};
}

namespace {

// sort a wedge multi-index; returns 0 when an index repeats, else the
// permutation sign
int canonical_wedge(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

bool wedge_less(const std::vector<int>& a, const std::vector<int>& b) {
  return a < b;
}

double minor_det(const Eigen::MatrixXd& vecs, const std::vector<int>& wedge) {
  const int p = static_cast<int>(wedge.size());
  switch (p) {
    case 0: return 1.0;
    case 1: return vecs(wedge[0], 0);
    case 2:
      return vecs(wedge[0], 0) * vecs(wedge[1], 1) - vecs(wedge[1], 0) * vecs(wedge[0], 1);
    case 3: {
      Eigen::Matrix3d m;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = vecs(wedge[r], c);
      return m.determinant();
    }
    default: {
      Eigen::MatrixXd m(p, p);
      for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) m(r, c) = vecs(wedge[r], c);
      return m.determinant();
    }
  }
}

}  // namespace

LieValuedForm::LieValuedForm(int degree, std::vector<std::string> chart, SpecPtr spec,
                             std::vector<FormTerm> terms)
    : degree_(degree), chart_(std::move(chart)), spec_(std::move(spec)) {
  const int d = static_cast<int>(chart_.size());
  if (degree_ < 0 || degree_ > 4) throw std::invalid_argument("form degree must be 0..4");
  if (!spec_) throw std::invalid_argument("form requires an algebra spec");

  // canonicalize wedges, merge like terms
  std::vector<FormTerm> canon;
  for (auto& t : terms) {
    if (static_cast<int>(t.wedge.size()) != degree_)
      throw std::invalid_argument("wedge length does not match form degree");
    if (t.basis_index < 0 || t.basis_index >= spec_->dim())
      throw std::invalid_argument("basis index out of range");
    for (int i : t.wedge)
      if (i < 0 || i >= d) throw std::invalid_argument("wedge index out of range");
    std::vector<int> w = t.wedge;
    int sgn = canonical_wedge(w);
    if (sgn == 0) continue;
    Expr c = sgn == 1 ? t.coeff : -t.coeff;
    if (c.is_zero()) continue;
    bool merged = false;
    for (auto& u : canon)
      if (u.basis_index == t.basis_index && u.wedge == w) {
        u.coeff = u.coeff + c;
        merged = true;
        break;
      }
    if (!merged) canon.push_back({c, t.basis_index, w});
  }
  std::erase_if(canon, [](const FormTerm& t) { return t.coeff.is_zero(); });
  std::sort(canon.begin(), canon.end(), [](const FormTerm& a, const FormTerm& b) {
    if (a.wedge != b.wedge) return wedge_less(a.wedge, b.wedge);
    return a.basis_index < b.basis_index;
  });
  terms_ = std::move(canon);
  compiled_.reserve(terms_.size());
  for (const auto& t : terms_) compiled_.emplace_back(t.coeff, chart_);
}

Vec LieValuedForm::eval_coords(const Eigen::VectorXd& x, const Eigen::MatrixXd& vecs) const {
  if (x.size() != ambient_dim()) throw std::invalid_argument("point dimension mismatch");
  if (vecs.cols() != degree_ || (degree_ > 0 && vecs.rows() != ambient_dim()))
    throw std::invalid_argument("tangent vector block has wrong shape");
  Vec out = Vec::Zero(spec_->dim());
  std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    double c = compiled_[i](xs);
    out(terms_[i].basis_index) += c * minor_det(vecs, terms_[i].wedge);
  }
  return out;
}

AlgebraElement LieValuedForm::eval(const Eigen::VectorXd& x, const Eigen::MatrixXd& vecs) const {
  return AlgebraElement::from_coordinates(spec_, eval_coords(x, vecs));
}

LieValuedForm LieValuedForm::operator+(const LieValuedForm& o) const {
  if (degree_ != o.degree_ || chart_ != o.chart_ || spec_ != o.spec_)
    throw std::invalid_argument("form addition shape mismatch");
  std::vector<FormTerm> all = terms_;
  all.insert(all.end(), o.terms_.begin(), o.terms_.end());
  return LieValuedForm(degree_, chart_, spec_, std::move(all));
}

LieValuedForm LieValuedForm::operator-(const LieValuedForm& o) const {
  return *this + o.scaled(-1.0);
}

LieValuedForm LieValuedForm::scaled(double c) const { return scaled(Expr::constant(c)); }

LieValuedForm LieValuedForm::scaled(const Expr& c) const {
  std::vector<FormTerm> out = terms_;
  for (auto& t : out) t.coeff = t.coeff * c;
  return LieValuedForm(degree_, chart_, spec_, std::move(out));
}

LieValuedForm LieValuedForm::mapped(const Eigen::MatrixXd& coord_map, const SpecPtr& target) const {
  if (coord_map.cols() != spec_->dim())
    throw std::invalid_argument("coordinate map has wrong number of columns");
  std::vector<FormTerm> out;
  for (const auto& t : terms_)
    for (int r = 0; r < coord_map.rows(); ++r) {
      double c = coord_map(r, t.basis_index);
      if (c == 0.0) continue;
      out.push_back({t.coeff * Expr::constant(c), r, t.wedge});
    }
  return LieValuedForm(degree_, chart_, target, std::move(out));
}

std::string LieValuedForm::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) os << " + ";
    os << "(" << terms_[i].coeff.str() << ")*E" << terms_[i].basis_index;
    for (int w : terms_[i].wedge) os << " d" << chart_[static_cast<std::size_t>(w)];
  }
  return os.str();
}

LieValuedForm exterior_d(const LieValuedForm& w) {
  std::vector<FormTerm> out;
  const auto& chart = w.chart();
  for (const auto& t : w.terms()) {
    for (int v = 0; v < w.ambient_dim(); ++v) {
      Expr dc = t.coeff.diff(chart[static_cast<std::size_t>(v)]);
      if (dc.is_zero()) continue;
      std::vector<int> wedge;
      wedge.reserve(t.wedge.size() + 1);
      wedge.push_back(v);
      wedge.insert(wedge.end(), t.wedge.begin(), t.wedge.end());
      out.push_back({dc, t.basis_index, std::move(wedge)});
    }
  }
  return LieValuedForm(w.degree() + 1, chart, w.spec(), std::move(out));
}

LieValuedForm wedge_bilinear(const LieValuedForm& a, const LieValuedForm& b,
                             const SpecPtr& target,
                             const std::function<AlgebraElement(int, int)>& op) {
  if (a.chart() != b.chart()) throw std::invalid_argument("wedge across different charts");
  const int da = a.spec()->dim(), db = b.spec()->dim();
  // coordinate table of op(E_i, E_j) in the target basis
  std::vector<Vec> table(static_cast<std::size_t>(da * db));
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < db; ++j)
      table[static_cast<std::size_t>(i * db + j)] =
          target->coordinates_of(op(i, j).matrix);

  std::vector<FormTerm> out;
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      const Vec& coords = table[static_cast<std::size_t>(ta.basis_index * db + tb.basis_index)];
      std::vector<int> wedge = ta.wedge;
      wedge.insert(wedge.end(), tb.wedge.begin(), tb.wedge.end());
      Expr c = ta.coeff * tb.coeff;
      for (int r = 0; r < coords.size(); ++r) {
        if (std::abs(coords(r)) < 1e-14) continue;
        out.push_back({c * Expr::constant(coords(r)), r, wedge});
      }
    }
  return LieValuedForm(a.degree() + b.degree(), a.chart(), target, std::move(out));
}

LieValuedForm curvature(const LieValuedForm& alpha) {
  if (alpha.degree() != 1) throw std::invalid_argument("curvature expects a 1-form");
  const SpecPtr spec = alpha.spec();
  LieValuedForm br = wedge_bilinear(alpha, alpha, spec, [&](int i, int j) {
    return AlgebraElement{spec, Mat(spec->basis(i) * spec->basis(j) - spec->basis(j) * spec->basis(i))};
  });
  return exterior_d(alpha) + br.scaled(0.5);
}

LieValuedForm action_wedge(const CrossedModule& cm, const LieValuedForm& alpha,
                           const LieValuedForm& beta) {
  if (alpha.spec() != cm.G() || beta.spec() != cm.H())
    throw std::invalid_argument("action_wedge: forms do not match the crossed module");
  return wedge_bilinear(alpha, beta, cm.H(), [&](int i, int j) {
    return cm.act_alg(AlgebraElement{cm.G(), cm.G()->basis(i)},
                      AlgebraElement{cm.H(), cm.H()->basis(j)});
  });
}

LieValuedForm three_curvature(const CrossedModule& cm, const LieValuedForm& alpha,
                              const LieValuedForm& beta) {
  if (beta.degree() != 2) throw std::invalid_argument("three_curvature expects a 2-form beta");
  return exterior_d(beta) + action_wedge(cm, alpha, beta);
}

LieValuedForm pullback(const LieValuedForm& w, const std::vector<Expr>& components,
                       const std::vector<std::string>& ref_chart) {
  const int d = w.ambient_dim();
  const int n = static_cast<int>(ref_chart.size());
  if (static_cast<int>(components.size()) != d)
    throw std::invalid_argument("pullback: component count does not match form dimension");

  // substitution bindings x_i -> f_i(t)
  std::vector<std::pair<std::string, Expr>> bind;
  for (int i = 0; i < d; ++i) bind.emplace_back(w.chart()[static_cast<std::size_t>(i)], components[static_cast<std::size_t>(i)]);

  // symbolic Jacobian
  std::vector<std::vector<Expr>> jac(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    jac[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
      jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] =
          components[static_cast<std::size_t>(i)].diff(ref_chart[static_cast<std::size_t>(a)]);
  }

  const int p = w.degree();
  std::vector<FormTerm> out;
  // enumerate increasing multi-indices of the reference chart
  std::vector<int> sel(static_cast<std::size_t>(p));
  std::function<void(int, int, const FormTerm&, const Expr&)> emit =
      [&](int pos, int start, const FormTerm& t, const Expr& coeff) {
        if (pos == p) {
          // det of the p x p symbolic minor jac[t.wedge[r]][sel[c]]
          Expr det;
          if (p == 0) {
            det = Expr::constant(1.0);
          } else if (p == 1) {
            det = jac[static_cast<std::size_t>(t.wedge[0])][static_cast<std::size_t>(sel[0])];
          } else if (p == 2) {
            auto& J = jac;
            det = J[static_cast<std::size_t>(t.wedge[0])][static_cast<std::size_t>(sel[0])] *
                      J[static_cast<std::size_t>(t.wedge[1])][static_cast<std::size_t>(sel[1])] -
                  J[static_cast<std::size_t>(t.wedge[1])][static_cast<std::size_t>(sel[0])] *
                      J[static_cast<std::size_t>(t.wedge[0])][static_cast<std::size_t>(sel[1])];
          } else {
            // p == 3 Leibniz expansion
            auto& J = jac;
            auto el = [&](int r, int c) -> const Expr& {
              return J[static_cast<std::size_t>(t.wedge[r])][static_cast<std::size_t>(sel[c])];
            };
            det = el(0, 0) * (el(1, 1) * el(2, 2) - el(1, 2) * el(2, 1)) -
                  el(0, 1) * (el(1, 0) * el(2, 2) - el(1, 2) * el(2, 0)) +
                  el(0, 2) * (el(1, 0) * el(2, 1) - el(1, 1) * el(2, 0));
          }
          Expr c = coeff * det;
          if (!c.is_zero()) out.push_back({c, t.basis_index, sel});
          return;
        }
        for (int a = start; a < n; ++a) {
          sel[static_cast<std::size_t>(pos)] = a;
          emit(pos + 1, a + 1, t, coeff);
        }
      };

  for (const auto& t : w.terms()) {
    Expr composed = t.coeff.subst(bind);
    emit(0, 0, t, composed);
  }
  return LieValuedForm(p, {ref_chart.begin(), ref_chart.end()}, w.spec(), std::move(out));
}

std::vector<Eigen::VectorXd> sample_points(int dim, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd p(dim);
    for (int j = 0; j < dim; ++j) p(j) = rng.uniform01();
    pts.push_back(std::move(p));
  }
  return pts;
}

double fake_flat_residual(const CrossedModule& cm, const LieValuedForm& alpha,
                          const LieValuedForm& beta,
                          const std::vector<Eigen::VectorXd>& points) {
  LieValuedForm combined = curvature(alpha) + beta.mapped(cm.dphi_coords(), cm.G());
  const int d = combined.ambient_dim();
  double worst = 0.0;
  for (const auto& x : points)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        Eigen::MatrixXd vecs = Eigen::MatrixXd::Zero(d, 2);
        vecs(i, 0) = 1;
        vecs(j, 1) = 1;
        worst = std::max(worst, combined.eval(x, vecs).matrix.norm());
      }
  return worst;
}

TwoConnection::TwoConnection(CrossedModulePtr cm, LieValuedForm alpha, LieValuedForm beta,
                             bool enforce_fake_flatness, int n_points, std::uint64_t seed,
                             double tol)
    : cm_(std::move(cm)), alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (alpha_.degree() != 1 || beta_.degree() != 2)
    throw std::invalid_argument("2-connection needs a 1-form and a 2-form");
  if (alpha_.spec() != cm_->G() || beta_.spec() != cm_->H())
    throw std::invalid_argument("2-connection forms do not match the crossed module");
  if (alpha_.chart() != beta_.chart())
    throw std::invalid_argument("2-connection forms live on different charts");
  report_.enforced = enforce_fake_flatness;
  report_.samples = n_points;
  report_.max_residual =
      fake_flat_residual(*cm_, alpha_, beta_, sample_points(alpha_.ambient_dim(), n_points, seed));
  report_.pass = !enforce_fake_flatness || report_.max_residual <= tol;
  if (enforce_fake_flatness && !report_.pass)
    throw std::invalid_argument("fake-flatness residual " + std::to_string(report_.max_residual) +
                                " exceeds tolerance; pass enforce_fake_flatness=false to allow");
}

TwoConnection TwoConnection::fake_flat(CrossedModulePtr cm, const LieValuedForm& alpha,
                                       const std::optional<LieValuedForm>& inert_extra) {
  LieValuedForm f = curvature(alpha);
  // solve dphi(beta) = -F_alpha in coordinates; the pseudo-inverse keeps
  // the construction usable when dphi is not square (the constructor
  // below still verifies the residual)
  const Eigen::MatrixXd& d = cm->dphi_coords();
  Eigen::MatrixXd pinv =
      d.size() ? Eigen::MatrixXd(d.completeOrthogonalDecomposition().pseudoInverse())
               : Eigen::MatrixXd::Zero(cm->H()->dim(), cm->G()->dim());
  LieValuedForm beta = f.mapped(-pinv, cm->H());
  if (inert_extra) {
    // keep only the inert part so fake-flatness survives
    const auto& K = cm->inert_basis();
    Eigen::MatrixXd proj = K.cols() ? Eigen::MatrixXd(K * K.transpose())
                                    : Eigen::MatrixXd::Zero(cm->H()->dim(), cm->H()->dim());
    beta = beta + inert_extra->mapped(proj, cm->H());
  }
  return TwoConnection(std::move(cm), alpha, std::move(beta));
}

// ---------------------------------------------------------------------------
// Gauge transformation
// ---------------------------------------------------------------------------

namespace {

// Symbolic entries of exp(-angle(x) * A) for a matrix A with A^3 = -theta^2 A.
std::vector<std::vector<Expr>> rotation_entries(const Eigen::MatrixXd& A, const Expr& angle) {
  const int n = static_cast<int>(A.rows());
  std::vector<std::vector<Expr>> R(static_cast<std::size_t>(n),
                                   std::vector<Expr>(static_cast<std::size_t>(n)));
  double theta2 = 0.5 * (A * A.transpose()).trace();
  double theta = std::sqrt(std::max(theta2, 0.0));
  if (theta < 1e-14) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R[i][j] = Expr::constant(i == j ? 1.0 : 0.0);
    return R;
  }
  Eigen::MatrixXd A3 = A * A * A;
  if ((A3 + theta2 * A).norm() > 1e-9 * std::max(1.0, A3.norm()))
    throw std::invalid_argument("gauge axis action is not a rotation generator; "
                                "only rank-3 rotation actions are supported symbolically");
  Eigen::MatrixXd A2 = A * A;
  Expr arg = Expr::constant(theta) * angle;
  Expr s = Expr::sin(arg), c = Expr::cos(arg);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // exp(-lambda A) = I - sin(theta l)/theta A + (1 - cos(theta l))/theta^2 A^2
      double id = i == j ? 1.0 : 0.0;
      R[i][j] = Expr::constant(id + A2(i, j) / theta2) -
                Expr::constant(A(i, j) / theta) * s -
                Expr::constant(A2(i, j) / theta2) * c;
    }
  return R;
}

LieValuedForm apply_symbolic_map(const std::vector<std::vector<Expr>>& R,
                                 const LieValuedForm& w) {
  std::vector<FormTerm> out;
  const int n = static_cast<int>(R.size());
  for (const auto& t : w.terms())
    for (int r = 0; r < n; ++r) {
      const Expr& entry = R[static_cast<std::size_t>(r)][static_cast<std::size_t>(t.basis_index)];
      if (entry.is_zero()) continue;
      out.push_back({t.coeff * entry, r, t.wedge});
    }
  return LieValuedForm(w.degree(), w.chart(), w.spec(), std::move(out));
}

}  // namespace

std::pair<LieValuedForm, LieValuedForm> gauge_transform(const CrossedModule& cm,
                                                        const LieValuedForm& alpha,
                                                        const LieValuedForm& beta,
                                                        const GaugeMap& g) {
  if (g.axis.spec != cm.G()) throw std::invalid_argument("gauge axis must lie in the algebra of G");
  const SpecPtr& G = cm.G();
  const SpecPtr& H = cm.H();
  const int dg = G->dim(), dh = H->dim();

  // ad(axis) on G-coordinates and the action of axis on H-coordinates
  Eigen::MatrixXd adA(dg, dg), actA(dh, dh);
  for (int j = 0; j < dg; ++j)
    adA.col(j) = G->coordinates_of(bracket(g.axis, AlgebraElement{G, G->basis(j)}).matrix);
  for (int j = 0; j < dh; ++j)
    actA.col(j) =
        H->coordinates_of(cm.act_alg(g.axis, AlgebraElement{H, H->basis(j)}).matrix);

  auto Rg = rotation_entries(adA, g.angle);   // Ad(g^-1) symbolically
  auto Rh = rotation_entries(actA, g.angle);  // Psi(g^-1) symbolically

  LieValuedForm alpha_conj = apply_symbolic_map(Rg, alpha);

  // pure-gauge part g^-1 dg = d(angle) (x) axis
  Vec axis_coords = g.axis.coordinates();
  std::vector<FormTerm> pure;
  for (int a = 0; a < alpha.ambient_dim(); ++a) {
    Expr da = g.angle.diff(alpha.chart()[static_cast<std::size_t>(a)]);
    if (da.is_zero()) continue;
    for (int r = 0; r < dg; ++r) {
      if (std::abs(axis_coords(r)) < 1e-15) continue;
      pure.push_back({da * Expr::constant(axis_coords(r)), r, {a}});
    }
  }
  LieValuedForm alpha_new =
      alpha_conj + LieValuedForm(1, alpha.chart(), G, std::move(pure));
  LieValuedForm beta_new = apply_symbolic_map(Rh, beta);
  return {std::move(alpha_new), std::move(beta_new)};
}

GaugeVariationResult gauge_variation_check(const CrossedModule& cm, const LieValuedForm& A,
                                           const LieValuedForm& B, const GaugeMap& lambda,
                                           double h,
                                           const std::vector<Eigen::VectorXd>& points) {
  if (h <= 0) throw std::invalid_argument("gauge variation step must be positive");
  const int d = A.ambient_dim();
  if (d < 3) throw std::invalid_argument("gauge variation check needs ambient dimension >= 3");

  LieValuedForm H0 = three_curvature(cm, A, B);
  GaugeMap eps{lambda.axis, lambda.angle * Expr::constant(h)};
  auto [Ah, Bh] = gauge_transform(cm, A, B, eps);
  LieValuedForm Hh = three_curvature(cm, Ah, Bh);
  LieValuedForm FA = curvature(A);

  GaugeVariationResult res;
  res.step = h;
  std::vector<std::string> chart = A.chart();
  std::vector<std::pair<std::string, double>> bind(static_cast<std::size_t>(d));

  for (const auto& x : points) {
    for (std::size_t i = 0; i < chart.size(); ++i) bind[i] = {chart[i], x(static_cast<int>(i))};
    double lam = lambda.angle.eval(bind);
    AlgebraElement lam_alg{cm.G(), Mat(lam * lambda.axis.matrix)};

    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
          Eigen::MatrixXd vecs = Eigen::MatrixXd::Zero(d, 3);
          vecs(i, 0) = vecs(j, 1) = vecs(k, 2) = 1;
          Mat fd = (Hh.eval(x, vecs).matrix - H0.eval(x, vecs).matrix) / h;
          Mat transport = -cm.act_alg(lam_alg, H0.eval(x, vecs)).matrix;
          res.residual = std::max(res.residual, (fd - transport).norm());
        }

    // scale: pointwise action of curvature bivectors on B bivectors
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = k + 1; l < d; ++l) {
            Eigen::MatrixXd u = Eigen::MatrixXd::Zero(d, 2), v = Eigen::MatrixXd::Zero(d, 2);
            u(i, 0) = u(j, 1) = 1;
            v(k, 0) = v(l, 1) = 1;
            double s = cm.act_alg(FA.eval(x, u), B.eval(x, v)).matrix.norm();
            res.rhs_scale = std::max(res.rhs_scale, s);
          }
  }
  return res;
}

}  // namespace mint
