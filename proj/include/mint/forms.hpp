#ifndef MINT_FORMS_HPP
#define MINT_FORMS_HPP

#include <optional>
#include <string>
#include <vector>

#include "mint/crossed_module.hpp"
#include "mint/expr.hpp"
#include "mint/lie.hpp"

namespace mint {

// Default ambient chart names, d <= 4.
std::vector<std::string> ambient_chart(int dim);
// Reference simplex chart names, n <= 3.
std::vector<std::string> reference_chart(int dim);

struct FormTerm {
  Expr coeff;
  int basis_index = 0;
  std::vector<int> wedge;  // strictly increasing coordinate indices after canonicalization
};

/**
 * A Lie-algebra-valued differential form with symbolic coefficients:
 * sum of coeff(x) * E_k * dx_{i1} ^ ... ^ dx_{ip} terms. Terms are kept
 * canonical (sorted strictly-increasing wedges, like terms merged, zero
 * coefficients dropped), so a form that vanishes identically is the
 * empty term list.
 */
class LieValuedForm {
 public:
  LieValuedForm() = default;
  LieValuedForm(int degree, std::vector<std::string> chart, SpecPtr spec,
                std::vector<FormTerm> terms);

  static LieValuedForm zero(int degree, std::vector<std::string> chart, SpecPtr spec) {
    return LieValuedForm(degree, std::move(chart), std::move(spec), {});
  }

  int degree() const { return degree_; }
  int ambient_dim() const { return static_cast<int>(chart_.size()); }
  const std::vector<std::string>& chart() const { return chart_; }
  const SpecPtr& spec() const { return spec_; }
  const std::vector<FormTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Multilinear alternating evaluation: vectors are the columns of `vecs`
  // (ambient_dim x degree). Returns algebra coordinates / the matrix value.
  Vec eval_coords(const Eigen::VectorXd& x, const Eigen::MatrixXd& vecs) const;
  AlgebraElement eval(const Eigen::VectorXd& x, const Eigen::MatrixXd& vecs) const;

  LieValuedForm operator+(const LieValuedForm& o) const;
  LieValuedForm operator-(const LieValuedForm& o) const;
  LieValuedForm scaled(double c) const;
  LieValuedForm scaled(const Expr& c) const;

  // Post-compose with a linear map on the algebra given in coordinates
  // (rows index the target basis).
  LieValuedForm mapped(const Eigen::MatrixXd& coord_map, const SpecPtr& target) const;

  std::string str() const;

 private:
  int degree_ = 0;
  std::vector<std::string> chart_;
  SpecPtr spec_;
  std::vector<FormTerm> terms_;
  std::vector<CompiledExpr> compiled_;
};

LieValuedForm exterior_d(const LieValuedForm& w);

// F_alpha = d(alpha) + 1/2 [alpha, alpha] for a degree-1 form.
LieValuedForm curvature(const LieValuedForm& alpha);

// Graded wedge-bilinear combination: sum over term pairs of
// coeff_a * coeff_b (wedge product) valued in op(E_i, E_j).
LieValuedForm wedge_bilinear(const LieValuedForm& a, const LieValuedForm& b,
                             const SpecPtr& target,
                             const std::function<AlgebraElement(int, int)>& op);

// alpha |> beta for a g-valued 1-form and an h-valued form.
LieValuedForm action_wedge(const CrossedModule& cm, const LieValuedForm& alpha,
                           const LieValuedForm& beta);

// H = d(beta) + alpha |> beta.
LieValuedForm three_curvature(const CrossedModule& cm, const LieValuedForm& alpha,
                              const LieValuedForm& beta);

// Symbolic pullback along a map given by component expressions over a
// reference chart: coefficients are composed and the Jacobian minors are
// expanded symbolically.
LieValuedForm pullback(const LieValuedForm& w, const std::vector<Expr>& components,
                       const std::vector<std::string>& ref_chart);

struct FakeFlatReport {
  double max_residual = 0.0;
  int samples = 0;
  bool enforced = true;  // false when the scenario opted out
  bool pass = true;
};

// max over points and coordinate bivectors of |F_alpha + dphi(beta)|.
double fake_flat_residual(const CrossedModule& cm, const LieValuedForm& alpha,
                          const LieValuedForm& beta,
                          const std::vector<Eigen::VectorXd>& points);

/**
 * A 2-connection: g-valued 1-form alpha and h-valued 2-form beta with a
 * fake-flatness report. Construction samples the residual on a seeded
 * point set unless the caller opts out.
 */
class TwoConnection {
 public:
  TwoConnection(CrossedModulePtr cm, LieValuedForm alpha, LieValuedForm beta,
                bool enforce_fake_flatness = true, int sample_points = 64,
                std::uint64_t seed = 1, double tol = 1e-8);

  // beta := -dphi^{-1}(F_alpha) (+ optional inert-valued 2-form).
  static TwoConnection fake_flat(CrossedModulePtr cm, const LieValuedForm& alpha,
                                 const std::optional<LieValuedForm>& inert_extra = {});

  const CrossedModule& cm() const { return *cm_; }
  const CrossedModulePtr& cm_ptr() const { return cm_; }
  const LieValuedForm& alpha() const { return alpha_; }
  const LieValuedForm& beta() const { return beta_; }
  const FakeFlatReport& fake_flat_report() const { return report_; }
  LieValuedForm three_curv() const { return three_curvature(*cm_, alpha_, beta_); }

 private:
  CrossedModulePtr cm_;
  LieValuedForm alpha_;
  LieValuedForm beta_;
  FakeFlatReport report_;
};

/**
 * Gauge map x -> exp(angle(x) * axis) into G. Restricting to a fixed
 * axis keeps every transformed coefficient inside the expression
 * grammar (entries are trig polynomials in angle).
 */
struct GaugeMap {
  AlgebraElement axis;  // in the algebra of G
  Expr angle;
};

// A |-> g^-1 A g + g^-1 dg,  B |-> Psi(g^-1) B, both symbolic.
std::pair<LieValuedForm, LieValuedForm> gauge_transform(const CrossedModule& cm,
                                                        const LieValuedForm& alpha,
                                                        const LieValuedForm& beta,
                                                        const GaugeMap& g);

struct GaugeVariationResult {
  double residual = 0.0;        // |finite difference - transport term|, max over samples
  double rhs_scale = 0.0;       // max |act(F_A(u,v), B(w,s))| over samples
  double step = 0.0;
};

/**
 * Finite-difference check of the infinitesimal gauge variation of the
 * 3-curvature: (H(A_eps, B_eps) - H(A, B))/eps is compared against the
 * transport term -Lambda |> H, with the curvature-action magnitude
 * |act(F_A, B)| reported as the scale. The residual is first order in
 * the step.
 */
GaugeVariationResult gauge_variation_check(const CrossedModule& cm, const LieValuedForm& A,
                                           const LieValuedForm& B, const GaugeMap& lambda,
                                           double h,
                                           const std::vector<Eigen::VectorXd>& points);

// Deterministic sample points in [0,1]^d.
std::vector<Eigen::VectorXd> sample_points(int dim, int count, std::uint64_t seed);

}  // namespace mint

#endif
