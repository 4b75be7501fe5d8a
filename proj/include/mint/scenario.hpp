#ifndef MINT_SCENARIO_HPP
#define MINT_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>

#include "mint/chains.hpp"
#include "mint/crossed_module.hpp"
#include "mint/forms.hpp"

namespace mint {

// Scenario file problems (schema violations, unresolved names). The CLI
// maps these to exit code 2.
struct scenario_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunParams {
  int levels = -1;  // -1: engine default per command
  double tol = 1e-6;
  std::uint64_t seed = 1;
  bool deterministic = false;
  int jobs = 1;
  bool enforce_fake_flatness = true;
  std::string alpha, beta;                     // form names for the 2-connection
  std::string path, kite, pair, closed_surface, box;
  Eigen::VectorXd tet_base;                    // local Stokes study base point
  std::optional<double> analytic_flux;         // oracle for abelian stokes scenarios
  std::vector<double> flux_values;             // wz sweep
  Eigen::VectorXd gauge_axis;                  // coordinates in g
  std::string gauge_angle;
  Eigen::VectorXd lambda_axis;
  std::string lambda_angle;
};

/**
 * A parsed scenario: crossed module, named forms and chains, run
 * parameters. Scenario files are JSON with schema = 1; unknown keys are
 * rejected.
 */
class Scenario {
 public:
  static Scenario from_file(const std::string& path);
  static Scenario from_json_text(const std::string& text, const std::string& name);

  const std::string& name() const { return name_; }
  int ambient_dim() const { return ambient_dim_; }
  const CrossedModulePtr& cm() const { return cm_; }
  const RunParams& run() const { return run_; }
  RunParams& run() { return run_; }

  const LieValuedForm& form(const std::string& name) const;
  bool has_form(const std::string& name) const { return forms_.count(name) > 0; }

  const Simplex& simplex(const std::string& name) const;
  bool has_simplex(const std::string& name) const { return simplices_.count(name) > 0; }
  const Kite& kite(const std::string& name) const;
  bool has_kite(const std::string& name) const { return kites_.count(name) > 0; }
  const PiecewisePath& path(const std::string& name) const;
  bool has_path(const std::string& name) const { return paths_.count(name) > 0; }
  const SurfacePair& surface_pair(const std::string& name) const;
  bool has_surface_pair(const std::string& name) const { return pairs_.count(name) > 0; }
  const std::vector<Kite>& closed_surface(const std::string& name) const;
  bool has_closed_surface(const std::string& name) const { return closed_.count(name) > 0; }
  const SmoothMapPtr& box(const std::string& name) const;
  bool has_box(const std::string& name) const { return boxes_.count(name) > 0; }

  // The 2-connection named by run.alpha / run.beta.
  TwoConnection connection() const;

  std::optional<GaugeMap> gauge() const;
  std::optional<GaugeMap> lambda() const;

 private:
  std::string name_;
  int ambient_dim_ = 3;
  CrossedModulePtr cm_;
  RunParams run_;
  std::map<std::string, LieValuedForm> forms_;
  std::map<std::string, Simplex> simplices_;
  std::map<std::string, Kite> kites_;
  std::map<std::string, PiecewisePath> paths_;
  std::map<std::string, SurfacePair> pairs_;
  std::map<std::string, std::vector<Kite>> closed_;
  std::map<std::string, SmoothMapPtr> boxes_;
};

}  // namespace mint

#endif
