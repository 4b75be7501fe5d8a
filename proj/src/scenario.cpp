#include "mint/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mint {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed,
                  const std::set<std::string>& required = {}) {
  if (!obj.is_object()) throw scenario_error(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw scenario_error("unknown key '" + it.key() + "' in " + where);
  for (const auto& k : required)
    if (!obj.count(k)) throw scenario_error("missing key '" + k + "' in " + where);
}

Eigen::VectorXd to_vector(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw scenario_error(where + " must be an array of numbers");
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw scenario_error(where + " must contain only numbers");
    v(static_cast<int>(i)) = arr[i].get<double>();
  }
  return v;
}

}  // namespace

Scenario Scenario::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw scenario_error("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
  return from_json_text(buf.str(), name);
}

Scenario Scenario::from_json_text(const std::string& text, const std::string& fallback_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw scenario_error(std::string("scenario JSON parse error: ") + e.what());
  }

  Scenario sc;
  require_keys(doc, "scenario",
               {"schema", "name", "ambient_dim", "crossed_module", "groups", "forms", "chains",
                "run"},
               {"schema", "crossed_module"});
  if (!doc["schema"].is_number_integer() || doc["schema"].get<int>() != 1)
    throw scenario_error("unsupported schema version (expected schema = 1)");

  sc.name_ = doc.value("name", fallback_name);
  sc.ambient_dim_ = doc.value("ambient_dim", 3);
  if (sc.ambient_dim_ < 1 || sc.ambient_dim_ > 4)
    throw scenario_error("ambient_dim must be between 1 and 4");
  auto chart = ambient_chart(sc.ambient_dim_);

  std::map<std::string, double> tol_overrides;
  if (doc.count("groups")) {
    for (auto it = doc["groups"].begin(); it != doc["groups"].end(); ++it) {
      require_keys(it.value(), "groups." + it.key(), {"membership_tolerance"},
                   {"membership_tolerance"});
      tol_overrides[it.key()] = it.value()["membership_tolerance"].get<double>();
    }
  }
  try {
    sc.cm_ = catalog(doc["crossed_module"].get<std::string>(), tol_overrides);
  } catch (const std::invalid_argument& e) {
    throw scenario_error(e.what());
  }

  // ---- forms
  auto parse_terms = [&](const json& arr, const SpecPtr& spec, int degree,
                         const std::string& where) {
    std::vector<FormTerm> terms;
    for (const auto& t : arr) {
      require_keys(t, where + " term", {"coeff", "basis", "dx"}, {"coeff", "basis", "dx"});
      FormTerm ft;
      try {
        ft.coeff = parse_expr(t["coeff"].get<std::string>(), chart);
      } catch (const parse_error& e) {
        throw scenario_error(where + ": " + e.what());
      }
      ft.basis_index = t["basis"].get<int>();
      for (const auto& ix : t["dx"]) ft.wedge.push_back(ix.get<int>());
      if (static_cast<int>(ft.wedge.size()) != degree)
        throw scenario_error(where + ": dx length must equal the form degree");
      if (ft.basis_index < 0 || ft.basis_index >= spec->dim())
        throw scenario_error(where + ": basis index out of range");
      terms.push_back(std::move(ft));
    }
    return terms;
  };

  if (doc.count("forms")) {
    // two passes so generators can reference explicit forms
    for (auto it = doc["forms"].begin(); it != doc["forms"].end(); ++it) {
      const json& f = it.value();
      if (f.count("generator")) continue;
      require_keys(f, "forms." + it.key(), {"algebra", "degree", "terms"},
                   {"algebra", "degree", "terms"});
      std::string alg = f["algebra"].get<std::string>();
      if (alg != "g" && alg != "h")
        throw scenario_error("forms." + it.key() + ": algebra must be \"g\" or \"h\"");
      SpecPtr spec = alg == "g" ? sc.cm_->G() : sc.cm_->H();
      int degree = f["degree"].get<int>();
      std::vector<FormTerm> terms = parse_terms(f["terms"], spec, degree, "forms." + it.key());
      try {
        sc.forms_.emplace(it.key(), LieValuedForm(degree, chart, spec, std::move(terms)));
      } catch (const std::invalid_argument& e) {
        throw scenario_error("forms." + it.key() + ": " + e.what());
      }
    }
    // generators may reference each other; iterate to a fixpoint
    auto process_generator = [&](const std::string& key, const json& f) {
      std::string where = "forms." + key;
      std::string gen = f["generator"].get<std::string>();
      if (gen == "fake_flat") {
        require_keys(f, where, {"generator", "alpha", "inert_extra"}, {"generator", "alpha"});
        const LieValuedForm& alpha = sc.form(f["alpha"].get<std::string>());
        std::optional<LieValuedForm> extra;
        if (f.count("inert_extra")) extra = sc.form(f["inert_extra"].get<std::string>());
        try {
          TwoConnection conn = TwoConnection::fake_flat(sc.cm_, alpha, extra);
          sc.forms_.emplace(key, conn.beta());
        } catch (const std::exception& e) {
          throw scenario_error(where + ": " + e.what());
        }
      } else if (gen == "exterior_d") {
        require_keys(f, where, {"generator", "of"}, {"generator", "of"});
        sc.forms_.emplace(key, exterior_d(sc.form(f["of"].get<std::string>())));
      } else if (gen == "sum") {
        require_keys(f, where, {"generator", "of"}, {"generator", "of"});
        const json& parts = f["of"];
        if (!parts.is_array() || parts.empty())
          throw scenario_error(where + ": sum needs a non-empty array");
        LieValuedForm acc = sc.form(parts[0].get<std::string>());
        for (std::size_t i = 1; i < parts.size(); ++i)
          acc = acc + sc.form(parts[i].get<std::string>());
        sc.forms_.emplace(key, std::move(acc));
      } else {
        throw scenario_error(where + ": unknown generator '" + gen + "'");
      }
    };

    std::vector<std::string> pending;
    for (auto it = doc["forms"].begin(); it != doc["forms"].end(); ++it)
      if (it.value().count("generator")) pending.push_back(it.key());
    bool progress = true;
    while (!pending.empty() && progress) {
      progress = false;
      for (auto pit = pending.begin(); pit != pending.end();) {
        const json& f = doc["forms"][*pit];
        std::vector<std::string> deps;
        if (f.count("alpha")) deps.push_back(f["alpha"].get<std::string>());
        if (f.count("inert_extra")) deps.push_back(f["inert_extra"].get<std::string>());
        if (f.count("of")) {
          if (f["of"].is_array())
            for (const auto& d : f["of"]) deps.push_back(d.get<std::string>());
          else
            deps.push_back(f["of"].get<std::string>());
        }
        bool ready = true;
        for (const auto& d : deps) ready = ready && sc.forms_.count(d) > 0;
        if (!ready) {
          ++pit;
          continue;
        }
        process_generator(*pit, f);
        pit = pending.erase(pit);
        progress = true;
      }
    }
    if (!pending.empty())
      throw scenario_error("forms." + pending.front() +
                           ": generator references an unknown or cyclic form");
  }

  // ---- chains
  if (doc.count("chains")) {
    const json& chains = doc["chains"];
    auto parse_components = [&](const json& arr, int dim, const std::string& where) {
      auto ref = reference_chart(dim);
      std::vector<Expr> comps;
      for (const auto& c : arr) {
        try {
          comps.push_back(parse_expr(c.get<std::string>(), ref));
        } catch (const parse_error& e) {
          throw scenario_error(where + ": " + e.what());
        }
      }
      if (static_cast<int>(comps.size()) != sc.ambient_dim_)
        throw scenario_error(where + ": need one component per ambient coordinate");
      return comps;
    };

    // simple chains first, then composites that reference them
    for (auto it = chains.begin(); it != chains.end(); ++it) {
      const json& c = it.value();
      if (!c.count("type")) throw scenario_error("chains." + it.key() + " needs a type");
      std::string type = c["type"].get<std::string>();
      std::string where = "chains." + it.key();
      if (type == "simplex") {
        require_keys(c, where, {"type", "dim", "components"}, {"type", "dim", "components"});
        int dim = c["dim"].get<int>();
        Simplex s(std::make_shared<SmoothMap>(dim, sc.ambient_dim_,
                                              parse_components(c["components"], dim, where)),
                  dim);
        sc.simplices_.emplace(it.key(), std::move(s));
      } else if (type == "segment") {
        require_keys(c, where, {"type", "from", "to"}, {"type", "from", "to"});
        Eigen::VectorXd a = to_vector(c["from"], where + ".from");
        Eigen::VectorXd b = to_vector(c["to"], where + ".to");
        sc.simplices_.emplace(it.key(), Simplex::affine_from_vertices({a, b}));
      } else if (type == "flat_triangle") {
        require_keys(c, where, {"type", "vertices"}, {"type", "vertices"});
        std::vector<Eigen::VectorXd> verts;
        for (const auto& v : c["vertices"]) verts.push_back(to_vector(v, where + ".vertices"));
        if (verts.size() != 3) throw scenario_error(where + ": need exactly 3 vertices");
        sc.simplices_.emplace(it.key(), Simplex::affine_from_vertices(verts));
      } else if (type == "graph_surface") {
        require_keys(c, where, {"type", "f", "x", "y"}, {"type", "f"});
        auto ref = reference_chart(2);
        std::vector<Expr> comps;
        try {
          comps.push_back(parse_expr(c.value("x", "s"), ref));
          comps.push_back(parse_expr(c.value("y", "t"), ref));
          comps.push_back(parse_expr(c["f"].get<std::string>(), ref));
        } catch (const parse_error& e) {
          throw scenario_error(where + ": " + e.what());
        }
        while (static_cast<int>(comps.size()) < sc.ambient_dim_) comps.push_back(Expr());
        if (sc.ambient_dim_ < 3) throw scenario_error(where + ": graph_surface needs ambient_dim >= 3");
        sc.simplices_.emplace(
            it.key(), Simplex(std::make_shared<SmoothMap>(2, sc.ambient_dim_, comps), 2));
      } else if (type == "box") {
        require_keys(c, where, {"type", "components"}, {"type", "components"});
        if (sc.ambient_dim_ != 3) throw scenario_error(where + ": box needs ambient_dim = 3");
        sc.boxes_.emplace(it.key(),
                          std::make_shared<SmoothMap>(3, 3, parse_components(c["components"], 3, where)));
      }
    }
    for (auto it = chains.begin(); it != chains.end(); ++it) {
      const json& c = it.value();
      std::string type = c["type"].get<std::string>();
      std::string where = "chains." + it.key();
      if (type == "path") {
        require_keys(c, where, {"type", "segments"}, {"type", "segments"});
        std::vector<Simplex> segs;
        for (const auto& s : c["segments"]) segs.push_back(sc.simplex(s.get<std::string>()));
        try {
          sc.paths_.emplace(it.key(), PiecewisePath(std::move(segs)));
        } catch (const std::invalid_argument& e) {
          throw scenario_error(where + ": " + e.what());
        }
      } else if (type == "kite") {
        require_keys(c, where, {"type", "face", "tail"}, {"type", "face"});
        PiecewisePath tail;
        if (c.count("tail")) {
          std::vector<Simplex> segs;
          for (const auto& s : c["tail"]) segs.push_back(sc.simplex(s.get<std::string>()));
          tail = PiecewisePath(std::move(segs));
        }
        try {
          sc.kites_.emplace(it.key(), Kite(std::move(tail), sc.simplex(c["face"].get<std::string>())));
        } catch (const std::invalid_argument& e) {
          throw scenario_error(where + ": " + e.what());
        }
      } else if (type == "surface_pair") {
        require_keys(c, where, {"type", "box"}, {"type", "box"});
        sc.pairs_.emplace(it.key(), box_surface_pair(sc.box(c["box"].get<std::string>())));
      } else if (type == "closed_surface") {
        require_keys(c, where, {"type", "box"}, {"type", "box"});
        sc.closed_.emplace(it.key(), box_closed_surface(sc.box(c["box"].get<std::string>())));
      } else if (type == "simplex" || type == "segment" || type == "flat_triangle" ||
                 type == "graph_surface" || type == "box") {
        // handled in the first pass
      } else {
        throw scenario_error(where + ": unknown chain type '" + type + "'");
      }
    }
  }

  // ---- run parameters
  if (doc.count("run")) {
    const json& r = doc["run"];
    require_keys(r, "run",
                 {"levels", "tol", "seed", "deterministic", "jobs", "alpha", "beta",
                  "enforce_fake_flatness", "path", "kite", "pair", "closed_surface", "box",
                  "tet_base", "analytic_flux", "flux_values", "gauge", "lambda"});
    RunParams& rp = sc.run_;
    rp.levels = r.value("levels", -1);
    rp.tol = r.value("tol", 1e-6);
    if (rp.tol <= 0) throw scenario_error("run.tol must be positive");
    rp.seed = r.value("seed", std::uint64_t{1});
    rp.deterministic = r.value("deterministic", false);
    rp.jobs = r.value("jobs", 1);
    rp.enforce_fake_flatness = r.value("enforce_fake_flatness", true);
    rp.alpha = r.value("alpha", "");
    rp.beta = r.value("beta", "");
    rp.path = r.value("path", "");
    rp.kite = r.value("kite", "");
    rp.pair = r.value("pair", "");
    rp.closed_surface = r.value("closed_surface", "");
    rp.box = r.value("box", "");
    if (r.count("tet_base")) rp.tet_base = to_vector(r["tet_base"], "run.tet_base");
    if (r.count("analytic_flux")) rp.analytic_flux = r["analytic_flux"].get<double>();
    if (r.count("flux_values"))
      for (const auto& v : r["flux_values"]) rp.flux_values.push_back(v.get<double>());
    auto parse_gauge = [&](const json& g, const std::string& where, Eigen::VectorXd& axis,
                           std::string& angle) {
      require_keys(g, where, {"axis", "angle"}, {"axis", "angle"});
      axis = to_vector(g["axis"], where + ".axis");
      angle = g["angle"].get<std::string>();
      try {
        parse_expr(angle, chart);
      } catch (const parse_error& e) {
        throw scenario_error(where + ".angle: " + e.what());
      }
    };
    if (r.count("gauge")) parse_gauge(r["gauge"], "run.gauge", rp.gauge_axis, rp.gauge_angle);
    if (r.count("lambda")) parse_gauge(r["lambda"], "run.lambda", rp.lambda_axis, rp.lambda_angle);
  }

  // referenced names must resolve
  for (const auto& [field, kind] :
       std::vector<std::pair<std::string, std::string>>{{sc.run_.alpha, "form"},
                                                        {sc.run_.beta, "form"}})
    if (!field.empty() && !sc.has_form(field))
      throw scenario_error("run references unknown " + kind + " '" + field + "'");
  if (!sc.run_.path.empty() && !sc.has_path(sc.run_.path) && !sc.has_simplex(sc.run_.path))
    throw scenario_error("run references unknown path '" + sc.run_.path + "'");
  if (!sc.run_.kite.empty() && !sc.has_kite(sc.run_.kite))
    throw scenario_error("run references unknown kite '" + sc.run_.kite + "'");
  if (!sc.run_.pair.empty() && !sc.has_surface_pair(sc.run_.pair))
    throw scenario_error("run references unknown surface pair '" + sc.run_.pair + "'");
  if (!sc.run_.closed_surface.empty() && !sc.has_closed_surface(sc.run_.closed_surface))
    throw scenario_error("run references unknown closed surface '" + sc.run_.closed_surface + "'");

  return sc;
}

const LieValuedForm& Scenario::form(const std::string& name) const {
  auto it = forms_.find(name);
  if (it == forms_.end()) throw scenario_error("unknown form '" + name + "'");
  return it->second;
}

const Simplex& Scenario::simplex(const std::string& name) const {
  auto it = simplices_.find(name);
  if (it == simplices_.end()) throw scenario_error("unknown simplex '" + name + "'");
  return it->second;
}

const Kite& Scenario::kite(const std::string& name) const {
  auto it = kites_.find(name);
  if (it == kites_.end()) throw scenario_error("unknown kite '" + name + "'");
  return it->second;
}

const PiecewisePath& Scenario::path(const std::string& name) const {
  auto it = paths_.find(name);
  if (it == paths_.end()) throw scenario_error("unknown path '" + name + "'");
  return it->second;
}

const SurfacePair& Scenario::surface_pair(const std::string& name) const {
  auto it = pairs_.find(name);
  if (it == pairs_.end()) throw scenario_error("unknown surface pair '" + name + "'");
  return it->second;
}

const std::vector<Kite>& Scenario::closed_surface(const std::string& name) const {
  auto it = closed_.find(name);
  if (it == closed_.end()) throw scenario_error("unknown closed surface '" + name + "'");
  return it->second;
}

const SmoothMapPtr& Scenario::box(const std::string& name) const {
  auto it = boxes_.find(name);
  if (it == boxes_.end()) throw scenario_error("unknown box '" + name + "'");
  return it->second;
}

TwoConnection Scenario::connection() const {
  if (run_.alpha.empty() || run_.beta.empty())
    throw scenario_error("scenario run section must name alpha and beta forms");
  return TwoConnection(cm_, form(run_.alpha), form(run_.beta), run_.enforce_fake_flatness, 64,
                       run_.seed);
}

std::optional<GaugeMap> Scenario::gauge() const {
  if (run_.gauge_angle.empty()) return std::nullopt;
  return GaugeMap{AlgebraElement::from_coordinates(cm_->G(), run_.gauge_axis),
                  parse_expr(run_.gauge_angle, ambient_chart(ambient_dim_))};
}

std::optional<GaugeMap> Scenario::lambda() const {
  if (run_.lambda_angle.empty()) return std::nullopt;
  return GaugeMap{AlgebraElement::from_coordinates(cm_->G(), run_.lambda_axis),
                  parse_expr(run_.lambda_angle, ambient_chart(ambient_dim_))};
}

}  // namespace mint
