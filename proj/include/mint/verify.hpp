#ifndef MINT_VERIFY_HPP
#define MINT_VERIFY_HPP

#include <string>
#include <vector>

#include "mint/mi.hpp"
#include "mint/scenario.hpp"

namespace mint {

/**
 * One verified identity: the residual actually measured, the threshold
 * it is held to, and a stable anchor slug naming the identity.
 */
struct CheckRecord {
  std::string name;
  std::string anchor;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

struct LevelRow {
  int k = 0;
  std::vector<double> value_coords;
  double diff = 0.0;            // NaN for the first level
  double observed_order = 0.0;  // NaN when unavailable
};

struct LevelTable {
  std::string name;
  std::vector<std::string> coord_labels;
  std::vector<LevelRow> rows;
};

struct Report {
  std::string scenario;
  std::string command;
  std::uint64_t seed = 0;
  bool deterministic = false;
  double wall_ms = 0.0;  // omitted from serialization in deterministic mode
  std::vector<CheckRecord> checks;
  std::vector<LevelTable> tables;

  bool pass() const;
  std::string to_json_text() const;
  // one CSV file per table: <dir>/<scenario>_<table>.csv
  void write_csv(const std::string& dir) const;
};

LevelTable level_table(const std::string& name, const MIResult& r);

Report run_validate(const Scenario& s);
Report run_path(const Scenario& s);
Report run_surface(const Scenario& s);
Report run_functor_suite(const Scenario& s);
Report run_stokes2(const Scenario& s);        // boundary compatibility decay
Report run_stokes_suite(const Scenario& s);   // local slope + global defect + filling independence
Report run_wz_suite(const Scenario& s);
Report run_gauge_suite(const Scenario& s);
Report run_converge(const Scenario& s);

}  // namespace mint

#endif
