// End-to-end checks of the command line front end: exit codes, report
// output, determinism. Runs the built binary through popen.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(MINT_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scenario(const std::string& name) {
  return std::string(MINT_SCENARIO_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("validate exits 0 on a sound module") {
  RunResult r = run("validate " + scenario("su2_functor.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("validate exits 1 on the naive torus module with a witness") {
  RunResult r = run("validate " + scenario("torus_naive.json"));
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("worst witness") != std::string::npos);
}

TEST_CASE("malformed scenario files exit 2") {
  auto tmp = std::filesystem::temp_directory_path() / "mint_bad_scenario.json";
  std::ofstream(tmp) << "{ this is not json";
  RunResult r = run("validate " + tmp.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("scenario error") != std::string::npos);
  std::filesystem::remove(tmp);

  auto tmp2 = std::filesystem::temp_directory_path() / "mint_bad_ref.json";
  std::ofstream(tmp2) << R"({"schema": 1, "crossed_module": "identity_su2",
                             "run": {"path": "nope"}})";
  RunResult r2 = run("path " + tmp2.string());
  CHECK(r2.exit_code == 2);
  std::filesystem::remove(tmp2);
}

TEST_CASE("path command reports the abelian phase") {
  RunResult r = run("path " + scenario("u1_path.json"));
  CHECK(r.exit_code == 0);
  // level table carries the log coordinate 0.3
  CHECK(r.output.find("0.3") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("").exit_code == 2);
  CHECK(run("frobnicate x.json").exit_code != 0);
  CHECK(run("path /nonexistent/file.json").exit_code == 2);
}

TEST_CASE("deterministic reports are byte identical across runs") {
  std::string args = "wz " + scenario("abelian_wz.json") + " --deterministic --seed 5";
  RunResult a = run(args);
  RunResult b = run(args);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("wall_ms") == std::string::npos);
}

TEST_CASE("out and csv flags write files") {
  auto dir = std::filesystem::temp_directory_path() / "mint_cli_csv";
  auto out = std::filesystem::temp_directory_path() / "mint_cli_out.json";
  std::filesystem::remove_all(dir);
  std::filesystem::remove(out);
  RunResult r = run("converge " + scenario("su2_functor.json") + " --levels 4 --out " +
                    out.string() + " --csv " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(out));
  bool found_csv = false;
  for (auto& e : std::filesystem::directory_iterator(dir))
    found_csv = found_csv || e.path().extension() == ".csv";
  CHECK(found_csv);
  std::filesystem::remove_all(dir);
  std::filesystem::remove(out);
}

TEST_CASE("gauge command runs the su2 gauge scenario") {
  RunResult r = run("gauge " + scenario("su2_gauge.json"));
  CHECK(r.exit_code == 0);
}

TEST_CASE("every shipped scenario runs and passes with its command") {
  const std::pair<const char*, const char*> jobs[] = {
      {"path", "u1_path.json"},           {"functor", "su2_functor.json"},
      {"stokes2", "su2_functor.json"},    {"converge", "su2_functor.json"},
      {"stokes3", "su2_stokes3.json"},    {"stokes3", "abelian_stokes3.json"},
      {"stokes3", "abelian_tet_slope.json"}, {"stokes3", "su2_flat.json"},
      {"wz", "abelian_wz.json"},          {"gauge", "su2_gauge.json"},
      {"validate", "su2_functor.json"},
      {"surface", "su2_functor.json"},
  };
  for (const auto& [cmd, file] : jobs) {
    RunResult r = run(std::string(cmd) + " " + scenario(file));
    INFO(cmd, " ", file, ": ", r.output);
    CHECK(r.exit_code == 0);
  }
}
