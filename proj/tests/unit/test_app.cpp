#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cbie/app.hpp"
#include "cbie/errors.hpp"

using namespace cbie;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("cbie_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

struct CliResult {
  int code;
  std::string err;
};

CliResult run_cli(const std::string& verb, const fs::path& config) {
  const fs::path err = config.parent_path() / "stderr.txt";
  const std::string cmd = std::string(CBIE_CLI_PATH) + " " + verb + " " + config.string() + " > " +
                          (config.parent_path() / "stdout.txt").string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

json small_sphere(const fs::path& out) {
  return {{"geometry", {{"kind", "sphere"}, {"diameter", 1.0}}},
          {"n", 6},
          {"threads", 1},
          {"output", {{"directory", out.string()}, {"rcs", {{"count", 19}}}}}};
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsAndFields) {
  const RunConfig c = parse_config(small_sphere("o"));
  EXPECT_EQ(c.geometry.kind, "sphere");
  EXPECT_EQ(c.n, 6);
  EXPECT_EQ(c.formulation, Formulation::efie_closed);
  EXPECT_EQ(c.gmres.restart, 200);
  ASSERT_TRUE(c.rcs.has_value());
  EXPECT_EQ(c.rcs->count, 19);
  EXPECT_EQ(c.rcs->stop_deg, 180.0);
}

TEST(Config, ErrorsNameTheField) {
  json j = small_sphere("o");
  j["geometry"]["kind"] = "blob";
  EXPECT_NE(error_of(j).find("geometry.kind"), std::string::npos);
  j = small_sphere("o");
  j["n"] = 2;
  EXPECT_NE(error_of(j).find("'n'"), std::string::npos);
  j = small_sphere("o");
  j["gmres"] = {{"tol", 2.0}};
  EXPECT_NE(error_of(j).find("gmres.tol"), std::string::npos);
  j = small_sphere("o");
  j["colour"] = "red";
  EXPECT_NE(error_of(j).find("colour"), std::string::npos);
  j = small_sphere("o");
  j["excitation"] = {{"direction", {0, 0, 1}}, {"polarization", {0, 0, 1}}};
  EXPECT_NE(error_of(j).find("excitation"), std::string::npos);
  j = small_sphere("o");
  j["formulation"] = "cfie";
  EXPECT_NE(error_of(j).find("formulation"), std::string::npos);
}

TEST(Config, EmptySweepRejected) {
  const fs::path d = scratch_dir("sweep");
  json j = small_sphere(d / "out");
  j["convergence"] = {{"sweep", json::array()}};
  EXPECT_THROW(run_convergence(parse_config(j)), ConfigError);
}

TEST(Solve, WritesFilesAndManifest) {
  const fs::path d = scratch_dir("solve");
  const RunConfig c = parse_config(small_sphere(d / "out"));
  const SolveOutcome o = run_solve(c);
  EXPECT_TRUE(o.report.converged);
  EXPECT_EQ(o.n_unique, 2 * o.groups);
  const json m = json::parse(slurp(d / "out" / "manifest.json"));
  EXPECT_EQ(m["n_unique"].get<int>(), 2 * m["groups"].get<int>());
  EXPECT_EQ(m["formulation"], "efie-closed");
  EXPECT_EQ(m["grid_points"].get<int>(), 6 * 36);
  EXPECT_TRUE(m["converged"].get<bool>());
  EXPECT_LE(m["final_residual"].get<double>(), 1e-6);
  std::ifstream rcs(d / "out" / "rcs.csv");
  std::string line;
  int rows = -1;
  while (std::getline(rcs, line)) ++rows;
  EXPECT_EQ(rows, 19);
  std::ifstream den(d / "out" / "density.csv");
  rows = -1;
  while (std::getline(den, line)) ++rows;
  EXPECT_EQ(rows, 6 * 36);
}

TEST(Solve, DeterministicWithOneThread) {
  const fs::path d = scratch_dir("determinism");
  run_solve(parse_config(small_sphere(d / "a")));
  run_solve(parse_config(small_sphere(d / "b")));
  for (const char* f : {"density.csv", "rcs.csv"}) EXPECT_EQ(slurp(d / "a" / f), slurp(d / "b" / f)) << f;
}

TEST(Solve, DensityReloadsAsReference) {
  const fs::path d = scratch_dir("reference");
  const RunConfig c = parse_config(small_sphere(d / "out"));
  run_solve(c);
  const Surface s = build_surface(c);
  const ReferenceDensity ref(s, d / "out" / "density.csv");
  EXPECT_EQ(ref.n(), 6);
  EXPECT_GT(ref.current(0, 0.1, -0.2).norm(), 0.0);
}

TEST(Export, RoundTripIsByteIdentical) {
  const fs::path d = scratch_dir("export");
  json j = {{"geometry", {{"kind", "sphere"}, {"diameter", 2.0}}},
            {"export", {{"samples", 20}, {"path", (d / "first.patch").string()}}}};
  run_export(parse_config(j));
  j["geometry"] = {{"kind", "file"}, {"path", (d / "first.patch").string()}};
  j["export"]["path"] = (d / "second.patch").string();
  run_export(parse_config(j));
  const std::string a = slurp(d / "first.patch"), b = slurp(d / "second.patch");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch_dir("cli");
  json j = small_sphere(d / "out");
  write_file(d / "ok.json", j.dump());
  EXPECT_EQ(run_cli("solve", d / "ok.json").code, 0);

  j["geometry"]["kind"] = "blob";
  write_file(d / "bad.json", j.dump());
  CliResult r = run_cli("solve", d / "bad.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("geometry.kind"), std::string::npos);

  write_file(d / "garbage.json", "{not json");
  EXPECT_EQ(run_cli("solve", d / "garbage.json").code, 2);
  EXPECT_EQ(run_cli("solve", d / "missing.json").code, 3);

  write_file(d / "plain_file", "x");
  j = small_sphere(d / "plain_file" / "sub");
  write_file(d / "unwritable.json", j.dump());
  r = run_cli("solve", d / "unwritable.json");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("\"io\""), std::string::npos);

  j = small_sphere(d / "out2");
  j["gmres"] = {{"tol", 1e-12}, {"max_iter", 2}};
  write_file(d / "stall.json", j.dump());
  EXPECT_EQ(run_cli("solve", d / "stall.json").code, 1);

  EXPECT_EQ(run_cli("frobnicate", d / "ok.json").code, 2);
}
