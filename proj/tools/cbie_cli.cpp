#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbie/app.hpp"
#include "cbie/errors.hpp"

namespace {

int report(const char* kind, const std::string& message, int code) {
  nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nystrom boundary-integral scattering solver for closed PEC surfaces"};
  app.require_subcommand(1);
  std::string path;
  auto* solve = app.add_subcommand("solve", "solve one configuration and write density, RCS and manifest");
  solve->add_option("config", path, "JSON run configuration")->required();
  auto* converge = app.add_subcommand("converge", "run the convergence sweep of a configuration");
  converge->add_option("config", path, "JSON run configuration")->required();
  auto* exp = app.add_subcommand("export", "write the configured geometry as a sampled-patch file");
  exp->add_option("config", path, "JSON run configuration")->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const cbie::RunConfig config = cbie::load_config(path);
    if (solve->parsed()) {
      const cbie::SolveOutcome out = cbie::run_solve(config);
      std::printf("unknowns %d iterations %d residual %.3e %s\n", out.n_unique, out.report.iterations,
                  out.report.residual, out.report.converged ? "converged" : "NOT converged");
      if (!out.report.converged) return report("solver", "GMRES did not reach the requested tolerance", 1);
    } else if (converge->parsed()) {
      bool all = true;
      for (const cbie::ConvergenceRow& r : cbie::run_convergence(config)) {
        std::printf("%s N=%d unknowns %d forward %.3e iterations %d solution %.3e\n",
                    cbie::to_string(r.formulation).c_str(), r.n, r.unknowns, r.forward_error, r.iterations,
                    r.solution_error);
        all = all && r.converged;
      }
      if (!all) return report("solver", "GMRES did not converge for every sweep entry", 1);
    } else {
      cbie::run_export(config);
    }
  } catch (const cbie::ConfigError& e) {
    return report("config", e.what(), 2);
  } catch (const cbie::IoError& e) {
    return report("io", e.what(), 3);
  } catch (const cbie::ParseError& e) {
    return report("geometry", e.what(), 2);
  } catch (const cbie::GeometryError& e) {
    return report("geometry", e.what(), 2);
  } catch (const cbie::ConvergenceError& e) {
    return report("solver", e.what(), 1);
  } catch (const cbie::DomainError& e) {
    return report("config", e.what(), 2);
  } catch (const std::exception& e) {
    return report("internal", e.what(), 2);
  }
  return 0;
}
