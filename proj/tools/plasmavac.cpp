// plasmavac: check a configured basic state, evolve the frozen problem, or
// scan the stability margins.  Exit codes: 0 pass, 1 invariant failure,
// 2 config error, 3 solver error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "plasmavac/cli.hpp"

using namespace plasmavac;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int refine = 1;
};

RunConfig load(const Options& o) {
  std::ifstream in(o.config, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot read '" + o.config + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config_text(ss.str());
  if (!o.out.empty()) c.out = o.out;
  if (o.seed_set) c.data.seed = o.seed;
  return c;
}

int run(const std::string& cmd, const Options& o) {
  try {
    const RunConfig c = load(o);
    ensure_output_dir(c.out);
    CommandResult r;
    if (cmd == "check") {
      r = cmd_check(c);
      std::ofstream(std::filesystem::path(c.out) / "check.json", std::ios::binary) << r.report.dump(2) << '\n';
    } else if (cmd == "evolve") {
      r = cmd_evolve(c, o.refine);
    } else {
      r = cmd_scan(c);
    }
    std::cout << r.report.dump(2) << '\n';
    return r.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const TransportCflError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    // preconditions of the frozen problem that the configuration violates
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearized plasma-vacuum interface: checks, frozen evolution and margin scans"};
  app.require_subcommand(1, 1);
  Options o;
  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--config", o.config, "JSON configuration file")->required();
    sc->add_option("--out", o.out, "output directory (overrides output.dir)");
    sc->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { o.seed = s, o.seed_set = true; }, "random data seed (overrides data.seed)");
    sc->add_option("--refine", o.refine, "grid refinement factor for the second evolve run")
        ->check(CLI::Range(1, 16));
  };
  auto* check = app.add_subcommand("check", "validate the basic state and classify the interface");
  auto* evolve = app.add_subcommand("evolve", "evolve the frozen problem and run the invariant checks");
  auto* scan = app.add_subcommand("scan", "tabulate stability margins over a parameter grid");
  for (auto* sc : {check, evolve, scan}) add_common(sc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  const std::string cmd = check->parsed() ? "check" : evolve->parsed() ? "evolve" : "scan";
  return run(cmd, o);
}
