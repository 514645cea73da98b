#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "config.hpp"
#include "runner.hpp"

namespace {

using curvrig::cli::ConfigError;
using curvrig::cli::ScenarioKind;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::vector<std::string> overrides;
};

void add_flags(CLI::App* cmd, Flags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "Scenario file");
  if (config_required) c->required();
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--seed", f.seed, "Seed for randomized starts (overrides the file)");
  cmd->add_option("--jobs", f.jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
  cmd->add_option("--set", f.overrides, "Override: key=value or id.key=value (repeatable)");
}

curvrig::cli::ConfigFile load(const Flags& f, std::optional<ScenarioKind> kind) {
  curvrig::cli::ConfigFile file;
  if (!f.config.empty()) {
    file = curvrig::cli::load_config(f.config);
    if (kind) {
      std::erase_if(file.sections, [&](const curvrig::cli::Section& s) {
        const auto it = s.entries.find("kind");
        return it == s.entries.end() || it->second.value != curvrig::cli::to_string(*kind);
      });
      if (file.sections.empty()) {
        throw ConfigError(f.config, 0, std::string("no scenarios of kind ") + curvrig::cli::to_string(*kind));
      }
    }
  } else {
    // Inline scenario assembled from --set.
    file.source = "--set";
    file.sections.push_back({curvrig::cli::to_string(*kind), 0, {}});
    file.sections.back().entries["kind"] = {curvrig::cli::to_string(*kind), 0, "--set"};
  }
  std::vector<curvrig::cli::Override> ov;
  for (const auto& text : f.overrides) ov.push_back(curvrig::cli::parse_override(text));
  curvrig::cli::apply_overrides(file, ov);
  return file;
}

int execute(const Flags& f, std::optional<ScenarioKind> kind) {
  curvrig::cli::RunConfig rc;
  try {
    rc = curvrig::cli::validate_config(load(f, kind));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  if (f.seed) rc.seed = *f.seed;

  const auto outcomes = curvrig::cli::run_all(rc, f.jobs);
  bool failed = false;
  for (const auto& o : outcomes) {
    const double wall = o.rows.empty() ? 0.0 : o.rows.front().wall_seconds;
    std::fprintf(stderr, "%-24s %-14s %8.3f s%s%s\n", o.id.c_str(),
                 o.rows.empty() ? "-" : o.rows.back().verdict.c_str(), wall, o.failed ? "  FAILED: " : "",
                 o.failed ? o.failure.c_str() : "");
    failed = failed || o.failed;
  }
  try {
    curvrig::cli::write_outputs(outcomes, f.out);
  } catch (const curvrig::cli::ReportError& e) {
    std::cerr << "report error: " << e.what() << '\n';
    return 1;
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal rigidity certificates, Yamabe solves and multiplicity scans"};
  app.require_subcommand(1);

  Flags flags;
  std::optional<ScenarioKind> kind;
  auto* run = app.add_subcommand("run", "Run every scenario in a config file");
  add_flags(run, flags, true);

  const std::pair<const char*, ScenarioKind> subs[] = {
      {"certificate", ScenarioKind::certificate}, {"bvp", ScenarioKind::bvp},
      {"scan", ScenarioKind::annulus_scan},       {"quotient", ScenarioKind::quotient},
      {"lapse", ScenarioKind::lapse_check}};
  for (const auto& [name, k] : subs) {
    auto* cmd = app.add_subcommand(name, std::string("Run ") + curvrig::cli::to_string(k) +
                                             " scenarios from --config, or one inline scenario from --set");
    add_flags(cmd, flags, false);
    cmd->callback([&kind, k = k] { kind = k; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return execute(flags, kind);
}
