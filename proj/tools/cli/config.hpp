#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvrig/domain.hpp"

namespace curvrig::cli {

/// Validation failure tied to a source location. `line` is 0 for values that
/// came from the command line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

struct Entry {
  std::string value;
  int line = 0;
  std::string source;
};

struct Section {
  std::string id;
  int line = 0;
  std::map<std::string, Entry> entries;
};

/// Flat key = value text. `[id]` opens a scenario; keys before the first
/// section are global. `#` and `;` start comments.
struct ConfigFile {
  std::string source;
  std::map<std::string, Entry> globals;
  std::vector<Section> sections;
};

ConfigFile parse_config(std::istream& in, const std::string& source);
ConfigFile load_config(const std::string& path);

enum class ScenarioKind { certificate, bvp, annulus_scan, lapse_check, quotient };

const char* to_string(ScenarioKind k);
std::optional<ScenarioKind> parse_kind(const std::string& text);

/// Geometry as written in a scenario, e.g. "cap(1.2)", "annulus(1, 2)",
/// "sphere", "cube(8)" or "mesh(path/to/file)".
struct DomainSpec {
  std::string text;
  bool is_mesh = false;
  RadialSpec radial{};
  Mesh mesh{};
};

struct ScenarioConfig {
  std::string id;
  ScenarioKind kind = ScenarioKind::certificate;
  int line = 0;

  int n = 0;
  std::optional<DomainSpec> domain;
  std::size_t nodes = 256;
  double R_bar = 0.0;
  double R_target = 0.0;
  std::string R_bar_text = "flat";

  // certificate
  std::string criterion = "eigenvalue";
  std::optional<double> Q_value;  ///< empty: closed form or estimate per Q_source
  std::string Q_source = "closed-form";
  double safety = 0.9;
  bool hypothesis_equal = false;
  std::optional<double> vol_M;
  std::optional<std::string> expect;

  double eigen_tolerance = 1e-10;
  int eigen_max_iterations = 500;
  double newton_tolerance = 1e-10;
  int newton_max_iterations = 50;

  // bvp
  bool pair = false;
  int random_starts = 0;
  std::optional<std::size_t> expect_solutions;

  // annulus-scan
  double inner = 1.0;
  std::vector<double> ratios;
  double slope_min = -2.0;
  double slope_max = 20.0;
  std::size_t slope_count = 200;
  std::optional<double> H_target;
  std::optional<std::size_t> expect_count;

  // lapse-check
  std::string lapse_field = "cos-theta";
  std::optional<double> residual_max;

  bool profiles = true;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::vector<ScenarioConfig> scenarios;
};

/// Kind-specific checks; every offending value is reported with its line.
ScenarioConfig validate_section(const Section& section, const std::string& source);
RunConfig validate_config(const ConfigFile& file);

/// "key=value" or "id.key=value" command-line overrides.
struct Override {
  std::optional<std::string> id;
  std::string key;
  std::string value;
};

Override parse_override(const std::string& text);

/// Applies overrides to matching sections (all sections for bare keys).
void apply_overrides(ConfigFile& file, const std::vector<Override>& overrides);

/// Reads "pi", "pi/2", "0.5*pi", "1.2", ...
std::optional<double> parse_real(const std::string& text);

/// "flat", "constant:<c>" or "round-sphere:<n>" as a constant curvature.
std::optional<double> parse_curvature(const std::string& text);

}  // namespace curvrig::cli
