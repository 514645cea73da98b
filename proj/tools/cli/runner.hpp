#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "curvrig/rigidity.hpp"

namespace curvrig::cli {

struct Quantity {
  std::string name;
  double value = 0.0;
};

/// One line of report.csv. `row` numbers the lines a scenario emits.
struct ReportRow {
  std::string scenario;
  std::size_t row = 0;
  std::string kind;
  std::string label;
  std::string verdict;
  std::vector<Quantity> quantities;
  double wall_seconds = 0.0;  ///< not serialized
};

/// Tabular side output, written to profiles/<name>.csv.
struct Profile {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ScenarioOutcome {
  std::string id;
  std::vector<ReportRow> rows;
  std::vector<RigidityCertificate> certificates;
  std::vector<Profile> profiles;
  bool failed = false;    ///< a solve failed or a hard check did not hold
  std::string failure;
};

/// Runs one validated scenario. Library errors are caught and reported as a
/// failed outcome carrying the message.
ScenarioOutcome run_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Runs every scenario on up to `jobs` threads; outcomes are sorted by id.
std::vector<ScenarioOutcome> run_all(const RunConfig& config, int jobs);

/// Refused report (empty, non-finite values) or unwritable output.
class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// scenario,row,kind,label,verdict,quantities with quantities as name=value
/// pairs joined by ';', reals in %.17g.
void write_report(std::ostream& out, std::span<const ReportRow> rows);
void emit_report(std::span<const ReportRow> rows, const std::filesystem::path& path);

void write_profile(std::ostream& out, const Profile& profile);

/// Writes report.csv, certificates.csv (when any) and profiles/ under `dir`.
void write_outputs(std::span<const ScenarioOutcome> outcomes, const std::filesystem::path& dir);

/// "%.17g", with "-0" printed as "0".
std::string format_real(double x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

}  // namespace curvrig::cli
