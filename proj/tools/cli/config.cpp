#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "curvrig/errors.hpp"
#include "curvrig/mesh_io.hpp"

namespace curvrig::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

std::string strip_comment(const std::string& line) {
  const auto p = line.find_first_of("#;");
  return p == std::string::npos ? line : line.substr(0, p);
}

std::optional<double> parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (pos != t.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

// Typed access to one section with line-numbered diagnostics.
class Reader {
 public:
  Reader(const Section& s, std::string source) : s_(s), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const auto it = s_.entries.find(key);
    if (it == s_.entries.end()) throw ConfigError(source_, s_.line, "[" + s_.id + "] " + msg);
    throw ConfigError(it->second.source.empty() ? source_ : it->second.source, it->second.line,
                      "[" + s_.id + "] " + key + ": " + msg);
  }

  [[nodiscard]] bool has(const std::string& key) const {
    used_.insert(key);
    return s_.entries.count(key) != 0;
  }

  [[nodiscard]] const std::string& text(const std::string& key) const {
    used_.insert(key);
    const auto it = s_.entries.find(key);
    if (it == s_.entries.end()) fail(key, "missing required key '" + key + "'");
    return it->second.value;
  }

  [[nodiscard]] double real(const std::string& key) const {
    const auto v = parse_real(text(key));
    if (!v || !std::isfinite(*v)) fail(key, "expected a finite number, got '" + text(key) + "'");
    return *v;
  }

  [[nodiscard]] double positive(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  [[nodiscard]] long long integer(const std::string& key) const {
    const std::string& t = text(key);
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(t, &pos);
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + t + "'");
    }
    if (pos != t.size()) fail(key, "expected an integer, got '" + t + "'");
    return v;
  }

  [[nodiscard]] bool boolean(const std::string& key) const {
    const std::string& t = text(key);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    fail(key, "expected true or false, got '" + t + "'");
  }

  [[nodiscard]] double curvature(const std::string& key) const {
    const auto v = parse_curvature(text(key));
    if (!v) fail(key, "expected flat, constant:<c> or round-sphere:<n>, got '" + text(key) + "'");
    return *v;
  }

  void check_unused() const {
    for (const auto& [k, e] : s_.entries) {
      if (!used_.count(k)) fail(k, "unknown key for kind '" + text("kind") + "'");
    }
  }

 private:
  const Section& s_;
  std::string source_;
  mutable std::set<std::string> used_;
};

DomainSpec parse_domain(const Reader& r, const std::string& key) {
  DomainSpec d;
  d.text = trim(r.text(key));
  const std::string& t = d.text;
  const auto open = t.find('(');
  const std::string name = trim(t.substr(0, open));
  std::vector<std::string> args;
  if (open != std::string::npos) {
    if (t.back() != ')') r.fail(key, "unbalanced parentheses in '" + t + "'");
    args = split(t.substr(open + 1, t.size() - open - 2), ',');
  }
  const auto arg = [&](std::size_t i) {
    const auto v = parse_real(args[i]);
    if (!v || !std::isfinite(*v)) r.fail(key, "bad argument '" + args[i] + "' in '" + t + "'");
    return *v;
  };
  const auto count = [&](std::size_t i) {
    const double v = arg(i);
    if (!(v >= 1.0) || v != std::floor(v)) r.fail(key, "expected a positive integer in '" + t + "'");
    return static_cast<std::size_t>(v);
  };
  const auto expect_args = [&](std::size_t k) {
    if (args.size() != k) {
      r.fail(key, "'" + name + "' takes " + std::to_string(k) + " argument(s), got '" + t + "'");
    }
  };

  if (name == "cap") {
    expect_args(1);
    d.radial = RadialSpec::cap(arg(0));
  } else if (name == "ball") {
    expect_args(1);
    d.radial = RadialSpec::ball(arg(0));
  } else if (name == "annulus") {
    expect_args(2);
    d.radial = RadialSpec::annulus(arg(0), arg(1));
  } else if (name == "interval") {
    expect_args(2);
    d.radial = RadialSpec::interval(arg(0), arg(1));
  } else if (name == "sphere") {
    expect_args(0);
    d.radial = RadialSpec::sphere();
  } else if (name == "square") {
    expect_args(1);
    d.is_mesh = true;
    d.mesh = unit_square_mesh(count(0));
  } else if (name == "cube") {
    expect_args(1);
    d.is_mesh = true;
    d.mesh = unit_cube_mesh(count(0));
  } else if (name == "disk") {
    expect_args(2);
    d.is_mesh = true;
    d.mesh = disk_mesh(arg(0), count(1));
  } else if (name == "mesh") {
    if (open == std::string::npos) r.fail(key, "mesh needs a path: mesh(<file>)");
    d.is_mesh = true;
    try {
      d.mesh = read_mesh(std::filesystem::path(trim(t.substr(open + 1, t.size() - open - 2))));
    } catch (const InputError& e) {
      r.fail(key, e.what());
    }
  } else {
    r.fail(key, "unknown domain '" + t + "'");
  }
  return d;
}

const std::set<std::string> kGlobalKeys = {"seed"};

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

ConfigFile parse_config(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  cfg.source = source;
  std::set<std::string> ids;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
      const std::string id = trim(line.substr(1, line.size() - 2));
      if (!valid_id(id)) throw ConfigError(source, line_no, "invalid scenario id '" + id + "'");
      if (!ids.insert(id).second) throw ConfigError(source, line_no, "duplicate scenario id '" + id + "'");
      cfg.sections.push_back({id, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, line_no, "empty key");
    auto& target = cfg.sections.empty() ? cfg.globals : cfg.sections.back().entries;
    if (target.count(key)) throw ConfigError(source, line_no, "duplicate key '" + key + "'");
    target[key] = {value, line_no, source};
  }
  for (const auto& [k, e] : cfg.globals) {
    if (!kGlobalKeys.count(k)) throw ConfigError(source, e.line, "unknown global key '" + k + "'");
  }
  return cfg;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  return parse_config(in, path);
}

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::certificate:
      return "certificate";
    case ScenarioKind::bvp:
      return "bvp";
    case ScenarioKind::annulus_scan:
      return "annulus-scan";
    case ScenarioKind::lapse_check:
      return "lapse-check";
    case ScenarioKind::quotient:
      return "quotient";
  }
  return "?";
}

std::optional<ScenarioKind> parse_kind(const std::string& text) {
  for (auto k : {ScenarioKind::certificate, ScenarioKind::bvp, ScenarioKind::annulus_scan,
                 ScenarioKind::lapse_check, ScenarioKind::quotient}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

std::optional<double> parse_real(const std::string& text) {
  const std::string t = trim(text);
  if (t == "pi") return std::numbers::pi;
  if (t.rfind("pi/", 0) == 0) {
    const auto d = parse_number(t.substr(3));
    if (!d || *d == 0.0) return std::nullopt;
    return std::numbers::pi / *d;
  }
  if (t.size() > 3 && t.compare(t.size() - 3, 3, "*pi") == 0) {
    const auto f = parse_number(t.substr(0, t.size() - 3));
    if (!f) return std::nullopt;
    return *f * std::numbers::pi;
  }
  return parse_number(t);
}

std::optional<double> parse_curvature(const std::string& text) {
  const std::string t = trim(text);
  if (t == "flat") return 0.0;
  if (t.rfind("constant:", 0) == 0) {
    const auto v = parse_real(t.substr(9));
    if (!v || !std::isfinite(*v)) return std::nullopt;
    return v;
  }
  if (t.rfind("round-sphere:", 0) == 0) {
    const auto v = parse_number(t.substr(13));
    if (!v || *v < 2.0 || *v != std::floor(*v)) return std::nullopt;
    return *v * (*v - 1.0);
  }
  return std::nullopt;
}

ScenarioConfig validate_section(const Section& section, const std::string& source) {
  const Reader r(section, source);
  ScenarioConfig sc;
  sc.id = section.id;
  sc.line = section.line;
  const auto kind = parse_kind(r.text("kind"));
  if (!kind) {
    r.fail("kind", "unknown kind '" + r.text("kind") +
                       "' (certificate, bvp, annulus-scan, lapse-check, quotient)");
  }
  sc.kind = *kind;

  const auto n = r.integer("n");
  if (n < 2 || n > 64) r.fail("n", "dimension must lie in [2, 64]");
  sc.n = static_cast<int>(n);
  if (sc.kind != ScenarioKind::certificate && sc.kind != ScenarioKind::lapse_check && sc.n < 3) {
    r.fail("n", std::string(to_string(sc.kind)) + " requires n >= 3");
  }

  if (r.has("profiles")) sc.profiles = r.boolean("profiles");
  if (r.has("eigen_tolerance")) sc.eigen_tolerance = r.positive("eigen_tolerance");
  if (r.has("eigen_max_iterations")) {
    const auto v = r.integer("eigen_max_iterations");
    if (v < 1) r.fail("eigen_max_iterations", "must be >= 1");
    sc.eigen_max_iterations = static_cast<int>(v);
  }

  if (sc.kind != ScenarioKind::annulus_scan) {
    {
      sc.domain = parse_domain(r, "domain");
      if (!sc.domain->is_mesh) {
        if (r.has("nodes")) {
          const auto m = r.integer("nodes");
          if (m < 16) r.fail("nodes", "radial grids need at least 16 nodes");
          sc.nodes = static_cast<std::size_t>(m);
        }
        try {
          (void)DiscreteDomain::radial(sc.domain->radial, sc.n, sc.nodes);
        } catch (const InputError& e) {
          r.fail("domain", e.what());
        }
      } else {
        if (r.has("nodes")) r.fail("nodes", "mesh domains take their size from the mesh");
        if (sc.domain->mesh.dim != sc.n) {
          r.fail("n", "mesh dimension is " + std::to_string(sc.domain->mesh.dim));
        }
        try {
          (void)DiscreteDomain::from_mesh(sc.domain->mesh);
        } catch (const std::exception& e) {
          r.fail("domain", e.what());
        }
      }
    }
    if (r.has("R_bar")) {
      sc.R_bar_text = r.text("R_bar");
      sc.R_bar = r.curvature("R_bar");
    }
  }

  switch (sc.kind) {
    case ScenarioKind::certificate: {
      if (r.has("criterion")) sc.criterion = r.text("criterion");
      if (sc.criterion != "eigenvalue" && sc.criterion != "sobolev" && sc.criterion != "einstein-volume") {
        r.fail("criterion", "expected eigenvalue, sobolev or einstein-volume");
      }
      if (sc.criterion != "eigenvalue" && sc.n < 3) r.fail("n", sc.criterion + " requires n >= 3");
      if (sc.criterion == "sobolev") {
        if (r.has("Q")) {
          const std::string& q = r.text("Q");
          if (q == "closed-form" || q == "estimate") {
            sc.Q_source = q;
          } else {
            sc.Q_value = r.positive("Q");
            sc.Q_source = "closed-form";
          }
        }
        if (r.has("safety")) {
          sc.safety = r.real("safety");
          if (!(sc.safety > 0.0 && sc.safety <= 1.0)) r.fail("safety", "must lie in (0, 1]");
        }
        if (sc.Q_source == "estimate" && !sc.domain->is_mesh) {
          const auto g = sc.domain->radial.geometry;
          if (g == RadialGeometry::annulus || g == RadialGeometry::interval) {
            r.fail("Q", "radial annuli and intervals need an explicit Q value or a mesh domain");
          }
        }
      }
      if (sc.criterion == "einstein-volume") {
        sc.vol_M = r.positive("vol_M");
      }
      if (r.has("hypothesis")) {
        const std::string& h = r.text("hypothesis");
        if (h != "equal" && h != "at-least") r.fail("hypothesis", "expected equal or at-least");
        sc.hypothesis_equal = h == "equal";
      } else {
        sc.hypothesis_equal = sc.criterion == "eigenvalue";
      }
      if (r.has("expect")) {
        sc.expect = r.text("expect");
        if (*sc.expect != "rigid" && *sc.expect != "inconclusive") r.fail("expect", "expected rigid or inconclusive");
      }
      const bool closed = sc.domain->is_mesh ? sc.domain->mesh.boundary.empty()
                                             : sc.domain->radial.geometry == RadialGeometry::sphere;
      if (sc.criterion == "eigenvalue" && closed) {
        r.fail("domain", "the eigenvalue criterion needs a Dirichlet boundary");
      }
      break;
    }
    case ScenarioKind::bvp: {
      sc.R_target = r.has("R_target") ? r.curvature("R_target") : sc.R_bar;
      if (r.has("boundary")) {
        const std::string& b = r.text("boundary");
        if (b != "dirichlet" && b != "pair") r.fail("boundary", "expected dirichlet or pair");
        sc.pair = b == "pair";
        if (sc.pair && sc.domain->is_mesh) r.fail("boundary", "the pair condition needs a radial domain");
      }
      if (!sc.domain->is_mesh && sc.domain->radial.geometry == RadialGeometry::sphere) {
        r.fail("domain", "bvp needs a domain with boundary");
      }
      if (r.has("newton_tolerance")) sc.newton_tolerance = r.positive("newton_tolerance");
      if (r.has("newton_max_iterations")) {
        const auto v = r.integer("newton_max_iterations");
        if (v < 1) r.fail("newton_max_iterations", "must be >= 1");
        sc.newton_max_iterations = static_cast<int>(v);
      }
      if (r.has("random_starts")) {
        const auto v = r.integer("random_starts");
        if (v < 0 || v > 64) r.fail("random_starts", "must lie in [0, 64]");
        sc.random_starts = static_cast<int>(v);
      }
      if (r.has("expect_solutions")) {
        const auto v = r.integer("expect_solutions");
        if (v < 0) r.fail("expect_solutions", "must be >= 0");
        sc.expect_solutions = static_cast<std::size_t>(v);
      }
      break;
    }
    case ScenarioKind::annulus_scan: {
      sc.inner = r.positive("inner");
      for (const auto& part : split(r.text("ratios"), ',')) {
        const auto v = parse_real(part);
        if (!v || !(*v > 1.0) || !std::isfinite(*v)) r.fail("ratios", "each ratio must be a number > 1");
        if (!sc.ratios.empty() && !(*v > sc.ratios.back())) r.fail("ratios", "ratios must be strictly increasing");
        sc.ratios.push_back(*v);
      }
      sc.R_target = r.curvature("R_target");
      if (r.has("slope_min")) sc.slope_min = r.real("slope_min");
      if (r.has("slope_max")) sc.slope_max = r.real("slope_max");
      if (!(sc.slope_min < sc.slope_max)) r.fail("slope_max", "slope_max must exceed slope_min");
      if (r.has("slope_count")) {
        const auto v = r.integer("slope_count");
        if (v < 200) r.fail("slope_count", "the scan needs at least 200 slopes");
        sc.slope_count = static_cast<std::size_t>(v);
      }
      if (r.has("H_target")) sc.H_target = r.real("H_target");
      if (r.has("expect_count")) {
        const auto v = r.integer("expect_count");
        if (v < 0) r.fail("expect_count", "must be >= 0");
        if (sc.ratios.size() != 1) r.fail("expect_count", "needs a single ratio");
        sc.expect_count = static_cast<std::size_t>(v);
      }
      break;
    }
    case ScenarioKind::lapse_check: {
      if (r.has("f")) sc.lapse_field = r.text("f");
      if (sc.lapse_field != "cos-theta" && sc.lapse_field != "zero" && !parse_curvature(sc.lapse_field)) {
        r.fail("f", "expected cos-theta, zero or constant:<c>");
      }
      if (sc.lapse_field == "cos-theta" &&
          (sc.domain->is_mesh || (sc.domain->radial.geometry != RadialGeometry::cap &&
                                  sc.domain->radial.geometry != RadialGeometry::sphere))) {
        r.fail("f", "cos-theta needs a cap or sphere domain");
      }
      if (r.has("residual_max")) sc.residual_max = r.positive("residual_max");
      break;
    }
    case ScenarioKind::quotient: {
      if (!sc.domain->is_mesh) {
        const auto g = sc.domain->radial.geometry;
        if (g == RadialGeometry::annulus || g == RadialGeometry::interval) {
          r.fail("domain", "radial grids carry only radial fields; use a ball, cap, sphere or mesh");
        }
      }
      break;
    }
  }
  r.check_unused();
  return sc;
}

RunConfig validate_config(const ConfigFile& file) {
  RunConfig rc;
  if (const auto it = file.globals.find("seed"); it != file.globals.end()) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(it->second.value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != it->second.value.size() || it->second.value.find('-') != std::string::npos) {
      throw ConfigError(it->second.source, it->second.line, "seed: expected a non-negative integer");
    }
    rc.seed = v;
  }
  if (file.sections.empty()) throw ConfigError(file.source, 0, "no scenarios defined");
  for (const auto& s : file.sections) rc.scenarios.push_back(validate_section(s, file.source));
  return rc;
}

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set", 0, "expected key=value, got '" + text + "'");
  Override o;
  std::string key = trim(text.substr(0, eq));
  o.value = trim(text.substr(eq + 1));
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    o.id = key.substr(0, dot);
    key = key.substr(dot + 1);
  }
  if (key.empty()) throw ConfigError("--set", 0, "empty key in '" + text + "'");
  o.key = key;
  return o;
}

void apply_overrides(ConfigFile& file, const std::vector<Override>& overrides) {
  for (const auto& o : overrides) {
    bool matched = false;
    for (auto& s : file.sections) {
      if (o.id && *o.id != s.id) continue;
      s.entries[o.key] = {o.value, 0, "--set"};
      matched = true;
    }
    if (!matched) throw ConfigError("--set", 0, "no scenario '" + o.id.value_or("") + "' to override");
  }
}

}  // namespace curvrig::cli
