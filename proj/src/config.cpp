#include "hyperfem/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace hyperfem {

namespace {

std::string trim(const std::string& s) {
  size_t begin = 0;
  size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& message) {
  throw ParseError(name + ":" + std::to_string(line) + ": " + message);
}

struct Entry {
  std::string key;
  std::string value;
  int line;
};

using Section = std::vector<Entry>;

double to_real(const std::string& name, const Entry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(value)) {
    fail(name, e.line, "key '" + e.key + "' expects a finite real, got '" + e.value + "'");
  }
  return value;
}

int to_int(const std::string& name, const Entry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  const long value = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    fail(name, e.line, "key '" + e.key + "' expects an integer, got '" + e.value + "'");
  }
  return static_cast<int>(value);
}

bool to_bool(const std::string& name, const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail(name, e.line, "key '" + e.key + "' expects true or false, got '" + e.value + "'");
}

std::vector<double> to_reals(const std::string& name, const Entry& e) {
  std::istringstream in(e.value);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(value)) {
      fail(name, e.line, "key '" + e.key + "' expects reals, got '" + token + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) fail(name, e.line, "key '" + e.key + "' expects at least one real");
  return out;
}

Vec3 to_vec3(const std::string& name, const Entry& e) {
  const std::vector<double> values = to_reals(name, e);
  if (values.size() != 3) {
    fail(name, e.line, "key '" + e.key + "' expects exactly three reals");
  }
  return Vec3(values[0], values[1], values[2]);
}

FormulationKind formulation_from(const std::string& name, const Entry& e) {
  if (e.value == "perturbed") return FormulationKind::perturbed_lagrangian;
  if (e.value == "galerkin") return FormulationKind::weak_galerkin;
  if (e.value == "proposed") return FormulationKind::proposed_consistent;
  if (e.value == "three_field") return FormulationKind::three_field;
  if (e.value == "truly") return FormulationKind::truly_incompressible;
  fail(name, e.line,
       "formulation must be one of perturbed, galerkin, proposed, three_field, "
       "truly; got '" + e.value + "'");
}

const char* formulation_word(FormulationKind kind) {
  switch (kind) {
    case FormulationKind::perturbed_lagrangian: return "perturbed";
    case FormulationKind::weak_galerkin: return "galerkin";
    case FormulationKind::proposed_consistent: return "proposed";
    case FormulationKind::three_field: return "three_field";
    case FormulationKind::truly_incompressible: return "truly";
  }
  return "?";
}

ElementChoice element_from(const std::string& name, const Entry& e) {
  if (e.value == "hex8_p0") return ElementChoice::hex8_p0;
  if (e.value == "tet10_p1") return ElementChoice::tet10_p1;
  if (e.value == "tet10_p1_bernstein") return ElementChoice::tet10_p1_bernstein;
  fail(name, e.line,
       "element must be one of hex8_p0, tet10_p1, tet10_p1_bernstein; got '" +
           e.value + "'");
}

SystemChoice system_from(const std::string& name, const Entry& e) {
  if (e.value == "auto") return SystemChoice::automatic;
  if (e.value == "condensed") return SystemChoice::condensed;
  if (e.value == "saddle") return SystemChoice::saddle;
  fail(name, e.line,
       "linear_system must be one of auto, condensed, saddle; got '" + e.value + "'");
}

DevKind deviatoric_from(const std::string& name, const Entry& e) {
  if (e.value == "neo_hookean") return DevKind::neo_hookean;
  if (e.value == "gent") return DevKind::gent;
  fail(name, e.line,
       "deviatoric must be neo_hookean or gent; got '" + e.value + "'");
}

VolId volumetric_from(const std::string& name, const Entry& e) {
  if (e.value.size() == 2 && e.value[0] == 'V' && e.value[1] >= '1' &&
      e.value[1] <= '8') {
    return static_cast<VolId>(e.value[1] - '0');
  }
  fail(name, e.line, "volumetric must be V1 .. V8; got '" + e.value + "'");
}

std::string volumetric_word(VolId id) {
  return "V" + std::to_string(static_cast<int>(id));
}

int component_from(const std::string& name, const Entry& e, const std::string& suffix) {
  if (suffix == "ux") return 0;
  if (suffix == "uy") return 1;
  if (suffix == "uz") return 2;
  fail(name, e.line,
       "dirichlet keys end in .ux, .uy or .uz; got '" + e.key + "'");
}

const char* component_word(int component) {
  switch (component) {
    case 0: return "ux";
    case 1: return "uy";
    case 2: return "uz";
  }
  return "?";
}

void reject_duplicates(const std::string& name, const Section& section) {
  std::map<std::string, int> seen;
  for (const Entry& e : section) {
    const auto [it, fresh] = seen.emplace(e.key, e.line);
    if (!fresh) {
      fail(name, e.line,
           "duplicate key '" + e.key + "' (first at line " +
               std::to_string(it->second) + ")");
    }
  }
}

}  // namespace

const char* to_string(ElementChoice choice) {
  switch (choice) {
    case ElementChoice::hex8_p0: return "hex8_p0";
    case ElementChoice::tet10_p1: return "tet10_p1";
    case ElementChoice::tet10_p1_bernstein: return "tet10_p1_bernstein";
  }
  return "?";
}

const char* to_string(SystemChoice choice) {
  switch (choice) {
    case SystemChoice::automatic: return "auto";
    case SystemChoice::condensed: return "condensed";
    case SystemChoice::saddle: return "saddle";
  }
  return "?";
}

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  static const std::set<std::string> known_sections = {
      "run", "material", "mesh", "dirichlet", "neumann",
      "steps", "solver", "probes", "output"};

  std::map<std::string, Section> sections;
  {
    std::istringstream in(text);
    std::string raw;
    std::string current;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string stripped = trim(raw);
      if (stripped.empty()) continue;
      if (stripped.front() == '[') {
        if (stripped.back() != ']') fail(name, line, "unterminated section header");
        current = trim(stripped.substr(1, stripped.size() - 2));
        if (!known_sections.count(current)) {
          fail(name, line, "unknown section [" + current + "]");
        }
        sections[current];
        continue;
      }
      const size_t eq = stripped.find('=');
      if (eq == std::string::npos) fail(name, line, "expected 'key = value'");
      if (current.empty()) fail(name, line, "key before any [section] header");
      Entry entry;
      entry.key = trim(stripped.substr(0, eq));
      entry.value = trim(stripped.substr(eq + 1));
      entry.line = line;
      if (entry.key.empty()) fail(name, line, "empty key");
      sections[current].push_back(entry);
    }
  }

  RunConfig config;

  for (const char* fixed : {"run", "material", "mesh", "steps", "solver", "output"}) {
    const auto it = sections.find(fixed);
    if (it != sections.end()) reject_duplicates(name, it->second);
  }

  if (const auto it = sections.find("run"); it != sections.end()) {
    for (const Entry& e : it->second) {
      if (e.key == "formulation") config.formulation = formulation_from(name, e);
      else if (e.key == "element") config.element = element_from(name, e);
      else if (e.key == "linear_system") config.linear_system = system_from(name, e);
      else if (e.key == "output_prefix") config.output_prefix = e.value;
      else fail(name, e.line, "unknown key '" + e.key + "' in [run]");
    }
  }

  if (const auto it = sections.find("material"); it != sections.end()) {
    for (const Entry& e : it->second) {
      if (e.key == "E") config.E = to_real(name, e);
      else if (e.key == "nu") config.nu = to_real(name, e);
      else if (e.key == "deviatoric") config.deviatoric = deviatoric_from(name, e);
      else if (e.key == "Im") config.Im = to_real(name, e);
      else if (e.key == "volumetric") config.volumetric = volumetric_from(name, e);
      else fail(name, e.line, "unknown key '" + e.key + "' in [material]");
    }
  }

  if (const auto it = sections.find("mesh"); it != sections.end()) {
    const Section& entries = it->second;
    for (const Entry& e : entries) {
      if (e.key == "source") {
        if (e.value == "box") config.mesh_from_file = false;
        else if (e.value == "file") config.mesh_from_file = true;
        else fail(name, e.line, "source must be box or file; got '" + e.value + "'");
      }
    }
    for (const Entry& e : entries) {
      if (e.key == "source") continue;
      if (config.mesh_from_file) {
        if (e.key == "path") config.mesh_path = e.value;
        else fail(name, e.line,
                  "key '" + e.key + "' is not valid with source = file");
      } else {
        if (e.key == "nx") config.box.nx = to_int(name, e);
        else if (e.key == "ny") config.box.ny = to_int(name, e);
        else if (e.key == "nz") config.box.nz = to_int(name, e);
        else if (e.key == "lx") config.box.lx = to_real(name, e);
        else if (e.key == "ly") config.box.ly = to_real(name, e);
        else if (e.key == "lz") config.box.lz = to_real(name, e);
        else if (e.key == "patch_x") config.box.patch_x = to_real(name, e);
        else if (e.key == "patch_y") config.box.patch_y = to_real(name, e);
        else fail(name, e.line,
                  "key '" + e.key + "' is not valid with source = box");
      }
    }
  }

  if (const auto it = sections.find("dirichlet"); it != sections.end()) {
    for (const Entry& e : it->second) {
      const size_t dot = e.key.rfind('.');
      if (dot == std::string::npos || dot == 0) {
        fail(name, e.line,
             "dirichlet keys look like '<node set>.<ux|uy|uz>'; got '" + e.key + "'");
      }
      DirichletSpec spec;
      spec.node_set = e.key.substr(0, dot);
      spec.component = component_from(name, e, e.key.substr(dot + 1));
      spec.value = to_real(name, e);
      config.dirichlet.push_back(spec);
    }
  }

  if (const auto it = sections.find("neumann"); it != sections.end()) {
    for (const Entry& e : it->second) {
      NeumannSpec spec;
      spec.face_set = e.key;
      spec.traction = to_vec3(name, e);
      config.neumann.push_back(spec);
    }
  }

  if (const auto it = sections.find("steps"); it != sections.end()) {
    for (const Entry& e : it->second) {
      if (e.key == "count") config.n_steps = to_int(name, e);
      else if (e.key == "factors") config.factors = to_reals(name, e);
      else fail(name, e.line, "unknown key '" + e.key + "' in [steps]");
    }
  }

  if (const auto it = sections.find("solver"); it != sections.end()) {
    for (const Entry& e : it->second) {
      if (e.key == "tol_abs") config.solver.tol_abs = to_real(name, e);
      else if (e.key == "tol_rel") config.solver.tol_rel = to_real(name, e);
      else if (e.key == "max_iterations") config.solver.max_iterations = to_int(name, e);
      else fail(name, e.line, "unknown key '" + e.key + "' in [solver]");
    }
  }

  if (const auto it = sections.find("probes"); it != sections.end()) {
    for (const Entry& e : it->second) {
      ProbeSpec probe;
      probe.name = e.key;
      probe.point = to_vec3(name, e);
      config.probes.push_back(probe);
    }
  }

  if (const auto it = sections.find("output"); it != sections.end()) {
    for (const Entry& e : it->second) {
      if (e.key == "vtk") config.write_vtk = to_bool(name, e);
      else fail(name, e.line, "unknown key '" + e.key + "' in [output]");
    }
  }

  // Semantic checks and the incompressible-limit rewrite.
  if (!(config.E > 0.0)) throw ConfigError("config: E must be positive");
  if (!(config.nu >= 0.0 && config.nu <= 0.5)) {
    throw ConfigError("config: nu must lie in [0, 0.5]");
  }
  if (config.deviatoric == DevKind::gent && !(config.Im > 0.0)) {
    throw ConfigError("config: gent requires Im > 0");
  }
  if (config.mesh_from_file && config.mesh_path.empty()) {
    throw ConfigError("config: source = file requires a mesh path");
  }
  if (!config.mesh_from_file) {
    if (config.box.nx < 1 || config.box.ny < 1 || config.box.nz < 1) {
      throw ConfigError("config: box subdivisions must be at least 1");
    }
    if (!(config.box.lx > 0.0 && config.box.ly > 0.0 && config.box.lz > 0.0)) {
      throw ConfigError("config: box extents must be positive");
    }
  }
  if (config.n_steps < 1) throw ConfigError("config: step count must be at least 1");
  if (!config.factors.empty() &&
      config.factors.size() != static_cast<size_t>(config.n_steps)) {
    throw ConfigError("config: " + std::to_string(config.factors.size()) +
                      " load factors given for " + std::to_string(config.n_steps) +
                      " steps");
  }
  if (config.solver.max_iterations < 1) {
    throw ConfigError("config: max_iterations must be at least 1");
  }
  if (!(config.solver.tol_abs >= 0.0) || !(config.solver.tol_rel >= 0.0)) {
    throw ConfigError("config: solver tolerances must be non-negative");
  }

  const bool tet = config.element != ElementChoice::hex8_p0;
  config.box.tetrahedral = tet;
  config.box.quadratic = tet;

  if (config.nu >= 0.5) {
    if (config.formulation == FormulationKind::three_field) {
      throw ConfigError(
          "config: the three-field formulation cannot run at nu = 0.5; "
          "use a two-field formulation (it switches to truly)");
    }
    config.formulation = FormulationKind::truly_incompressible;
  }

  return config;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  RunConfig config = parse_config_text(buffer.str(), path);
  if (config.output_prefix.empty()) {
    const size_t slash = path.find_last_of('/');
    const size_t dot = path.find_last_of('.');
    config.output_prefix =
        (dot != std::string::npos && (slash == std::string::npos || dot > slash))
            ? path.substr(0, dot)
            : path;
  }
  return config;
}

std::string render_config(const RunConfig& config) {
  std::ostringstream out;
  out << "[run]\n";
  out << "formulation = " << formulation_word(config.formulation) << "\n";
  out << "element = " << to_string(config.element) << "\n";
  out << "linear_system = " << to_string(config.linear_system) << "\n";
  if (!config.output_prefix.empty()) {
    out << "output_prefix = " << config.output_prefix << "\n";
  }

  out << "\n[material]\n";
  out << "E = " << format_real(config.E) << "\n";
  out << "nu = " << format_real(config.nu) << "\n";
  out << "deviatoric = " << (config.deviatoric == DevKind::gent ? "gent" : "neo_hookean")
      << "\n";
  if (config.deviatoric == DevKind::gent) {
    out << "Im = " << format_real(config.Im) << "\n";
  }
  out << "volumetric = " << volumetric_word(config.volumetric) << "\n";

  out << "\n[mesh]\n";
  if (config.mesh_from_file) {
    out << "source = file\n";
    out << "path = " << config.mesh_path << "\n";
  } else {
    out << "source = box\n";
    out << "nx = " << config.box.nx << "\n";
    out << "ny = " << config.box.ny << "\n";
    out << "nz = " << config.box.nz << "\n";
    out << "lx = " << format_real(config.box.lx) << "\n";
    out << "ly = " << format_real(config.box.ly) << "\n";
    out << "lz = " << format_real(config.box.lz) << "\n";
    out << "patch_x = " << format_real(config.box.patch_x) << "\n";
    out << "patch_y = " << format_real(config.box.patch_y) << "\n";
  }

  out << "\n[dirichlet]\n";
  for (const DirichletSpec& spec : config.dirichlet) {
    out << spec.node_set << "." << component_word(spec.component) << " = "
        << format_real(spec.value) << "\n";
  }

  out << "\n[neumann]\n";
  for (const NeumannSpec& spec : config.neumann) {
    out << spec.face_set << " = " << format_real(spec.traction[0]) << " "
        << format_real(spec.traction[1]) << " " << format_real(spec.traction[2])
        << "\n";
  }

  out << "\n[steps]\n";
  out << "count = " << config.n_steps << "\n";
  if (!config.factors.empty()) {
    out << "factors =";
    for (double f : config.factors) out << " " << format_real(f);
    out << "\n";
  }

  out << "\n[solver]\n";
  out << "tol_abs = " << format_real(config.solver.tol_abs) << "\n";
  out << "tol_rel = " << format_real(config.solver.tol_rel) << "\n";
  out << "max_iterations = " << config.solver.max_iterations << "\n";

  out << "\n[probes]\n";
  for (const ProbeSpec& probe : config.probes) {
    out << probe.name << " = " << format_real(probe.point[0]) << " "
        << format_real(probe.point[1]) << " " << format_real(probe.point[2]) << "\n";
  }

  out << "\n[output]\n";
  out << "vtk = " << (config.write_vtk ? "true" : "false") << "\n";
  return out.str();
}

std::string write_config_echo(const RunConfig& config) {
  if (config.output_prefix.empty()) {
    throw ConfigError("write_config_echo: output_prefix is empty");
  }
  const std::string path = config.output_prefix + ".echo.ini";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_config_echo: cannot write " + path);
  out << render_config(config);
  if (!out) throw Error("write_config_echo: write failed for " + path);
  return path;
}

}  // namespace hyperfem
