#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "symvar/functionals.hpp"

namespace symvar::cli {

namespace {

using ojson = nlohmann::ordered_json;

enum class Kind { Int, Number, String, Numbers, Matrix };

struct Field {
  std::string name;
  Kind kind;
  ojson def;
  std::vector<std::string> choices;  // String only; empty = free text
  std::string doc;
};

struct Section {
  std::string name;
  std::string doc;
  std::vector<Field> fields;
};

struct Subcommand {
  std::string name;
  std::vector<std::string> sections;  // besides grid, in table order
  std::vector<std::string> params;
  std::string doc;
};

const std::vector<Section>& sections() {
  static const std::vector<Section> table = {
      {"grid",
       "uniform symmetric grid over [-radius, radius]^dimension",
       {{"dimension", Kind::Int, 1, {}, "1 or 2"},
        {"cells", Kind::Int, 8, {}, "cells per axis, even"},
        {"radius", Kind::Number, 1.0, {}, "half-width of the domain"},
        {"p", Kind::Number, 2.0, {}, "exponent of the X-norm"},
        {"q_w", Kind::Number, 0.0, {}, "W = L^q_w; 0 selects the default"},
        {"q_v", Kind::Number, 0.0, {}, "V = L^p cap L^q_v when p >= N; 0 selects the default"}}},
      {"functional",
       "registered functional f",
       {{"name", Kind::String, "quadratic_v", functional_names(), "registry name"},
        {"a_amp", Kind::Number, 0.5, {}, "amplitude of the symmetric profile a"},
        {"c", Kind::Number, 1.0, {}, "scale for quadratic_x and linear"}}},
      {"start",
       "u0 = base + t ramp with f(u0) - f(base) = level (t = 0 when level = 0)",
       {{"base", Kind::String, "profile", {"zero", "profile", "constant", "values"}, "base point"},
        {"amp", Kind::Number, 0.5, {}, "profile amplitude"},
        {"value", Kind::Number, 1.0, {}, "constant base value"},
        {"values", Kind::Numbers, ojson::array(), {}, "cell values for base = values"},
        {"level", Kind::Number, 0.0, {}, "energy gap above the base"}}},
      {"params",
       "scalar parameters; each subcommand accepts its own subset",
       {{"sigma", Kind::Number, 0.1, {}, "Ekeland sigma"},
        {"rho", Kind::Number, 0.1, {}, "Ekeland rho"},
        {"rho2", Kind::Number, 0.0, {}, "variant IV rho_2; 0 means rho"},
        {"eps", Kind::Number, 0.1, {}, "epsilon"},
        {"eps_schedule", Kind::Numbers, ojson::array({0.1, 0.05, 0.01}), {}, "one run per epsilon"},
        {"variant", Kind::String, "II", {"I", "II", "IV", "V"}, "symmetric Ekeland variant"},
        {"h", Kind::String, "linear", {"zero", "linear", "quadratic"}, "Zhong weight"},
        {"p_exp", Kind::Number, 2.0, {}, "Borwein-Preiss exponent"},
        {"delta", Kind::Number, 1.0, {}, "DGZ bump radius"},
        {"m_nodes", Kind::Int, 6, {}, "path nodes"},
        {"subdivisions", Kind::Int, 8, {}, "evaluation points per path segment"},
        {"norm", Kind::String, "l1", {"l1", "l2"}, "petal output norm"},
        {"minimality_samples", Kind::Int, 10000, {}, "drop/petal minimality probes"}}},
      {"integrand",
       "quasi-linear integrand L",
       {{"name", Kind::String, "dirichlet", {"dirichlet", "p_dirichlet", "area"}, "registry name"},
        {"p", Kind::Number, 2.0, {}, "exponent for p_dirichlet"},
        {"forcing", Kind::Number, 0.0, {}, "linear forcing F(s) = forcing s"}}},
      {"nonlinearity",
       "semi-linear g",
       {{"name", Kind::String, "cubic", {"zero", "linear", "cubic", "cubic_free"}, "registry name"}}},
      {"map",
       "F(u) = a + factor (u - a) cellwise; Caristi pairs it with f = weight ||u - a||_X",
       {{"factor", Kind::Number, 0.5, {}, "contraction factor in [0, 1)"},
        {"a", Kind::Number, 0.0, {}, "constant fixed point"},
        {"weight", Kind::Number, 2.0, {}, "Caristi weight, at least 1 / (1 - factor)"}}},
      {"geometry",
       "C = {A u <= b} with a ball B (drop) or a point y (petal)",
       {{"A", Kind::Matrix, ojson::array(), {}, "rows of the polyhedron"},
        {"b", Kind::Numbers, ojson::array(), {}, "right-hand side"},
        {"x", Kind::Numbers, ojson::array(), {}, "start point in C"},
        {"y", Kind::Numbers, ojson::array(), {}, "petal point outside C"},
        {"center", Kind::Numbers, ojson::array(), {}, "drop ball center"},
        {"radius", Kind::Number, 1.0, {}, "drop ball radius"}}},
      {"constraint",
       "one L^2 constraint G(u) = m |u|^2 - level",
       {{"type", Kind::String, "eq", {"eq", "ineq"}, "eq: G = 0; ineq: level - m |u|^2 >= 0"},
        {"level", Kind::Number, 1.0, {}, "squared L^2 norm"}}},
      {"polarize",
       "polarization demo",
       {{"u", Kind::Numbers, ojson::array(), {}, "cell values"},
        {"polarizer", Kind::Int, 0, {}, "index into the grid's polarizer family"}}},
      {"verify",
       "re-sample a certificate",
       {{"certificate", Kind::String, "", {}, "path, relative to the config file"},
        {"perturb", Kind::Number, 0.0, {}, "shift v by perturb * rho * ramp before sampling"}}},
  };
  return table;
}

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> table = {
      {"polarize", {"polarize"}, {}, "u^H for one polarizer"},
      {"symmetrize", {"start", "params"}, {"rho"}, "T_rho by greedy polarization"},
      {"ekeland-core", {"functional", "start", "params"}, {"sigma", "rho"}, "classical Ekeland point"},
      {"ekeland", {"functional", "start", "params"}, {"sigma", "rho", "rho2", "variant"}, "symmetric Ekeland"},
      {"bp", {"functional", "start", "params"}, {"sigma", "rho", "p_exp"}, "symmetric Borwein-Preiss"},
      {"zhong", {"functional", "start", "params"}, {"sigma", "rho", "h"}, "symmetric Zhong"},
      {"zhong-radius", {"params"}, {"rho", "h"}, "r(rho) of the Zhong weight"},
      {"dgz", {"functional", "start", "params"}, {"eps", "delta"}, "DGZ perturbed minimum check"},
      {"constrained", {"functional", "start", "params", "constraint"}, {"eps"}, "constrained principle"},
      {"path", {"functional", "start", "params"}, {"eps", "m_nodes", "subdivisions"}, "path minimax"},
      {"quasilinear", {"params", "integrand"}, {"eps_schedule"}, "quasi-linear energies"},
      {"semilinear", {"params", "nonlinearity"}, {"eps_schedule"}, "semi-linear energies"},
      {"caristi", {"params", "map"}, {"eps"}, "symmetric Caristi fixed point"},
      {"clarke", {"params", "map"}, {"eps"}, "symmetric Clarke fixed point"},
      {"drop", {"params", "geometry"}, {"eps", "minimality_samples"}, "symmetric drop theorem"},
      {"petal", {"params", "geometry"}, {"eps", "norm", "minimality_samples"}, "symmetric petal theorem"},
      {"verify", {"functional", "verify"}, {}, "re-sample a certificate"},
  };
  return table;
}

const Subcommand* find_subcommand(const std::string& name) {
  for (const Subcommand& s : subcommands())
    if (s.name == name) return &s;
  return nullptr;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "|" : "") + v[i];
  return s;
}

ojson check_value(const Field& f, const nlohmann::json& v, const std::string& at) {
  auto numbers = [&](const nlohmann::json& a, const std::string& where) {
    if (!a.is_array()) throw ConfigError(where, "expected an array of numbers");
    ojson out = ojson::array();
    for (size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) throw ConfigError(where + "/" + std::to_string(i), "expected a number");
      out.push_back(a[i].get<double>());
    }
    return out;
  };
  switch (f.kind) {
    case Kind::Int:
      if (!v.is_number_integer()) throw ConfigError(at, "expected an integer");
      return v.get<long long>();
    case Kind::Number:
      if (!v.is_number()) throw ConfigError(at, "expected a number");
      return v.get<double>();
    case Kind::String: {
      if (!v.is_string()) throw ConfigError(at, "expected a string");
      std::string s = v.get<std::string>();
      if (!f.choices.empty() && std::find(f.choices.begin(), f.choices.end(), s) == f.choices.end())
        throw ConfigError(at, "'" + s + "' is not one of " + join(f.choices));
      return s;
    }
    case Kind::Numbers:
      return numbers(v, at);
    case Kind::Matrix: {
      if (!v.is_array()) throw ConfigError(at, "expected an array of rows");
      ojson out = ojson::array();
      for (size_t i = 0; i < v.size(); ++i) {
        out.push_back(numbers(v[i], at + "/" + std::to_string(i)));
        if (out.back().size() != out.front().size())
          throw ConfigError(at + "/" + std::to_string(i), "rows differ in length");
      }
      return out;
    }
  }
  return {};
}

ojson parse_section(const Section& s, const nlohmann::json* given, const std::vector<std::string>* allowed) {
  const std::string at = "/" + s.name;
  if (given && !given->is_object()) throw ConfigError(at, "expected an object");
  auto permitted = [&](const std::string& key) {
    return !allowed || std::find(allowed->begin(), allowed->end(), key) != allowed->end();
  };
  if (given)
    for (auto it = given->begin(); it != given->end(); ++it) {
      bool known = std::any_of(s.fields.begin(), s.fields.end(),
                               [&](const Field& f) { return f.name == it.key(); });
      if (!known) throw ConfigError(at + "/" + it.key(), "unknown key");
      if (!permitted(it.key())) throw ConfigError(at + "/" + it.key(), "not used by this subcommand");
    }
  ojson out = ojson::object();
  for (const Field& f : s.fields) {
    if (!permitted(f.name)) continue;
    if (given && given->contains(f.name))
      out[f.name] = check_value(f, (*given)[f.name], at + "/" + f.name);
    else
      out[f.name] = f.def;
  }
  return out;
}

template <class C>
auto slot(C& c, const std::string& name) -> decltype(&c.grid) {
  if (name == "grid") return &c.grid;
  if (name == "functional") return &c.functional;
  if (name == "start") return &c.start;
  if (name == "params") return &c.params;
  if (name == "integrand") return &c.integrand;
  if (name == "nonlinearity") return &c.nonlinearity;
  if (name == "map") return &c.map;
  if (name == "geometry") return &c.geometry;
  if (name == "constraint") return &c.constraint;
  if (name == "polarize") return &c.polarize;
  if (name == "verify") return &c.verify;
  return nullptr;
}

std::vector<std::string> used_sections(const Subcommand& sc) {
  std::vector<std::string> used;
  // zhong-radius is grid-free
  if (sc.name != "zhong-radius") used.push_back("grid");
  for (const Section& s : sections())
    if (std::find(sc.sections.begin(), sc.sections.end(), s.name) != sc.sections.end())
      used.push_back(s.name);
  return used;
}

// line of the key named by a JSON pointer, following the path segments in order
int key_line(const std::string& text, const std::string& pointer) {
  size_t pos = 0;
  std::stringstream ss(pointer);
  std::string seg;
  bool any = false;
  while (std::getline(ss, seg, '/')) {
    if (seg.empty()) continue;
    if (std::all_of(seg.begin(), seg.end(), ::isdigit)) continue;
    size_t next = text.find("\"" + seg + "\"", pos);
    if (next == std::string::npos) return 0;
    pos = next;
    any = true;
  }
  return any ? int(std::count(text.begin(), text.begin() + pos, '\n')) + 1 : 0;
}

ojson kind_schema(const Field& f) {
  ojson s;
  switch (f.kind) {
    case Kind::Int:
      s["type"] = "integer";
      break;
    case Kind::Number:
      s["type"] = "number";
      break;
    case Kind::String:
      s["type"] = "string";
      if (!f.choices.empty()) s["enum"] = f.choices;
      break;
    case Kind::Numbers:
      s["type"] = "array";
      s["items"] = {{"type", "number"}};
      break;
    case Kind::Matrix:
      s["type"] = "array";
      s["items"] = {{"type", "array"}, {"items", {{"type", "number"}}}};
      break;
  }
  s["default"] = f.def;
  s["description"] = f.doc;
  return s;
}

}  // namespace

std::vector<std::string> subcommand_names() {
  std::vector<std::string> n;
  for (const Subcommand& s : subcommands()) n.push_back(s.name);
  return n;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("/", "expected an object");
  static const std::vector<std::string> scalars = {"schema", "subcommand", "seed", "samples", "output"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = std::find(scalars.begin(), scalars.end(), it.key()) != scalars.end() ||
                 std::any_of(sections().begin(), sections().end(),
                             [&](const Section& s) { return s.name == it.key(); });
    if (!known) throw ConfigError("/" + it.key(), "unknown key");
  }
  if (!j.contains("schema")) throw ConfigError("/schema", "missing (expected \"" + std::string(kSchemaVersion) + "\")");
  if (!j["schema"].is_string() || j["schema"].get<std::string>() != kSchemaVersion)
    throw ConfigError("/schema", "expected \"" + std::string(kSchemaVersion) + "\"");
  if (!j.contains("subcommand")) throw ConfigError("/subcommand", "missing");
  if (!j["subcommand"].is_string()) throw ConfigError("/subcommand", "expected a string");
  const Subcommand* sc = find_subcommand(j["subcommand"].get<std::string>());
  if (!sc)
    throw ConfigError("/subcommand", "'" + j["subcommand"].get<std::string>() + "' is not one of " +
                                         join(subcommand_names()));

  ExperimentConfig c;
  c.subcommand = sc->name;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("/seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("samples")) {
    if (!j["samples"].is_number_integer() || j["samples"].get<long long>() <= 0)
      throw ConfigError("/samples", "expected a positive integer");
    c.samples = j["samples"].get<int>();
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    if (!o.is_object()) throw ConfigError("/output", "expected an object");
    for (auto it = o.begin(); it != o.end(); ++it)
      if (it.key() != "dir") throw ConfigError("/output/" + it.key(), "unknown key");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) throw ConfigError("/output/dir", "expected a string");
      c.output_dir = o["dir"].get<std::string>();
    }
  }

  const std::vector<std::string> used = used_sections(*sc);
  for (const Section& s : sections()) {
    bool is_used = std::find(used.begin(), used.end(), s.name) != used.end();
    if (!is_used) {
      if (j.contains(s.name)) throw ConfigError("/" + s.name, "section not used by subcommand '" + sc->name + "'");
      continue;
    }
    const nlohmann::json* given = j.contains(s.name) ? &j[s.name] : nullptr;
    *slot(c, s.name) = parse_section(s, given, s.name == "params" ? &sc->params : nullptr);
  }
  return c;
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  ojson j;
  j["schema"] = kSchemaVersion;
  j["subcommand"] = c.subcommand;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  const Subcommand* sc = find_subcommand(c.subcommand);
  if (!sc) throw ConfigError("/subcommand", "unknown subcommand '" + c.subcommand + "'");
  for (const std::string& name : used_sections(*sc)) {
    j[name] = *slot(c, name);
  }
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character
    size_t at = std::min(text.size(), e.byte > 0 ? size_t(e.byte - 1) : size_t(0));
    int line = int(std::count(text.begin(), text.begin() + at, '\n')) + 1;
    size_t nl = text.rfind('\n', at == 0 ? 0 : at - 1);
    int col = int(at - (nl == std::string::npos ? 0 : nl + 1)) + 1;
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col),
                      "JSON syntax error");
  }
  try {
    ExperimentConfig c = config_from_json(j);
    c.base_dir = base_dir;
    return c;
  } catch (const ConfigError& e) {
    int line = key_line(text, e.where());
    if (line == 0) throw;
    std::string what = e.what();
    throw ConfigError(e.where() + " (line " + std::to_string(line) + ")", what.substr(e.where().size() + 2));
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string canonical_text(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

nlohmann::ordered_json config_schema() {
  ojson s;
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["$id"] = std::string(kSchemaVersion);
  s["title"] = "symvar experiment config";
  s["type"] = "object";
  s["required"] = {"schema", "subcommand"};
  ojson props;
  props["schema"] = {{"const", kSchemaVersion}};
  props["subcommand"] = {{"enum", subcommand_names()}};
  props["seed"] = {{"type", "integer"}, {"minimum", 0}, {"default", 0}};
  props["samples"] = {{"type", "integer"}, {"minimum", 1}, {"default", 10000},
                      {"description", "verification samples"}};
  for (const Section& sec : sections()) {
    ojson p;
    p["type"] = "object";
    p["description"] = sec.doc;
    p["additionalProperties"] = false;
    for (const Field& f : sec.fields) p["properties"][f.name] = kind_schema(f);
    props[sec.name] = p;
  }
  ojson dir = {{"type", "string"}, {"default", ""}, {"description", "empty: $SYMVAR_OUT or ./symvar_out"}};
  props["output"] = {{"type", "object"}, {"additionalProperties", false}, {"properties", {{"dir", dir}}}};
  s["properties"] = props;
  s["additionalProperties"] = false;
  ojson all = ojson::array();
  for (const Subcommand& sc : subcommands()) {
    ojson rule;
    rule["if"] = {{"properties", {{"subcommand", {{"const", sc.name}}}}}};
    std::vector<std::string> names = {"schema", "subcommand", "seed", "samples", "output"};
    for (const std::string& u : used_sections(sc)) names.push_back(u);
    ojson then;
    then["propertyNames"] = {{"enum", names}};
    if (!sc.params.empty()) then["properties"]["params"] = {{"propertyNames", {{"enum", sc.params}}}};
    then["description"] = sc.doc;
    rule["then"] = then;
    all.push_back(rule);
  }
  s["allOf"] = all;
  return s;
}

}  // namespace symvar::cli
