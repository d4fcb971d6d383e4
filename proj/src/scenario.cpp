#include "qwalk/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qwalk/errors.hpp"

namespace qwalk {

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> d = {
      {"closed_form", 1e-2},
      {"closed_form_max_vertex", 20},
      {"lower_bound", 5e-3},
      {"two_method", 5e-2},
      {"corollary", 2e-3},
      {"no_localization", 2e-2},
      {"hs_zero", 1e-9},
      {"lift_residual", 1e-9},
      {"orthogonality", 1e-10},
      {"eta_identity", 1e-10},
      {"series_cutoff", 1e6},
      {"stabilize_tol", 1e-12},
      {"diverge_threshold", 1e8},
      {"spectral_max_N", 1200},
      {"brute_force_max_arcs", 2000},
  };
  return d;
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> c = {
      "recurrence_class", "closed_form_match", "lower_bound",  "two_method",
      "corollary2",       "corollary3",        "no_localization", "lift_residual",
      "hs_dimension",     "hs_support",        "signed_reflected", "eta_identity",
      "eta_norm"};
  return c;
}

double ScenarioConfig::tolerance(const std::string& key) const {
  if (auto it = tolerances.find(key); it != tolerances.end()) return it->second;
  return default_tolerances().at(key);
}

SeriesOptions ScenarioConfig::series_options() const {
  SeriesOptions o;
  o.cutoff = static_cast<std::size_t>(tolerance("series_cutoff"));
  o.stabilize_tol = tolerance("stabilize_tol");
  o.diverge_threshold = tolerance("diverge_threshold");
  return o;
}

namespace {

int line_of(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

[[noreturn]] void fail(const std::string& field, const YAML::Node& n, const std::string& what) {
  throw ConfigError(field, line_of(n), what);
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field, const char* expected) {
  if (!n.IsScalar()) fail(field, n, std::string("expected ") + expected);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(field, n, std::string("expected ") + expected + ", got '" + n.Scalar() + "'");
  }
}

std::size_t index(const YAML::Node& n, const std::string& field) {
  const auto v = scalar<long long>(n, field, "a non-negative integer");
  if (v < 0) fail(field, n, "must be non-negative");
  return static_cast<std::size_t>(v);
}

std::vector<std::size_t> index_list(const YAML::Node& n, const std::string& field) {
  std::vector<std::size_t> out;
  if (n.IsSequence()) {
    if (n.size() == 0) fail(field, n, "must not be empty");
    for (std::size_t k = 0; k < n.size(); ++k) {
      out.push_back(index(n[k], field + "[" + std::to_string(k) + "]"));
    }
  } else {
    out.push_back(index(n, field));
  }
  return out;
}

void reject_unknown(const YAML::Node& map, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(where.empty() ? key : where + "." + key, kv.first, "unknown key");
  }
}

const YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& field) {
  const YAML::Node n = map[key];
  if (!n) fail(field, map, "missing required key '" + key + "'");
  return n;
}

std::complex<double> complex_value(const YAML::Node& n, const std::string& field) {
  if (n.IsSequence()) {
    if (n.size() != 2) fail(field, n, "complex values are [re, im]");
    return {scalar<double>(n[0], field, "a number"), scalar<double>(n[1], field, "a number")};
  }
  return scalar<double>(n, field, "a number");
}

WalkSpec parse_walk(const YAML::Node& n) {
  if (!n.IsMap()) fail("walk", n, "expected a mapping");
  reject_unknown(n, "walk", {"family", "params", "declared_class"});
  WalkSpec w;
  w.family = scalar<std::string>(require(n, "family", "walk.family"), "walk.family", "a string");
  if (const auto p = n["params"]) {
    if (!p.IsSequence()) fail("walk.params", p, "expected a list of numbers");
    for (std::size_t k = 0; k < p.size(); ++k) {
      w.params.push_back(scalar<double>(p[k], "walk.params[" + std::to_string(k) + "]", "a number"));
    }
  }
  if (const auto c = n["declared_class"]) {
    const auto text = scalar<std::string>(c, "walk.declared_class", "a string");
    w.declared_class = parse_recurrence_class(text);
    if (!w.declared_class) fail("walk.declared_class", c, "unknown class '" + text + "'");
  }
  return w;
}

std::vector<LoopSpec> parse_loops(const YAML::Node& n) {
  std::vector<LoopSpec> out;
  if (!n.IsSequence()) fail("loops", n, "expected a list");
  for (std::size_t k = 0; k < n.size(); ++k) {
    const std::string f = "loops[" + std::to_string(k) + "]";
    const YAML::Node e = n[k];
    if (!e.IsMap()) fail(f, e, "expected a mapping");
    reject_unknown(e, f, {"site", "mass", "take_from"});
    LoopSpec l;
    l.site = index(require(e, "site", f + ".site"), f + ".site");
    const YAML::Node m = require(e, "mass", f + ".mass");
    l.mass = scalar<double>(m, f + ".mass", "a number");
    if (!(l.mass > 0.0 && l.mass < 1.0)) fail(f + ".mass", m, "loop mass must lie in (0, 1)");
    if (const auto t = e["take_from"]) {
      const auto text = scalar<std::string>(t, f + ".take_from", "a string");
      const auto parsed = parse_take_from(text);
      if (!parsed) fail(f + ".take_from", t, "expected right, left or proportional");
      l.take_from = *parsed;
    }
    out.push_back(l);
  }
  return out;
}

InitialStateSpec parse_initial_state(const YAML::Node& n) {
  if (!n.IsMap()) fail("initial_state", n, "expected a mapping");
  reject_unknown(n, "initial_state", {"kind", "site", "direction", "coefficients", "base"});
  InitialStateSpec s;
  const YAML::Node kind = require(n, "kind", "initial_state.kind");
  s.kind = scalar<std::string>(kind, "initial_state.kind", "a string");
  static const std::set<std::string> kinds = {"arc", "incidence", "reflected", "custom", "hs_projected"};
  if (!kinds.count(s.kind)) fail("initial_state.kind", kind, "unknown kind '" + s.kind + "'");
  if (const auto site = n["site"]) s.site = index(site, "initial_state.site");
  if (const auto d = n["direction"]) {
    const auto text = scalar<std::string>(d, "initial_state.direction", "L, O or R");
    const auto parsed = parse_direction(text);
    if (!parsed) fail("initial_state.direction", d, "expected L, O or R");
    s.direction = *parsed;
  }
  if (const auto c = n["coefficients"]) {
    if (!c.IsSequence() || c.size() != 3) fail("initial_state.coefficients", c, "expected [L, O, R]");
    for (std::size_t k = 0; k < 3; ++k) {
      s.coefficients.push_back(complex_value(c[k], "initial_state.coefficients[" + std::to_string(k) + "]"));
    }
  }
  if (const auto b = n["base"]) s.base = scalar<std::string>(b, "initial_state.base", "a string");
  const std::string effective = s.kind == "hs_projected" ? (s.base.empty() ? "reflected" : s.base) : s.kind;
  if (s.kind == "hs_projected" && (effective == "hs_projected" || !kinds.count(effective))) {
    fail("initial_state.base", n, "base must be arc, incidence, reflected or custom");
  }
  if (s.kind != "hs_projected" && !s.base.empty()) fail("initial_state.base", n, "only valid for hs_projected");
  if (effective == "custom") {
    if (s.coefficients.empty()) fail("initial_state.coefficients", n, "custom states need coefficients");
    double n2 = 0.0;
    for (auto c : s.coefficients) n2 += std::norm(c);
    if (!(n2 > 0.0)) fail("initial_state.coefficients", n, "state does not normalize (zero vector)");
  }
  return s;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ConfigError("", 1, "scenario file must be a mapping");
  reject_unknown(root, "",
                 {"name", "walk", "loops", "truncation", "horizon", "initial_state", "checks", "output",
                  "tolerances"});
  ScenarioConfig c;
  c.name = scalar<std::string>(require(root, "name", "name"), "name", "a string");
  c.walk = parse_walk(require(root, "walk", "walk"));
  if (const auto l = root["loops"]) c.loops = parse_loops(l);
  const YAML::Node trunc = require(root, "truncation", "truncation");
  c.truncation = index_list(trunc, "truncation");
  for (std::size_t N : c.truncation) {
    if (N < 2) fail("truncation", trunc, "N must be at least 2");
  }
  const YAML::Node hor = require(root, "horizon", "horizon");
  c.horizon = index_list(hor, "horizon");
  for (std::size_t T : c.horizon) {
    if (T < 1) fail("horizon", hor, "T must be at least 1");
  }
  c.initial_state = parse_initial_state(require(root, "initial_state", "initial_state"));

  if (const auto ch = root["checks"]) {
    if (!ch.IsSequence()) fail("checks", ch, "expected a list");
    const auto& known = known_checks();
    for (std::size_t k = 0; k < ch.size(); ++k) {
      const std::string f = "checks[" + std::to_string(k) + "]";
      const auto name = scalar<std::string>(ch[k], f, "a check name");
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        fail(f, ch[k], "unknown check '" + name + "'");
      }
      if (std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end()) {
        fail(f, ch[k], "duplicate check '" + name + "'");
      }
      c.checks.push_back(name);
    }
  }
  if (const auto out = root["output"]) {
    if (!out.IsMap()) fail("output", out, "expected a mapping");
    reject_unknown(out, "output", {"directory", "spectral_csv"});
    if (const auto d = out["directory"]) c.output.directory = scalar<std::string>(d, "output.directory", "a path");
    if (const auto s = out["spectral_csv"]) c.output.spectral_csv = scalar<bool>(s, "output.spectral_csv", "a boolean");
  }
  if (c.output.directory.empty()) c.output.directory = c.name;
  if (const auto t = root["tolerances"]) {
    if (!t.IsMap()) fail("tolerances", t, "expected a mapping");
    for (const auto& kv : t) {
      const auto key = kv.first.as<std::string>();
      if (!default_tolerances().count(key)) fail("tolerances." + key, kv.first, "unknown tolerance");
      const double v = scalar<double>(kv.second, "tolerances." + key, "a number");
      if (!(v > 0.0)) fail("tolerances." + key, kv.second, "must be positive");
      c.tolerances[key] = v;
    }
  }

  // Cross-field invariants.
  const HalfLineWalk walk = [&] {
    try {
      return build_walk(c);
    } catch (const ConfigError& e) {
      if (e.field() == "walk") fail("walk", root["walk"], e.reason());
      const auto k = std::stoul(e.field().substr(6));
      fail(e.field(), root["loops"][k], e.reason());
    }
  }();
  std::size_t max_loop = 0;
  for (const auto& l : c.loops) max_loop = std::max(max_loop, l.site);
  for (std::size_t N : c.truncation) {
    if (!c.loops.empty() && N < max_loop + 2) {
      fail("truncation", trunc, "N must be at least the largest loop site + 2");
    }
    if (c.initial_state.site + 1 > N) fail("initial_state.site", root["initial_state"], "anchor lies beyond N");
  }
  try {
    (void)build_initial_state(c, walk);
  } catch (const std::exception& e) {
    fail("initial_state", root["initial_state"], e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "walk" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << c.walk.family;
  out << YAML::Key << "params" << YAML::Value << YAML::Flow << c.walk.params;
  if (c.walk.declared_class) {
    out << YAML::Key << "declared_class" << YAML::Value << std::string(to_string(*c.walk.declared_class));
  }
  out << YAML::EndMap;
  out << YAML::Key << "loops" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : c.loops) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "site" << YAML::Value << l.site << YAML::Key
        << "mass" << YAML::Value << l.mass << YAML::Key << "take_from" << YAML::Value
        << std::string(to_string(l.take_from)) << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "truncation" << YAML::Value << YAML::Flow << c.truncation;
  out << YAML::Key << "horizon" << YAML::Value << YAML::Flow << c.horizon;
  out << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.initial_state.kind;
  out << YAML::Key << "site" << YAML::Value << c.initial_state.site;
  out << YAML::Key << "direction" << YAML::Value << std::string(to_string(c.initial_state.direction));
  if (!c.initial_state.coefficients.empty()) {
    out << YAML::Key << "coefficients" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto z : c.initial_state.coefficients) {
      out << YAML::Flow << YAML::BeginSeq << z.real() << z.imag() << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  if (!c.initial_state.base.empty()) out << YAML::Key << "base" << YAML::Value << c.initial_state.base;
  out << YAML::EndMap;
  out << YAML::Key << "checks" << YAML::Value << YAML::Flow << c.checks;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << c.output.directory;
  out << YAML::Key << "spectral_csv" << YAML::Value << c.output.spectral_csv;
  out << YAML::EndMap;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : c.tolerances) out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

HalfLineWalk build_walk(const ScenarioConfig& c) {
  HalfLineWalk walk = [&] {
    try {
      return make_family(c.walk.family, c.walk.params);
    } catch (const ParameterError& e) {
      throw ConfigError("walk", 0, e.what());
    }
  }();
  if (c.walk.declared_class) walk = walk.with_declared_class(c.walk.declared_class);
  for (std::size_t k = 0; k < c.loops.size(); ++k) {
    const auto& l = c.loops[k];
    try {
      walk = add_self_loop(walk, l.site, l.mass, l.take_from);
    } catch (const ParameterError& e) {
      throw ConfigError("loops[" + std::to_string(k) + "]", 0, e.what());
    }
  }
  return walk.with_name(c.name);
}

InitialState build_initial_state(const ScenarioConfig& c, const HalfLineWalk& walk) {
  const auto& s = c.initial_state;
  const std::string kind = s.kind == "hs_projected" ? (s.base.empty() ? "reflected" : s.base) : s.kind;
  InitialState st;
  if (kind == "arc") {
    st = InitialState::arc(s.site, s.direction);
  } else if (kind == "incidence") {
    st = InitialState::incidence(walk, s.site);
  } else if (kind == "reflected") {
    st = InitialState::reflected(walk, s.site);
  } else {
    std::array<std::complex<double>, 3> co{};
    for (std::size_t k = 0; k < 3 && k < s.coefficients.size(); ++k) co[k] = s.coefficients[k];
    st = InitialState::custom(s.site, co);
  }
  st.kind = s.kind;
  // Reject arcs that do not exist at the anchor.
  const TruncatedChain local = truncate(walk, std::max<std::size_t>(s.site + 1, 2));
  (void)st.build(ArcBasis::from_chain(local));
  return st;
}

}  // namespace qwalk
