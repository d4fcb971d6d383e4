#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/arc_space.hpp"
#include "qwalk/measures.hpp"
#include "qwalk/rw_model.hpp"
#include "qwalk/series.hpp"

namespace qwalk {

struct LoopSpec {
  std::size_t site = 0;
  double mass = 0.0;
  TakeFrom take_from = TakeFrom::right;

  bool operator==(const LoopSpec&) const = default;
};

struct WalkSpec {
  std::string family;
  std::vector<double> params;
  std::optional<RecurrenceClass> declared_class;

  bool operator==(const WalkSpec&) const = default;
};

/// kind: arc | incidence | reflected | custom | hs_projected.
/// hs_projected takes the state described by `base` (one of the other kinds,
/// sharing site/direction/coefficients) and removes its mass-point components.
struct InitialStateSpec {
  std::string kind = "arc";
  std::size_t site = 0;
  Direction direction = Direction::R;
  std::vector<std::complex<double>> coefficients;  ///< L, O, R for custom
  std::string base;

  bool operator==(const InitialStateSpec&) const = default;
};

struct OutputSpec {
  std::string directory;
  bool spectral_csv = true;

  bool operator==(const OutputSpec&) const = default;
};

struct ScenarioConfig {
  std::string name;
  WalkSpec walk;
  std::vector<LoopSpec> loops;
  std::vector<std::size_t> truncation;
  std::vector<std::size_t> horizon;
  InitialStateSpec initial_state;
  std::vector<std::string> checks;
  OutputSpec output;
  /// Overrides on top of default_tolerances().
  std::map<std::string, double> tolerances;

  bool operator==(const ScenarioConfig&) const = default;

  double tolerance(const std::string& key) const;
  SeriesOptions series_options() const;
};

/// Tolerance keys and their defaults.
const std::map<std::string, double>& default_tolerances();
const std::vector<std::string>& known_checks();

/// Throws ConfigError carrying the YAML line and field.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);

/// Walk with loops applied; throws ConfigError for invalid walk or loop entries.
HalfLineWalk build_walk(const ScenarioConfig& config);

/// Initial state without mass-point projection (hs_projected resolves to its base).
InitialState build_initial_state(const ScenarioConfig& config, const HalfLineWalk& walk);

}  // namespace qwalk
