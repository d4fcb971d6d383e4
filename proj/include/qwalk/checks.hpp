#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/measures.hpp"
#include "qwalk/scenario.hpp"
#include "qwalk/spectral.hpp"

namespace qwalk {

struct CheckRecord {
  std::string name;
  std::string expected;
  std::string observed;
  double tolerance = 0.0;
  bool passed = false;
  double runtime_ms = 0.0;  ///< console only; never written to reports
};

/// Everything computed for one scenario at its largest N and T.
struct ScenarioRun {
  ScenarioRun(ScenarioConfig c, HalfLineWalk w) : config(std::move(c)), walk(std::move(w)) {}

  ScenarioConfig config;
  HalfLineWalk walk;
  std::optional<RecurrenceReport> recurrence;
  std::string recurrence_error;
  std::size_t N = 0;
  std::size_t T = 0;
  std::unique_ptr<WalkOperators> ops;
  StateVector psi0;
  std::optional<SpectralData> spectral;
  std::vector<MassPoint> mass_points;
  std::optional<LimitMeasureResult> spectral_measure;
  std::vector<std::pair<std::size_t, LimitMeasureResult>> direct;  ///< (T, result) at N
  std::optional<MeasureTable> pi;
  std::vector<double> lower_bound;
  std::vector<double> closed_form;
  std::vector<std::string> notes;

  const LimitMeasureResult& final_direct() const { return direct.back().second; }
};

struct ScenarioResult {
  std::string name;
  std::vector<CheckRecord> checks;
  std::vector<std::string> written;
  bool passed() const;
};

struct RunOptions {
  std::string output_root = ".";
  bool write_files = true;
  std::function<void(const std::string&)> log;
};

/// Prepares walk, state, spectral data and direct averages at the largest N.
ScenarioRun prepare_run(const ScenarioConfig& config, bool with_direct = true);

CheckRecord run_check(const std::string& name, const ScenarioRun& run);

/// Full `measure` pipeline: prepare, run every configured check, write artifacts.
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options);

/// Deterministic text report (no timings).
std::string format_report(const ScenarioRun& run, const ScenarioResult& result);

std::vector<std::vector<std::string>> measure_rows(const ScenarioRun& run);
std::vector<std::vector<std::string>> spectral_rows(const ScenarioRun& run);

inline const std::vector<std::string> kMeasureHeader = {
    "vertex", "direct_value", "spectral_value", "hr_part", "hs_part", "lower_bound", "closed_form"};
inline const std::vector<std::string> kSpectralHeader = {"lambda", "branch", "norm2", "is_mass_point",
                                                         "residual"};
inline const std::vector<std::string> kSweepHeader = {"N", "T", "direct_mu0", "spectral_mu0", "sup_gap",
                                                      "norm_drift"};

/// One row per (N, T) of the config grid; spectral columns are nan above spectral_max_N.
std::vector<std::vector<std::string>> sweep(const ScenarioConfig& config,
                                            const std::function<void(const std::string&)>& log = {});

}  // namespace qwalk
