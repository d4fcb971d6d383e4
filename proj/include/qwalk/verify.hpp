#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qwalk/rw_model.hpp"
#include "qwalk/scenario.hpp"

namespace qwalk {

/// Mirrors scenarios/*.yaml: six base walks, each with loop sets {}, {0}, {0, 3}.
struct BundledWalk {
  std::string name;
  std::string family;
  std::vector<double> params;
  std::vector<LoopSpec> loops;
};

const std::vector<BundledWalk>& bundled_walks();
HalfLineWalk build_bundled(const BundledWalk& b);

struct CriterionInfo {
  int id = 0;
  std::string module;
  std::string name;
  double budget_s = 0.0;
};

const std::vector<CriterionInfo>& list_criteria();

struct CriterionResult {
  CriterionInfo info;
  bool passed = false;               ///< numeric outcome only
  std::vector<std::string> details;  ///< deterministic text, one item per sub-check
  std::vector<std::string> notes;    ///< supplementary diagnostics, never counted
  double runtime_s = 0.0;
  bool within_budget() const { return runtime_s <= info.budget_s; }
};

struct VerifyOptions {
  std::string module_filter;  ///< empty runs every module
  std::string output_dir;     ///< empty skips artifacts
  std::function<void(const std::string&)> log;
};

struct VerifyReport {
  std::vector<CriterionResult> criteria;
  std::string text;  ///< contents of report.txt; carries no runtimes
  bool passed() const;
};

/// Runs one criterion, writing its CSV artifacts into artifact_dir when nonempty.
CriterionResult run_criterion(int id, const std::string& artifact_dir);

VerifyReport verify_all(const VerifyOptions& options);

}  // namespace qwalk
