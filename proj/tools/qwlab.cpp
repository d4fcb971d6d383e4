#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qwalk/checks.hpp"
#include "qwalk/csv.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;

std::string output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("QWLAB_OUTPUT_ROOT")) return env;
  return ".";
}

std::filesystem::path scenario_dir(const std::string& root, const qwalk::ScenarioConfig& c) {
  return std::filesystem::path(root) / c.output.directory;
}

void print_line(const std::string& s) { std::cout << s << '\n'; }

int cmd_run(const std::string& path, const std::string& root) {
  const auto config = qwalk::load_config(path);
  qwalk::RunOptions opts;
  opts.output_root = root;
  opts.log = print_line;
  const auto result = qwalk::run_scenario(config, opts);
  for (const auto& f : result.written) std::cout << "wrote " << f << '\n';
  if (result.passed()) return kExitOk;
  std::cout << "failing checks:";
  for (const auto& c : result.checks) {
    if (!c.passed) std::cout << ' ' << c.name;
  }
  std::cout << '\n';
  return kExitCheckFailure;
}

int cmd_classify(const std::string& path) {
  const auto config = qwalk::load_config(path);
  const auto walk = qwalk::build_walk(config);
  const auto check = [&] {
    const auto run_config = config;
    qwalk::ScenarioRun run(run_config, walk);
    return qwalk::run_check("recurrence_class", run);
  }();
  std::cout << config.name << ": " << check.observed << '\n';
  if (!check.passed) std::cout << "expected " << check.expected << '\n';
  return check.passed ? kExitOk : kExitCheckFailure;
}

int cmd_spectrum(const std::string& path, const std::string& root) {
  const auto config = qwalk::load_config(path);
  const auto run = qwalk::prepare_run(config, false);
  if (!run.spectral) {
    std::cout << "N=" << run.N << " exceeds spectral_max_N; nothing written\n";
    return kExitCheckFailure;
  }
  const auto file = (scenario_dir(root, config) / "spectral.csv").string();
  qwalk::write_csv(file, qwalk::kSpectralHeader, qwalk::spectral_rows(run));
  std::cout << "N=" << run.N << " eigenvalues " << run.spectral->pairs.size() << " m(+1)="
            << run.spectral->pairs.m_plus << " m(-1)=" << run.spectral->pairs.m_minus
            << " H^(S) dim " << run.spectral->hs_plus.cols() + run.spectral->hs_minus.cols()
            << " mass points " << run.mass_points.size() << '\n';
  std::cout << "wrote " << file << '\n';
  return kExitOk;
}

int cmd_measure(const std::string& path, const std::string& root) {
  const auto config = qwalk::load_config(path);
  const auto run = qwalk::prepare_run(config, true);
  const auto file = (scenario_dir(root, config) / "measure.csv").string();
  qwalk::write_csv(file, qwalk::kMeasureHeader, qwalk::measure_rows(run));
  std::cout << "N=" << run.N << " T=" << run.T << " mu(0) direct " << qwalk::format_number(run.final_direct().table[0])
            << '\n';
  std::cout << "wrote " << file << '\n';
  return kExitOk;
}

int cmd_sweep(const std::string& path, const std::string& root) {
  const auto config = qwalk::load_config(path);
  const auto rows = qwalk::sweep(config, print_line);
  const auto file = (scenario_dir(root, config) / "sweep.csv").string();
  qwalk::write_csv(file, qwalk::kSweepHeader, rows);
  std::cout << "wrote " << file << '\n';
  return kExitOk;
}

int cmd_verify(const std::string& filter, bool list, const std::string& root) {
  if (list) {
    for (const auto& c : qwalk::list_criteria()) {
      if (filter.empty() || c.module == filter) std::cout << c.id << ' ' << c.module << ' ' << c.name << '\n';
    }
    return kExitOk;
  }
  qwalk::VerifyOptions opts;
  opts.module_filter = filter;
  opts.output_dir = (std::filesystem::path(root) / "verify").string();
  opts.log = print_line;
  const auto report = qwalk::verify_all(opts);
  std::cout << report.text;
  std::cout << "wrote " << opts.output_dir << '\n';
  return report.passed() ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum walk lab for half-line birth-death chains with self loops"};
  app.require_subcommand(1);
  std::string root_flag;
  app.add_option("--output-root", root_flag, "Output root (default: $QWLAB_OUTPUT_ROOT or .)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every check of a scenario and write its artifacts");
  run->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  auto* classify = app.add_subcommand("classify", "Classify the walk of a scenario");
  classify->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  auto* spectrum = app.add_subcommand("spectrum", "Write the spectral decomposition of a scenario");
  spectrum->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  auto* measure = app.add_subcommand("measure", "Write the limit measure of a scenario");
  measure->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  auto* sweep = app.add_subcommand("sweep", "Direct vs spectral measure over the N x T grid");
  sweep->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  std::string filter;
  bool list = false;
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--filter", filter, "Restrict to one module")
      ->check(CLI::IsMember({"rw-model", "arc-space", "spectral", "measures", "scenario-cli"}));
  verify->add_flag("--list", list, "Print criterion names without running");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  const std::string root = output_root(root_flag);
  try {
    if (*run) return cmd_run(config_path, root);
    if (*classify) return cmd_classify(config_path);
    if (*spectrum) return cmd_spectrum(config_path, root);
    if (*measure) return cmd_measure(config_path, root);
    if (*sweep) return cmd_sweep(config_path, root);
    if (*verify) return cmd_verify(filter, list, root);
  } catch (const qwalk::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailure;
  }
  return kExitOk;
}
