#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvjl/model.hpp"

namespace mvjl::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kBadInput = 3,
  kUnsupported = 4,
  kRuntime = 5,
};

enum class FitMode { kJoint, kIndependent };

/// Model settings after merging CLI flags over a JSON config over defaults.
/// `sources` records where each field came from ("flag", "config", "default").
struct ResolvedModel {
  ModelConfig config;
  std::map<std::string, std::string> sources;
};

/// Values given on the command line; unset fields fall through to the config file.
struct ModelOverrides {
  std::optional<int> rank;
  std::optional<double> omega;
  std::optional<double> a_eta, b_eta, a_sigma, b_sigma, nu;
  std::optional<int> n_iter, n_burnin, thin;
  std::optional<std::uint64_t> seed;
};

ResolvedModel resolve_model(const ModelOverrides& flags, const nlohmann::json& file_config, const ModelConfig& defaults);
nlohmann::json model_to_json(const ModelConfig& config);

/// JSON config file contents, or an empty object when `path` is empty.
nlohmann::json load_config(const std::string& path);

/// Worker-pool size: MVJL_WORKERS when set to a positive integer, else the
/// hardware concurrency (at least 1).
int worker_count();

struct SimulateArgs {
  std::string scenario;
  std::string scenario_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::string config;
  std::filesystem::path out;
};

struct FitArgs {
  std::filesystem::path data;
  std::filesystem::path out;
  std::string config;
  std::optional<FitMode> mode;
  std::optional<int> chains;
  std::optional<double> holdout;
  bool save_draws = false;
  bool quiet = false;
  ModelOverrides model;
};

struct EvaluateArgs {
  std::filesystem::path fit;
  std::filesystem::path truth;
  std::filesystem::path heldout;
  std::filesystem::path out;
  std::uint64_t seed = 1;
};

struct ReportArgs {
  std::filesystem::path in;
  std::filesystem::path out;
};

struct CheckArgs {
  std::string kind;
  std::optional<int> rank;
  std::optional<double> omega;
  std::optional<long long> draws;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  bool inject_fault = false;
  std::filesystem::path out;
};

/// Each command writes its outputs plus run_meta.json and returns an ExitCode.
/// Human-readable progress and tables go to `log`.
/// run_meta.json holds the resolved settings only (no output path, clock or
/// host details), so identical runs produce identical files.
int cmd_simulate(const SimulateArgs& args, std::ostream& log);
int cmd_fit(const FitArgs& args, std::ostream& log);
int cmd_evaluate(const EvaluateArgs& args, std::ostream& log);
int cmd_report(const ReportArgs& args, std::ostream& out);
int cmd_check(const CheckArgs& args, std::ostream& out);

/// Map a thrown exception to its exit code after printing it to `err`.
int report_exception(std::ostream& err);

}  // namespace mvjl::cli
