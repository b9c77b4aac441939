#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mvjl/chain.hpp"
#include "mvjl/checks.hpp"
#include "mvjl/errors.hpp"
#include "mvjl/geweke.hpp"
#include "mvjl/io.hpp"
#include "mvjl/metrics.hpp"
#include "mvjl/simulate.hpp"

namespace mvjl::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRunMetaFile = "run_meta.json";
constexpr const char* kToolVersion = "0.3.0";
constexpr const char* kEvaluationDir = "evaluation";

template <class T>
T pick(const std::optional<T>& flag, const json& config, const char* key, const T& fallback, std::string* source) {
  if (flag) {
    if (source) *source = "flag";
    return *flag;
  }
  if (config.contains(key)) {
    if (source) *source = "config";
    try {
      return config.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
  if (source) *source = "default";
  return fallback;
}

/// Run fn(0..count-1) on the worker pool; exceptions are rethrown in index order.
template <class Fn>
void parallel_for(int count, Fn fn) {
  const int workers = std::min(worker_count(), std::max(count, 1));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string rep_name(int j) {
  std::ostringstream ss;
  ss << "rep_" << std::setw(3) << std::setfill('0') << j + 1;
  return ss.str();
}

void write_run_meta(const fs::path& dir, const std::string& command, json resolved) {
  json meta = {{"tool", "mvjl"}, {"version", kToolVersion}, {"command", command}, {"resolved", std::move(resolved)}};
  write_text_file(dir / kRunMetaFile, meta.dump(2) + "\n");
}

json scenario_to_json(const Scenario& s) {
  return {{"name", s.name},
          {"n", s.n},
          {"num_nodes", s.num_nodes},
          {"num_views", s.num_views},
          {"node_density", s.node_density},
          {"true_rank", s.true_rank},
          {"fitted_rank", s.fitted_rank},
          {"noise_variance", s.noise_variance},
          {"intercept", s.intercept},
          {"aux_coef", s.aux_coef},
          {"latent_correlation", s.latent_correlation},
          {"replications", s.replications},
          {"n_iter", s.n_iter},
          {"n_burnin", s.n_burnin},
          {"thin", s.thin}};
}

Scenario scenario_from_json(const json& j, Scenario base) {
  try {
    if (j.contains("name")) base.name = j.at("name").get<std::string>();
    if (j.contains("n")) base.n = j.at("n").get<int>();
    if (j.contains("num_nodes")) base.num_nodes = j.at("num_nodes").get<int>();
    if (j.contains("num_views")) base.num_views = j.at("num_views").get<int>();
    if (j.contains("node_density")) base.node_density = j.at("node_density").get<double>();
    if (j.contains("true_rank")) base.true_rank = j.at("true_rank").get<int>();
    if (j.contains("fitted_rank")) base.fitted_rank = j.at("fitted_rank").get<int>();
    if (j.contains("noise_variance")) base.noise_variance = j.at("noise_variance").get<std::vector<double>>();
    if (j.contains("intercept")) base.intercept = j.at("intercept").get<std::vector<double>>();
    if (j.contains("aux_coef")) base.aux_coef = j.at("aux_coef").get<std::vector<double>>();
    if (j.contains("latent_correlation")) base.latent_correlation = j.at("latent_correlation").get<double>();
    if (j.contains("replications")) base.replications = j.at("replications").get<int>();
    if (j.contains("n_iter")) base.n_iter = j.at("n_iter").get<int>();
    if (j.contains("n_burnin")) base.n_burnin = j.at("n_burnin").get<int>();
    if (j.contains("thin")) base.thin = j.at("thin").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario file: ") + e.what());
  }
  base.validate();
  return base;
}

bool is_bundle(const fs::path& dir) { return fs::exists(dir / "manifest.json"); }

/// Dataset directories under `root`: root itself when it holds a bundle,
/// otherwise its rep_* subdirectories that do, in name order.
std::vector<fs::path> dataset_dirs(const fs::path& root) {
  if (is_bundle(root)) return {root};
  std::vector<fs::path> out;
  if (fs::is_directory(root))
    for (const auto& entry : fs::directory_iterator(root))
      if (entry.is_directory() && entry.path().filename().string().rfind("rep_", 0) == 0 && is_bundle(entry.path()))
        out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("no dataset bundle (manifest.json) under " + root.string());
  return out;
}

/// Fit directories (those holding chain.json) under `root`, skipping the
/// per-view directories of independent fits.
void collect_fit_dirs(const fs::path& dir, std::vector<fs::path>& out) {
  if (fs::exists(dir / kChainMetaFile)) {
    out.push_back(dir);
    return;
  }
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) subdirs.push_back(entry.path());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& s : subdirs) {
    const auto name = s.filename().string();
    if (name.rfind("view_", 0) == 0 || name == "heldout" || name == kEvaluationDir) continue;
    collect_fit_dirs(s, out);
  }
}

fs::path find_upwards(const fs::path& dir, const fs::path& root, const std::string& name) {
  for (fs::path d = dir;; d = d.parent_path()) {
    if (fs::exists(d / name)) return d / name;
    if (d == root || d == d.parent_path() || !d.has_parent_path()) break;
  }
  return {};
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("MVJL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(ParseErrorKind::kMalformed, path, 0, e.what());
  }
  if (!j.is_object()) throw ParseError(ParseErrorKind::kMalformed, path, 0, "config must be a JSON object");
  return j;
}

ResolvedModel resolve_model(const ModelOverrides& f, const json& c, const ModelConfig& d) {
  ResolvedModel r;
  auto& s = r.sources;
  r.config.rank = pick(f.rank, c, "rank", d.rank, &s["rank"]);
  r.config.omega = pick(f.omega, c, "omega", d.omega, &s["omega"]);
  r.config.a_eta = pick(f.a_eta, c, "a_eta", d.a_eta, &s["a_eta"]);
  r.config.b_eta = pick(f.b_eta, c, "b_eta", d.b_eta, &s["b_eta"]);
  r.config.a_sigma = pick(f.a_sigma, c, "a_sigma", d.a_sigma, &s["a_sigma"]);
  r.config.b_sigma = pick(f.b_sigma, c, "b_sigma", d.b_sigma, &s["b_sigma"]);
  if (f.nu || c.contains("nu")) r.config.nu = pick(f.nu, c, "nu", 0.0, &s["nu"]);
  else s["nu"] = "default";
  r.config.n_iter = pick(f.n_iter, c, "n_iter", d.n_iter, &s["n_iter"]);
  r.config.n_burnin = pick(f.n_burnin, c, "n_burnin", d.n_burnin, &s["n_burnin"]);
  r.config.thin = pick(f.thin, c, "thin", d.thin, &s["thin"]);
  r.config.seed = pick(f.seed, c, "seed", d.seed, &s["seed"]);
  return r;
}

json model_to_json(const ModelConfig& c) {
  json j = {{"rank", c.rank},     {"omega", c.omega},       {"a_eta", c.a_eta},   {"b_eta", c.b_eta},
            {"a_sigma", c.a_sigma}, {"b_sigma", c.b_sigma}, {"n_iter", c.n_iter}, {"n_burnin", c.n_burnin},
            {"thin", c.thin},     {"seed", c.seed}};
  j["nu"] = c.nu ? json(*c.nu) : json("R*M+2");
  return j;
}

// ---- simulate ----------------------------------------------------------------

int cmd_simulate(const SimulateArgs& a, std::ostream& log) {
  if (a.out.empty()) throw ConfigError("simulate: --out is required");
  const json config = load_config(a.config);
  std::string scenario_source;
  const std::string name = pick(a.scenario.empty() ? std::nullopt : std::optional<std::string>(a.scenario), config,
                                "scenario", std::string(), &scenario_source);
  Scenario scenario;
  if (!a.scenario_file.empty()) {
    scenario = scenario_from_json(load_config(a.scenario_file), Scenario{});
    if (scenario.name.empty()) scenario.name = fs::path(a.scenario_file).stem().string();
  } else {
    if (name.empty()) throw ConfigError("simulate: give --scenario or --scenario-file");
    const auto found = find_scenario(name);
    if (!found) {
      std::string known;
      for (const auto& s : scenario_registry()) known += " " + s.name;
      throw ConfigError("unknown scenario '" + name + "'; known:" + known);
    }
    scenario = *found;
  }
  std::string seed_source, reps_source;
  const std::uint64_t seed = pick(a.seed, config, "seed", std::uint64_t{1}, &seed_source);
  const int reps = pick(a.replications, config, "replications", 1, &reps_source);
  if (reps < 1) throw ConfigError("replications must be positive");
  scenario.seed = seed;

  for (int j = 0; j < reps; ++j) {
    const fs::path dir = reps == 1 ? a.out : a.out / rep_name(j);
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(j));
    const SyntheticTruth truth = generate_truth(scenario, rng);
    const MultiviewDataset data = generate_dataset(truth, scenario, rng);
    write_dataset(data, DatasetBundle::in_directory(dir));
    write_truth(truth, dir / kTruthFile);
    log << "simulate: wrote " << dir.string() << " (n=" << data.num_subjects() << ", K=" << data.num_nodes
        << ", M=" << data.num_views() << ", active nodes " << truth.inclusion.sum() << ")\n";
  }
  write_run_meta(a.out, "simulate",
                 {{"scenario", scenario_to_json(scenario)},
                  {"seed", seed},
                  {"replications", reps},
                  {"sources", {{"scenario", a.scenario_file.empty() ? scenario_source : "scenario-file"},
                               {"seed", seed_source},
                               {"replications", reps_source}}}});
  return kOk;
}

// ---- fit ---------------------------------------------------------------------

int cmd_fit(const FitArgs& a, std::ostream& log) {
  if (a.data.empty() || a.out.empty()) throw ConfigError("fit: --data and --out are required");
  const json config = load_config(a.config);
  ResolvedModel model = resolve_model(a.model, config, ModelConfig{});
  std::string mode_source, chains_source, holdout_source;
  std::string mode_name = a.mode ? (*a.mode == FitMode::kJoint ? "jl" : "il") : std::string();
  mode_name = pick(mode_name.empty() ? std::nullopt : std::optional<std::string>(mode_name), config, "mode",
                   std::string("jl"), &mode_source);
  if (mode_name != "jl" && mode_name != "il") throw ConfigError("mode must be 'jl' or 'il'");
  const bool joint = mode_name == "jl";
  const int chains = pick(a.chains, config, "chains", 1, &chains_source);
  if (chains < 1) throw ConfigError("chains must be positive");
  const std::optional<double> holdout =
      a.holdout ? a.holdout : (config.contains("holdout") ? std::optional<double>(config.at("holdout").get<double>()) : std::nullopt);
  holdout_source = a.holdout ? "flag" : (config.contains("holdout") ? "config" : "default");
  const bool save_draws = a.save_draws || config.value("save_draws", false) || holdout.has_value();

  const auto datasets = dataset_dirs(a.data);
  const bool multi = datasets.size() > 1 || !is_bundle(a.data);

  // Load (and split) every dataset up front so failures surface before sampling.
  std::vector<MultiviewDataset> train(datasets.size()), heldout(datasets.size());
  for (std::size_t j = 0; j < datasets.size(); ++j) {
    MultiviewDataset d = read_dataset(DatasetBundle::in_directory(datasets[j]));
    if (!d.all_continuous()) throw UnsupportedFeatureError("fit: binary views are not supported by the sampler");
    model.config.validate(joint ? d.num_views() : 1);
    if (holdout) {
      auto [tr, te] = split_subjects(d, *holdout);
      train[j] = std::move(tr);
      heldout[j] = std::move(te);
    } else {
      train[j] = std::move(d);
    }
  }

  const int jobs = static_cast<int>(datasets.size()) * chains;
  std::vector<ChainOutput> joint_out(static_cast<std::size_t>(jobs));
  std::vector<std::vector<ChainOutput>> view_out(static_cast<std::size_t>(jobs));
  std::mutex log_mutex;
  parallel_for(jobs, [&](int job) {
    const int j = job / chains, c = job % chains;
    Rng rng = Rng(model.config.seed).split(static_cast<std::uint64_t>(job));
    RunOptions opts;
    if (!a.quiet) {
      opts.progress = [&, j, c](int iter, double ll, int active) {
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "fit";
        if (multi) log << " " << rep_name(j);
        if (chains > 1) log << " chain " << c + 1;
        log << ": iter " << iter << " loglik " << ll << " active " << active << "\n";
      };
    }
    const auto& d = train[static_cast<std::size_t>(j)];
    if (joint) joint_out[static_cast<std::size_t>(job)] = run_chain(d, model.config, rng, opts);
    else view_out[static_cast<std::size_t>(job)] = run_independent_chains(d, model.config, rng, opts);
  });

  for (int job = 0; job < jobs; ++job) {
    const int j = job / chains, c = job % chains;
    fs::path rep_dir = multi ? a.out / datasets[static_cast<std::size_t>(j)].filename() : a.out;
    const fs::path dir = chains > 1 ? rep_dir / ("chain_" + std::to_string(c + 1)) : rep_dir;
    if (joint) {
      write_chain_summary(joint_out[static_cast<std::size_t>(job)], dir, save_draws);
    } else {
      const auto& views = view_out[static_cast<std::size_t>(job)];
      write_chain_summary(merge_view_chains(views), dir, save_draws);
      for (std::size_t m = 0; m < views.size(); ++m)
        write_chain_summary(views[m], dir / ("view_" + std::to_string(m + 1)), save_draws);
    }
    if (c == 0) {
      const fs::path truth = datasets[static_cast<std::size_t>(j)] / kTruthFile;
      if (fs::exists(truth)) write_text_file(rep_dir / kTruthFile, read_text_file(truth));
      if (holdout) write_dataset(heldout[static_cast<std::size_t>(j)], DatasetBundle::in_directory(rep_dir / "heldout"));
    }
  }
  log << "fit: wrote " << jobs << " chain summar" << (jobs == 1 ? "y" : "ies") << " under " << a.out.string() << "\n";

  json resolved = {{"data", a.data.generic_string()},
                   {"model", model_to_json(model.config)},
                   {"mode", mode_name},
                   {"chains", chains},
                   {"save_draws", save_draws},
                   {"holdout", holdout ? json(*holdout) : json(nullptr)},
                   {"datasets", static_cast<int>(datasets.size())},
                   {"seed_rule", "chain seed = seed + dataset_index * chains + chain_index"}};
  json sources = model.sources;
  sources["mode"] = mode_source;
  sources["chains"] = chains_source;
  sources["holdout"] = holdout_source;
  resolved["sources"] = sources;
  write_run_meta(a.out, "fit", std::move(resolved));
  return kOk;
}

// ---- evaluate ----------------------------------------------------------------

int cmd_evaluate(const EvaluateArgs& a, std::ostream& log) {
  if (a.fit.empty()) throw ConfigError("evaluate: --fit is required");
  if (!fs::is_directory(a.fit)) throw IoError("fit directory " + a.fit.string() + " not found");
  std::vector<fs::path> units;
  collect_fit_dirs(a.fit, units);
  if (units.empty()) throw IoError("no fit outputs (chain.json) under " + a.fit.string());
  // Defaults to a subdirectory so the fit's own run_meta.json is kept.
  const fs::path out = a.out.empty() ? a.fit / kEvaluationDir : a.out;

  std::vector<EvaluationReport> reports;
  for (std::size_t u = 0; u < units.size(); ++u) {
    const fs::path& dir = units[u];
    const fs::path truth_path = !a.truth.empty() ? a.truth : find_upwards(dir, a.fit, kTruthFile);
    const fs::path heldout_dir = !a.heldout.empty() ? a.heldout : find_upwards(dir, a.fit, "heldout");
    if (truth_path.empty() && heldout_dir.empty())
      throw ConfigError("evaluate: neither truth (truth.json / --truth) nor held-out data (heldout/ / --heldout) found for " +
                        dir.string());
    EvaluationReport report;
    if (!truth_path.empty()) report = evaluate_against_truth(read_chain_summary(dir), read_truth(truth_path));
    if (!heldout_dir.empty()) {
      Rng rng = Rng(a.seed).split(u);
      add_predictive(report, read_chain_draws(dir), read_dataset(DatasetBundle::in_directory(heldout_dir)), rng);
    }
    if (units.size() > 1) write_report(report, out / fs::relative(dir, a.fit) / kReportFile);
    reports.push_back(std::move(report));
  }
  if (units.size() == 1) {
    write_report(reports.front(), out / kReportFile);
  } else {
    write_aggregate_report(aggregate_reports(reports), out / kReportFile);
  }
  log << "evaluate: " << units.size() << " fit" << (units.size() == 1 ? "" : "s") << " -> " << (out / kReportFile).string()
      << "\n";
  write_run_meta(out, "evaluate",
                 {{"fit", a.fit.generic_string()},
                  {"truth", a.truth.generic_string()},
                  {"heldout", a.heldout.generic_string()},
                  {"seed", a.seed},
                  {"fits", static_cast<int>(units.size())}});
  return kOk;
}

// ---- report ------------------------------------------------------------------

int cmd_report(const ReportArgs& a, std::ostream& out) {
  fs::path path = a.in;
  if (fs::is_directory(a.in))
    path = fs::exists(a.in / kReportFile) ? a.in / kReportFile : a.in / kEvaluationDir / kReportFile;
  const std::string text = read_text_file(path);
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    for (auto c : split_csv_line(line)) cells.emplace_back(c);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw ParseError(ParseErrorKind::kMalformed, path.string(), 1, "empty report");
  // MSE is shown x 100 as in the usual simulation tables.
  auto& header = rows.front();
  for (std::size_t c = 0; c < header.size(); ++c) {
    const bool mse = header[c] == "mse" || header[c] == "mse_mean" || header[c] == "mse_se";
    if (!mse) continue;
    header[c] += "_x100";
    for (std::size_t r = 1; r < rows.size(); ++r)
      if (c < rows[r].size() && !rows[r][c].empty())
        rows[r][c] = format_double(parse_double(rows[r][c], path.string(), r + 1) * 100.0);
  }
  for (std::size_t r = 1; r < rows.size(); ++r)
    for (std::size_t c = 2; c < rows[r].size(); ++c) {
      if (rows[r][c].empty() || header[c] == "replications") continue;
      std::ostringstream ss;
      ss << std::fixed << std::setprecision(4) << parse_double(rows[r][c], path.string(), r + 1);
      rows[r][c] = ss.str();
    }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream table;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
      table << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << row[c];
    table << "\n";
  }
  out << table.str();
  if (!a.out.empty()) write_text_file(a.out, table.str());
  return kOk;
}

// ---- check -------------------------------------------------------------------

int cmd_check(const CheckArgs& a, std::ostream& out) {
  json result;
  bool pass = false;
  out << std::setprecision(6);
  if (a.kind == "prior") {
    PriorDiagnosticsOptions o;
    if (a.rank) o.rank = *a.rank;
    if (a.omega) o.omega = *a.omega;
    if (a.draws) o.draws = *a.draws;
    if (a.seed) o.seed = *a.seed;
    const auto d = prior_diagnostics(o);
    pass = d.pass();
    out << "P(all " << o.rank << " rank signs = +1): estimate " << d.all_positive_estimate << " (se "
        << d.all_positive_se << "), exact " << d.all_positive_exact << ", lower bound " << d.all_positive_bound << "\n";
    out << "  within 3 se: " << (d.within_3se ? "yes" : "no") << ", above bound: " << (d.above_bound ? "yes" : "no") << "\n";
    json moments = json::array();
    for (const auto& m : d.moments) {
      out << "E|lambda^(" << m.r << ")|: estimate " << m.estimate << " (se " << m.se << "), expected " << m.expected
          << (m.pass ? "  ok" : "  FAIL") << "\n";
      moments.push_back({{"r", m.r}, {"estimate", m.estimate}, {"se", m.se}, {"expected", m.expected}, {"pass", m.pass}});
    }
    result = {{"all_positive_estimate", d.all_positive_estimate}, {"all_positive_se", d.all_positive_se},
              {"all_positive_exact", d.all_positive_exact},       {"all_positive_bound", d.all_positive_bound},
              {"moments", moments},                               {"options", {{"rank", o.rank}, {"omega", o.omega}, {"draws", o.draws}, {"seed", o.seed}}}};
  } else if (a.kind == "conjugacy") {
    ConjugacyOptions o;
    if (a.draws) o.draws = static_cast<int>(*a.draws);
    if (a.seed) o.seed = *a.seed;
    if (a.inject_fault) o.fault = Fault::kHalvedInterceptVariance;
    const auto results = conjugacy_check(o);
    pass = true;
    json rows = json::array();
    out << "conditional   max CDF gap   grid mean    draw mean\n";
    for (const auto& r : results) {
      const bool ok = r.ks < 0.01;
      pass = pass && ok;
      out << std::left << std::setw(12) << r.name << std::right << std::setw(12) << r.ks << std::setw(12) << r.grid_mean
          << std::setw(12) << r.sample_mean << (ok ? "  ok" : "  FAIL") << "\n";
      rows.push_back({{"name", r.name}, {"ks", r.ks}, {"grid_mean", r.grid_mean}, {"sample_mean", r.sample_mean}});
    }
    if (a.inject_fault) pass = !pass;
    result = {{"conditionals", rows}, {"threshold", 0.01}, {"fault_injected", a.inject_fault}};
  } else if (a.kind == "collapsed") {
    CollapsedOptions o;
    if (a.samples) o.instances = *a.samples;
    if (a.seed) o.seed = *a.seed;
    const auto r = collapsed_check(o);
    pass = r.max_probability_gap < 1e-8;
    out << r.comparisons << " node updates compared against the dense computation\n"
        << "  max |inclusion probability gap| " << r.max_probability_gap << "\n"
        << "  max relative log-odds gap       " << r.max_log_odds_gap << "\n"
        << "  max slab mean gap               " << r.max_mean_gap << "\n"
        << "  max slab covariance gap         " << r.max_covariance_gap << "\n";
    result = {{"comparisons", r.comparisons},
              {"max_probability_gap", r.max_probability_gap},
              {"max_log_odds_gap", r.max_log_odds_gap},
              {"max_mean_gap", r.max_mean_gap},
              {"max_covariance_gap", r.max_covariance_gap},
              {"threshold", 1e-8}};
  } else if (a.kind == "geweke") {
    GewekeOptions o;
    if (a.samples) o.samples = *a.samples;
    if (a.seed) o.seed = *a.seed;
    if (a.inject_fault) o.fault = Fault::kHalvedInterceptVariance;
    const auto g = geweke_joint_test(o);
    pass = a.inject_fault ? g.max_abs_z > 6.0 : g.max_abs_z < 4.0;
    out << "statistic         marginal (se)            successive (se)            z\n";
    json rows = json::array();
    for (const auto& s : g.statistics) {
      out << std::left << std::setw(16) << s.name << std::right << std::setw(10) << s.marginal_mean << " ("
          << std::setw(9) << s.marginal_se << ")  " << std::setw(10) << s.successive_mean << " (" << std::setw(9)
          << s.successive_se << ")  " << std::setw(7) << s.z << "\n";
      rows.push_back({{"name", s.name}, {"marginal_mean", s.marginal_mean}, {"marginal_se", s.marginal_se},
                      {"successive_mean", s.successive_mean}, {"successive_se", s.successive_se}, {"z", s.z}});
    }
    out << "max |z| = " << g.max_abs_z << (a.inject_fault ? " (fault injected; expect > 6)" : " (expect < 4)") << "\n";
    result = {{"statistics", rows}, {"max_abs_z", g.max_abs_z}, {"fault_injected", a.inject_fault}, {"samples", o.samples}};
  } else {
    throw ConfigError("unknown check '" + a.kind + "' (expected geweke, prior, conjugacy or collapsed)");
  }
  out << (pass ? "PASS" : "FAIL") << "\n";
  result["pass"] = pass;
  if (!a.out.empty()) {
    write_text_file(a.out / ("check_" + a.kind + ".json"), result.dump(2) + "\n");
    write_run_meta(a.out, "check " + a.kind,
                   {{"kind", a.kind},
                    {"inject_fault", a.inject_fault},
                    {"seed", a.seed ? json(*a.seed) : json("default")}});
  }
  return pass ? kOk : kCheckFailed;
}

int report_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const UnsupportedFeatureError& e) {
    err << "error: " << e.what() << "\n";
    return kUnsupported;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace mvjl::cli
