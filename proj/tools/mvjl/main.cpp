#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace mvjl::cli;

void add_model_flags(CLI::App& cmd, ModelOverrides& m) {
  cmd.add_option("--R,--rank", m.rank, "fitted rank");
  cmd.add_option("--omega", m.omega, "rank-shrinkage exponent");
  cmd.add_option("--a-eta", m.a_eta);
  cmd.add_option("--b-eta", m.b_eta);
  cmd.add_option("--a-sigma", m.a_sigma);
  cmd.add_option("--b-sigma", m.b_sigma);
  cmd.add_option("--nu", m.nu, "inverse-Wishart degrees of freedom (default R*M+2)");
  cmd.add_option("--iter", m.n_iter, "total sweeps");
  cmd.add_option("--burnin", m.n_burnin, "discarded sweeps");
  cmd.add_option("--thin", m.thin, "keep every thin-th sweep");
  cmd.add_option("--seed", m.seed, "base seed; chain j uses seed + j");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian joint learning of multiview graph responses"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mvjl 0.3.0");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate synthetic datasets from a scenario");
  simulate->add_option("--scenario", sim.scenario, "registered scenario name (table1-1..6, desk-small, desk-tiny)");
  simulate->add_option("--scenario-file", sim.scenario_file, "JSON scenario definition")->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--replications", sim.replications);
  simulate->add_option("--config", sim.config, "JSON config")->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out)->required();

  FitArgs fit;
  std::string mode;
  auto* fitcmd = app.add_subcommand("fit", "run the Gibbs sampler");
  fitcmd->add_option("--data", fit.data, "dataset bundle or directory of rep_* bundles")->required();
  fitcmd->add_option("--out", fit.out)->required();
  fitcmd->add_option("--config", fit.config, "JSON config")->check(CLI::ExistingFile);
  fitcmd->add_option("--mode", mode, "jl (joint) or il (one chain per view)")->check(CLI::IsMember({"jl", "il"}));
  fitcmd->add_option("--chains", fit.chains);
  fitcmd->add_option("--holdout", fit.holdout, "fraction of subjects held out for prediction")
      ->check(CLI::Range(0.0, 1.0));
  fitcmd->add_flag("--save-draws", fit.save_draws, "write edge_draws.csv");
  fitcmd->add_flag("--quiet", fit.quiet);
  add_model_flags(*fitcmd, fit.model);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "score fits against truth and/or held-out data");
  evaluate->add_option("--fit", ev.fit)->required();
  evaluate->add_option("--truth", ev.truth);
  evaluate->add_option("--heldout", ev.heldout);
  evaluate->add_option("--out", ev.out);
  evaluate->add_option("--seed", ev.seed, "seed for predictive noise draws");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "print a report as an aligned table");
  report->add_option("--in", rep.in, "report.csv or a directory holding one")->required();
  report->add_option("--out", rep.out);

  CheckArgs chk;
  auto* check = app.add_subcommand("check", "sampler validation");
  check->add_option("kind", chk.kind, "geweke, prior, conjugacy or collapsed")->required();
  check->add_option("--R,--rank", chk.rank);
  check->add_option("--omega", chk.omega);
  check->add_option("--draws", chk.draws);
  check->add_option("--samples", chk.samples);
  check->add_option("--seed", chk.seed);
  check->add_flag("--inject-fault", chk.inject_fault, "halve the intercept prior variance in the sampler");
  check->add_option("--out", chk.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, std::cerr);
    if (*fitcmd) {
      if (!mode.empty()) fit.mode = mode == "jl" ? FitMode::kJoint : FitMode::kIndependent;
      return cmd_fit(fit, std::cerr);
    }
    if (*evaluate) return cmd_evaluate(ev, std::cerr);
    if (*report) return cmd_report(rep, std::cout);
    if (*check) return cmd_check(chk, std::cout);
  } catch (...) {
    return report_exception(std::cerr);
  }
  return kUsage;
}
