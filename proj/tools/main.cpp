// Command-line front end: `run` executes a full two-stage experiment,
// `compare` adds the projection-based ADMM baseline on the same instance,
// `audit` re-derives the run-level invariants and fails on any breach.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "mixcaladin/harness.hpp"
#include "mixcaladin/trace_io.hpp"

namespace {

using mixcaladin::AuditCheck;
using mixcaladin::ExperimentResult;
using mixcaladin::RunConfig;

struct CliOptions {
  std::string config_path;
  std::string problem = "convex";
  int agents = 0;
  std::int64_t nc = -1;
  std::int64_t nd = -1;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double alpha0 = 0.0;
  double beta = 0.0;
  double eps_stage1 = 0.0;
  double eps_inner = 0.0;
  double eps_outer = 0.0;
  std::uint64_t seed = 0;
  int max_iter = 0;
  int max_iter_stage1 = 0;
  int max_iter_inner = 0;
  int max_outer = 0;
  bool accelerated = false;
  bool baseline = false;
  bool random_init = false;
  std::string out;
};

void add_common_options(CLI::App* cmd, CliOptions* opt) {
  cmd->add_option("--config", opt->config_path, "JSON config file");
  cmd->add_option("--problem", opt->problem,
                  "problem kind: convex|nonconvex|quadratic-oracle")
      ->check(CLI::IsMember({"convex", "nonconvex", "quadratic-oracle"}));
  cmd->add_option("--agents", opt->agents, "number of agents N");
  cmd->add_option("--nc", opt->nc, "continuous dimension");
  cmd->add_option("--nd", opt->nd, "Boolean dimension");
  cmd->add_option("--rho1", opt->rho1, "stage 1 penalty weight");
  cmd->add_option("--rho2", opt->rho2, "stage 2 proximal weight");
  cmd->add_option("--alpha0", opt->alpha0, "initial Boolean penalty weight");
  cmd->add_option("--beta", opt->beta, "penalty growth factor (> 1)");
  cmd->add_option("--eps-stage1", opt->eps_stage1, "stage 1 step tolerance");
  cmd->add_option("--eps-inner", opt->eps_inner, "inner-loop step tolerance");
  cmd->add_option("--eps-outer", opt->eps_outer,
                  "Boolean residual tolerance");
  cmd->add_option("--seed", opt->seed, "instance seed (64-bit)");
  cmd->add_option("--max-iter", opt->max_iter,
                  "cap on stage 1 iterations and on each inner loop");
  cmd->add_option("--max-iter-stage1", opt->max_iter_stage1,
                  "cap on stage 1 iterations");
  cmd->add_option("--max-iter-inner", opt->max_iter_inner,
                  "cap per stage 2 inner loop");
  cmd->add_option("--max-outer", opt->max_outer,
                  "cap on penalty escalations");
  cmd->add_flag("--accelerated", opt->accelerated,
                "curvature-aware stage 2 coordinator");
  cmd->add_flag("--baseline", opt->baseline,
                "also run the projection-based ADMM baseline");
  cmd->add_flag("--random-init", opt->random_init,
                "seeded random initial point and duals");
  cmd->add_option("--out", opt->out, "output directory");
}

RunConfig resolve_config(const CLI::App& cmd, const CliOptions& opt) {
  RunConfig config;
  if (!opt.config_path.empty()) {
    config = mixcaladin::load_config(opt.config_path);
    if (cmd.count("--problem") > 0) {
      const auto kind = mixcaladin::problem_kind_from_string(opt.problem);
      if (kind != config.problem) {
        config.problem = kind;
        config.instance.reset();  // anchors belong to the original kind
      }
    }
  } else {
    config = RunConfig::defaults_for(
        mixcaladin::problem_kind_from_string(opt.problem));
  }

  auto passed = [&](const char* flag) { return cmd.count(flag) > 0; };
  if (passed("--agents")) config.agents = opt.agents;
  if (passed("--nc")) config.nc = opt.nc;
  if (passed("--nd")) config.nd = opt.nd;
  if (passed("--rho1")) config.params.rho1 = opt.rho1;
  if (passed("--rho2")) config.params.rho2 = opt.rho2;
  if (passed("--alpha0")) config.params.alpha0 = opt.alpha0;
  if (passed("--beta")) config.params.beta = opt.beta;
  if (passed("--eps-stage1")) config.params.eps_stage1 = opt.eps_stage1;
  if (passed("--eps-inner")) config.params.eps_inner = opt.eps_inner;
  if (passed("--eps-outer")) config.params.eps_outer = opt.eps_outer;
  if (passed("--seed")) config.seed = opt.seed;
  if (passed("--max-iter")) {
    config.params.max_iter_stage1 = opt.max_iter;
    config.params.max_iter_inner = opt.max_iter;
  }
  if (passed("--max-iter-stage1"))
    config.params.max_iter_stage1 = opt.max_iter_stage1;
  if (passed("--max-iter-inner"))
    config.params.max_iter_inner = opt.max_iter_inner;
  if (passed("--max-outer")) config.params.max_outer = opt.max_outer;
  if (passed("--accelerated")) config.params.accelerated = true;
  if (passed("--baseline")) config.baseline = true;
  if (passed("--random-init")) config.random_init = true;
  if (passed("--out")) config.out = opt.out;
  config.validate();
  return config;
}

void print_report(const ExperimentResult& result) {
  const auto& s = result.summary;
  std::cout << "stage 1: " << s["stage1"]["iterations"] << " iteration(s), "
            << (result.stage1.converged ? "converged" : "hit cap")
            << ", relaxed objective "
            << mixcaladin::format_double(result.stage1.relaxed_objective)
            << "\n";
  std::cout << "stage 2: " << s["stage2"]["inner_iterations"]
            << " inner iteration(s), " << s["stage2"]["outer_bumps"]
            << " penalty escalation(s), objective "
            << mixcaladin::format_double(result.stage2.final_objective)
            << ", gamma "
            << mixcaladin::format_double(mixcaladin::gamma(result.stage2.z_star))
            << "\n";
  if (result.baseline) {
    std::cout << "baseline ADMM: " << result.baseline->iterations
              << " iteration(s), objective "
              << mixcaladin::format_double(result.baseline->objective) << "\n";
  }
  for (const auto& v : result.violations) {
    std::cout << "violated invariant: " << v << "\n";
  }
}

int run_and_write(const RunConfig& config, bool audit_mode) {
  ExperimentResult result = mixcaladin::run_experiment(config);
  if (!config.out.empty()) {
    mixcaladin::write_outputs(result, config.out);
  }
  print_report(result);
  if (!config.out.empty()) {
    std::cout << "outputs written to " << config.out << "\n";
  }

  int exit_code = result.exit_code();
  if (audit_mode) {
    for (const auto& check : mixcaladin::audit_experiment(result)) {
      std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.name << ": "
                << check.detail << "\n";
      if (!check.passed) {
        exit_code = 1;
      }
    }
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage distributed solver for consensus mixed-Boolean "
               "optimization, with a projection-based ADMM baseline"};
  app.require_subcommand(1);

  CliOptions run_opt, compare_opt, audit_opt;
  CLI::App* run_cmd =
      app.add_subcommand("run", "run the two-stage solver on one instance");
  add_common_options(run_cmd, &run_opt);
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "run the solver and the ADMM baseline on the same instance");
  add_common_options(compare_cmd, &compare_opt);
  CLI::App* audit_cmd = app.add_subcommand(
      "audit", "run and verify every run-level invariant");
  add_common_options(audit_cmd, &audit_opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return run_and_write(resolve_config(*run_cmd, run_opt), false);
    }
    if (compare_cmd->parsed()) {
      RunConfig config = resolve_config(*compare_cmd, compare_opt);
      config.baseline = true;
      return run_and_write(config, false);
    }
    RunConfig config = resolve_config(*audit_cmd, audit_opt);
    return run_and_write(config, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
