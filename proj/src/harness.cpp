#include "mixcaladin/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "mixcaladin/rng.hpp"
#include "mixcaladin/trace_io.hpp"

namespace mixcaladin {

namespace {

using nlohmann::json;

constexpr int kAdmmMaxIter = 10000;
constexpr double kAdmmTol = 1e-6;
constexpr double kLowerBoundSlack = 1e-8;
constexpr double kDualSumTol = 1e-8;
constexpr double kLipschitzBoxHalfWidth = 3.0;
constexpr int kLipschitzSamplesPerAgent = 64;

json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const json& j, const char* ctx) {
  if (!j.is_array()) {
    throw std::invalid_argument(std::string(ctx) + ": expected an array");
  }
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

void require_known_keys(const json& j,
                        std::initializer_list<const char*> allowed,
                        const char* ctx) {
  for (const auto& item : j.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return item.key() == k; });
    if (!known) {
      throw std::invalid_argument(std::string(ctx) + ": unknown key '" +
                                  item.key() + "'");
    }
  }
}

template <typename T>
void read_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Convex:
      return "convex";
    case ProblemKind::Nonconvex:
      return "nonconvex";
    case ProblemKind::QuadraticOracle:
      return "quadratic-oracle";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "convex") return ProblemKind::Convex;
  if (s == "nonconvex") return ProblemKind::Nonconvex;
  if (s == "quadratic-oracle") return ProblemKind::QuadraticOracle;
  throw std::invalid_argument("unknown problem kind '" + s + "'");
}

void RunConfig::validate() const {
  if (agents < 1) {
    throw std::invalid_argument("RunConfig: agents must be >= 1");
  }
  if (nc < 0 || nd < 0) {
    throw std::invalid_argument("RunConfig: negative dimension");
  }
  if (problem == ProblemKind::Nonconvex && nc != nd) {
    throw std::invalid_argument(
        "RunConfig: the nonconvex objective pairs coordinates element-wise "
        "and needs nc == nd");
  }
  params.validate();
  if (instance) {
    if (static_cast<int>(instance->size()) != agents) {
      throw std::invalid_argument(
          "RunConfig: instance block length must equal agents");
    }
    for (const auto& p : *instance) {
      if (p.zeta_alpha.size() != nc || p.zeta_beta.size() != nd ||
          p.zeta_gamma.size() != nd) {
        throw std::invalid_argument(
            "RunConfig: instance block dimensions mismatch");
      }
    }
  }
}

RunConfig RunConfig::defaults_for(ProblemKind kind) {
  RunConfig config;
  config.problem = kind;
  switch (kind) {
    case ProblemKind::Convex:
      config.params.rho1 = 10.0;
      config.params.rho2 = 10.0;
      config.params.convex_coordinator = true;
      break;
    case ProblemKind::Nonconvex:
      config.params.rho1 = 1e5;
      config.params.rho2 = 1e5;
      config.params.convex_coordinator = false;
      // With rho2 this large the coordinator moves z by ~alpha/(N rho2)
      // per step, so mid-range penalty levels would otherwise spend tens
      // of thousands of steps above eps_inner; a short inner budget hands
      // control back to the escalation instead.
      config.params.max_iter_inner = 100;
      break;
    case ProblemKind::QuadraticOracle:
      config.params.rho1 = 10.0;
      config.params.rho2 = 10.0;
      config.params.convex_coordinator = false;
      break;
  }
  return config;
}

json to_json(const SensorParams& p) {
  json j;
  j["zeta_alpha"] = vector_to_json(p.zeta_alpha);
  j["zeta_beta"] = vector_to_json(p.zeta_beta);
  j["zeta_gamma"] = vector_to_json(p.zeta_gamma);
  return j;
}

SensorParams sensor_params_from_json(const json& j) {
  require_known_keys(j, {"zeta_alpha", "zeta_beta", "zeta_gamma"},
                     "SensorParams");
  SensorParams p;
  p.zeta_alpha = vector_from_json(j.at("zeta_alpha"), "zeta_alpha");
  p.zeta_beta = vector_from_json(j.at("zeta_beta"), "zeta_beta");
  p.zeta_gamma = vector_from_json(j.at("zeta_gamma"), "zeta_gamma");
  return p;
}

json to_json(const RunConfig& config) {
  json p;
  p["rho1"] = config.params.rho1;
  p["rho2"] = config.params.rho2;
  p["alpha0"] = config.params.alpha0;
  p["beta"] = config.params.beta;
  p["eps_stage1"] = config.params.eps_stage1;
  p["eps_inner"] = config.params.eps_inner;
  p["eps_outer"] = config.params.eps_outer;
  p["max_iter_stage1"] = config.params.max_iter_stage1;
  p["max_iter_inner"] = config.params.max_iter_inner;
  p["max_outer"] = config.params.max_outer;
  p["accelerated"] = config.params.accelerated;
  p["convex_coordinator"] = config.params.convex_coordinator;

  json j;
  j["problem"] = to_string(config.problem);
  j["agents"] = config.agents;
  j["nc"] = static_cast<std::int64_t>(config.nc);
  j["nd"] = static_cast<std::int64_t>(config.nd);
  j["params"] = std::move(p);
  j["seed"] = config.seed;
  j["baseline"] = config.baseline;
  j["random_init"] = config.random_init;
  j["out"] = config.out;
  if (config.instance) {
    json arr = json::array();
    for (const auto& s : *config.instance) {
      arr.push_back(to_json(s));
    }
    j["instance"] = std::move(arr);
  }
  return j;
}

RunConfig run_config_from_json(const json& j) {
  require_known_keys(j,
                     {"problem", "agents", "nc", "nd", "params", "seed",
                      "baseline", "random_init", "out", "instance"},
                     "RunConfig");

  ProblemKind kind = ProblemKind::Convex;
  if (j.contains("problem")) {
    kind = problem_kind_from_string(j.at("problem").get<std::string>());
  }
  RunConfig config = RunConfig::defaults_for(kind);

  read_if_present(j, "agents", config.agents);
  std::int64_t nc = config.nc;
  std::int64_t nd = config.nd;
  read_if_present(j, "nc", nc);
  read_if_present(j, "nd", nd);
  config.nc = nc;
  config.nd = nd;
  read_if_present(j, "seed", config.seed);
  read_if_present(j, "baseline", config.baseline);
  read_if_present(j, "random_init", config.random_init);
  read_if_present(j, "out", config.out);

  if (j.contains("params")) {
    const json& p = j.at("params");
    require_known_keys(p,
                       {"rho1", "rho2", "alpha0", "beta", "eps_stage1",
                        "eps_inner", "eps_outer", "max_iter_stage1",
                        "max_iter_inner", "max_outer", "accelerated",
                        "convex_coordinator"},
                       "AlgoParams");
    read_if_present(p, "rho1", config.params.rho1);
    read_if_present(p, "rho2", config.params.rho2);
    read_if_present(p, "alpha0", config.params.alpha0);
    read_if_present(p, "beta", config.params.beta);
    read_if_present(p, "eps_stage1", config.params.eps_stage1);
    read_if_present(p, "eps_inner", config.params.eps_inner);
    read_if_present(p, "eps_outer", config.params.eps_outer);
    read_if_present(p, "max_iter_stage1", config.params.max_iter_stage1);
    read_if_present(p, "max_iter_inner", config.params.max_iter_inner);
    read_if_present(p, "max_outer", config.params.max_outer);
    read_if_present(p, "accelerated", config.params.accelerated);
    read_if_present(p, "convex_coordinator", config.params.convex_coordinator);
  }

  if (j.contains("instance")) {
    std::vector<SensorParams> sensors;
    for (const auto& item : j.at("instance")) {
      sensors.push_back(sensor_params_from_json(item));
    }
    config.instance = std::move(sensors);
  }

  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  return run_config_from_json(json::parse(read_text_file(path)));
}

GeneratedInstance generate_instance(const RunConfig& config) {
  config.validate();
  GeneratedInstance gen;
  gen.problem.num_agents = config.agents;
  gen.problem.n_c = config.nc;
  gen.problem.n_d = config.nd;

  if (config.problem == ProblemKind::QuadraticOracle) {
    SeededRng rng(config.seed);
    const Eigen::Index n = config.nc + config.nd;
    double worst_l = 0.0;
    for (int i = 0; i < config.agents; ++i) {
      Eigen::MatrixXd A(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
          A(r, c) = rng.normal();
        }
      }
      Eigen::MatrixXd Q = A.transpose() * A / static_cast<double>(n) +
                          0.5 * Eigen::MatrixXd::Identity(n, n);
      Eigen::VectorXd c = rng.normal_vector(n);
      auto obj = quadratic_objective(std::move(Q), std::move(c));
      worst_l = std::max(worst_l, obj->lipschitz_bound().value());
      gen.problem.objectives.push_back(std::move(obj));
    }
    gen.problem.lipschitz_bound = worst_l;
    gen.problem.validate();
    return gen;
  }

  if (config.instance) {
    gen.sensors = *config.instance;
  } else {
    SeededRng rng(config.seed);
    gen.sensors.reserve(config.agents);
    for (int i = 0; i < config.agents; ++i) {
      SensorParams p;
      p.zeta_alpha = rng.normal_vector(config.nc);
      p.zeta_beta = rng.normal_vector(config.nd);
      p.zeta_gamma = rng.normal_vector(config.nd);
      gen.sensors.push_back(std::move(p));
    }
  }

  for (const auto& p : gen.sensors) {
    gen.problem.objectives.push_back(config.problem == ProblemKind::Convex
                                         ? convex_sensor_objective(p)
                                         : nonconvex_sensor_objective(p));
  }
  if (config.problem == ProblemKind::Convex) {
    gen.problem.lipschitz_bound = 1.0;  // identity Hessians
  }
  gen.problem.validate();
  return gen;
}

namespace {

int count_rows(const std::vector<TraceRecord>& trace, Stage stage) {
  return static_cast<int>(
      std::count_if(trace.begin(), trace.end(),
                    [&](const TraceRecord& r) { return r.stage == stage; }));
}

bool all_iterates_within(const std::vector<TraceRecord>& trace,
                         double half_width) {
  for (const auto& rec : trace) {
    if (rec.z.stacked().cwiseAbs().maxCoeff() > half_width) {
      return false;
    }
  }
  return true;
}

bool problem_is_convex(const ProblemInstance& problem) {
  return std::all_of(problem.objectives.begin(), problem.objectives.end(),
                     [](const ObjectivePtr& o) { return o->is_convex(); });
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();
  GeneratedInstance gen = generate_instance(config);

  ExperimentResult result;
  result.resolved = config;
  if (config.problem != ProblemKind::QuadraticOracle) {
    result.resolved.instance = gen.sensors;
  }

  const Eigen::Index dim = gen.problem.dim();
  MixedVectorXd z0(config.nc, config.nd);
  std::vector<Eigen::VectorXd> lambda0(config.agents,
                                       Eigen::VectorXd::Zero(dim));
  if (config.random_init) {
    SeededRng rng(split_seed(config.seed, 1));
    z0 = MixedVectorXd::from_stacked(rng.normal_vector(dim), config.nc);
    for (auto& l : lambda0) {
      l = rng.normal_vector(dim);
    }
  }

  result.stage1 = run_stage1(gen.problem, config.params, z0, lambda0);
  result.stage2 = run_stage2(gen.problem, config.params, result.stage1.z_star);

  std::optional<double> lipschitz = gen.problem.lipschitz_bound;
  if (!lipschitz) {
    // No analytic bound; estimate over a compact box and record whether
    // the stage 2 iterates actually stayed inside it.
    const Box box = Box::cube(dim, -kLipschitzBoxHalfWidth,
                              kLipschitzBoxHalfWidth);
    double worst = 0.0;
    for (int i = 0; i < config.agents; ++i) {
      worst = std::max(worst, estimate_lipschitz(
                                  *gen.problem.objectives[i], box,
                                  kLipschitzSamplesPerAgent,
                                  split_seed(config.seed, 1000 + i)));
    }
    result.lipschitz_estimate = worst;
    result.iterates_within_lipschitz_box =
        all_iterates_within(result.stage2.trace, kLipschitzBoxHalfWidth);
  }
  const double l_bound = lipschitz ? *lipschitz : *result.lipschitz_estimate;
  const bool enforce_energy =
      config.params.rho2 > l_bound &&
      (lipschitz.has_value() || result.iterates_within_lipschitz_box);

  if (config.baseline) {
    result.baseline = run_admm_projected(gen.problem, config.params.rho1,
                                         kAdmmMaxIter, kAdmmTol);
  }

  const bool convex = problem_is_convex(gen.problem);
  if (result.stage2.lemma1_violations > 0) {
    result.violations.push_back("lemma1_descent_inequality");
  }
  if (enforce_energy && result.stage2.energy_violations > 0) {
    result.violations.push_back("energy_monotone_descent");
  }
  if (convex && result.stage1.relaxed_objective >
                    result.stage2.final_objective + kLowerBoundSlack) {
    result.violations.push_back("relaxation_lower_bound");
  }
  if (result.stage1.max_dual_sum_norm > kDualSumTol) {
    result.violations.push_back("dual_sum_zero");
  }

  json summary;
  summary["problem"] = to_string(config.problem);
  summary["agents"] = config.agents;
  summary["nc"] = static_cast<std::int64_t>(config.nc);
  summary["nd"] = static_cast<std::int64_t>(config.nd);
  summary["seed"] = config.seed;
  summary["stage1"] = {
      {"iterations", result.stage1.iterations},
      {"converged", result.stage1.converged},
      {"relaxed_objective", result.stage1.relaxed_objective},
      {"final_step_norm", result.stage1.trace.empty()
                              ? 0.0
                              : result.stage1.trace.back().step_norm},
      {"max_dual_sum_norm", result.stage1.max_dual_sum_norm},
  };
  summary["stage2"] = {
      {"inner_iterations", result.stage2.inner_iterations_total},
      {"outer_bumps", result.stage2.outer_bumps},
      {"capped_inner_loops", result.stage2.capped_inner_loops},
      {"final_alpha", result.stage2.final_alpha},
      {"final_gamma", gamma(result.stage2.z_star)},
      {"objective", result.stage2.final_objective},
      {"lemma1_violations", result.stage2.lemma1_violations},
      {"energy_violations", result.stage2.energy_violations},
  };
  summary["lipschitz_bound"] =
      lipschitz ? json(*lipschitz) : json(*result.lipschitz_estimate);
  summary["lipschitz_is_estimate"] = !lipschitz.has_value();
  summary["iterates_within_lipschitz_box"] =
      result.iterates_within_lipschitz_box;
  summary["trace_rows"] = {
      {"stage1", count_rows(result.stage1.trace, Stage::Stage1)},
      {"stage2_inner", count_rows(result.stage2.trace, Stage::Stage2Inner)},
      {"stage2_bump",
       count_rows(result.stage2.trace, Stage::Stage2OuterBump)},
  };
  summary["violations"] = result.violations;
  if (result.baseline) {
    summary["baseline"] = {
        {"iterations", result.baseline->iterations},
        {"converged", result.baseline->converged},
        {"objective", result.baseline->objective},
    };
    summary["comparison"] = {
        {"caladin_objective", result.stage2.final_objective},
        {"admm_objective", result.baseline->objective},
        {"caladin_leq_admm",
         result.stage2.final_objective <= result.baseline->objective},
    };
  }
  result.summary = std::move(summary);
  return result;
}

void write_outputs(const ExperimentResult& result,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::vector<TraceRecord> trace = result.stage1.trace;
  trace.insert(trace.end(), result.stage2.trace.begin(),
               result.stage2.trace.end());
  write_text_file(out_dir / "trace.csv", to_csv(trace));
  if (result.baseline) {
    write_text_file(out_dir / "trace_admm.csv", to_csv(result.baseline->trace));
  }
  write_text_file(out_dir / "summary.json", result.summary.dump(2) + "\n");
  write_text_file(out_dir / "config.resolved.json",
                  to_json(result.resolved).dump(2) + "\n");
}

std::vector<AuditCheck> audit_experiment(const ExperimentResult& result) {
  std::vector<AuditCheck> checks;
  auto add = [&](std::string name, bool passed, std::string detail) {
    checks.push_back({std::move(name), passed, std::move(detail)});
  };

  const auto& s1 = result.stage1;
  const auto& s2 = result.stage2;

  add("trace_rows_match_counts",
      count_rows(s1.trace, Stage::Stage1) == s1.iterations &&
          count_rows(s2.trace, Stage::Stage2Inner) ==
              s2.inner_iterations_total &&
          count_rows(s2.trace, Stage::Stage2OuterBump) == s2.outer_bumps,
      "one trace row per recorded iteration");

  bool in_box = true;
  for (const auto& rec : s2.trace) {
    if (rec.z.n_disc() > 0 &&
        ((rec.z.disc().array() < 0.0).any() ||
         (rec.z.disc().array() > 1.0).any())) {
      in_box = false;
      break;
    }
  }
  add("stage2_box_invariance", in_box,
      "every stage 2 iterate keeps the Boolean block in [0,1]");

  add("dual_sum_zero", s1.max_dual_sum_norm <= kDualSumTol,
      "max ||sum_i lambda_i|| = " + format_double(s1.max_dual_sum_norm));

  const bool rounded_boolean =
      s2.z_rounded.n_disc() == 0 ||
      ((s2.z_rounded.disc().array() == 0.0) ||
       (s2.z_rounded.disc().array() == 1.0))
          .all();
  add("rounded_point_boolean", rounded_boolean,
      "disc block of the rounded solution is exactly {0,1}");

  add("boolean_residual_resolved",
      gamma(s2.z_star) < result.resolved.params.eps_outer,
      "final gamma = " + format_double(gamma(s2.z_star)));

  // Penalty ladder: non-decreasing, multiplying by exactly beta per bump.
  bool ladder_ok = true;
  double expected_alpha = result.resolved.params.alpha0;
  double last_alpha = 0.0;
  for (const auto& rec : s2.trace) {
    if (rec.stage == Stage::Stage2OuterBump) {
      expected_alpha *= result.resolved.params.beta;
      if (rec.alpha != expected_alpha) {
        ladder_ok = false;
      }
    } else if (rec.alpha != expected_alpha) {
      ladder_ok = false;
    }
    if (rec.alpha < last_alpha) {
      ladder_ok = false;
    }
    last_alpha = rec.alpha;
  }
  add("alpha_ladder", ladder_ok,
      "alpha multiplies by beta at each escalation and never decreases");

  add("lemma1_zero_violations", s2.lemma1_violations == 0,
      std::to_string(s2.lemma1_violations) + " violation(s)");

  const double l_bound = result.resolved.problem == ProblemKind::Nonconvex
                             ? result.lipschitz_estimate.value_or(0.0)
                             : result.summary.at("lipschitz_bound").get<double>();
  const bool enforce_energy =
      result.resolved.params.rho2 > l_bound &&
      result.iterates_within_lipschitz_box;
  add("energy_monotone_descent",
      !enforce_energy || s2.energy_violations == 0,
      enforce_energy
          ? std::to_string(s2.energy_violations) + " violation(s)"
          : "not enforced (rho2 <= L or iterates left the sampled box); " +
                std::to_string(s2.energy_violations) + " counted");

  const bool convex = result.resolved.problem != ProblemKind::Nonconvex;
  const bool bound_holds =
      s1.relaxed_objective <= s2.final_objective + kLowerBoundSlack;
  add("relaxation_lower_bound", !convex || bound_holds,
      (convex ? "enforced: " : "logged only (nonconvex): ") +
          format_double(s1.relaxed_objective) + " vs rounded " +
          format_double(s2.final_objective));

  return checks;
}

}  // namespace mixcaladin
