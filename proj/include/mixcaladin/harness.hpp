#pragma once

// Experiment orchestration: seeded instance generation, the full
// two-stage run (plus the ADMM baseline when requested), JSON config
// round-tripping, summary assembly, and the invariant audit. File
// layout per run directory: trace.csv, summary.json, config.resolved.json
// and, with the baseline enabled, trace_admm.csv.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixcaladin/admm.hpp"
#include "mixcaladin/core.hpp"
#include "mixcaladin/objectives.hpp"
#include "mixcaladin/stage1.hpp"
#include "mixcaladin/stage2.hpp"

namespace mixcaladin {

enum class ProblemKind { Convex, Nonconvex, QuadraticOracle };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

/// Full description of one experiment. Round-trips losslessly through
/// JSON (strict: unknown keys are rejected).
struct RunConfig {
  ProblemKind problem = ProblemKind::Convex;
  int agents = 20;
  Eigen::Index nc = 10;
  Eigen::Index nd = 10;
  AlgoParams params;
  std::uint64_t seed = 1;
  bool baseline = false;
  bool random_init = false;  // seeded random z0 / duals instead of zeros
  std::string out = "out";
  // Anchor vectors pinned in the resolved config so a run can be replayed
  // byte-for-byte even if the generator ever changes. Absent on input
  // configs; generation then derives them from the seed.
  std::optional<std::vector<SensorParams>> instance;

  void validate() const;

  /// Benchmark defaults per problem family: rho1 = rho2 = 10 with the
  /// averaging coordinator for the convex case, rho1 = rho2 = 1e5 with
  /// the curvature-weighted coordinator for the nonconvex case.
  static RunConfig defaults_for(ProblemKind kind);
};

nlohmann::json to_json(const SensorParams& p);
SensorParams sensor_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

struct GeneratedInstance {
  ProblemInstance problem;
  std::vector<SensorParams> sensors;  // empty for the quadratic kind
};

/// Builds the N agent objectives. The same seed yields bitwise-identical
/// parameters; per-agent draw order is zeta_alpha, zeta_beta, zeta_gamma.
GeneratedInstance generate_instance(const RunConfig& config);

struct ExperimentResult {
  RunConfig resolved;  // config with the instance block filled in
  Stage1Result stage1;
  Stage2Result stage2;
  std::optional<AdmmResult> baseline;
  std::optional<double> lipschitz_estimate;  // box estimate, nonconvex only
  bool iterates_within_lipschitz_box = true;
  nlohmann::json summary;
  std::vector<std::string> violations;  // enforced invariants that failed

  int exit_code() const { return violations.empty() ? 0 : 1; }
};

/// Runs stage I, stage II, and optionally the baseline; fills the summary
/// and the enforced-invariant verdicts. Does not touch the filesystem.
ExperimentResult run_experiment(const RunConfig& config);

/// Writes trace.csv, summary.json, config.resolved.json (and
/// trace_admm.csv when the baseline ran) into out_dir.
void write_outputs(const ExperimentResult& result,
                   const std::filesystem::path& out_dir);

struct AuditCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Re-derives the run-level invariants from a finished experiment:
/// trace/summary consistency, box membership, dual-sum residual, the
/// relaxation lower bound, and the stage 2 certificates.
std::vector<AuditCheck> audit_experiment(const ExperimentResult& result);

}  // namespace mixcaladin
