#pragma once

// Seeded experiment runner: rounds of context draw, policy step, cascade play
// and model/ledger update, with expected-reward regret accounting and
// per-round checks of the ellipsoid envelopes.

#include "c4ucb/config.hpp"
#include "c4ucb/regret_bounds.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace c4ucb {

struct RoundRecord {
  std::int64_t t = 0;
  StepType step_type = StepType::Ucb;
  SuperArm arm;  // empty on conservative rounds
  double f_expected = 0.0;
  double f_star = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double cum_reward = 0.0;  // cumulative expected reward
  double budget_lhs = 0.0;
  double budget_rhs = 0.0;
  double beta = 0.0;
  double log_det = 0.0;
  std::int64_t n_ucb = 0;
  std::int64_t n_cons = 0;

  // in-memory diagnostics, not part of the CSV schema
  double full_obs_prob = std::numeric_limits<double>::quiet_NaN();  // NaN on conservative rounds
  bool theta_covered = true;
};

struct RunDiagnostics {
  std::int64_t coverage_hits = 0;
  std::int64_t coverage_rounds = 0;
  bool norm_envelope_checked = false;
  std::int64_t norm_envelope_violations = 0;
  std::int64_t det_envelope_violations = 0;
  std::int64_t det_growth_violations = 0;
  std::int64_t gap_violations = 0;  // UCB-LCB gap of the played list
  std::int64_t budget_violations = 0;
  std::int64_t first_budget_violation = 0;
  double norm_sum = 0.0;
  double max_inverse_error = 0.0;
  double realized_cum_reward = 0.0;
  double baseline_value = 0.0;  // u0 (or f(A0, w) for the linear baseline)
  std::vector<std::string> failures;
};

struct RunResult {
  std::string label;
  std::uint64_t seed = 0;
  ExperimentConfig config;
  std::vector<RoundRecord> records;
  RunDiagnostics diag;

  bool ok() const { return diag.failures.empty(); }
  double final_cum_regret() const { return records.empty() ? 0.0 : records.back().cum_regret; }
};

/// One seeded run of `config` (config.seeds is ignored).
RunResult run_seed(const ExperimentConfig& config, std::uint64_t seed, const std::string& label = "");

/// One run per seed in config.seeds; validates before any round runs.
std::vector<RunResult> run_experiment(const ExperimentConfig& config);

/// Runs every (grid point, seed) pair on a worker pool and, when
/// `output_dir` is non-empty, writes one CSV per run. Results are ordered by
/// (label, seed).
std::vector<RunResult> run_grid(const std::vector<std::pair<std::string, ExperimentConfig>>& points,
                                const std::string& output_dir, unsigned workers = 0);

std::string run_file_name(const std::string& label, std::uint64_t seed);

struct EmpiricalConstants {
  double p_star = 1.0;
  double delta_l = 0.0;
  double delta_h = 0.0;
};

/// p* as the minimum full-observation probability of the played lists;
/// Delta_l / Delta_h as min / max of alpha f* - u0 over all rounds.
EmpiricalConstants empirical_pstar_delta(std::span<const RunResult> runs);

/// Bound parameters for a config with measured p*, Delta_l, Delta_h.
BoundParams bound_params_for(const ExperimentConfig& config, const EmpiricalConstants& measured);
BaselineKnowledge baseline_knowledge_of(PolicyKind kind);

struct SummaryRow {
  std::string grid_point;
  std::size_t seeds = 0;
  double mean_cum_regret = 0.0;
  double ci95_cum_regret = 0.0;
  double min_cum_regret = 0.0;
  double max_cum_regret = 0.0;
  double mean_avg_regret = 0.0;
  double mean_ucb_steps = 0.0;
  double mean_conservative_steps = 0.0;
};

/// Aggregates the final rows of every run CSV in `input_dir` by grid point.
std::vector<SummaryRow> summarize_dir(const std::string& input_dir);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

/// Orders "epsilon=0.01" before "epsilon=0.1" before "epsilon=0.2" by
/// comparing embedded numbers numerically.
bool natural_less(const std::string& a, const std::string& b);

}  // namespace c4ucb
