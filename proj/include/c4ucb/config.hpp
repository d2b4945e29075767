#pragma once

// Experiment configuration: a flat JSON key-value document, overridable key by key.

#include "c4ucb/environment.hpp"
#include "c4ucb/policies.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace c4ucb {

struct ExperimentConfig {
  WorldConfig world;
  std::vector<double> gammas;  // empty -> all ones; one entry -> repeated K times
  PolicyKind policy = PolicyKind::C4Known;
  std::int64_t horizon = 10000;
  double epsilon = 0.5;
  double delta = 0.1;
  double lambda_reg = 0.1;
  double noise_r = 0.5;
  LowerBoundMode refresh_mode = LowerBoundMode::Refresh;
  std::vector<std::uint64_t> seeds = default_seeds(20);
  double alpha = 1.0;
  std::string output_path = "runs";
  /// Fail the configuration unless lambda >= C_gamma (the norm-sum envelope
  /// is always checked when that holds).
  bool require_norm_envelope = false;
  int reinvert_every = 1000;
  /// Baseline list contexts for c4-unknown-linear; generated when empty.
  std::vector<std::vector<double>> baseline_contexts;

  static std::vector<std::uint64_t> default_seeds(std::size_t n);

  /// Rebuilds world.discounts from gammas/k_max.
  void finalize();
  /// Throws std::invalid_argument describing the first violation.
  void validate() const;
};

/// Applies one flat key (e.g. "epsilon", "u0", "policy") to the config.
void apply_setting(ExperimentConfig& config, const std::string& key, const nlohmann::json& value);

ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Full-scale preset: T = 40000 with stale lower bounds.
void apply_paper_scale(ExperimentConfig& config);

/// A grid axis such as "epsilon=0.01,0.1,0.2".
struct GridAxis {
  std::string key;
  std::vector<nlohmann::json> values;
};
GridAxis parse_grid_axis(const std::string& text);

/// One configuration per point of the cartesian product of the axes, labelled
/// "policy=<p>__key=value__...".
std::vector<std::pair<std::string, ExperimentConfig>> expand_grid(const ExperimentConfig& base,
                                                                  const std::vector<GridAxis>& axes);

/// "1,2,5" or "0-19" or "20" (count).
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace c4ucb
