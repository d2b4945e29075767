// c4ucb: run conservative cascading bandit experiments, evaluate regret
// bounds, summarize run directories.

#include "c4ucb/config.hpp"
#include "c4ucb/csv_log.hpp"
#include "c4ucb/harness.hpp"
#include "c4ucb/regret_bounds.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

using c4ucb::ExperimentConfig;

ExperimentConfig base_config(const std::string& path) {
  return path.empty() ? c4ucb::config_from_json(nlohmann::json::object()) : c4ucb::load_config(path);
}

int cmd_run(const std::string& config_path, const std::string& policy, const std::vector<std::string>& grid,
            const std::string& seeds, const std::string& out_dir, const std::vector<std::string>& sets,
            bool paper_scale, unsigned workers) {
  ExperimentConfig config = base_config(config_path);
  if (paper_scale) c4ucb::apply_paper_scale(config);
  for (const auto& s : sets) {
    const auto axis = c4ucb::parse_grid_axis(s);
    if (axis.values.size() != 1) throw std::invalid_argument("--set takes a single value: '" + s + "'");
    c4ucb::apply_setting(config, axis.key, axis.values.front());
  }
  if (!policy.empty()) config.policy = c4ucb::parse_policy(policy);
  if (!seeds.empty()) config.seeds = c4ucb::parse_seed_list(seeds);
  if (!out_dir.empty()) config.output_path = out_dir;
  config.finalize();
  config.validate();

  std::vector<c4ucb::GridAxis> axes;
  for (const auto& g : grid) axes.push_back(c4ucb::parse_grid_axis(g));
  const auto points = c4ucb::expand_grid(config, axes);
  for (const auto& [label, cfg] : points) cfg.validate();

  const auto results = c4ucb::run_grid(points, config.output_path, workers);
  int failed = 0;
  for (const auto& r : results) {
    const auto& last = r.records.back();
    std::printf("%s seed=%llu cum_regret=%.6f ucb=%lld conservative=%lld coverage=%.4f budget_violations=%lld%s\n",
                r.label.c_str(), static_cast<unsigned long long>(r.seed), last.cum_regret,
                static_cast<long long>(last.n_ucb), static_cast<long long>(last.n_cons),
                static_cast<double>(r.diag.coverage_hits) / static_cast<double>(r.diag.coverage_rounds),
                static_cast<long long>(r.diag.budget_violations), r.ok() ? "" : " FAILED");
    for (const auto& f : r.diag.failures) std::fprintf(stderr, "  invariant violation: %s\n", f.c_str());
    failed += r.ok() ? 0 : 1;
  }
  std::printf("wrote %zu run logs to %s\n", results.size(), config.output_path.c_str());
  return failed ? 2 : 0;
}

int cmd_bound(const std::string& config_path, double pstar, double dl, double dh, long long horizon) {
  ExperimentConfig config = base_config(config_path);
  const c4ucb::BoundParams params = c4ucb::bound_params_for(config, {pstar, dl, dh});
  const auto mode = c4ucb::baseline_knowledge_of(config.policy);
  const auto b = c4ucb::theoretical_bound(params, horizon > 0 ? horizon : config.horizon, mode);
  nlohmann::json out{{"mode", mode == c4ucb::BaselineKnowledge::Known ? "known" : "unknown"},
                     {"horizon", horizon > 0 ? horizon : config.horizon},
                     {"regret_bound", b.regret_bound},
                     {"omega", b.omega},
                     {"d_T_bound", b.d_t_bound},
                     {"optimistic_term", b.optimistic_term},
                     {"conservative_term", b.conservative_term}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_summarize(const std::string& in_dir, const std::string& out_path) {
  const auto rows = c4ucb::summarize_dir(in_dir);
  c4ucb::write_summary_csv(rows, out_path);
  for (const auto& r : rows)
    std::printf("%s seeds=%zu cum_regret=%.4f±%.4f ucb=%.1f conservative=%.1f\n", r.grid_point.c_str(), r.seeds,
                r.mean_cum_regret, r.ci95_cum_regret, r.mean_ucb_steps, r.mean_conservative_steps);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative contextual combinatorial cascading bandit experiments"};
  app.require_subcommand(1);

  std::string config_path, policy, seeds, out_dir;
  std::vector<std::string> grid, sets;
  bool paper_scale = false;
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "run seeded experiments and write one CSV log per run");
  run->add_option("--config", config_path, "flat JSON configuration file")->check(CLI::ExistingFile);
  run->add_option("--policy", policy, "c3 | c4-known | c4-unknown-scalar | c4-unknown-linear");
  run->add_option("--grid", grid, "grid axis key=v1,v2,... (repeatable)");
  run->add_option("--seeds", seeds, "seed list: 'N' (0..N-1), '1,2,5' or '0-19'");
  run->add_option("--out", out_dir, "output directory for run logs");
  run->add_option("--set", sets, "override one config key: key=value (repeatable)");
  run->add_flag("--paper-scale", paper_scale, "T = 40000 with stale lower bounds");
  run->add_option("--workers", workers, "worker threads (default: hardware concurrency)");

  std::string bound_config;
  double pstar = 1.0, dl = 0.0, dh = 0.0;
  long long bound_horizon = 0;
  auto* bound = app.add_subcommand("bound", "evaluate the high-probability regret bound");
  bound->add_option("--config", bound_config, "flat JSON configuration file")->check(CLI::ExistingFile);
  bound->add_option("--pstar", pstar, "minimum full-observation probability p*")->required();
  bound->add_option("--dl", dl, "Delta_l")->required();
  bound->add_option("--dh", dh, "Delta_h")->required();
  bound->add_option("--horizon", bound_horizon, "horizon T (default: config horizon)");

  std::string in_dir, summary_out;
  auto* summarize = app.add_subcommand("summarize", "aggregate run logs per grid point");
  summarize->add_option("--in", in_dir, "directory of run logs")->required();
  summarize->add_option("--out", summary_out, "summary CSV path")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, policy, grid, seeds, out_dir, sets, paper_scale, workers);
    if (*bound) return cmd_bound(bound_config, pstar, dl, dh, bound_horizon);
    if (*summarize) return cmd_summarize(in_dir, summary_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
