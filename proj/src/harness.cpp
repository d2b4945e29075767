#include "c4ucb/harness.hpp"

#include "c4ucb/csv_log.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace c4ucb {

namespace {

constexpr double kEnvelopeSlack = 1e-9;
constexpr double kInverseTolerance = 1e-6;
constexpr int kInverseCheckEvery = 100;

Eigen::MatrixXd baseline_contexts_for(const ExperimentConfig& config, const World& world) {
  if (config.policy != PolicyKind::C4UnknownLinear) return {};
  if (config.baseline_contexts.empty()) return world.draw_baseline_contexts(config.world.k_max);
  Eigen::MatrixXd out(world.dim(), static_cast<Eigen::Index>(config.baseline_contexts.size()));
  for (std::size_t a = 0; a < config.baseline_contexts.size(); ++a)
    out.col(static_cast<Eigen::Index>(a)) =
        Eigen::Map<const Eigen::VectorXd>(config.baseline_contexts[a].data(), world.dim());
  return out;
}

Eigen::VectorXd positional_weights(const Eigen::VectorXd& weights, const SuperArm& arm) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(arm.size()));
  for (std::size_t k = 0; k < arm.size(); ++k)
    out(static_cast<Eigen::Index>(k)) = weights(static_cast<Eigen::Index>(arm[k]));
  return out;
}

}  // namespace

RunResult run_seed(const ExperimentConfig& config_in, std::uint64_t seed, const std::string& label) {
  ExperimentConfig config = config_in;
  config.finalize();
  config.validate();
  config.world.seed = seed;

  const World world(config.world);
  const RewardSpec spec = RewardSpec::disjunctive(config.world.discounts);
  const int d = world.dim();
  const double c_gamma = config.world.discounts.c_gamma();

  AgentConfig ac;
  ac.kind = config.policy;
  ac.epsilon = config.epsilon;
  ac.lower_bounds = config.refresh_mode;
  ac.model = EllipsoidParams{config.lambda_reg, config.noise_r, config.delta, config.reinvert_every};
  ac.horizon = config.horizon;
  ac.spec = spec;
  ac.baseline_contexts = baseline_contexts_for(config, world);

  double baseline_value = config.world.u0;
  if (config.policy == PolicyKind::C4UnknownLinear) {
    const Eigen::VectorXd w0 = (ac.baseline_contexts.transpose() * world.theta_star()).array().max(0.0).min(1.0).matrix();
    baseline_value = reward_positional(spec, w0);
  }
  ac.u0 = baseline_value;

  Agent agent(ac, d);

  RunResult result;
  result.label = label;
  result.seed = seed;
  result.config = config;
  result.records.reserve(static_cast<std::size_t>(config.horizon));
  RunDiagnostics& diag = result.diag;
  diag.baseline_value = baseline_value;
  diag.norm_envelope_checked = config.lambda_reg >= c_gamma;

  const double eps_budget = config.policy == PolicyKind::C3 ? config.epsilon : agent.ledger().epsilon();
  double cum_regret = 0.0;
  double cum_reward = 0.0;

  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    const RoundContexts rc = world.draw_contexts(t);
    const StepDecision decision = agent.decide(rc);

    const SuperArm best = greedy_oracle(spec, rc.true_weights, spec.discounts.size());
    const double f_star = std::max(reward(spec, best, rc.true_weights), baseline_value);

    RoundRecord rec;
    rec.t = t;
    rec.step_type = decision.type;
    rec.f_star = f_star;
    rec.budget_lhs = decision.budget_lhs;
    rec.budget_rhs = decision.budget_rhs;

    if (decision.type == StepType::Ucb) {
      const SuperArm& arm = decision.candidate;
      const CascadeFeedback fb = world.play(rc, arm);

      double gap_envelope = 0.0;
      for (std::size_t k = 0; k < arm.size(); ++k)
        gap_envelope += spec.discounts[k] * decision.bounds.radius(static_cast<Eigen::Index>(arm[k]));
      gap_envelope *= 4.0 * spec.lipschitz_b;
      if (decision.candidate_upper - decision.candidate_lower > gap_envelope + 1e-12) ++diag.gap_violations;

      for (int k = 0; k < fb.stop_pos; ++k) {
        const double g = spec.discounts[static_cast<std::size_t>(k)];
        diag.norm_sum += g * g * agent.model().inv_norm_sq(rc.contexts.col(static_cast<Eigen::Index>(arm[static_cast<std::size_t>(k)])));
      }

      const UpdateReport report = agent.learn(rc, decision, fb);
      if (report.log_det_after < report.log_det_before) ++diag.det_growth_violations;

      const Eigen::VectorXd pos = positional_weights(rc.true_weights, arm);
      rec.arm = arm;
      rec.f_expected = reward_positional(spec, pos);
      rec.full_obs_prob = full_observation_probability(pos);
      diag.realized_cum_reward += fb.clicked ? spec.discounts[static_cast<std::size_t>(fb.stop_pos - 1)] : 0.0;
    } else {
      std::optional<double> sample;
      if (config.policy == PolicyKind::C4UnknownScalar) sample = world.baseline_reward_sample(t);
      agent.hold(t, sample);
      rec.f_expected = baseline_value;
      diag.realized_cum_reward += sample.value_or(baseline_value);
    }

    const Ellipsoid& model = agent.model();
    const auto n_upd = static_cast<double>(agent.ledger().n_ucb());
    if (model.log_det() > d * std::log(config.lambda_reg + c_gamma * n_upd / d) + kEnvelopeSlack)
      ++diag.det_envelope_violations;
    if (diag.norm_envelope_checked &&
        diag.norm_sum > 2.0 * d * std::log1p(c_gamma * n_upd / (config.lambda_reg * d)) + kEnvelopeSlack)
      ++diag.norm_envelope_violations;
    if (t % kInverseCheckEvery == 0 || t == config.horizon)
      diag.max_inverse_error = std::max(diag.max_inverse_error, model.inverse_error());

    rec.theta_covered = model.confidence_contains(world.theta_star());
    ++diag.coverage_rounds;
    if (rec.theta_covered) ++diag.coverage_hits;

    rec.inst_regret = config.alpha * f_star - rec.f_expected;
    cum_regret += rec.inst_regret;
    cum_reward += rec.f_expected;
    rec.cum_regret = cum_regret;
    rec.cum_reward = cum_reward;
    rec.beta = model.beta();
    rec.log_det = model.log_det();
    rec.n_ucb = agent.ledger().n_ucb();
    rec.n_cons = agent.ledger().n_cons();

    if (cum_reward < (1.0 - eps_budget) * baseline_value * static_cast<double>(t) - kEnvelopeSlack) {
      if (diag.budget_violations == 0) diag.first_budget_violation = t;
      ++diag.budget_violations;
    }
    result.records.push_back(std::move(rec));
  }

  if (diag.det_growth_violations) diag.failures.push_back("ln det V decreased after an update");
  if (diag.det_envelope_violations) diag.failures.push_back("det V exceeded (lambda + C_gamma t/d)^d");
  if (diag.norm_envelope_violations)
    diag.failures.push_back("sum of squared V^-1 norms exceeded 2 d ln(1 + C_gamma t/(lambda d))");
  if (diag.gap_violations) diag.failures.push_back("UCB-LCB gap exceeded 4 B sum gamma_k beta ||x||");
  if (diag.max_inverse_error > kInverseTolerance) diag.failures.push_back("V V^-1 drifted from identity");
  return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& config_in) {
  ExperimentConfig config = config_in;
  config.finalize();
  config.validate();
  std::vector<RunResult> out;
  out.reserve(config.seeds.size());
  for (auto seed : config.seeds) out.push_back(run_seed(config, seed, "policy=" + to_string(config.policy)));
  return out;
}

std::string run_file_name(const std::string& label, std::uint64_t seed) {
  return label + "__seed" + std::to_string(seed) + ".csv";
}

std::vector<RunResult> run_grid(const std::vector<std::pair<std::string, ExperimentConfig>>& points,
                                const std::string& output_dir, unsigned workers) {
  struct Job {
    std::size_t point;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    ExperimentConfig c = points[p].second;
    c.finalize();
    c.validate();
    for (auto s : c.seeds) jobs.push_back({p, s});
  }
  if (!output_dir.empty()) std::filesystem::create_directories(output_dir);

  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto& [label, cfg] = points[jobs[i].point];
        results[i] = run_seed(cfg, jobs[i].seed, label);
        if (!output_dir.empty())
          write_csv(results[i].records,
                    (std::filesystem::path(output_dir) / run_file_name(label, jobs[i].seed)).string());
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  std::stable_sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
    if (a.label != b.label) return natural_less(a.label, b.label);
    return a.seed < b.seed;
  });
  return results;
}

EmpiricalConstants empirical_pstar_delta(std::span<const RunResult> runs) {
  if (runs.empty()) throw std::invalid_argument("need at least one completed run");
  EmpiricalConstants c;
  c.delta_l = std::numeric_limits<double>::infinity();
  c.delta_h = -std::numeric_limits<double>::infinity();
  for (const auto& run : runs) {
    for (const auto& r : run.records) {
      if (r.step_type == StepType::Ucb && !std::isnan(r.full_obs_prob)) c.p_star = std::min(c.p_star, r.full_obs_prob);
      const double gap = run.config.alpha * r.f_star - run.diag.baseline_value;
      c.delta_l = std::min(c.delta_l, gap);
      c.delta_h = std::max(c.delta_h, gap);
    }
  }
  if (!std::isfinite(c.delta_l)) c.delta_l = c.delta_h = 0.0;
  return c;
}

BaselineKnowledge baseline_knowledge_of(PolicyKind kind) {
  return kind == PolicyKind::C4UnknownScalar || kind == PolicyKind::C4UnknownLinear ? BaselineKnowledge::Unknown
                                                                                     : BaselineKnowledge::Known;
}

BoundParams bound_params_for(const ExperimentConfig& config, const EmpiricalConstants& measured) {
  BoundParams p;
  p.b = 1.0;
  p.r = config.noise_r;
  p.k = config.world.k_max;
  p.d = config.world.dim();
  p.c_gamma = config.world.discounts.c_gamma();
  p.lambda = config.lambda_reg;
  p.p_star = measured.p_star;
  p.epsilon = config.epsilon;
  p.u0 = config.world.u0;
  p.delta_l = measured.delta_l;
  p.delta_h = measured.delta_h;
  p.alpha = config.alpha;
  p.gamma1 = config.world.discounts[0];
  return p;
}

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  auto num_start = [](const std::string& s, std::size_t k) {
    return std::isdigit(static_cast<unsigned char>(s[k])) ||
           (s[k] == '-' && k + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[k + 1])) &&
            (k == 0 || s[k - 1] == '='));
  };
  while (i < a.size() && j < b.size()) {
    if (num_start(a, i) && num_start(b, j)) {
      char* ea = nullptr;
      char* eb = nullptr;
      const double va = std::strtod(a.c_str() + i, &ea);
      const double vb = std::strtod(b.c_str() + j, &eb);
      if (va != vb) return va < vb;
      i = static_cast<std::size_t>(ea - a.c_str());
      j = static_cast<std::size_t>(eb - b.c_str());
      continue;
    }
    if (a[i] != b[j]) return a[i] < b[j];
    ++i;
    ++j;
  }
  return a.size() - i < b.size() - j;
}

std::vector<SummaryRow> summarize_dir(const std::string& input_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(input_dir)) throw std::runtime_error("'" + input_dir + "' is not a directory");
  std::map<std::string, std::vector<RoundRecord>, decltype(&natural_less)> finals(&natural_less);
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const std::string name = entry.path().stem().string();
    const auto pos = name.rfind("__seed");
    if (pos == std::string::npos) continue;
    auto records = read_csv(entry.path().string());
    if (records.empty()) throw std::runtime_error(entry.path().string() + ": run log has no rounds");
    finals[name.substr(0, pos)].push_back(records.back());
  }
  if (finals.empty()) throw std::runtime_error("no run logs (*__seed<N>.csv) found in '" + input_dir + "'");

  std::vector<SummaryRow> rows;
  for (const auto& [label, last] : finals) {
    SummaryRow row;
    row.grid_point = label;
    row.seeds = last.size();
    const double n = static_cast<double>(last.size());
    row.min_cum_regret = std::numeric_limits<double>::infinity();
    row.max_cum_regret = -std::numeric_limits<double>::infinity();
    for (const auto& r : last) {
      row.mean_cum_regret += r.cum_regret / n;
      row.mean_avg_regret += r.cum_regret / static_cast<double>(r.t) / n;
      row.mean_ucb_steps += static_cast<double>(r.n_ucb) / n;
      row.mean_conservative_steps += static_cast<double>(r.n_cons) / n;
      row.min_cum_regret = std::min(row.min_cum_regret, r.cum_regret);
      row.max_cum_regret = std::max(row.max_cum_regret, r.cum_regret);
    }
    if (last.size() > 1) {
      double ss = 0.0;
      for (const auto& r : last) ss += (r.cum_regret - row.mean_cum_regret) * (r.cum_regret - row.mean_cum_regret);
      row.ci95_cum_regret = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "grid_point,seeds,mean_cum_regret,ci95_cum_regret,min_cum_regret,max_cum_regret,mean_avg_regret,"
         "mean_ucb_steps,mean_conservative_steps\n";
  for (const auto& r : rows)
    out << r.grid_point << ',' << r.seeds << ',' << format_double(r.mean_cum_regret) << ','
        << format_double(r.ci95_cum_regret) << ',' << format_double(r.min_cum_regret) << ','
        << format_double(r.max_cum_regret) << ',' << format_double(r.mean_avg_regret) << ','
        << format_double(r.mean_ucb_steps) << ',' << format_double(r.mean_conservative_steps) << '\n';
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace c4ucb
