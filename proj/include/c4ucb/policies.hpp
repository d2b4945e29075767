#pragma once

// C3-UCB and the conservative C4-UCB steps (known baseline reward, unknown
// baseline reward with a scalar UCB estimate or a linear baseline list), plus
// the budget ledger over UCB rounds N_t and conservative rounds D_t.

#include "c4ucb/environment.hpp"
#include "c4ucb/linear_model.hpp"
#include "c4ucb/reward.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace c4ucb {

enum class StepType { Ucb, Conservative };
enum class BaselineMode { Known, UnknownScalar, UnknownLinear };
enum class LowerBoundMode { Refresh, Stale };
enum class PolicyKind { C3, C4Known, C4UnknownScalar, C4UnknownLinear };

std::string to_string(StepType);
std::string to_string(PolicyKind);
std::string to_string(LowerBoundMode);
PolicyKind parse_policy(const std::string&);
LowerBoundMode parse_lower_bound_mode(const std::string&);

/// UCB on the mean baseline reward from its noisy samples:
/// upper = min(mean + sqrt(ln(2T/delta) / (2 n)), 1), or 1 with no samples.
class BaselineEstimator {
 public:
  BaselineEstimator(std::int64_t horizon, double delta);

  void observe(double reward);
  std::int64_t count() const { return count_; }
  double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
  double radius() const;
  double upper() const;

 private:
  std::int64_t horizon_;
  double delta_;
  std::int64_t count_ = 0;
  double sum_ = 0.0;
};

/// One stored UCB round: the played list and where its contexts live in the ledger.
struct StoredRound {
  std::int64_t round = 0;
  SuperArm arm;
  Eigen::Index first_col = 0;
  double stale_lower = 0.0;  // f(A_n, L_n) at play time
};

class ConservativeLedger {
 public:
  ConservativeLedger(BaselineMode mode, LowerBoundMode refresh, double epsilon, std::optional<double> u0_known,
                     RewardSpec spec, Eigen::Index dim);

  BaselineMode mode() const { return mode_; }
  LowerBoundMode refresh() const { return refresh_; }
  double epsilon() const { return epsilon_; }
  std::optional<double> u0_known() const { return u0_known_; }
  const RewardSpec& reward_spec() const { return spec_; }

  std::int64_t n_ucb() const { return static_cast<std::int64_t>(rounds_.size()); }
  std::int64_t n_cons() const { return cons_count_; }
  std::int64_t rounds() const { return n_ucb() + n_cons(); }

  const std::vector<StoredRound>& ucb_rounds() const { return rounds_; }
  /// Contexts (d x |A_n|) of a stored round.
  Eigen::Block<const Eigen::MatrixXd> contexts_of(const StoredRound& r) const {
    return store_.block(0, r.first_col, store_.rows(), static_cast<Eigen::Index>(r.arm.size()));
  }

  /// Appends to N_t. `lower_at_play` is f(A_t, L_t) from the decision round.
  void record_ucb(std::int64_t round, const SuperArm& arm, const Eigen::Ref<const Eigen::MatrixXd>& arm_contexts,
                  double lower_at_play);
  /// Appends to D_t.
  void record_conservative(std::int64_t round);

  /// Applies the inverse downdate of a model update to the cached quadratic forms.
  void absorb(const Ellipsoid& model, const UpdateReport& report);

  /// sum_{n in N} f(A_n, L_n): refreshed against the current model, or the
  /// round-n values in stale mode.
  double lower_sum(const Ellipsoid& model);

 private:
  BaselineMode mode_;
  LowerBoundMode refresh_;
  double epsilon_;
  std::optional<double> u0_known_;
  RewardSpec spec_;

  std::vector<StoredRound> rounds_;
  std::int64_t cons_count_ = 0;
  double stale_sum_ = 0.0;

  Eigen::MatrixXd store_;  // d x capacity
  Eigen::Index cols_ = 0;

  // x^T V^{-1} x for store_ columns [0, quad_valid_) at model version quad_version_
  Eigen::VectorXd quad_;
  Eigen::Index quad_valid_ = 0;
  std::uint64_t quad_version_ = 0;
  // theta_hat^T x for columns [0, mean_valid_) at model version mean_version_
  Eigen::VectorXd mean_;
  Eigen::Index mean_valid_ = 0;
  std::uint64_t mean_version_ = 0;

  bool sum_cached_ = false;
  std::uint64_t sum_version_ = 0;
  Eigen::Index sum_cols_ = 0;
  double sum_value_ = 0.0;
};

struct StepDecision {
  StepType type = StepType::Ucb;
  SuperArm candidate;              // B_t
  double candidate_upper = 0.0;    // f(B_t, U_t)
  double candidate_lower = 0.0;    // f(B_t, L_t)
  double budget_lhs = 0.0;         // L_t
  double budget_rhs = 0.0;         // (1 - eps) t u0 or its unknown-mode surrogate
  double baseline_value = 0.0;     // u0 or f(A0, U_t)
  BatchBounds bounds;              // per-item bounds of this round
};

/// Unconstrained UCB selection: greedy oracle on U_t.
SuperArm c3_select(const Ellipsoid& model, const RoundContexts& contexts, const RewardSpec& spec);

/// One round of the known-baseline conservative policy.
StepDecision c4_known_step(const Ellipsoid& model, const RoundContexts& contexts, const RewardSpec& spec,
                           ConservativeLedger& ledger);

/// One round of the unknown-baseline conservative policy. `baseline_contexts`
/// (d x |A0|) is required in UnknownLinear mode and ignored otherwise.
StepDecision c4_unknown_step(const Ellipsoid& model, const RoundContexts& contexts, const RewardSpec& spec,
                             ConservativeLedger& ledger, const BaselineEstimator& baseline,
                             const Eigen::MatrixXd* baseline_contexts = nullptr);

/// Records the outcome of a decision in the ledger.
void ledger_record(ConservativeLedger& ledger, std::int64_t round, StepType type, const SuperArm& played,
                   const Eigen::Ref<const Eigen::MatrixXd>& arm_contexts, double lower_at_play);

struct AgentConfig {
  PolicyKind kind = PolicyKind::C4Known;
  double epsilon = 0.5;
  double u0 = 0.7;
  LowerBoundMode lower_bounds = LowerBoundMode::Refresh;
  EllipsoidParams model;
  std::int64_t horizon = 10000;
  RewardSpec spec = RewardSpec::disjunctive(DiscountProfile::uniform(4));
  Eigen::MatrixXd baseline_contexts;  // UnknownLinear only
};

/// Owns the model, ledger and baseline estimate of one policy run.
class Agent {
 public:
  Agent(const AgentConfig& config, Eigen::Index dim);

  const AgentConfig& config() const { return config_; }
  const Ellipsoid& model() const { return model_; }
  const ConservativeLedger& ledger() const { return ledger_; }
  const BaselineEstimator& baseline() const { return baseline_; }

  StepDecision decide(const RoundContexts& contexts);

  /// UCB branch: model update from the observed prefix, then ledger entry.
  UpdateReport learn(const RoundContexts& contexts, const StepDecision& decision, const CascadeFeedback& feedback);

  /// Conservative branch; `baseline_sample` feeds the scalar estimator.
  void hold(std::int64_t round, std::optional<double> baseline_sample);

  /// Observations a cascade feedback contributes to the model.
  std::vector<Observation> observations(const RoundContexts& contexts, const SuperArm& arm,
                                        const CascadeFeedback& feedback) const;

 private:
  AgentConfig config_;
  Ellipsoid model_;
  ConservativeLedger ledger_;
  BaselineEstimator baseline_;
};

}  // namespace c4ucb
