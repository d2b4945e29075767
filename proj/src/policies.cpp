#include "c4ucb/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace c4ucb {

std::string to_string(StepType t) { return t == StepType::Ucb ? "ucb" : "conservative"; }

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::C3: return "c3";
    case PolicyKind::C4Known: return "c4-known";
    case PolicyKind::C4UnknownScalar: return "c4-unknown-scalar";
    case PolicyKind::C4UnknownLinear: return "c4-unknown-linear";
  }
  return "?";
}

std::string to_string(LowerBoundMode m) { return m == LowerBoundMode::Refresh ? "refresh" : "stale"; }

PolicyKind parse_policy(const std::string& s) {
  if (s == "c3") return PolicyKind::C3;
  if (s == "c4-known") return PolicyKind::C4Known;
  if (s == "c4-unknown-scalar" || s == "c4-unknown") return PolicyKind::C4UnknownScalar;
  if (s == "c4-unknown-linear") return PolicyKind::C4UnknownLinear;
  throw std::invalid_argument("unknown policy '" + s + "'");
}

LowerBoundMode parse_lower_bound_mode(const std::string& s) {
  if (s == "refresh") return LowerBoundMode::Refresh;
  if (s == "stale") return LowerBoundMode::Stale;
  throw std::invalid_argument("unknown refresh mode '" + s + "'");
}

// ---------------------------------------------------------------------------

BaselineEstimator::BaselineEstimator(std::int64_t horizon, double delta) : horizon_(horizon), delta_(delta) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

void BaselineEstimator::observe(double reward) {
  if (!std::isfinite(reward)) throw std::domain_error("non-finite baseline reward");
  ++count_;
  sum_ += reward;
}

double BaselineEstimator::radius() const {
  if (count_ == 0) return 1.0;
  return std::sqrt(std::log(2.0 * static_cast<double>(horizon_) / delta_) / (2.0 * static_cast<double>(count_)));
}

double BaselineEstimator::upper() const {
  if (count_ == 0) return 1.0;
  return std::min(mean() + radius(), 1.0);
}

// ---------------------------------------------------------------------------

ConservativeLedger::ConservativeLedger(BaselineMode mode, LowerBoundMode refresh, double epsilon,
                                       std::optional<double> u0_known, RewardSpec spec, Eigen::Index dim)
    : mode_(mode), refresh_(refresh), epsilon_(epsilon), u0_known_(u0_known), spec_(std::move(spec)) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0,1]");
  if (mode == BaselineMode::Known && !u0_known) throw std::invalid_argument("known mode needs u0");
  if (dim < 1) throw std::invalid_argument("ledger dimension must be positive");
  store_.resize(dim, 64);
  quad_.resize(64);
}

void ConservativeLedger::record_ucb(std::int64_t round, const SuperArm& arm,
                                    const Eigen::Ref<const Eigen::MatrixXd>& arm_contexts, double lower_at_play) {
  const auto len = static_cast<Eigen::Index>(arm.size());
  if (arm_contexts.rows() != store_.rows() || arm_contexts.cols() != len)
    throw std::invalid_argument("stored contexts do not match the played list");
  if (cols_ + len > store_.cols()) {
    const Eigen::Index cap = std::max(2 * store_.cols(), cols_ + len);
    store_.conservativeResize(Eigen::NoChange, cap);
    quad_.conservativeResize(cap);
  }
  store_.block(0, cols_, store_.rows(), len) = arm_contexts;
  rounds_.push_back(StoredRound{round, arm, cols_, lower_at_play});
  cols_ += len;
  stale_sum_ += lower_at_play;
}

void ConservativeLedger::record_conservative(std::int64_t) { ++cons_count_; }

void ConservativeLedger::absorb(const Ellipsoid& model, const UpdateReport& report) {
  if (report.downdate.cols() == 0) return;
  if (report.reinverted || quad_version_ + 1 != model.version()) {
    quad_valid_ = 0;
    quad_version_ = model.version();
    return;
  }
  if (quad_valid_ > 0) {
    // one pass over the stored contexts: downdate projections plus the new means
    const auto m = report.downdate.cols();
    Eigen::MatrixXd rhs(store_.rows(), m + 1);
    rhs.leftCols(m) = report.downdate;
    rhs.col(m) = model.theta_hat();
    const Eigen::MatrixXd proj = rhs.transpose() * store_.leftCols(quad_valid_);  // (m+1) x n
    quad_.head(quad_valid_) -= proj.topRows(m).colwise().squaredNorm().transpose();
    if (mean_.size() < store_.cols()) mean_.conservativeResize(store_.cols());
    mean_.head(quad_valid_) = proj.row(m).transpose();
    mean_valid_ = quad_valid_;
    mean_version_ = model.version();
  }
  quad_version_ = model.version();
}

double ConservativeLedger::lower_sum(const Ellipsoid& model) {
  if (refresh_ == LowerBoundMode::Stale) return stale_sum_;
  if (sum_cached_ && sum_version_ == model.version() && sum_cols_ == cols_) return sum_value_;
  if (cols_ == 0) return 0.0;

  if (quad_version_ != model.version()) quad_valid_ = 0;
  if (quad_valid_ < cols_) {
    const auto fresh = store_.middleCols(quad_valid_, cols_ - quad_valid_);
    const Eigen::MatrixXd vx = model.gram_inv() * fresh;
    quad_.segment(quad_valid_, cols_ - quad_valid_) = vx.cwiseProduct(fresh).colwise().sum().transpose();
    quad_valid_ = cols_;
    quad_version_ = model.version();
  }
  if (mean_version_ != model.version()) mean_valid_ = 0;
  if (mean_.size() < store_.cols()) mean_.conservativeResize(store_.cols());
  if (mean_valid_ < cols_) {
    mean_.segment(mean_valid_, cols_ - mean_valid_) =
        (model.theta_hat().transpose() * store_.middleCols(mean_valid_, cols_ - mean_valid_)).transpose();
    mean_valid_ = cols_;
    mean_version_ = model.version();
  }
  const Eigen::VectorXd lower =
      (mean_.head(cols_).array() - model.beta() * quad_.head(cols_).array().max(0.0).sqrt()).max(0.0).min(1.0).matrix();

  double total = 0.0;
  for (const auto& r : rounds_)
    total += reward_positional(spec_, lower.segment(r.first_col, static_cast<Eigen::Index>(r.arm.size())));

  sum_cached_ = true;
  sum_version_ = model.version();
  sum_cols_ = cols_;
  sum_value_ = total;
  return total;
}

void ledger_record(ConservativeLedger& ledger, std::int64_t round, StepType type, const SuperArm& played,
                   const Eigen::Ref<const Eigen::MatrixXd>& arm_contexts, double lower_at_play) {
  if (type == StepType::Ucb)
    ledger.record_ucb(round, played, arm_contexts, lower_at_play);
  else
    ledger.record_conservative(round);
}

// ---------------------------------------------------------------------------

namespace {

void check_dims(const Ellipsoid& model, const RoundContexts& contexts) {
  if (contexts.contexts.rows() != model.dim()) throw std::invalid_argument("model and contexts differ in dimension");
}

StepDecision optimistic_candidate(const Ellipsoid& model, const RoundContexts& contexts, const RewardSpec& spec) {
  check_dims(model, contexts);
  StepDecision d;
  d.bounds = model.bounds_for_all(contexts.contexts);
  d.candidate = greedy_oracle(spec, d.bounds.upper, spec.discounts.size());
  d.candidate_upper = reward(spec, d.candidate, d.bounds.upper);
  d.candidate_lower = reward(spec, d.candidate, d.bounds.lower);
  return d;
}

StepDecision budget_check(const Ellipsoid& model, const RoundContexts& contexts, const RewardSpec& spec,
                          ConservativeLedger& ledger, double baseline_value) {
  StepDecision d = optimistic_candidate(model, contexts, spec);
  const double t = static_cast<double>(ledger.rounds() + 1);
  d.baseline_value = baseline_value;
  d.budget_lhs = ledger.lower_sum(model) + d.candidate_lower + static_cast<double>(ledger.n_cons()) * baseline_value;
  d.budget_rhs = (1.0 - ledger.epsilon()) * t * baseline_value;
  d.type = d.budget_lhs >= d.budget_rhs ? StepType::Ucb : StepType::Conservative;
  return d;
}

Eigen::MatrixXd gather_contexts(const RoundContexts& contexts, const SuperArm& arm) {
  Eigen::MatrixXd out(contexts.contexts.rows(), static_cast<Eigen::Index>(arm.size()));
  for (std::size_t k = 0; k < arm.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = contexts.contexts.col(static_cast<Eigen::Index>(arm[k]));
  return out;
}

BaselineMode baseline_mode_of(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::C4UnknownScalar: return BaselineMode::UnknownScalar;
    case PolicyKind::C4UnknownLinear: return BaselineMode::UnknownLinear;
    default: return BaselineMode::Known;
  }
}

}  // namespace

SuperArm c3_select(const Ellipsoid& model, const RoundContexts& contexts, const RewardSpec& spec) {
  check_dims(model, contexts);
  const BatchBounds b = model.bounds_for_all(contexts.contexts);
  return greedy_oracle(spec, b.upper, spec.discounts.size());
}

StepDecision c4_known_step(const Ellipsoid& model, const RoundContexts& contexts, const RewardSpec& spec,
                           ConservativeLedger& ledger) {
  if (ledger.mode() != BaselineMode::Known) throw std::logic_error("c4_known_step needs a known-baseline ledger");
  return budget_check(model, contexts, spec, ledger, *ledger.u0_known());
}

StepDecision c4_unknown_step(const Ellipsoid& model, const RoundContexts& contexts, const RewardSpec& spec,
                             ConservativeLedger& ledger, const BaselineEstimator& baseline,
                             const Eigen::MatrixXd* baseline_contexts) {
  double baseline_upper = 1.0;
  switch (ledger.mode()) {
    case BaselineMode::UnknownScalar:
      baseline_upper = baseline.upper();
      break;
    case BaselineMode::UnknownLinear: {
      if (!baseline_contexts || baseline_contexts->cols() == 0)
        throw std::invalid_argument("unknown-linear mode needs baseline contexts");
      const BatchBounds b0 = model.bounds_for_all(*baseline_contexts);
      baseline_upper = reward_positional(spec, b0.upper);
      break;
    }
    case BaselineMode::Known:
      throw std::logic_error("c4_unknown_step needs an unknown-baseline ledger");
  }
  return budget_check(model, contexts, spec, ledger, baseline_upper);
}

// ---------------------------------------------------------------------------

Agent::Agent(const AgentConfig& config, Eigen::Index dim)
    : config_(config),
      model_(dim, config.model),
      ledger_(baseline_mode_of(config.kind), config.lower_bounds,
              config.kind == PolicyKind::C3 ? 1.0 : config.epsilon, config.u0, config.spec, dim),
      baseline_(config.horizon, config.model.delta) {
  if (config.kind == PolicyKind::C4UnknownLinear &&
      (config.baseline_contexts.rows() != dim || config.baseline_contexts.cols() == 0))
    throw std::invalid_argument("unknown-linear mode needs d x |A0| baseline contexts");
}

StepDecision Agent::decide(const RoundContexts& contexts) {
  switch (config_.kind) {
    case PolicyKind::C3: {
      StepDecision d = optimistic_candidate(model_, contexts, config_.spec);
      d.type = StepType::Ucb;
      return d;
    }
    case PolicyKind::C4Known:
      return c4_known_step(model_, contexts, config_.spec, ledger_);
    case PolicyKind::C4UnknownScalar:
    case PolicyKind::C4UnknownLinear:
      return c4_unknown_step(model_, contexts, config_.spec, ledger_, baseline_, &config_.baseline_contexts);
  }
  throw std::logic_error("unknown policy kind");
}

std::vector<Observation> Agent::observations(const RoundContexts& contexts, const SuperArm& arm,
                                             const CascadeFeedback& feedback) const {
  std::vector<Observation> obs;
  const auto observed = static_cast<std::size_t>(feedback.stop_pos);
  if (observed > arm.size() || feedback.observed_weights.size() != observed)
    throw std::invalid_argument("feedback does not match the played list");
  obs.reserve(observed);
  for (std::size_t k = 0; k < observed; ++k)
    obs.push_back(Observation{contexts.contexts.col(static_cast<Eigen::Index>(arm[k])), config_.spec.discounts[k],
                              feedback.observed_weights[k]});
  return obs;
}

UpdateReport Agent::learn(const RoundContexts& contexts, const StepDecision& decision,
                          const CascadeFeedback& feedback) {
  const auto obs = observations(contexts, decision.candidate, feedback);
  UpdateReport report = model_.update(obs);
  if (config_.kind != PolicyKind::C3) ledger_.absorb(model_, report);
  ledger_record(ledger_, contexts.round, StepType::Ucb, decision.candidate,
                gather_contexts(contexts, decision.candidate), decision.candidate_lower);
  return report;
}

void Agent::hold(std::int64_t round, std::optional<double> baseline_sample) {
  ledger_record(ledger_, round, StepType::Conservative, SuperArm{}, Eigen::MatrixXd(model_.dim(), 0), 0.0);
  if (config_.kind == PolicyKind::C4UnknownScalar && baseline_sample) baseline_.observe(*baseline_sample);
}

}  // namespace c4ucb
