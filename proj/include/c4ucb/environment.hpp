#pragma once

// Synthetic cascading world: hidden theta*, per-round unit-norm contexts,
// Bernoulli attraction draws with first-click stopping, noisy baseline reward.

#include "c4ucb/reward.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace c4ucb {

/// Independent random stream for each (seed, round, purpose) triple, so that
/// extra draws for one purpose never shift another purpose's sequence.
enum class StreamPurpose : std::uint64_t {
  Theta = 1,
  Contexts = 2,
  Clicks = 3,
  Baseline = 4,
  BaselineContexts = 5,
};

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t round, StreamPurpose purpose);

struct WorldConfig {
  int dim_raw = 19;
  int num_items = 200;
  int k_max = 4;
  DiscountProfile discounts = DiscountProfile::uniform(4);
  double u0 = 0.7;
  double baseline_noise_sd = 0.1;
  bool unknown_baseline = false;
  /// Skip the 1/sqrt(2) rescale and use x = (x', 1) with ||x|| = sqrt(2).
  bool paper_literal_contexts = false;
  std::uint64_t seed = 0;

  int dim() const { return dim_raw + 1; }
  void validate() const;
};

struct RoundContexts {
  std::int64_t round = 0;
  Eigen::MatrixXd contexts;      // d x L, one column per item
  Eigen::VectorXd true_weights;  // L
};

struct CascadeFeedback {
  /// 1-based stop position O_t; equals the list length when nothing was clicked.
  int stop_pos = 0;
  bool clicked = false;
  /// Realized weights of positions 1..stop_pos.
  std::vector<double> observed_weights;
};

class World {
 public:
  explicit World(const WorldConfig& config);

  const WorldConfig& config() const { return config_; }
  const Eigen::VectorXd& theta_star() const { return theta_star_; }
  int dim() const { return config_.dim(); }

  RoundContexts draw_contexts(std::int64_t round) const;
  CascadeFeedback play(const RoundContexts& contexts, const SuperArm& arm) const;
  /// Normal(u0, sd) draw before clipping.
  double baseline_reward_unclipped(std::int64_t round) const;
  /// Normal(u0, sd) draw clipped to [0,1]. Throws std::logic_error in known-baseline mode.
  double baseline_reward_sample(std::int64_t round) const;
  /// `count` fixed contexts for a linear baseline list, built like item contexts.
  Eigen::MatrixXd draw_baseline_contexts(int count) const;

 private:
  WorldConfig config_;
  Eigen::VectorXd theta_star_;
};

World make_world(const WorldConfig& config);

/// theta* = (theta'/2, 1/2) for a unit vector theta'.
Eigen::VectorXd make_theta_star(const Eigen::Ref<const Eigen::VectorXd>& unit_raw);

/// (x', 1), scaled by 1/sqrt(2) unless `literal`.
Eigen::VectorXd augment_context(const Eigen::Ref<const Eigen::VectorXd>& unit_raw, bool literal);

/// Uniform draws deciding clicks: position k is attractive iff draws[k] < w.
CascadeFeedback cascade_from_draws(const Eigen::Ref<const Eigen::VectorXd>& positional_weights,
                                   const std::vector<double>& uniforms);

}  // namespace c4ucb
