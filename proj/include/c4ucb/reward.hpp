#pragma once

// Super arms, position discounts and the disjunctive cascade reward
//   f(A, w) = sum_k gamma_k * prod_{i<k} (1 - w(a_i)) * w(a_k)
// with its exact top-K oracle and an exhaustive reference oracle.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace c4ucb {

/// Ordered list of distinct item indices.
class SuperArm {
 public:
  SuperArm() = default;
  explicit SuperArm(std::vector<std::size_t> items);

  const std::vector<std::size_t>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t operator[](std::size_t k) const { return items_[k]; }

  /// "3;17;42"
  std::string to_string() const;

  friend bool operator==(const SuperArm&, const SuperArm&) = default;

 private:
  std::vector<std::size_t> items_;
};

/// Position discounts gamma_1 >= gamma_2 >= ... in [0,1].
class DiscountProfile {
 public:
  DiscountProfile() = default;
  explicit DiscountProfile(std::vector<double> gammas);
  static DiscountProfile uniform(std::size_t k_max, double gamma = 1.0);

  const std::vector<double>& gammas() const { return gammas_; }
  std::size_t size() const { return gammas_.size(); }
  double operator[](std::size_t k) const { return gammas_[k]; }
  /// C_gamma = sum_k gamma_k^2
  double c_gamma() const;

 private:
  std::vector<double> gammas_;
};

enum class RewardKind { Disjunctive };

struct RewardSpec {
  RewardKind kind = RewardKind::Disjunctive;
  double lipschitz_b = 1.0;
  DiscountProfile discounts;

  static RewardSpec disjunctive(DiscountProfile discounts) {
    return RewardSpec{RewardKind::Disjunctive, 1.0, std::move(discounts)};
  }
};

/// Reward of a list whose k-th entry has weight `positional[k]`.
double reward_positional(const RewardSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& positional);

/// Reward of `arm` under per-item weights (indexed by item).
template <typename Derived>
double reward(const RewardSpec& spec, const SuperArm& arm, const Eigen::DenseBase<Derived>& weights) {
  Eigen::VectorXd positional(static_cast<Eigen::Index>(arm.size()));
  for (std::size_t k = 0; k < arm.size(); ++k) {
    if (arm[k] >= static_cast<std::size_t>(weights.size()))
      throw std::out_of_range("super arm item index out of range");
    positional(static_cast<Eigen::Index>(k)) = weights(static_cast<Eigen::Index>(arm[k]));
  }
  return reward_positional(spec, positional);
}

/// Top-k_max items by weight, descending, ties to the lower index.
SuperArm greedy_oracle(const RewardSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& weights,
                       std::size_t k_max);

inline constexpr std::size_t kBruteForceMaxItems = 12;
inline constexpr std::size_t kBruteForceMaxLength = 4;

/// Exhaustive argmax over all ordered tuples of length 1..k_max.
/// Throws std::length_error past 12 items or length 4.
SuperArm brute_force_oracle(const RewardSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& weights,
                            std::size_t k_max);

/// Probability that every position of the list is examined:
/// prod_{k < |A|} (1 - w(a_k)).
double full_observation_probability(const Eigen::Ref<const Eigen::VectorXd>& positional);

}  // namespace c4ucb
