#include "c4ucb/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace c4ucb {

SuperArm::SuperArm(std::vector<std::size_t> items) : items_(std::move(items)) {
  std::unordered_set<std::size_t> seen;
  for (auto a : items_)
    if (!seen.insert(a).second) throw std::invalid_argument("super arm contains duplicate item " + std::to_string(a));
}

std::string SuperArm::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < items_.size(); ++k) {
    if (k) out += ';';
    out += std::to_string(items_[k]);
  }
  return out;
}

DiscountProfile::DiscountProfile(std::vector<double> gammas) : gammas_(std::move(gammas)) {
  if (gammas_.empty()) throw std::invalid_argument("discount profile must have at least one position");
  for (std::size_t k = 0; k < gammas_.size(); ++k) {
    const double g = gammas_[k];
    if (!std::isfinite(g) || g < 0.0 || g > 1.0) throw std::domain_error("position discount outside [0,1]");
    if (k > 0 && g > gammas_[k - 1]) throw std::domain_error("position discounts must be non-increasing");
  }
}

DiscountProfile DiscountProfile::uniform(std::size_t k_max, double gamma) {
  return DiscountProfile(std::vector<double>(k_max, gamma));
}

double DiscountProfile::c_gamma() const {
  return std::inner_product(gammas_.begin(), gammas_.end(), gammas_.begin(), 0.0);
}

double reward_positional(const RewardSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& positional) {
  const auto n = static_cast<std::size_t>(positional.size());
  if (n > spec.discounts.size()) throw std::length_error("super arm longer than the discount profile");
  switch (spec.kind) {
    case RewardKind::Disjunctive: {
      double survive = 1.0;
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double w = positional(static_cast<Eigen::Index>(k));
        if (!(w >= 0.0 && w <= 1.0)) throw std::domain_error("weight outside [0,1]");
        total += spec.discounts[k] * survive * w;
        survive *= 1.0 - w;
      }
      return total;
    }
  }
  throw std::logic_error("unknown reward kind");
}

SuperArm greedy_oracle(const RewardSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& weights,
                       std::size_t k_max) {
  const auto n = static_cast<std::size_t>(weights.size());
  if (n == 0) throw std::invalid_argument("oracle needs at least one item");
  if (k_max == 0) throw std::invalid_argument("k_max must be positive");
  if (k_max > spec.discounts.size()) throw std::length_error("k_max exceeds the discount profile");
  const std::size_t k = std::min(k_max, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    const double wa = weights(static_cast<Eigen::Index>(a));
    const double wb = weights(static_cast<Eigen::Index>(b));
    return wa > wb || (wa == wb && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  order.resize(k);
  return SuperArm(std::move(order));
}

namespace {

void enumerate(const RewardSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& weights, std::size_t k_max,
               std::vector<std::size_t>& prefix, std::vector<bool>& used, double& best_value,
               std::vector<std::size_t>& best) {
  if (!prefix.empty()) {
    Eigen::VectorXd positional(static_cast<Eigen::Index>(prefix.size()));
    for (std::size_t k = 0; k < prefix.size(); ++k)
      positional(static_cast<Eigen::Index>(k)) = weights(static_cast<Eigen::Index>(prefix[k]));
    const double value = reward_positional(spec, positional);
    if (value > best_value) {
      best_value = value;
      best = prefix;
    }
  }
  if (prefix.size() == k_max) return;
  for (std::size_t a = 0; a < used.size(); ++a) {
    if (used[a]) continue;
    used[a] = true;
    prefix.push_back(a);
    enumerate(spec, weights, k_max, prefix, used, best_value, best);
    prefix.pop_back();
    used[a] = false;
  }
}

}  // namespace

SuperArm brute_force_oracle(const RewardSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& weights,
                            std::size_t k_max) {
  const auto n = static_cast<std::size_t>(weights.size());
  if (n == 0) throw std::invalid_argument("oracle needs at least one item");
  if (k_max == 0) throw std::invalid_argument("k_max must be positive");
  if (n > kBruteForceMaxItems || k_max > kBruteForceMaxLength)
    throw std::length_error("brute-force oracle limited to 12 items and lists of length 4");
  if (k_max > spec.discounts.size()) throw std::length_error("k_max exceeds the discount profile");
  std::vector<std::size_t> prefix;
  std::vector<bool> used(n, false);
  std::vector<std::size_t> best;
  double best_value = -1.0;
  enumerate(spec, weights, std::min(k_max, n), prefix, used, best_value, best);
  return SuperArm(std::move(best));
}

double full_observation_probability(const Eigen::Ref<const Eigen::VectorXd>& positional) {
  double p = 1.0;
  for (Eigen::Index k = 0; k + 1 < positional.size(); ++k) p *= 1.0 - positional(k);
  return p;
}

}  // namespace c4ucb
