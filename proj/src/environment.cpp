#include "c4ucb/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace c4ucb {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd unit_gaussian_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t round, StreamPurpose purpose) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(round + 0x632be59bd9b4e019ULL));
  const std::uint64_t c = splitmix64(b ^ static_cast<std::uint64_t>(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

void WorldConfig::validate() const {
  if (dim_raw < 1) throw std::invalid_argument("dim_raw must be >= 1");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (num_items < k_max) throw std::invalid_argument("num_items must be >= k_max");
  if (discounts.size() < static_cast<std::size_t>(k_max))
    throw std::invalid_argument("discount profile shorter than k_max");
  if (!(u0 >= 0.0 && u0 <= 1.0)) throw std::invalid_argument("u0 must lie in [0,1]");
  if (!(baseline_noise_sd >= 0.0)) throw std::invalid_argument("baseline_noise_sd must be >= 0");
}

Eigen::VectorXd make_theta_star(const Eigen::Ref<const Eigen::VectorXd>& unit_raw) {
  Eigen::VectorXd theta(unit_raw.size() + 1);
  theta.head(unit_raw.size()) = unit_raw / 2.0;
  theta(unit_raw.size()) = 0.5;
  return theta;
}

Eigen::VectorXd augment_context(const Eigen::Ref<const Eigen::VectorXd>& unit_raw, bool literal) {
  Eigen::VectorXd x(unit_raw.size() + 1);
  x.head(unit_raw.size()) = unit_raw;
  x(unit_raw.size()) = 1.0;
  if (!literal) x /= std::sqrt(2.0);
  return x;
}

CascadeFeedback cascade_from_draws(const Eigen::Ref<const Eigen::VectorXd>& positional_weights,
                                   const std::vector<double>& uniforms) {
  const auto n = static_cast<int>(positional_weights.size());
  if (static_cast<int>(uniforms.size()) < n) throw std::invalid_argument("not enough click draws");
  CascadeFeedback fb;
  fb.observed_weights.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const bool click = uniforms[static_cast<std::size_t>(k)] < positional_weights(k);
    fb.observed_weights.push_back(click ? 1.0 : 0.0);
    if (click) {
      fb.stop_pos = k + 1;
      fb.clicked = true;
      return fb;
    }
  }
  fb.stop_pos = n;
  return fb;
}

World::World(const WorldConfig& config) : config_(config) {
  config_.validate();
  auto rng = make_stream(config_.seed, 0, StreamPurpose::Theta);
  theta_star_ = make_theta_star(unit_gaussian_vector(rng, config_.dim_raw));
}

World make_world(const WorldConfig& config) { return World(config); }

RoundContexts World::draw_contexts(std::int64_t round) const {
  if (round < 1) throw std::invalid_argument("rounds are numbered from 1");
  auto rng = make_stream(config_.seed, static_cast<std::uint64_t>(round), StreamPurpose::Contexts);
  RoundContexts rc;
  rc.round = round;
  rc.contexts.resize(dim(), config_.num_items);
  for (int a = 0; a < config_.num_items; ++a)
    rc.contexts.col(a) = augment_context(unit_gaussian_vector(rng, config_.dim_raw), config_.paper_literal_contexts);
  // clamp only absorbs rounding at the [0,1] endpoints
  rc.true_weights = (rc.contexts.transpose() * theta_star_).array().max(0.0).min(1.0).matrix();
  return rc;
}

CascadeFeedback World::play(const RoundContexts& contexts, const SuperArm& arm) const {
  auto rng = make_stream(config_.seed, static_cast<std::uint64_t>(contexts.round), StreamPurpose::Clicks);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  // always draw k_max uniforms so the stream is independent of the list length
  std::vector<double> draws(static_cast<std::size_t>(std::max<int>(config_.k_max, static_cast<int>(arm.size()))));
  for (auto& u : draws) u = uniform(rng);
  Eigen::VectorXd positional(static_cast<Eigen::Index>(arm.size()));
  for (std::size_t k = 0; k < arm.size(); ++k) {
    if (arm[k] >= static_cast<std::size_t>(contexts.true_weights.size()))
      throw std::out_of_range("super arm item index out of range");
    positional(static_cast<Eigen::Index>(k)) = contexts.true_weights(static_cast<Eigen::Index>(arm[k]));
  }
  return cascade_from_draws(positional, draws);
}

Eigen::MatrixXd World::draw_baseline_contexts(int count) const {
  if (count < 1) throw std::invalid_argument("baseline list needs at least one item");
  auto rng = make_stream(config_.seed, 0, StreamPurpose::BaselineContexts);
  Eigen::MatrixXd out(dim(), count);
  for (int a = 0; a < count; ++a)
    out.col(a) = augment_context(unit_gaussian_vector(rng, config_.dim_raw), config_.paper_literal_contexts);
  return out;
}

double World::baseline_reward_unclipped(std::int64_t round) const {
  if (!config_.unknown_baseline) throw std::logic_error("baseline samples are only drawn in unknown-baseline mode");
  if (config_.baseline_noise_sd == 0.0) return config_.u0;
  auto rng = make_stream(config_.seed, static_cast<std::uint64_t>(round), StreamPurpose::Baseline);
  std::normal_distribution<double> normal(config_.u0, config_.baseline_noise_sd);
  return normal(rng);
}

double World::baseline_reward_sample(std::int64_t round) const {
  return std::clamp(baseline_reward_unclipped(round), 0.0, 1.0);
}

}  // namespace c4ucb
