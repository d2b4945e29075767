#include "c4ucb/regret_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace c4ucb {

void BoundParams::validate() const {
  if (p_star == 0.0) throw std::domain_error("bound undefined for p* = 0");
  if (epsilon == 0.0) throw std::domain_error("bound undefined for epsilon = 0");
  if (!(p_star > 0.0 && p_star <= 1.0)) throw std::invalid_argument("p* must lie in (0,1]");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0,1]");
  if (!(delta_l <= delta_h)) throw std::invalid_argument("delta_l must not exceed delta_h");
  if (!(b > 0 && r > 0 && k >= 1 && d >= 1 && c_gamma > 0 && lambda > 0))
    throw std::invalid_argument("B, R, K, d, C_gamma and lambda must be positive");
  if (!(u0 > 0.0)) throw std::domain_error("bound undefined for u0 = 0");
}

double omega_numerator(const BoundParams& p) {
  constexpr double kConstant = 442368.0;
  return kConstant * std::pow(p.b, 4) * std::pow(p.r, 4) * p.k * p.k * std::pow(p.d, 4) *
         std::sqrt(1.0 + p.c_gamma / (p.lambda * p.d)) / std::pow(p.p_star, 4);
}

BoundResult theoretical_bound(const BoundParams& p, std::int64_t horizon, BaselineKnowledge mode) {
  p.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double t = static_cast<double>(horizon);

  const double log_growth = std::log1p(p.c_gamma * t / (p.lambda * p.d));
  // ln[(1 + C t/(lambda d))^d T] taken in log space
  const double log_det_term = p.d * log_growth + std::log(t);
  BoundResult out;
  out.optimistic_term = (2.0 * std::sqrt(2.0) * p.b / p.p_star) *
                            (p.r * std::sqrt(log_det_term) + std::sqrt(p.lambda)) *
                            std::sqrt(t * p.k * p.d * log_growth) +
                        p.alpha * std::sqrt(t);

  const double num = omega_numerator(p);
  const double eu = p.epsilon * p.u0;
  if (mode == BaselineKnowledge::Known) {
    if (!(eu + p.delta_l > 0.0)) throw std::domain_error("bound undefined for epsilon*u0 + delta_l <= 0");
    out.omega = num / std::pow(eu + p.delta_l, 3) + (1.0 - p.epsilon) * p.u0;
  } else {
    const double shifted = p.u0 + p.b * p.k * p.gamma1;
    const double e3 = std::pow(p.epsilon, 3);
    out.omega = std::max(num / (e3 * std::pow(shifted, 3)) + (1.0 - p.epsilon) * shifted,
                         num / e3 + (1.0 - p.epsilon));
  }
  out.d_t_bound = out.omega / eu + 1.0;
  out.conservative_term = (out.omega / eu + 1.0) * p.delta_h;
  out.regret_bound = out.optimistic_term + out.conservative_term;
  return out;
}

}  // namespace c4ucb
