#pragma once

// High-probability regret bounds for C4-UCB and the conservative-step bound.

#include <cstdint>

namespace c4ucb {

enum class BaselineKnowledge { Known, Unknown };

struct BoundParams {
  double b = 1.0;        // Lipschitz constant B
  double r = 0.5;        // sub-Gaussian constant R
  double k = 4.0;        // max list length K
  double d = 20.0;       // context dimension
  double c_gamma = 4.0;  // sum of squared position discounts
  double lambda = 4.0;
  double p_star = 1.0;   // min full-observation probability
  double epsilon = 0.5;
  double u0 = 0.7;
  double delta_l = 0.0;  // lower bound on alpha f* - u0
  double delta_h = 0.0;  // upper bound on alpha f* - u0
  double alpha = 1.0;
  double gamma1 = 1.0;   // first position discount (unknown-baseline constant)

  void validate() const;
};

struct BoundResult {
  double regret_bound = 0.0;
  double omega = 0.0;
  double d_t_bound = 0.0;         // bound on the number of conservative steps
  double optimistic_term = 0.0;   // unconstrained cascading-UCB part
  double conservative_term = 0.0; // (omega / (eps u0) + 1) * delta_h
};

/// Throws std::domain_error when p* or epsilon is zero (bound undefined).
BoundResult theoretical_bound(const BoundParams& params, std::int64_t horizon, BaselineKnowledge mode);

/// 442368 B^4 R^4 K^2 d^4 sqrt(1 + C_gamma/(lambda d)) / p*^4
double omega_numerator(const BoundParams& params);

}  // namespace c4ucb
