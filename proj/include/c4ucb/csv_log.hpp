#pragma once

#include "c4ucb/harness.hpp"

#include <span>
#include <string>
#include <vector>

namespace c4ucb {

/// Column order of the per-run log.
inline constexpr const char* kCsvHeader =
    "t,step_type,arm,f_expected,f_star,inst_regret,cum_regret,cum_reward,budget_lhs,budget_rhs,beta,log_det,n_ucb,"
    "n_cons";

/// Header plus one row per round; floats with 17 significant digits, LF endings.
void write_csv(std::span<const RoundRecord> records, const std::string& path);

/// Inverse of write_csv; throws std::runtime_error with the path on I/O or schema errors.
std::vector<RoundRecord> read_csv(const std::string& path);

std::string format_double(double v);

}  // namespace c4ucb
