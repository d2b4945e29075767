#include "c4ucb/csv_log.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace c4ucb {

namespace {

constexpr const char* kBaselineArm = "A0";

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw std::runtime_error(path + ":" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& path, std::size_t line) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw std::runtime_error(path + ":" + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::span<const RoundRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.t << ',' << to_string(r.step_type) << ',' << (r.arm.empty() ? kBaselineArm : r.arm.to_string()) << ','
        << format_double(r.f_expected) << ',' << format_double(r.f_star) << ',' << format_double(r.inst_regret) << ','
        << format_double(r.cum_regret) << ',' << format_double(r.cum_reward) << ',' << format_double(r.budget_lhs)
        << ',' << format_double(r.budget_rhs) << ',' << format_double(r.beta) << ',' << format_double(r.log_det)
        << ',' << r.n_ucb << ',' << r.n_cons << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<RoundRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error(path + ": header does not match the run-log schema");
  std::vector<RoundRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 14)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 14 columns, found " +
                               std::to_string(f.size()));
    RoundRecord r;
    r.t = parse_int(f[0], path, lineno);
    if (f[1] == "ucb") r.step_type = StepType::Ucb;
    else if (f[1] == "conservative") r.step_type = StepType::Conservative;
    else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad step_type '" + f[1] + "'");
    if (f[2] != kBaselineArm) {
      std::vector<std::size_t> items;
      for (const auto& s : split_fields(f[2], ';')) items.push_back(static_cast<std::size_t>(parse_int(s, path, lineno)));
      r.arm = SuperArm(std::move(items));
    }
    r.f_expected = parse_double(f[3], path, lineno);
    r.f_star = parse_double(f[4], path, lineno);
    r.inst_regret = parse_double(f[5], path, lineno);
    r.cum_regret = parse_double(f[6], path, lineno);
    r.cum_reward = parse_double(f[7], path, lineno);
    r.budget_lhs = parse_double(f[8], path, lineno);
    r.budget_rhs = parse_double(f[9], path, lineno);
    r.beta = parse_double(f[10], path, lineno);
    r.log_det = parse_double(f[11], path, lineno);
    r.n_ucb = parse_int(f[12], path, lineno);
    r.n_cons = parse_int(f[13], path, lineno);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace c4ucb
