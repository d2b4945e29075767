#include "c4ucb/config.hpp"

#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace c4ucb {

using nlohmann::json;

std::vector<std::uint64_t> ExperimentConfig::default_seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), std::uint64_t{0});
  return s;
}

void ExperimentConfig::finalize() {
  if (world.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const auto k = static_cast<std::size_t>(world.k_max);
  if (gammas.empty())
    world.discounts = DiscountProfile::uniform(k);
  else if (gammas.size() == 1)
    world.discounts = DiscountProfile::uniform(k, gammas.front());
  else if (gammas.size() == k)
    world.discounts = DiscountProfile(gammas);
  else
    throw std::invalid_argument("gamma list length " + std::to_string(gammas.size()) + " does not match k_max " +
                                std::to_string(k));
  world.unknown_baseline = policy == PolicyKind::C4UnknownScalar;
}

void ExperimentConfig::validate() const {
  world.validate();
  if (world.discounts.size() != static_cast<std::size_t>(world.k_max))
    throw std::invalid_argument("discount profile length differs from k_max");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0,1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!(lambda_reg > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(noise_r > 0.0)) throw std::invalid_argument("noise_r must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (reinvert_every < 1) throw std::invalid_argument("reinvert_every must be >= 1");
  if (require_norm_envelope && lambda_reg < world.discounts.c_gamma())
    throw std::invalid_argument("norm-sum envelope requires lambda >= C_gamma = " +
                                std::to_string(world.discounts.c_gamma()));
  if (!baseline_contexts.empty()) {
    if (baseline_contexts.size() > static_cast<std::size_t>(world.k_max))
      throw std::invalid_argument("baseline list longer than k_max");
    for (const auto& x : baseline_contexts) {
      if (x.size() != static_cast<std::size_t>(world.dim()))
        throw std::invalid_argument("baseline context has wrong dimension");
      double sq = 0.0;
      for (double v : x) sq += v * v;
      if (sq > 1.0 + 1e-9) throw std::invalid_argument("baseline context norm exceeds 1");
    }
  }
}

void apply_setting(ExperimentConfig& c, const std::string& key, const json& v) {
  try {
    if (key == "dim_raw") c.world.dim_raw = v.get<int>();
    else if (key == "num_items") c.world.num_items = v.get<int>();
    else if (key == "k_max") c.world.k_max = v.get<int>();
    else if (key == "gamma") c.gammas = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
    else if (key == "u0") c.world.u0 = v.get<double>();
    else if (key == "baseline_noise_sd") c.world.baseline_noise_sd = v.get<double>();
    else if (key == "paper_literal_contexts") c.world.paper_literal_contexts = v.get<bool>();
    else if (key == "policy") c.policy = parse_policy(v.get<std::string>());
    else if (key == "horizon") c.horizon = v.get<std::int64_t>();
    else if (key == "epsilon") c.epsilon = v.get<double>();
    else if (key == "delta") c.delta = v.get<double>();
    else if (key == "lambda") c.lambda_reg = v.get<double>();
    else if (key == "noise_r") c.noise_r = v.get<double>();
    else if (key == "refresh_mode") c.refresh_mode = parse_lower_bound_mode(v.get<std::string>());
    else if (key == "seeds") {
      if (v.is_array()) c.seeds = v.get<std::vector<std::uint64_t>>();
      else if (v.is_string()) c.seeds = parse_seed_list(v.get<std::string>());
      else c.seeds = ExperimentConfig::default_seeds(v.get<std::size_t>());
    }
    else if (key == "alpha") c.alpha = v.get<double>();
    else if (key == "output_path") c.output_path = v.get<std::string>();
    else if (key == "require_norm_envelope") c.require_norm_envelope = v.get<bool>();
    else if (key == "reinvert_every") c.reinvert_every = v.get<int>();
    else if (key == "baseline_contexts") c.baseline_contexts = v.get<std::vector<std::vector<double>>>();
    else throw std::invalid_argument("unknown configuration key '" + key + "'");
  } catch (const json::exception& e) {
    throw std::invalid_argument("bad value for '" + key + "': " + e.what());
  }
}

ExperimentConfig config_from_json(const json& doc, ExperimentConfig base) {
  if (!doc.is_object()) throw std::invalid_argument("configuration must be a JSON object");
  for (const auto& [key, value] : doc.items()) apply_setting(base, key, value);
  base.finalize();
  return base;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("cannot parse config file '" + path + "': " + e.what());
  }
  return config_from_json(doc);
}

json to_json(const ExperimentConfig& c) {
  return json{{"dim_raw", c.world.dim_raw},
              {"num_items", c.world.num_items},
              {"k_max", c.world.k_max},
              {"gamma", c.world.discounts.gammas()},
              {"u0", c.world.u0},
              {"baseline_noise_sd", c.world.baseline_noise_sd},
              {"paper_literal_contexts", c.world.paper_literal_contexts},
              {"policy", to_string(c.policy)},
              {"horizon", c.horizon},
              {"epsilon", c.epsilon},
              {"delta", c.delta},
              {"lambda", c.lambda_reg},
              {"noise_r", c.noise_r},
              {"refresh_mode", to_string(c.refresh_mode)},
              {"seeds", c.seeds},
              {"alpha", c.alpha},
              {"output_path", c.output_path},
              {"require_norm_envelope", c.require_norm_envelope},
              {"reinvert_every", c.reinvert_every},
              {"baseline_contexts", c.baseline_contexts}};
}

void apply_paper_scale(ExperimentConfig& c) {
  c.horizon = 40000;
  c.refresh_mode = LowerBoundMode::Stale;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

json parse_scalar(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded() || v.is_object() || v.is_array()) return json(text);
  return v;
}

std::string format_value(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

GridAxis parse_grid_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= text.size())
    throw std::invalid_argument("grid axis must look like key=v1,v2,...: '" + text + "'");
  GridAxis axis{text.substr(0, eq), {}};
  for (const auto& s : split(text.substr(eq + 1), ',')) axis.values.push_back(parse_scalar(s));
  if (axis.values.empty()) throw std::invalid_argument("grid axis '" + axis.key + "' has no values");
  return axis;
}

std::vector<std::pair<std::string, ExperimentConfig>> expand_grid(const ExperimentConfig& base,
                                                                  const std::vector<GridAxis>& axes) {
  std::vector<std::pair<std::string, ExperimentConfig>> points{{"", base}};
  for (const auto& axis : axes) {
    std::vector<std::pair<std::string, ExperimentConfig>> next;
    for (const auto& [label, cfg] : points) {
      for (const auto& v : axis.values) {
        ExperimentConfig c = cfg;
        apply_setting(c, axis.key, v);
        const std::string part = axis.key + "=" + format_value(v);
        next.emplace_back(label.empty() ? part : label + "__" + part, std::move(c));
      }
    }
    points = std::move(next);
  }
  for (auto& [label, cfg] : points) {
    cfg.finalize();
    const std::string head = "policy=" + to_string(cfg.policy);
    bool has_policy = false;
    for (const auto& a : axes) has_policy |= a.key == "policy";
    if (!has_policy) label = label.empty() ? head : head + "__" + label;
  }
  return points;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  try {
    if (text.find(',') == std::string::npos && text.find('-') == std::string::npos)
      return ExperimentConfig::default_seeds(std::stoull(text));
    for (const auto& part : split(text, ',')) {
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument("descending seed range");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad seed list '" + text + "'");
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

}  // namespace c4ucb
