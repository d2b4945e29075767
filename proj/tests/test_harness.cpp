#include "c4ucb/csv_log.hpp"
#include "c4ucb/harness.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace c4ucb;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(PolicyKind policy, std::int64_t horizon) {
  ExperimentConfig c;
  c.policy = policy;
  c.horizon = horizon;
  c.seeds = {0};
  c.finalize();
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("c4ucb_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("runs are reproducible") {
  const auto cfg = small_config(PolicyKind::C4Known, 200);
  const auto a = run_seed(cfg, 3);
  const auto b = run_seed(cfg, 3);
  REQUIRE(a.records.size() == 200);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].arm == b.records[i].arm);
    CHECK(a.records[i].cum_regret == b.records[i].cum_regret);
  }
  CHECK(a.ok());
}

TEST_CASE("regret accounting and step counters") {
  for (auto policy : {PolicyKind::C3, PolicyKind::C4Known, PolicyKind::C4UnknownScalar, PolicyKind::C4UnknownLinear}) {
    CAPTURE(to_string(policy));
    auto cfg = small_config(policy, 300);
    if (policy != PolicyKind::C4Known) cfg.world.unknown_baseline = policy != PolicyKind::C3;
    const auto run = run_seed(cfg, 1);
    CHECK(run.ok());
    double sum = 0.0;
    double prev = 0.0;
    for (const auto& r : run.records) {
      sum += r.inst_regret;
      CHECK(r.cum_regret == doctest::Approx(sum).epsilon(1e-9));
      CHECK(r.cum_regret >= prev - 1e-12);
      prev = r.cum_regret;
      CHECK(r.n_ucb + r.n_cons == r.t);
      CHECK(r.f_expected <= r.f_star + 1e-12);
      if (r.step_type == StepType::Conservative) CHECK(r.arm.empty());
    }
  }
}

TEST_CASE("tiny epsilon keeps the policy almost always conservative") {
  auto cfg = small_config(PolicyKind::C4Known, 1000);
  cfg.epsilon = 0.01;
  const auto run = run_seed(cfg, 0);
  CHECK(static_cast<double>(run.records.back().n_cons) / 1000.0 > 0.9);
  CHECK(run.diag.budget_violations == 0);
}

TEST_CASE("ridge parameter at C_gamma enables the norm-sum envelope") {
  auto cfg = small_config(PolicyKind::C4Known, 400);
  cfg.lambda_reg = 4.0;
  const auto run = run_seed(cfg, 2);
  CHECK(run.diag.norm_envelope_checked);
  CHECK(run.diag.norm_envelope_violations == 0);
  CHECK(run.diag.det_envelope_violations == 0);
  CHECK(run.diag.gap_violations == 0);
  CHECK(run.ok());

  const auto low = run_seed(small_config(PolicyKind::C4Known, 50), 2);
  CHECK_FALSE(low.diag.norm_envelope_checked);
  auto strict = small_config(PolicyKind::C4Known, 50);
  strict.require_norm_envelope = true;
  CHECK_THROWS_AS(run_experiment(strict), std::invalid_argument);
}

TEST_CASE("invalid configurations fail before any round") {
  auto cfg = small_config(PolicyKind::C4Known, 0);
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config(PolicyKind::C4Known, 10);
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config(PolicyKind::C4Known, 10);
  apply_setting(cfg, "epsilon", 1.5);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS(apply_setting(cfg, "no_such_key", 1));
}

TEST_CASE("csv writing and parse-back") {
  const auto dir = scratch_dir("csv");
  write_csv({}, (dir / "empty.csv").string());
  CHECK(count_lines(dir / "empty.csv") == 1);
  std::ifstream hdr(dir / "empty.csv");
  std::string first;
  std::getline(hdr, first);
  CHECK(first == kCsvHeader);

  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<RoundRecord> recs(3);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    auto& r = recs[i];
    r.t = static_cast<std::int64_t>(i + 1);
    r.step_type = i == 1 ? StepType::Conservative : StepType::Ucb;
    if (i != 1) r.arm = SuperArm({i, 7, 199});
    r.f_expected = u(rng);
    r.f_star = u(rng) / 3.0;
    r.inst_regret = u(rng) * 1e-17;
    r.cum_regret = u(rng) * 1e6;
    r.cum_reward = 0.1;
    r.budget_lhs = u(rng);
    r.budget_rhs = u(rng);
    r.beta = 1.0 / 3.0;
    r.log_det = -46.05170185988091;
    r.n_ucb = 2;
    r.n_cons = static_cast<std::int64_t>(i);
  }
  const auto path = (dir / "three.csv").string();
  write_csv(recs, path);
  CHECK(count_lines(path) == 4);
  const auto back = read_csv(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].t == recs[i].t);
    CHECK(back[i].step_type == recs[i].step_type);
    CHECK(back[i].arm == recs[i].arm);
    CHECK(back[i].f_expected == recs[i].f_expected);
    CHECK(back[i].f_star == recs[i].f_star);
    CHECK(back[i].inst_regret == recs[i].inst_regret);
    CHECK(back[i].cum_regret == recs[i].cum_regret);
    CHECK(back[i].budget_lhs == recs[i].budget_lhs);
    CHECK(back[i].beta == recs[i].beta);
    CHECK(back[i].log_det == recs[i].log_det);
    CHECK(back[i].n_cons == recs[i].n_cons);
  }
  std::ifstream raw(path, std::ios::binary);
  std::stringstream ss;
  ss << raw.rdbuf();
  CHECK(ss.str().find('\r') == std::string::npos);
  CHECK(ss.str().find(",A0,") != std::string::npos);

  CHECK_THROWS_AS(write_csv(recs, (dir / "missing" / "x.csv").string()), std::runtime_error);
  try {
    read_csv((dir / "nope.csv").string());
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("nope.csv") != std::string::npos);
  }
}

TEST_CASE("empirical p* and baseline gaps") {
  RunResult run;
  run.config = small_config(PolicyKind::C4Known, 2);
  run.diag.baseline_value = 0.7;
  RoundRecord a;
  a.step_type = StepType::Ucb;
  a.full_obs_prob = 1.0;  // a single-item list is always fully observed
  a.f_star = 0.9;
  RoundRecord b;
  b.step_type = StepType::Ucb;
  b.full_obs_prob = 0.5;  // (0.5, 0.5)
  b.f_star = 0.75;
  RoundRecord c;
  c.step_type = StepType::Conservative;
  c.f_star = 0.8;
  run.records = {a, c};
  auto got = empirical_pstar_delta(std::span<const RunResult>(&run, 1));
  CHECK(got.p_star == 1.0);
  run.records = {a, b, c};
  got = empirical_pstar_delta(std::span<const RunResult>(&run, 1));
  CHECK(got.p_star == 0.5);
  CHECK(got.delta_l == doctest::Approx(0.05));
  CHECK(got.delta_h == doctest::Approx(0.2));
  CHECK_THROWS(empirical_pstar_delta({}));
}

TEST_CASE("seed lists and grid axes") {
  CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(parse_seed_list("1,2,5") == std::vector<std::uint64_t>{1, 2, 5});
  CHECK(parse_seed_list("4-6") == std::vector<std::uint64_t>{4, 5, 6});
  CHECK_THROWS(parse_seed_list("x"));

  const auto axis = parse_grid_axis("epsilon=0.01,0.1,0.2");
  CHECK(axis.key == "epsilon");
  CHECK(axis.values.size() == 3);
  auto base = small_config(PolicyKind::C4Known, 10);
  const auto points = expand_grid(base, {axis, parse_grid_axis("u0=0.5,0.7")});
  REQUIRE(points.size() == 6);
  CHECK(points.front().first == "policy=c4-known__epsilon=0.01__u0=0.5");
  CHECK(points.back().second.epsilon == 0.2);
  CHECK(points.back().second.world.u0 == 0.7);
  CHECK(natural_less("epsilon=0.01", "epsilon=0.1"));
  CHECK(natural_less("epsilon=0.2", "epsilon=0.8"));
  CHECK_FALSE(natural_less("epsilon=0.8", "epsilon=0.2"));
}

TEST_CASE("config documents round-trip") {
  nlohmann::json doc = {{"policy", "c4-unknown"}, {"epsilon", 0.2}, {"horizon", 500}, {"gamma", {1.0, 0.9, 0.8, 0.5}},
                        {"seeds", "0-2"}};
  const auto cfg = config_from_json(doc);
  CHECK(cfg.policy == PolicyKind::C4UnknownScalar);
  CHECK(cfg.world.unknown_baseline);
  CHECK(cfg.world.discounts[3] == 0.5);
  CHECK(cfg.seeds.size() == 3);
  const auto again = config_from_json(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));
  CHECK_THROWS(config_from_json({{"epsilno", 0.2}}));
}

TEST_CASE("grid runs write one csv per run and summarize them") {
  const auto dir = scratch_dir("grid");
  auto base = small_config(PolicyKind::C4Known, 120);
  base.seeds = {0, 1};
  const auto points = expand_grid(base, {parse_grid_axis("epsilon=0.1,0.5")});
  const auto results = run_grid(points, dir.string(), 2);
  REQUIRE(results.size() == 4);
  CHECK(results[0].label == "policy=c4-known__epsilon=0.1");
  CHECK(results[0].seed == 0);
  CHECK(results[3].seed == 1);
  for (const auto& r : results) CHECK(fs::exists(dir / run_file_name(r.label, r.seed)));
  CHECK(read_csv((dir / run_file_name(results[2].label, 1)).string()).back().cum_regret ==
        results[3].final_cum_regret());

  const auto rows = summarize_dir(dir.string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].grid_point == "policy=c4-known__epsilon=0.1");
  CHECK(rows[0].seeds == 2);
  const double mean = (results[0].final_cum_regret() + results[1].final_cum_regret()) / 2.0;
  CHECK(rows[0].mean_cum_regret == doctest::Approx(mean).epsilon(1e-12));
  CHECK(rows[0].mean_avg_regret == doctest::Approx(mean / 120.0).epsilon(1e-12));
  CHECK(rows[0].mean_ucb_steps + rows[0].mean_conservative_steps == doctest::Approx(120.0));
  CHECK(rows[0].min_cum_regret <= rows[0].max_cum_regret);
  write_summary_csv(rows, (dir / "summary.csv").string());
  CHECK(count_lines(dir / "summary.csv") == 3);
}

TEST_CASE("command-line tool") {
  const auto dir = scratch_dir("cli");
  const std::string cli = C4UCB_CLI_PATH;
  const std::string runs = (dir / "runs").string();
  const std::string run_cmd = "\"" + cli + "\" run --policy c4-known --grid epsilon=0.2,0.5 --seeds 2 --set horizon=80 --out \"" +
                              runs + "\" > \"" + (dir / "log.txt").string() + "\" 2>&1";
  CHECK(std::system(run_cmd.c_str()) == 0);
  CHECK(fs::exists(fs::path(runs) / "policy=c4-known__epsilon=0.2__seed0.csv"));
  CHECK(fs::exists(fs::path(runs) / "policy=c4-known__epsilon=0.5__seed1.csv"));

  const std::string sum_cmd = "\"" + cli + "\" summarize --in \"" + runs + "\" --out \"" +
                              (dir / "summary.csv").string() + "\" > /dev/null 2>&1";
  CHECK(std::system(sum_cmd.c_str()) == 0);
  CHECK(count_lines(dir / "summary.csv") == 3);

  const std::string bound_cmd = "\"" + cli + "\" bound --pstar 0.5 --dl 0.1 --dh 0.3 --horizon 1000 > \"" +
                                (dir / "bound.json").string() + "\" 2>&1";
  CHECK(std::system(bound_cmd.c_str()) == 0);
  std::ifstream bj(dir / "bound.json");
  const auto doc = nlohmann::json::parse(bj);
  CHECK(doc.contains("regret_bound"));

  const std::string bad = "\"" + cli + "\" run --set nonsense=1 --out \"" + runs + "\" > /dev/null 2>&1";
  CHECK(std::system(bad.c_str()) != 0);
  const std::string zero = "\"" + cli + "\" bound --pstar 0 > /dev/null 2>&1";
  CHECK(std::system(zero.c_str()) != 0);
}
