#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "iscpt/experiment.hpp"

using namespace iscpt;
using nlohmann::json;

namespace {

ExperimentConfig quick_config() {
  ExperimentConfig c;
  c.quick = true;
  c.seeds = {1, 2, 3};
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("iscpt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ISCPT_EXP_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());

  ExperimentConfig empty = c;
  empty.sweep.values.clear();
  CHECK_THROWS_AS(empty.validate(), ValidationError);
  ExperimentConfig flat = c;
  flat.sweep.values = {4, 4, 8};
  CHECK_THROWS_AS(flat.validate(), ValidationError);
  ExperimentConfig down = c;
  down.sweep.values = {8, 6};
  CHECK_THROWS_AS(down.validate(), ValidationError);
  ExperimentConfig none = c;
  none.seeds.clear();
  CHECK_THROWS_AS(none.validate(), ValidationError);
  ExperimentConfig lazy = c;
  lazy.workers = 0;
  CHECK_THROWS_AS(lazy.validate(), ValidationError);
  ExperimentConfig sideways = c;
  sideways.scenario.theta_deg = 90;
  CHECK_THROWS_AS(sideways.validate(), ValidationError);

  CHECK(c.effective_scenario().n_tx == 16);
  c.quick = true;
  CHECK(c.effective_scenario().n_tx == 8);
  CHECK(c.effective_scenario().k == 4);
}

TEST_CASE("config json") {
  ExperimentConfig c = quick_config();
  c.sweep.parameter = SweepParam::eh_mw;
  c.sweep.values = {1, 50, 100};
  c.scenario.layout = Layout::colocated;
  c.positioning.trials = 7;
  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.sweep.values == c.sweep.values);
  CHECK(back.scenario.layout == Layout::colocated);

  CHECK_THROWS_AS(config_from_json(json{{"sede", {1}}}), ValidationError);
  CHECK_THROWS_AS(config_from_json(json{{"scenario", {{"ntx", 4}}}}), ValidationError);
  CHECK_THROWS_AS(config_from_json(json{{"sweep", {{"values", json::array()}}}}), ValidationError);
  CHECK_THROWS_AS(config_from_json(json{{"target", "cloud"}}), ValidationError);

  const auto dir = scratch("cfg");
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ValidationError);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ValidationError);
  std::ofstream(dir / "ok.json") << R"({"quick": true, "seeds": [4, 5], "sweep": {"parameter": "eh_mw", "values": [1, 2]}})";
  const ExperimentConfig ok = load_config(dir / "ok.json");
  CHECK(ok.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(ok.sweep.parameter == SweepParam::eh_mw);
  CHECK(config_from_json(json{{"sweep", {{"parameter", "eh_mw"}}}}).sweep.values == default_sweep_values(SweepParam::eh_mw));
  CHECK(ExperimentConfig{}.sweep.values == default_sweep_values(SweepParam::sinr_db));
}

TEST_CASE("seed lists and enums") {
  CHECK(parse_seed_list("1,2,5-8") == std::vector<std::uint64_t>{1, 2, 5, 6, 7, 8});
  CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{3});
  CHECK_THROWS_AS(parse_seed_list(""), ValidationError);
  CHECK_THROWS_AS(parse_seed_list("4-2"), ValidationError);
  CHECK_THROWS_AS(parse_seed_list("a"), ValidationError);
  CHECK_THROWS_AS(parse_seed_list("1,2x"), ValidationError);

  for (Command c : {Command::crb_sweep, Command::mse_sweep, Command::beampattern, Command::positioning_demo,
                    Command::solve_once})
    CHECK(command_from_string(to_string(c)) == c);
  CHECK(to_string(Command::positioning_demo) == "positioning-demo");
  CHECK(sweep_param_from_string("eh_mw") == SweepParam::eh_mw);
  CHECK_THROWS_AS(sweep_param_from_string("snr"), ValidationError);

  const ScenarioConfig s = with_sweep_value(ScenarioConfig{}, SweepParam::sinr_db, 11.0);
  CHECK(s.sinr_db == 11.0);
  CHECK(with_sweep_value(ScenarioConfig{}, SweepParam::eh_mw, 3.0).eh_mw == 3.0);
}

TEST_CASE("sweeps are deterministic across runs and worker counts") {
  for (Command cmd : {Command::crb_sweep, Command::mse_sweep}) {
    ExperimentConfig c = quick_config();
    c.workers = 1;
    const auto one = run_sweep(c, cmd);
    c.workers = 3;
    const auto many = run_sweep(c, cmd);
    const auto again = run_sweep(c, cmd);
    CHECK(results_csv(one) == results_csv(many));
    CHECK(results_csv(many) == results_csv(again));
    CHECK(curve_csv(average_curve(one), c.sweep.parameter) == curve_csv(average_curve(many), c.sweep.parameter));

    REQUIRE(one.size() == c.seeds.size() * c.sweep.values.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      const ResultRow& r = one[i];
      CHECK(r.seed == c.seeds[i / c.sweep.values.size()]);
      CHECK(r.sweep_value == c.sweep.values[i % c.sweep.values.size()]);
      CHECK(r.objective.has_value() == r.feasible);
      CHECK(r.command == to_string(cmd));
    }
    // per-seed monotonicity
    for (std::size_t i = 1; i < one.size(); ++i)
      if (one[i].seed == one[i - 1].seed && one[i].feasible && one[i - 1].feasible)
        CHECK(*one[i].objective >= *one[i - 1].objective * (1 - 1e-8));
  }
}

TEST_CASE("csv schemas") {
  ExperimentConfig c = quick_config();
  c.seeds = {1};
  c.sweep.values = {4, 8};
  const auto rows = run_sweep(c, Command::crb_sweep);
  const std::string body = results_csv(rows);
  CHECK(body.rfind(std::string(kResultsSchema) + "\n", 0) == 0);
  std::istringstream in(body);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  const std::size_t cols = std::count(line.begin(), line.end(), ',');
  while (std::getline(in, line)) CHECK(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) == cols);
  CHECK(body.find("wall_ms") == std::string::npos);
  CHECK(timings_csv(rows).rfind(kTimingsSchema, 0) == 0);

  const auto curve = average_curve(rows);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].n_seeds == 1);
  CHECK(curve[0].mean == *rows[0].objective);
  CHECK(curve[0].min <= curve[0].mean);
  CHECK(curve[0].max >= curve[0].mean);
}

TEST_CASE("average_curve skips infeasible points") {
  std::vector<ResultRow> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].seed = i;
    rows[i].sweep_value = 1.0;
  }
  rows[0].feasible = true;
  rows[0].objective = 2.0;
  rows[2].feasible = true;
  rows[2].objective = 4.0;
  const auto c = average_curve(rows);
  REQUIRE(c.size() == 1);
  CHECK(c[0].n_seeds == 3);
  CHECK(c[0].n_feasible == 2);
  CHECK(c[0].mean == doctest::Approx(3.0));
  CHECK(c[0].min == 2.0);
  CHECK(c[0].max == 4.0);
}

TEST_CASE("still_feasible") {
  ExperimentConfig c = quick_config();
  const Scenario s = c.effective_scenario().build(1);
  const BeamformerSolution sol = solve_design(DesignSpec::point_target(s, PointTarget{}));
  REQUIRE(sol.feasible);
  CHECK(still_feasible(s, sol));
  Scenario harder = s;
  harder.eta *= 1e4;
  CHECK_FALSE(still_feasible(harder, sol));
  BeamformerSolution none;
  CHECK_FALSE(still_feasible(s, none));
}

TEST_CASE("beampattern run") {
  ExperimentConfig c = quick_config();
  const BeampatternResult r = run_beampattern(c);
  CHECK(r.seed == 1);
  CHECK(r.theta_deg.size() == 721);
  CHECK(r.theta_deg.front() == -90.0);
  CHECK(r.theta_deg.back() == 90.0);
  CHECK(r.identity_power == doctest::Approx(8.0));
  double total = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < r.power.size(); ++i) {
    total += r.power[i];
    if (r.power[i] > r.power[arg]) arg = i;
  }
  CHECK(std::isfinite(total));
  CHECK(total > 0);
  CHECK(std::abs(r.theta_deg[arg] - r.target_deg) <= 2.0);
  CHECK(beampattern_csv(r).rfind(kBeampatternSchema, 0) == 0);
}

TEST_CASE("positioning run") {
  ExperimentConfig c = quick_config();
  c.seeds = {1, 2};
  c.positioning.trials = 10;
  const auto rows = run_positioning(c);
  REQUIRE(rows.size() == 8);
  std::set<std::string> labels;
  for (const auto& r : rows) {
    labels.insert(r.scheme);
    CHECK(r.truth == Vector2d(10, 20));
    REQUIRE(r.feasible);
    CHECK(*r.noiseless_error <= 1e-3);
    CHECK(r.estimates.size() == 10);
  }
  CHECK(labels == std::set<std::string>{"OS", "LSLE", "HSLE", "LSHE"});
  CHECK(std::isnan(rows[0].sinr_db));
  CHECK(rows[1].sinr_db == 8.0);
  CHECK(positioning_csv(rows) == positioning_csv(run_positioning(c)));
  c.workers = 2;
  CHECK(positions_csv(rows) == positions_csv(run_positioning(c)));
}

TEST_CASE("solve-once dump round trip") {
  ExperimentConfig c = quick_config();
  for (TargetKind t : {TargetKind::point, TargetKind::extended}) {
    c.target = t;
    const SolveOnceResult r = solve_once(c);
    REQUIRE(r.solution.feasible);
    const json j = json::parse(solution_to_json(r).dump());
    const SolutionDump d = solution_from_json(j);
    CHECK(d.feasible);
    CHECK(d.target == (t == TargetKind::point ? "point" : "extended"));
    CHECK(*d.objective == r.solution.objective);
    CHECK(d.r_x == r.solution.r_x);
    REQUIRE(d.w.size() == r.solution.w.size());
    for (std::size_t k = 0; k < d.w.size(); ++k) CHECK(d.w[k] == r.solution.w[k]);
    CHECK(d.ranks == r.solution.ranks);
    const std::string report = format_report(r);
    CHECK(report.find("status        optimal") != std::string::npos);
    CHECK(report.find("ranks") != std::string::npos);
  }
  CHECK_THROWS_AS(solution_from_json(json{{"schema", "other"}}), ValidationError);
}

TEST_CASE("cli") {
  const auto dir = scratch("cli");
  CHECK(run_cli("solve-once --quick --seed-list 1 --out " + (dir / "ok").string()) == 0);
  CHECK(std::filesystem::exists(dir / "ok" / "solution.json"));
  CHECK(std::filesystem::exists(dir / "ok" / "meta.json"));

  std::ofstream(dir / "greedy.json") << R"({"quick": true, "scenario": {"eh_mw": 1e9}})";
  CHECK(run_cli("solve-once --config " + (dir / "greedy.json").string() + " --out " + (dir / "no").string()) == 2);
  CHECK(run_cli("crb-sweep --quick --values 8,6 --out " + (dir / "bad").string()) == 1);
  CHECK(run_cli("no-such-command") != 0);

  const auto a = dir / "a", b = dir / "b";
  REQUIRE(run_cli("crb-sweep --quick --seed-list 1-2 --values 4,8 --workers 1 --out " + a.string()) == 0);
  REQUIRE(run_cli("crb-sweep --quick --seed-list 1-2 --values 4,8 --workers 2 --out " + b.string()) == 0);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  CHECK(slurp(a / "curve.csv") == slurp(b / "curve.csv"));
  const json meta = json::parse(slurp(a / "meta.json"));
  CHECK(meta.at("schema") == "iscpt-run v1");
  CHECK(meta.at("command") == "crb-sweep");
}
