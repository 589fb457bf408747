// Experiment runner: threshold sweeps, beampattern scan, positioning demo and
// single solves, writing versioned CSVs plus a meta.json run manifest.

#include <chrono>
#include <ctime>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "iscpt/experiment.hpp"

namespace {

using namespace iscpt;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ValidationError("bad sweep value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct Overrides {
  std::string config;
  std::string seeds;
  std::string out;
  int workers = 0;
  bool quick = false;
  std::string layout;
  std::string sweep_param;
  std::string values;
  std::string target;
};

ExperimentConfig make_config(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.seeds.empty()) c.seeds = parse_seed_list(o.seeds);
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.workers > 0) c.workers = o.workers;
  if (o.quick) c.quick = true;
  if (!o.layout.empty()) c.scenario.layout = layout_from_string(o.layout);
  if (!o.sweep_param.empty()) {
    const SweepParam p = sweep_param_from_string(o.sweep_param);
    if (p != c.sweep.parameter) c.sweep.values = default_sweep_values(p);
    c.sweep.parameter = p;
  }
  if (!o.values.empty()) c.sweep.values = parse_values(o.values);
  if (!o.target.empty()) {
    if (o.target == "point")
      c.target = TargetKind::point;
    else if (o.target == "extended")
      c.target = TargetKind::extended;
    else
      throw ValidationError("--target must be point or extended");
  }
  c.validate();
  return c;
}

void write_manifest(const ExperimentConfig& c, Command cmd, const std::string& started,
                    const std::vector<std::string>& files) {
  std::vector<std::string> all = files;
  all.push_back("meta.json");
  write_text(c.out_dir / "meta.json", run_manifest(c, cmd, started, utc_now(), all).dump(2) + "\n");
}

int run(Command cmd, const Overrides& o) {
  const ExperimentConfig c = make_config(o);
  const std::string started = utc_now();
  switch (cmd) {
    case Command::crb_sweep:
    case Command::mse_sweep: {
      const auto rows = run_sweep(c, cmd);
      write_text(c.out_dir / "results.csv", results_csv(rows));
      write_text(c.out_dir / "curve.csv", curve_csv(average_curve(rows), c.sweep.parameter));
      write_text(c.out_dir / "timings.csv", timings_csv(rows));
      write_manifest(c, cmd, started, {"results.csv", "curve.csv", "timings.csv"});
      int infeasible = 0;
      for (const auto& r : rows) infeasible += !r.feasible;
      std::cout << rows.size() << " points (" << infeasible << " infeasible) -> " << c.out_dir.string() << "\n";
      return 0;
    }
    case Command::beampattern: {
      const auto r = run_beampattern(c);
      write_text(c.out_dir / "beampattern.csv", beampattern_csv(r));
      write_manifest(c, cmd, started, {"beampattern.csv"});
      std::size_t arg = 0;
      for (std::size_t i = 1; i < r.power.size(); ++i)
        if (r.power[i] > r.power[arg]) arg = i;
      std::cout << "peak at " << r.theta_deg[arg] << " deg (target " << r.target_deg << " deg) -> "
                << c.out_dir.string() << "\n";
      return 0;
    }
    case Command::positioning_demo: {
      const auto rows = run_positioning(c);
      write_text(c.out_dir / "positioning.csv", positioning_csv(rows));
      write_text(c.out_dir / "positions.csv", positions_csv(rows));
      write_manifest(c, cmd, started, {"positioning.csv", "positions.csv"});
      for (const auto& r : rows)
        std::cout << "seed " << r.seed << "  " << r.scheme << "  "
                  << (r.rmse ? "rmse " + std::to_string(*r.rmse) + " m" : std::string("infeasible")) << "\n";
      return 0;
    }
    case Command::solve_once: {
      const auto r = solve_once(c);
      std::cout << format_report(r);
      write_text(c.out_dir / "solution.json", solution_to_json(r).dump(2) + "\n");
      write_manifest(c, cmd, started, {"solution.json"});
      return r.solution.feasible ? 0 : 2;
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beamforming design experiments for joint sensing, communication and power transfer"};
  app.require_subcommand(1);
  Overrides o;
  Command cmd = Command::solve_once;

  auto add_common = [&](CLI::App* sub, Command c) {
    sub->add_option("--config", o.config, "JSON experiment config");
    sub->add_option("--seed-list", o.seeds, "seeds, e.g. 1,2,5-8");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--quick", o.quick, "desk-scale scenario (N_t=8, N_r=10, K=M=4)");
    sub->add_option("--layout", o.layout, "separated or colocated");
    sub->callback([&cmd, c] { cmd = c; });
  };
  for (Command c : {Command::crb_sweep, Command::mse_sweep}) {
    auto* sub = app.add_subcommand(to_string(c), c == Command::crb_sweep ? "CRB versus a threshold (point target)"
                                                                         : "MSE versus a threshold (extended target)");
    add_common(sub, c);
    sub->add_option("--sweep-param", o.sweep_param, "sinr_db or eh_mw");
    sub->add_option("--values", o.values, "comma-separated, strictly increasing");
  }
  add_common(app.add_subcommand("beampattern", "solve a point design and scan its beampattern"), Command::beampattern);
  add_common(app.add_subcommand("positioning-demo", "OS / LSLE / HSLE / LSHE positioning comparison"),
             Command::positioning_demo);
  auto* once = app.add_subcommand("solve-once", "solve one design and print its margins");
  add_common(once, Command::solve_once);
  once->add_option("--target", o.target, "point or extended");

  CLI11_PARSE(app, argc, argv);
  try {
    return run(cmd, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
