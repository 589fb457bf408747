#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iscpt/designs.hpp"
#include "iscpt/positioning.hpp"
#include "iscpt/scenario.hpp"

namespace iscpt {

enum class Command { crb_sweep, mse_sweep, beampattern, positioning_demo, solve_once };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

enum class SweepParam { sinr_db, eh_mw };

std::string to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& s);

/// SINR: 4..12 dB. EH: 1..400 mW, which runs from slack to binding at P = 30 dBm.
std::vector<double> default_sweep_values(SweepParam p);

struct SweepSpec {
  SweepParam parameter = SweepParam::sinr_db;
  std::vector<double> values{4, 6, 8, 10, 12};
};

/// One positioning scheme: thresholds the design must meet (none for OS).
struct PositioningScheme {
  std::string label;
  std::optional<double> sinr_db;
  std::optional<double> eh_mw;
};

/// OS, LSLE, HSLE and LSHE.
std::vector<PositioningScheme> default_schemes();

struct PositioningSpec {
  Vector2d bs{0.0, 0.0};
  Vector2d target{10.0, 20.0};
  int trials = 100;
  DistanceModel model;
  std::vector<PositioningScheme> schemes = default_schemes();
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  TargetKind target = TargetKind::point;  // solve-once only; sweeps fix it
  SweepSpec sweep;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int workers = 1;
  bool quick = false;
  std::filesystem::path out_dir = "out";
  double beampattern_step_deg = 0.25;
  PositioningSpec positioning;

  void validate() const;
  /// Scenario parameters after the quick switch.
  ScenarioConfig effective_scenario() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

/// "1,2,5-8" -> {1, 2, 5, 6, 7, 8}.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Applies a sweep value to the scenario parameters.
ScenarioConfig with_sweep_value(ScenarioConfig c, SweepParam p, double value);

struct ResultRow {
  std::string command;
  std::string layout;
  int k = 0;
  std::uint64_t seed = 0;
  std::string sweep_param;
  double sweep_value = 0.0;
  bool feasible = false;
  std::optional<double> objective;  // present iff feasible
  std::optional<double> relaxation_objective;
  std::string status;
  int iterations = 0;
  bool reused = false;  // previous point's solution was still feasible, hence optimal
  std::vector<int> ranks;
  std::vector<double> rho;
  double wall_ms = 0.0;  // written to timings.csv only
  double solve_ms = 0.0;
};

/// Tightening a threshold shrinks the feasible set, so an earlier optimum that
/// still meets the new constraints (within `tol` relative) is optimal again.
bool still_feasible(const Scenario& s, const BeamformerSolution& sol, double tol = 1e-6);

/// Runs f(i) for i in [0, n) on up to `workers` threads.
void parallel_for(int n, int workers, const std::function<void(int)>& f);

/// Threshold sweep per seed (crb-sweep: point target, mse-sweep: extended).
/// Rows come back ordered by (seed position, sweep index) for any worker count.
std::vector<ResultRow> run_sweep(const ExperimentConfig& c, Command command);

struct CurvePoint {
  double sweep_value = 0.0;
  int n_seeds = 0;
  int n_feasible = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};
std::vector<CurvePoint> average_curve(const std::vector<ResultRow>& rows);

struct BeampatternResult {
  std::uint64_t seed = 0;
  double target_deg = 0.0;
  std::vector<double> theta_deg;
  std::vector<double> power;
  double identity_power = 0.0;  // control: flat pattern of R = I
  BeamformerSolution solution;
};
BeampatternResult run_beampattern(const ExperimentConfig& c);

struct PositioningRow {
  std::uint64_t seed = 0;
  std::string scheme;
  double sinr_db = 0.0;  // NaN when unconstrained
  double eh_mw = 0.0;
  Vector2d truth = Vector2d::Zero();
  bool feasible = false;
  bool reused = false;
  std::optional<double> crb;
  std::optional<double> rmse;              // over noisy trials
  std::optional<Vector2d> mean_estimate;
  std::optional<double> noiseless_error;  // meters
  std::vector<Vector2d> estimates;         // per trial, for scatter plots
};
std::vector<PositioningRow> run_positioning(const ExperimentConfig& c);

struct SolveOnceResult {
  DesignSpec spec;
  BeamformerSolution solution;
  ConstraintReplay replay;
};
SolveOnceResult solve_once(const ExperimentConfig& c);

/// JSON solution dump and its loader.
nlohmann::json solution_to_json(const SolveOnceResult& r);
struct SolutionDump {
  std::string target;
  std::string layout;
  bool feasible = false;
  std::string status;
  std::optional<double> objective;
  std::vector<VectorXcd> w;
  MatrixXcd r_x;
  std::optional<VectorXd> rho;
  std::vector<int> ranks;
};
SolutionDump solution_from_json(const nlohmann::json& j);

/// Human-readable summary printed by the CLI.
std::string format_report(const SolveOnceResult& r);

// Output files. Every body is a pure function of config and seeds; wall-clock
// data lives in timings.csv and meta.json only.
inline constexpr const char* kResultsSchema = "# iscpt-results v1";
inline constexpr const char* kCurveSchema = "# iscpt-curve v1";
inline constexpr const char* kTimingsSchema = "# iscpt-timings v1";
inline constexpr const char* kBeampatternSchema = "# iscpt-beampattern v1";
inline constexpr const char* kPositioningSchema = "# iscpt-positioning v1";
inline constexpr const char* kPositionsSchema = "# iscpt-positions v1";

std::string results_csv(const std::vector<ResultRow>& rows);
std::string curve_csv(const std::vector<CurvePoint>& curve, SweepParam p);
std::string timings_csv(const std::vector<ResultRow>& rows);
std::string beampattern_csv(const BeampatternResult& r);
std::string positioning_csv(const std::vector<PositioningRow>& rows);
std::string positions_csv(const std::vector<PositioningRow>& rows);

/// Run manifest: command, config, seeds, worker count, timestamps.
nlohmann::json run_manifest(const ExperimentConfig& c, Command command, const std::string& started,
                            const std::string& finished, const std::vector<std::string>& files);

void write_text(const std::filesystem::path& path, const std::string& body);

}  // namespace iscpt
