#include "iscpt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "iscpt/metrics.hpp"

namespace iscpt {

using nlohmann::json;

namespace {

const std::map<Command, std::string>& command_names() {
  static const std::map<Command, std::string> names{
      {Command::crb_sweep, "crb-sweep"},
      {Command::mse_sweep, "mse-sweep"},
      {Command::beampattern, "beampattern"},
      {Command::positioning_demo, "positioning-demo"},
      {Command::solve_once, "solve-once"},
  };
  return names;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

template <typename T>
std::string joined(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    if constexpr (std::is_floating_point_v<T>)
      out += num(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read_opt(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

ScenarioConfig scenario_from_json(const json& j, ScenarioConfig c) {
  reject_unknown(j,
                 {"n_tx", "n_rx", "k", "m", "p_dbm", "sigma_c_dbm", "sigma_r_dbm", "beta", "sinr_db", "eh_mw",
                  "t_len", "layout", "theta_deg", "alpha", "n_scatterers"},
                 "scenario");
  read_opt(j, "n_tx", c.n_tx);
  read_opt(j, "n_rx", c.n_rx);
  read_opt(j, "k", c.k);
  read_opt(j, "m", c.m);
  read_opt(j, "p_dbm", c.p_dbm);
  read_opt(j, "sigma_c_dbm", c.sigma_c_dbm);
  read_opt(j, "sigma_r_dbm", c.sigma_r_dbm);
  read_opt(j, "beta", c.beta);
  read_opt(j, "sinr_db", c.sinr_db);
  read_opt(j, "eh_mw", c.eh_mw);
  read_opt(j, "t_len", c.t_len);
  if (j.contains("layout")) c.layout = layout_from_string(j.at("layout").get<std::string>());
  read_opt(j, "theta_deg", c.theta_deg);
  read_opt(j, "alpha", c.alpha);
  read_opt(j, "n_scatterers", c.n_scatterers);
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  return {{"n_tx", c.n_tx},
          {"n_rx", c.n_rx},
          {"k", c.k},
          {"m", c.m},
          {"p_dbm", c.p_dbm},
          {"sigma_c_dbm", c.sigma_c_dbm},
          {"sigma_r_dbm", c.sigma_r_dbm},
          {"beta", c.beta},
          {"sinr_db", c.sinr_db},
          {"eh_mw", c.eh_mw},
          {"t_len", c.t_len},
          {"layout", to_string(c.layout)},
          {"theta_deg", c.theta_deg},
          {"alpha", c.alpha},
          {"n_scatterers", c.n_scatterers}};
}

PointTarget point_of(const ScenarioConfig& c) { return PointTarget{cd(c.alpha, 0.0), deg_to_rad(c.theta_deg)}; }

DesignSpec spec_for(const ScenarioConfig& c, TargetKind target, std::uint64_t seed) {
  Scenario s = c.build(seed);
  return target == TargetKind::point ? DesignSpec::point_target(std::move(s), point_of(c))
                                     : DesignSpec::extended_target(std::move(s));
}

std::vector<double> rho_values(const BeamformerSolution& sol) {
  if (!sol.rho) return {};
  return {sol.rho->data(), sol.rho->data() + sol.rho->size()};
}

json complex_vector(const VectorXcd& v) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v[i].real());
    im.push_back(v[i].imag());
  }
  return {{"re", re}, {"im", im}};
}

VectorXcd complex_vector_from(const json& j) {
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != im.size()) throw ValidationError("solution dump: re/im length mismatch");
  VectorXcd v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v[static_cast<Eigen::Index>(i)] = {re[i], im[i]};
  return v;
}

}  // namespace

std::string to_string(Command c) { return command_names().at(c); }

Command command_from_string(const std::string& s) {
  for (const auto& [c, name] : command_names())
    if (name == s) return c;
  throw ValidationError("unknown command '" + s + "'");
}

std::string to_string(SweepParam p) { return p == SweepParam::sinr_db ? "sinr_db" : "eh_mw"; }

SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "sinr_db") return SweepParam::sinr_db;
  if (s == "eh_mw") return SweepParam::eh_mw;
  throw ValidationError("sweep parameter must be sinr_db or eh_mw, got '" + s + "'");
}

std::vector<double> default_sweep_values(SweepParam p) {
  if (p == SweepParam::eh_mw) return {1, 100, 200, 300, 400};
  return {4, 6, 8, 10, 12};
}

std::vector<PositioningScheme> default_schemes() {
  return {{"OS", std::nullopt, std::nullopt},
          {"LSLE", 8.0, 0.1},
          {"HSLE", 12.0, 0.1},
          {"LSHE", 8.0, 0.2}};
}

void ExperimentConfig::validate() const {
  if (sweep.values.empty()) throw ValidationError("sweep values must not be empty");
  for (std::size_t i = 1; i < sweep.values.size(); ++i)
    if (!(sweep.values[i] > sweep.values[i - 1])) throw ValidationError("sweep values must be strictly increasing");
  if (sweep.parameter == SweepParam::eh_mw && sweep.values.front() < 0)
    throw ValidationError("EH thresholds must be nonnegative");
  if (seeds.empty()) throw ValidationError("at least one seed is required");
  if (workers < 1) throw ValidationError("workers must be positive");
  if (!(beampattern_step_deg > 0)) throw ValidationError("beampattern step must be positive");
  if (positioning.trials < 1) throw ValidationError("positioning needs at least one trial");
  if (positioning.schemes.empty()) throw ValidationError("positioning needs at least one scheme");
  const ScenarioConfig s = effective_scenario();
  if (s.n_tx < 1 || s.n_rx < 1 || s.k < 1 || s.m < 0 || s.t_len < 1)
    throw ValidationError("scenario dimensions must be positive");
  if (std::abs(deg_to_rad(s.theta_deg)) >= kPi / 2) throw ValidationError("target angle must lie in (-90, 90) degrees");
}

ScenarioConfig ExperimentConfig::effective_scenario() const { return quick ? scenario.quick() : scenario; }

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, {"scenario", "target", "sweep", "seeds", "workers", "quick", "out", "beampattern", "positioning"},
                 "config");
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"), c.scenario);
  if (j.contains("target")) {
    const auto t = j.at("target").get<std::string>();
    if (t == "point")
      c.target = TargetKind::point;
    else if (t == "extended")
      c.target = TargetKind::extended;
    else
      throw ValidationError("target must be point or extended");
  }
  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    reject_unknown(sw, {"parameter", "values"}, "sweep");
    if (sw.contains("parameter")) {
      c.sweep.parameter = sweep_param_from_string(sw.at("parameter").get<std::string>());
      c.sweep.values = default_sweep_values(c.sweep.parameter);
    }
    if (sw.contains("values")) c.sweep.values = sw.at("values").get<std::vector<double>>();
  }
  read_opt(j, "seeds", c.seeds);
  read_opt(j, "workers", c.workers);
  read_opt(j, "quick", c.quick);
  if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  if (j.contains("beampattern")) {
    reject_unknown(j.at("beampattern"), {"step_deg"}, "beampattern");
    read_opt(j.at("beampattern"), "step_deg", c.beampattern_step_deg);
  }
  if (j.contains("positioning")) {
    const json& p = j.at("positioning");
    reject_unknown(p, {"bs", "target", "trials", "kappa", "exponent", "schemes"}, "positioning");
    auto xy = [](const json& v) {
      const auto a = v.get<std::vector<double>>();
      if (a.size() != 2) throw ValidationError("positioning: coordinates need two entries");
      return Vector2d(a[0], a[1]);
    };
    if (p.contains("bs")) c.positioning.bs = xy(p.at("bs"));
    if (p.contains("target")) c.positioning.target = xy(p.at("target"));
    read_opt(p, "trials", c.positioning.trials);
    read_opt(p, "kappa", c.positioning.model.kappa);
    read_opt(p, "exponent", c.positioning.model.exponent);
    if (p.contains("schemes")) {
      c.positioning.schemes.clear();
      for (const json& s : p.at("schemes")) {
        reject_unknown(s, {"label", "sinr_db", "eh_mw"}, "scheme");
        PositioningScheme sc;
        sc.label = s.at("label").get<std::string>();
        if (s.contains("sinr_db")) sc.sinr_db = s.at("sinr_db").get<double>();
        if (s.contains("eh_mw")) sc.eh_mw = s.at("eh_mw").get<double>();
        c.positioning.schemes.push_back(sc);
      }
    }
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json schemes = json::array();
  for (const auto& s : c.positioning.schemes) {
    json e{{"label", s.label}};
    if (s.sinr_db) e["sinr_db"] = *s.sinr_db;
    if (s.eh_mw) e["eh_mw"] = *s.eh_mw;
    schemes.push_back(e);
  }
  return {{"scenario", scenario_to_json(c.scenario)},
          {"target", c.target == TargetKind::point ? "point" : "extended"},
          {"sweep", {{"parameter", to_string(c.sweep.parameter)}, {"values", c.sweep.values}}},
          {"seeds", c.seeds},
          {"workers", c.workers},
          {"quick", c.quick},
          {"out", c.out_dir.string()},
          {"beampattern", {{"step_deg", c.beampattern_step_deg}}},
          {"positioning",
           {{"bs", {c.positioning.bs.x(), c.positioning.bs.y()}},
            {"target", {c.positioning.target.x(), c.positioning.target.y()}},
            {"trials", c.positioning.trials},
            {"kappa", c.positioning.model.kappa},
            {"exponent", c.positioning.model.exponent},
            {"schemes", schemes}}}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  auto parse = [&](const std::string& s) -> std::uint64_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ValidationError("bad seed '" + s + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse(item));
      continue;
    }
    const std::uint64_t lo = parse(item.substr(0, dash));
    const std::uint64_t hi = parse(item.substr(dash + 1));
    if (hi < lo) throw ValidationError("bad seed range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ValidationError("seed list is empty");
  return out;
}

ScenarioConfig with_sweep_value(ScenarioConfig c, SweepParam p, double value) {
  if (p == SweepParam::sinr_db)
    c.sinr_db = value;
  else
    c.eh_mw = value;
  return c;
}

bool still_feasible(const Scenario& s, const BeamformerSolution& sol, double tol) {
  if (!sol.feasible || static_cast<int>(sol.w_mats.size()) != s.k()) return false;
  const ConstraintReplay r = replay_constraints(s, sol.w_mats, sol.r_x, sol.rho);
  return r.worst_sinr <= tol && r.worst_eh <= tol && r.worst_power <= tol;
}

void parallel_for(int n, int workers, const std::function<void(int)>& f) {
  const int threads = std::max(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& c, Command command) {
  if (command != Command::crb_sweep && command != Command::mse_sweep)
    throw ValidationError("run_sweep: command must be crb-sweep or mse-sweep");
  c.validate();
  const TargetKind target = command == Command::crb_sweep ? TargetKind::point : TargetKind::extended;
  const ScenarioConfig base = c.effective_scenario();
  const std::size_t nv = c.sweep.values.size();
  std::vector<std::vector<ResultRow>> per_seed(c.seeds.size());

  parallel_for(static_cast<int>(c.seeds.size()), c.workers, [&](int si) {
    const std::uint64_t seed = c.seeds[static_cast<std::size_t>(si)];
    std::optional<BeamformerSolution> prev;
    for (std::size_t vi = 0; vi < nv; ++vi) {
      const double value = c.sweep.values[vi];
      const ScenarioConfig cfg = with_sweep_value(base, c.sweep.parameter, value);
      const DesignSpec spec = spec_for(cfg, target, seed);
      ResultRow row;
      row.command = to_string(command);
      row.layout = to_string(cfg.layout);
      row.k = cfg.k;
      row.seed = seed;
      row.sweep_param = to_string(c.sweep.parameter);
      row.sweep_value = value;

      const auto t0 = std::chrono::steady_clock::now();
      if (prev && still_feasible(spec.scenario, *prev)) {
        row.reused = true;
      } else {
        try {
          prev = solve_design(spec);
        } catch (const Error& e) {
          prev.reset();
          row.status = std::string("error: ") + e.what();
        }
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

      if (prev) {
        const BeamformerSolution& sol = *prev;
        row.status = conic::to_string(sol.report.status);
        row.iterations = row.reused ? 0 : sol.report.iterations;
        row.solve_ms = row.reused ? 0.0 : sol.report.solve_ms;
        row.feasible = sol.feasible;
        if (sol.feasible) {
          row.objective = sol.objective;
          row.relaxation_objective = sol.relaxation_objective;
          row.ranks = sol.ranks;
          row.rho = rho_values(sol);
        } else {
          prev.reset();
        }
      }
      per_seed[static_cast<std::size_t>(si)].push_back(std::move(row));
    }
  });

  std::vector<ResultRow> rows;
  for (auto& v : per_seed)
    for (auto& r : v) rows.push_back(std::move(r));
  return rows;
}

std::vector<CurvePoint> average_curve(const std::vector<ResultRow>& rows) {
  std::vector<CurvePoint> out;
  std::map<double, std::size_t> index;
  for (const ResultRow& r : rows) {
    auto it = index.find(r.sweep_value);
    if (it == index.end()) {
      it = index.emplace(r.sweep_value, out.size()).first;
      CurvePoint p;
      p.sweep_value = r.sweep_value;
      p.min = std::numeric_limits<double>::infinity();
      p.max = -std::numeric_limits<double>::infinity();
      out.push_back(p);
    }
    CurvePoint& p = out[it->second];
    ++p.n_seeds;
    if (r.objective) {
      ++p.n_feasible;
      p.mean += *r.objective;
      p.min = std::min(p.min, *r.objective);
      p.max = std::max(p.max, *r.objective);
    }
  }
  for (CurvePoint& p : out) {
    if (p.n_feasible) {
      p.mean /= p.n_feasible;
    } else {
      p.mean = p.min = p.max = std::numeric_limits<double>::quiet_NaN();
    }
  }
  std::sort(out.begin(), out.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.sweep_value < b.sweep_value; });
  return out;
}

BeampatternResult run_beampattern(const ExperimentConfig& c) {
  c.validate();
  const ScenarioConfig cfg = c.effective_scenario();
  BeampatternResult out;
  out.seed = c.seeds.front();
  out.target_deg = cfg.theta_deg;
  const DesignSpec spec = spec_for(cfg, TargetKind::point, out.seed);
  out.solution = solve_design(spec);
  if (!out.solution.feasible)
    throw StageError("solve", "beampattern design is " + conic::to_string(out.solution.report.status));

  const int n = static_cast<int>(std::lround(180.0 / c.beampattern_step_deg));
  std::vector<double> grid;
  for (int i = 0; i <= n; ++i) {
    const double deg = std::min(90.0, -90.0 + i * c.beampattern_step_deg);
    out.theta_deg.push_back(deg);
    grid.push_back(deg_to_rad(deg));
  }
  out.power = beampattern<double>(spec.scenario.geometry, out.solution.r_x, grid);
  const MatrixXcd eye = MatrixXcd::Identity(cfg.n_tx, cfg.n_tx);
  const std::vector<double> broadside{0.0};
  out.identity_power = beampattern<double>(spec.scenario.geometry, eye, broadside).front();
  return out;
}

std::vector<PositioningRow> run_positioning(const ExperimentConfig& c) {
  c.validate();
  const PositioningSpec& ps = c.positioning;
  const TargetGeometry tg = target_geometry(ps.bs, ps.target, ps.model);
  ScenarioConfig base = c.effective_scenario();
  base.theta_deg = rad_to_deg(tg.theta);
  base.alpha = tg.alpha.real();
  const std::size_t ns = ps.schemes.size();
  std::vector<std::vector<PositioningRow>> per_seed(c.seeds.size());

  parallel_for(static_cast<int>(c.seeds.size()), c.workers, [&](int si) {
    const std::uint64_t seed = c.seeds[static_cast<std::size_t>(si)];
    std::vector<std::optional<BeamformerSolution>> sols(ns);
    auto threshold = [](const std::optional<double>& v, double off) { return v ? *v : off; };
    for (std::size_t i = 0; i < ns; ++i) {
      const PositioningScheme& sch = ps.schemes[i];
      ScenarioConfig cfg = base;
      if (sch.sinr_db) cfg.sinr_db = *sch.sinr_db;
      if (sch.eh_mw) cfg.eh_mw = *sch.eh_mw;
      Scenario s = cfg.build(seed);
      if (!sch.sinr_db) s.eta.setZero();
      if (!sch.eh_mw) s.q.setZero();
      const DesignSpec spec = DesignSpec::point_target(s, point_of(cfg));

      PositioningRow row;
      row.seed = seed;
      row.scheme = sch.label;
      row.sinr_db = sch.sinr_db ? *sch.sinr_db : std::numeric_limits<double>::quiet_NaN();
      row.eh_mw = sch.eh_mw ? *sch.eh_mw : 0.0;
      row.truth = ps.target;

      // Reuse the latest looser scheme whose optimum still meets these thresholds.
      const double inf = -std::numeric_limits<double>::infinity();
      for (std::size_t j = i; j-- > 0;) {
        const PositioningScheme& o = ps.schemes[j];
        const bool looser = threshold(o.sinr_db, inf) <= threshold(sch.sinr_db, inf) &&
                            threshold(o.eh_mw, 0.0) <= threshold(sch.eh_mw, 0.0);
        if (looser && sols[j] && still_feasible(s, *sols[j])) {
          sols[i] = sols[j];
          row.reused = true;
          break;
        }
      }
      if (!sols[i]) sols[i] = solve_design(spec);
      const BeamformerSolution& sol = *sols[i];
      row.feasible = sol.feasible;
      if (!sol.feasible) {
        sols[i].reset();
        per_seed[static_cast<std::size_t>(si)].push_back(std::move(row));
        continue;
      }
      row.crb = sol.objective;

      const ArrayGeometry& geo = s.geometry;
      const MatrixXcd g = tg.alpha * response_pair(geo, tg.theta).a_mat;
      const SensingFrame clean = synthesize_frame(g, sol.w, nullptr, s.t_len, s.sigma_r2, seed, 0, true);
      row.noiseless_error = (locate(geo, clean, ps.bs, ps.model).position - ps.target).norm();

      double sq = 0.0;
      Vector2d mean = Vector2d::Zero();
      for (int t = 1; t <= ps.trials; ++t) {
        const SensingFrame f =
            synthesize_frame(g, sol.w, nullptr, s.t_len, s.sigma_r2, seed, static_cast<std::uint64_t>(t));
        const Vector2d p = locate(geo, f, ps.bs, ps.model).position;
        row.estimates.push_back(p);
        sq += (p - ps.target).squaredNorm();
        mean += p;
      }
      row.rmse = std::sqrt(sq / ps.trials);
      row.mean_estimate = mean / ps.trials;
      per_seed[static_cast<std::size_t>(si)].push_back(std::move(row));
    }
  });

  std::vector<PositioningRow> rows;
  for (auto& v : per_seed)
    for (auto& r : v) rows.push_back(std::move(r));
  return rows;
}

SolveOnceResult solve_once(const ExperimentConfig& c) {
  c.validate();
  const ScenarioConfig cfg = c.effective_scenario();
  SolveOnceResult out{spec_for(cfg, c.target, c.seeds.front()), {}, {}};
  out.solution = solve_design(out.spec);
  if (out.solution.feasible)
    out.replay = replay_constraints(out.spec.scenario, out.solution.w_mats, out.solution.r_x, out.solution.rho);
  return out;
}

json solution_to_json(const SolveOnceResult& r) {
  const BeamformerSolution& sol = r.solution;
  json j;
  j["schema"] = "iscpt-solution v1";
  j["target"] = r.spec.target == TargetKind::point ? "point" : "extended";
  j["layout"] = to_string(r.spec.scenario.layout);
  j["feasible"] = sol.feasible;
  j["status"] = conic::to_string(sol.report.status);
  j["iterations"] = sol.report.iterations;
  j["objective"] = sol.feasible ? json(sol.objective) : json(nullptr);
  j["relaxation_objective"] = sol.feasible ? json(sol.relaxation_objective) : json(nullptr);
  j["ranks"] = sol.ranks;
  j["rho"] = sol.rho ? json(rho_values(sol)) : json(nullptr);
  json w = json::array();
  for (const VectorXcd& v : sol.w) w.push_back(complex_vector(v));
  j["w"] = w;
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < sol.r_x.rows(); ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index k = 0; k < sol.r_x.cols(); ++k) {
      rr.push_back(sol.r_x(i, k).real());
      ii.push_back(sol.r_x(i, k).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  j["r_x"] = {{"re", re}, {"im", im}};
  if (sol.feasible) {
    j["replay"] = {{"sinr", std::vector<double>(r.replay.sinr.data(), r.replay.sinr.data() + r.replay.sinr.size())},
                   {"harvested_mw", std::vector<double>(r.replay.harvested.data(),
                                                        r.replay.harvested.data() + r.replay.harvested.size())},
                   {"power_mw", r.replay.power}};
  }
  return j;
}

SolutionDump solution_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != "iscpt-solution v1")
      throw ValidationError("solution dump: unsupported schema");
    SolutionDump d;
    d.target = j.at("target").get<std::string>();
    d.layout = j.at("layout").get<std::string>();
    d.feasible = j.at("feasible").get<bool>();
    d.status = j.at("status").get<std::string>();
    if (!j.at("objective").is_null()) d.objective = j.at("objective").get<double>();
    d.ranks = j.at("ranks").get<std::vector<int>>();
    if (!j.at("rho").is_null()) {
      const auto r = j.at("rho").get<std::vector<double>>();
      d.rho = Eigen::Map<const VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
    }
    for (const json& w : j.at("w")) d.w.push_back(complex_vector_from(w));
    const auto re = j.at("r_x").at("re").get<std::vector<std::vector<double>>>();
    const auto im = j.at("r_x").at("im").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(re.size());
    d.r_x.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(re[i].size()) != n || im[i].size() != re[i].size())
        throw ValidationError("solution dump: r_x must be square");
      for (Eigen::Index k = 0; k < n; ++k) d.r_x(i, k) = {re[i][k], im[i][k]};
    }
    return d;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("solution dump: ") + e.what());
  }
}

std::string format_report(const SolveOnceResult& r) {
  const BeamformerSolution& sol = r.solution;
  const Scenario& s = r.spec.scenario;
  std::ostringstream out;
  out << "target        " << (r.spec.target == TargetKind::point ? "point" : "extended") << " (" << to_string(s.layout)
      << ", N_t=" << s.n_tx() << ", K=" << s.k() << ", M=" << s.m() << ")\n";
  out << "status        " << conic::to_string(sol.report.status) << " after " << sol.report.iterations
      << " iterations\n";
  if (!sol.feasible) {
    if (sol.report.status == conic::Status::infeasible)
      out << "certificate   dual improving ray: no beamformers meet the SINR/EH/power constraints\n";
    return out.str();
  }
  out << (r.spec.target == TargetKind::point ? "CRB (rad^2)   " : "MSE           ") << num(sol.objective) << "\n";
  out << "relaxation    " << num(sol.relaxation_objective) << "\n";
  out << "duality gap   " << num(sol.report.duality_gap) << "\n";
  out << "ranks         " << joined(sol.ranks) << " (max eigen ratio " << num(sol.max_eigen_ratio) << ")\n";
  out << "power (mW)    " << num(r.replay.power) << " of " << num(s.p_budget) << "\n";
  for (int k = 0; k < s.k(); ++k) {
    out << "IR " << k << "  SINR " << num(10.0 * std::log10(std::max(r.replay.sinr[k], 1e-300))) << " dB  (margin "
        << num(r.replay.sinr[k] - s.eta[k]) << ")";
    if (sol.rho) out << "  rho " << num((*sol.rho)[k]);
    out << "\n";
  }
  for (int m = 0; m < s.m(); ++m)
    out << "ER " << m << "  harvested " << num(r.replay.harvested[m]) << " mW  (margin "
        << num(r.replay.harvested[m] - s.q[m]) << ")\n";
  return out.str();
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsSchema) +
                    "\ncommand,layout,k,seed,sweep_param,sweep_value,feasible,objective,relaxation_objective,status,"
                    "iterations,reused,ranks,rho\n";
  for (const ResultRow& r : rows) {
    out += r.command + ',' + r.layout + ',' + std::to_string(r.k) + ',' + std::to_string(r.seed) + ',' +
           r.sweep_param + ',' + num(r.sweep_value) + ',' + (r.feasible ? "1" : "0") + ',' + opt_num(r.objective) +
           ',' + opt_num(r.relaxation_objective) + ',' + r.status + ',' + std::to_string(r.iterations) + ',' +
           (r.reused ? "1" : "0") + ',' + joined(r.ranks) + ',' + joined(r.rho) + '\n';
  }
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& curve, SweepParam p) {
  std::string out = std::string(kCurveSchema) + "\nsweep_param,sweep_value,n_seeds,n_feasible,mean,min,max\n";
  for (const CurvePoint& c : curve)
    out += to_string(p) + ',' + num(c.sweep_value) + ',' + std::to_string(c.n_seeds) + ',' +
           std::to_string(c.n_feasible) + ',' + num(c.mean) + ',' + num(c.min) + ',' + num(c.max) + '\n';
  return out;
}

std::string timings_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kTimingsSchema) + "\ncommand,seed,sweep_param,sweep_value,wall_ms,solve_ms\n";
  for (const ResultRow& r : rows)
    out += r.command + ',' + std::to_string(r.seed) + ',' + r.sweep_param + ',' + num(r.sweep_value) + ',' +
           num(r.wall_ms) + ',' + num(r.solve_ms) + '\n';
  return out;
}

std::string beampattern_csv(const BeampatternResult& r) {
  std::string out = std::string(kBeampatternSchema) + "\nseed,target_deg,theta_deg,power,identity_power\n";
  for (std::size_t i = 0; i < r.theta_deg.size(); ++i)
    out += std::to_string(r.seed) + ',' + num(r.target_deg) + ',' + num(r.theta_deg[i]) + ',' + num(r.power[i]) +
           ',' + num(r.identity_power) + '\n';
  return out;
}

std::string positioning_csv(const std::vector<PositioningRow>& rows) {
  std::string out = std::string(kPositioningSchema) +
                    "\nseed,scheme,sinr_db,eh_mw,true_x,true_y,feasible,reused,crb,rmse,mean_x,mean_y,"
                    "noiseless_error\n";
  for (const PositioningRow& r : rows) {
    out += std::to_string(r.seed) + ',' + r.scheme + ',' + (std::isnan(r.sinr_db) ? std::string() : num(r.sinr_db)) +
           ',' + num(r.eh_mw) + ',' + num(r.truth.x()) + ',' + num(r.truth.y()) + ',' + (r.feasible ? "1" : "0") +
           ',' + (r.reused ? "1" : "0") + ',' + opt_num(r.crb) + ',' + opt_num(r.rmse) + ',' +
           (r.mean_estimate ? num(r.mean_estimate->x()) : std::string()) + ',' +
           (r.mean_estimate ? num(r.mean_estimate->y()) : std::string()) + ',' + opt_num(r.noiseless_error) + '\n';
  }
  return out;
}

std::string positions_csv(const std::vector<PositioningRow>& rows) {
  std::string out = std::string(kPositionsSchema) + "\nseed,scheme,trial,x,y,true_x,true_y\n";
  for (const PositioningRow& r : rows)
    for (std::size_t t = 0; t < r.estimates.size(); ++t)
      out += std::to_string(r.seed) + ',' + r.scheme + ',' + std::to_string(t + 1) + ',' + num(r.estimates[t].x()) +
             ',' + num(r.estimates[t].y()) + ',' + num(r.truth.x()) + ',' + num(r.truth.y()) + '\n';
  return out;
}

json run_manifest(const ExperimentConfig& c, Command command, const std::string& started, const std::string& finished,
                  const std::vector<std::string>& files) {
  return {{"schema", "iscpt-run v1"},
          {"command", to_string(command)},
          {"config", config_to_json(c)},
          {"seeds", c.seeds},
          {"workers", c.workers},
          {"started", started},
          {"finished", finished},
          {"files", files}};
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

}  // namespace iscpt
