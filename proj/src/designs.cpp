#include "iscpt/designs.hpp"

#include <algorithm>

#include "iscpt/linalg.hpp"
#include "iscpt/metrics.hpp"
#include "iscpt/rank_tools.hpp"

namespace iscpt {

using conic::AffineExpr;
using conic::Bound;
using conic::LmiBlock;
using conic::MatrixVar;
using conic::ScalarVar;

DesignSpec DesignSpec::point_target(Scenario s, PointTarget t) {
  DesignSpec d;
  d.scenario = std::move(s);
  d.target = TargetKind::point;
  d.point = t;
  d.objective = ObjectiveKind::crb_min;
  return d;
}

DesignSpec DesignSpec::extended_target(Scenario s) {
  DesignSpec d;
  d.scenario = std::move(s);
  d.target = TargetKind::extended;
  d.objective = ObjectiveKind::mse_min;
  return d;
}

void DesignSpec::validate() const {
  scenario.validate();
  if (target == TargetKind::point && objective != ObjectiveKind::crb_min)
    throw ValidationError("point targets are designed for CRB");
  if (target == TargetKind::extended && objective != ObjectiveKind::mse_min)
    throw ValidationError("extended targets are designed for MSE");
  if (target == TargetKind::point && !(std::abs(point.theta) < kPi / 2))
    throw ValidationError("target angle must lie in (-90, 90) degrees");
}

namespace {

/// tr(coef * sum_k W_k).
AffineExpr trace_sum(const std::vector<MatrixVar>& w, const MatrixXcd& coef) {
  AffineExpr e;
  const conic::SparseCd sp = coef.sparseView(cd(0.0), 0.0);
  for (const MatrixVar& v : w) e.add_trace(v, sp);
  return e;
}

void add_power_row(DesignProgram& dp, const AffineExpr& total_trace) {
  dp.program.add_inequality(1.0 - total_trace, "power");
}

void require(const DesignSpec& spec, TargetKind t, Layout l) {
  spec.validate();
  if (spec.target != t || spec.scenario.layout != l) throw ValidationError("design builder does not match the spec");
}

/// Fisher LMI [[tr(Dd S) - t, tr(Da S)], [., tr(Aa S)]] >= 0 with a diagonal
/// rescaling that keeps both diagonal entries of order one.
void add_fisher_lmi(DesignProgram& dp, const DesignSpec& spec) {
  const int n = spec.scenario.n_tx();
  const ResponsePair<double> pair = response_pair(spec.scenario.geometry, spec.point.theta);
  const MatrixXcd dd = pair.a_dot.adjoint() * pair.a_dot;
  const MatrixXcd aa = pair.a_mat.adjoint() * pair.a_mat;
  const MatrixXcd da = pair.a_dot.adjoint() * pair.a_mat;
  const double s1 = std::sqrt(std::max(dd.trace().real(), 1e-300) / n);
  const double s2 = std::sqrt(std::max(aa.trace().real(), 1e-300) / n);

  dp.t = dp.program.add_scalar("t");
  LmiBlock blk(2);
  blk.set(0, 0, trace_sum(dp.w, dd / (s1 * s1)) - AffineExpr::of(*dp.t));
  blk.set(0, 1, trace_sum(dp.w, da / (s1 * s2)));
  blk.set(1, 1, trace_sum(dp.w, aa / (s2 * s2)));
  dp.program.add_lmi(std::move(blk), "fisher");
  dp.program.maximize(AffineExpr::of(*dp.t));
  dp.fisher_unit = dp.power_unit * s1 * s1;
}

/// (1 + eta) tr(H_k W_k) - eta tr(H_k R) for R expressed by `r_terms`.
AffineExpr sinr_expr(const DesignProgram& dp, const Scenario& s, int k, const AffineExpr& h_r) {
  AffineExpr e = AffineExpr::trace(dp.w[k], s.h_mat(k) * (1.0 + s.eta[k]));
  e -= s.eta[k] * h_r;
  return e;
}

/// Row weight that makes a threshold constant of one, so the solver's
/// residuals are relative to the threshold. Vanishing thresholds would blow
/// the coefficients up, hence the cap at 1e4 times their natural size.
double threshold_weight(double constant, double coeff) {
  const double floor = 1e-4 * coeff;
  return constant > floor ? 1.0 / constant : (floor > 0 ? 1.0 / floor : 1.0);
}
double sinr_weight(const Scenario& s, int k, double p) {
  return threshold_weight(s.eta[k] * s.sigma_c2 / p, (1.0 + s.eta[k]) * s.h_mat(k).trace().real());
}
double eh_weight(const Scenario& s, int m, double p, const MatrixXcd& c) {
  return threshold_weight(s.q[m] / p, s.beta[m] * c.trace().real());
}

/// Power-splitting LMIs shared by both co-located designs.
void add_power_splitting(DesignProgram& dp, const Scenario& s) {
  const double p = dp.power_unit;
  for (int k = 0; k < s.k(); ++k) {
    const std::string tag = std::to_string(k);
    dp.rho.push_back(dp.program.add_scalar("rho" + tag, Bound::nonnegative));
    dp.c.push_back(dp.program.add_scalar("c" + tag));
    dp.d.push_back(dp.program.add_scalar("d" + tag));
    dp.program.add_inequality(1.0 - AffineExpr::of(dp.rho[k]), "rho_max" + tag);

    // c and d are weighted like the rows they enter.
    LmiBlock info(2);
    info.set(0, 0, AffineExpr::of(dp.c[k]));
    info.set(0, 1, std::sqrt(sinr_weight(s, k, p) * s.eta[k] * s.sigma_c2 / p));
    info.set(1, 1, 1.0 - AffineExpr::of(dp.rho[k]));
    dp.program.add_lmi(std::move(info), "ps_info" + tag);

    LmiBlock energy(2);
    energy.set(0, 0, AffineExpr::of(dp.d[k]));
    energy.set(0, 1, std::sqrt(eh_weight(s, k, p, s.h_mat(k)) * s.q[k] / p));
    energy.set(1, 1, AffineExpr::of(dp.rho[k]));
    dp.program.add_lmi(std::move(energy), "ps_energy" + tag);
  }
}

DesignProgram point_common(const DesignSpec& spec) {
  const Scenario& s = spec.scenario;
  DesignProgram dp;
  dp.power_unit = s.p_budget;
  for (int k = 0; k < s.k(); ++k) dp.w.push_back(dp.program.add_psd("W" + std::to_string(k), s.n_tx()));
  add_fisher_lmi(dp, spec);
  add_power_row(dp, trace_sum(dp.w, MatrixXcd::Identity(s.n_tx(), s.n_tx())));
  return dp;
}

}  // namespace

DesignProgram build_point_separated(const DesignSpec& spec) {
  require(spec, TargetKind::point, Layout::separated);
  const Scenario& s = spec.scenario;
  DesignProgram dp = point_common(spec);
  const double p = dp.power_unit;
  for (int k = 0; k < s.k(); ++k) {
    if (s.eta[k] <= 0) continue;
    AffineExpr row = sinr_expr(dp, s, k, trace_sum(dp.w, s.h_mat(k)));
    row -= s.eta[k] * s.sigma_c2 / p;
    dp.program.add_inequality(sinr_weight(s, k, p) * row, "sinr" + std::to_string(k));
  }
  for (int m = 0; m < s.m(); ++m) {
    if (s.q[m] <= 0) continue;
    AffineExpr row = s.beta[m] * trace_sum(dp.w, s.c_mat(m));
    row -= s.q[m] / p;
    dp.program.add_inequality(eh_weight(s, m, p, s.c_mat(m)) * row, "eh" + std::to_string(m));
  }
  return dp;
}

DesignProgram build_point_colocated(const DesignSpec& spec) {
  require(spec, TargetKind::point, Layout::colocated);
  const Scenario& s = spec.scenario;
  DesignProgram dp = point_common(spec);
  add_power_splitting(dp, s);
  const double p = dp.power_unit;
  for (int k = 0; k < s.k(); ++k) {
    const AffineExpr h_sum = trace_sum(dp.w, s.h_mat(k));
    dp.program.add_inequality(sinr_weight(s, k, p) * sinr_expr(dp, s, k, h_sum) - AffineExpr::of(dp.c[k]),
                              "sinr" + std::to_string(k));
    dp.program.add_inequality(eh_weight(s, k, p, s.h_mat(k)) * s.beta[k] * h_sum - AffineExpr::of(dp.d[k]), "eh" + std::to_string(k));
  }
  return dp;
}

namespace {

/// Y = [[U, I], [I, R_X]] with R_X = aux + sum W_k; the objective is tr(U).
DesignProgram extended_common(const DesignSpec& spec) {
  const Scenario& s = spec.scenario;
  const int n = s.n_tx();
  DesignProgram dp;
  dp.power_unit = s.p_budget;
  for (int k = 0; k < s.k(); ++k) dp.w.push_back(dp.program.add_psd("W" + std::to_string(k), n));
  dp.aux = dp.program.add_psd("aux", n);
  dp.y = dp.program.add_psd("Y", 2 * n);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const AffineExpr e = AffineExpr::trace(*dp.y, conic::entry_selector(2 * n, i, n + j)) - (i == j ? 1.0 : 0.0);
      dp.program.add_equality(e.real_part(), "pin");
      dp.program.add_equality(e.imag_part(), "pin");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      AffineExpr e = AffineExpr::trace(*dp.y, conic::entry_selector(2 * n, n + i, n + j));
      e -= AffineExpr::trace(*dp.aux, conic::entry_selector(n, i, j));
      for (const MatrixVar& w : dp.w) e -= AffineExpr::trace(w, conic::entry_selector(n, i, j));
      dp.program.add_equality(e.real_part(), "tie");
      if (i != j) dp.program.add_equality(e.imag_part(), "tie");
    }
  }
  MatrixXcd u_sel = MatrixXcd::Zero(2 * n, 2 * n);
  u_sel.topLeftCorner(n, n).setIdentity();
  dp.program.minimize(AffineExpr::trace(*dp.y, u_sel));
  dp.mse_unit = s.geometry.n_rx * s.sigma_r2 / (s.t_len * dp.power_unit);

  const MatrixXcd eye = MatrixXcd::Identity(n, n);
  add_power_row(dp, AffineExpr::trace(*dp.aux, eye) + trace_sum(dp.w, eye));
  return dp;
}

/// tr(C R_X) with R_X = aux + sum W_k.
AffineExpr trace_r(const DesignProgram& dp, const MatrixXcd& c) {
  return AffineExpr::trace(*dp.aux, c) + trace_sum(dp.w, c);
}

}  // namespace

DesignProgram build_extended_separated(const DesignSpec& spec) {
  require(spec, TargetKind::extended, Layout::separated);
  const Scenario& s = spec.scenario;
  DesignProgram dp = extended_common(spec);
  const double p = dp.power_unit;
  for (int k = 0; k < s.k(); ++k) {
    if (s.eta[k] <= 0) continue;
    AffineExpr row = sinr_expr(dp, s, k, trace_r(dp, s.h_mat(k)));
    row -= s.eta[k] * s.sigma_c2 / p;
    dp.program.add_inequality(sinr_weight(s, k, p) * row, "sinr" + std::to_string(k));
  }
  for (int m = 0; m < s.m(); ++m) {
    if (s.q[m] <= 0) continue;
    AffineExpr row = s.beta[m] * trace_r(dp, s.c_mat(m));
    row -= s.q[m] / p;
    dp.program.add_inequality(eh_weight(s, m, p, s.c_mat(m)) * row, "eh" + std::to_string(m));
  }
  return dp;
}

DesignProgram build_extended_colocated(const DesignSpec& spec) {
  require(spec, TargetKind::extended, Layout::colocated);
  const Scenario& s = spec.scenario;
  DesignProgram dp = extended_common(spec);
  add_power_splitting(dp, s);
  const double p = dp.power_unit;
  for (int k = 0; k < s.k(); ++k) {
    const AffineExpr h_r = trace_r(dp, s.h_mat(k));
    dp.program.add_inequality(sinr_weight(s, k, p) * sinr_expr(dp, s, k, h_r) - AffineExpr::of(dp.c[k]),
                              "sinr" + std::to_string(k));
    dp.program.add_inequality(eh_weight(s, k, p, s.h_mat(k)) * s.beta[k] * h_r - AffineExpr::of(dp.d[k]), "eh" + std::to_string(k));
  }
  return dp;
}

DesignProgram build_design(const DesignSpec& spec) {
  const bool sep = spec.scenario.layout == Layout::separated;
  if (spec.target == TargetKind::point) return sep ? build_point_separated(spec) : build_point_colocated(spec);
  return sep ? build_extended_separated(spec) : build_extended_colocated(spec);
}

RawDesignValues read_values(const DesignSpec& spec, const DesignProgram& dp, const conic::SolveReport& rep) {
  const Scenario& s = spec.scenario;
  const int n = s.n_tx();
  RawDesignValues v;
  MatrixXcd sum = MatrixXcd::Zero(n, n);
  for (const MatrixVar& w : dp.w) {
    v.w.push_back(dp.power_unit * rep.value(w));
    sum += v.w.back();
  }
  if (dp.aux) {
    v.aux = dp.power_unit * rep.value(*dp.aux);
    v.r_x = sum + v.aux;
    v.relaxation_objective = dp.mse_unit * rep.objective_value;
  } else {
    v.r_x = sum;
    v.aux = MatrixXcd::Zero(n, n);
    const double fisher = dp.fisher_unit * rep.value(*dp.t);
    v.relaxation_objective = s.sigma_r2 / (2.0 * std::norm(spec.point.alpha) * s.t_len * fisher);
  }
  if (!dp.rho.empty()) {
    VectorXd rho(dp.rho.size());
    for (std::size_t k = 0; k < dp.rho.size(); ++k) rho[k] = std::clamp(rep.value(dp.rho[k]), 0.0, 1.0);
    v.rho = rho;
  }
  return v;
}

ConstraintReplay replay_constraints(const Scenario& s, const std::vector<MatrixXcd>& w, const MatrixXcd& r_x,
                                    const std::optional<VectorXd>& rho) {
  ConstraintReplay out;
  out.sinr = VectorXd::Zero(s.k());
  out.harvested = VectorXd::Zero(s.m());
  for (int k = 0; k < s.k(); ++k) {
    const std::optional<double> r = rho ? std::optional<double>((*rho)[k]) : std::nullopt;
    out.sinr[k] = sinr(s, w[k], r_x, k, r);
    if (s.eta[k] > 0) out.worst_sinr = std::max(out.worst_sinr, (s.eta[k] - out.sinr[k]) / s.eta[k]);
  }
  for (int m = 0; m < s.m(); ++m) {
    const std::optional<double> r = rho ? std::optional<double>((*rho)[m]) : std::nullopt;
    out.harvested[m] = harvested_power(s, r_x, m, r);
    if (s.q[m] > 0) out.worst_eh = std::max(out.worst_eh, (s.q[m] - out.harvested[m]) / s.q[m]);
  }
  out.power = r_x.trace().real();
  out.worst_power = std::max(0.0, (out.power - s.p_budget) / s.p_budget);
  return out;
}

BeamformerSolution solve_design(const DesignSpec& spec, const SolveOptions& options) {
  DesignProgram dp;
  try {
    dp = build_design(spec);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw StageError("build", e.what());
  }

  BeamformerSolution sol;
  try {
    sol.report = conic::solve_sdp(dp.program, options.tolerances);
  } catch (const ValidationError& e) {
    throw StageError("solve", e.what());
  }
  if (!sol.report.ok()) return sol;
  sol.feasible = true;

  RawDesignValues raw = read_values(spec, dp, sol.report);
  // A run accepted at the looser tolerance can overspend P by ~1e-8; scale
  // back onto the budget so the returned design is feasible.
  const double spent = raw.r_x.trace().real();
  if (spent > spec.scenario.p_budget) {
    const double f = spec.scenario.p_budget / spent;
    for (auto& w : raw.w) w *= f;
    raw.r_x *= f;
    raw.aux *= f;
  }
  sol.relaxed_w = raw.w;
  sol.r_x = raw.r_x;
  sol.rho = raw.rho;
  sol.relaxation_objective = raw.relaxation_objective;
  const Scenario& s = spec.scenario;

  try {
    if (spec.target == TargetKind::point) {
      if (options.rank_reduce) {
        const PurifyResult pr = purify(raw.w, PurificationData::from(s, spec.point));
        sol.w_mats = pr.w_mats;
        sol.purification_steps = pr.steps;
      } else {
        sol.w_mats = raw.w;
      }
      sol.r_x = MatrixXcd::Zero(s.n_tx(), s.n_tx());
      for (const auto& w : sol.w_mats) sol.r_x += w;
      sol.aux = MatrixXcd::Zero(s.n_tx(), s.n_tx());
      sol.objective = crb_point(spec.point, response_pair(s.geometry, spec.point.theta), sol.r_x, s.sigma_r2,
                                s.t_len);
    } else {
      if (options.rank_reduce) {
        const Theorem1Result t1 = extract_theorem1(raw.w, raw.r_x, s);
        sol.w_mats = t1.w_tilde;
      } else {
        sol.w_mats = raw.w;
      }
      sol.aux = sol.r_x;
      for (const auto& w : sol.w_mats) sol.aux -= w;
      sol.objective = mse_extended(sol.r_x, s.geometry.n_rx, s.sigma_r2, s.t_len);
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(spec.target == TargetKind::point ? "purify" : "extract", e.what());
  }

  for (const auto& w : sol.w_mats) {
    const int r = numerical_rank(w, kRankTol);
    sol.ranks.push_back(r);
    sol.max_eigen_ratio = std::max(sol.max_eigen_ratio, eigen_ratio(w));
    if (r == 0) {
      sol.w.push_back(VectorXcd::Zero(s.n_tx()));
      continue;
    }
    try {
      sol.w.push_back(vectorize(w));
    } catch (const NotRankOne&) {
      // rank > 1 survives: keep the dominant direction and report the rank
      const MatrixXcd v = low_rank_factor(w, kRankTol);
      sol.w.push_back(v.col(0));
    }
  }
  return sol;
}

}  // namespace iscpt
