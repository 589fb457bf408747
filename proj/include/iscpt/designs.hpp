#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "iscpt/array_model.hpp"
#include "iscpt/conic.hpp"
#include "iscpt/scenario.hpp"

namespace iscpt {

enum class TargetKind { point, extended };
enum class ObjectiveKind { crb_min, mse_min };

struct DesignSpec {
  Scenario scenario;
  TargetKind target = TargetKind::point;
  PointTarget point;
  ObjectiveKind objective = ObjectiveKind::crb_min;

  static DesignSpec point_target(Scenario s, PointTarget t);
  static DesignSpec extended_target(Scenario s);
  void validate() const;
};

/// A design program and the handles needed to read its solution.
///
/// Powers inside the program are in units of the budget P (W = P W'), which
/// keeps every row of order one; unscale() maps values back.
struct DesignProgram {
  conic::ConicProgram program;
  std::vector<conic::MatrixVar> w;
  std::optional<conic::ScalarVar> t;   // point target
  std::optional<conic::MatrixVar> y;   // extended: [[U, I], [I, R_X]]
  std::optional<conic::MatrixVar> aux; // extended: R_X - sum W_k
  std::vector<conic::ScalarVar> rho, c, d;
  double power_unit = 1.0;   // P
  double fisher_unit = 1.0;  // physical Fisher term per unit of t
  double mse_unit = 1.0;     // physical MSE per unit of tr(U)
};

DesignProgram build_point_separated(const DesignSpec& spec);
DesignProgram build_point_colocated(const DesignSpec& spec);
DesignProgram build_extended_separated(const DesignSpec& spec);
DesignProgram build_extended_colocated(const DesignSpec& spec);
/// Dispatches on target kind and layout.
DesignProgram build_design(const DesignSpec& spec);

struct BeamformerSolution {
  bool feasible = false;
  conic::SolveReport report;
  std::vector<VectorXcd> w;           // one per IR (zero when W_k vanishes)
  std::vector<MatrixXcd> w_mats;      // rank-reduced W_k
  std::vector<MatrixXcd> relaxed_w;   // W_k straight from the relaxation
  MatrixXcd r_x;
  MatrixXcd aux;                      // R_X - sum W_k (extended target)
  std::optional<VectorXd> rho;
  double objective = std::numeric_limits<double>::quiet_NaN();             // CRB (rad^2) or MSE
  double relaxation_objective = std::numeric_limits<double>::quiet_NaN();  // same units
  std::vector<int> ranks;
  int purification_steps = 0;
  double max_eigen_ratio = 0.0;
};

/// Design programs are solved past the generic defaults: at a 1e-9 gap the
/// interior point leaves eigenvalue tails near 1e-6 of the dominant one,
/// which is exactly the rank-1 threshold.
inline conic::Tolerances design_tolerances() {
  conic::Tolerances t;
  t.gap = 1e-11;
  t.feasibility = 1e-11;
  return t;
}

struct SolveOptions {
  conic::Tolerances tolerances = design_tolerances();
  bool rank_reduce = true;
};

/// Builds, solves and post-processes one design. Infeasible programs return
/// feasible = false; failures inside a stage raise StageError.
BeamformerSolution solve_design(const DesignSpec& spec, const SolveOptions& options = {});

/// Unscaled transmit covariance, W_k and rho from a solved program.
struct RawDesignValues {
  std::vector<MatrixXcd> w;
  MatrixXcd r_x;
  MatrixXcd aux;
  std::optional<VectorXd> rho;
  double relaxation_objective = 0.0;
};
RawDesignValues read_values(const DesignSpec& spec, const DesignProgram& dp, const conic::SolveReport& rep);

struct ConstraintReplay {
  VectorXd sinr;            // achieved SINR per IR (linear)
  VectorXd harvested;       // harvested power per ER (mW)
  double power = 0.0;       // tr(R_X)
  double worst_sinr = 0.0;  // max relative shortfall, 0 when all satisfied
  double worst_eh = 0.0;
  double worst_power = 0.0;
};

/// Evaluates every constraint with the metrics module.
ConstraintReplay replay_constraints(const Scenario& s, const std::vector<MatrixXcd>& w,
                                    const MatrixXcd& r_x, const std::optional<VectorXd>& rho);

}  // namespace iscpt
