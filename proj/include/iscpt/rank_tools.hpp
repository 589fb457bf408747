#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "iscpt/array_model.hpp"
#include "iscpt/scenario.hpp"
#include "iscpt/types.hpp"

namespace iscpt {

/// Matrices whose traces against sum W_k (or individual W_k) must be kept
/// fixed while the rank of a point-target solution is reduced.
struct PurificationData {
  MatrixXcd dd;  // Ad^H Ad
  MatrixXcd aa;  // A^H A
  MatrixXcd da;  // Ad^H A (not Hermitian: real and imaginary rows)
  std::vector<MatrixXcd> h;  // H_k
  std::vector<MatrixXcd> c;  // ER channels (H_k when co-located)
  VectorXd eta;
  VectorXd beta;

  static PurificationData from(const Scenario& s, const PointTarget& target);
  int rows() const { return 5 + static_cast<int>(h.size() + c.size()); }
};

struct PurificationRecord {
  int iteration = 0;
  int sum_rank_sq = 0;
  double fisher = 0.0;
  double max_residual = 0.0;
};

struct PurificationState {
  std::vector<MatrixXcd> w_mats;
  std::vector<MatrixXcd> v_factors;
  std::vector<int> ranks;
  int iteration = 0;
  VectorXd reference;  // preserved quantities at the start
  std::vector<PurificationRecord> history;

  static PurificationState start(std::vector<MatrixXcd> w, const PurificationData& data);
  int sum_rank_sq() const;
};

/// Numerical rank threshold (relative to each W_k's largest eigenvalue).
inline constexpr double kRankTol = 1e-6;

/// Values of every preserved row (5 + K + M) at the given matrices.
VectorXd preserved_values(const std::vector<MatrixXcd>& w, const PurificationData& data);

/// One rank-reduction step, or nullopt when the homogeneous system has no
/// nonzero solution (or every W_k is already rank one). Throws
/// PurificationDrift when the update moves a preserved quantity by more than
/// 1e-6 relative; the input state is left untouched.
std::optional<PurificationState> rr_step(const PurificationState& state, const PurificationData& data);

struct PurifyResult {
  std::vector<MatrixXcd> w_mats;
  std::vector<int> ranks;
  int steps = 0;
  std::vector<PurificationRecord> history;
};

/// Iterates rr_step to termination; writes the trace as CSV when `trace` is set.
PurifyResult purify(std::vector<MatrixXcd> w, const PurificationData& data, std::ostream* trace = nullptr);

struct Theorem1Result {
  std::vector<MatrixXcd> w_tilde;
  MatrixXcd r_x;
};

/// W~_k = W_k H_k W_k / tr(H_k W_k) with R_X unchanged.
Theorem1Result extract_theorem1(const std::vector<MatrixXcd>& w_bar, const MatrixXcd& r_bar, const Scenario& s);

/// lambda_1 u_1 u_1^H of each matrix (lowest index wins eigenvalue ties).
std::vector<MatrixXcd> eig_baseline(const std::vector<MatrixXcd>& w_bar);

/// Transmit covariance of the eigen baseline: its rank-one W_k plus the
/// relaxation's sensing covariance, rescaled to the power budget.
MatrixXcd eig_baseline_covariance(const std::vector<MatrixXcd>& w_bar, const MatrixXcd& r_bar, double p_budget);

/// sqrt(lambda_1) u_1 with the first nonzero entry real positive; throws
/// NotRankOne when lambda_2 / lambda_1 > 1e-4 or the matrix is zero.
VectorXcd vectorize(const MatrixXcd& w);

}  // namespace iscpt
