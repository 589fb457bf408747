#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "iscpt/array_model.hpp"
#include "iscpt/metrics.hpp"

namespace iscpt {

using Eigen::Vector2d;

/// Two-way amplitude law |alpha(d)| = kappa / d^exponent.
struct DistanceModel {
  double kappa = 0.01 * 500.0;  // alpha = 0.01 at sqrt(500) m
  double exponent = 2.0;
};

/// Angle search: coarse grid on [lo, hi], then golden section inside the
/// best cell down to `tol`.
struct AngleSearch {
  double lo = deg_to_rad(-89.5);
  double hi = deg_to_rad(89.5);
  double step = deg_to_rad(0.5);
  double tol = 1e-5;
};

struct PositionEstimate {
  cd alpha_hat;
  double theta_hat = 0.0;
  double d_hat = 0.0;
  Vector2d position = Vector2d::Zero();
  std::vector<std::pair<double, double>> profile;  // (theta, objective) on the coarse grid
};

/// tr(R A^H G_hat) / tr(R A^H A) at the given angle.
cd estimate_alpha(const MatrixXcd& g_hat, const ResponsePair<>& pair, const MatrixXcd& r_x);

/// |tr(R A^H(theta) G_hat)|^2 / tr(R A^H(theta) A(theta)).
double angle_objective(const ArrayGeometry& geometry, const MatrixXcd& g_hat, const MatrixXcd& r_x, double theta);

/// Maximizer of angle_objective; `profile` receives the coarse grid if set.
double estimate_theta(const ArrayGeometry& geometry, const MatrixXcd& g_hat, const MatrixXcd& r_x,
                      const AngleSearch& search = {},
                      std::vector<std::pair<double, double>>* profile = nullptr);

double estimate_distance(cd alpha_hat, const DistanceModel& model = {});

/// bs + d (sin theta, cos theta): theta is measured from broadside (+y).
Vector2d estimate_position(const Vector2d& bs_xy, double theta_hat, double d_hat);

/// Ground-truth geometry of a point target seen from the base station.
struct TargetGeometry {
  double theta = 0.0;
  double distance = 0.0;
  cd alpha;
};
TargetGeometry target_geometry(const Vector2d& bs_xy, const Vector2d& target_xy, const DistanceModel& model = {});

/// One echo block: X = sum_k w_k s_k^T (+ aux^{1/2} z) and Y = G X + N.
///
/// Symbols and noise come from the (seed, trial) sub-streams, so trials are
/// independent of each other and of how they are scheduled.
SensingFrame synthesize_frame(const MatrixXcd& g, const std::vector<VectorXcd>& w, const MatrixXcd* aux,
                              int t_len, double sigma_r2, std::uint64_t seed, std::uint64_t trial,
                              bool noiseless = false);

/// TRM estimate, then alpha, theta, distance and position. The sample
/// covariance X X^H / T stands in for R_X, which makes the noiseless case exact.
PositionEstimate locate(const ArrayGeometry& geometry, const SensingFrame& frame, const Vector2d& bs_xy,
                        const DistanceModel& model = {}, const AngleSearch& search = {});

}  // namespace iscpt
