#include "iscpt/positioning.hpp"

#include <algorithm>
#include <cmath>

#include "iscpt/rng.hpp"

namespace iscpt {

namespace {

// b^H G R a and N_r a^H R a: the two traces of the estimators with A = b a^H.
std::pair<cd, double> traces(const ArrayGeometry& geometry, const MatrixXcd& g_hat, const MatrixXcd& r_x,
                             double theta) {
  const VectorXcd a = steering_tx(geometry, theta);
  const VectorXcd b = steering_rx(geometry, theta);
  const VectorXcd ra = r_x * a;
  const cd num = b.dot(g_hat * ra);
  const double den = geometry.n_rx * a.dot(ra).real();
  return {num, den};
}

}  // namespace

cd estimate_alpha(const MatrixXcd& g_hat, const ResponsePair<>& pair, const MatrixXcd& r_x) {
  const double den = (r_x * pair.a_mat.adjoint() * pair.a_mat).trace().real();
  if (!(den > 1e-12 * std::max(1.0, std::abs(r_x.trace()))))
    throw DegenerateIllumination("estimate_alpha: target direction receives no power");
  return (r_x * pair.a_mat.adjoint() * g_hat).trace() / den;
}

double angle_objective(const ArrayGeometry& geometry, const MatrixXcd& g_hat, const MatrixXcd& r_x, double theta) {
  const auto [num, den] = traces(geometry, g_hat, r_x, theta);
  return den > 0 ? std::norm(num) / den : 0.0;
}

double estimate_theta(const ArrayGeometry& geometry, const MatrixXcd& g_hat, const MatrixXcd& r_x,
                      const AngleSearch& search, std::vector<std::pair<double, double>>* profile) {
  const double edge = kPi / 2;
  if (!(search.lo < search.hi) || search.lo <= -edge || search.hi >= edge || !(search.step > 0) ||
      !(search.tol > 0))
    throw ValidationError("estimate_theta: search interval must be a nonempty subset of (-pi/2, pi/2)");

  const int cells = static_cast<int>(std::ceil((search.hi - search.lo) / search.step - 1e-9));
  auto f = [&](double th) { return angle_objective(geometry, g_hat, r_x, th); };
  if (profile) profile->clear();
  double best_th = search.lo;
  double best_v = -1.0;
  for (int i = 0; i <= cells; ++i) {
    const double th = std::min(search.lo + i * search.step, search.hi);
    const double v = f(th);
    if (profile) profile->emplace_back(th, v);
    if (v > best_v) {
      best_v = v;
      best_th = th;
    }
  }

  // Golden section over the two cells adjacent to the best grid point.
  double a = std::max(search.lo, best_th - search.step);
  double b = std::min(search.hi, best_th + search.step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > search.tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  const double mid = 0.5 * (a + b);
  return f(mid) >= best_v ? mid : best_th;
}

double estimate_distance(cd alpha_hat, const DistanceModel& model) {
  const double amp = std::abs(alpha_hat);
  if (!(amp > 0)) throw ValidationError("estimate_distance: zero reflection amplitude");
  if (!(model.kappa > 0) || !(model.exponent > 0)) throw ValidationError("estimate_distance: invalid model");
  return std::pow(model.kappa / amp, 1.0 / model.exponent);
}

Vector2d estimate_position(const Vector2d& bs_xy, double theta_hat, double d_hat) {
  return bs_xy + d_hat * Vector2d(std::sin(theta_hat), std::cos(theta_hat));
}

TargetGeometry target_geometry(const Vector2d& bs_xy, const Vector2d& target_xy, const DistanceModel& model) {
  const Vector2d rel = target_xy - bs_xy;
  TargetGeometry t;
  t.distance = rel.norm();
  if (!(t.distance > 0) || !(rel.y() > 0)) throw ValidationError("target must lie in front of the array");
  t.theta = std::atan2(rel.x(), rel.y());
  t.alpha = model.kappa / std::pow(t.distance, model.exponent);
  return t;
}

SensingFrame synthesize_frame(const MatrixXcd& g, const std::vector<VectorXcd>& w, const MatrixXcd* aux,
                              int t_len, double sigma_r2, std::uint64_t seed, std::uint64_t trial,
                              bool noiseless) {
  if (t_len < 1) throw ValidationError("synthesize_frame: symbol count must be positive");
  const Eigen::Index n_tx = g.cols();
  SensingFrame frame;
  ComplexGaussian symbols(seed, Stream::waveform, trial);
  frame.x = MatrixXcd::Zero(n_tx, t_len);
  for (const VectorXcd& wk : w) {
    if (wk.size() != n_tx) throw ValidationError("synthesize_frame: beamformer length must equal n_tx");
    frame.x += wk * symbols.matrix(1, t_len);
  }
  if (aux && aux->size() > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(*aux);
    const VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    frame.x += es.eigenvectors() * lam.asDiagonal() * symbols.matrix(static_cast<int>(n_tx), t_len);
  }
  frame.y_r = g * frame.x;
  if (!noiseless) {
    ComplexGaussian noise(seed, Stream::noise, trial);
    frame.y_r += std::sqrt(sigma_r2) * noise.matrix(static_cast<int>(g.rows()), t_len);
  }
  return frame;
}

PositionEstimate locate(const ArrayGeometry& geometry, const SensingFrame& frame, const Vector2d& bs_xy,
                        const DistanceModel& model, const AngleSearch& search) {
  const MatrixXcd g_hat = min_norm_trm(frame);
  const MatrixXcd r_x = frame.x * frame.x.adjoint() / static_cast<double>(frame.t_len());
  PositionEstimate est;
  est.theta_hat = estimate_theta(geometry, g_hat, r_x, search, &est.profile);
  est.alpha_hat = estimate_alpha(g_hat, response_pair(geometry, est.theta_hat), r_x);
  est.d_hat = estimate_distance(est.alpha_hat, model);
  est.position = estimate_position(bs_xy, est.theta_hat, est.d_hat);
  return est;
}

}  // namespace iscpt
