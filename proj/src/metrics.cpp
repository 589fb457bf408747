#include "iscpt/metrics.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

namespace iscpt {

double sinr(const Scenario& s, const std::vector<VectorXcd>& w, int k, std::optional<double> rho_k,
            const MatrixXcd* aux) {
  if (k < 0 || k >= s.k()) throw ValidationError("sinr: receiver index out of range");
  if (static_cast<int>(w.size()) < s.k()) throw ValidationError("sinr: one beamformer per IR required");
  double split = 1.0;
  if (rho_k) {
    if (s.layout != Layout::colocated) throw ValidationError("sinr: power splitting needs a co-located layout");
    if (*rho_k < 0.0 || *rho_k > 1.0) throw ValidationError("sinr: rho must lie in [0, 1]");
    split = 1.0 - *rho_k;
  }
  const VectorXcd hk = s.h_vec(k);
  const double signal = std::norm(hk.dot(w[k]));
  double interference = 0.0;
  for (int i = 0; i < static_cast<int>(w.size()); ++i)
    if (i != k) interference += std::norm(hk.dot(w[i]));
  if (aux) interference += (hk.adjoint() * (*aux) * hk)(0, 0).real();
  return split * signal / (split * interference + s.sigma_c2);
}

double sinr(const Scenario& s, const MatrixXcd& w_k, const MatrixXcd& r_x, int k,
            std::optional<double> rho_k) {
  if (k < 0 || k >= s.k()) throw ValidationError("sinr: receiver index out of range");
  double split = 1.0;
  if (rho_k) {
    if (s.layout != Layout::colocated) throw ValidationError("sinr: power splitting needs a co-located layout");
    if (*rho_k < 0.0 || *rho_k > 1.0) throw ValidationError("sinr: rho must lie in [0, 1]");
    split = 1.0 - *rho_k;
  }
  const VectorXcd hk = s.h_vec(k);
  const double signal = (hk.adjoint() * w_k * hk)(0, 0).real();
  const double interference = (hk.adjoint() * (r_x - w_k) * hk)(0, 0).real();
  return split * signal / (split * interference + s.sigma_c2);
}

double harvested_power(const Scenario& s, const MatrixXcd& r_x, int m, std::optional<double> rho_m) {
  if (m < 0 || m >= s.m()) throw ValidationError("harvested_power: receiver index out of range");
  const VectorXcd cm = s.c_vec(m);
  double p = s.beta[m] * (cm.adjoint() * r_x * cm)(0, 0).real();
  if (rho_m) p *= *rho_m;
  return p;
}

MatrixXcd mle_trm(const SensingFrame& frame) {
  const MatrixXcd gram = frame.x * frame.x.adjoint();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0) || es.eigenvalues().minCoeff() <= 1e-12 * top)
    throw SingularDesign("mle_trm: transmitted block lacks full row rank");
  return frame.y_r * frame.x.adjoint() * gram.inverse();
}

MatrixXcd min_norm_trm(const SensingFrame& frame) {
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(frame.x.adjoint());
  // X^H G^H = Y^H in the least-squares, minimum-norm sense.
  return cod.solve(frame.y_r.adjoint()).adjoint();
}

}  // namespace iscpt
