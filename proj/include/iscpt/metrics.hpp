#pragma once

#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "iscpt/array_model.hpp"
#include "iscpt/scenario.hpp"
#include "iscpt/types.hpp"

namespace iscpt {

/// Echo block Y_R = G X + N_R observed over t_len symbols.
struct SensingFrame {
  MatrixXcd y_r;  // N_r x T
  MatrixXcd x;    // N_t x T
  int t_len() const { return static_cast<int>(x.cols()); }
};

/// Receive SINR of IR k.
///
/// `aux` is the covariance of any extra streams (dedicated sensing streams)
/// whose power also interferes at every IR. With `rho_k` set, the
/// power-splitting form of a co-located receiver is used.
double sinr(const Scenario& s, const std::vector<VectorXcd>& w, int k,
            std::optional<double> rho_k = std::nullopt, const MatrixXcd* aux = nullptr);

/// SINR of IR k from covariances: signal tr(H_k W_k), interference
/// tr(H_k (R_X - W_k)), which covers other users and any sensing streams.
double sinr(const Scenario& s, const MatrixXcd& w_k, const MatrixXcd& r_x, int k,
            std::optional<double> rho_k = std::nullopt);

/// Harvested power (mW per symbol) at ER m; rho_m scales it for co-located receivers.
double harvested_power(const Scenario& s, const MatrixXcd& r_x, int m,
                       std::optional<double> rho_m = std::nullopt);

/// tr(Ad^H Ad R) - |tr(Ad^H A R)|^2 / tr(A^H A R).
template <typename Scalar = double>
Scalar fisher_term(const ResponsePair<Scalar>& pair, const CMatrix<Scalar>& r_x) {
  const Scalar aa = (pair.a_mat.adjoint() * pair.a_mat * r_x).trace().real();
  const Scalar dd = (pair.a_dot.adjoint() * pair.a_dot * r_x).trace().real();
  const Complex<Scalar> da = (pair.a_dot.adjoint() * pair.a_mat * r_x).trace();
  if (!(aa > Scalar(1e-12) * std::abs(r_x.trace().real())) || aa <= Scalar(0))
    throw DegenerateIllumination("fisher_term: target is not illuminated");
  return dd - std::norm(da) / aa;
}

/// Angle CRB of a point target with unknown complex reflection coefficient.
template <typename Scalar = double>
Scalar crb_point(const PointTarget& target, const ResponsePair<Scalar>& pair,
                 const CMatrix<Scalar>& r_x, Scalar sigma_r2, int t_len) {
  const Scalar f = fisher_term(pair, r_x);
  if (!(f > Scalar(0))) throw DegenerateIllumination("crb_point: zero Fisher information");
  return sigma_r2 / (Scalar(2) * std::norm(target.alpha) * Scalar(t_len) * f);
}

/// TRM estimation error (N_r sigma^2 / T) tr(R^{-1}).
template <typename Scalar = double>
Scalar mse_extended(const CMatrix<Scalar>& r_x, int n_rx, Scalar sigma_r2, int t_len) {
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(r_x, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > Scalar(1e-10)))
    throw SingularCovariance("mse_extended: transmit covariance is singular");
  return Scalar(n_rx) * sigma_r2 / Scalar(t_len) * es.eigenvalues().cwiseInverse().sum();
}

/// Maximum-likelihood TRM estimate Y X^H (X X^H)^{-1}; throws SingularDesign
/// when X lacks full row rank.
MatrixXcd mle_trm(const SensingFrame& frame);

/// Minimum-norm least-squares TRM estimate Y X^+. Agrees with mle_trm when X
/// has full row rank; otherwise it still satisfies G_hat X X^H = Y X^H, which
/// is all the point-target estimators consume.
MatrixXcd min_norm_trm(const SensingFrame& frame);

}  // namespace iscpt
