#pragma once

#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "iscpt/types.hpp"

namespace iscpt {

/// Half-wavelength uniform linear arrays at the base station.
///
/// Element offsets are measured in half-wavelength units from the array
/// centre, so element i sits at (i - (N-1)/2) and its phase at angle theta is
/// pi * offset * sin(theta).
struct ArrayGeometry {
  int n_tx = 16;
  int n_rx = 20;
  double spacing = 0.5;  // wavelengths

  ArrayGeometry() = default;
  ArrayGeometry(int tx, int rx) : n_tx(tx), n_rx(rx) {
    if (tx < 1 || rx < 1) throw ValidationError("array needs at least one element per side");
  }

  static VectorXd centered_offsets(int n) {
    VectorXd pos(n);
    for (int i = 0; i < n; ++i) pos[i] = i - 0.5 * (n - 1);
    return pos;
  }
  VectorXd element_positions_tx() const { return centered_offsets(n_tx) * spacing; }
  VectorXd element_positions_rx() const { return centered_offsets(n_rx) * spacing; }
};

struct PointTarget {
  cd alpha{0.01, 0.0};
  double theta = 0.0;  // radians, |theta| < pi/2
};

/// A(theta) = b a^H and its angle derivative.
template <typename Scalar = double>
struct ResponsePair {
  CMatrix<Scalar> a_mat;
  CMatrix<Scalar> a_dot;
};

namespace detail {

template <typename Scalar>
CVector<Scalar> ula_steering(int n, Scalar theta) {
  CVector<Scalar> v(n);
  const Scalar s = std::sin(theta);
  for (int i = 0; i < n; ++i) {
    const Scalar offset = Scalar(i) - Scalar(0.5) * Scalar(n - 1);
    v[i] = std::polar(Scalar(1), Scalar(kPi) * offset * s);
  }
  return v;
}

template <typename Scalar>
CVector<Scalar> ula_steering_derivative(int n, Scalar theta) {
  CVector<Scalar> v = ula_steering<Scalar>(n, theta);
  const Scalar c = std::cos(theta);
  for (int i = 0; i < n; ++i) {
    const Scalar offset = Scalar(i) - Scalar(0.5) * Scalar(n - 1);
    v[i] *= Complex<Scalar>(0, Scalar(kPi) * offset * c);
  }
  return v;
}

}  // namespace detail

template <typename Scalar = double>
CVector<Scalar> steering_tx(const ArrayGeometry& g, Scalar theta) {
  return detail::ula_steering<Scalar>(g.n_tx, theta);
}

template <typename Scalar = double>
CVector<Scalar> steering_rx(const ArrayGeometry& g, Scalar theta) {
  return detail::ula_steering<Scalar>(g.n_rx, theta);
}

template <typename Scalar = double>
CVector<Scalar> steering_tx_derivative(const ArrayGeometry& g, Scalar theta) {
  return detail::ula_steering_derivative<Scalar>(g.n_tx, theta);
}

template <typename Scalar = double>
CVector<Scalar> steering_rx_derivative(const ArrayGeometry& g, Scalar theta) {
  return detail::ula_steering_derivative<Scalar>(g.n_rx, theta);
}

template <typename Scalar = double>
ResponsePair<Scalar> response_pair(const ArrayGeometry& g, Scalar theta) {
  const CVector<Scalar> a = steering_tx<Scalar>(g, theta);
  const CVector<Scalar> b = steering_rx<Scalar>(g, theta);
  const CVector<Scalar> a_d = steering_tx_derivative<Scalar>(g, theta);
  const CVector<Scalar> b_d = steering_rx_derivative<Scalar>(g, theta);
  ResponsePair<Scalar> out;
  out.a_mat = b * a.adjoint();
  out.a_dot = b_d * a.adjoint() + b * a_d.adjoint();
  return out;
}

/// Transmit beampattern a^H(theta) R a(theta) over a grid of angles.
template <typename Scalar = double>
std::vector<Scalar> beampattern(const ArrayGeometry& g, const CMatrix<Scalar>& r_x,
                                std::span<const Scalar> theta_grid) {
  if (r_x.rows() != g.n_tx || r_x.cols() != g.n_tx)
    throw ValidationError("beampattern: covariance must be n_tx x n_tx");
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(r_x, Eigen::EigenvaluesOnly);
  const Scalar scale = std::max(Scalar(1), r_x.norm());
  if (es.eigenvalues().minCoeff() < Scalar(-1e-8) * scale)
    throw ValidationError("beampattern: covariance is not positive semidefinite");
  std::vector<Scalar> out;
  out.reserve(theta_grid.size());
  for (Scalar th : theta_grid) {
    const CVector<Scalar> a = steering_tx<Scalar>(g, th);
    out.push_back((a.adjoint() * r_x * a)(0, 0).real());
  }
  return out;
}

}  // namespace iscpt
