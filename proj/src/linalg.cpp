#include "iscpt/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace iscpt {

bool is_hermitian(const MatrixXcd& h, double tol) {
  if (h.rows() != h.cols()) return false;
  return (h - h.adjoint()).norm() <= tol * std::max(1.0, h.norm());
}

MatrixXd embed_hermitian(const MatrixXcd& h) {
  if (!is_hermitian(h)) throw ValidationError("embed_hermitian: input is not Hermitian");
  const Eigen::Index n = h.rows();
  MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.bottomRightCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  return out;
}

MatrixXcd extract_hermitian(const MatrixXd& x) {
  const Eigen::Index n = x.rows() / 2;
  const MatrixXd re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  const MatrixXd im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  MatrixXcd out(n, n);
  out.real() = re;
  out.imag() = im;
  return 0.5 * (out + out.adjoint().eval());
}

HermitianEig hermitian_eig(const MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  return {es.eigenvalues(), es.eigenvectors()};
}

MatrixXcd low_rank_factor(const MatrixXcd& w, double tol) {
  const HermitianEig e = hermitian_eig(w);
  const Eigen::Index n = w.rows();
  const double top = n > 0 ? e.values[n - 1] : 0.0;
  if (!(top > 0)) return MatrixXcd(n, 0);
  int r = 0;
  for (Eigen::Index i = n - 1; i >= 0 && e.values[i] > tol * top; --i) ++r;
  MatrixXcd v(n, r);
  for (int j = 0; j < r; ++j) v.col(j) = e.vectors.col(n - 1 - j) * std::sqrt(e.values[n - 1 - j]);
  return v;
}

int numerical_rank(const MatrixXcd& w, double tol) {
  return static_cast<int>(low_rank_factor(w, tol).cols());
}

double eigen_ratio(const MatrixXcd& w) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(w, Eigen::EigenvaluesOnly);
  const Eigen::Index n = w.rows();
  if (n < 2 || !(es.eigenvalues()[n - 1] > 0)) return 0.0;
  return std::max(0.0, es.eigenvalues()[n - 2]) / es.eigenvalues()[n - 1];
}

namespace {

VectorXd fix_sign(VectorXd v) {
  v.normalize();
  const double cut = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > cut) {
      if (v[i] < 0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace

std::optional<VectorXd> nullspace_vector(const MatrixXd& map) {
  const Eigen::Index rows = map.rows();
  const Eigen::Index cols = map.cols();
  if (cols == 0) return std::nullopt;
  if (rows == 0) return VectorXd::Unit(cols, 0);

  if (cols <= 512) {
    Eigen::JacobiSVD<MatrixXd> svd(map, Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    if (rows < cols || smax == 0.0) return fix_sign(svd.matrixV().col(cols - 1));
    if (sv[cols - 1] <= 1e-9 * smax) return fix_sign(svd.matrixV().col(cols - 1));
    return std::nullopt;
  }

  // Wide maps: the orthogonal complement of the row space from a
  // rank-revealing QR of the transpose.
  Eigen::ColPivHouseholderQR<MatrixXd> qr(map.transpose());
  qr.setThreshold(1e-9);
  const Eigen::Index rank = qr.rank();
  if (rank >= cols) return std::nullopt;
  VectorXd v = qr.householderQ() * VectorXd::Unit(cols, rank);
  return fix_sign(v);
}

}  // namespace iscpt
