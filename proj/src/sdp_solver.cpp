// Homogeneous self-dual primal-dual interior-point method for block SDPs
// with an LP cone and free variables. NT scaling, Mehrotra predictor-corrector,
// dense Schur complement.
#include "iscpt/sdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace iscpt::conic {

double SymCoeff::inner(const MatrixXd& x) const {
  if (dense.size() > 0) return dense.cwiseProduct(x).sum();
  double acc = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t)
    acc += r[t] == c[t] ? v[t] * x(r[t], r[t]) : v[t] * (x(r[t], c[t]) + x(c[t], r[t]));
  return acc;
}

void SymCoeff::add_scaled_to(MatrixXd& out, double s) const {
  if (dense.size() > 0) {
    out.noalias() += s * dense;
    return;
  }
  for (std::size_t t = 0; t < v.size(); ++t) {
    out(r[t], c[t]) += s * v[t];
    if (r[t] != c[t]) out(c[t], r[t]) += s * v[t];
  }
}

MatrixXd SymCoeff::congruence(const MatrixXd& w) const {
  if (dense.size() > 0) {
    MatrixXd tmp = dense * w;
    return w * tmp;
  }
  MatrixXd out = MatrixXd::Zero(w.rows(), w.cols());
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (r[t] == c[t]) {
      out.noalias() += v[t] * w.col(r[t]) * w.row(r[t]);
    } else {
      out.noalias() += v[t] * w.col(r[t]) * w.row(c[t]);
      out.noalias() += v[t] * w.col(c[t]) * w.row(r[t]);
    }
  }
  return out;
}

double SymCoeff::sq_norm() const {
  if (dense.size() > 0) return dense.squaredNorm();
  double acc = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) acc += (r[t] == c[t] ? 1.0 : 2.0) * v[t] * v[t];
  return acc;
}

void SymCoeff::scale(double s) {
  for (double& x : v) x *= s;
  if (dense.size() > 0) dense *= s;
}

namespace {

using Blocks = std::vector<MatrixXd>;

void project_structured(MatrixXd& m) {
  const Eigen::Index n = m.rows() / 2;
  const MatrixXd p = 0.5 * (m.topLeftCorner(n, n) + m.bottomRightCorner(n, n));
  const MatrixXd q = 0.5 * (m.bottomLeftCorner(n, n) - m.topRightCorner(n, n));
  m.topLeftCorner(n, n) = p;
  m.bottomRightCorner(n, n) = p;
  m.bottomLeftCorner(n, n) = q;
  m.topRightCorner(n, n) = -q;
}

void symmetrize(MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

double dot(const Blocks& a, const Blocks& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k].cwiseProduct(b[k]).sum();
  return acc;
}

double sq_norm(const Blocks& a) {
  double acc = 0.0;
  for (const auto& m : a) acc += m.squaredNorm();
  return acc;
}

/// Largest alpha with L L^T + alpha d >= 0 (infinity if unbounded).
double max_step(const MatrixXd& l, const MatrixXd& d) {
  const auto tri = l.triangularView<Eigen::Lower>();
  MatrixXd t = tri.solve(d);
  MatrixXd u = tri.solve(t.transpose());
  symmetrize(u);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(u, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()[0];
  return lo < 0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

double max_step_lp(const VectorXd& x, const VectorXd& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx[i] < 0) a = std::min(a, -x[i] / dx[i]);
  return a;
}

double max_step_scalar(double x, double dx) {
  return dx < 0 ? -x / dx : std::numeric_limits<double>::infinity();
}

struct Scaling {
  MatrixXd w;     // W = G G^T
  MatrixXd g;     // G
  MatrixXd ginv;  // G^{-1}
  VectorXd d;     // scaled point
  MatrixXd lx;    // chol(X)
  MatrixXd ls;    // chol(S)
};

bool nt_scaling(const MatrixXd& x, const MatrixXd& s, Scaling& out) {
  Eigen::LLT<MatrixXd> cx(x);
  Eigen::LLT<MatrixXd> cs(s);
  if (cx.info() != Eigen::Success || cs.info() != Eigen::Success) return false;
  out.lx = cx.matrixL();
  out.ls = cs.matrixL();
  const MatrixXd prod = out.ls.transpose() * out.lx;
  Eigen::JacobiSVD<MatrixXd> svd(prod, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.d = svd.singularValues();
  if (!(out.d.minCoeff() > 0)) return false;
  const VectorXd isd = out.d.cwiseSqrt().cwiseInverse();
  out.g = out.lx * svd.matrixV() * isd.asDiagonal();
  out.ginv = isd.asDiagonal() * svd.matrixU().transpose() * out.ls.transpose();
  out.w = out.g * out.g.transpose();
  symmetrize(out.w);
  return true;
}

struct Direction {
  Blocks dx, ds;
  VectorXd dxl, dsl, df, dy;
  double dtau = 0, dkappa = 0;
};

class Solver {
 public:
  Solver(const StandardForm& sf, const Tolerances& tol) : sf_(sf), tol_(tol) {
    nb_ = static_cast<int>(sf.dims.size());
    by_block_.resize(nb_);
    for (int i = 0; i < sf.m; ++i)
      for (const SymCoeff& a : sf.rows[i]) by_block_[a.block].push_back({i, &a});
    nu_ = sf.n_lp;
    for (int d : sf.dims) nu_ += d;
    c_lp_ = sf.c_lp.size() ? sf.c_lp : VectorXd::Zero(sf.n_lp);
    c_free_ = sf.c_free.size() ? sf.c_free : VectorXd::Zero(sf.n_free);
    a_lp_t_ = sf.a_lp.transpose();
    a_free_dense_ = MatrixXd(sf.a_free);
  }

  StandardSolution run();

 private:
  VectorXd apply_a(const Blocks& x, const VectorXd& xl, const VectorXd& f) const {
    VectorXd out = VectorXd::Zero(sf_.m);
    for (int i = 0; i < sf_.m; ++i)
      for (const SymCoeff& a : sf_.rows[i]) out[i] += a.inner(x[a.block]);
    if (sf_.n_lp) out += sf_.a_lp * xl;
    if (sf_.n_free) out += a_free_dense_ * f;
    return out;
  }

  Blocks apply_at(const VectorXd& y) const {
    Blocks out(nb_);
    for (int b = 0; b < nb_; ++b) {
      out[b] = MatrixXd::Zero(sf_.dims[b], sf_.dims[b]);
      for (const auto& [i, a] : by_block_[b])
        if (y[i] != 0.0) a->add_scaled_to(out[b], y[i]);
    }
    return out;
  }

  bool build_schur(const std::vector<Scaling>& sc, const VectorXd& dl);
  void solve_kkt(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& df) const;
  void solve_kkt_once(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& df) const;
  Direction direction(double eta, const Blocks& rmat, const VectorXd& rl, double r_tk,
                      const std::vector<Scaling>& sc, const VectorXd& dl);

  const StandardForm& sf_;
  Tolerances tol_;
  int nb_ = 0;
  int nu_ = 0;
  std::vector<std::vector<std::pair<int, const SymCoeff*>>> by_block_;
  VectorXd c_lp_, c_free_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_lp_t_;
  MatrixXd a_free_dense_;

  // iterate
  Blocks x_, s_;
  VectorXd xl_, sl_, f_, y_;
  double tau_ = 1, kappa_ = 1;

  // residuals
  VectorXd rp_, rdl_, rf_;
  Blocks rd_;
  double rg_ = 0;

  // per-iteration factorizations
  MatrixXd schur_;
  Eigen::LLT<MatrixXd> schur_llt_;
  Eigen::PartialPivLU<MatrixXd> kkt_lu_;
  bool use_lu_ = false;
  MatrixXd mi_f_;
  Eigen::PartialPivLU<MatrixXd> sf_lu_;
  Blocks wcw_;
  VectorXd q_;
  double h_ = 0;
  VectorXd u2_, v2_;
};

bool Solver::build_schur(const std::vector<Scaling>& sc, const VectorXd& dl) {
  const int m = sf_.m;
  schur_ = MatrixXd::Zero(m, m);
  for (int b = 0; b < nb_; ++b) {
    const auto& rows = by_block_[b];
    const MatrixXd& w = sc[b].w;
    for (std::size_t jj = 0; jj < rows.size(); ++jj) {
      const int j = rows[jj].first;
      const MatrixXd p = rows[jj].second->congruence(w);
      for (std::size_t ii = 0; ii <= jj; ++ii) {
        const int i = rows[ii].first;
        const double val = rows[ii].second->inner(p);
        schur_(i, j) += val;
        if (i != j) schur_(j, i) += val;
      }
    }
  }
  if (sf_.n_lp) {
    const Eigen::SparseMatrix<double, Eigen::RowMajor> scaled = sf_.a_lp * dl.asDiagonal();
    const Eigen::SparseMatrix<double> lp = scaled * a_lp_t_;
    for (int k = 0; k < lp.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(lp, k); it; ++it)
        schur_(it.row(), it.col()) += it.value();
  }

  use_lu_ = false;
  schur_llt_.compute(schur_);
  if (schur_llt_.info() == Eigen::Success && sf_.n_free > 0) {
    mi_f_ = schur_llt_.solve(a_free_dense_);
    const MatrixXd sfm = a_free_dense_.transpose() * mi_f_;
    sf_lu_.compute(sfm);
    if (!(std::abs(sf_lu_.determinant()) > 0) || !std::isfinite(sf_lu_.determinant())) use_lu_ = true;
  }
  if (schur_llt_.info() != Eigen::Success || use_lu_) {
    use_lu_ = true;
    const int nf = sf_.n_free;
    MatrixXd k = MatrixXd::Zero(m + nf, m + nf);
    k.topLeftCorner(m, m) = schur_;
    if (nf) {
      k.topRightCorner(m, nf) = a_free_dense_;
      k.bottomLeftCorner(nf, m) = a_free_dense_.transpose();
    }
    kkt_lu_.compute(k);
  }
  return true;
}

void Solver::solve_kkt(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& df) const {
  solve_kkt_once(r1, r2, dy, df);
  // Two rounds of refinement against the formed system; the Schur matrix
  // grows ill-conditioned as the iterate approaches a low-rank optimum.
  for (int round = 0; round < 2; ++round) {
    VectorXd e1 = r1 - schur_ * dy;
    VectorXd e2 = r2;
    if (sf_.n_free) {
      e1 -= a_free_dense_ * df;
      e2 -= a_free_dense_.transpose() * dy;
    }
    VectorXd cy, cf;
    solve_kkt_once(e1, e2, cy, cf);
    dy += cy;
    df += cf;
  }
}

void Solver::solve_kkt_once(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& df) const {
  const int m = sf_.m;
  const int nf = sf_.n_free;
  if (use_lu_) {
    VectorXd rhs(m + nf);
    rhs << r1, r2;
    const VectorXd sol = kkt_lu_.solve(rhs);
    dy = sol.head(m);
    df = sol.tail(nf);
    return;
  }
  const VectorXd mi_r1 = schur_llt_.solve(r1);
  if (nf == 0) {
    dy = mi_r1;
    df = VectorXd(0);
    return;
  }
  df = sf_lu_.solve(a_free_dense_.transpose() * mi_r1 - r2);
  dy = mi_r1 - mi_f_ * df;
}

Direction Solver::direction(double eta, const Blocks& rmat, const VectorXd& rl, double r_tk,
                            const std::vector<Scaling>& sc, const VectorXd& dl) {
  Blocks p0(nb_);
  for (int b = 0; b < nb_; ++b) p0[b] = rmat[b] - eta * sc[b].w * rd_[b] * sc[b].w;
  const VectorXd p0l = rl - eta * dl.cwiseProduct(rdl_);

  const VectorXd r1 = eta * rp_ - apply_a(p0, p0l, VectorXd::Zero(sf_.n_free));
  const VectorXd r2 = eta * rf_;
  VectorXd u1, v1;
  solve_kkt(r1, r2, u1, v1);

  const VectorXd two_b_q = 2.0 * sf_.b - q_;
  const double num = eta * rg_ + dot(sf_.c, p0) + c_lp_.dot(p0l) + r_tk / tau_ - two_b_q.dot(u1) +
                     c_free_.dot(v1);
  const double den = two_b_q.dot(u2_) - c_free_.dot(v2_) + h_ + kappa_ / tau_;

  Direction d;
  d.dtau = num / den;
  d.dy = u1 + d.dtau * u2_;
  d.df = v1 + d.dtau * v2_;
  const Blocks aty = apply_at(d.dy);
  d.ds.resize(nb_);
  d.dx.resize(nb_);
  for (int b = 0; b < nb_; ++b) {
    d.ds[b] = eta * rd_[b] - aty[b] + d.dtau * sf_.c[b];
    symmetrize(d.ds[b]);
    d.dx[b] = rmat[b] - sc[b].w * d.ds[b] * sc[b].w;
    symmetrize(d.dx[b]);
    if (sf_.structured[b]) {
      project_structured(d.ds[b]);
      project_structured(d.dx[b]);
    }
  }
  if (sf_.n_lp) {
    d.dsl = eta * rdl_ - sf_.a_lp.transpose() * d.dy + d.dtau * c_lp_;
    d.dxl = rl - dl.cwiseProduct(d.dsl);
  } else {
    d.dsl = d.dxl = VectorXd(0);
  }
  d.dkappa = (r_tk - kappa_ * d.dtau) / tau_;
  return d;
}

StandardSolution Solver::run() {
  const int m = sf_.m;
  x_.resize(nb_);
  s_.resize(nb_);
  for (int b = 0; b < nb_; ++b) {
    x_[b] = MatrixXd::Identity(sf_.dims[b], sf_.dims[b]);
    s_[b] = x_[b];
  }
  xl_ = VectorXd::Ones(sf_.n_lp);
  sl_ = VectorXd::Ones(sf_.n_lp);
  f_ = VectorXd::Zero(sf_.n_free);
  y_ = VectorXd::Zero(m);
  tau_ = kappa_ = 1.0;

  const double bnorm = sf_.b.norm();
  const double cnorm = std::sqrt(sq_norm(sf_.c) + c_lp_.squaredNorm() + c_free_.squaredNorm());

  StandardSolution out;
  int stall = 0;
  // Best iterate so far by worst relative measure; restored if a later step
  // loses accuracy and the run ends unconverged.
  struct Snapshot {
    Blocks x;
    VectorXd xl, f, y;
    double tau = 0.0, kappa = 0.0, pres = 0.0, dres = 0.0, gap = 0.0, pobj = 0.0, dobj = 0.0;
    double merit = std::numeric_limits<double>::infinity();
  } best;
  for (int it = 0; it <= tol_.max_iterations; ++it) {
    // residuals
    rp_ = tau_ * sf_.b - apply_a(x_, xl_, f_);
    const Blocks aty = apply_at(y_);
    rd_.resize(nb_);
    for (int b = 0; b < nb_; ++b) rd_[b] = tau_ * sf_.c[b] - aty[b] - s_[b];
    rdl_ = sf_.n_lp ? VectorXd(tau_ * c_lp_ - sf_.a_lp.transpose() * y_ - sl_) : VectorXd(0);
    const VectorXd fty = a_free_dense_.transpose() * y_;
    rf_ = sf_.n_free ? VectorXd(tau_ * c_free_ - fty) : VectorXd(0);
    const double cx = dot(sf_.c, x_) + c_lp_.dot(xl_) + c_free_.dot(f_);
    const double by = sf_.b.dot(y_);
    rg_ = kappa_ + cx - by;

    const double pobj = cx / tau_;
    const double dobj = by / tau_;
    out.pres = rp_.norm() / (tau_ * (1.0 + bnorm));
    out.dres = std::sqrt(sq_norm(rd_) + rdl_.squaredNorm() + rf_.squaredNorm()) / (tau_ * (1.0 + cnorm));
    out.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    out.primal_objective = pobj;
    out.dual_objective = dobj;
    out.iterations = it;

    const double merit = std::max({out.pres, out.dres, out.gap});
    if (tau_ > kappa_ && merit < best.merit)
      best = {x_, xl_, f_, y_, tau_, kappa_, out.pres, out.dres, out.gap, pobj, dobj, merit};
    if (out.pres <= tol_.feasibility && out.dres <= tol_.feasibility && out.gap <= tol_.gap) {
      out.status = Status::optimal;
      break;
    }
    // Farkas rays of the homogeneous model.
    if (by > 0 && tau_ < kappa_) {
      double ray = 0.0;
      for (int b = 0; b < nb_; ++b) ray += (aty[b] + s_[b]).squaredNorm();
      if (sf_.n_lp) ray += (sf_.a_lp.transpose() * y_ + sl_).squaredNorm();
      ray += fty.squaredNorm();
      if (std::sqrt(ray) / by <= tol_.infeasibility) {
        out.status = Status::infeasible;
        break;
      }
    }
    if (cx < 0 && tau_ < kappa_) {
      const VectorXd ax = apply_a(x_, xl_, f_);
      if (ax.norm() / -cx <= tol_.infeasibility) {
        out.status = Status::unbounded;
        break;
      }
    }
    if (it == tol_.max_iterations || stall >= 5) {
      out.status = Status::max_iterations;
      break;
    }

    // scaling
    std::vector<Scaling> sc(nb_);
    bool ok = true;
    for (int b = 0; b < nb_ && ok; ++b) ok = nt_scaling(x_[b], s_[b], sc[b]);
    if (!ok || !(tau_ > 0) || !(kappa_ > 0)) {
      out.status = Status::max_iterations;
      break;
    }
    const VectorXd dl = sf_.n_lp ? VectorXd(xl_.cwiseQuotient(sl_)) : VectorXd(0);
    build_schur(sc, dl);

    wcw_.resize(nb_);
    for (int b = 0; b < nb_; ++b) wcw_[b] = sc[b].w * sf_.c[b] * sc[b].w;
    q_ = apply_a(wcw_, dl.cwiseProduct(c_lp_), VectorXd::Zero(sf_.n_free)) + sf_.b;
    h_ = dot(sf_.c, wcw_) + c_lp_.dot(dl.cwiseProduct(c_lp_));
    solve_kkt(q_, c_free_, u2_, v2_);

    double mu = tau_ * kappa_ + xl_.dot(sl_);
    for (int b = 0; b < nb_; ++b) mu += x_[b].cwiseProduct(s_[b]).sum();
    mu /= (nu_ + 1);

    // predictor
    Blocks rmat(nb_);
    for (int b = 0; b < nb_; ++b) rmat[b] = -x_[b];
    const Direction aff = direction(1.0, rmat, -xl_, -tau_ * kappa_, sc, dl);

    auto step_of = [&](const Direction& d) {
      double a = std::numeric_limits<double>::infinity();
      for (int b = 0; b < nb_; ++b) {
        a = std::min(a, max_step(sc[b].lx, d.dx[b]));
        a = std::min(a, max_step(sc[b].ls, d.ds[b]));
      }
      if (sf_.n_lp) a = std::min({a, max_step_lp(xl_, d.dxl), max_step_lp(sl_, d.dsl)});
      a = std::min({a, max_step_scalar(tau_, d.dtau), max_step_scalar(kappa_, d.dkappa)});
      return a;
    };
    const double a_aff = std::min(1.0, step_of(aff));
    double mu_aff = (tau_ + a_aff * aff.dtau) * (kappa_ + a_aff * aff.dkappa);
    if (sf_.n_lp) mu_aff += (xl_ + a_aff * aff.dxl).dot(sl_ + a_aff * aff.dsl);
    for (int b = 0; b < nb_; ++b)
      mu_aff += (x_[b] + a_aff * aff.dx[b]).cwiseProduct(s_[b] + a_aff * aff.ds[b]).sum();
    mu_aff /= (nu_ + 1);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
    const double gamma = sigma;

    // corrector
    for (int b = 0; b < nb_; ++b) {
      const Scaling& s = sc[b];
      const MatrixXd dxs = s.ginv * aff.dx[b] * s.ginv.transpose();
      const MatrixXd dss = s.g.transpose() * aff.ds[b] * s.g;
      MatrixXd rhs = -0.5 * (dxs * dss + dss * dxs);
      rhs.diagonal().array() += gamma * mu;
      rhs.diagonal().array() -= s.d.array().square();
      const Eigen::Index n = rhs.rows();
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) rhs(i, j) *= 2.0 / (s.d[i] + s.d[j]);
      rmat[b] = s.g * rhs * s.g.transpose();
      symmetrize(rmat[b]);
    }
    VectorXd rl(sf_.n_lp);
    if (sf_.n_lp)
      rl = ((gamma * mu - xl_.array() * sl_.array() - aff.dxl.array() * aff.dsl.array()) / sl_.array())
               .matrix();
    const double r_tk = gamma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
    const Direction d = direction(1.0 - gamma, rmat, rl, r_tk, sc, dl);

    const double amax = step_of(d);
    const double alpha = std::min(1.0, tol_.step_fraction * amax);
    if (!(alpha > 1e-10)) {
      ++stall;
    } else {
      stall = alpha < 1e-6 ? stall + 1 : 0;
    }
    if (!std::isfinite(alpha)) {
      out.status = Status::max_iterations;
      break;
    }

    for (int b = 0; b < nb_; ++b) {
      x_[b] += alpha * d.dx[b];
      s_[b] += alpha * d.ds[b];
      symmetrize(x_[b]);
      symmetrize(s_[b]);
      if (sf_.structured[b]) {
        project_structured(x_[b]);
        project_structured(s_[b]);
      }
    }
    if (sf_.n_lp) {
      xl_ += alpha * d.dxl;
      sl_ += alpha * d.dsl;
    }
    f_ += alpha * d.df;
    y_ += alpha * d.dy;
    tau_ += alpha * d.dtau;
    kappa_ += alpha * d.dkappa;
  }

  if (out.status == Status::max_iterations && best.pres <= tol_.acceptable && best.dres <= tol_.acceptable &&
      best.gap <= tol_.acceptable) {
    x_ = best.x;
    xl_ = best.xl;
    f_ = best.f;
    y_ = best.y;
    tau_ = best.tau;
    kappa_ = best.kappa;
    out.pres = best.pres;
    out.dres = best.dres;
    out.gap = best.gap;
    out.primal_objective = best.pobj;
    out.dual_objective = best.dobj;
    out.status = Status::optimal;
  }
  const double scale = out.status == Status::optimal ? 1.0 / tau_ : 1.0;
  out.x.resize(nb_);
  for (int b = 0; b < nb_; ++b) out.x[b] = x_[b] * scale;
  out.x_lp = xl_ * scale;
  out.f = f_ * scale;
  out.y = y_ * scale;
  return out;
}

}  // namespace

StandardSolution solve_standard(const StandardForm& input, const Tolerances& tol) {
  // Row equilibration and cost normalization; undone on the way out.
  StandardForm sf = input;
  VectorXd row_scale = VectorXd::Ones(sf.m);
  for (int i = 0; i < sf.m; ++i) {
    double nrm = 0.0;
    for (const SymCoeff& a : sf.rows[i]) nrm += a.sq_norm();
    if (sf.n_lp) nrm += sf.a_lp.row(i).squaredNorm();
    if (sf.n_free) nrm += sf.a_free.row(i).squaredNorm();
    nrm = std::sqrt(nrm);
    if (nrm > 0) row_scale[i] = 1.0 / nrm;
  }
  for (int i = 0; i < sf.m; ++i) {
    for (SymCoeff& a : sf.rows[i]) a.scale(row_scale[i]);
    sf.b[i] *= row_scale[i];
  }
  if (sf.n_lp) sf.a_lp = row_scale.asDiagonal() * sf.a_lp;
  if (sf.n_free) sf.a_free = row_scale.asDiagonal() * sf.a_free;

  double cn = 0.0;
  for (const auto& c : sf.c) cn += c.squaredNorm();
  if (sf.c_lp.size()) cn += sf.c_lp.squaredNorm();
  if (sf.c_free.size()) cn += sf.c_free.squaredNorm();
  const double cscale = 1.0 / std::max(1.0, std::sqrt(cn));
  for (auto& c : sf.c) c *= cscale;
  if (sf.c_lp.size()) sf.c_lp *= cscale;
  if (sf.c_free.size()) sf.c_free *= cscale;

  Solver solver(sf, tol);
  StandardSolution out = solver.run();
  out.y = row_scale.cwiseProduct(out.y) / cscale;
  out.primal_objective /= cscale;
  out.dual_objective /= cscale;
  return out;
}

}  // namespace iscpt::conic
