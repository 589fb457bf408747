#include "iscpt/rank_tools.hpp"

#include <algorithm>
#include <ostream>

#include "iscpt/linalg.hpp"

namespace iscpt {

PurificationData PurificationData::from(const Scenario& s, const PointTarget& target) {
  const ResponsePair<double> pair = response_pair(s.geometry, target.theta);
  PurificationData d;
  d.dd = pair.a_dot.adjoint() * pair.a_dot;
  d.aa = pair.a_mat.adjoint() * pair.a_mat;
  d.da = pair.a_dot.adjoint() * pair.a_mat;
  for (int k = 0; k < s.k(); ++k) d.h.push_back(s.h_mat(k));
  for (int m = 0; m < s.m(); ++m) d.c.push_back(s.c_mat(m));
  d.eta = s.eta;
  d.beta = s.beta;
  return d;
}

namespace {

double tr_re(const MatrixXcd& a, const MatrixXcd& b) { return (a.cwiseProduct(b.transpose())).sum().real(); }
cd tr(const MatrixXcd& a, const MatrixXcd& b) { return (a.cwiseProduct(b.transpose())).sum(); }

/// Magnitude against which each preserved row is compared.
VectorXd preserved_scales(const std::vector<MatrixXcd>& w, const PurificationData& data) {
  const int k_n = static_cast<int>(data.h.size());
  MatrixXcd sum = MatrixXcd::Zero(w[0].rows(), w[0].cols());
  for (const auto& m : w) sum += m;
  VectorXd s(data.rows());
  s[0] = tr_re(data.dd, sum);
  s[1] = tr_re(data.aa, sum);
  s[2] = s[3] = std::sqrt(std::max(0.0, s[0] * s[1]));
  s[4] = sum.trace().real();
  for (int k = 0; k < k_n; ++k) s[5 + k] = (1.0 - data.eta[k]) * tr_re(data.h[k], w[k]) + data.eta[k] * tr_re(data.h[k], sum);
  for (std::size_t m = 0; m < data.c.size(); ++m) s[5 + k_n + m] = data.beta[m] * tr_re(data.c[m], sum);
  return s.cwiseAbs();
}

double residual(const VectorXd& now, const VectorXd& ref, const VectorXd& scale) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < now.size(); ++i)
    worst = std::max(worst, std::abs(now[i] - ref[i]) / std::max(scale[i], 1e-300));
  return worst;
}

/// d tr(B Delta) / d(params) for the Hermitian parameterization of Delta:
/// diagonal reals first, then (Re, Im) of each strictly upper entry.
Eigen::VectorXcd hermitian_coeffs(const MatrixXcd& b) {
  const int r = static_cast<int>(b.rows());
  Eigen::VectorXcd out(r * r);
  int idx = 0;
  for (int p = 0; p < r; ++p) out[idx++] = b(p, p);
  for (int p = 0; p < r; ++p) {
    for (int q = p + 1; q < r; ++q) {
      out[idx++] = b(q, p) + b(p, q);
      out[idx++] = cd(0, 1) * (b(q, p) - b(p, q));
    }
  }
  return out;
}

MatrixXcd hermitian_from_params(const VectorXd& v, int r) {
  MatrixXcd d = MatrixXcd::Zero(r, r);
  int idx = 0;
  for (int p = 0; p < r; ++p) d(p, p) = v[idx++];
  for (int p = 0; p < r; ++p) {
    for (int q = p + 1; q < r; ++q) {
      const cd z(v[idx], v[idx + 1]);
      idx += 2;
      d(p, q) = z;
      d(q, p) = std::conj(z);
    }
  }
  return d;
}

}  // namespace

VectorXd preserved_values(const std::vector<MatrixXcd>& w, const PurificationData& data) {
  const int k_n = static_cast<int>(data.h.size());
  MatrixXcd sum = MatrixXcd::Zero(w[0].rows(), w[0].cols());
  for (const auto& m : w) sum += m;
  VectorXd v(data.rows());
  v[0] = tr_re(data.dd, sum);
  v[1] = tr_re(data.aa, sum);
  const cd da = tr(data.da, sum);
  v[2] = da.real();
  v[3] = da.imag();
  v[4] = sum.trace().real();
  for (int k = 0; k < k_n; ++k)
    v[5 + k] = (1.0 + data.eta[k]) * tr_re(data.h[k], w[k]) - data.eta[k] * tr_re(data.h[k], sum);
  for (std::size_t m = 0; m < data.c.size(); ++m) v[5 + k_n + m] = data.beta[m] * tr_re(data.c[m], sum);
  return v;
}

PurificationState PurificationState::start(std::vector<MatrixXcd> w, const PurificationData& data) {
  if (w.size() != data.h.size()) throw ValidationError("purify: one matrix per IR required");
  PurificationState st;
  st.reference = preserved_values(w, data);
  for (const auto& m : w) {
    MatrixXcd v = low_rank_factor(0.5 * (m + m.adjoint()), kRankTol);
    st.ranks.push_back(static_cast<int>(v.cols()));
    st.w_mats.push_back(v * v.adjoint());
    st.v_factors.push_back(std::move(v));
  }
  return st;
}

int PurificationState::sum_rank_sq() const {
  int s = 0;
  for (int r : ranks) s += r * r;
  return s;
}

std::optional<PurificationState> rr_step(const PurificationState& state, const PurificationData& data) {
  const int k_n = static_cast<int>(state.v_factors.size());
  if (std::all_of(state.ranks.begin(), state.ranks.end(), [](int r) { return r <= 1; })) return std::nullopt;

  const int rows = data.rows();
  int cols = 0;
  std::vector<int> offset;
  for (int r : state.ranks) {
    offset.push_back(cols);
    cols += r * r;
  }
  MatrixXd sys = MatrixXd::Zero(rows, cols);
  for (int k = 0; k < k_n; ++k) {
    const int r = state.ranks[k];
    if (r == 0) continue;
    const MatrixXcd& v = state.v_factors[k];
    auto put = [&](int row, const Eigen::VectorXcd& coef, bool imag) {
      for (int j = 0; j < r * r; ++j) sys(row, offset[k] + j) += imag ? coef[j].imag() : coef[j].real();
    };
    put(0, hermitian_coeffs(v.adjoint() * data.dd * v), false);
    put(1, hermitian_coeffs(v.adjoint() * data.aa * v), false);
    const Eigen::VectorXcd cda = hermitian_coeffs(v.adjoint() * data.da * v);
    put(2, cda, false);
    put(3, cda, true);
    put(4, hermitian_coeffs(v.adjoint() * v), false);
    for (int j = 0; j < k_n; ++j) {
      const Eigen::VectorXcd ch = hermitian_coeffs(v.adjoint() * data.h[j] * v);
      put(5 + j, j == k ? ch : Eigen::VectorXcd(-data.eta[j] * ch), false);
    }
    for (std::size_t m = 0; m < data.c.size(); ++m)
      put(5 + k_n + static_cast<int>(m), data.beta[m] * hermitian_coeffs(v.adjoint() * data.c[m] * v), false);
  }
  // Unit rows, except ones that vanish on the current range: normalizing
  // those would turn round-off into a constraint.
  const double biggest = sys.rowwise().norm().maxCoeff();
  for (int i = 0; i < rows; ++i) {
    const double n = sys.row(i).norm();
    if (n > 1e-12 * biggest)
      sys.row(i) /= n;
    else
      sys.row(i).setZero();
  }

  const std::optional<VectorXd> null = nullspace_vector(sys);
  if (!null) return std::nullopt;

  std::vector<MatrixXcd> delta(k_n);
  double delta_max = 0.0;
  for (int k = 0; k < k_n; ++k) {
    const int r = state.ranks[k];
    delta[k] = hermitian_from_params(null->segment(offset[k], r * r), r);
    if (r == 0) continue;
    const HermitianEig e = hermitian_eig(delta[k]);
    for (int l = 0; l < r; ++l)
      if (std::abs(e.values[l]) > std::abs(delta_max)) delta_max = e.values[l];
  }
  if (delta_max == 0.0) return std::nullopt;

  PurificationState next;
  next.iteration = state.iteration + 1;
  next.reference = state.reference;
  next.history = state.history;
  for (int k = 0; k < k_n; ++k) {
    const int r = state.ranks[k];
    const MatrixXcd& v = state.v_factors[k];
    MatrixXcd w = r == 0 ? MatrixXcd(MatrixXcd::Zero(v.rows(), v.rows()))
                         : MatrixXcd(v * (MatrixXcd::Identity(r, r) - delta[k] / delta_max) * v.adjoint());
    w = 0.5 * (w + w.adjoint()).eval();
    MatrixXcd vf = low_rank_factor(w, kRankTol);
    next.ranks.push_back(static_cast<int>(vf.cols()));
    next.w_mats.push_back(vf * vf.adjoint());
    next.v_factors.push_back(std::move(vf));
  }
  if (next.sum_rank_sq() >= state.sum_rank_sq()) return std::nullopt;

  const VectorXd now = preserved_values(next.w_mats, data);
  const double res = residual(now, state.reference, preserved_scales(state.w_mats, data));
  if (res > 1e-6) throw PurificationDrift("rank reduction moved a preserved quantity by " + std::to_string(res));

  PurificationRecord rec;
  rec.iteration = next.iteration;
  rec.sum_rank_sq = next.sum_rank_sq();
  rec.fisher = now[0] - (now[2] * now[2] + now[3] * now[3]) / now[1];
  rec.max_residual = res;
  next.history.push_back(rec);
  return next;
}

PurifyResult purify(std::vector<MatrixXcd> w, const PurificationData& data, std::ostream* trace) {
  PurificationState st = PurificationState::start(std::move(w), data);
  {
    const VectorXd now = preserved_values(st.w_mats, data);
    PurificationRecord rec;
    rec.sum_rank_sq = st.sum_rank_sq();
    rec.fisher = now[0] - (now[2] * now[2] + now[3] * now[3]) / now[1];
    rec.max_residual = residual(now, st.reference, preserved_scales(st.w_mats, data));
    st.history.push_back(rec);
  }
  while (auto next = rr_step(st, data)) st = std::move(*next);

  if (trace) {
    *trace << "# iscpt-purify v1\niteration,sum_rank_sq,fisher,max_residual\n";
    for (const auto& r : st.history)
      *trace << r.iteration << "," << r.sum_rank_sq << "," << r.fisher << "," << r.max_residual << "\n";
  }
  PurifyResult out;
  out.w_mats = std::move(st.w_mats);
  out.ranks = std::move(st.ranks);
  out.steps = st.iteration;
  out.history = std::move(st.history);
  return out;
}

Theorem1Result extract_theorem1(const std::vector<MatrixXcd>& w_bar, const MatrixXcd& r_bar, const Scenario& s) {
  if (static_cast<int>(w_bar.size()) != s.k()) throw ValidationError("extract_theorem1: one matrix per IR required");
  Theorem1Result out;
  out.r_x = r_bar;
  for (int k = 0; k < s.k(); ++k) {
    const VectorXcd h = s.h_vec(k);
    const VectorXcd wh = w_bar[k] * h;
    const double denom = h.dot(wh).real();
    if (!(denom > 1e-12)) throw DegenerateUser("extract_theorem1: user " + std::to_string(k) + " receives no power");
    out.w_tilde.push_back(wh * wh.adjoint() / denom);
  }
  return out;
}

std::vector<MatrixXcd> eig_baseline(const std::vector<MatrixXcd>& w_bar) {
  std::vector<MatrixXcd> out;
  for (const auto& w : w_bar) {
    const HermitianEig e = hermitian_eig(w);
    const Eigen::Index n = w.rows();
    const double top = e.values[n - 1];
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (e.values[i] >= top - 1e-12 * std::abs(top)) {
        pick = i;
        break;
      }
    }
    const VectorXcd u = e.vectors.col(pick);
    out.push_back(std::max(0.0, e.values[pick]) * u * u.adjoint());
  }
  return out;
}

MatrixXcd eig_baseline_covariance(const std::vector<MatrixXcd>& w_bar, const MatrixXcd& r_bar, double p_budget) {
  MatrixXcd r = r_bar;
  const std::vector<MatrixXcd> eig = eig_baseline(w_bar);
  for (std::size_t k = 0; k < w_bar.size(); ++k) r += eig[k] - w_bar[k];
  return r * (p_budget / r.trace().real());
}

VectorXcd vectorize(const MatrixXcd& w) {
  const HermitianEig e = hermitian_eig(0.5 * (w + w.adjoint()));
  const Eigen::Index n = w.rows();
  const double l1 = e.values[n - 1];
  if (!(l1 > 0)) throw NotRankOne("vectorize: zero matrix");
  if (n > 1 && std::max(0.0, e.values[n - 2]) / l1 > 1e-4) throw NotRankOne("vectorize: matrix is not rank one");
  VectorXcd v = std::sqrt(l1) * e.vectors.col(n - 1);
  const double cut = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(v[i]) > cut) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      v[i] = std::abs(v[i]);
      break;
    }
  }
  return v;
}

}  // namespace iscpt
