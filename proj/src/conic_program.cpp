#include <algorithm>
#include <chrono>
#include <map>

#include <Eigen/Eigenvalues>

#include "iscpt/linalg.hpp"
#include "iscpt/sdp_solver.hpp"

namespace iscpt::conic {

namespace {

SparseCd to_sparse(const MatrixXcd& m) {
  SparseCd s = m.sparseView(cd(0.0), 0.0);
  s.makeCompressed();
  return s;
}

SparseCd hermitian_part(const SparseCd& c) {
  SparseCd h = SparseCd(c.adjoint());
  SparseCd out = 0.5 * (c + h);
  out.prune(cd(0.0), 0.0);
  return out;
}

SparseCd antihermitian_over_j(const SparseCd& c) {
  // (C - C^H) / (2j)
  SparseCd h = SparseCd(c.adjoint());
  SparseCd out = cd(0.0, -0.5) * (c - h);
  out.prune(cd(0.0), 0.0);
  return out;
}

bool sparse_hermitian(const SparseCd& c, double tol) {
  const SparseCd diff = c - SparseCd(c.adjoint());
  double scale = 1.0;
  for (int k = 0; k < c.outerSize(); ++k)
    for (SparseCd::InnerIterator it(c, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseCd::InnerIterator it(diff, k); it; ++it)
      if (std::abs(it.value()) > tol * scale) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------- AffineExpr

AffineExpr AffineExpr::of(ScalarVar v, cd coef) {
  AffineExpr e;
  e.add(v, coef);
  return e;
}

AffineExpr AffineExpr::trace(MatrixVar v, const MatrixXcd& coef) {
  AffineExpr e;
  e.add_trace(v, coef);
  return e;
}

AffineExpr AffineExpr::trace(MatrixVar v, SparseCd coef) {
  AffineExpr e;
  e.add_trace(v, std::move(coef));
  return e;
}

AffineExpr& AffineExpr::add(ScalarVar v, cd coef) {
  if (v.id < 0) throw ValidationError("AffineExpr: unregistered scalar");
  scalar_terms.emplace_back(v.id, coef);
  return *this;
}

AffineExpr& AffineExpr::add_trace(MatrixVar v, const MatrixXcd& coef) {
  return add_trace(v, to_sparse(coef));
}

AffineExpr& AffineExpr::add_trace(MatrixVar v, SparseCd coef) {
  if (v.id < 0) throw ValidationError("AffineExpr: unregistered matrix");
  coef.makeCompressed();
  matrix_terms.emplace_back(v.id, std::move(coef));
  return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  constant += o.constant;
  scalar_terms.insert(scalar_terms.end(), o.scalar_terms.begin(), o.scalar_terms.end());
  matrix_terms.insert(matrix_terms.end(), o.matrix_terms.begin(), o.matrix_terms.end());
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) { return *this += -o; }

AffineExpr& AffineExpr::operator*=(cd s) {
  constant *= s;
  for (auto& [id, c] : scalar_terms) c *= s;
  for (auto& [id, c] : matrix_terms) c *= s;
  return *this;
}

AffineExpr AffineExpr::real_part() const {
  AffineExpr e;
  e.constant = constant.real();
  for (const auto& [id, c] : scalar_terms) e.scalar_terms.emplace_back(id, c.real());
  for (const auto& [id, c] : matrix_terms) e.matrix_terms.emplace_back(id, hermitian_part(c));
  return e;
}

AffineExpr AffineExpr::imag_part() const {
  AffineExpr e;
  e.constant = constant.imag();
  for (const auto& [id, c] : scalar_terms) e.scalar_terms.emplace_back(id, c.imag());
  for (const auto& [id, c] : matrix_terms) e.matrix_terms.emplace_back(id, antihermitian_over_j(c));
  return e;
}

bool AffineExpr::is_real_valued(double tol) const {
  if (std::abs(constant.imag()) > tol * std::max(1.0, std::abs(constant))) return false;
  for (const auto& [id, c] : scalar_terms)
    if (std::abs(c.imag()) > tol * std::max(1.0, std::abs(c))) return false;
  for (const auto& [id, c] : matrix_terms)
    if (!sparse_hermitian(c, tol)) return false;
  return true;
}

cd AffineExpr::evaluate(const std::vector<double>& scalars, const std::vector<MatrixXcd>& mats) const {
  cd acc = constant;
  for (const auto& [id, c] : scalar_terms) acc += c * scalars.at(id);
  for (const auto& [id, c] : matrix_terms) {
    const MatrixXcd& x = mats.at(id);
    // tr(C X) = sum_ij C_ij X_ji
    for (int k = 0; k < c.outerSize(); ++k)
      for (SparseCd::InnerIterator it(c, k); it; ++it) acc += it.value() * x(it.col(), it.row());
  }
  return acc;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a += -b; }
AffineExpr operator-(AffineExpr a) { return a *= cd(-1.0); }
AffineExpr operator*(cd s, AffineExpr a) { return a *= s; }
AffineExpr operator*(double s, AffineExpr a) { return a *= cd(s); }

SparseCd entry_selector(int dim, int p, int q) {
  SparseCd s(dim, dim);
  s.insert(q, p) = 1.0;
  s.makeCompressed();
  return s;
}

SparseCd embed_block(const MatrixXcd& coef, int dim, int offset) {
  if (offset < 0 || offset + coef.rows() > dim || coef.rows() != coef.cols())
    throw ValidationError("embed_block: block does not fit");
  std::vector<Eigen::Triplet<cd>> trip;
  for (Eigen::Index i = 0; i < coef.rows(); ++i)
    for (Eigen::Index j = 0; j < coef.cols(); ++j)
      if (coef(i, j) != cd(0.0)) trip.emplace_back(offset + i, offset + j, coef(i, j));
  SparseCd s(dim, dim);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

// ------------------------------------------------------------------ LmiBlock

LmiBlock::LmiBlock(int dim) : dim_(dim), upper_(static_cast<std::size_t>(dim * (dim + 1) / 2)) {
  if (dim < 1) throw ValidationError("LmiBlock: dimension must be positive");
}

namespace {
std::size_t upper_index(int dim, int i, int j) {
  return static_cast<std::size_t>(i * dim - i * (i - 1) / 2 + (j - i));
}
}  // namespace

void LmiBlock::set(int i, int j, AffineExpr e) {
  if (i > j) {
    std::swap(i, j);
    // entry (j, i) given: store its conjugate
    AffineExpr conj_e = e.real_part();
    conj_e -= cd(0.0, 1.0) * e.imag_part();
    e = std::move(conj_e);
  }
  if (i < 0 || j >= dim_) throw ValidationError("LmiBlock: index out of range");
  if (i == j && !e.is_real_valued(1e-10)) throw ValidationError("LmiBlock: diagonal entries must be real");
  upper_[upper_index(dim_, i, j)] = std::move(e);
}

const AffineExpr& LmiBlock::at(int i, int j) const { return upper_.at(upper_index(dim_, i, j)); }

bool LmiBlock::is_complex() const {
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j)
      if (!at(i, j).is_real_valued(1e-14)) return true;
  return false;
}

// ------------------------------------------------------------- ConicProgram

ScalarVar ConicProgram::add_scalar(std::string name, Bound bound) {
  scalars_.push_back({std::move(name), bound});
  return {static_cast<int>(scalars_.size()) - 1};
}

MatrixVar ConicProgram::add_psd(std::string name, int dim, Field field) {
  if (dim < 1) throw ValidationError("add_psd: dimension must be positive");
  matrices_.push_back({std::move(name), dim, field});
  return {static_cast<int>(matrices_.size()) - 1};
}

void ConicProgram::check_expr(const AffineExpr& e) const {
  for (const auto& [id, c] : e.scalar_terms)
    if (id < 0 || id >= static_cast<int>(scalars_.size())) throw ValidationError("unknown scalar variable");
  for (const auto& [id, c] : e.matrix_terms) {
    if (id < 0 || id >= static_cast<int>(matrices_.size())) throw ValidationError("unknown matrix variable");
    if (c.rows() != matrices_[id].dim || c.cols() != matrices_[id].dim)
      throw ValidationError("coefficient size does not match matrix '" + matrices_[id].name + "'");
  }
}

void ConicProgram::add_equality(AffineExpr expr, std::string label) {
  check_expr(expr);
  if (!expr.is_real_valued(1e-10))
    throw ValidationError("equality '" + label + "' has a non-Hermitian coefficient");
  equalities_.push_back({std::move(expr), std::move(label)});
}

void ConicProgram::add_inequality(AffineExpr expr, std::string label) {
  check_expr(expr);
  if (!expr.is_real_valued(1e-10))
    throw ValidationError("inequality '" + label + "' has a non-Hermitian coefficient");
  inequalities_.push_back({std::move(expr), std::move(label)});
}

void ConicProgram::add_lmi(LmiBlock block, std::string label) {
  for (int i = 0; i < block.dim(); ++i)
    for (int j = i; j < block.dim(); ++j) check_expr(block.at(i, j));
  lmis_.push_back({std::move(block), std::move(label)});
}

void ConicProgram::minimize(AffineExpr objective) {
  check_expr(objective);
  objective_ = std::move(objective);
  sense_ = Sense::minimize;
}

void ConicProgram::maximize(AffineExpr objective) {
  check_expr(objective);
  objective_ = std::move(objective);
  sense_ = Sense::maximize;
}

long ConicProgram::real_dimension() const {
  long n = static_cast<long>(scalars_.size() + inequalities_.size());
  for (const auto& m : matrices_)
    n += m.field == Field::complex ? long(m.dim) * m.dim : long(m.dim) * (m.dim + 1) / 2;
  for (const auto& l : lmis_) {
    const long d = l.block.dim();
    n += l.block.is_complex() ? d * d : d * (d + 1) / 2;
  }
  return n;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::max_iterations: return "max_iterations";
  }
  return "unknown";
}

// ------------------------------------------------------------------ compile

namespace {

class RowBuilder {
 public:
  RowBuilder(const CompiledProgram& cp, const ConicProgram& prog) : cp_(cp), prog_(prog) {}

  /// Adds real-valued `e` as coefficients; returns its constant.
  double add_expr(const AffineExpr& e, double sign = 1.0) {
    for (const auto& [id, c] : e.scalar_terms) add_scalar(id, sign * c.real());
    for (const auto& [id, c] : e.matrix_terms) add_matrix(cp_.matrix_block[id], prog_.matrices()[id].field, c, sign);
    return sign * e.constant.real();
  }

  void add_scalar(int id, double v) {
    if (cp_.scalar_lp[id] >= 0) lp_[cp_.scalar_lp[id]] += v;
    else free_[cp_.scalar_free[id]] += v;
  }
  void add_lp(int col, double v) { lp_[col] += v; }

  /// Hermitian coefficient c on a block; complex blocks use the embedded image / 2.
  void add_matrix(int block, Field field, const SparseCd& c, double sign) {
    auto& acc = blocks_[block];
    const int n = static_cast<int>(c.rows());
    for (int k = 0; k < c.outerSize(); ++k) {
      for (SparseCd::InnerIterator it(c, k); it; ++it) {
        const int a = static_cast<int>(it.row());
        const int b = static_cast<int>(it.col());
        const double x = sign * it.value().real();
        const double y = sign * it.value().imag();
        if (field == Field::real) {
          if (a <= b) acc[{a, b}] += x;
          continue;
        }
        if (a <= b) {
          acc[{a, b}] += 0.5 * x;
          acc[{a + n, b + n}] += 0.5 * x;
        }
        if (y != 0.0) acc[{a, b + n}] += -0.5 * y;
      }
    }
  }

  void emit(StandardForm& sf, std::vector<Eigen::Triplet<double>>& lp_trip,
            std::vector<Eigen::Triplet<double>>& free_trip, double rhs) {
    const int row = sf.m++;
    std::vector<SymCoeff> coeffs;
    for (auto& [block, entries] : blocks_) {
      SymCoeff sc;
      sc.block = block;
      for (const auto& [rc, v] : entries) {
        if (v == 0.0) continue;
        sc.r.push_back(rc.first);
        sc.c.push_back(rc.second);
        sc.v.push_back(v);
      }
      if (sc.v.empty()) continue;
      const int dim = sf.dims[block];
      if (static_cast<int>(sc.v.size()) > 2 * dim) {
        MatrixXd dense = MatrixXd::Zero(dim, dim);
        sc.add_scaled_to(dense, 1.0);
        sc.dense = std::move(dense);
      }
      coeffs.push_back(std::move(sc));
    }
    sf.rows.push_back(std::move(coeffs));
    for (const auto& [col, v] : lp_)
      if (v != 0.0) lp_trip.emplace_back(row, col, v);
    for (const auto& [col, v] : free_)
      if (v != 0.0) free_trip.emplace_back(row, col, v);
    b_.push_back(rhs);
    blocks_.clear();
    lp_.clear();
    free_.clear();
  }

  std::vector<double> b_;

 private:
  const CompiledProgram& cp_;
  const ConicProgram& prog_;
  std::map<int, std::map<std::pair<int, int>, double>> blocks_;
  std::map<int, double> lp_, free_;
};

}  // namespace

CompiledProgram compile(const ConicProgram& prog) {
  CompiledProgram cp;
  StandardForm& sf = cp.sf;

  for (const auto& s : prog.scalars()) {
    if (s.bound == Bound::nonnegative) {
      cp.scalar_lp.push_back(sf.n_lp++);
      cp.scalar_free.push_back(-1);
    } else {
      cp.scalar_lp.push_back(-1);
      cp.scalar_free.push_back(sf.n_free++);
    }
  }
  for (const auto& m : prog.matrices()) {
    cp.matrix_block.push_back(static_cast<int>(sf.dims.size()));
    const bool cplx = m.field == Field::complex;
    sf.dims.push_back(cplx ? 2 * m.dim : m.dim);
    sf.structured.push_back(cplx);
  }
  std::vector<int> ineq_slack;
  for (std::size_t i = 0; i < prog.inequalities().size(); ++i) ineq_slack.push_back(sf.n_lp++);
  std::vector<int> lmi_block;
  std::vector<char> lmi_complex;
  for (const auto& l : prog.lmis()) {
    const bool cplx = l.block.is_complex();
    lmi_complex.push_back(cplx);
    lmi_block.push_back(static_cast<int>(sf.dims.size()));
    sf.dims.push_back(cplx ? 2 * l.block.dim() : l.block.dim());
    sf.structured.push_back(cplx);
  }

  RowBuilder rb(cp, prog);
  std::vector<Eigen::Triplet<double>> lp_trip, free_trip;

  for (const auto& eq : prog.equalities()) {
    const double c0 = rb.add_expr(eq.expr.real_part());
    rb.emit(sf, lp_trip, free_trip, -c0);
  }
  for (std::size_t i = 0; i < prog.inequalities().size(); ++i) {
    const double c0 = rb.add_expr(prog.inequalities()[i].expr.real_part());
    rb.add_lp(ineq_slack[i], -1.0);
    rb.emit(sf, lp_trip, free_trip, -c0);
  }
  for (std::size_t l = 0; l < prog.lmis().size(); ++l) {
    const LmiBlock& blk = prog.lmis()[l].block;
    const int n = blk.dim();
    const Field field = lmi_complex[l] ? Field::complex : Field::real;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const AffineExpr& e = blk.at(i, j);
        // Re Z_ij - Re e_ij = 0
        {
          SparseCd sel(n, n);
          if (i == j) {
            sel.insert(i, i) = 1.0;
          } else {
            sel.insert(j, i) = 0.5;
            sel.insert(i, j) = 0.5;
          }
          rb.add_matrix(lmi_block[l], field, sel, 1.0);
          const double c0 = rb.add_expr(e.real_part(), -1.0);
          rb.emit(sf, lp_trip, free_trip, -c0);
        }
        if (i != j && lmi_complex[l]) {
          // Im Z_ij - Im e_ij = 0, with Im X_ij = tr(((e_j e_i^T - e_i e_j^T)/(2j)) X)
          SparseCd sel(n, n);
          sel.insert(j, i) = cd(0.0, -0.5);
          sel.insert(i, j) = cd(0.0, 0.5);
          rb.add_matrix(lmi_block[l], field, sel, 1.0);
          const double c0 = rb.add_expr(e.imag_part(), -1.0);
          rb.emit(sf, lp_trip, free_trip, -c0);
        }
      }
    }
  }

  sf.b = Eigen::Map<const VectorXd>(rb.b_.data(), static_cast<Eigen::Index>(rb.b_.size()));
  sf.a_lp.resize(sf.m, sf.n_lp);
  sf.a_lp.setFromTriplets(lp_trip.begin(), lp_trip.end());
  sf.a_free.resize(sf.m, sf.n_free);
  sf.a_free.setFromTriplets(free_trip.begin(), free_trip.end());

  // objective
  cp.objective_sign = prog.sense() == Sense::minimize ? 1.0 : -1.0;
  const AffineExpr obj = prog.objective().real_part();
  cp.objective_constant = obj.constant.real();
  sf.c.resize(sf.dims.size());
  for (std::size_t b = 0; b < sf.dims.size(); ++b) sf.c[b] = MatrixXd::Zero(sf.dims[b], sf.dims[b]);
  sf.c_lp = VectorXd::Zero(sf.n_lp);
  sf.c_free = VectorXd::Zero(sf.n_free);
  for (const auto& [id, c] : obj.scalar_terms) {
    if (cp.scalar_lp[id] >= 0) sf.c_lp[cp.scalar_lp[id]] += cp.objective_sign * c.real();
    else sf.c_free[cp.scalar_free[id]] += cp.objective_sign * c.real();
  }
  for (const auto& [id, c] : obj.matrix_terms) {
    const int b = cp.matrix_block[id];
    const MatrixXcd dense = MatrixXcd(c);
    if (prog.matrices()[id].field == Field::complex) sf.c[b] += cp.objective_sign * 0.5 * embed_hermitian(dense);
    else sf.c[b] += cp.objective_sign * dense.real();
  }
  return cp;
}

// -------------------------------------------------------------------- solve

SolveReport solve_sdp(const ConicProgram& program, const Tolerances& tol) {
  if (program.real_dimension() > tol.max_dimension)
    throw ValidationError("solve_sdp: program exceeds the configured dimension cap");
  const auto t0 = std::chrono::steady_clock::now();
  const CompiledProgram cp = compile(program);
  const StandardSolution sol = solve_standard(cp.sf, tol);

  SolveReport rep;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.duality_gap = sol.gap;
  rep.primal_residual = sol.pres;
  rep.dual_residual = sol.dres;
  rep.objective_value = cp.objective_sign * sol.primal_objective + cp.objective_constant;
  rep.dual_objective = cp.objective_sign * sol.dual_objective + cp.objective_constant;
  for (std::size_t i = 0; i < program.scalars().size(); ++i) {
    if (cp.scalar_lp[i] >= 0) rep.scalar_values.push_back(sol.x_lp[cp.scalar_lp[i]]);
    else rep.scalar_values.push_back(sol.f[cp.scalar_free[i]]);
  }
  for (std::size_t i = 0; i < program.matrices().size(); ++i) {
    const MatrixXd& x = sol.x[cp.matrix_block[i]];
    if (program.matrices()[i].field == Field::complex) {
      rep.matrix_values.push_back(extract_hermitian(x));
    } else {
      rep.matrix_values.push_back(x.cast<cd>());
    }
  }
  rep.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

double max_constraint_violation(const ConicProgram& program, const SolveReport& rep) {
  double worst = 0.0;
  for (const auto& eq : program.equalities()) {
    const double v = eq.expr.evaluate(rep.scalar_values, rep.matrix_values).real();
    worst = std::max(worst, std::abs(v) / (1.0 + std::abs(eq.expr.constant)));
  }
  for (const auto& in : program.inequalities()) {
    const double v = in.expr.evaluate(rep.scalar_values, rep.matrix_values).real();
    worst = std::max(worst, std::max(0.0, -v) / (1.0 + std::abs(in.expr.constant)));
  }
  for (const auto& l : program.lmis()) {
    const int n = l.block.dim();
    MatrixXcd z(n, n);
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        z(i, j) = l.block.at(i, j).evaluate(rep.scalar_values, rep.matrix_values);
        z(j, i) = std::conj(z(i, j));
        scale = std::max(scale, std::abs(z(i, j)));
      }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(z, Eigen::EigenvaluesOnly);
    worst = std::max(worst, std::max(0.0, -es.eigenvalues()[0]) / scale);
  }
  for (std::size_t i = 0; i < program.matrices().size(); ++i) {
    const MatrixXcd& x = rep.matrix_values[i];
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(x, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    worst = std::max(worst, std::max(0.0, -es.eigenvalues()[0]) / scale);
  }
  for (std::size_t i = 0; i < program.scalars().size(); ++i)
    if (program.scalars()[i].bound == Bound::nonnegative)
      worst = std::max(worst, std::max(0.0, -rep.scalar_values[i]));
  return worst;
}

}  // namespace iscpt::conic
