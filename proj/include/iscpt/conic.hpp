#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "iscpt/types.hpp"

namespace iscpt::conic {

enum class Field { real, complex };
enum class Bound { free, nonnegative };

struct ScalarVar {
  int id = -1;
};

struct MatrixVar {
  int id = -1;
};

using SparseCd = Eigen::SparseMatrix<cd>;

/// constant + sum coef_i * s_i + sum tr(C_j X_j).
///
/// Coefficients may be complex so that off-diagonal LMI entries can be
/// written directly; equality and inequality rows must be real-valued.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(double c) : constant(c) {}  // NOLINT: implicit by design
  AffineExpr(cd c) : constant(c) {}      // NOLINT

  static AffineExpr of(ScalarVar v, cd coef = 1.0);
  static AffineExpr trace(MatrixVar v, const MatrixXcd& coef);
  static AffineExpr trace(MatrixVar v, SparseCd coef);

  AffineExpr& add(ScalarVar v, cd coef);
  AffineExpr& add_trace(MatrixVar v, const MatrixXcd& coef);
  AffineExpr& add_trace(MatrixVar v, SparseCd coef);

  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr& operator*=(cd s);

  /// Re and Im as real-valued expressions over Hermitian variables.
  AffineExpr real_part() const;
  AffineExpr imag_part() const;
  bool is_real_valued(double tol = 1e-12) const;

  /// Value at a point (scalars, Hermitian matrices).
  cd evaluate(const std::vector<double>& scalars, const std::vector<MatrixXcd>& mats) const;

  cd constant{0.0, 0.0};
  std::vector<std::pair<int, cd>> scalar_terms;
  std::vector<std::pair<int, SparseCd>> matrix_terms;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a);
AffineExpr operator*(cd s, AffineExpr a);
AffineExpr operator*(double s, AffineExpr a);

/// Square LMI block; entry (i, j) for i <= j is given, the rest follows by
/// Hermitian symmetry, so the block is symmetric by construction.
class LmiBlock {
 public:
  explicit LmiBlock(int dim);
  void set(int i, int j, AffineExpr e);
  int dim() const { return dim_; }
  const AffineExpr& at(int i, int j) const;  // i <= j
  bool is_complex() const;

 private:
  int dim_;
  std::vector<AffineExpr> upper_;
};

enum class Sense { minimize, maximize };

struct ScalarInfo {
  std::string name;
  Bound bound;
};

struct MatrixInfo {
  std::string name;
  int dim;
  Field field;
};

struct LinearRow {
  AffineExpr expr;  // == 0 or >= 0
  std::string label;
};

struct LmiRow {
  LmiBlock block;  // >= 0
  std::string label;
};

class ConicProgram {
 public:
  ScalarVar add_scalar(std::string name, Bound bound = Bound::free);
  MatrixVar add_psd(std::string name, int dim, Field field = Field::complex);

  /// expr == 0; expr must be real-valued.
  void add_equality(AffineExpr expr, std::string label = {});
  /// expr >= 0; expr must be real-valued.
  void add_inequality(AffineExpr expr, std::string label = {});
  void add_lmi(LmiBlock block, std::string label = {});

  void minimize(AffineExpr objective);
  void maximize(AffineExpr objective);

  const std::vector<ScalarInfo>& scalars() const { return scalars_; }
  const std::vector<MatrixInfo>& matrices() const { return matrices_; }
  const std::vector<LinearRow>& equalities() const { return equalities_; }
  const std::vector<LinearRow>& inequalities() const { return inequalities_; }
  const std::vector<LmiRow>& lmis() const { return lmis_; }
  const AffineExpr& objective() const { return objective_; }
  Sense sense() const { return sense_; }

  /// Real degrees of freedom, counting LMI slack matrices and row slacks.
  long real_dimension() const;

 private:
  void check_expr(const AffineExpr& e) const;

  std::vector<ScalarInfo> scalars_;
  std::vector<MatrixInfo> matrices_;
  std::vector<LinearRow> equalities_;
  std::vector<LinearRow> inequalities_;
  std::vector<LmiRow> lmis_;
  AffineExpr objective_;
  Sense sense_ = Sense::minimize;
};

struct Tolerances {
  double gap = 1e-9;          // relative duality gap
  double feasibility = 1e-9;  // relative primal/dual residuals
  // A run that stalls short of the targets above still counts as solved when
  // its best iterate meets this on gap and both residuals.
  double acceptable = 1e-8;
  double infeasibility = 1e-8;
  int max_iterations = 200;
  long max_dimension = 5000;
  double step_fraction = 0.98;
};

enum class Status { optimal, infeasible, unbounded, max_iterations };

std::string to_string(Status s);

struct SolveReport {
  Status status = Status::max_iterations;
  double objective_value = 0.0;  // in the program's own sense
  double dual_objective = 0.0;
  std::vector<double> scalar_values;
  std::vector<MatrixXcd> matrix_values;
  double duality_gap = 0.0;  // relative
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double solve_ms = 0.0;

  double value(ScalarVar v) const { return scalar_values.at(v.id); }
  const MatrixXcd& value(MatrixVar v) const { return matrix_values.at(v.id); }
  bool ok() const { return status == Status::optimal; }
};

SolveReport solve_sdp(const ConicProgram& program, const Tolerances& tol = {});

/// Largest violation of any row or LMI of `program` at the report's point,
/// relative to 1 + |constant| of each row.
double max_constraint_violation(const ConicProgram& program, const SolveReport& report);

/// Writes the real standard form (SDPA sparse format, free scalars split).
void write_sdpa(const ConicProgram& program, std::ostream& out);

/// Coefficient C with tr(C X) = X(p, q).
SparseCd entry_selector(int dim, int p, int q);
/// n x n coefficient placed at diagonal offset `offset` of a dim x dim one.
SparseCd embed_block(const MatrixXcd& coef, int dim, int offset);

}  // namespace iscpt::conic
