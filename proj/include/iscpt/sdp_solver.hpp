#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "iscpt/conic.hpp"

namespace iscpt::conic {

/// Upper-triangle triplets of a real symmetric coefficient on one PSD block.
struct SymCoeff {
  int block = 0;
  std::vector<int> r, c;
  std::vector<double> v;
  MatrixXd dense;  // filled when the coefficient is large

  double inner(const MatrixXd& x) const;
  void add_scaled_to(MatrixXd& out, double s) const;
  /// W * A * W for symmetric W.
  MatrixXd congruence(const MatrixXd& w) const;
  double sq_norm() const;
  void scale(double s);
};

/// min <C,X> + c_l.x + c_f.f  s.t.  A(X) + A_l x + F f = b,  X >= 0, x >= 0.
///
/// Complex blocks carry their embedded 2n x 2n image; `structured` marks
/// them so iterates can be kept in [[P,-Q],[Q,P]] form.
struct StandardForm {
  std::vector<int> dims;
  std::vector<char> structured;
  int n_lp = 0;
  int n_free = 0;
  int m = 0;
  std::vector<std::vector<SymCoeff>> rows;  // rows[i]: block terms of row i
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_lp;
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_free;
  VectorXd b;
  std::vector<MatrixXd> c;
  VectorXd c_lp;
  VectorXd c_free;
};

struct StandardSolution {
  Status status = Status::max_iterations;
  std::vector<MatrixXd> x;
  VectorXd x_lp;
  VectorXd f;
  VectorXd y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  int iterations = 0;
};

StandardSolution solve_standard(const StandardForm& sf, const Tolerances& tol);

/// Real standard form of a program together with the maps needed to read a
/// solution back.
struct CompiledProgram {
  StandardForm sf;
  std::vector<int> scalar_lp;      // lp index or -1
  std::vector<int> scalar_free;    // free index or -1
  std::vector<int> matrix_block;   // block index per user matrix
  double objective_sign = 1.0;     // +1 minimize, -1 maximize
  double objective_constant = 0.0;
};

CompiledProgram compile(const ConicProgram& program);

}  // namespace iscpt::conic
