// SDPA sparse format: max <F0, Y> s.t. <Fi, Y> = c_i, Y >= 0. Our primal
// standard form maps onto it with F0 = -C, Fi = A_i, c = b; free scalars are
// split into two nonnegative parts in a trailing diagonal block.
#include <iomanip>
#include <ostream>

#include "iscpt/sdp_solver.hpp"

namespace iscpt::conic {

void write_sdpa(const ConicProgram& program, std::ostream& out) {
  const CompiledProgram cp = compile(program);
  const StandardForm& sf = cp.sf;
  const int n_diag = sf.n_lp + 2 * sf.n_free;
  const int n_blocks = static_cast<int>(sf.dims.size()) + (n_diag > 0 ? 1 : 0);

  out << std::setprecision(17);
  out << "\"iscpt program: " << program.matrices().size() << " matrices, " << program.scalars().size()
      << " scalars\"\n";
  out << sf.m << "\n" << n_blocks << "\n";
  for (int d : sf.dims) out << d << " ";
  if (n_diag > 0) out << -n_diag;
  out << "\n";
  for (int i = 0; i < sf.m; ++i) out << sf.b[i] << (i + 1 < sf.m ? " " : "\n");
  if (sf.m == 0) out << "\n";

  const int diag_block = static_cast<int>(sf.dims.size()) + 1;
  for (std::size_t b = 0; b < sf.dims.size(); ++b)
    for (int r = 0; r < sf.dims[b]; ++r)
      for (int c = r; c < sf.dims[b]; ++c)
        if (sf.c[b](r, c) != 0.0) out << 0 << " " << b + 1 << " " << r + 1 << " " << c + 1 << " " << -sf.c[b](r, c) << "\n";
  for (int j = 0; j < sf.n_lp; ++j)
    if (sf.c_lp[j] != 0.0) out << 0 << " " << diag_block << " " << j + 1 << " " << j + 1 << " " << -sf.c_lp[j] << "\n";
  for (int j = 0; j < sf.n_free; ++j) {
    if (sf.c_free[j] == 0.0) continue;
    const int p = sf.n_lp + 2 * j + 1;
    out << 0 << " " << diag_block << " " << p << " " << p << " " << -sf.c_free[j] << "\n";
    out << 0 << " " << diag_block << " " << p + 1 << " " << p + 1 << " " << sf.c_free[j] << "\n";
  }

  for (int i = 0; i < sf.m; ++i) {
    for (const SymCoeff& a : sf.rows[i]) {
      if (a.dense.size() > 0) {
        for (int r = 0; r < a.dense.rows(); ++r)
          for (int c = r; c < a.dense.cols(); ++c)
            if (a.dense(r, c) != 0.0)
              out << i + 1 << " " << a.block + 1 << " " << r + 1 << " " << c + 1 << " " << a.dense(r, c) << "\n";
      } else {
        for (std::size_t t = 0; t < a.v.size(); ++t)
          out << i + 1 << " " << a.block + 1 << " " << a.r[t] + 1 << " " << a.c[t] + 1 << " " << a.v[t] << "\n";
      }
    }
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sf.a_lp, i); it; ++it)
      out << i + 1 << " " << diag_block << " " << it.col() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sf.a_free, i); it; ++it) {
      const int p = sf.n_lp + 2 * static_cast<int>(it.col()) + 1;
      out << i + 1 << " " << diag_block << " " << p << " " << p << " " << it.value() << "\n";
      out << i + 1 << " " << diag_block << " " << p + 1 << " " << p + 1 << " " << -it.value() << "\n";
    }
  }
}

}  // namespace iscpt::conic
