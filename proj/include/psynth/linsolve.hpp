#pragma once
// Fixed-point solves x = c + P x over a subset of unknowns of a sparse
// substochastic matrix in CSR form. Known entries of x are read, not written.

#include <cstddef>
#include <vector>

namespace psynth {

struct CsrMatrix {
  std::vector<std::size_t> row_start{0};
  std::vector<std::size_t> col;
  std::vector<double> val;
  std::size_t rows() const { return row_start.size() - 1; }
};

struct SolveOptions {
  double tolerance = 1e-10;
  std::size_t max_sweeps = 1'000'000;
  // Gauss-Seidel gives up (and switches to sparse LU) after this many
  // nonzero visits or when the observed contraction rate is too slow.
  std::size_t work_budget = 100'000'000;
  bool direct = false;
};

struct SolveStats {
  std::size_t sweeps = 0;
  bool used_direct = false;
  double residual = 0.0;
};

SolveStats solve_fixed_point(const CsrMatrix& p, const std::vector<char>& unknown,
                             const std::vector<double>& c, std::vector<double>& x,
                             const SolveOptions& opt = {});

}  // namespace psynth
