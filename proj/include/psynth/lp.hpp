#pragma once
// Small dense linear programs (two-phase simplex, Bland's rule).
//
//   maximize c.x  subject to  A_le x <= b_le,  A_eq x = b_eq,  x >= 0

#include <cstddef>
#include <vector>

namespace psynth {

struct LinearProgram {
  std::size_t vars = 0;
  std::vector<double> c;
  std::vector<std::vector<double>> a_le, a_ge, a_eq;
  std::vector<double> b_le, b_ge, b_eq;
};

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

LpResult solve_lp(const LinearProgram& lp, double tol = 1e-11);

// max over distributions d of min_i sum_j d_j q[i][j]. The second stage picks,
// among optimal d, one maximising the summed payoff over all rows.
struct MaxMinResult {
  std::vector<double> weights;
  double value = 0.0;
};

MaxMinResult max_min(const std::vector<std::vector<double>>& q, bool second_stage = true);

// min_i sum_j d_j q[i][j]
double min_payoff(const std::vector<std::vector<double>>& q, const std::vector<double>& d);

}  // namespace psynth
