#include "psynth/linsolve.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psynth {

namespace {

double residual(const CsrMatrix& p, const std::vector<char>& unknown, const std::vector<double>& c,
                const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t s = 0; s < p.rows(); ++s) {
    if (!unknown[s]) continue;
    double v = c[s];
    for (std::size_t e = p.row_start[s]; e < p.row_start[s + 1]; ++e) v += p.val[e] * x[p.col[e]];
    worst = std::max(worst, std::abs(v - x[s]));
  }
  return worst;
}

void solve_direct(const CsrMatrix& p, const std::vector<char>& unknown, const std::vector<double>& c,
                  std::vector<double>& x) {
  const std::size_t n = p.rows();
  std::vector<std::size_t> local(n, n);
  std::size_t m = 0;
  for (std::size_t s = 0; s < n; ++s)
    if (unknown[s]) local[s] = m++;
  if (m == 0) return;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
  for (std::size_t s = 0; s < n; ++s) {
    if (!unknown[s]) continue;
    const auto i = static_cast<Eigen::Index>(local[s]);
    double b = c[s];
    trip.emplace_back(i, i, 1.0);
    for (std::size_t e = p.row_start[s]; e < p.row_start[s + 1]; ++e) {
      const std::size_t t = p.col[e];
      if (unknown[t]) trip.emplace_back(i, static_cast<Eigen::Index>(local[t]), -p.val[e]);
      else b += p.val[e] * x[t];
    }
    rhs[i] = b;
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorization failed");
  const Eigen::VectorXd sol = lu.solve(rhs);
  for (std::size_t s = 0; s < n; ++s)
    if (unknown[s]) x[s] = sol[static_cast<Eigen::Index>(local[s])];
}

}  // namespace

SolveStats solve_fixed_point(const CsrMatrix& p, const std::vector<char>& unknown,
                             const std::vector<double>& c, std::vector<double>& x,
                             const SolveOptions& opt) {
  SolveStats stats;
  const std::size_t n = p.rows();
  std::vector<std::size_t> rows;
  for (std::size_t s = 0; s < n; ++s)
    if (unknown[s]) rows.push_back(s);
  if (rows.empty()) return stats;

  if (!opt.direct) {
    std::size_t nnz = 0;
    for (std::size_t s : rows) nnz += p.row_start[s + 1] - p.row_start[s];
    double prev_change = 0.0;
    std::size_t work = 0;
    bool converged = false;
    while (stats.sweeps < opt.max_sweeps && work <= opt.work_budget) {
      double change = 0.0;
      for (std::size_t s : rows) {
        double v = c[s], self = 0.0;
        for (std::size_t e = p.row_start[s]; e < p.row_start[s + 1]; ++e) {
          const std::size_t t = p.col[e];
          if (t == s) self += p.val[e];
          else v += p.val[e] * x[t];
        }
        v /= 1.0 - self;
        change = std::max(change, std::abs(v - x[s]));
        x[s] = v;
      }
      ++stats.sweeps;
      work += nnz;
      // Stop once the change is small and the geometric tail bound agrees.
      if (change < opt.tolerance) {
        const double rate = prev_change > 0.0 ? std::min(change / prev_change, 0.999999) : 0.0;
        if (change * rate / (1.0 - rate) < opt.tolerance) {
          converged = true;
          break;
        }
      }
      if (stats.sweeps > 100 && prev_change > 0.0 && change > 0.0) {
        // remaining sweeps predicted from the contraction rate
        const double rate = change / prev_change;
        if (rate >= 1.0 - 1e-7) break;
        const double needed = std::log(opt.tolerance * (1.0 - rate) / change) / std::log(rate);
        if (needed * static_cast<double>(nnz) > static_cast<double>(opt.work_budget - std::min(work, opt.work_budget)))
          break;
      }
      prev_change = change;
    }
    if (converged) {
      stats.residual = residual(p, unknown, c, x);
      return stats;
    }
  }
  solve_direct(p, unknown, c, x);
  stats.used_direct = true;
  stats.residual = residual(p, unknown, c, x);
  return stats;
}

}  // namespace psynth
