#include "psynth/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace psynth {

namespace {

// Tableau with rows 0..m-1 constraints and objective row m (reduced costs of a
// maximisation written as  z - sum c_j x_j = 0).
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  std::size_t& basis(std::size_t r) { return basis_[r]; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  void pivot(std::size_t r, std::size_t c) {
    const double piv = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= piv;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  // Bland's rule on columns [0, limit). Returns false when unbounded.
  bool optimise(std::size_t limit, double tol, std::size_t& pivots) {
    for (;;) {
      std::size_t enter = limit;
      for (std::size_t j = 0; j < limit; ++j)
        if (at(m_, j) < -tol) {
          enter = j;
          break;
        }
      if (enter == limit) return true;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (at(i, enter) <= tol) continue;
        const double ratio = rhs(i) / at(i, enter);
        if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && leave < m_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void drop_row(std::size_t r) {
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) = 0.0;
    dropped_.push_back(r);
  }
  bool dropped(std::size_t r) const { return std::find(dropped_.begin(), dropped_.end(), r) != dropped_.end(); }

 private:
  std::size_t m_, n_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> dropped_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  const std::size_t nv = lp.vars;
  if (lp.c.size() != nv) throw std::invalid_argument("objective size mismatch");
  struct Row {
    std::vector<double> a;
    double b;
    int kind;  // 0 <=, 1 >=, 2 =
  };
  std::vector<Row> rows;
  auto add = [&](const std::vector<std::vector<double>>& a, const std::vector<double>& b, int kind) {
    if (a.size() != b.size()) throw std::invalid_argument("constraint size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].size() != nv) throw std::invalid_argument("constraint width mismatch");
      Row r{a[i], b[i], kind};
      if (r.b < 0) {
        for (double& v : r.a) v = -v;
        r.b = -r.b;
        if (kind != 2) r.kind = 1 - kind;
      }
      rows.push_back(std::move(r));
    }
  };
  add(lp.a_le, lp.b_le, 0);
  add(lp.a_ge, lp.b_ge, 1);
  add(lp.a_eq, lp.b_eq, 2);

  const std::size_t m = rows.size();
  std::size_t slack = 0, art = 0;
  for (const auto& r : rows) {
    if (r.kind != 2) ++slack;
    if (r.kind != 0) ++art;
  }
  const std::size_t real = nv + slack;  // columns that survive phase one
  Tableau t(m, real + art);
  std::size_t next_slack = nv, next_art = real;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nv; ++j) t.at(i, j) = rows[i].a[j];
    t.rhs(i) = rows[i].b;
    if (rows[i].kind == 0) {
      t.at(i, next_slack) = 1.0;
      t.basis(i) = next_slack++;
    } else {
      if (rows[i].kind == 1) t.at(i, next_slack++) = -1.0;
      t.at(i, next_art) = 1.0;
      t.basis(i) = next_art++;
    }
  }

  LpResult res;
  if (art > 0) {
    // Phase one: maximise -sum(artificials).
    for (std::size_t j = real; j < real + art; ++j) t.at(m, j) = 1.0;
    for (std::size_t i = 0; i < m; ++i)
      if (t.basis(i) >= real)
        for (std::size_t j = 0; j <= real + art; ++j) t.at(m, j) -= t.at(i, j);
    t.optimise(real + art, tol, res.pivots);
    if (-t.rhs(m) > 1e-9) return res;  // infeasible
    // Drive artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis(i) < real) continue;
      std::size_t col = real;
      for (std::size_t j = 0; j < real; ++j)
        if (std::abs(t.at(i, j)) > 1e-9) {
          col = j;
          break;
        }
      if (col == real) t.drop_row(i);
      else t.pivot(i, col), ++res.pivots;
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = real; j < real + art; ++j) t.at(i, j) = 0.0;
  }

  // Phase two objective row.
  for (std::size_t j = 0; j <= real + art; ++j) t.at(m, j) = 0.0;
  for (std::size_t j = 0; j < nv; ++j) t.at(m, j) = -lp.c[j];
  for (std::size_t i = 0; i < m; ++i) {
    if (t.dropped(i)) continue;
    const std::size_t b = t.basis(i);
    const double f = t.at(m, b);
    if (f == 0.0) continue;
    for (std::size_t j = 0; j <= real + art; ++j) t.at(m, j) -= f * t.at(i, j);
  }
  if (!t.optimise(real, tol, res.pivots)) {
    res.status = LpResult::Status::Unbounded;
    return res;
  }
  res.status = LpResult::Status::Optimal;
  res.x.assign(nv, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (!t.dropped(i) && t.basis(i) < nv) res.x[t.basis(i)] = std::max(0.0, t.rhs(i));
  res.objective = 0.0;
  for (std::size_t j = 0; j < nv; ++j) res.objective += lp.c[j] * res.x[j];
  return res;
}

double min_payoff(const std::vector<std::vector<double>>& q, const std::vector<double>& d) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& row : q) {
    double v = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) v += d[j] * row[j];
    worst = std::min(worst, v);
  }
  return worst;
}

namespace {

std::vector<double> normalised(std::vector<double> d) {
  double sum = 0.0;
  for (double& v : d) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) return d;
  for (double& v : d) v /= sum;
  return d;
}

}  // namespace

MaxMinResult max_min(const std::vector<std::vector<double>>& q, bool second_stage) {
  if (q.empty() || q.front().empty()) throw std::invalid_argument("empty payoff matrix");
  const std::size_t k = q.front().size();
  // Shift payoffs positive so the game value variable is nonnegative.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : q)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double shift = lo - 1.0;
  const double scale = std::max(1.0, hi - shift);
  std::vector<std::vector<double>> p(q.size(), std::vector<double>(k));
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) p[i][j] = (q[i][j] - shift) / scale;

  // variables: d_0..d_{k-1}, t
  LinearProgram lp;
  lp.vars = k + 1;
  lp.c.assign(k + 1, 0.0);
  lp.c[k] = 1.0;
  for (const auto& row : p) {
    std::vector<double> a(k + 1);
    for (std::size_t j = 0; j < k; ++j) a[j] = -row[j];
    a[k] = 1.0;
    lp.a_le.push_back(std::move(a));
    lp.b_le.push_back(0.0);
  }
  std::vector<double> ones(k + 1, 1.0);
  ones[k] = 0.0;
  lp.a_eq.push_back(ones);
  lp.b_eq.push_back(1.0);
  const LpResult first = solve_lp(lp);
  if (first.status != LpResult::Status::Optimal) throw std::runtime_error("max-min LP failed");
  std::vector<double> d = normalised(std::vector<double>(first.x.begin(), first.x.begin() + k));

  if (second_stage && q.size() > 1) {
    const double target = min_payoff(p, d) - 1e-12;
    LinearProgram lp2;
    lp2.vars = k;
    lp2.c.assign(k, 0.0);
    for (const auto& row : p) {
      for (std::size_t j = 0; j < k; ++j) lp2.c[j] += row[j];
      lp2.a_ge.push_back(row);
      lp2.b_ge.push_back(target);
    }
    lp2.a_eq.push_back(std::vector<double>(k, 1.0));
    lp2.b_eq.push_back(1.0);
    const LpResult second = solve_lp(lp2);
    if (second.status == LpResult::Status::Optimal) {
      auto d2 = normalised(second.x);
      if (min_payoff(q, d2) >= min_payoff(q, d)) d = std::move(d2);
    }
  }
  return {d, min_payoff(q, d)};
}

}  // namespace psynth
