#include "psynth/kernels/kernels.hpp"

#include <cmath>

namespace psynth::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_scalar(a + r * cols, x, cols);
}

void gemv_t_scalar(const double* a, std::size_t rows, std::size_t cols, const double* y,
                   double* x) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(y[r], a + r * cols, x, cols);
}

void ger_scalar(double* a, std::size_t rows, std::size_t cols, const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(u[r], v, a + r * cols, cols);
}

void adam_scalar(double* param, const double* grad, double* m, double* v, std::size_t n,
                 const AdamStep& s) {
  const double a = s.lr / s.bias1;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    param[i] -= a * m[i] / (std::sqrt(v[i] / s.bias2) + s.eps);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, dot_scalar,   axpy_scalar, gemv_scalar,
                                 gemv_t_scalar, ger_scalar, adam_scalar};
  return table;
}

}  // namespace psynth::kernels
