// NEON variants for aarch64, where Advanced SIMD is part of the base ISA.
#include "psynth/kernels/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace psynth::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_neon(a + r * cols, x, cols);
}

void gemv_t_neon(const double* a, std::size_t rows, std::size_t cols, const double* y, double* x) {
  for (std::size_t r = 0; r < rows; ++r) axpy_neon(y[r], a + r * cols, x, cols);
}

void ger_neon(double* a, std::size_t rows, std::size_t cols, const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) axpy_neon(u[r], v, a + r * cols, cols);
}

void adam_neon(double* param, const double* grad, double* m, double* v, std::size_t n,
               const AdamStep& s) {
  const double a = s.lr / s.bias1;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    param[i] -= a * m[i] / (std::sqrt(v[i] / s.bias2) + s.eps);
  }
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{Isa::Neon, dot_neon,    axpy_neon, gemv_neon,
                                 gemv_t_neon, ger_neon, adam_neon};
  return table;
}

}  // namespace psynth::kernels
