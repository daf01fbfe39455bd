#pragma once
// Dense double-precision kernels used by the recurrent policy.
//
// Every kernel has a portable scalar reference implementation. Vectorized
// variants (AVX2+FMA on x86-64, NEON on aarch64) are compiled into separate
// translation units and selected once at runtime. The PSYNTH_ISA environment
// variable ("scalar", "avx2", "neon") overrides the selection.

#include <cstddef>
#include <span>
#include <string_view>

namespace psynth::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct AdamStep {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double bias1 = 1.0;  // 1 - beta1^t
  double bias2 = 1.0;  // 1 - beta2^t
};

// Function table; all matrices are row-major.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += A x, A is rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // x += A^T y
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* y, double* x);
  // A += u v^T
  void (*ger)(double* a, std::size_t rows, std::size_t cols, const double* u, const double* v);
  void (*adam)(double* param, const double* grad, double* m, double* v, std::size_t n,
               const AdamStep& step);
};

const KernelTable& scalar_table();
// Returns nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// The table chosen for this process.
const KernelTable& active();
// Forces a table; used by equivalence tests. Returns false if unavailable.
bool select(Isa isa);
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
  active().gemv(a.data(), rows, cols, x.data(), y.data());
}
inline void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
                   std::span<const double> y, std::span<double> x) {
  active().gemv_t(a.data(), rows, cols, y.data(), x.data());
}
inline void ger(std::span<double> a, std::size_t rows, std::size_t cols,
                std::span<const double> u, std::span<const double> v) {
  active().ger(a.data(), rows, cols, u.data(), v.data());
}
inline void adam(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamStep& step) {
  active().adam(param.data(), grad.data(), m.data(), v.data(), param.size(), step);
}

}  // namespace psynth::kernels
