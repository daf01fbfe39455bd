#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "psynth/kernels/kernels.hpp"

using namespace psynth::kernels;

namespace {

std::vector<double> randv(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

void close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i] - b[i]) <= 1e-12 * (1.0 + std::abs(a[i])));
}

// Compares one vectorised table against the scalar reference on sizes that
// exercise every tail length.
void compare(const KernelTable& fast) {
  const KernelTable& ref = scalar_table();
  std::mt19937_64 rng(7);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 129u}) {
    const auto a = randv(rng, n), b = randv(rng, n);
    const double d0 = ref.dot(a.data(), b.data(), n), d1 = fast.dot(a.data(), b.data(), n);
    CHECK(std::abs(d0 - d1) <= 1e-12 * (1.0 + std::abs(d0)));

    auto y0 = b, y1 = b;
    ref.axpy(0.37, a.data(), y0.data(), n);
    fast.axpy(0.37, a.data(), y1.data(), n);
    close(y0, y1);

    for (std::size_t rows : {1u, 3u, 8u}) {
      const auto m = randv(rng, rows * n), x = randv(rng, n), yv = randv(rng, rows);
      auto g0 = yv, g1 = yv;
      ref.gemv(m.data(), rows, n, x.data(), g0.data());
      fast.gemv(m.data(), rows, n, x.data(), g1.data());
      close(g0, g1);

      auto t0 = x, t1 = x;
      ref.gemv_t(m.data(), rows, n, yv.data(), t0.data());
      fast.gemv_t(m.data(), rows, n, yv.data(), t1.data());
      close(t0, t1);

      auto o0 = m, o1 = m;
      ref.ger(o0.data(), rows, n, yv.data(), x.data());
      fast.ger(o1.data(), rows, n, yv.data(), x.data());
      close(o0, o1);
    }

    auto p0 = a, p1 = a, m0 = randv(rng, n), v0 = randv(rng, n);
    for (auto& x : v0) x = x * x;
    auto m1 = m0, v1 = v0;
    AdamStep st;
    st.lr = 0.01;
    st.bias1 = 1 - std::pow(st.beta1, 3);
    st.bias2 = 1 - std::pow(st.beta2, 3);
    ref.adam(p0.data(), b.data(), m0.data(), v0.data(), n, st);
    fast.adam(p1.data(), b.data(), m1.data(), v1.data(), n, st);
    close(p0, p1);
    close(m0, m1);
    close(v0, v1);
  }
}

}  // namespace

TEST_CASE("scalar kernels compute the textbook formulas") {
  const auto& k = scalar_table();
  const double a[] = {1, 2, 3}, b[] = {4, 5, 6};
  CHECK(k.dot(a, b, 3) == 32.0);
  double m[] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  double y[] = {1, 1};
  k.gemv(m, 2, 3, a, y);
  CHECK(y[0] == 15.0);
  CHECK(y[1] == 33.0);
  double x[] = {0, 0, 0};
  const double u[] = {1, -1};
  k.gemv_t(m, 2, 3, u, x);
  CHECK(x[0] == -3.0);
  CHECK(x[2] == -3.0);
}

TEST_CASE("vectorised kernels agree with the scalar reference") {
  if (const auto* t = avx2_table()) {
    INFO("avx2");
    compare(*t);
  }
  if (const auto* t = neon_table()) {
    INFO("neon");
    compare(*t);
  }
  const Isa before = active().isa;
  CHECK(select(Isa::Scalar));
  CHECK(active().isa == Isa::Scalar);
  CHECK(isa_name(Isa::Scalar) == "scalar");
  CHECK(select(before));
}
