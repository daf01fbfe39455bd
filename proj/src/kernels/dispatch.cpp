#include "psynth/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace psynth::kernels {

#if defined(PSYNTH_HAS_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(PSYNTH_HAS_NEON)
const KernelTable& neon_kernels();
#endif

const KernelTable* avx2_table() {
#if defined(PSYNTH_HAS_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(PSYNTH_HAS_NEON)
  return &neon_kernels();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* best_available() {
  if (const char* env = std::getenv("PSYNTH_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && avx2_table()) return avx2_table();
    if (want == "neon" && neon_table()) return neon_table();
  }
  if (auto* t = avx2_table()) return t;
  if (auto* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{best_available()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(Isa isa) {
  const KernelTable* t = nullptr;
  switch (isa) {
    case Isa::Scalar: t = &scalar_table(); break;
    case Isa::Avx2: t = avx2_table(); break;
    case Isa::Neon: t = neon_table(); break;
  }
  if (!t) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace psynth::kernels
