#include <atomic>
#include <cstdlib>
#include <cstring>

#include "chaosloop/simd/kernels.hpp"

namespace chaosloop::simd {
namespace {

Isa detect() {
  if (const char* env = std::getenv("CHAOSLOOP_SIMD"); env && std::strcmp(env, "scalar") == 0)
    return Isa::Scalar;
  return cpu_supports_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

bool cpu_supports_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& table_for(Isa isa) {
  if (isa == Isa::Avx2 && cpu_supports_avx2()) return avx2::table();
  return scalar::table();
}

const KernelTable& kernels() { return table_for(active_isa()); }

void force_isa(Isa isa) {
  if (isa == Isa::Avx2 && !cpu_supports_avx2()) isa = Isa::Scalar;
  selected().store(static_cast<int>(isa), std::memory_order_relaxed);
}

}  // namespace chaosloop::simd
