// Data-parallel inner loops used by quadrature contractions, basis
// evaluation and the batched Monte Carlo interpreter.
//
// Every kernel has a scalar reference implementation. An AVX2/FMA variant is
// selected at runtime when the CPU supports it; the two are kept
// equivalence-tested. Set CHAOSLOOP_SIMD=scalar to force the reference path.
#pragma once

#include <cstddef>
#include <span>

namespace chaosloop::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a[i] * b[i] * c[i]
  double (*dot3)(const double* a, const double* b, const double* c, std::size_t n);
  // sum_i w[i] * (a[i] - b[i])^2
  double (*weighted_sq_diff)(const double* w, const double* a, const double* b, std::size_t n);
  // out[i] = sum_k coeffs[k] * x[i]^k  (Horner)
  void (*horner)(const double* coeffs, std::size_t ncoeffs, const double* x, double* out,
                 std::size_t n);
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = alpha * x[i] + beta
  void (*affine)(double alpha, const double* x, double beta, double* out, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

namespace scalar {
const KernelTable& table();
}
namespace avx2 {
// Only valid to call through when cpu_supports_avx2() is true.
const KernelTable& table();
}

bool cpu_supports_avx2();
Isa active_isa();
const char* isa_name(Isa isa);
const KernelTable& table_for(Isa isa);
const KernelTable& kernels();

// Test hook; passing Avx2 on a machine without it falls back to scalar.
void force_isa(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}

inline double dot3(std::span<const double> a, std::span<const double> b,
                   std::span<const double> c) {
  return kernels().dot3(a.data(), b.data(), c.data(), a.size());
}

inline void horner(std::span<const double> coeffs, std::span<const double> x, std::span<double> out) {
  kernels().horner(coeffs.data(), coeffs.size(), x.data(), out.data(), x.size());
}

}  // namespace chaosloop::simd
