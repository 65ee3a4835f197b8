#pragma once

#include <cstddef>
#include <string_view>

namespace daa::simd {

// Every reduction below accumulates in four interleaved lanes: lane l sums
// the terms at indices i with i % 4 == l over the largest multiple of four,
// the lanes combine as (l0 + l1) + (l2 + l3), and the tail is then added in
// index order. The scalar and AVX2 variants follow this order exactly, so
// both produce bitwise-identical results. No fused multiply-add is used.

/// One set of inner-loop kernels. All pointers reference `n` contiguous doubles.
struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sq_distance)(const double* a, const double* b, std::size_t n);
  double (*l1_norm)(const double* a, std::size_t n);

  /// y += a * x
  void (*axpy)(double* y, double a, const double* x, std::size_t n);
  /// y += a * (u - v)
  void (*axpy_diff)(double* y, double a, const double* u, const double* v, std::size_t n);
  /// out = sign(in), with sign(0) = 0
  void (*sign)(double* out, const double* in, std::size_t n);
  /// out = clip_[lo,hi](clip_[orig-alpha, orig+alpha](cand))
  void (*clip_box)(double* out, const double* cand, const double* orig, double alpha, double lo,
                   double hi, std::size_t n);
  /// x = clip_box(x + step * sign(dir))
  void (*sign_step)(double* x, const double* dir, const double* orig, double step, double alpha,
                    double lo, double hi, std::size_t n);
  /// Four dot products of one shared row `w` against rows x0..x3.
  void (*dot4)(const double* w, const double* x0, const double* x1, const double* x2,
               const double* x3, std::size_t n, double out[4]);
};

const KernelTable& scalar_kernels() noexcept;

/// AVX2 variant, or nullptr when it was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels() noexcept;

/// Kernel set used by the library. Chosen once: the fastest supported
/// variant, unless the environment variable DAA_SIMD is set to "scalar".
const KernelTable& active() noexcept;

}  // namespace daa::simd
