// Compiled with -mavx2 only. Callers reach these through avx2_kernels(),
// which checks the CPU first.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace daa::simd::detail {

namespace {

inline double hsum(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

inline __m256d sign_of(__m256d v) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_GT_OQ), _mm256_set1_pd(1.0));
  const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_LT_OQ), _mm256_set1_pd(-1.0));
  return _mm256_or_pd(pos, neg);
}

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Operand order matches the scalar ternaries so signed zeros agree.
inline __m256d clip_one(__m256d cand, __m256d orig, __m256d alpha, __m256d lo, __m256d hi) {
  const __m256d box_lo = _mm256_sub_pd(orig, alpha);
  const __m256d box_hi = _mm256_add_pd(orig, alpha);
  __m256d v = _mm256_max_pd(box_lo, cand);
  v = _mm256_min_pd(box_hi, v);
  v = _mm256_max_pd(lo, v);
  return _mm256_min_pd(hi, v);
}

inline double clip_one(double cand, double orig, double alpha, double lo, double hi) {
  const double box_lo = orig - alpha;
  const double box_hi = orig + alpha;
  double v = cand < box_lo ? box_lo : cand;
  v = v > box_hi ? box_hi : v;
  v = v < lo ? lo : v;
  return v > hi ? hi : v;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum(acc);
  for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sq_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (std::size_t i = n4; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double l1_norm(const double* a, std::size_t n) {
  const __m256d sign_bit = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_bit, _mm256_loadu_pd(a + i)));
  }
  double s = hsum(acc);
  for (std::size_t i = n4; i < n; ++i) s += a[i] < 0.0 ? -a[i] : a[i];
  return s;
}

void axpy(double* y, double a, const double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i),
                                          _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] += a * x[i];
}

void axpy_diff(double* y, double a, const double* u, const double* v, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(v + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(av, d)));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] += a * (u[i] - v[i]);
}

void sign(double* out, const double* in, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) _mm256_storeu_pd(out + i, sign_of(_mm256_loadu_pd(in + i)));
  for (std::size_t i = n4; i < n; ++i) out[i] = sign_of(in[i]);
}

void clip_box(double* out, const double* cand, const double* orig, double alpha, double lo,
              double hi, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d hiv = _mm256_set1_pd(hi);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(out + i, clip_one(_mm256_loadu_pd(cand + i), _mm256_loadu_pd(orig + i), av,
                                       lov, hiv));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = clip_one(cand[i], orig[i], alpha, lo, hi);
}

void sign_step(double* x, const double* dir, const double* orig, double step, double alpha,
               double lo, double hi, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(step);
  const __m256d av = _mm256_set1_pd(alpha);
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d hiv = _mm256_set1_pd(hi);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d moved = _mm256_add_pd(_mm256_loadu_pd(x + i),
                                        _mm256_mul_pd(sv, sign_of(_mm256_loadu_pd(dir + i))));
    _mm256_storeu_pd(x + i, clip_one(moved, _mm256_loadu_pd(orig + i), av, lov, hiv));
  }
  for (std::size_t i = n4; i < n; ++i) {
    x[i] = clip_one(x[i] + step * sign_of(dir[i]), orig[i], alpha, lo, hi);
  }
}

void dot4(const double* w, const double* x0, const double* x1, const double* x2, const double* x3,
          std::size_t n, double out[4]) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  __m256d a2 = _mm256_setzero_pd();
  __m256d a3 = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    a0 = _mm256_add_pd(a0, _mm256_mul_pd(wv, _mm256_loadu_pd(x0 + i)));
    a1 = _mm256_add_pd(a1, _mm256_mul_pd(wv, _mm256_loadu_pd(x1 + i)));
    a2 = _mm256_add_pd(a2, _mm256_mul_pd(wv, _mm256_loadu_pd(x2 + i)));
    a3 = _mm256_add_pd(a3, _mm256_mul_pd(wv, _mm256_loadu_pd(x3 + i)));
  }
  double s[4] = {hsum(a0), hsum(a1), hsum(a2), hsum(a3)};
  for (std::size_t i = n4; i < n; ++i) {
    s[0] += w[i] * x0[i];
    s[1] += w[i] * x1[i];
    s[2] += w[i] * x2[i];
    s[3] += w[i] * x3[i];
  }
  for (int k = 0; k < 4; ++k) out[k] = s[k];
}

}  // namespace

const KernelTable kAvx2Table{
    "avx2", dot, sq_distance, l1_norm, axpy, axpy_diff, sign, clip_box, sign_step, dot4,
};

}  // namespace daa::simd::detail
