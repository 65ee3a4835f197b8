#include "kernels_impl.hpp"

namespace daa::simd::detail {

namespace {

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline double clip_one(double cand, double orig, double alpha, double lo, double hi) {
  const double box_lo = orig - alpha;
  const double box_hi = orig + alpha;
  double v = cand < box_lo ? box_lo : cand;
  v = v > box_hi ? box_hi : v;
  v = v < lo ? lo : v;
  return v > hi ? hi : v;
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc[0] += a[i] * b[i];
    acc[1] += a[i + 1] * b[i + 1];
    acc[2] += a[i + 2] * b[i + 2];
    acc[3] += a[i + 3] * b[i + 3];
  }
  double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sq_distance(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double d = a[i + l] - b[i + l];
      acc[l] += d * d;
    }
  }
  double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (std::size_t i = n4; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double l1_norm(const double* a, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) acc[l] += a[i + l] < 0.0 ? -a[i + l] : a[i + l];
  }
  double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (std::size_t i = n4; i < n; ++i) s += a[i] < 0.0 ? -a[i] : a[i];
  return s;
}

void axpy(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy_diff(double* y, double a, const double* u, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * (u[i] - v[i]);
}

void sign(double* out, const double* in, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sign_of(in[i]);
}

void clip_box(double* out, const double* cand, const double* orig, double alpha, double lo,
              double hi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = clip_one(cand[i], orig[i], alpha, lo, hi);
}

void sign_step(double* x, const double* dir, const double* orig, double step, double alpha,
               double lo, double hi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = clip_one(x[i] + step * sign_of(dir[i]), orig[i], alpha, lo, hi);
  }
}

void dot4(const double* w, const double* x0, const double* x1, const double* x2, const double* x3,
          std::size_t n, double out[4]) {
  out[0] = dot(w, x0, n);
  out[1] = dot(w, x1, n);
  out[2] = dot(w, x2, n);
  out[3] = dot(w, x3, n);
}

}  // namespace

const KernelTable kScalarTable{
    "scalar", dot, sq_distance, l1_norm, axpy, axpy_diff, sign, clip_box, sign_step, dot4,
};

}  // namespace daa::simd::detail
