#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "daa/simd.hpp"
#include "unit/test_support.hpp"

using daa::simd::KernelTable;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  daa::CounterRng rng(daa::RngSeed{seed}, 7);
  std::vector<double> v(n);
  for (double& x : v) x = scale * (2.0 * rng.next_unit() - 1.0);
  // Sprinkle the values where sign and clip are easiest to get wrong.
  if (n > 3) {
    v[0] = 0.0;
    v[1] = -0.0;
    v[2] = 4.9e-324;
    v[3] = -1e-300;
  }
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

bool bitwise_equal(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

// Straight four-lane reference for the documented reduction order.
double lane_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double lane[4] = {0, 0, 0, 0};
  const std::size_t n4 = a.size() / 4 * 4;
  for (std::size_t i = 0; i < n4; ++i) lane[i % 4] += a[i] * b[i];
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = n4; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_equivalent(const KernelTable& ref, const KernelTable& simd) {
  for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 13, 16, 31, 64, 97, 784}) {
    CAPTURE(n);
    const auto a = random_vec(n, 11 + n);
    const auto b = random_vec(n, 23 + n);
    const auto c = random_vec(n, 37 + n, 0.5);
    CHECK(bitwise_equal(ref.dot(a.data(), b.data(), n), simd.dot(a.data(), b.data(), n)));
    CHECK(bitwise_equal(ref.sq_distance(a.data(), b.data(), n), simd.sq_distance(a.data(), b.data(), n)));
    CHECK(bitwise_equal(ref.l1_norm(a.data(), n), simd.l1_norm(a.data(), n)));

    auto y1 = c, y2 = c;
    ref.axpy(y1.data(), 0.37, a.data(), n);
    simd.axpy(y2.data(), 0.37, a.data(), n);
    CHECK(bitwise_equal(y1, y2));
    ref.axpy_diff(y1.data(), -1.3, a.data(), b.data(), n);
    simd.axpy_diff(y2.data(), -1.3, a.data(), b.data(), n);
    CHECK(bitwise_equal(y1, y2));

    std::vector<double> s1(n), s2(n);
    ref.sign(s1.data(), a.data(), n);
    simd.sign(s2.data(), a.data(), n);
    CHECK(bitwise_equal(s1, s2));

    ref.clip_box(s1.data(), a.data(), c.data(), 0.3, -0.2, 0.4, n);
    simd.clip_box(s2.data(), a.data(), c.data(), 0.3, -0.2, 0.4, n);
    CHECK(bitwise_equal(s1, s2));

    auto x1 = c, x2 = c;
    for (int step = 0; step < 3; ++step) {
      ref.sign_step(x1.data(), a.data(), c.data(), 0.05, 0.1, -0.45, 0.45, n);
      simd.sign_step(x2.data(), a.data(), c.data(), 0.05, 0.1, -0.45, 0.45, n);
    }
    CHECK(bitwise_equal(x1, x2));

    if (n > 0) {
      const auto x0 = random_vec(n, 101), xa = random_vec(n, 102), xb = random_vec(n, 103), xc = random_vec(n, 104);
      double o1[4], o2[4];
      ref.dot4(a.data(), x0.data(), xa.data(), xb.data(), xc.data(), n, o1);
      simd.dot4(a.data(), x0.data(), xa.data(), xb.data(), xc.data(), n, o2);
      for (int k = 0; k < 4; ++k) CHECK(bitwise_equal(o1[k], o2[k]));
      CHECK(bitwise_equal(o2[1], simd.dot(a.data(), xa.data(), n)));
    }
  }
}

}  // namespace

TEST_CASE("scalar reductions follow the documented four-lane order") {
  const auto& k = daa::simd::scalar_kernels();
  for (std::size_t n : {0, 1, 4, 6, 9, 100}) {
    const auto a = random_vec(n, 5 * n + 1);
    const auto b = random_vec(n, 5 * n + 2);
    CHECK(bitwise_equal(k.dot(a.data(), b.data(), n), lane_dot(a, b)));
  }
}

TEST_CASE("avx2 kernels are bitwise identical to the scalar reference") {
  const KernelTable* avx2 = daa::simd::avx2_kernels();
  if (avx2 == nullptr) {
    MESSAGE("AVX2 unavailable on this host; equivalence not exercised");
    return;
  }
  check_equivalent(daa::simd::scalar_kernels(), *avx2);
}

TEST_CASE("sign kernel maps zeros to +0 and keeps magnitudes out") {
  const auto& k = daa::simd::active();
  const std::vector<double> in = {-2.5, 0.0, -0.0, 3.0, 1e-300, -1e-300, 4.9e-324};
  std::vector<double> out(in.size());
  k.sign(out.data(), in.data(), in.size());
  CHECK(bitwise_equal(out, std::vector<double>{-1.0, 0.0, 0.0, 1.0, 1.0, -1.0, 1.0}));
}

TEST_CASE("clip_box handles infinite boxes") {
  const auto& k = daa::simd::active();
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> cand = {-5.0, 0.25, 7.0, 1.0, 2.0};
  const std::vector<double> orig(cand.size(), 0.0);
  std::vector<double> out(cand.size());
  k.clip_box(out.data(), cand.data(), orig.data(), inf, -inf, inf, cand.size());
  CHECK(out == cand);
}

TEST_CASE("active kernel set is one of the known variants") {
  const auto name = daa::simd::active().name;
  CHECK((name == "scalar" || name == "avx2"));
}
