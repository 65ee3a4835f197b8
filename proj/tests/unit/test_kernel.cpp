#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "daa/kernel.hpp"
#include "unit/test_support.hpp"

using namespace daa;
using daa::test::random_tensor;

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

double naive_sq(const Tensor& x, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.row_size(); ++k) s += (x.at(i, k) - x.at(j, k)) * (x.at(i, k) - x.at(j, k));
  return s;
}

// Double-loop references written straight from the update formulas.
Tensor naive_blob(const Tensor& x, const Tensor& g, double c) {
  const std::size_t m = x.rows();
  const std::size_t w = x.row_size();
  double h = 1.0;
  if (m >= 2) {
    std::vector<double> dist;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) dist.push_back(std::sqrt(naive_sq(x, i, j)));
    const double med = median_of(dist);
    h = med == 0.0 ? kBandwidthFloor : med * med / std::log(static_cast<double>(m));
  }
  Tensor out(x.shape());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t q = 0; q < w; ++q) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double k = std::exp(-naive_sq(x, i, j) / h);
        s += k * g.at(j, q) + (2.0 / h) * k * (x.at(i, q) - x.at(j, q));
      }
      out.at(i, q) = c / static_cast<double>(m) * s;
    }
  }
  return out;
}

Tensor naive_dgf(const Tensor& x, double lambda, double scale) {
  const std::size_t m = x.rows();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t q = 0; q < x.row_size(); ++q) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double d = naive_sq(x, i, j);
        s += (d / lambda - 1.0) * std::exp(-d / lambda) * (x.at(i, q) - x.at(j, q));
      }
      out.at(i, q) = scale * s;
    }
  }
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Tensor permute_rows(const Tensor& t, const std::vector<std::size_t>& p) { return t.gather_rows(p); }

}  // namespace

TEST_CASE("median_bandwidth") {
  const auto d3 = pairwise_sq_distances(Tensor({3, 1}, {0.0, 1.0, 3.0}));
  CHECK(median_bandwidth(d3, 3) == doctest::Approx(3.6409569065073493).epsilon(1e-14));
  const auto d2 = pairwise_sq_distances(Tensor({2, 1}, {0.0, 1.0}));
  CHECK(median_bandwidth(d2, 2) == doctest::Approx(1.4426950408889634).epsilon(1e-14));
  const Tensor same({4, 3}, 0.25);
  CHECK(median_bandwidth(pairwise_sq_distances(same), 4) == kBandwidthFloor);
  const auto flat = rbf_kernel(same, kBandwidthFloor);
  for (double v : flat.k) CHECK(v == 1.0);
  CHECK_THROWS_AS(median_bandwidth(d2, 1), std::invalid_argument);
}

TEST_CASE("rbf_kernel") {
  const Tensor x = random_tensor({6, 4}, 3);
  const auto km = rbf_kernel(x, 0.7);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(km(i, i) == 1.0);
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(km(i, j) == km(j, i));
      CHECK(km(i, j) > 0.0);
      CHECK(km(i, j) <= 1.0);
    }
  }
  const double h = 2.5;
  const auto two = rbf_kernel(Tensor({2, 1}, {0.0, std::sqrt(h)}), h);
  CHECK(two(0, 1) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
  const auto wide = rbf_kernel(Tensor({3, 1}, {0.0, 1.0, 2.0}), 1e12);
  CHECK(std::abs(wide(0, 1) - 1.0) <= 1e-10);
  CHECK_THROWS_AS(rbf_kernel(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rbf_kernel(x, -1.0), std::invalid_argument);
}

TEST_CASE("kernel gradient matches finite differences") {
  // d/dx_j exp(-||x_i - x_j||^2 / h) = (2/h) k_ij (x_i - x_j)
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor xi = random_tensor({1, 5}, 10 + seed);
    const Tensor xj = random_tensor({1, 5}, 40 + seed);
    const double h = 0.5 + static_cast<double>(seed) * 0.1;
    double d2 = 0.0;
    for (std::size_t q = 0; q < 5; ++q) d2 += (xi[q] - xj[q]) * (xi[q] - xj[q]);
    const double k = std::exp(-d2 / h);
    const auto f = [&](const Tensor& y) {
      double s = 0.0;
      for (std::size_t q = 0; q < 5; ++q) s += (xi[q] - y[q]) * (xi[q] - y[q]);
      return std::exp(-s / h);
    };
    const Tensor num = finite_difference_gradient(f, xj, 1e-6);
    for (std::size_t q = 0; q < 5; ++q) {
      CHECK(daa::test::close((2.0 / h) * k * (xi[q] - xj[q]), num[q], 1e-5, 1e-10));
    }
  }
}

TEST_CASE("blob_interaction") {
  const InteractionConfig on{1.1, 1.0, 0.0};
  SUBCASE("c = 0 gives a zero term") {
    const Tensor x = random_tensor({4, 3}, 1);
    CHECK(blob_interaction(x, random_tensor({4, 3}, 2), {0.0, 1.0, 0.0}) == Tensor({4, 3}));
  }
  SUBCASE("single particle reduces to c * g") {
    const Tensor x = random_tensor({1, 6}, 3);
    const Tensor g = random_tensor({1, 6}, 4);
    const Tensor t = blob_interaction(x, g, on);
    for (std::size_t q = 0; q < 6; ++q) CHECK(t[q] == 1.1 * g[q]);
  }
  SUBCASE("matches the double-loop reference for 2..8 particles") {
    for (std::size_t m = 2; m <= 8; ++m) {
      const Tensor x = random_tensor({m, 5}, 100 + m, 0.0, 1.0);
      const Tensor g = random_tensor({m, 5}, 200 + m);
      CHECK(max_abs_diff(blob_interaction(x, g, on), naive_blob(x, g, 1.1)) <= 1e-12);
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(blob_interaction(Tensor({3, 2}), Tensor({3, 3}), on), std::invalid_argument);
  }
  SUBCASE("permutation equivariance") {
    const Tensor x = random_tensor({6, 4}, 7, 0.0, 1.0);
    const Tensor g = random_tensor({6, 4}, 8);
    const std::vector<std::size_t> p = {3, 0, 5, 1, 4, 2};
    const Tensor a = permute_rows(blob_interaction(x, g, on), p);
    const Tensor b = blob_interaction(permute_rows(x, p), permute_rows(g, p), on);
    CHECK(max_abs_diff(a, b) <= 1e-12);
  }
  SUBCASE("repulsion part is translation invariant") {
    const Tensor x = random_tensor({5, 3}, 9, 0.0, 1.0);
    const Tensor zero_g({5, 3});
    Tensor shifted = x;
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t q = 0; q < 3; ++q) shifted.at(r, q) += 0.3 * static_cast<double>(q + 1);
    CHECK(max_abs_diff(blob_interaction(x, zero_g, on), blob_interaction(shifted, zero_g, on)) <= 1e-12);
  }
  SUBCASE("linear in c") {
    const Tensor x = random_tensor({5, 3}, 10, 0.0, 1.0);
    const Tensor g = random_tensor({5, 3}, 11);
    const Tensor a = blob_interaction(x, g, {0.5, 1.0, 0.0});
    const Tensor b = blob_interaction(x, g, {1.5, 1.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(3.0 * a[i]).epsilon(1e-13));
  }
}

TEST_CASE("dgf_interaction") {
  const InteractionConfig cfg{1.0, 0.8, 0.6};
  SUBCASE("single particle gives zero") { CHECK(dgf_interaction(random_tensor({1, 4}, 1), cfg) == Tensor({1, 4})); }
  SUBCASE("zero scale gives zero") {
    CHECK(dgf_interaction(random_tensor({3, 4}, 1), {1.0, 0.8, 0.0}) == Tensor({3, 4}));
  }
  SUBCASE("squared distance equal to lambda is a root of the weight") {
    const double lambda = 2.0;
    const Tensor x({2, 1}, {0.0, std::sqrt(lambda)});
    REQUIRE(pairwise_sq_distances(x)(0, 1) == doctest::Approx(lambda).epsilon(1e-15));
    const Tensor t = dgf_interaction(x, {1.0, lambda, 1.0});
    CHECK(std::abs(t[0]) <= 1e-15);
    CHECK(std::abs(t[1]) <= 1e-15);
  }
  SUBCASE("matches the double-loop reference for 2..8 particles") {
    for (std::size_t m = 2; m <= 8; ++m) {
      const Tensor x = random_tensor({m, 5}, 300 + m, 0.0, 1.0);
      CHECK(max_abs_diff(dgf_interaction(x, cfg), naive_dgf(x, 0.8, 0.6)) <= 1e-12);
    }
  }
  SUBCASE("permutation equivariance and translation invariance") {
    const Tensor x = random_tensor({6, 3}, 12, 0.0, 1.0);
    const std::vector<std::size_t> p = {5, 4, 3, 2, 1, 0};
    CHECK(max_abs_diff(permute_rows(dgf_interaction(x, cfg), p), dgf_interaction(permute_rows(x, p), cfg)) <= 1e-12);
    Tensor shifted = x;
    for (double& v : shifted.values()) v -= 0.25;
    CHECK(max_abs_diff(dgf_interaction(x, cfg), dgf_interaction(shifted, cfg)) <= 1e-12);
  }
  SUBCASE("invalid lambda") { CHECK_THROWS_AS(dgf_interaction(random_tensor({3, 2}, 1), {1.0, 0.0, 1.0}), std::invalid_argument); }
}
