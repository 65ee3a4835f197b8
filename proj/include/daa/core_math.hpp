#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "daa/tensor.hpp"

namespace daa {

/// Symmetric matrix of squared Euclidean distances between the rows of a batch.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> d2;  // n*n, row-major

  double operator()(std::size_t i, std::size_t j) const { return d2[i * n + j]; }
};

/// Master seed for all randomness in the toolkit.
struct RngSeed {
  std::uint64_t value = 0;
};

/// Counter-based generator. Output k of stream s under seed x is a pure
/// function of (x, s, k), so a sample keyed by its dataset index draws the
/// same noise no matter where it sits in a batch.
class CounterRng {
 public:
  CounterRng(RngSeed seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double next_unit() noexcept;
  /// Uniform integer on [0, bound), bound > 0, without modulo bias.
  std::uint64_t next_below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Derives an independent child seed, e.g. one per restart or epoch.
RngSeed derive_seed(RngSeed parent, std::uint64_t tag) noexcept;

Tensor sign(const Tensor& t);

/// clip_[lo,hi](clip_[original-alpha, original+alpha](candidate)), elementwise.
Tensor clip_projection(const Tensor& candidate, const Tensor& original, double alpha, double lo,
                       double hi);

DistanceMatrix pairwise_sq_distances(const Tensor& batch);

/// Median of the non-squared distances over pairs i < j.
double median_pairwise_distance(const DistanceMatrix& d);

/// I.i.d. uniform entries on [-alpha, alpha]. Row r uses stream `row_ids[r]`
/// when ids are supplied, else stream r.
Tensor uniform_noise(const std::vector<std::size_t>& shape, double alpha, RngSeed seed,
                     std::span<const std::size_t> row_ids = {});

/// Random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng);

using ScalarField = std::function<double(const Tensor&)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
/// Test oracle for the analytic gradients.
Tensor finite_difference_gradient(const ScalarField& f, const Tensor& x, double h);

}  // namespace daa
