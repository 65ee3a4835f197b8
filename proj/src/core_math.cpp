#include "daa/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "daa/simd.hpp"

namespace daa {

namespace {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

CounterRng::CounterRng(RngSeed seed, std::uint64_t stream) noexcept
    : key_(mix64(mix64(seed.value + kGolden) ^ (stream * 0xd1b54a32d192ed03ULL + 1))) {}

std::uint64_t CounterRng::next_u64() noexcept { return mix64(key_ + kGolden * ++counter_); }

double CounterRng::next_unit() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::next_below(std::uint64_t bound) noexcept {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return r % bound;
}

RngSeed derive_seed(RngSeed parent, std::uint64_t tag) noexcept {
  return {mix64(mix64(parent.value ^ 0x6a09e667f3bcc909ULL) + kGolden * (tag + 1))};
}

Tensor sign(const Tensor& t) {
  Tensor out(t.shape());
  simd::active().sign(out.data(), t.data(), t.size());
  return out;
}

Tensor clip_projection(const Tensor& candidate, const Tensor& original, double alpha, double lo,
                       double hi) {
  require_same_shape(candidate, original, "clip_projection");
  if (!(alpha >= 0.0)) throw std::invalid_argument("clip_projection: alpha must be >= 0");
  if (!(lo < hi)) throw std::invalid_argument("clip_projection: need lo < hi");
  Tensor out(candidate.shape());
  simd::active().clip_box(out.data(), candidate.data(), original.data(), alpha, lo, hi,
                          candidate.size());
  return out;
}

DistanceMatrix pairwise_sq_distances(const Tensor& batch) {
  const std::size_t m = batch.rows();
  if (m == 0) throw std::invalid_argument("pairwise_sq_distances: empty batch");
  const auto& k = simd::active();
  const std::size_t w = batch.row_size();
  DistanceMatrix d{m, std::vector<double>(m * m, 0.0)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = k.sq_distance(batch.row(i).data(), batch.row(j).data(), w);
      d.d2[i * m + j] = v;
      d.d2[j * m + i] = v;
    }
  }
  return d;
}

double median_pairwise_distance(const DistanceMatrix& d) {
  if (d.n < 2) throw std::invalid_argument("median_pairwise_distance: need at least 2 particles");
  std::vector<double> dist;
  dist.reserve(d.n * (d.n - 1) / 2);
  for (std::size_t i = 0; i < d.n; ++i) {
    for (std::size_t j = i + 1; j < d.n; ++j) dist.push_back(std::sqrt(d(i, j)));
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  const double upper = dist[mid];
  if (dist.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Tensor uniform_noise(const std::vector<std::size_t>& shape, double alpha, RngSeed seed,
                     std::span<const std::size_t> row_ids) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("uniform_noise: alpha must be >= 0");
  Tensor out(shape);
  const std::size_t rows = out.rows();
  if (!row_ids.empty() && row_ids.size() != rows) {
    throw std::invalid_argument("uniform_noise: one id per row required");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    CounterRng rng(seed, row_ids.empty() ? r : row_ids[r]);
    for (double& v : out.row(r)) v = alpha * (2.0 * rng.next_unit() - 1.0);
  }
  return out;
}

std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

Tensor finite_difference_gradient(const ScalarField& f, const Tensor& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: h must be > 0");
  Tensor probe = x;
  Tensor grad(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::domain_error("finite_difference_gradient: non-finite function value at coordinate " +
                              std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace daa
