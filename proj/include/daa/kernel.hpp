#pragma once

#include <vector>

#include "daa/core_math.hpp"
#include "daa/tensor.hpp"

namespace daa {

/// Bandwidth used when every particle coincides (zero median distance).
inline constexpr double kBandwidthFloor = 1e-12;

struct KernelMatrix {
  std::size_t n = 0;
  std::vector<double> k;  // n*n, row-major
  double bandwidth = 1.0;

  double operator()(std::size_t i, std::size_t j) const { return k[i * n + j]; }
};

/// Interaction weights for the two particle updates.
struct InteractionConfig {
  double c = 0.0;          // blob weight
  double lambda = 1.0;     // dgf distance scale, > 0
  double dgf_scale = 0.0;  // composite 2*gamma*c / (1 + c)

  void validate() const;
};

/// med^2 / ln(m), med = median pairwise distance; kBandwidthFloor if med == 0.
double median_bandwidth(const DistanceMatrix& d, std::size_t m);

/// k_ij = exp(-||x_i - x_j||^2 / h).
KernelMatrix rbf_kernel(const Tensor& batch, double h);
KernelMatrix rbf_kernel(const DistanceMatrix& d, double h);

/// Bandwidth for the current particles. A single particle has no pairwise
/// distance; it gets h = 1, which only ever meets a zero self-distance.
double particle_bandwidth(const DistanceMatrix& d);

/// (c/M) * sum_j [k_ij g_j + (2/h) k_ij (x_i - x_j)] per particle, with the
/// median-heuristic bandwidth of `batch`.
Tensor blob_interaction(const Tensor& batch, const Tensor& loss_grads, const InteractionConfig& cfg);

/// dgf_scale * sum_j (d_ij/lambda - 1) exp(-d_ij/lambda) (x_i - x_j) per
/// particle, d_ij the squared distance.
Tensor dgf_interaction(const Tensor& batch, const InteractionConfig& cfg);

}  // namespace daa
