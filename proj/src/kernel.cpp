#include "daa/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "daa/simd.hpp"

namespace daa {

void InteractionConfig::validate() const {
  if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("interaction: c must be finite and >= 0");
  if (!std::isfinite(lambda) || lambda <= 0.0) throw std::invalid_argument("interaction: lambda must be > 0");
  if (!std::isfinite(dgf_scale) || dgf_scale < 0.0) {
    throw std::invalid_argument("interaction: dgf_scale must be finite and >= 0");
  }
}

double median_bandwidth(const DistanceMatrix& d, std::size_t m) {
  if (m < 2) throw std::invalid_argument("median_bandwidth: need m >= 2");
  const double med = median_pairwise_distance(d);
  if (med == 0.0) return kBandwidthFloor;
  return med * med / std::log(static_cast<double>(m));
}

double particle_bandwidth(const DistanceMatrix& d) { return d.n < 2 ? 1.0 : median_bandwidth(d, d.n); }

KernelMatrix rbf_kernel(const DistanceMatrix& d, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rbf_kernel: bandwidth must be > 0");
  KernelMatrix km{d.n, std::vector<double>(d.n * d.n), h};
  for (std::size_t i = 0; i < d.n * d.n; ++i) km.k[i] = std::exp(-d.d2[i] / h);
  return km;
}

KernelMatrix rbf_kernel(const Tensor& batch, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rbf_kernel: bandwidth must be > 0");
  return rbf_kernel(pairwise_sq_distances(batch), h);
}

Tensor blob_interaction(const Tensor& batch, const Tensor& loss_grads, const InteractionConfig& cfg) {
  require_same_shape(batch, loss_grads, "blob_interaction");
  cfg.validate();
  const std::size_t m = batch.rows();
  if (m == 0) throw std::invalid_argument("blob_interaction: empty batch");
  Tensor out(batch.shape());
  if (cfg.c == 0.0) return out;

  const auto d = pairwise_sq_distances(batch);
  const auto km = rbf_kernel(d, particle_bandwidth(d));
  const double repulsion = 2.0 / km.bandwidth;
  const double scale = cfg.c / static_cast<double>(m);
  const std::size_t w = batch.row_size();
  const auto& k = simd::active();
  for (std::size_t i = 0; i < m; ++i) {
    double* acc = out.row(i).data();
    const double* xi = batch.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      const double kij = km(i, j);
      k.axpy(acc, kij, loss_grads.row(j).data(), w);
      if (j != i) k.axpy_diff(acc, repulsion * kij, xi, batch.row(j).data(), w);
    }
    for (std::size_t q = 0; q < w; ++q) acc[q] *= scale;
  }
  return out;
}

Tensor dgf_interaction(const Tensor& batch, const InteractionConfig& cfg) {
  cfg.validate();
  const std::size_t m = batch.rows();
  if (m == 0) throw std::invalid_argument("dgf_interaction: empty batch");
  Tensor out(batch.shape());
  if (cfg.dgf_scale == 0.0 || m == 1) return out;

  const auto d = pairwise_sq_distances(batch);
  const std::size_t w = batch.row_size();
  const auto& k = simd::active();
  for (std::size_t i = 0; i < m; ++i) {
    double* acc = out.row(i).data();
    const double* xi = batch.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double r = d(i, j) / cfg.lambda;
      k.axpy_diff(acc, (r - 1.0) * std::exp(-r), xi, batch.row(j).data(), w);
    }
    for (std::size_t q = 0; q < w; ++q) acc[q] *= cfg.dgf_scale;
  }
  return out;
}

}  // namespace daa
