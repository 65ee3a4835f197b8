#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "daa/core_math.hpp"
#include "daa/tensor.hpp"

namespace daa {

struct Dataset {
  Tensor images;  // N x D
  std::vector<int> labels;
  std::string name;
  double lo = 0.0;
  double hi = 1.0;

  std::size_t size() const noexcept { return labels.size(); }
  /// Throws std::invalid_argument if a pixel leaves [lo, hi] or counts disagree.
  void validate() const;
  /// Rows [offset, offset + count), clamped to the dataset size.
  Dataset slice(std::size_t offset, std::size_t count) const;
};

class IdxError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, truncated, count_mismatch, empty };
  IdxError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Big-endian IDX unsigned-byte images (N x rows x cols), scaled by 1/255.
Tensor parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);

Dataset load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels);

/// k Gaussian blobs in [0,1]^dim. Class c has mean 0.5 + (separation/2) s_c,
/// s_c a seeded random direction with entries +-1/sqrt(dim), and isotropic
/// standard deviation `sigma`; samples are clipped into [0,1]. Rows are
/// interleaved by class: sample i has label i % k.
Dataset synthetic_gaussians(std::size_t classes, std::size_t dim, std::size_t per_class, double separation,
                            RngSeed seed, double sigma = 0.1);

// Tensor file: "DAAT", u32 version (1), u32 rank, u64 extents, then
// little-endian doubles. Used for adversarial outputs.
void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace daa
