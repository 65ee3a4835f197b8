#include "daa/data.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

namespace daa {

void Dataset::validate() const {
  if (images.rows() != labels.size()) {
    throw std::invalid_argument("dataset " + name + ": " + std::to_string(images.rows()) + " images but " +
                                std::to_string(labels.size()) + " labels");
  }
  for (double v : images.values()) {
    if (!(v >= lo && v <= hi)) throw std::invalid_argument("dataset " + name + ": pixel outside declared range");
  }
}

Dataset Dataset::slice(std::size_t offset, std::size_t count) const {
  const std::size_t begin = std::min(offset, size());
  const std::size_t end = std::min(size(), begin + count);
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  Dataset out;
  out.images = images.gather_rows(rows);
  out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    labels.begin() + static_cast<std::ptrdiff_t>(end));
  out.name = name;
  out.lo = lo;
  out.hi = hi;
  return out;
}

namespace {

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (static_cast<std::uint32_t>(b[at]) << 24) | (static_cast<std::uint32_t>(b[at + 1]) << 16) |
         (static_cast<std::uint32_t>(b[at + 2]) << 8) | static_cast<std::uint32_t>(b[at + 3]);
}

void require_bytes(std::span<const std::uint8_t> b, std::size_t n, const char* what) {
  if (b.size() < n) throw IdxError(IdxError::Kind::truncated, std::string("idx: truncated ") + what);
}

void check_magic(std::span<const std::uint8_t> b, std::uint32_t expected, const char* what) {
  require_bytes(b, 4, "magic");
  const std::uint32_t magic = be32(b, 0);
  if (magic != expected) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "idx: %s file has magic 0x%08x, expected 0x%08x", what, magic, expected);
    throw IdxError(IdxError::Kind::bad_magic, buf);
  }
}

}  // namespace

Tensor parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxImageMagic, "image");
  require_bytes(bytes, 16, "image header");
  const std::size_t n = be32(bytes, 4);
  const std::size_t rows = be32(bytes, 8);
  const std::size_t cols = be32(bytes, 12);
  if (n == 0) throw IdxError(IdxError::Kind::empty, "idx: image file holds no images");
  const std::size_t width = rows * cols;
  if (bytes.size() - 16 != n * width) {
    throw IdxError(IdxError::Kind::truncated, "idx: image payload is " + std::to_string(bytes.size() - 16) +
                                                  " bytes, header promises " + std::to_string(n * width));
  }
  Tensor t({n, width});
  for (std::size_t i = 0; i < n * width; ++i) t[i] = static_cast<double>(bytes[16 + i]) / 255.0;
  return t;
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxLabelMagic, "label");
  require_bytes(bytes, 8, "label header");
  const std::size_t n = be32(bytes, 4);
  if (n == 0) throw IdxError(IdxError::Kind::empty, "idx: label file holds no labels");
  if (bytes.size() - 8 != n) {
    throw IdxError(IdxError::Kind::truncated, "idx: label payload is " + std::to_string(bytes.size() - 8) +
                                                  " bytes, header promises " + std::to_string(n));
  }
  return {bytes.begin() + 8, bytes.end()};
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxError::Kind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Dataset load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels) {
  Dataset d;
  d.images = parse_idx_images(read_file_bytes(images));
  d.labels = parse_idx_labels(read_file_bytes(labels));
  if (d.images.rows() != d.labels.size()) {
    throw IdxError(IdxError::Kind::count_mismatch, "idx: " + std::to_string(d.images.rows()) + " images but " +
                                                       std::to_string(d.labels.size()) + " labels");
  }
  d.name = images.filename().string();
  return d;
}

Dataset synthetic_gaussians(std::size_t classes, std::size_t dim, std::size_t per_class, double separation,
                            RngSeed seed, double sigma) {
  if (classes < 2) throw std::invalid_argument("synthetic_gaussians: need at least 2 classes");
  if (per_class == 0 || dim == 0) throw std::invalid_argument("synthetic_gaussians: empty dataset");
  const double unit = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<double> means(classes * dim);
  CounterRng mean_rng(derive_seed(seed, 0), 0);
  for (double& m : means) m = 0.5 + 0.5 * separation * ((mean_rng.next_u64() >> 63) ? unit : -unit);

  const std::size_t n = classes * per_class;
  Dataset d;
  d.name = "synthetic_gaussians";
  d.images = Tensor({n, dim});
  d.labels.resize(n);
  const RngSeed sample_seed = derive_seed(seed, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    d.labels[i] = static_cast<int>(c);
    CounterRng rng(sample_seed, i);
    auto row = d.images.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      // Box-Muller; 1 - u keeps the log argument in (0, 1].
      const double u1 = 1.0 - rng.next_unit();
      const double u2 = rng.next_unit();
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      row[j] = std::clamp(means[c * dim + j] + sigma * z, 0.0, 1.0);
    }
  }
  return d;
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
  std::vector<std::uint8_t> b = {'D', 'A', 'A', 'T'};
  const auto put = [&b](std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(1, 4);
  put(t.rank(), 4);
  for (auto e : t.shape()) put(e, 8);
  for (double v : t.values()) put(std::bit_cast<std::uint64_t>(v), 8);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("tensor: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

Tensor load_tensor(const std::filesystem::path& path) {
  const auto b = read_file_bytes(path);
  std::size_t pos = 0;
  const auto get = [&](int width) {
    if (b.size() - pos < static_cast<std::size_t>(width)) throw std::runtime_error("tensor: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(b[pos++]) << (8 * i);
    return v;
  };
  if (b.size() < 4 || b[0] != 'D' || b[1] != 'A' || b[2] != 'A' || b[3] != 'T') {
    throw std::runtime_error("tensor: bad magic in " + path.string());
  }
  pos = 4;
  if (get(4) != 1) throw std::runtime_error("tensor: unsupported version");
  const auto rank = get(4);
  std::vector<std::size_t> shape(rank);
  for (auto& e : shape) e = get(8);
  Tensor t(shape);
  for (double& v : t.values()) v = std::bit_cast<double>(get(8));
  if (pos != b.size()) throw std::runtime_error("tensor: trailing bytes");
  return t;
}

}  // namespace daa
