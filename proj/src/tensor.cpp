#include "daa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace daa {

namespace {

std::size_t extent_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(extent_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (extent_product(shape_) != data_.size()) {
    throw std::invalid_argument("tensor: shape " + shape_string(shape_) + " does not hold " +
                                std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t width = rows.size() == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(rows.size() * width);
  for (const auto& r : rows) {
    if (r.size() != width) throw std::invalid_argument("tensor: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), width}, std::move(data));
}

std::size_t Tensor::row_size() const noexcept {
  if (shape_.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t i = 1; i < shape_.size(); ++i) n *= shape_[i];
  return n;
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
  auto shape = shape_;
  shape.front() = indices.size();
  Tensor out(std::move(shape));
  const std::size_t w = row_size();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows()) throw std::out_of_range("tensor: gather index out of range");
    std::copy_n(data_.data() + indices[i] * w, w, out.data_.data() + i * w);
  }
  return out;
}

void Tensor::scatter_rows(std::span<const std::size_t> indices, const Tensor& src) {
  const std::size_t w = row_size();
  if (src.rows() != indices.size() || src.row_size() != w) {
    throw std::invalid_argument("tensor: scatter source does not match index list");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows()) throw std::out_of_range("tensor: scatter index out of range");
    std::copy_n(src.data_.data() + i * w, w, data_.data() + indices[i] * w);
  }
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape_string(a.shape()) +
                                " vs " + shape_string(b.shape()));
  }
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace daa
