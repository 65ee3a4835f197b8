#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace daa {

/// Dense row-major tensor of doubles. Attack and training code treat every
/// tensor as a matrix of `rows()` samples, each `row_size()` values wide.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rank() const noexcept { return shape_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_.front(); }
  std::size_t row_size() const noexcept;

  std::span<double> row(std::size_t i) { return {data_.data() + i * row_size(), row_size()}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * row_size(), row_size()};
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * row_size() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * row_size() + c]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  /// Copies the listed rows, in order, into a new tensor.
  Tensor gather_rows(std::span<const std::size_t> indices) const;
  /// Writes row `i` of `src` into row `indices[i]` of this tensor.
  void scatter_rows(std::span<const std::size_t> indices, const Tensor& src);

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Throws std::invalid_argument with `what` when the shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace daa
