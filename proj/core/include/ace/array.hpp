#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ace/errors.hpp"

namespace ace {

// Dense row-major array of 64-bit reals. Rank 0 (scalar), 1 (vector) and
// 2 (matrix) are the only shapes the engine needs.
class Array {
public:
  Array() = default;

  explicit Array(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

  Array(std::vector<std::size_t> shape, std::vector<double> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    if (count(shape_) != data_.size()) {
      throw DimensionError("Array: " + std::to_string(data_.size()) +
                           " values do not fill shape " + shape_string());
    }
  }

  static Array zeros(std::vector<std::size_t> shape) { return Array(std::move(shape)); }

  static Array full(std::vector<std::size_t> shape, double v) {
    Array a(std::move(shape));
    for (auto& x : a.data_) x = v;
    return a;
  }

  static Array scalar(double v) { return Array({}, {v}); }

  static Array vector(std::vector<double> values) {
    std::size_t n = values.size();
    return Array({n}, std::move(values));
  }

  static Array matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Array({rows, cols}, std::move(values));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  // Row/column view: rank 2 as-is, rank 1 as a single row, rank 0 as 1x1.
  std::size_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  std::size_t cols() const {
    if (rank() == 2) return shape_[1];
    if (rank() == 1) return shape_[0];
    return 1;
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Array& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(double v) {
    for (auto& x : data_) x = v;
  }

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }

private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace ace
