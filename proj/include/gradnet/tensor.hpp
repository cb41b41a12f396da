#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gradnet {

// Dense n-dimensional array of doubles, row-major. The last index varies
// fastest; batched data is batch-first ([N, features] or [N, C, H, W]).
// All operations on tensors are deterministic: fixed summation order
// (ascending index), no internal parallelism.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);

  // Takes ownership of `values`; product(shape) must equal values.size().
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor full(std::vector<std::size_t> shape, double value);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  // Rank-checked element access for ranks 1, 2 and 4.
  double& at(std::size_t i);
  double at(std::size_t i) const;
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;
  double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x);
  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const;

  // Same data, new shape; sizes must agree.
  Tensor reshaped(std::vector<std::size_t> new_shape) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  // "2x3" style, for error messages.
  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Elementwise function tags for map_unary.
enum class Unary { exp, cube, identity, relu, sigmoid, tanh, sign, abs };

// Parses a tag name; unknown names raise ConfigError.
Unary unary_from_string(const std::string& name);
const char* unary_name(Unary f);

// Matrix product of rank-2 tensors. For every output element the sum over
// the inner dimension runs in ascending index order, so results are
// bit-reproducible.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise application of `f`, shape preserved.
Tensor map_unary(const Tensor& x, Unary f);

// sqrt(mean of squared entries). Empty input raises DomainError.
double rms(const Tensor& x);

// Full reductions.
double sum(const Tensor& x);
double mean(const Tensor& x);
double max_value(const Tensor& x);
// Flat index of the maximum; ties break to the lowest index.
std::size_t argmax(const Tensor& x);

// Reduction along one axis; the axis disappears from the output shape.
enum class Reduce { sum, mean, max };
Tensor reduce(const Tensor& x, Reduce op, std::size_t axis);
// Per-slice argmax along `axis` (lowest index wins ties).
std::vector<std::size_t> argmax(const Tensor& x, std::size_t axis);

}  // namespace gradnet
