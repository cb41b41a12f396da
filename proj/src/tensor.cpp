#include "gradnet/tensor.hpp"

#include <cmath>
#include <limits>

#include "gradnet/errors.hpp"

namespace gradnet {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void check_positive_dims(const std::vector<std::size_t>& shape) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor shape has a zero dimension");
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  check_positive_dims(shape_);
  data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  check_positive_dims(shape_);
  if (shape_product(shape_) != data_.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
  }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  for (auto& v : t.data_) v = value;
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(shape_.size()));
  }
  return shape_[axis];
}

double& Tensor::at(std::size_t i) {
  if (rank() != 1) throw DimensionError("1-index access on rank-" + std::to_string(rank()));
  return data_[i];
}
double Tensor::at(std::size_t i) const { return const_cast<Tensor*>(this)->at(i); }

double& Tensor::at(std::size_t i, std::size_t j) {
  if (rank() != 2) throw DimensionError("2-index access on rank-" + std::to_string(rank()));
  return data_[i * shape_[1] + j];
}
double Tensor::at(std::size_t i, std::size_t j) const {
  return const_cast<Tensor*>(this)->at(i, j);
}

double& Tensor::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
  if (rank() != 4) throw DimensionError("4-index access on rank-" + std::to_string(rank()));
  return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
}
double Tensor::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
  return const_cast<Tensor*>(this)->at(n, c, y, x);
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
  if (shape_product(new_shape) != data_.size()) {
    throw DimensionError("reshape to incompatible size");
  }
  return Tensor(std::move(new_shape), data_);
}

std::string Tensor::shape_str() const {
  std::string s;
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape_[i]);
  }
  return s.empty() ? "scalar" : s;
}

Unary unary_from_string(const std::string& name) {
  if (name == "exp") return Unary::exp;
  if (name == "cube") return Unary::cube;
  if (name == "identity") return Unary::identity;
  if (name == "relu") return Unary::relu;
  if (name == "sigmoid") return Unary::sigmoid;
  if (name == "tanh") return Unary::tanh;
  if (name == "sign") return Unary::sign;
  if (name == "abs") return Unary::abs;
  throw ConfigError("unknown unary function tag: " + name);
}

const char* unary_name(Unary f) {
  switch (f) {
    case Unary::exp: return "exp";
    case Unary::cube: return "cube";
    case Unary::identity: return "identity";
    case Unary::relu: return "relu";
    case Unary::sigmoid: return "sigmoid";
    case Unary::tanh: return "tanh";
    case Unary::sign: return "sign";
    case Unary::abs: return "abs";
  }
  return "?";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw DimensionError("matmul needs rank-2 operands, got " + a.shape_str() + " and " +
                         b.shape_str());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) {
    throw DimensionError("matmul inner dimensions disagree: " + a.shape_str() + " vs " +
                         b.shape_str());
  }
  Tensor out({m, n});
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = out.data();
  // (i, k, j) loop order: each c[i][j] accumulates over k ascending, and the
  // inner loop is contiguous in both b and c.
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * k;
    double* crow = pc + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = pb + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor map_unary(const Tensor& x, Unary f) {
  Tensor out(x.shape());
  const double* in = x.data();
  double* o = out.data();
  const std::size_t n = x.size();
  switch (f) {
    case Unary::exp:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::exp(in[i]);
      break;
    case Unary::cube:
      for (std::size_t i = 0; i < n; ++i) o[i] = in[i] * in[i] * in[i];
      break;
    case Unary::identity:
      for (std::size_t i = 0; i < n; ++i) o[i] = in[i];
      break;
    case Unary::relu:
      for (std::size_t i = 0; i < n; ++i) o[i] = in[i] > 0.0 ? in[i] : 0.0;
      break;
    case Unary::sigmoid:
      for (std::size_t i = 0; i < n; ++i) o[i] = 1.0 / (1.0 + std::exp(-in[i]));
      break;
    case Unary::tanh:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::tanh(in[i]);
      break;
    case Unary::sign:
      for (std::size_t i = 0; i < n; ++i) o[i] = in[i] > 0.0 ? 1.0 : (in[i] < 0.0 ? -1.0 : 0.0);
      break;
    case Unary::abs:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::fabs(in[i]);
      break;
  }
  return out;
}

double rms(const Tensor& x) {
  if (x.size() == 0) throw DomainError("rms of an empty tensor");
  double acc = 0.0;
  const double* p = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) acc += p[i] * p[i];
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double sum(const Tensor& x) {
  double acc = 0.0;
  const double* p = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) acc += p[i];
  return acc;
}

double mean(const Tensor& x) {
  if (x.size() == 0) throw DomainError("mean of an empty tensor");
  return sum(x) / static_cast<double>(x.size());
}

double max_value(const Tensor& x) {
  if (x.size() == 0) throw DomainError("max of an empty tensor");
  const double* p = x.data();
  double best = p[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (p[i] > best) best = p[i];
  }
  return best;
}

std::size_t argmax(const Tensor& x) {
  if (x.size() == 0) throw DomainError("argmax of an empty tensor");
  const double* p = x.data();
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (p[i] > p[best]) best = i;  // strict: ties keep the lowest index
  }
  return best;
}

namespace {

// Decomposes shape around `axis` into [outer, n, inner] strides.
struct AxisSplit {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_axis(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw DimensionError("reduce axis " + std::to_string(axis) + " out of range for shape " +
                         x.shape_str());
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= x.dim(i);
  s.n = x.dim(axis);
  for (std::size_t i = axis + 1; i < x.rank(); ++i) s.inner *= x.dim(i);
  return s;
}

std::vector<std::size_t> drop_axis(const std::vector<std::size_t>& shape, std::size_t axis) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != axis) out.push_back(shape[i]);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

}  // namespace

Tensor reduce(const Tensor& x, Reduce op, std::size_t axis) {
  const AxisSplit s = split_axis(x, axis);
  Tensor out(drop_axis(x.shape(), axis));
  const double* in = x.data();
  double* o = out.data();
  for (std::size_t a = 0; a < s.outer; ++a) {
    for (std::size_t b = 0; b < s.inner; ++b) {
      double acc;
      if (op == Reduce::max) {
        acc = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < s.n; ++k) {
          const double v = in[(a * s.n + k) * s.inner + b];
          if (v > acc) acc = v;
        }
      } else {
        acc = 0.0;
        for (std::size_t k = 0; k < s.n; ++k) acc += in[(a * s.n + k) * s.inner + b];
        if (op == Reduce::mean) acc /= static_cast<double>(s.n);
      }
      o[a * s.inner + b] = acc;
    }
  }
  return out;
}

std::vector<std::size_t> argmax(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x, axis);
  std::vector<std::size_t> out(s.outer * s.inner, 0);
  const double* in = x.data();
  for (std::size_t a = 0; a < s.outer; ++a) {
    for (std::size_t b = 0; b < s.inner; ++b) {
      std::size_t best = 0;
      double best_v = in[(a * s.n + 0) * s.inner + b];
      for (std::size_t k = 1; k < s.n; ++k) {
        const double v = in[(a * s.n + k) * s.inner + b];
        if (v > best_v) {
          best_v = v;
          best = k;
        }
      }
      out[a * s.inner + b] = best;
    }
  }
  return out;
}

}  // namespace gradnet
