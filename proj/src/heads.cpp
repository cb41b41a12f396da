#include "gradnet/heads.hpp"

#include <cmath>
#include <limits>

#include "gradnet/errors.hpp"

namespace gradnet {

HeadKind head_kind_from_string(const std::string& name) {
  if (name == "softmax_ce") return HeadKind::softmax_ce;
  if (name == "linear_mse") return HeadKind::linear_mse;
  if (name == "sigmoid_mse") return HeadKind::sigmoid_mse;
  if (name == "tanh_mse") return HeadKind::tanh_mse;
  if (name == "exp_gb") return HeadKind::exp_gb;
  if (name == "pow3_gb") return HeadKind::pow3_gb;
  throw ConfigError("unknown head kind: " + name);
}

const char* head_kind_name(HeadKind kind) {
  switch (kind) {
    case HeadKind::softmax_ce: return "softmax_ce";
    case HeadKind::linear_mse: return "linear_mse";
    case HeadKind::sigmoid_mse: return "sigmoid_mse";
    case HeadKind::tanh_mse: return "tanh_mse";
    case HeadKind::exp_gb: return "exp_gb";
    case HeadKind::pow3_gb: return "pow3_gb";
  }
  return "?";
}

HeadSpec HeadSpec::of(HeadKind kind) {
  HeadSpec s;
  s.kind = kind;
  switch (kind) {
    case HeadKind::exp_gb:
      s.alpha = 0.1;
      s.target_pos = 16.0;
      s.target_neg = 0.0;
      break;
    case HeadKind::pow3_gb:
      s.alpha = 0.001;
      s.beta = 0.4;
      s.target_pos = 10.0;
      s.target_neg = 0.0;
      break;
    default:
      s.alpha = 1.0;
      s.target_pos = 1.0;
      s.target_neg = 0.0;
      break;
  }
  return s;
}

void HeadSpec::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("head alpha must be positive");
  if (!(target_pos > target_neg)) {
    throw ConfigError("head target_pos must exceed target_neg");
  }
}

TargetVector encode_targets(std::size_t class_index, std::size_t num_classes,
                            const HeadSpec& spec) {
  if (class_index >= num_classes) {
    throw DomainError("class index " + std::to_string(class_index) + " out of range for " +
                      std::to_string(num_classes) + " classes");
  }
  TargetVector t;
  t.class_index = class_index;
  t.values = Tensor::full({num_classes}, spec.target_neg);
  t.values[class_index] = spec.target_pos;
  return t;
}

Tensor encode_target_batch(std::span<const std::size_t> labels, std::size_t num_classes,
                           const HeadSpec& spec) {
  Tensor t = Tensor::full({labels.size(), num_classes}, spec.target_neg);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw DomainError("label " + std::to_string(labels[i]) + " out of range");
    }
    t[i * num_classes + labels[i]] = spec.target_pos;
  }
  return t;
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2) {
    throw DimensionError("softmax expects a [batch, classes] tensor, got " + logits.shape_str());
  }
  const std::size_t rows = logits.dim(0), n = logits.dim(1);
  Tensor out(logits.shape());
  const double* in = logits.data();
  double* o = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * n;
    double* y = o + r * n;
    double mx = x[0];
    for (std::size_t j = 1; j < n; ++j) {
      if (x[j] > mx) mx = x[j];
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      denom += y[j];
    }
    for (std::size_t j = 0; j < n; ++j) y[j] /= denom;
  }
  return out;
}

namespace {

double clamped_exp(double x, std::size_t* clamp_count) {
  if (x > kExpClampLimit) {
    if (clamp_count) ++*clamp_count;
    x = kExpClampLimit;
  }
  return std::exp(x);
}

Tensor as_batch(const Tensor& t) {
  if (t.rank() == 1) return t.reshaped({1, t.dim(0)});
  if (t.rank() == 2) return t;
  throw DimensionError("head expects rank-1 or rank-2 logits, got " + t.shape_str());
}

}  // namespace

Tensor head_outputs(const Tensor& logits, const HeadSpec& spec, std::size_t* clamp_count) {
  Tensor out(logits.shape());
  const double* x = logits.data();
  double* y = out.data();
  const std::size_t n = logits.size();
  switch (spec.kind) {
    case HeadKind::softmax_ce:
      return softmax(as_batch(logits)).reshaped(logits.shape());
    case HeadKind::linear_mse:
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i];
      break;
    case HeadKind::sigmoid_mse:
      for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
      break;
    case HeadKind::tanh_mse:
      for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
      break;
    case HeadKind::exp_gb:
      for (std::size_t i = 0; i < n; ++i) y[i] = spec.alpha * clamped_exp(x[i], clamp_count);
      break;
    case HeadKind::pow3_gb:
      for (std::size_t i = 0; i < n; ++i) y[i] = spec.alpha * x[i] * x[i] * x[i] + spec.beta;
      break;
  }
  return out;
}

Tensor head_delta(const Tensor& logits, std::span<const std::size_t> labels,
                  const HeadSpec& spec, std::size_t* clamp_count) {
  const Tensor x2 = as_batch(logits);
  const std::size_t rows = x2.dim(0), n = x2.dim(1);
  if (labels.size() != rows) {
    throw DimensionError("label count " + std::to_string(labels.size()) +
                         " does not match batch size " + std::to_string(rows));
  }

  Tensor delta(x2.shape());
  const double* x = x2.data();
  double* d = delta.data();

  if (spec.kind == HeadKind::softmax_ce) {
    // Cross-entropy gradient wrt logits: softmax(x) minus a {0,1} one-hot,
    // whatever magnitudes the spec carries.
    Tensor p = softmax(x2);
    const double* pp = p.data();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        d[r * n + j] = pp[r * n + j] - (j == labels[r] ? 1.0 : 0.0);
      }
    }
    return delta.reshaped(logits.shape());
  }

  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] >= n) throw DomainError("label " + std::to_string(labels[r]) + " out of range");
    for (std::size_t j = 0; j < n; ++j) {
      const double xi = x[r * n + j];
      const double t = (j == labels[r]) ? spec.target_pos : spec.target_neg;
      double v = 0.0;
      switch (spec.kind) {
        case HeadKind::linear_mse:
          v = xi - t;
          break;
        case HeadKind::sigmoid_mse: {
          const double f = 1.0 / (1.0 + std::exp(-xi));
          v = (f - t) * f * (1.0 - f);
          break;
        }
        case HeadKind::tanh_mse: {
          const double f = std::tanh(xi);
          v = (f - t) * (1.0 - f * f);
          break;
        }
        case HeadKind::exp_gb:
          v = spec.alpha * clamped_exp(xi, clamp_count) - t;
          break;
        case HeadKind::pow3_gb:
          v = spec.alpha * xi * xi * xi + spec.beta - t;
          break;
        case HeadKind::softmax_ce:
          break;  // handled above
      }
      d[r * n + j] = v;
    }
  }
  return delta.reshaped(logits.shape());
}

Tensor head_delta(const Tensor& logits, const TargetVector& target, const HeadSpec& spec,
                  std::size_t* clamp_count) {
  const Tensor x2 = as_batch(logits);
  if (x2.dim(0) != 1 || x2.dim(1) != target.values.size()) {
    throw DimensionError("target length " + std::to_string(target.values.size()) +
                         " does not match logits " + logits.shape_str());
  }
  const std::size_t label = target.class_index;
  return head_delta(logits, std::span<const std::size_t>(&label, 1), spec, clamp_count);
}

double loss_value(const Tensor& logits, std::span<const std::size_t> labels,
                  const HeadSpec& spec) {
  const Tensor x2 = as_batch(logits);
  const std::size_t rows = x2.dim(0), n = x2.dim(1);
  if (labels.size() != rows) {
    throw DimensionError("label count does not match batch size");
  }

  if (spec.kind == HeadKind::softmax_ce) {
    if (spec.target_pos != 1.0 || spec.target_neg != 0.0) {
      throw ConfigError("softmax_ce requires {0,1} targets; got {" +
                        std::to_string(spec.target_neg) + "," + std::to_string(spec.target_pos) +
                        "}");
    }
    // Mean cross-entropy via log-sum-exp.
    const double* x = x2.data();
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = x + r * n;
      double mx = row[0];
      for (std::size_t j = 1; j < n; ++j) {
        if (row[j] > mx) mx = row[j];
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) denom += std::exp(row[j] - mx);
      total += std::log(denom) + mx - row[labels[r]];
    }
    return total / static_cast<double>(rows);
  }

  const Tensor y = head_outputs(x2, spec);
  const double* py = y.data();
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] >= n) throw DomainError("label " + std::to_string(labels[r]) + " out of range");
    for (std::size_t j = 0; j < n; ++j) {
      const double t = (j == labels[r]) ? spec.target_pos : spec.target_neg;
      const double e = py[r * n + j] - t;
      total += 0.5 * e * e;
    }
  }
  return total / static_cast<double>(rows);
}

double loss_value(const Tensor& logits, const TargetVector& target, const HeadSpec& spec) {
  const std::size_t label = target.class_index;
  return loss_value(logits, std::span<const std::size_t>(&label, 1), spec);
}

NormTerm normalization_term(std::span<const double> logits_row) {
  if (logits_row.empty()) throw DomainError("normalization term of an empty row");
  double mx = logits_row[0];
  for (double v : logits_row) {
    if (v > mx) mx = v;
  }
  double acc = 0.0;
  for (double v : logits_row) acc += std::exp(v - mx);
  NormTerm out;
  out.log_s = mx + std::log(acc);
  out.s = std::exp(out.log_s);
  out.saturated = std::isinf(out.s);
  return out;
}

std::vector<std::size_t> predict(const Tensor& logits) {
  const Tensor x2 = as_batch(logits);
  return argmax(x2, 1);
}

}  // namespace gradnet
