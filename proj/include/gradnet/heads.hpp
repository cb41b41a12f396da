#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gradnet/tensor.hpp"

namespace gradnet {

// Output-head strategies. A head maps logits to outputs, class labels to
// encoded target vectors, and (logits, targets) to the error delta that is
// handed to backpropagation.
//
//   softmax_ce   softmax outputs, cross-entropy;  delta = softmax(x) - t01
//   linear_mse   identity outputs, squared error; delta = x - t
//   sigmoid_mse  logistic outputs, squared error; delta = (f(x) - t) f'(x)
//   tanh_mse     tanh outputs, squared error;     delta = (f(x) - t) f'(x)
//   exp_gb       y = alpha*e^x;                   delta = alpha*e^x - t
//   pow3_gb      y = alpha*x^3 + beta;            delta = alpha*x^3 + beta - t
//
// For the two boosted heads the delta is imposed: it is NOT the gradient of
// the monitored squared-error loss. It is the exact derivative of the
// per-component potential
//   exp_gb:  P(x) = alpha*e^x - t*x
//   pow3_gb: P(x) = alpha*x^4/4 + (beta - t)*x
enum class HeadKind { softmax_ce, linear_mse, sigmoid_mse, tanh_mse, exp_gb, pow3_gb };

HeadKind head_kind_from_string(const std::string& name);
const char* head_kind_name(HeadKind kind);

struct HeadSpec {
  HeadKind kind = HeadKind::softmax_ce;
  double alpha = 1.0;       // gain (exp_gb, pow3_gb)
  double beta = 0.0;        // offset (pow3_gb only)
  double target_pos = 1.0;  // encoded value at the true class
  double target_neg = 0.0;  // encoded value everywhere else

  // Spec with the usual defaults for the kind: exp_gb alpha 0.1, targets
  // {0,16}; pow3_gb alpha 0.001, beta 0.4, targets {0,10}; others {0,1}.
  static HeadSpec of(HeadKind kind);

  // Checks alpha > 0 and target_pos > target_neg; raises ConfigError.
  void validate() const;
};

// One-hot target with custom magnitudes: values[class_index] == target_pos,
// every other entry == target_neg.
struct TargetVector {
  Tensor values;  // rank-1, length num_classes
  std::size_t class_index = 0;
};

// Logits above this are clamped before exponentiation in the exp_gb head;
// each clamped component bumps the caller's counter when one is supplied.
inline constexpr double kExpClampLimit = 30.0;

TargetVector encode_targets(std::size_t class_index, std::size_t num_classes,
                            const HeadSpec& spec);

// Batch of encoded targets, one row per label.
Tensor encode_target_batch(std::span<const std::size_t> labels, std::size_t num_classes,
                           const HeadSpec& spec);

// Row-stable softmax of a [batch, n] tensor (row max subtracted before
// exponentiation). Rows sum to 1, entries lie in [0, 1].
Tensor softmax(const Tensor& logits);

// Head activation applied to logits (same shape out).
Tensor head_outputs(const Tensor& logits, const HeadSpec& spec,
                    std::size_t* clamp_count = nullptr);

// Error delta backpropagated into the network, per kind as listed above.
// softmax_ce always uses {0,1} one-hot targets built from the labels, no
// matter which magnitudes the spec carries.
Tensor head_delta(const Tensor& logits, std::span<const std::size_t> labels,
                  const HeadSpec& spec, std::size_t* clamp_count = nullptr);
// Single-example form.
Tensor head_delta(const Tensor& logits, const TargetVector& target, const HeadSpec& spec,
                  std::size_t* clamp_count = nullptr);

// Monitoring loss: mean per-example cross-entropy for softmax_ce, mean
// per-example (1/2)*sum((y - t)^2) for everything else. For the boosted
// heads this value is reported only; head_delta deliberately does not
// differentiate it. softmax_ce with non-{0,1} magnitudes raises ConfigError.
double loss_value(const Tensor& logits, std::span<const std::size_t> labels,
                  const HeadSpec& spec);
double loss_value(const Tensor& logits, const TargetVector& target, const HeadSpec& spec);

// Softmax normalization term of one logit row. log_s is computed with
// log-sum-exp and is always finite; s saturates to +inf with the flag set
// when it exceeds the representable range.
struct NormTerm {
  double s = 0.0;
  double log_s = 0.0;
  bool saturated = false;
};
NormTerm normalization_term(std::span<const double> logits_row);

// Predicted class per row: argmax of the logits (ties -> lowest index).
// Identical to the argmax of head_outputs for every kind, since all head
// activations are strictly increasing per component and softmax is
// order-preserving within a row.
std::vector<std::size_t> predict(const Tensor& logits);

}  // namespace gradnet
