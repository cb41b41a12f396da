#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gradnet/rng.hpp"
#include "gradnet/tensor.hpp"

namespace gradnet {

enum class Mode { train, eval };

// ----------------------------------------------------------------------
// Pure layer math. Each forward has an exact hand-derived backward; every
// backward is checked against central finite differences in the tests.
// ----------------------------------------------------------------------

// y = x.w + b per row. x: [batch, in], w: [in, out], b: [out].
Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b);

struct DenseBackward {
  Tensor dx, dw, db;  // db sums delta over the batch axis
};
DenseBackward dense_backward(const Tensor& x, const Tensor& w, const Tensor& delta);

// 2-D cross-correlation (no kernel flip) with explicit zero padding,
// computed through an im2col expansion. x: [N, C, H, W], kernels:
// [OC, C, KH, KW], bias: [OC]. Column ordering of the expansion: row index
// is ((n*OH + oy)*OW + ox), column index is ((c*KH + ky)*KW + kx).
struct Conv2dCache {
  Tensor cols;                        // [N*OH*OW, C*KH*KW]
  std::vector<std::size_t> in_shape;  // N,C,H,W
  std::size_t out_h = 0, out_w = 0;
  std::size_t stride = 1, padding = 0;
};
Tensor conv2d_forward(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride, std::size_t padding, Conv2dCache* cache = nullptr);

struct Conv2dBackward {
  Tensor dx, dkernels, dbias;
};
Conv2dBackward conv2d_backward(const Conv2dCache& cache, const Tensor& kernels,
                               const Tensor& delta);

// Batch normalization. Rank-2 input standardizes per feature column;
// rank-4 input standardizes per channel over (N, H, W). Train mode uses
// batch statistics (biased variance) and updates the running stats with an
// exponential moving average; eval mode uses the running stats. Train mode
// needs batch size >= 2 (DomainError otherwise).
struct RunningStats {
  Tensor mean;
  Tensor var;
};
struct BatchNormCache {
  Tensor x_centered;  // x - mean, shaped like x
  Tensor x_hat;
  Tensor inv_std;     // per feature
  std::vector<std::size_t> in_shape;
};
Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& shift, Mode mode,
                         RunningStats& running, double momentum, double eps,
                         BatchNormCache* cache = nullptr);

struct BatchNormBackward {
  Tensor dx, dgamma, dshift;
};
BatchNormBackward batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma,
                                     const Tensor& delta);

// ----------------------------------------------------------------------
// Layers and the network container.
// ----------------------------------------------------------------------

struct InitScheme {
  enum class Kind { he, xavier, uniform };
  Kind kind = Kind::he;
  double lo = 0.0, hi = 0.0;  // uniform bounds

  static InitScheme he() { return {Kind::he, 0.0, 0.0}; }
  static InitScheme xavier() { return {Kind::xavier, 0.0, 0.0}; }
  static InitScheme uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
};

// Per-layer gradients: one tensor per parameter tensor (same order as
// Layer::parameters()) plus the delta that left the layer through its input.
struct LayerGrads {
  std::vector<Tensor> params;
  Tensor input_delta;
};

struct GradientSet {
  std::vector<LayerGrads> layers;  // index-aligned with Network layers
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  // Fills `grads` and returns the delta wrt the layer input. Requires a
  // cached train-mode forward (StateError otherwise).
  virtual Tensor backward(const Tensor& delta, LayerGrads& grads) = 0;

  virtual std::vector<Tensor*> parameters() { return {}; }
  virtual void init_parameters(const InitScheme& scheme, Rng& rng) { (void)scheme; (void)rng; }
  virtual const char* kind() const = 0;
  // Output shape (without the batch dimension) for a given input shape;
  // raises DimensionError on mismatch. Used to validate a stack up front.
  virtual std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const = 0;

  virtual void clear_cache() = 0;
  virtual bool has_cache() const = 0;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(std::size_t in, std::size_t out);

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& delta, LayerGrads& grads) override;
  std::vector<Tensor*> parameters() override { return {&w_, &b_}; }
  void init_parameters(const InitScheme& scheme, Rng& rng) override;
  const char* kind() const override { return "dense"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  void clear_cache() override;
  bool has_cache() const override { return has_cache_; }

  Tensor& weights() { return w_; }
  Tensor& bias() { return b_; }

 private:
  Tensor w_, b_;
  Tensor cached_x_;
  bool has_cache_ = false;
};

class Conv2dLayer final : public Layer {
 public:
  Conv2dLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
              std::size_t stride, std::size_t padding);

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& delta, LayerGrads& grads) override;
  std::vector<Tensor*> parameters() override { return {&kernels_, &bias_}; }
  void init_parameters(const InitScheme& scheme, Rng& rng) override;
  const char* kind() const override { return "conv2d"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  void clear_cache() override;
  bool has_cache() const override { return has_cache_; }

  Tensor& kernels() { return kernels_; }

 private:
  std::size_t in_channels_, out_channels_, kernel_, stride_, padding_;
  Tensor kernels_, bias_;
  Conv2dCache cache_;
  bool has_cache_ = false;
};

class BatchNormLayer final : public Layer {
 public:
  explicit BatchNormLayer(std::size_t features, double eps = 1e-5, double momentum = 0.9);

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& delta, LayerGrads& grads) override;
  std::vector<Tensor*> parameters() override { return {&gamma_, &shift_}; }
  void init_parameters(const InitScheme& scheme, Rng& rng) override;
  const char* kind() const override { return "batchnorm"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  void clear_cache() override;
  bool has_cache() const override { return has_cache_; }

  const RunningStats& running() const { return running_; }

 private:
  std::size_t features_;
  double eps_, momentum_;
  Tensor gamma_, shift_;
  RunningStats running_;
  BatchNormCache cache_;
  bool has_cache_ = false;
};

class ActivationLayer final : public Layer {
 public:
  explicit ActivationLayer(Unary fn);

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& delta, LayerGrads& grads) override;
  const char* kind() const override { return "activation"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  void clear_cache() override;
  bool has_cache() const override { return has_cache_; }

  Unary fn() const { return fn_; }

 private:
  Unary fn_;
  Tensor cached_x_;
  bool has_cache_ = false;
};

// [N, C, H, W] -> [N, C*H*W].
class FlattenLayer final : public Layer {
 public:
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& delta, LayerGrads& grads) override;
  const char* kind() const override { return "flatten"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  void clear_cache() override;
  bool has_cache() const override { return has_cache_; }

 private:
  std::vector<std::size_t> cached_shape_;
  bool has_cache_ = false;
};

// Ordered layer stack. A Network instance is single-writer: forward and
// backward on one instance must be serialized. Distinct instances are
// independent and may train on parallel threads.
class Network {
 public:
  Network() = default;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  void add(std::unique_ptr<Layer> layer);
  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  // Runs the stack and returns the pre-head logits. Train mode caches
  // per-layer state for backward; eval mode is a pure function.
  Tensor forward(const Tensor& x, Mode mode);

  // Chain-rule pass, last layer to first. Requires train-mode caches.
  GradientSet backward(const Tensor& delta);

  std::vector<Tensor*> parameters();

  // Deterministic init: same seed, same parameters, bit for bit. He
  // scaling sqrt(2/fan_in) is the default for the ReLU stacks used here.
  void init_parameters(const InitScheme& scheme, std::uint64_t seed);

  // Shape dry run; raises DimensionError where adjacent layers disagree.
  // `input_shape` excludes the batch dimension.
  std::vector<std::size_t> validate_shapes(const std::vector<std::size_t>& input_shape) const;

  void clear_caches();

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace gradnet
