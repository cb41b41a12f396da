#include "gradnet/layers.hpp"

#include <cmath>

#include "gradnet/errors.hpp"

namespace gradnet {

namespace {

// c = a^T . b  with a: [k, m], b: [k, n]. Accumulation over k ascending.
Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  const std::size_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) throw DimensionError("matmul_tn shape mismatch");
  Tensor out({m, n});
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = out.data();
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double* arow = pa + kk * m;
    const double* brow = pb + kk * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return out;
}

// c = a . b^T  with a: [m, k], b: [n, k]. Accumulation over k ascending.
Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) throw DimensionError("matmul_nt shape mismatch");
  Tensor out({m, n});
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * k;
    double* crow = pc + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = pb + j * k;
      double acc = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      crow[j] = acc;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- dense

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1) {
    throw DimensionError("dense_forward expects x[batch,in], w[in,out], b[out]");
  }
  if (x.dim(1) != w.dim(0) || w.dim(1) != b.dim(0)) {
    throw DimensionError("dense_forward shape mismatch: x " + x.shape_str() + ", w " +
                         w.shape_str() + ", b " + b.shape_str());
  }
  Tensor out = matmul(x, w);
  const std::size_t rows = out.dim(0), n = out.dim(1);
  double* po = out.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) po[i * n + j] += pb[j];
  }
  return out;
}

DenseBackward dense_backward(const Tensor& x, const Tensor& w, const Tensor& delta) {
  if (delta.dim(0) != x.dim(0) || delta.dim(1) != w.dim(1)) {
    throw DimensionError("dense_backward delta shape mismatch");
  }
  DenseBackward g;
  g.dx = matmul_nt(delta, w);   // [batch, in]
  g.dw = matmul_tn(x, delta);   // [in, out]
  g.db = reduce(delta, Reduce::sum, 0);
  return g;
}

// ---------------------------------------------------------------- conv2d

namespace {

std::size_t conv_out_dim(std::size_t in, std::size_t kernel, std::size_t stride,
                         std::size_t padding) {
  const std::size_t padded = in + 2 * padding;
  if (padded < kernel || stride == 0) {
    throw DimensionError("conv2d output dimension is not positive");
  }
  return (padded - kernel) / stride + 1;
}

// kernels [OC, C, KH, KW] -> weight matrix [C*KH*KW, OC].
Tensor kernels_as_matrix(const Tensor& kernels) {
  const std::size_t oc = kernels.dim(0), ckk = kernels.size() / kernels.dim(0);
  Tensor w({ckk, oc});
  const double* pk = kernels.data();
  double* pw = w.data();
  for (std::size_t o = 0; o < oc; ++o) {
    for (std::size_t q = 0; q < ckk; ++q) pw[q * oc + o] = pk[o * ckk + q];
  }
  return w;
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride, std::size_t padding, Conv2dCache* cache) {
  if (x.rank() != 4 || kernels.rank() != 4 || bias.rank() != 1) {
    throw DimensionError("conv2d_forward expects x[N,C,H,W], kernels[OC,C,KH,KW], bias[OC]");
  }
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t OC = kernels.dim(0), KC = kernels.dim(1), KH = kernels.dim(2),
                    KW = kernels.dim(3);
  if (KC != C) throw DimensionError("conv2d kernel channels do not match input channels");
  if (bias.dim(0) != OC) throw DimensionError("conv2d bias length does not match kernel count");
  const std::size_t OH = conv_out_dim(H, KH, stride, padding);
  const std::size_t OW = conv_out_dim(W, KW, stride, padding);
  const std::size_t ckk = C * KH * KW;

  Tensor cols({N * OH * OW, ckk});
  const double* px = x.data();
  double* pc = cols.data();
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        double* row = pc + ((n * OH + oy) * OW + ox) * ckk;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t ky = 0; ky < KH; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(padding);
            for (std::size_t kx = 0; kx < KW; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(padding);
              double v = 0.0;
              if (iy >= 0 && iy < static_cast<std::ptrdiff_t>(H) && ix >= 0 &&
                  ix < static_cast<std::ptrdiff_t>(W)) {
                v = px[((n * C + c) * H + iy) * W + ix];
              }
              row[(c * KH + ky) * KW + kx] = v;
            }
          }
        }
      }
    }
  }

  const Tensor wmat = kernels_as_matrix(kernels);
  Tensor out_mat = matmul(cols, wmat);  // [N*OH*OW, OC]
  double* po = out_mat.data();
  const double* pb = bias.data();
  const std::size_t rows = N * OH * OW;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < OC; ++o) po[r * OC + o] += pb[o];
  }

  Tensor out({N, OC, OH, OW});
  double* py = out.data();
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        const double* row = po + ((n * OH + oy) * OW + ox) * OC;
        for (std::size_t o = 0; o < OC; ++o) {
          py[((n * OC + o) * OH + oy) * OW + ox] = row[o];
        }
      }
    }
  }

  if (cache) {
    cache->cols = std::move(cols);
    cache->in_shape = {N, C, H, W};
    cache->out_h = OH;
    cache->out_w = OW;
    cache->stride = stride;
    cache->padding = padding;
  }
  return out;
}

Conv2dBackward conv2d_backward(const Conv2dCache& cache, const Tensor& kernels,
                               const Tensor& delta) {
  if (cache.in_shape.empty()) throw StateError("conv2d_backward without a cached forward pass");
  const std::size_t N = cache.in_shape[0], C = cache.in_shape[1], H = cache.in_shape[2],
                    W = cache.in_shape[3];
  const std::size_t OC = kernels.dim(0), KH = kernels.dim(2), KW = kernels.dim(3);
  const std::size_t OH = cache.out_h, OW = cache.out_w;
  if (delta.rank() != 4 || delta.dim(0) != N || delta.dim(1) != OC || delta.dim(2) != OH ||
      delta.dim(3) != OW) {
    throw DimensionError("conv2d_backward delta shape mismatch");
  }
  const std::size_t ckk = C * KH * KW;
  const std::size_t rows = N * OH * OW;

  // [N, OC, OH, OW] -> [N*OH*OW, OC]
  Tensor delta_mat({rows, OC});
  {
    const double* pd = delta.data();
    double* pm = delta_mat.data();
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t o = 0; o < OC; ++o) {
        for (std::size_t oy = 0; oy < OH; ++oy) {
          for (std::size_t ox = 0; ox < OW; ++ox) {
            pm[((n * OH + oy) * OW + ox) * OC + o] = pd[((n * OC + o) * OH + oy) * OW + ox];
          }
        }
      }
    }
  }

  Conv2dBackward g;

  g.dbias = reduce(delta_mat, Reduce::sum, 0);

  // dW in matrix layout, then back to [OC, C, KH, KW].
  Tensor dwmat = matmul_tn(cache.cols, delta_mat);  // [ckk, OC]
  g.dkernels = Tensor(kernels.shape());
  {
    const double* pw = dwmat.data();
    double* pk = g.dkernels.data();
    for (std::size_t o = 0; o < OC; ++o) {
      for (std::size_t q = 0; q < ckk; ++q) pk[o * ckk + q] = pw[q * OC + o];
    }
  }

  const Tensor wmat = kernels_as_matrix(kernels);
  Tensor dcols = matmul_nt(delta_mat, wmat);  // [rows, ckk]

  // col2im scatter-add, ascending row then column order.
  g.dx = Tensor({N, C, H, W});
  double* pdx = g.dx.data();
  const double* pdc = dcols.data();
  const std::size_t stride = cache.stride, padding = cache.padding;
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        const double* row = pdc + ((n * OH + oy) * OW + ox) * ckk;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t ky = 0; ky < KH; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t kx = 0; kx < KW; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
              pdx[((n * C + c) * H + iy) * W + ix] += row[(c * KH + ky) * KW + kx];
            }
          }
        }
      }
    }
  }
  return g;
}

// ------------------------------------------------------------- batchnorm

namespace {

struct FeatureLayout {
  std::size_t features = 0;
  std::size_t group = 0;  // elements per feature (N or N*H*W)
};

FeatureLayout bn_layout(const std::vector<std::size_t>& shape) {
  FeatureLayout l;
  if (shape.size() == 2) {
    l.features = shape[1];
    l.group = shape[0];
  } else if (shape.size() == 4) {
    l.features = shape[1];
    l.group = shape[0] * shape[2] * shape[3];
  } else {
    throw DimensionError("batchnorm expects rank-2 or rank-4 input");
  }
  return l;
}

// Flat indices of feature f in ascending order.
template <class Fn>
void bn_for_feature(const std::vector<std::size_t>& shape, std::size_t f, Fn&& fn) {
  if (shape.size() == 2) {
    const std::size_t N = shape[0], F = shape[1];
    for (std::size_t i = 0; i < N; ++i) fn(i * F + f);
  } else {
    const std::size_t N = shape[0], C = shape[1], H = shape[2], W = shape[3];
    const std::size_t hw = H * W;
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t base = (n * C + f) * hw;
      for (std::size_t i = 0; i < hw; ++i) fn(base + i);
    }
  }
}

}  // namespace

Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& shift, Mode mode,
                         RunningStats& running, double momentum, double eps,
                         BatchNormCache* cache) {
  const FeatureLayout l = bn_layout(x.shape());
  if (gamma.size() != l.features || shift.size() != l.features) {
    throw DimensionError("batchnorm parameter length does not match feature count");
  }
  if (running.mean.size() != l.features || running.var.size() != l.features) {
    throw DimensionError("batchnorm running stats length does not match feature count");
  }
  if (mode == Mode::train && x.dim(0) < 2) {
    throw DomainError("batchnorm train mode needs batch size >= 2");
  }

  Tensor out(x.shape());
  const double* px = x.data();
  double* py = out.data();
  const double* pg = gamma.data();
  const double* ps = shift.data();

  if (mode == Mode::eval) {
    for (std::size_t f = 0; f < l.features; ++f) {
      const double m = running.mean[f];
      const double inv = 1.0 / std::sqrt(running.var[f] + eps);
      const double g = pg[f], s = ps[f];
      bn_for_feature(x.shape(), f, [&](std::size_t idx) { py[idx] = (px[idx] - m) * inv * g + s; });
    }
    return out;
  }

  Tensor x_centered(x.shape());
  Tensor x_hat(x.shape());
  Tensor inv_std({l.features});
  double* pcent = x_centered.data();
  double* phat = x_hat.data();
  const double gsize = static_cast<double>(l.group);

  for (std::size_t f = 0; f < l.features; ++f) {
    double m = 0.0;
    bn_for_feature(x.shape(), f, [&](std::size_t idx) { m += px[idx]; });
    m /= gsize;
    double v = 0.0;
    bn_for_feature(x.shape(), f, [&](std::size_t idx) {
      const double d = px[idx] - m;
      v += d * d;
    });
    v /= gsize;  // biased variance, consistent with the normalization

    const double inv = 1.0 / std::sqrt(v + eps);
    inv_std[f] = inv;
    const double g = pg[f], s = ps[f];
    bn_for_feature(x.shape(), f, [&](std::size_t idx) {
      const double c = px[idx] - m;
      pcent[idx] = c;
      const double h = c * inv;
      phat[idx] = h;
      py[idx] = g * h + s;
    });

    running.mean[f] = momentum * running.mean[f] + (1.0 - momentum) * m;
    running.var[f] = momentum * running.var[f] + (1.0 - momentum) * v;
  }

  if (cache) {
    cache->x_centered = std::move(x_centered);
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
    cache->in_shape = x.shape();
  }
  return out;
}

BatchNormBackward batchnorm_backward(const BatchNormCache& cache, const Tensor& gamma,
                                     const Tensor& delta) {
  if (cache.in_shape.empty()) throw StateError("batchnorm_backward without a cached forward pass");
  if (delta.shape() != cache.in_shape) throw DimensionError("batchnorm_backward delta shape mismatch");
  const FeatureLayout l = bn_layout(cache.in_shape);
  const double gsize = static_cast<double>(l.group);

  BatchNormBackward g;
  g.dx = Tensor(cache.in_shape);
  g.dgamma = Tensor({l.features});
  g.dshift = Tensor({l.features});

  const double* pd = delta.data();
  const double* phat = cache.x_hat.data();
  const double* pcent = cache.x_centered.data();
  const double* pg = gamma.data();
  double* pdx = g.dx.data();

  for (std::size_t f = 0; f < l.features; ++f) {
    const double inv = cache.inv_std[f];
    const double gm = pg[f];

    double dgamma = 0.0, dshift = 0.0;
    bn_for_feature(cache.in_shape, f, [&](std::size_t idx) {
      dgamma += pd[idx] * phat[idx];
      dshift += pd[idx];
    });
    g.dgamma[f] = dgamma;
    g.dshift[f] = dshift;

    // Gradients through the batch statistics.
    double dvar = 0.0;
    bn_for_feature(cache.in_shape, f, [&](std::size_t idx) {
      dvar += pd[idx] * gm * pcent[idx];
    });
    dvar *= -0.5 * inv * inv * inv;

    double dmean = 0.0, cent_sum = 0.0;
    bn_for_feature(cache.in_shape, f, [&](std::size_t idx) {
      dmean += -pd[idx] * gm * inv;
      cent_sum += pcent[idx];
    });
    dmean += dvar * (-2.0 / gsize) * cent_sum;

    bn_for_feature(cache.in_shape, f, [&](std::size_t idx) {
      pdx[idx] = pd[idx] * gm * inv + dvar * 2.0 * pcent[idx] / gsize + dmean / gsize;
    });
  }
  return g;
}

// ------------------------------------------------------------ DenseLayer

DenseLayer::DenseLayer(std::size_t in, std::size_t out) : w_({in, out}), b_({out}) {}

Tensor DenseLayer::forward(const Tensor& x, Mode mode) {
  Tensor out = dense_forward(x, w_, b_);
  if (mode == Mode::train) {
    cached_x_ = x;
    has_cache_ = true;
  }
  return out;
}

Tensor DenseLayer::backward(const Tensor& delta, LayerGrads& grads) {
  if (!has_cache_) throw StateError("dense backward without a cached forward pass");
  DenseBackward g = dense_backward(cached_x_, w_, delta);
  grads.params.clear();
  grads.params.push_back(std::move(g.dw));
  grads.params.push_back(std::move(g.db));
  return std::move(g.dx);
}

void DenseLayer::init_parameters(const InitScheme& scheme, Rng& rng) {
  const double fan_in = static_cast<double>(w_.dim(0));
  const double fan_out = static_cast<double>(w_.dim(1));
  double* pw = w_.data();
  switch (scheme.kind) {
    case InitScheme::Kind::he: {
      const double std = std::sqrt(2.0 / fan_in);
      for (std::size_t i = 0; i < w_.size(); ++i) pw[i] = std * rng.normal();
      break;
    }
    case InitScheme::Kind::xavier: {
      const double std = std::sqrt(2.0 / (fan_in + fan_out));
      for (std::size_t i = 0; i < w_.size(); ++i) pw[i] = std * rng.normal();
      break;
    }
    case InitScheme::Kind::uniform:
      for (std::size_t i = 0; i < w_.size(); ++i) pw[i] = rng.uniform(scheme.lo, scheme.hi);
      break;
  }
  for (std::size_t i = 0; i < b_.size(); ++i) b_[i] = 0.0;
}

std::vector<std::size_t> DenseLayer::output_shape(const std::vector<std::size_t>& in) const {
  if (in.size() != 1 || in[0] != w_.dim(0)) {
    throw DimensionError("dense layer expects input width " + std::to_string(w_.dim(0)));
  }
  return {w_.dim(1)};
}

void DenseLayer::clear_cache() {
  cached_x_ = Tensor();
  has_cache_ = false;
}

// ----------------------------------------------------------- Conv2dLayer

Conv2dLayer::Conv2dLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                         std::size_t stride, std::size_t padding)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      kernels_({out_channels, in_channels, kernel, kernel}),
      bias_({out_channels}) {}

Tensor Conv2dLayer::forward(const Tensor& x, Mode mode) {
  Tensor out = conv2d_forward(x, kernels_, bias_, stride_, padding_,
                              mode == Mode::train ? &cache_ : nullptr);
  if (mode == Mode::train) has_cache_ = true;
  return out;
}

Tensor Conv2dLayer::backward(const Tensor& delta, LayerGrads& grads) {
  if (!has_cache_) throw StateError("conv2d backward without a cached forward pass");
  Conv2dBackward g = conv2d_backward(cache_, kernels_, delta);
  grads.params.clear();
  grads.params.push_back(std::move(g.dkernels));
  grads.params.push_back(std::move(g.dbias));
  return std::move(g.dx);
}

void Conv2dLayer::init_parameters(const InitScheme& scheme, Rng& rng) {
  const double fan_in = static_cast<double>(in_channels_ * kernel_ * kernel_);
  const double fan_out = static_cast<double>(out_channels_ * kernel_ * kernel_);
  double* pk = kernels_.data();
  switch (scheme.kind) {
    case InitScheme::Kind::he: {
      const double std = std::sqrt(2.0 / fan_in);
      for (std::size_t i = 0; i < kernels_.size(); ++i) pk[i] = std * rng.normal();
      break;
    }
    case InitScheme::Kind::xavier: {
      const double std = std::sqrt(2.0 / (fan_in + fan_out));
      for (std::size_t i = 0; i < kernels_.size(); ++i) pk[i] = std * rng.normal();
      break;
    }
    case InitScheme::Kind::uniform:
      for (std::size_t i = 0; i < kernels_.size(); ++i) pk[i] = rng.uniform(scheme.lo, scheme.hi);
      break;
  }
  for (std::size_t i = 0; i < bias_.size(); ++i) bias_[i] = 0.0;
}

std::vector<std::size_t> Conv2dLayer::output_shape(const std::vector<std::size_t>& in) const {
  if (in.size() != 3 || in[0] != in_channels_) {
    throw DimensionError("conv2d layer expects input [C,H,W] with C = " +
                         std::to_string(in_channels_));
  }
  const std::size_t oh = conv_out_dim(in[1], kernel_, stride_, padding_);
  const std::size_t ow = conv_out_dim(in[2], kernel_, stride_, padding_);
  return {out_channels_, oh, ow};
}

void Conv2dLayer::clear_cache() {
  cache_ = Conv2dCache();
  has_cache_ = false;
}

// -------------------------------------------------------- BatchNormLayer

BatchNormLayer::BatchNormLayer(std::size_t features, double eps, double momentum)
    : features_(features),
      eps_(eps),
      momentum_(momentum),
      gamma_(Tensor::full({features}, 1.0)),
      shift_({features}) {
  running_.mean = Tensor({features});
  running_.var = Tensor::full({features}, 1.0);
}

Tensor BatchNormLayer::forward(const Tensor& x, Mode mode) {
  Tensor out = batchnorm_forward(x, gamma_, shift_, mode, running_, momentum_, eps_,
                                 mode == Mode::train ? &cache_ : nullptr);
  if (mode == Mode::train) has_cache_ = true;
  return out;
}

Tensor BatchNormLayer::backward(const Tensor& delta, LayerGrads& grads) {
  if (!has_cache_) throw StateError("batchnorm backward without a cached forward pass");
  BatchNormBackward g = batchnorm_backward(cache_, gamma_, delta);
  grads.params.clear();
  grads.params.push_back(std::move(g.dgamma));
  grads.params.push_back(std::move(g.dshift));
  return std::move(g.dx);
}

void BatchNormLayer::init_parameters(const InitScheme&, Rng&) {
  for (std::size_t i = 0; i < features_; ++i) {
    gamma_[i] = 1.0;
    shift_[i] = 0.0;
    running_.mean[i] = 0.0;
    running_.var[i] = 1.0;
  }
}

std::vector<std::size_t> BatchNormLayer::output_shape(const std::vector<std::size_t>& in) const {
  const std::size_t features = in.empty() ? 0 : in[0];
  if ((in.size() != 1 && in.size() != 3) || features != features_) {
    throw DimensionError("batchnorm layer expects " + std::to_string(features_) + " features");
  }
  return in;
}

void BatchNormLayer::clear_cache() {
  cache_ = BatchNormCache();
  has_cache_ = false;
}

// ------------------------------------------------------- ActivationLayer

ActivationLayer::ActivationLayer(Unary fn) : fn_(fn) {}

Tensor ActivationLayer::forward(const Tensor& x, Mode mode) {
  if (mode == Mode::train) {
    cached_x_ = x;
    has_cache_ = true;
  }
  return map_unary(x, fn_);
}

Tensor ActivationLayer::backward(const Tensor& delta, LayerGrads& grads) {
  if (!has_cache_) throw StateError("activation backward without a cached forward pass");
  if (!delta.same_shape(cached_x_)) throw DimensionError("activation backward shape mismatch");
  grads.params.clear();
  Tensor dx(delta.shape());
  const double* pd = delta.data();
  const double* px = cached_x_.data();
  double* po = dx.data();
  const std::size_t n = dx.size();
  switch (fn_) {
    case Unary::relu:
      for (std::size_t i = 0; i < n; ++i) po[i] = px[i] > 0.0 ? pd[i] : 0.0;
      break;
    case Unary::sigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const double f = 1.0 / (1.0 + std::exp(-px[i]));
        po[i] = pd[i] * f * (1.0 - f);
      }
      break;
    case Unary::tanh:
      for (std::size_t i = 0; i < n; ++i) {
        const double f = std::tanh(px[i]);
        po[i] = pd[i] * (1.0 - f * f);
      }
      break;
    case Unary::identity:
      for (std::size_t i = 0; i < n; ++i) po[i] = pd[i];
      break;
    case Unary::exp:
      for (std::size_t i = 0; i < n; ++i) po[i] = pd[i] * std::exp(px[i]);
      break;
    case Unary::cube:
      for (std::size_t i = 0; i < n; ++i) po[i] = pd[i] * 3.0 * px[i] * px[i];
      break;
    case Unary::abs:
      for (std::size_t i = 0; i < n; ++i)
        po[i] = pd[i] * (px[i] > 0.0 ? 1.0 : (px[i] < 0.0 ? -1.0 : 0.0));
      break;
    case Unary::sign:
      for (std::size_t i = 0; i < n; ++i) po[i] = 0.0;  // derivative is zero a.e.
      break;
  }
  return dx;
}

std::vector<std::size_t> ActivationLayer::output_shape(const std::vector<std::size_t>& in) const {
  return in;
}

void ActivationLayer::clear_cache() {
  cached_x_ = Tensor();
  has_cache_ = false;
}

// ---------------------------------------------------------- FlattenLayer

Tensor FlattenLayer::forward(const Tensor& x, Mode mode) {
  if (x.rank() < 2) throw DimensionError("flatten expects a batched input");
  if (mode == Mode::train) {
    cached_shape_ = x.shape();
    has_cache_ = true;
  }
  return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

Tensor FlattenLayer::backward(const Tensor& delta, LayerGrads& grads) {
  if (!has_cache_) throw StateError("flatten backward without a cached forward pass");
  grads.params.clear();
  return delta.reshaped(cached_shape_);
}

std::vector<std::size_t> FlattenLayer::output_shape(const std::vector<std::size_t>& in) const {
  if (in.empty()) throw DimensionError("flatten expects a non-empty shape");
  std::size_t n = 1;
  for (std::size_t d : in) n *= d;
  return {n};
}

void FlattenLayer::clear_cache() {
  cached_shape_.clear();
  has_cache_ = false;
}

// --------------------------------------------------------------- Network

void Network::add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

Tensor Network::forward(const Tensor& x, Mode mode) {
  Tensor cur = x;
  for (auto& layer : layers_) cur = layer->forward(cur, mode);
  return cur;
}

GradientSet Network::backward(const Tensor& delta) {
  GradientSet gs;
  gs.layers.resize(layers_.size());
  Tensor cur = delta;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    cur = layers_[i]->backward(cur, gs.layers[i]);
    gs.layers[i].input_delta = cur;
  }
  return gs;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) {
    for (Tensor* p : layer->parameters()) out.push_back(p);
  }
  return out;
}

void Network::init_parameters(const InitScheme& scheme, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& layer : layers_) layer->init_parameters(scheme, rng);
  clear_caches();
}

std::vector<std::size_t> Network::validate_shapes(
    const std::vector<std::size_t>& input_shape) const {
  std::vector<std::size_t> cur = input_shape;
  for (const auto& layer : layers_) cur = layer->output_shape(cur);
  return cur;
}

void Network::clear_caches() {
  for (auto& layer : layers_) layer->clear_cache();
}

}  // namespace gradnet
