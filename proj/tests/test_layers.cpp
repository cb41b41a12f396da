#include <cmath>
#include <cstring>
#include <doctest.h>
#include <memory>

#include "gradnet/errors.hpp"
#include "gradnet/fdcheck.hpp"
#include "gradnet/layers.hpp"
#include "gradnet/rng.hpp"

using namespace gradnet;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

double half_sq_err(const Tensor& y, const Tensor& target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - target[i];
    acc += 0.5 * d * d;
  }
  return acc;
}

std::vector<double> fd_grad(Tensor& t, const std::function<double()>& loss, double h = 1e-4) {
  std::vector<double> g(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double saved = t[i];
    t[i] = saved + h;
    const double lp = loss();
    t[i] = saved - h;
    const double lm = loss();
    t[i] = saved;
    g[i] = (lp - lm) / (2.0 * h);
  }
  return g;
}

std::vector<double> flat(const Tensor& t) {
  return std::vector<double>(t.data(), t.data() + t.size());
}

// Direct six-loop convolution oracle (cross-correlation, zero padding).
Tensor conv_oracle(const Tensor& x, const Tensor& k, const Tensor& bias, std::size_t stride,
                   std::size_t pad) {
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t OC = k.dim(0), KH = k.dim(2), KW = k.dim(3);
  const std::size_t OH = (H + 2 * pad - KH) / stride + 1;
  const std::size_t OW = (W + 2 * pad - KW) / stride + 1;
  Tensor out({N, OC, OH, OW});
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t o = 0; o < OC; ++o) {
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox) {
          double acc = bias[o];
          for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t ky = 0; ky < KH; ++ky) {
              for (std::size_t kx = 0; kx < KW; ++kx) {
                const std::ptrdiff_t iy = std::ptrdiff_t(oy * stride + ky) - std::ptrdiff_t(pad);
                const std::ptrdiff_t ix = std::ptrdiff_t(ox * stride + kx) - std::ptrdiff_t(pad);
                if (iy < 0 || iy >= std::ptrdiff_t(H) || ix < 0 || ix >= std::ptrdiff_t(W)) {
                  continue;
                }
                acc += x.at(n, c, std::size_t(iy), std::size_t(ix)) *
                       k.at(o, c, ky, kx);
              }
            }
          }
          out.at(n, o, oy, ox) = acc;
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("dense forward basics") {
  {
    const Tensor x({1, 2}, {1, 2});
    const Tensor w({2, 2}, {1, 0, 0, 1});
    const Tensor b({2}, {0, 0});
    const Tensor y = dense_forward(x, w, b);
    CHECK(y[0] == 1.0);
    CHECK(y[1] == 2.0);
  }
  {
    const Tensor y = dense_forward(Tensor({1, 2}, {1, 1}), Tensor({2, 1}, {1, 1}),
                                   Tensor({1}, {1}));
    CHECK(y[0] == 3.0);
  }
  {
    Rng rng(1);
    const Tensor x = random_tensor(rng, {3, 4});
    const Tensor w = random_tensor(rng, {4, 2});
    const Tensor b = random_tensor(rng, {2});
    const Tensor y = dense_forward(x, w, b);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        double acc = b[j];
        for (std::size_t kk = 0; kk < 4; ++kk) acc += x.at(i, kk) * w.at(kk, j);
        CHECK(y.at(i, j) == doctest::Approx(acc).epsilon(1e-14));
      }
    }
  }
  CHECK_THROWS_AS(dense_forward(Tensor({1, 3}), Tensor({2, 2}), Tensor({2})), DimensionError);
}

TEST_CASE("dense backward basics and finite differences") {
  {
    const Tensor x({1, 2}, {0.3, -0.7});
    const Tensor w({2, 2}, {1, 0, 0, 1});
    const Tensor delta({1, 2}, {1, 0});
    const DenseBackward g = dense_backward(x, w, delta);
    CHECK(g.dx[0] == 1.0);
    CHECK(g.dx[1] == 0.0);
  }
  {
    const DenseBackward g =
        dense_backward(Tensor({1, 1}, {2.0}), Tensor({1, 1}, {1.0}), Tensor({1, 1}, {3.0}));
    CHECK(g.dw[0] == 6.0);  // outer product
    CHECK(g.db[0] == 3.0);
  }
  {
    Rng rng(2);
    Tensor x = random_tensor(rng, {4, 5});
    Tensor w = random_tensor(rng, {5, 3});
    Tensor b = random_tensor(rng, {3});
    const Tensor target = random_tensor(rng, {4, 3});
    auto loss = [&]() { return half_sq_err(dense_forward(x, w, b), target); };

    const Tensor y = dense_forward(x, w, b);
    Tensor delta(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] - target[i];
    const DenseBackward g = dense_backward(x, w, delta);

    CHECK(max_grad_err(flat(g.dw), fd_grad(w, loss)) < 1e-6);
    CHECK(max_grad_err(flat(g.db), fd_grad(b, loss)) < 1e-6);
    CHECK(max_grad_err(flat(g.dx), fd_grad(x, loss)) < 1e-6);
  }
}

TEST_CASE("conv2d forward basics") {
  {
    // all-ones 3x3 input, single 1x1 kernel of 2 -> map of twos
    const Tensor x = Tensor::full({1, 1, 3, 3}, 1.0);
    const Tensor k({1, 1, 1, 1}, {2.0});
    const Tensor y = conv2d_forward(x, k, Tensor({1}), 1, 0);
    CHECK(y.shape() == std::vector<std::size_t>{1, 1, 3, 3});
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == 2.0);
  }
  {
    // delta kernel: single 1 at the center of a 3x3 kernel, pad 1 -> identity
    Rng rng(3);
    const Tensor x = random_tensor(rng, {2, 1, 5, 5});
    Tensor k({1, 1, 3, 3});
    k.at(0, 0, 1, 1) = 1.0;
    const Tensor y = conv2d_forward(x, k, Tensor({1}), 1, 1);
    REQUIRE(y.shape() == x.shape());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == x[i]);
  }
  {
    // random case vs the six-loop oracle
    Rng rng(4);
    const Tensor x = random_tensor(rng, {2, 3, 8, 8});
    const Tensor k = random_tensor(rng, {5, 3, 3, 3});
    const Tensor b = random_tensor(rng, {5});
    for (const std::size_t stride : {std::size_t{1}, std::size_t{2}}) {
      const Tensor got = conv2d_forward(x, k, b, stride, 1);
      const Tensor want = conv_oracle(x, k, b, stride, 1);
      REQUIRE(got.shape() == want.shape());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(std::fabs(got[i] - want[i]) < 1e-10);
      }
    }
  }
  // non-positive output dims
  CHECK_THROWS_AS(conv2d_forward(Tensor({1, 1, 2, 2}), Tensor({1, 1, 5, 5}), Tensor({1}), 1, 0),
                  DimensionError);
}

TEST_CASE("conv2d backward basics and finite differences") {
  {
    // identity kernel: delta_in == delta_out
    Rng rng(5);
    const Tensor x = random_tensor(rng, {1, 1, 3, 3});
    Tensor k({1, 1, 3, 3});
    k.at(0, 0, 1, 1) = 1.0;
    Conv2dCache cache;
    (void)conv2d_forward(x, k, Tensor({1}), 1, 1, &cache);
    const Tensor delta = random_tensor(rng, {1, 1, 3, 3});
    const Conv2dBackward g = conv2d_backward(cache, k, delta);
    for (std::size_t i = 0; i < delta.size(); ++i) CHECK(g.dx[i] == delta[i]);
  }
  {
    // single-pixel input: grad_kernel = input * delta
    const Tensor x({1, 1, 1, 1}, {2.5});
    const Tensor k({1, 1, 1, 1}, {0.3});
    Conv2dCache cache;
    (void)conv2d_forward(x, k, Tensor({1}), 1, 0, &cache);
    const Conv2dBackward g = conv2d_backward(cache, k, Tensor({1, 1, 1, 1}, {3.0}));
    CHECK(g.dkernels[0] == doctest::Approx(7.5).epsilon(1e-15));
  }
  {
    Rng rng(6);
    Tensor x = random_tensor(rng, {2, 3, 6, 6});
    Tensor k = random_tensor(rng, {4, 3, 3, 3}, -0.7, 0.7);
    Tensor b = random_tensor(rng, {4}, -0.3, 0.3);
    Conv2dCache cache;
    const Tensor y0 = conv2d_forward(x, k, b, 2, 1, &cache);
    const Tensor target = random_tensor(rng, y0.shape());
    auto loss = [&]() { return half_sq_err(conv2d_forward(x, k, b, 2, 1), target); };

    Tensor delta(y0.shape());
    for (std::size_t i = 0; i < y0.size(); ++i) delta[i] = y0[i] - target[i];
    const Conv2dBackward g = conv2d_backward(cache, k, delta);

    CHECK(max_grad_err(flat(g.dkernels), fd_grad(k, loss)) < 1e-5);
    CHECK(max_grad_err(flat(g.dbias), fd_grad(b, loss)) < 1e-5);
    CHECK(max_grad_err(flat(g.dx), fd_grad(x, loss)) < 1e-5);
  }
}

TEST_CASE("batchnorm forward statistics") {
  {
    // constant feature column -> output equals the shift
    Tensor x({4, 2});
    for (std::size_t i = 0; i < 4; ++i) {
      x.at(i, 0) = 3.0;
      x.at(i, 1) = double(i);
    }
    const Tensor gamma = Tensor::full({2}, 1.0);
    const Tensor shift({2}, {0.25, -0.5});
    RunningStats rs{Tensor({2}), Tensor::full({2}, 1.0)};
    const Tensor y = batchnorm_forward(x, gamma, shift, Mode::train, rs, 0.9, 1e-5);
    for (std::size_t i = 0; i < 4; ++i) CHECK(y.at(i, 0) == doctest::Approx(0.25).epsilon(1e-12));
  }
  {
    // gamma 1, shift 0 on data with mean 0 and variance 1 -> output ~ x
    Tensor x({2, 1}, {1.0, -1.0});
    RunningStats rs{Tensor({1}), Tensor::full({1}, 1.0)};
    const Tensor y = batchnorm_forward(x, Tensor::full({1}, 1.0), Tensor({1}), Mode::train, rs,
                                       0.9, 1e-5);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(y[1] == doctest::Approx(-1.0).epsilon(1e-5));
  }
  {
    // random batch standardizes each feature
    Rng rng(7);
    Tensor x = random_tensor(rng, {32, 6}, -3.0, 5.0);
    RunningStats rs{Tensor({6}), Tensor::full({6}, 1.0)};
    const Tensor y = batchnorm_forward(x, Tensor::full({6}, 1.0), Tensor({6}), Mode::train, rs,
                                       0.9, 1e-5);
    for (std::size_t f = 0; f < 6; ++f) {
      double m = 0.0;
      for (std::size_t i = 0; i < 32; ++i) m += y.at(i, f);
      m /= 32.0;
      CHECK(std::fabs(m) < 1e-7);
      double v = 0.0;
      for (std::size_t i = 0; i < 32; ++i) v += (y.at(i, f) - m) * (y.at(i, f) - m);
      v /= 32.0;
      CHECK(v == doctest::Approx(1.0).epsilon(1e-4));
    }
  }
  {
    // batch of one in train mode
    RunningStats rs{Tensor({2}), Tensor::full({2}, 1.0)};
    CHECK_THROWS_AS(batchnorm_forward(Tensor({1, 2}), Tensor::full({2}, 1.0), Tensor({2}),
                                      Mode::train, rs, 0.9, 1e-5),
                    DomainError);
  }
}

TEST_CASE("batchnorm backward basics and finite differences") {
  Rng rng(8);
  {
    // gamma = 0 kills the input delta
    Tensor x = random_tensor(rng, {5, 3});
    RunningStats rs{Tensor({3}), Tensor::full({3}, 1.0)};
    BatchNormCache cache;
    (void)batchnorm_forward(x, Tensor({3}), Tensor({3}), Mode::train, rs, 0.9, 1e-5, &cache);
    const Tensor delta = random_tensor(rng, {5, 3});
    const BatchNormBackward g = batchnorm_backward(cache, Tensor({3}), delta);
    for (std::size_t i = 0; i < g.dx.size(); ++i) CHECK(g.dx[i] == 0.0);

    // grad_shift sums the delta over the batch
    for (std::size_t f = 0; f < 3; ++f) {
      double s = 0.0;
      for (std::size_t i = 0; i < 5; ++i) s += delta.at(i, f);
      CHECK(g.dshift[f] == doctest::Approx(s).epsilon(1e-14));
    }
  }
  for (const bool conv_input : {false, true}) {
    Tensor x = conv_input ? random_tensor(rng, {3, 2, 4, 4}) : random_tensor(rng, {6, 5});
    const std::size_t f = x.dim(1);
    Tensor gamma = random_tensor(rng, {f}, 0.5, 1.5);
    Tensor shift = random_tensor(rng, {f}, -0.5, 0.5);
    RunningStats rs{Tensor({f}), Tensor::full({f}, 1.0)};
    BatchNormCache cache;
    const Tensor y0 = batchnorm_forward(x, gamma, shift, Mode::train, rs, 0.9, 1e-5, &cache);
    const Tensor target = random_tensor(rng, y0.shape());
    auto loss = [&]() {
      RunningStats fresh{Tensor({f}), Tensor::full({f}, 1.0)};
      return half_sq_err(batchnorm_forward(x, gamma, shift, Mode::train, fresh, 0.9, 1e-5),
                         target);
    };
    Tensor delta(y0.shape());
    for (std::size_t i = 0; i < y0.size(); ++i) delta[i] = y0[i] - target[i];
    const BatchNormBackward g = batchnorm_backward(cache, gamma, delta);

    CHECK(max_grad_err(flat(g.dgamma), fd_grad(gamma, loss)) < 1e-5);
    CHECK(max_grad_err(flat(g.dshift), fd_grad(shift, loss)) < 1e-5);
    CHECK(max_grad_err(flat(g.dx), fd_grad(x, loss)) < 1e-5);
  }
}

TEST_CASE("network forward composition") {
  {
    // single dense identity network
    auto dense = std::make_unique<DenseLayer>(2, 2);
    dense->weights() = Tensor({2, 2}, {1, 0, 0, 1});
    Network net;
    net.add(std::move(dense));
    const Tensor x({3, 2}, {1, 2, 3, 4, 5, 6});
    const Tensor y = net.forward(x, Mode::eval);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
  }
  {
    // zero weights -> broadcast bias
    auto dense = std::make_unique<DenseLayer>(3, 2);
    dense->bias() = Tensor({2}, {0.5, -1.5});
    Network net;
    net.add(std::move(dense));
    Rng rng(9);
    const Tensor y = net.forward(random_tensor(rng, {4, 3}), Mode::eval);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(y.at(i, 0) == 0.5);
      CHECK(y.at(i, 1) == -1.5);
    }
  }
  {
    // two layers == manual composition
    Network net;
    net.add(std::make_unique<DenseLayer>(3, 4));
    net.add(std::make_unique<ActivationLayer>(Unary::relu));
    net.init_parameters(InitScheme::he(), 77);
    Rng rng(10);
    const Tensor x = random_tensor(rng, {2, 3});
    const Tensor y = net.forward(x, Mode::eval);

    Network manual_dense;
    manual_dense.add(std::make_unique<DenseLayer>(3, 4));
    manual_dense.init_parameters(InitScheme::he(), 77);
    const Tensor logits = manual_dense.forward(x, Mode::eval);
    const Tensor want = map_unary(logits, Unary::relu);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == want[i]);
  }
}

TEST_CASE("network backward chains layer backwards") {
  {
    // zero delta -> all-zero gradient set
    Network net;
    net.add(std::make_unique<DenseLayer>(3, 4));
    net.add(std::make_unique<ActivationLayer>(Unary::tanh));
    net.add(std::make_unique<DenseLayer>(4, 2));
    net.init_parameters(InitScheme::he(), 5);
    Rng rng(11);
    (void)net.forward(random_tensor(rng, {3, 3}), Mode::train);
    const GradientSet gs = net.backward(Tensor({3, 2}));
    for (const LayerGrads& lg : gs.layers) {
      for (const Tensor& g : lg.params) {
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == 0.0);
      }
      for (std::size_t i = 0; i < lg.input_delta.size(); ++i) CHECK(lg.input_delta[i] == 0.0);
    }
  }
  {
    // single-layer network backward == dense_backward
    Rng rng(12);
    auto dense = std::make_unique<DenseLayer>(4, 3);
    DenseLayer* raw = dense.get();
    Network net;
    net.add(std::move(dense));
    net.init_parameters(InitScheme::he(), 13);
    const Tensor x = random_tensor(rng, {2, 4});
    (void)net.forward(x, Mode::train);
    const Tensor delta = random_tensor(rng, {2, 3});
    const GradientSet gs = net.backward(delta);
    const DenseBackward direct = dense_backward(x, raw->weights(), delta);
    for (std::size_t i = 0; i < direct.dw.size(); ++i) {
      CHECK(gs.layers[0].params[0][i] == direct.dw[i]);
    }
    for (std::size_t i = 0; i < direct.dx.size(); ++i) {
      CHECK(gs.layers[0].input_delta[i] == direct.dx[i]);
    }
  }
  {
    // 3-dense-layer MLP against finite differences of a scalarized loss
    Network net;
    net.add(std::make_unique<DenseLayer>(6, 8));
    net.add(std::make_unique<ActivationLayer>(Unary::relu));
    net.add(std::make_unique<DenseLayer>(8, 7));
    net.add(std::make_unique<ActivationLayer>(Unary::relu));
    net.add(std::make_unique<DenseLayer>(7, 5));
    net.init_parameters(InitScheme::he(), 2024);
    Rng rng(13);
    const Tensor x = random_tensor(rng, {4, 6});
    const Tensor target = random_tensor(rng, {4, 5});
    auto loss = [&]() { return half_sq_err(net.forward(x, Mode::train), target); };

    const Tensor y0 = net.forward(x, Mode::train);
    Tensor delta(y0.shape());
    for (std::size_t i = 0; i < y0.size(); ++i) delta[i] = y0[i] - target[i];
    const GradientSet gs = net.backward(delta);

    std::vector<double> analytic;
    for (const LayerGrads& lg : gs.layers) {
      for (const Tensor& g : lg.params) {
        analytic.insert(analytic.end(), g.data(), g.data() + g.size());
      }
    }
    std::vector<double> numeric;
    for (Tensor* p : net.parameters()) {
      const auto fd = fd_grad(*p, loss);
      numeric.insert(numeric.end(), fd.begin(), fd.end());
    }
    CHECK(max_grad_err(analytic, numeric) < 1e-5);
  }
  {
    // backward without forward
    Network net;
    net.add(std::make_unique<DenseLayer>(2, 2));
    CHECK_THROWS_AS(net.backward(Tensor({1, 2})), StateError);
  }
}

TEST_CASE("gradient shapes are congruent with parameter shapes") {
  Network net;
  net.add(std::make_unique<Conv2dLayer>(2, 3, 3, 1, 1));
  net.add(std::make_unique<BatchNormLayer>(3));
  net.add(std::make_unique<ActivationLayer>(Unary::relu));
  net.add(std::make_unique<FlattenLayer>());
  net.add(std::make_unique<DenseLayer>(3 * 4 * 4, 5));
  net.init_parameters(InitScheme::he(), 3);
  Rng rng(14);
  const Tensor x = random_tensor(rng, {2, 2, 4, 4});
  (void)net.forward(x, Mode::train);
  const GradientSet gs = net.backward(random_tensor(rng, {2, 5}));
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    const auto params = net.layer(i).parameters();
    REQUIRE(gs.layers[i].params.size() == params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
      CHECK(gs.layers[i].params[j].shape() == params[j]->shape());
    }
  }
}

TEST_CASE("eval-mode forward is a pure function") {
  Network net;
  net.add(std::make_unique<DenseLayer>(4, 6));
  net.add(std::make_unique<BatchNormLayer>(6));
  net.add(std::make_unique<ActivationLayer>(Unary::relu));
  net.add(std::make_unique<DenseLayer>(6, 3));
  net.init_parameters(InitScheme::he(), 55);
  Rng rng(15);
  const Tensor x = random_tensor(rng, {5, 4});
  const Tensor y1 = net.forward(x, Mode::eval);
  const Tensor y2 = net.forward(x, Mode::eval);
  CHECK(std::memcmp(y1.data(), y2.data(), y1.size() * sizeof(double)) == 0);
  // eval does not populate caches
  CHECK_THROWS_AS(net.backward(Tensor({5, 3})), StateError);
}

TEST_CASE("parameter initialization") {
  {
    // uniform(0,0) zeroes everything
    Network net;
    net.add(std::make_unique<DenseLayer>(4, 4));
    net.init_parameters(InitScheme::uniform(0.0, 0.0), 1);
    for (Tensor* p : net.parameters()) {
      for (std::size_t i = 0; i < p->size(); ++i) CHECK((*p)[i] == 0.0);
    }
  }
  {
    // same seed -> bit-identical parameters
    Network a, b;
    a.add(std::make_unique<DenseLayer>(10, 20));
    b.add(std::make_unique<DenseLayer>(10, 20));
    a.init_parameters(InitScheme::he(), 99);
    b.init_parameters(InitScheme::he(), 99);
    const Tensor& wa = *a.parameters()[0];
    const Tensor& wb = *b.parameters()[0];
    CHECK(std::memcmp(wa.data(), wb.data(), wa.size() * sizeof(double)) == 0);
  }
  {
    // xavier scaling: sample std near sqrt(2/(fan_in+fan_out))
    Network net;
    net.add(std::make_unique<DenseLayer>(40, 2500));
    net.init_parameters(InitScheme::xavier(), 8);
    const Tensor& w = *net.parameters()[0];
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) m += w[i];
    m /= double(w.size());
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v += (w[i] - m) * (w[i] - m);
    v /= double(w.size());
    CHECK(std::sqrt(v) == doctest::Approx(std::sqrt(2.0 / 2540.0)).epsilon(0.05));
  }
  {
    // he scaling: sample std within 5% of sqrt(2/fan_in) over 1e5 draws
    Network net;
    net.add(std::make_unique<DenseLayer>(50, 2000));
    net.init_parameters(InitScheme::he(), 7);
    const Tensor& w = *net.parameters()[0];
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) m += w[i];
    m /= double(w.size());
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v += (w[i] - m) * (w[i] - m);
    v /= double(w.size());
    const double want = std::sqrt(2.0 / 50.0);
    CHECK(std::sqrt(v) == doctest::Approx(want).epsilon(0.05));
  }
}

TEST_CASE("shape validation walks the stack") {
  Network net;
  net.add(std::make_unique<Conv2dLayer>(3, 8, 3, 1, 1));
  net.add(std::make_unique<BatchNormLayer>(8));
  net.add(std::make_unique<ActivationLayer>(Unary::relu));
  net.add(std::make_unique<FlattenLayer>());
  net.add(std::make_unique<DenseLayer>(8 * 32 * 32, 10));
  const auto out = net.validate_shapes({3, 32, 32});
  CHECK(out == std::vector<std::size_t>{10});

  Network bad;
  bad.add(std::make_unique<DenseLayer>(784, 50));
  CHECK_THROWS_AS(bad.validate_shapes({392}), DimensionError);
}
