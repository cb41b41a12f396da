#include <cmath>
#include <cstring>
#include <doctest.h>

#include "gradnet/errors.hpp"
#include "gradnet/rng.hpp"
#include "gradnet/tensor.hpp"

using namespace gradnet;

namespace {

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Tensor t({r, c});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-2.0, 2.0);
  return t;
}

// Independent triple-loop oracle for the matrix product.
Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) acc += a.at(i, kk) * b.at(kk, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("tensor construction checks shape against data") {
  CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(Tensor({0, 3}), DimensionError);
  const Tensor t({2, 2}, {1, 2, 3, 4});
  CHECK(t.size() == 4);
  CHECK(t.at(1, 0) == 3.0);
}

TEST_CASE("matmul identity and small cases") {
  const Tensor identity({2, 2}, {1, 0, 0, 1});
  const Tensor b({2, 2}, {5, 6, 7, 8});
  const Tensor prod = matmul(identity, b);
  for (std::size_t i = 0; i < 4; ++i) CHECK(prod[i] == b[i]);

  const Tensor row({1, 2}, {1, 2});
  const Tensor col({2, 1}, {3, 4});
  CHECK(matmul(row, col)[0] == 11.0);

  CHECK_THROWS_AS(matmul(row, row), DimensionError);
}

TEST_CASE("matmul matches the triple-loop oracle") {
  Rng rng(42);
  const Tensor a = random_matrix(rng, 4, 5);
  const Tensor b = random_matrix(rng, 5, 3);
  const Tensor got = matmul(a, b);
  const Tensor want = matmul_oracle(a, b);
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-13));
  }
}

TEST_CASE("matmul with the identity is exact") {
  Rng rng(7);
  const std::size_t n = 8;
  Tensor identity({n, n});
  for (std::size_t i = 0; i < n; ++i) identity.at(i, i) = 1.0;
  const Tensor a = random_matrix(rng, n, n);
  const Tensor prod = matmul(identity, a);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(prod[i] == a[i]);
}

TEST_CASE("map_unary elementwise values") {
  const Tensor x({2}, {0.0, 1.0});
  const Tensor e = map_unary(x, Unary::exp);
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == doctest::Approx(2.718281828459045).epsilon(1e-15));

  const Tensor c = map_unary(Tensor({2}, {-2.0, 3.0}), Unary::cube);
  CHECK(c[0] == -8.0);
  CHECK(c[1] == 27.0);

  const Tensor r = map_unary(Tensor({3}, {-1.0, 0.0, 2.0}), Unary::relu);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 2.0);

  CHECK(unary_from_string("tanh") == Unary::tanh);
  CHECK_THROWS_AS(unary_from_string("softplus"), ConfigError);
}

TEST_CASE("rms values and homogeneity") {
  CHECK(rms(Tensor({2}, {3.0, 4.0})) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(rms(Tensor::full({17}, -2.5)) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(rms(Tensor()), DomainError);

  // two-pass oracle with long-double accumulation
  Rng rng(3);
  Tensor x({100});
  for (std::size_t i = 0; i < 100; ++i) x[i] = rng.uniform(-5.0, 5.0);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < 100; ++i) acc += static_cast<long double>(x[i]) * x[i];
  const double want = static_cast<double>(std::sqrt(acc / 100.0L));
  CHECK(rms(x) == doctest::Approx(want).epsilon(1e-12));

  // rms(c*x) == |c| rms(x)
  const double c = -3.7;
  Tensor cx(x.shape());
  for (std::size_t i = 0; i < 100; ++i) cx[i] = c * x[i];
  CHECK(rms(cx) == doctest::Approx(std::fabs(c) * rms(x)).epsilon(1e-12));
}

TEST_CASE("reductions and argmax tie-break") {
  CHECK(argmax(Tensor({3}, {0.1, 0.7, 0.2})) == 1);
  CHECK(argmax(Tensor({2}, {0.5, 0.5})) == 0);
  CHECK(sum(Tensor({3}, {1, 2, 3})) == 6.0);

  const Tensor m({2, 3}, {1, 5, 3, 4, 2, 6});
  const Tensor col_sum = reduce(m, Reduce::sum, 0);
  CHECK(col_sum[0] == 5.0);
  CHECK(col_sum[1] == 7.0);
  CHECK(col_sum[2] == 9.0);
  const Tensor row_max = reduce(m, Reduce::max, 1);
  CHECK(row_max[0] == 5.0);
  CHECK(row_max[1] == 6.0);
  const auto row_arg = argmax(m, 1);
  CHECK(row_arg[0] == 1);
  CHECK(row_arg[1] == 2);

  CHECK_THROWS_AS(reduce(m, Reduce::sum, 2), DimensionError);
}

TEST_CASE("operations are bit-deterministic") {
  Rng rng(11);
  const Tensor a = random_matrix(rng, 6, 7);
  const Tensor b = random_matrix(rng, 7, 4);
  const Tensor p1 = matmul(a, b);
  const Tensor p2 = matmul(a, b);
  CHECK(std::memcmp(p1.data(), p2.data(), p1.size() * sizeof(double)) == 0);

  const Tensor e1 = map_unary(a, Unary::sigmoid);
  const Tensor e2 = map_unary(a, Unary::sigmoid);
  CHECK(std::memcmp(e1.data(), e2.data(), e1.size() * sizeof(double)) == 0);
}
