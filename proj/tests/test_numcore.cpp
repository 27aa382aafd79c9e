#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "probeforge/errors.hpp"
#include "probeforge/numcore.hpp"
#include "probeforge/rng.hpp"

using namespace probeforge;

TEST_SUITE("numcore") {

TEST_CASE("matmul on a hand-computed product") {
  const Matrix a{{1, 2}, {3, 4}, {5, 6}};
  const Matrix b{{1, 0, 2}, {0, 1, 3}};
  const Matrix expected{{1, 2, 8}, {3, 4, 18}, {5, 6, 28}};
  CHECK(matmul(a, b) == expected);
  CHECK(matmul_tn(transpose(a), b) == expected);
  CHECK(matmul_nt(a, transpose(b)) == expected);
}

TEST_CASE("shape mismatches raise dimension errors") {
  const Matrix a(2, 3), b(2, 3);
  CHECK_THROWS_AS(matmul(a, b), DimensionError);
  CHECK_THROWS_AS(add(a, Matrix(3, 2)), DimensionError);
  CHECK_THROWS_AS(add_row(a, Matrix(1, 2)), DimensionError);
  CHECK_THROWS_WITH(matmul(a, b), doctest::Contains("2x3"));
}

TEST_CASE("sigmoid is finite at extreme inputs") {
  CHECK(sigmoid(1000.0) == 1.0);
  CHECK(sigmoid(-1000.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(sigmoid(-1000.0)));
  CHECK(sigmoid(0.0) == 0.5);
}

TEST_CASE("softmax cross-entropy of uniform logits is log C") {
  const Matrix logits(2, 4, 0.0);
  const std::vector<std::size_t> t{0, 3};
  const auto r = softmax_cross_entropy(logits, t);
  CHECK(r.loss == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  // Gradient rows are (softmax - onehot) / batch.
  CHECK(r.grad(0, 0) == doctest::Approx((0.25 - 1.0) / 2.0));
  CHECK(r.grad(1, 1) == doctest::Approx(0.25 / 2.0));
}

TEST_CASE("softmax cross-entropy is non-negative and stable for large logits") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix z(3, 5);
    for (double& v : z.values()) v = 300.0 * rng.normal();
    const std::vector<std::size_t> t{rng.below(5), rng.below(5), rng.below(5)};
    const auto r = softmax_cross_entropy(z, t);
    CHECK(r.loss >= 0.0);
    CHECK(std::isfinite(r.loss));
    CHECK(all_finite(r.grad));
  }
}

TEST_CASE("loss gradients match central differences") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix z(3, 4);
    for (double& v : z.values()) v = rng.normal();
    const std::vector<std::size_t> t{rng.below(4), rng.below(4), rng.below(4)};
    Matrix hot(3, 4);
    for (double& v : hot.values()) v = static_cast<double>(rng.below(2));

    std::vector<double*> xs;
    for (double& v : z.values()) xs.push_back(&v);
    const auto ce = softmax_cross_entropy(z, t).grad;
    const auto bce = bce_with_logits(z, hot).grad;
    const auto num_ce = oracle::numeric_gradient([&] { return softmax_cross_entropy(z, t).loss; }, xs, 1e-6);
    const auto num_bce = oracle::numeric_gradient([&] { return bce_with_logits(z, hot).loss; }, xs, 1e-6);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CHECK(ce.values()[i] == doctest::Approx(num_ce[i]).epsilon(1e-6));
      CHECK(bce.values()[i] == doctest::Approx(num_bce[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("binary cross-entropy at zero logits is log 2") {
  const Matrix z(2, 3, 0.0);
  const Matrix t{{1, 0, 1}, {0, 0, 1}};
  CHECK(bce_with_logits(z, t).loss == doctest::Approx(std::log(2.0)));
  const Matrix big{{800, -800, 800}, {-800, -800, 800}};
  CHECK(bce_with_logits(big, t).loss == doctest::Approx(0.0));
}

TEST_CASE("labels outside the vocabulary raise label errors") {
  const Matrix z(1, 3);
  const std::vector<std::size_t> t{3};
  CHECK_THROWS_AS(softmax_cross_entropy(z, t), LabelError);
  CHECK_THROWS_AS(bce_with_logits(z, Matrix{{0, 0.5, 1}}), LabelError);
}

TEST_CASE("first Adam step moves each weight by lr against the gradient sign") {
  Param p("w", Matrix{{1.0, -2.0, 0.5}});
  p.grad = Matrix{{0.3, -4.0, 1e-3}};
  adam_step(p, AdamConfig{});
  CHECK(p.value(0, 0) == doctest::Approx(1.0 - 1e-3).epsilon(1e-9));
  CHECK(p.value(0, 1) == doctest::Approx(-2.0 + 1e-3).epsilon(1e-9));
  CHECK(p.value(0, 2) == doctest::Approx(0.5 - 1e-3).epsilon(1e-6));
  CHECK(p.grad == Matrix(1, 3));
  CHECK(p.step == 1);
}

TEST_CASE("Adam rejects non-finite gradients and names the parameter") {
  Param p("head.weight", Matrix(2, 2));
  p.grad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(p, AdamConfig{}), OptimizerError);
  p.grad(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH(adam_step(p, AdamConfig{}), doctest::Contains("head.weight"));
}

TEST_CASE("rng sequences depend only on the seed") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs |= x != c.normal();
  }
  CHECK(differs);
  Rng r(5);
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
  // Frozen first draw of mt19937_64 with its default seed.
  Rng d(5489);
  CHECK(d.next_u64() == 14514284786278117030ULL);
}

}
