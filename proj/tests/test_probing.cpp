#include <doctest.h>

#include "oracles.hpp"
#include "probeforge/errors.hpp"
#include "probeforge/probing.hpp"

using namespace probeforge;

TEST_SUITE("probing") {

TEST_CASE("label vocabulary lookups") {
  const LabelVocabulary v({"ARG0", "ARG1", "O"});
  CHECK(v.size() == 3);
  CHECK(v.index_of("ARG1") == 1);
  CHECK_FALSE(v.find("ARG9").has_value());
  CHECK_THROWS_AS(v.index_of("ARG9"), LabelError);
  CHECK_THROWS_AS(LabelVocabulary({"a", "b", "a"}), DataError);
}

TEST_CASE("arity and loss names") {
  CHECK(parse_arity("unary") == Arity::Unary);
  CHECK(parse_arity("b") == Arity::Binary);
  CHECK(parse_loss_kind("multi_label_bce") == LossKind::MultiLabel);
  CHECK(to_string(LossKind::SingleLabel) == "single_label_ce");
  CHECK_THROWS_AS(parse_arity("ternary"), ConfigError);
}

TEST_CASE("span representation is the first word's row") {
  const Matrix q{{1, 2}, {3, 4}, {5, 6}};
  CHECK(select_span_repr(q, {1, 3}) == Matrix{{3, 4}});
  CHECK_THROWS_AS(select_span_repr(q, {2, 4}), DataError);
  CHECK_THROWS_AS(select_span_repr(q, {1, 1}), DataError);
  CHECK_THROWS_WITH(select_span_repr(q, {3, 4}, "examples.jsonl:7"),
                    doctest::Contains("examples.jsonl:7"));
}

TEST_CASE("binary heads concatenate both span representations") {
  Rng rng(1);
  auto head = ProbeHead::init(Arity::Binary, LossKind::SingleLabel, 2, 3, rng);
  CHECK(head.input_width() == 4);
  const Matrix q{{1, 2}, {3, 4}, {5, 6}};
  const Matrix logits = predict(head, q, {0, 1}, Span{2, 3});
  const Matrix manual = head_forward(head, Matrix{{1, 2, 5, 6}});
  CHECK(logits == manual);
  CHECK_THROWS_AS(predict(head, q, {0, 1}), ConfigError);
  auto unary = ProbeHead::init(Arity::Unary, LossKind::SingleLabel, 2, 3, rng);
  CHECK_THROWS_AS(predict(unary, q, {0, 1}, Span{1, 2}), ConfigError);
}

TEST_CASE("heads need two labels") {
  Rng rng(2);
  CHECK_THROWS_AS(ProbeHead::init(Arity::Unary, LossKind::SingleLabel, 4, 1, rng), ConfigError);
}

TEST_CASE("head gradients match central differences") {
  Rng rng(3);
  for (auto loss : {LossKind::SingleLabel, LossKind::MultiLabel}) {
    auto head = ProbeHead::init(Arity::Unary, loss, 3, 4, rng);
    for (double& v : head.bias.value.values()) v = rng.normal();
    Matrix in(5, 3);
    for (double& v : in.values()) v = rng.normal();
    Targets t;
    if (loss == LossKind::SingleLabel) {
      t = std::vector<std::size_t>{0, 3, 1, 1, 2};
    } else {
      Matrix hot(5, 4);
      for (double& v : hot.values()) v = static_cast<double>(rng.below(2));
      t = hot;
    }
    auto objective = [&] { return task_loss(head, head_forward(head, in), t).loss; };
    head.weight.zero_grad();
    head.bias.zero_grad();
    const auto r = task_loss(head, head_forward(head, in), t);
    const Matrix din = head_backward(head, in, r.grad);

    std::vector<double*> xs;
    std::vector<double> analytic;
    for (auto* m : {&in, &head.weight.value, &head.bias.value})
      for (double& v : m->values()) xs.push_back(&v);
    for (const Matrix* g : std::vector<const Matrix*>{&din, &head.weight.grad, &head.bias.grad})
      analytic.insert(analytic.end(), g->values().begin(), g->values().end());
    const auto numeric = oracle::numeric_gradient(objective, xs, 1e-6);
    for (std::size_t i = 0; i < xs.size(); ++i)
      CHECK(analytic[i] == doctest::Approx(numeric[i]).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("target kind must match the loss") {
  Rng rng(4);
  auto single = ProbeHead::init(Arity::Unary, LossKind::SingleLabel, 2, 2, rng);
  auto multi = ProbeHead::init(Arity::Unary, LossKind::MultiLabel, 2, 2, rng);
  const Matrix logits(1, 2);
  CHECK_THROWS_AS(task_loss(single, logits, Matrix(1, 2)), ConfigError);
  CHECK_THROWS_AS(task_loss(multi, logits, std::vector<std::size_t>{0}), ConfigError);
}

}
