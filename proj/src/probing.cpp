#include "probeforge/probing.hpp"

#include <cmath>

#include "probeforge/errors.hpp"

namespace probeforge {

std::string_view to_string(Arity a) { return a == Arity::Unary ? "unary" : "binary"; }

std::string_view to_string(LossKind k) {
  return k == LossKind::SingleLabel ? "single_label_ce" : "multi_label_bce";
}

Arity parse_arity(std::string_view s) {
  if (s == "unary" || s == "u") return Arity::Unary;
  if (s == "binary" || s == "b") return Arity::Binary;
  throw ConfigError("unknown arity '" + std::string(s) + "'");
}

LossKind parse_loss_kind(std::string_view s) {
  if (s == "single_label_ce") return LossKind::SingleLabel;
  if (s == "multi_label_bce") return LossKind::MultiLabel;
  throw ConfigError("unknown loss kind '" + std::string(s) + "'");
}

LabelVocabulary::LabelVocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw DataError("label vocabulary: duplicate label '" + labels_[i] + "'");
    }
  }
}

std::optional<std::size_t> LabelVocabulary::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelVocabulary::index_of(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw LabelError("label '" + std::string(label) + "' is not in the vocabulary");
}

ProbeHead ProbeHead::init(Arity arity, LossKind loss, std::size_t d, std::size_t n_labels,
                          Rng& rng) {
  if (n_labels < 2) throw ConfigError("probe head needs at least 2 labels");
  const std::size_t width = d * (arity == Arity::Binary ? 2 : 1);
  const double bound = std::sqrt(6.0 / static_cast<double>(width + n_labels));
  Matrix w(width, n_labels);
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  return ProbeHead{arity, loss, Param("head.weight", std::move(w)),
                   Param("head.bias", Matrix(1, n_labels))};
}

Matrix select_span_repr(const Matrix& q_out, Span span, std::string_view context) {
  if (!span.valid_for(q_out.rows())) {
    std::string msg = "span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                      ") out of range for " + std::to_string(q_out.rows()) + " words";
    if (!context.empty()) msg = std::string(context) + ": " + msg;
    throw DataError(msg);
  }
  auto src = q_out.row(span.start);
  return Matrix(1, q_out.cols(), std::vector<double>(src.begin(), src.end()));
}

Matrix predict(const ProbeHead& head, const Matrix& q_out, Span span1, std::optional<Span> span2) {
  if ((head.arity == Arity::Binary) != span2.has_value()) {
    throw ConfigError(std::string("predict: ") + std::string(to_string(head.arity)) +
                      " head called with " + (span2 ? "two spans" : "one span"));
  }
  Matrix input = select_span_repr(q_out, span1);
  if (span2) {
    Matrix second = select_span_repr(q_out, *span2);
    std::vector<double> joined(input.values().begin(), input.values().end());
    joined.insert(joined.end(), second.values().begin(), second.values().end());
    const std::size_t width = joined.size();
    input = Matrix(1, width, std::move(joined));
  }
  return head_forward(head, input);
}

Matrix head_forward(const ProbeHead& head, const Matrix& inputs) {
  return add_row(matmul(inputs, head.weight.value), head.bias.value);
}

Matrix head_backward(ProbeHead& head, const Matrix& inputs, const Matrix& dlogits) {
  add_inplace(head.weight.grad, matmul_tn(inputs, dlogits));
  add_inplace(head.bias.grad, colsum(dlogits));
  return matmul_nt(dlogits, head.weight.value);
}

LossResult task_loss(const ProbeHead& head, const Matrix& logits, const Targets& targets) {
  if (head.loss == LossKind::SingleLabel) {
    const auto* idx = std::get_if<std::vector<std::size_t>>(&targets);
    if (idx == nullptr) throw ConfigError("single-label head given multi-hot targets");
    return softmax_cross_entropy(logits, *idx);
  }
  const auto* hot = std::get_if<Matrix>(&targets);
  if (hot == nullptr) throw ConfigError("multi-label head given class-index targets");
  return bce_with_logits(logits, *hot);
}

}  // namespace probeforge
