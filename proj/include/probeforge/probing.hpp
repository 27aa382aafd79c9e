#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "probeforge/numcore.hpp"
#include "probeforge/rng.hpp"

namespace probeforge {

enum class Arity { Unary, Binary };
enum class LossKind { SingleLabel, MultiLabel };

std::string_view to_string(Arity a);
std::string_view to_string(LossKind k);
Arity parse_arity(std::string_view s);
LossKind parse_loss_kind(std::string_view s);

/// Word span [start, end).
struct Span {
  std::uint32_t start = 0;
  std::uint32_t end = 0;

  bool valid_for(std::size_t n_words) const { return start < end && end <= n_words; }
  friend bool operator==(const Span&, const Span&) = default;
};

class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  // Throws DataError on duplicates.
  explicit LabelVocabulary(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& at(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> find(std::string_view label) const;
  // Throws LabelError for unknown labels.
  std::size_t index_of(std::string_view label) const;

  friend bool operator==(const LabelVocabulary& a, const LabelVocabulary& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Single affine layer over the (concatenated) first-word span representations.
struct ProbeHead {
  Arity arity = Arity::Unary;
  LossKind loss = LossKind::SingleLabel;
  Param weight;  // (d * arity) x labels
  Param bias;    // 1 x labels

  static ProbeHead init(Arity arity, LossKind loss, std::size_t d, std::size_t n_labels, Rng& rng);

  std::size_t input_width() const { return weight.value.rows(); }
  std::size_t n_labels() const { return weight.value.cols(); }
  std::vector<Param*> params() { return {&weight, &bias}; }
};

// Single-label targets are class indices; multi-label targets are multi-hot rows.
using Targets = std::variant<std::vector<std::size_t>, Matrix>;

/// Row of q_out at the span's first word, as a 1 x d matrix. `context` names
/// the example in the error message.
Matrix select_span_repr(const Matrix& q_out, Span span, std::string_view context = {});

/// Logits (1 x labels) for one example.
Matrix predict(const ProbeHead& head, const Matrix& q_out, Span span1,
               std::optional<Span> span2 = std::nullopt);

// Batched head: inputs are one row per example.
Matrix head_forward(const ProbeHead& head, const Matrix& inputs);
// Accumulates head gradients; returns d loss / d inputs.
Matrix head_backward(ProbeHead& head, const Matrix& inputs, const Matrix& dlogits);

LossResult task_loss(const ProbeHead& head, const Matrix& logits, const Targets& targets);

}  // namespace probeforge
