#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probeforge/graph.hpp"
#include "probeforge/numcore.hpp"
#include "probeforge/probing.hpp"

namespace probeforge {

enum class Split { Train, Dev, Test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
  friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

struct DatasetManifest {
  std::string task_name;
  Arity arity = Arity::Unary;
  LossKind loss_kind = LossKind::SingleLabel;
  std::uint32_t embedding_dim = 0;
  std::uint32_t n_layers = 0;
  std::string label_vocabulary = "labels.json";
  SplitSizes split_sizes;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct EdgeProbingExample {
  // Index of the sentence's record in embeddings.bin.
  std::uint64_t sentence_id = 0;
  std::vector<std::string> tokens;
  // First-subword row of each word.
  std::vector<std::uint32_t> subword_alignment;
  std::vector<Edge> edges;
  Span span1;
  std::optional<Span> span2;
  std::vector<std::string> labels;
  Split split = Split::Train;

  SentenceGraph graph() const {
    return {static_cast<std::uint32_t>(tokens.size()), edges};
  }
  friend bool operator==(const EdgeProbingExample&, const EdgeProbingExample&) = default;
};

struct SentenceEmbedding {
  std::uint32_t n_subwords = 0;
  // n_layers blocks of n_subwords x d floats, row-major.
  std::vector<float> values;
  friend bool operator==(const SentenceEmbedding&, const SentenceEmbedding&) = default;
};

// embeddings.bin, little-endian:
//   "EPRB" | u32 version=1 | u32 d | u32 n_layers | u64 n_sentences
//   n_sentences x (u64 payload_offset, u32 n_subwords)
//   per sentence: n_layers x n_subwords x d float32
// payload_offset is absolute; payloads are contiguous in sentence order.
class EmbeddingStore {
 public:
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 24;
  static constexpr std::size_t kIndexRecordBytes = 12;

  EmbeddingStore() = default;
  EmbeddingStore(std::uint32_t d, std::uint32_t n_layers, std::vector<SentenceEmbedding> sentences);

  static EmbeddingStore read(const std::filesystem::path& path);
  static EmbeddingStore parse(std::span<const std::uint8_t> bytes, std::string_view source);
  std::vector<std::uint8_t> serialize() const;
  void write(const std::filesystem::path& path) const;

  std::uint32_t dim() const noexcept { return d_; }
  std::uint32_t n_layers() const noexcept { return n_layers_; }
  std::size_t n_sentences() const noexcept { return sentences_.size(); }
  std::uint32_t n_subwords(std::size_t sentence) const { return sentences_.at(sentence).n_subwords; }
  const SentenceEmbedding& sentence(std::size_t i) const { return sentences_.at(i); }

  /// Rows of one layer for the given subword indices, promoted to double.
  Matrix gather(std::size_t sentence, std::uint32_t layer,
                std::span<const std::uint32_t> rows) const;

  /// FNV-1a over the serialized bytes.
  std::uint64_t checksum() const;

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  std::uint32_t d_ = 0;
  std::uint32_t n_layers_ = 0;
  std::vector<SentenceEmbedding> sentences_;
};

struct Dataset {
  DatasetManifest manifest;
  LabelVocabulary vocab;
  std::vector<EdgeProbingExample> examples;
  EmbeddingStore embeddings;

  std::vector<std::size_t> split_indices(Split s) const;
};

struct ValidationIssue {
  std::string file;
  // 1-based line for JSONL, byte offset for embeddings.bin, 0 when not applicable.
  std::size_t location = 0;
  std::string field;
  std::string message;

  std::string to_string() const;
};

/// Reads and checks every file of a dataset directory; never throws for data problems.
struct ValidationReport {
  std::vector<ValidationIssue> issues;
  std::optional<Dataset> dataset;  // set only when issues is empty

  bool ok() const { return issues.empty(); }
};

ValidationReport validate_dataset(const std::filesystem::path& dir);

/// Loads and validates; throws DataError carrying the first issue.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes manifest.json, labels.json, examples.jsonl and embeddings.bin.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

/// Word-level features: the first-subword row of every word at `layer`.
Matrix word_features(const Dataset& ds, const EdgeProbingExample& ex, std::uint32_t layer);

/// |span2.start - span1.start| in words.
std::uint32_t span_distance(const EdgeProbingExample& ex);

class SpanDistanceBuckets {
 public:
  // Default boundaries {3, 6, 9, 12, 15}: [0,3], (3,6], ..., (15, inf).
  SpanDistanceBuckets();
  // Upper bounds of every bucket but the last; must be strictly increasing.
  explicit SpanDistanceBuckets(std::vector<std::uint32_t> bounds);

  std::size_t count() const { return bounds_.size() + 1; }
  std::size_t bucket_of(std::uint32_t distance) const;
  std::string label(std::size_t bucket) const;
  const std::vector<std::uint32_t>& bounds() const { return bounds_; }

 private:
  std::vector<std::uint32_t> bounds_;
};

}  // namespace probeforge
