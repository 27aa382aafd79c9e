#include "probeforge/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "probeforge/errors.hpp"

namespace probeforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw DataError("unknown split '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// embeddings.bin

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

std::size_t payload_floats(std::uint32_t d, std::uint32_t n_layers, std::uint32_t n_subwords) {
  return static_cast<std::size_t>(d) * n_layers * n_subwords;
}

[[noreturn]] void bad_store(std::string_view source, std::size_t offset, const std::string& msg) {
  throw DataError(std::string(source) + " @" + std::to_string(offset) + ": " + msg);
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::uint32_t d, std::uint32_t n_layers,
                               std::vector<SentenceEmbedding> sentences)
    : d_(d), n_layers_(n_layers), sentences_(std::move(sentences)) {
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    const auto& s = sentences_[i];
    if (s.values.size() != payload_floats(d_, n_layers_, s.n_subwords)) {
      throw DataError("embedding store: sentence " + std::to_string(i) + " holds " +
                      std::to_string(s.values.size()) + " floats, expected " +
                      std::to_string(payload_floats(d_, n_layers_, s.n_subwords)));
    }
  }
}

std::vector<std::uint8_t> EmbeddingStore::serialize() const {
  std::vector<std::uint8_t> out;
  std::size_t total = kHeaderBytes + kIndexRecordBytes * sentences_.size();
  for (const auto& s : sentences_) total += s.values.size() * 4;
  out.reserve(total);
  for (char c : {'E', 'P', 'R', 'B'}) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, kVersion);
  put_u32(out, d_);
  put_u32(out, n_layers_);
  put_u64(out, sentences_.size());
  std::uint64_t offset = kHeaderBytes + kIndexRecordBytes * sentences_.size();
  for (const auto& s : sentences_) {
    put_u64(out, offset);
    put_u32(out, s.n_subwords);
    offset += s.values.size() * 4;
  }
  for (const auto& s : sentences_)
    for (float f : s.values) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

EmbeddingStore EmbeddingStore::parse(std::span<const std::uint8_t> b, std::string_view source) {
  if (b.size() < kHeaderBytes) {
    bad_store(source, 0, "file holds " + std::to_string(b.size()) + " bytes, header needs " +
                             std::to_string(kHeaderBytes));
  }
  if (std::memcmp(b.data(), "EPRB", 4) != 0) bad_store(source, 0, "bad magic (expected EPRB)");
  const std::uint32_t version = get_u32(b, 4);
  if (version != kVersion) {
    bad_store(source, 4, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t d = get_u32(b, 8);
  const std::uint32_t n_layers = get_u32(b, 12);
  const std::uint64_t n_sentences = get_u64(b, 16);
  if (d == 0) bad_store(source, 8, "embedding dimension is 0");
  if (n_layers == 0) bad_store(source, 12, "layer count is 0");
  if (n_sentences > (b.size() - kHeaderBytes) / kIndexRecordBytes) {
    bad_store(source, 16, "index for " + std::to_string(n_sentences) +
                              " sentences exceeds file length " + std::to_string(b.size()));
  }
  const std::size_t payload_start = kHeaderBytes + kIndexRecordBytes * n_sentences;

  std::vector<SentenceEmbedding> sentences(n_sentences);
  std::uint64_t expected_offset = payload_start;
  for (std::size_t i = 0; i < n_sentences; ++i) {
    const std::size_t rec = kHeaderBytes + kIndexRecordBytes * i;
    const std::uint64_t offset = get_u64(b, rec);
    const std::uint32_t n_sub = get_u32(b, rec + 8);
    if (offset != expected_offset) {
      bad_store(source, rec, "sentence " + std::to_string(i) + " payload offset " +
                                 std::to_string(offset) + ", expected " +
                                 std::to_string(expected_offset));
    }
    sentences[i].n_subwords = n_sub;
    expected_offset += payload_floats(d, n_layers, n_sub) * 4;
  }
  if (expected_offset != b.size()) {
    bad_store(source, b.size(), "file length " + std::to_string(b.size()) +
                                    " bytes, header implies " + std::to_string(expected_offset));
  }
  std::size_t at = payload_start;
  for (auto& s : sentences) {
    s.values.resize(payload_floats(d, n_layers, s.n_subwords));
    for (float& f : s.values) {
      f = std::bit_cast<float>(get_u32(b, at));
      at += 4;
    }
  }
  return EmbeddingStore(d, n_layers, std::move(sentences));
}

EmbeddingStore EmbeddingStore::read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse(bytes, path.string());
}

void EmbeddingStore::write(const fs::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

Matrix EmbeddingStore::gather(std::size_t sentence, std::uint32_t layer,
                              std::span<const std::uint32_t> rows) const {
  const SentenceEmbedding& s = sentences_.at(sentence);
  if (layer >= n_layers_) {
    throw DataError("layer " + std::to_string(layer) + " requested from a store with " +
                    std::to_string(n_layers_) + " layers");
  }
  Matrix out(rows.size(), d_);
  const std::size_t block = static_cast<std::size_t>(s.n_subwords) * d_;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= s.n_subwords) {
      throw DataError("sentence " + std::to_string(sentence) + ": subword row " +
                      std::to_string(rows[r]) + " out of range (" +
                      std::to_string(s.n_subwords) + " subwords)");
    }
    const float* src = s.values.data() + layer * block + static_cast<std::size_t>(rows[r]) * d_;
    auto dst = out.row(r);
    for (std::size_t c = 0; c < d_; ++c) dst[c] = static_cast<double>(src[c]);
  }
  return out;
}

std::uint64_t EmbeddingStore::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t byte : serialize()) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Dataset files

std::vector<std::size_t> Dataset::split_indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (examples[i].split == s) out.push_back(i);
  return out;
}

std::string ValidationIssue::to_string() const {
  std::ostringstream os;
  os << file;
  if (location != 0) os << ":" << location;
  if (!field.empty()) os << " [" << field << "]";
  os << ": " << message;
  return os.str();
}

namespace {

json span_to_json(const Span& s) { return json::array({s.start, s.end}); }

json example_to_json(const EdgeProbingExample& ex) {
  json edges = json::array();
  for (const Edge& e : ex.edges) edges.push_back(json::array({e.head, e.dependent}));
  json j;
  j["sentence_id"] = ex.sentence_id;
  j["tokens"] = ex.tokens;
  j["subword_alignment"] = ex.subword_alignment;
  j["edges"] = std::move(edges);
  j["span1"] = span_to_json(ex.span1);
  j["span2"] = ex.span2 ? span_to_json(*ex.span2) : json(nullptr);
  j["labels"] = ex.labels;
  j["split"] = std::string(to_string(ex.split));
  return j;
}

json manifest_to_json(const DatasetManifest& m) {
  return json{{"task_name", m.task_name},
              {"arity", std::string(to_string(m.arity))},
              {"loss_kind", std::string(to_string(m.loss_kind))},
              {"embedding_dim", m.embedding_dim},
              {"n_layers", m.n_layers},
              {"label_vocabulary", m.label_vocabulary},
              {"split_sizes",
               {{"train", m.split_sizes.train},
                {"dev", m.split_sizes.dev},
                {"test", m.split_sizes.test}}}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

// Collects issues while reading; each helper returns false after recording one.
class Checker {
 public:
  explicit Checker(std::vector<ValidationIssue>& issues) : issues_(issues) {}

  void fail(const std::string& file, std::size_t loc, const std::string& field,
            const std::string& msg) {
    issues_.push_back({file, loc, field, msg});
  }

  template <typename T>
  bool get(const json& obj, const char* key, T& out, const std::string& file, std::size_t loc) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      fail(file, loc, key, "missing field");
      return false;
    }
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      fail(file, loc, key, std::string("wrong type: ") + e.what());
      return false;
    }
    return true;
  }

 private:
  std::vector<ValidationIssue>& issues_;
};

std::optional<json> read_json_file(const fs::path& path, Checker& check) {
  std::ifstream in(path);
  if (!in) {
    check.fail(path.string(), 0, "", "cannot open");
    return std::nullopt;
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    check.fail(path.string(), 0, "", std::string("invalid JSON: ") + e.what());
    return std::nullopt;
  }
}

std::optional<Span> parse_span(const json& j, const std::string& file, std::size_t line,
                               const char* field, Checker& check) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned()) {
    check.fail(file, line, field, "expected a two-element array of non-negative integers");
    return std::nullopt;
  }
  return Span{j[0].get<std::uint32_t>(), j[1].get<std::uint32_t>()};
}

std::optional<EdgeProbingExample> parse_example(const json& j, const std::string& file,
                                                std::size_t line, Checker& check) {
  if (!j.is_object()) {
    check.fail(file, line, "", "expected a JSON object");
    return std::nullopt;
  }
  EdgeProbingExample ex;
  bool ok = true;
  ok &= check.get(j, "sentence_id", ex.sentence_id, file, line);
  ok &= check.get(j, "tokens", ex.tokens, file, line);
  ok &= check.get(j, "subword_alignment", ex.subword_alignment, file, line);
  ok &= check.get(j, "labels", ex.labels, file, line);
  std::string split;
  if (check.get(j, "split", split, file, line)) {
    try {
      ex.split = parse_split(split);
    } catch (const DataError& e) {
      check.fail(file, line, "split", e.what());
      ok = false;
    }
  } else {
    ok = false;
  }
  std::vector<std::array<std::uint32_t, 2>> edges;
  if (check.get(j, "edges", edges, file, line)) {
    for (const auto& e : edges) ex.edges.push_back({e[0], e[1]});
  } else {
    ok = false;
  }
  if (!j.contains("span1")) {
    check.fail(file, line, "span1", "missing field");
    ok = false;
  } else if (auto s = parse_span(j["span1"], file, line, "span1", check)) {
    ex.span1 = *s;
  } else {
    ok = false;
  }
  if (!j.contains("span2")) {
    check.fail(file, line, "span2", "missing field (use null for unary examples)");
    ok = false;
  } else if (!j["span2"].is_null()) {
    if (auto s = parse_span(j["span2"], file, line, "span2", check)) {
      ex.span2 = *s;
    } else {
      ok = false;
    }
  }
  if (!ok) return std::nullopt;
  return ex;
}

// Semantic checks of one parsed example against the manifest, vocabulary and store.
void check_example(const EdgeProbingExample& ex, const DatasetManifest& m,
                   const LabelVocabulary& vocab, const EmbeddingStore* store,
                   const std::string& file, std::size_t line, Checker& check) {
  const std::size_t n = ex.tokens.size();
  if (n == 0) check.fail(file, line, "tokens", "sentence has no words");
  if (ex.subword_alignment.size() != n) {
    check.fail(file, line, "subword_alignment",
               "length " + std::to_string(ex.subword_alignment.size()) + " != " +
                   std::to_string(n) + " tokens");
  }
  for (std::size_t i = 1; i < ex.subword_alignment.size(); ++i) {
    if (ex.subword_alignment[i] <= ex.subword_alignment[i - 1]) {
      check.fail(file, line, "subword_alignment",
                 "not strictly increasing at word " + std::to_string(i));
      break;
    }
  }
  if (store != nullptr) {
    if (ex.sentence_id >= store->n_sentences()) {
      check.fail(file, line, "sentence_id",
                 std::to_string(ex.sentence_id) + " not in embeddings.bin (" +
                     std::to_string(store->n_sentences()) + " sentences)");
    } else if (!ex.subword_alignment.empty() &&
               ex.subword_alignment.back() >= store->n_subwords(ex.sentence_id)) {
      check.fail(file, line, "subword_alignment",
                 "row " + std::to_string(ex.subword_alignment.back()) + " beyond " +
                     std::to_string(store->n_subwords(ex.sentence_id)) + " subwords");
    }
  }
  if (n > 0) {
    try {
      ex.graph().validate();
    } catch (const GraphError& e) {
      check.fail(file, line, "edges", e.what());
    }
  }
  if (!ex.span1.valid_for(n)) {
    check.fail(file, line, "span1", "invalid for " + std::to_string(n) + " words");
  }
  if (m.arity == Arity::Binary && !ex.span2) {
    check.fail(file, line, "span2", "binary task needs a second span");
  }
  if (m.arity == Arity::Unary && ex.span2) {
    check.fail(file, line, "span2", "unary task must have span2 = null");
  }
  if (ex.span2 && !ex.span2->valid_for(n)) {
    check.fail(file, line, "span2", "invalid for " + std::to_string(n) + " words");
  }
  if (m.loss_kind == LossKind::SingleLabel && ex.labels.size() != 1) {
    check.fail(file, line, "labels",
               "single-label task needs exactly one label, got " + std::to_string(ex.labels.size()));
  }
  std::vector<std::string> seen;
  for (const auto& l : ex.labels) {
    if (!vocab.find(l)) check.fail(file, line, "labels", "unknown label '" + l + "'");
    if (std::find(seen.begin(), seen.end(), l) != seen.end()) {
      check.fail(file, line, "labels", "duplicate label '" + l + "'");
    }
    seen.push_back(l);
  }
}

}  // namespace

ValidationReport validate_dataset(const fs::path& dir) {
  ValidationReport report;
  Checker check(report.issues);
  if (!fs::is_directory(dir)) {
    check.fail(dir.string(), 0, "", "dataset directory does not exist");
    return report;
  }

  // manifest.json
  const fs::path manifest_path = dir / "manifest.json";
  DatasetManifest manifest;
  bool manifest_ok = false;
  if (auto j = read_json_file(manifest_path, check)) {
    const std::string f = manifest_path.string();
    std::string arity, loss;
    bool ok = j->is_object();
    if (!ok) check.fail(f, 0, "", "expected a JSON object");
    if (ok) {
      ok &= check.get(*j, "task_name", manifest.task_name, f, 0);
      ok &= check.get(*j, "arity", arity, f, 0);
      ok &= check.get(*j, "loss_kind", loss, f, 0);
      ok &= check.get(*j, "embedding_dim", manifest.embedding_dim, f, 0);
      ok &= check.get(*j, "n_layers", manifest.n_layers, f, 0);
      ok &= check.get(*j, "label_vocabulary", manifest.label_vocabulary, f, 0);
      json sizes;
      if (check.get(*j, "split_sizes", sizes, f, 0)) {
        ok &= check.get(sizes, "train", manifest.split_sizes.train, f, 0);
        ok &= check.get(sizes, "dev", manifest.split_sizes.dev, f, 0);
        ok &= check.get(sizes, "test", manifest.split_sizes.test, f, 0);
      } else {
        ok = false;
      }
    }
    if (ok) {
      try {
        manifest.arity = parse_arity(arity);
      } catch (const Error& e) {
        check.fail(f, 0, "arity", e.what());
        ok = false;
      }
      try {
        manifest.loss_kind = parse_loss_kind(loss);
      } catch (const Error& e) {
        check.fail(f, 0, "loss_kind", e.what());
        ok = false;
      }
    }
    manifest_ok = ok;
  }

  // labels.json
  LabelVocabulary vocab;
  bool vocab_ok = false;
  const fs::path labels_path =
      dir / (manifest_ok ? manifest.label_vocabulary : std::string("labels.json"));
  if (auto j = read_json_file(labels_path, check)) {
    std::vector<std::string> labels;
    if (j->is_object() && check.get(*j, "labels", labels, labels_path.string(), 0)) {
      try {
        vocab = LabelVocabulary(std::move(labels));
        vocab_ok = true;
        if (vocab.size() < 2) {
          check.fail(labels_path.string(), 0, "labels", "vocabulary needs at least 2 labels");
          vocab_ok = false;
        }
      } catch (const DataError& e) {
        check.fail(labels_path.string(), 0, "labels", e.what());
      }
    } else if (!j->is_object()) {
      check.fail(labels_path.string(), 0, "", "expected a JSON object");
    }
  }

  // embeddings.bin
  std::optional<EmbeddingStore> store;
  const fs::path emb_path = dir / "embeddings.bin";
  try {
    store = EmbeddingStore::read(emb_path);
  } catch (const DataError& e) {
    check.fail(emb_path.string(), 0, "", e.what());
  }
  if (store && manifest_ok) {
    if (store->dim() != manifest.embedding_dim) {
      check.fail(emb_path.string(), 8, "d",
                 std::to_string(store->dim()) + " != manifest embedding_dim " +
                     std::to_string(manifest.embedding_dim));
    }
    if (store->n_layers() != manifest.n_layers) {
      check.fail(emb_path.string(), 12, "n_layers",
                 std::to_string(store->n_layers()) + " != manifest n_layers " +
                     std::to_string(manifest.n_layers));
    }
  }

  // examples.jsonl
  std::vector<EdgeProbingExample> examples;
  const fs::path ex_path = dir / "examples.jsonl";
  std::ifstream in(ex_path);
  if (!in) {
    check.fail(ex_path.string(), 0, "", "cannot open");
  } else {
    const std::string f = ex_path.string();
    std::string text;
    std::size_t line = 0;
    // sentence id -> (line of first example) for cross-example consistency.
    std::map<std::uint64_t, std::size_t> first_of_sentence;
    while (std::getline(in, text)) {
      ++line;
      if (text.empty()) continue;
      json j;
      try {
        j = json::parse(text);
      } catch (const json::parse_error& e) {
        check.fail(f, line, "", std::string("invalid JSON: ") + e.what());
        continue;
      }
      auto ex = parse_example(j, f, line, check);
      if (!ex) continue;
      if (manifest_ok && vocab_ok) {
        check_example(*ex, manifest, vocab, store ? &*store : nullptr, f, line, check);
      }
      auto [it, inserted] = first_of_sentence.emplace(ex->sentence_id, examples.size());
      if (!inserted) {
        const auto& first = examples[it->second];
        if (first.tokens != ex->tokens || first.subword_alignment != ex->subword_alignment ||
            first.edges != ex->edges) {
          check.fail(f, line, "sentence_id",
                     "sentence " + std::to_string(ex->sentence_id) +
                         " has tokens, alignment or edges differing from an earlier example");
        }
      }
      examples.push_back(std::move(*ex));
    }
  }

  if (manifest_ok) {
    SplitSizes counted;
    for (const auto& ex : examples) {
      if (ex.split == Split::Train) ++counted.train;
      if (ex.split == Split::Dev) ++counted.dev;
      if (ex.split == Split::Test) ++counted.test;
    }
    if (report.issues.empty() && counted != manifest.split_sizes) {
      check.fail(manifest_path.string(), 0, "split_sizes",
                 "manifest declares " + std::to_string(manifest.split_sizes.train) + "/" +
                     std::to_string(manifest.split_sizes.dev) + "/" +
                     std::to_string(manifest.split_sizes.test) + " but examples.jsonl holds " +
                     std::to_string(counted.train) + "/" + std::to_string(counted.dev) + "/" +
                     std::to_string(counted.test));
    }
  }

  if (report.issues.empty()) {
    report.dataset = Dataset{std::move(manifest), std::move(vocab), std::move(examples),
                             std::move(*store)};
  }
  return report;
}

Dataset load_dataset(const fs::path& dir) {
  ValidationReport report = validate_dataset(dir);
  if (!report.ok()) {
    std::string msg = report.issues.front().to_string();
    if (report.issues.size() > 1) {
      msg += " (and " + std::to_string(report.issues.size() - 1) + " more issues)";
    }
    throw DataError(msg);
  }
  return std::move(*report.dataset);
}

void write_dataset(const Dataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(dir.string() + ": cannot create directory: " + ec.message());
  write_text(dir / "manifest.json", manifest_to_json(ds.manifest).dump(2) + "\n");
  write_text(dir / ds.manifest.label_vocabulary,
             json{{"labels", ds.vocab.labels()}}.dump(2) + "\n");
  std::string lines;
  for (const auto& ex : ds.examples) lines += example_to_json(ex).dump() + "\n";
  write_text(dir / "examples.jsonl", lines);
  ds.embeddings.write(dir / "embeddings.bin");
}

Matrix word_features(const Dataset& ds, const EdgeProbingExample& ex, std::uint32_t layer) {
  return ds.embeddings.gather(ex.sentence_id, layer, ex.subword_alignment);
}

std::uint32_t span_distance(const EdgeProbingExample& ex) {
  if (!ex.span2) throw ConfigError("span distance is defined for binary examples only");
  const auto a = ex.span1.start;
  const auto b = ex.span2->start;
  return a > b ? a - b : b - a;
}

SpanDistanceBuckets::SpanDistanceBuckets() : bounds_{3, 6, 9, 12, 15} {}

SpanDistanceBuckets::SpanDistanceBuckets(std::vector<std::uint32_t> bounds)
    : bounds_(std::move(bounds)) {
  for (std::size_t i = 1; i < bounds_.size(); ++i) {
    if (bounds_[i] <= bounds_[i - 1]) {
      throw ConfigError("bucket boundaries must be strictly increasing");
    }
  }
}

std::size_t SpanDistanceBuckets::bucket_of(std::uint32_t distance) const {
  return static_cast<std::size_t>(std::lower_bound(bounds_.begin(), bounds_.end(), distance) -
                                  bounds_.begin());
}

std::string SpanDistanceBuckets::label(std::size_t bucket) const {
  const std::string lo = bucket == 0 ? "[0" : "(" + std::to_string(bounds_[bucket - 1]);
  const std::string hi = bucket < bounds_.size() ? std::to_string(bounds_[bucket]) + "]" : "inf)";
  return lo + "," + hi;
}

}  // namespace probeforge
