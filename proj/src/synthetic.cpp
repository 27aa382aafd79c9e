#include "probeforge/synthetic.hpp"

#include <cmath>
#include <string>

#include "probeforge/errors.hpp"
#include "probeforge/rng.hpp"

namespace probeforge {

std::string_view to_string(SynthTask t) {
  switch (t) {
    case SynthTask::Transform: return "transform";
    case SynthTask::Structure: return "structure";
    case SynthTask::Relation: return "relation";
  }
  return "unknown";
}

SynthTask parse_synth_task(std::string_view s) {
  if (s == "transform") return SynthTask::Transform;
  if (s == "structure") return SynthTask::Structure;
  if (s == "relation") return SynthTask::Relation;
  throw ConfigError("unknown synthetic task '" + std::string(s) +
                    "' (expected transform, structure or relation)");
}

double default_scale(SynthTask t) { return t == SynthTask::Structure ? 3.0 : 1.0; }

SynthProjections synth_projections(std::uint64_t seed, std::uint32_t dim) {
  Rng rng(mix_seed(seed, 0));
  SynthProjections p{std::vector<double>(dim), std::vector<double>(dim)};
  for (double& x : p.u) x = rng.normal();
  for (double& x : p.v) x = rng.normal();
  double uu = 0.0, uv = 0.0;
  for (std::uint32_t c = 0; c < dim; ++c) {
    uu += p.u[c] * p.u[c];
    uv += p.u[c] * p.v[c];
  }
  for (std::uint32_t c = 0; c < dim; ++c) p.v[c] -= uv / uu * p.u[c];
  return p;
}

std::vector<bool> function_words(const SentenceGraph& tree) {
  std::vector<std::vector<std::uint32_t>> adj(tree.n_nodes);
  for (const Edge& e : tree.edges) {
    adj[e.head].push_back(e.dependent);
    adj[e.dependent].push_back(e.head);
  }
  std::vector<bool> odd(tree.n_nodes, false);
  std::vector<bool> seen(tree.n_nodes, false);
  std::vector<std::uint32_t> stack;
  if (tree.n_nodes > 0) {
    stack.push_back(0);
    seen[0] = true;
  }
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    for (auto nb : adj[v]) {
      if (seen[nb]) continue;
      seen[nb] = true;
      odd[nb] = !odd[v];
      stack.push_back(nb);
    }
  }
  return odd;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Removes the components along the given unit directions, then scales.
void flatten_row(float* row, std::uint32_t d, std::span<const std::vector<double>> dirs,
                 double factor) {
  std::vector<double> vals(row, row + d);
  for (const auto& e : dirs) {
    const double a = dot(e, vals);
    for (std::uint32_t c = 0; c < d; ++c) vals[c] -= a * e[c];
  }
  for (std::uint32_t c = 0; c < d; ++c) row[c] = static_cast<float>(factor * vals[c]);
}

std::vector<double> unit(std::vector<double> v) {
  const double norm = std::sqrt(dot(v, v));
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

Dataset generate_synthetic(const SynthOptions& opts) {
  if (opts.dim < 4) throw ConfigError("synthetic data needs d >= 4");
  if (opts.n_words < 2) throw ConfigError("synthetic sentences need at least 2 words");
  if (opts.n_layers < 1) throw ConfigError("synthetic data needs at least one layer");
  const std::uint32_t signal = opts.signal_layer.value_or(opts.n_layers - 1);
  if (signal >= opts.n_layers) throw ConfigError("signal layer out of range");
  if (!(opts.test_fraction >= 0.0 && opts.test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in [0, 1)");
  }
  const double scale = opts.scale.value_or(default_scale(opts.task));
  if (!(scale > 0.0)) throw ConfigError("embedding scale must be positive");
  if (!(opts.filler_scale >= 0.0)) throw ConfigError("filler scale must be non-negative");

  const std::uint32_t d = opts.dim;
  const std::uint32_t n = opts.n_words;
  const SynthProjections proj = synth_projections(opts.seed, d);
  const std::vector<double> eu = unit(proj.u);
  const std::vector<double> ev = unit(proj.v);
  const auto n_test =
      static_cast<std::size_t>(std::llround(static_cast<double>(opts.n_examples) * opts.test_fraction));
  const std::size_t n_train = opts.n_examples - n_test;

  Dataset ds;
  ds.manifest.task_name = "synth-" + std::string(to_string(opts.task));
  ds.manifest.arity = opts.task == SynthTask::Relation ? Arity::Binary : Arity::Unary;
  ds.manifest.loss_kind = LossKind::SingleLabel;
  ds.manifest.embedding_dim = d;
  ds.manifest.n_layers = opts.n_layers;
  ds.manifest.split_sizes = {n_train, 0, n_test};
  ds.vocab = LabelVocabulary({"neg", "pos"});

  std::vector<SentenceEmbedding> sentences;
  Rng rng(mix_seed(opts.seed, 1));
  std::size_t produced = 0;
  for (std::uint64_t sid = 0; produced < opts.n_examples; ++sid) {
    const SentenceGraph tree = random_tree(n, mix_seed(opts.seed, 1000 + sid));
    const std::vector<bool> function = function_words(tree);
    std::vector<std::vector<std::uint32_t>> neighbours(n);
    for (const Edge& e : tree.edges) {
      neighbours[e.head].push_back(e.dependent);
      neighbours[e.dependent].push_back(e.head);
    }

    // One leading special row, then 1 or 2 subwords per word.
    std::vector<std::uint32_t> first_row(n + 1);
    std::uint32_t rows = 1;
    for (std::uint32_t w = 0; w < n; ++w) {
      first_row[w] = rows;
      rows += rng.below(3) == 0 ? 2 : 1;
    }
    first_row[n] = rows;
    SentenceEmbedding emb{rows, std::vector<float>(static_cast<std::size_t>(opts.n_layers) * rows * d)};
    for (float& f : emb.values) f = static_cast<float>(scale * rng.normal());
    const std::size_t block = static_cast<std::size_t>(rows) * d;

    for (std::uint32_t w = 0; w < n; ++w) {
      if (!function[w]) continue;
      for (std::uint32_t r = first_row[w]; r < first_row[w + 1]; ++r) {
        float* row = emb.values.data() + signal * block + static_cast<std::size_t>(r) * d;
        switch (opts.task) {
          case SynthTask::Transform: {
            const std::vector<double> dirs[] = {eu, ev};
            flatten_row(row, d, dirs, opts.filler_scale);
            break;
          }
          case SynthTask::Structure: {
            const std::vector<double> dirs[] = {eu};
            flatten_row(row, d, dirs, 1.0);
            break;
          }
          case SynthTask::Relation: break;
        }
      }
    }

    // Word vectors exactly as stored (float32), promoted for label computation.
    Matrix x(n, d);
    for (std::uint32_t w = 0; w < n; ++w)
      for (std::uint32_t c = 0; c < d; ++c)
        x(w, c) = static_cast<double>(emb.values[signal * block + first_row[w] * d + c]);
    const std::vector<std::uint32_t> alignment(first_row.begin(), first_row.end() - 1);

    std::vector<std::string> tokens(n);
    for (std::uint32_t w = 0; w < n; ++w) tokens[w] = "w" + std::to_string(sid) + "_" + std::to_string(w);

    for (std::uint32_t w = 0; w < n && produced < opts.n_examples; ++w) {
      if (opts.task == SynthTask::Transform && function[w]) continue;
      if (opts.task == SynthTask::Structure && !function[w]) continue;
      EdgeProbingExample ex;
      ex.sentence_id = sid;
      ex.tokens = tokens;
      ex.subword_alignment = alignment;
      ex.edges = tree.edges;
      ex.split = produced < n_train ? Split::Train : Split::Test;
      ex.span1 = {w, w + 1};
      bool positive = false;
      switch (opts.task) {
        case SynthTask::Transform:
          positive = dot(proj.u, x.row(w)) * dot(proj.v, x.row(w)) > 0.0;
          break;
        case SynthTask::Structure: {
          double score = 0.0;
          for (auto nb : neighbours[w]) {
            score += dot(proj.u, x.row(nb)) / std::sqrt(static_cast<double>(neighbours[nb].size() + 1));
          }
          positive = score > 0.0;
          break;
        }
        case SynthTask::Relation: {
          auto other = static_cast<std::uint32_t>(rng.below(n - 1));
          if (other >= w) ++other;
          ex.span2 = Span{other, other + 1};
          positive = dot(proj.u, x.row(w)) * dot(proj.v, x.row(other)) > 0.0;
          break;
        }
      }
      ex.labels = {positive ? "pos" : "neg"};
      ds.examples.push_back(std::move(ex));
      ++produced;
    }
    sentences.push_back(std::move(emb));
  }
  ds.embeddings = EmbeddingStore(d, opts.n_layers, std::move(sentences));
  return ds;
}

void gen_synthetic(const SynthOptions& opts, const std::filesystem::path& dir) {
  write_dataset(generate_synthetic(opts), dir);
}

}  // namespace probeforge
