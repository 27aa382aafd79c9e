#include "probeforge/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "probeforge/errors.hpp"
#include "probeforge/rng.hpp"

namespace probeforge {

std::string_view to_string(GraphMode m) { return m == GraphMode::Ud ? "ud" : "random"; }

GraphMode parse_graph_mode(std::string_view s) {
  if (s == "ud") return GraphMode::Ud;
  if (s == "random") return GraphMode::Random;
  throw ConfigError("unknown graph mode '" + std::string(s) + "' (expected ud or random)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(adam.lr > 0.0) || !std::isfinite(adam.lr)) throw ConfigError("lr must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(adam.eps > 0.0)) throw ConfigError("eps must be positive");
  if (layers < 1 && control != ControlKind::Message) throw ConfigError("layers must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (control == ControlKind::Kan) kan.validate();
}

std::uint32_t TrainConfig::resolved_layer(std::uint32_t n_layers) const {
  const std::uint32_t layer = layer_index.value_or(n_layers - 1);
  if (layer >= n_layers) {
    throw ConfigError("layer_index " + std::to_string(layer) + " out of range for " +
                      std::to_string(n_layers) + " embedding layers");
  }
  return layer;
}

PreparedData::PreparedData(const Dataset& ds, const TrainConfig& cfg)
    : ds_(&ds), layer_(cfg.resolved_layer(ds.embeddings.n_layers())) {
  sentences_.resize(ds.embeddings.n_sentences());
  for (const auto& ex : ds.examples) {
    auto& slot = sentences_.at(ex.sentence_id);
    if (slot) continue;
    const auto n = static_cast<std::uint32_t>(ex.tokens.size());
    SentenceGraph g = cfg.graph_mode == GraphMode::Ud
                          ? ex.graph()
                          : random_tree(n, mix_seed(cfg.graph_seed, ex.sentence_id));
    slot = Sentence{word_features(ds, ex, layer_), normalize(g)};
  }
}

const Matrix& PreparedData::features(std::uint64_t sentence_id) const {
  return sentences_.at(sentence_id).value().features;
}

const NormalizedAdjacency& PreparedData::adjacency(std::uint64_t sentence_id) const {
  return sentences_.at(sentence_id).value().adj;
}

namespace {

struct SentencePass {
  std::uint64_t sentence_id = 0;
  ControlTape tape;
  Matrix output;
  Matrix grad;
};

// Forward of one batch: the control module runs once per distinct sentence.
struct BatchForward {
  std::vector<SentencePass> passes;
  // Per example: index into passes.
  std::vector<std::size_t> pass_of;
  Matrix inputs;
};

BatchForward forward_batch(const ControlModule& control, const ProbeHead& head,
                           const PreparedData& data, std::span<const std::size_t> batch) {
  const Dataset& ds = data.dataset();
  BatchForward fw;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  fw.pass_of.reserve(batch.size());
  for (std::size_t idx : batch) {
    const auto sid = ds.examples[idx].sentence_id;
    auto [it, inserted] = seen.emplace(sid, fw.passes.size());
    if (inserted) {
      SentencePass pass;
      pass.sentence_id = sid;
      pass.output = control.forward(data.adjacency(sid), data.features(sid), pass.tape);
      fw.passes.push_back(std::move(pass));
    }
    fw.pass_of.push_back(it->second);
  }
  const std::size_t d = ds.embeddings.dim();
  fw.inputs = Matrix(batch.size(), head.input_width());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto& ex = ds.examples[batch[r]];
    const Matrix& q = fw.passes[fw.pass_of[r]].output;
    auto dst = fw.inputs.row(r);
    auto first = q.row(ex.span1.start);
    std::copy(first.begin(), first.end(), dst.begin());
    if (ex.span2) {
      auto second = q.row(ex.span2->start);
      std::copy(second.begin(), second.end(), dst.begin() + static_cast<std::ptrdiff_t>(d));
    }
  }
  return fw;
}

Targets batch_targets(const Dataset& ds, std::span<const std::size_t> batch) {
  if (ds.manifest.loss_kind == LossKind::SingleLabel) {
    std::vector<std::size_t> idx;
    idx.reserve(batch.size());
    for (std::size_t i : batch) idx.push_back(ds.vocab.index_of(ds.examples[i].labels.front()));
    return idx;
  }
  Matrix hot(batch.size(), ds.vocab.size());
  for (std::size_t r = 0; r < batch.size(); ++r)
    for (const auto& l : ds.examples[batch[r]].labels) hot(r, ds.vocab.index_of(l)) = 1.0;
  return hot;
}

}  // namespace

TrainedModel train_run(const TrainConfig& cfg, const PreparedData& data, std::uint64_t seed) {
  cfg.validate();
  const Dataset& ds = data.dataset();
  const std::size_t d = ds.embeddings.dim();
  Rng rng(seed);

  TrainedModel model;
  model.control = make_control({cfg.control, d, cfg.layers, cfg.kan}, rng);
  model.head = ProbeHead::init(ds.manifest.arity, ds.manifest.loss_kind, d, ds.vocab.size(), rng);
  std::vector<Param*> params = model.control->params();
  for (Param* p : model.head.params()) params.push_back(p);

  std::vector<std::size_t> order = ds.split_indices(Split::Train);
  if (order.empty()) throw DataError("dataset has no training examples");

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);

      BatchForward fw = forward_batch(*model.control, model.head, data, batch);
      for (const auto& pass : fw.passes) model.kan_clamped += pass.tape.clamped;
      const Matrix logits = head_forward(model.head, fw.inputs);
      const LossResult loss = task_loss(model.head, logits, batch_targets(ds, batch));
      if (!std::isfinite(loss.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no));
      }
      loss_sum += loss.loss * static_cast<double>(batch.size());

      const Matrix dinputs = head_backward(model.head, fw.inputs, loss.grad);
      if (!model.control->params().empty()) {
        for (auto& pass : fw.passes) pass.grad = Matrix(pass.output.rows(), pass.output.cols());
        for (std::size_t r = 0; r < batch.size(); ++r) {
          const auto& ex = ds.examples[batch[r]];
          Matrix& g = fw.passes[fw.pass_of[r]].grad;
          auto src = dinputs.row(r);
          for (std::size_t c = 0; c < d; ++c) g(ex.span1.start, c) += src[c];
          if (ex.span2)
            for (std::size_t c = 0; c < d; ++c) g(ex.span2->start, c) += src[d + c];
        }
        // The input gradient is dropped: embeddings stay frozen.
        for (auto& pass : fw.passes) model.control->backward(pass.tape, pass.grad);
      }
      for (Param* p : params) {
        try {
          adam_step(*p, cfg.adam);
        } catch (const OptimizerError& e) {
          throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_no));
        }
      }
      ++model.updates;
    }
    model.loss_curve.push_back(loss_sum / static_cast<double>(order.size()));
  }
  return model;
}

std::vector<LabelSet> predict_examples(TrainedModel& model, const PreparedData& data,
                                       std::span<const std::size_t> indices) {
  const Dataset& ds = data.dataset();
  std::vector<LabelSet> out;
  out.reserve(indices.size());
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < indices.size(); start += kChunk) {
    const std::size_t end = std::min(indices.size(), start + kChunk);
    std::span<const std::size_t> chunk(indices.data() + start, end - start);
    const BatchForward fw = forward_batch(*model.control, model.head, data, chunk);
    const Matrix logits = head_forward(model.head, fw.inputs);
    for (std::size_t r = 0; r < chunk.size(); ++r) {
      auto z = logits.row(r);
      LabelSet labels;
      if (ds.manifest.loss_kind == LossKind::SingleLabel) {
        labels.push_back(static_cast<std::uint32_t>(std::max_element(z.begin(), z.end()) - z.begin()));
      } else {
        for (std::size_t c = 0; c < z.size(); ++c)
          if (sigmoid(z[c]) > 0.5) labels.push_back(static_cast<std::uint32_t>(c));
      }
      out.push_back(std::move(labels));
    }
  }
  return out;
}

std::vector<LabelSet> gold_labels(const Dataset& ds, std::span<const std::size_t> indices) {
  std::vector<LabelSet> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    LabelSet set;
    for (const auto& l : ds.examples[i].labels)
      set.push_back(static_cast<std::uint32_t>(ds.vocab.index_of(l)));
    std::sort(set.begin(), set.end());
    out.push_back(std::move(set));
  }
  return out;
}

double macro_f1(std::span<const LabelSet> predictions, std::span<const LabelSet> golds,
                std::size_t n_labels) {
  if (predictions.size() != golds.size()) {
    throw EvaluationError("macro_f1: " + std::to_string(predictions.size()) +
                          " predictions for " + std::to_string(golds.size()) + " gold entries");
  }
  std::vector<std::size_t> tp(n_labels), fp(n_labels), fn(n_labels);
  std::vector<bool> in_gold(n_labels), in_pred(n_labels);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    std::fill(in_gold.begin(), in_gold.end(), false);
    std::fill(in_pred.begin(), in_pred.end(), false);
    for (auto l : golds[i]) {
      if (l >= n_labels) throw LabelError("macro_f1: gold label " + std::to_string(l) + " out of range");
      in_gold[l] = true;
    }
    for (auto l : predictions[i]) {
      if (l >= n_labels) throw LabelError("macro_f1: predicted label " + std::to_string(l) + " out of range");
      in_pred[l] = true;
    }
    for (std::size_t c = 0; c < n_labels; ++c) {
      if (in_gold[c] && in_pred[c]) ++tp[c];
      else if (in_pred[c]) ++fp[c];
      else if (in_gold[c]) ++fn[c];
    }
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < n_labels; ++c) {
    if (tp[c] + fn[c] == 0) continue;  // absent from gold
    ++present;
    sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
  }
  if (present == 0) throw EvaluationError("macro_f1: gold set contains no labels");
  return sum / static_cast<double>(present);
}

double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size());
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SeedResult run_seed(const TrainConfig& cfg, const PreparedData& data, std::uint64_t seed,
                    std::span<const std::size_t> test, std::span<const LabelSet> gold) {
  const auto t0 = Clock::now();
  TrainedModel model = train_run(cfg, data, seed);
  SeedResult r;
  r.seed = seed;
  r.test_predictions = predict_examples(model, data, test);
  r.macro_f1 = macro_f1(r.test_predictions, gold, data.dataset().vocab.size());
  r.loss_curve = std::move(model.loss_curve);
  r.updates = model.updates;
  r.kan_clamped = model.kan_clamped;
  r.wall_clock_seconds = seconds_since(t0);
  return r;
}

}  // namespace

RunResult run_experiment(const TrainConfig& cfg, const Dataset& ds) {
  cfg.validate();
  const auto t0 = Clock::now();
  const PreparedData data(ds, cfg);
  const auto test = ds.split_indices(Split::Test);
  if (test.empty()) throw DataError("dataset has no test examples");
  const auto gold = gold_labels(ds, test);

  RunResult result;
  result.config = cfg;
  result.layer_index = data.layer();
  result.seeds.resize(cfg.seeds.size());

  // Each seed owns its parameters; the dataset is shared read-only.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        result.seeds[i] = run_seed(cfg, data, cfg.seed_base + cfg.seeds[i], test, gold);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(cfg.jobs, cfg.seeds.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> f1s;
  result.mean_loss_curve.assign(cfg.epochs, 0.0);
  for (const auto& s : result.seeds) {
    f1s.push_back(s.macro_f1);
    for (std::size_t e = 0; e < cfg.epochs; ++e) result.mean_loss_curve[e] += s.loss_curve[e];
  }
  for (double& v : result.mean_loss_curve) v /= static_cast<double>(result.seeds.size());
  double sum = 0.0;
  for (double f : f1s) sum += f;
  result.mean_f1 = sum / static_cast<double>(f1s.size());
  result.variance_f1 = population_variance(f1s);
  result.wall_clock_seconds = seconds_since(t0);
  return result;
}

DeltaResult evaluate_delta(const TrainConfig& cfg, const Dataset& ds) {
  DeltaResult out;
  out.with_control = run_experiment(cfg, ds);
  TrainConfig base = cfg;
  base.control = ControlKind::Without;
  out.baseline = run_experiment(base, ds);
  out.delta = {out.with_control.mean_f1, out.baseline.mean_f1,
               out.with_control.mean_f1 - out.baseline.mean_f1};
  return out;
}

AblationResult ablate_random_graph(const TrainConfig& cfg, const Dataset& ds) {
  if (!uses_structure(cfg.control)) {
    throw ConfigError("ablation is vacuous: control '" + std::string(to_string(cfg.control)) +
                      "' ignores the graph (use gcn or message)");
  }
  AblationResult out;
  TrainConfig ud = cfg;
  ud.graph_mode = GraphMode::Ud;
  TrainConfig rnd = cfg;
  rnd.graph_mode = GraphMode::Random;
  out.ud = run_experiment(ud, ds);
  out.random = run_experiment(rnd, ds);
  out.drop = out.ud.mean_f1 - out.random.mean_f1;
  return out;
}

std::vector<RunResult> sweep_layers(const TrainConfig& cfg, const Dataset& ds) {
  const std::uint32_t n_layers = ds.embeddings.n_layers();
  if (n_layers <= 1) throw ConfigError("layer sweep needs embeddings with more than one layer");
  std::vector<RunResult> out;
  for (std::uint32_t layer = 0; layer < n_layers; ++layer) {
    TrainConfig c = cfg;
    c.layer_index = layer;
    out.push_back(run_experiment(c, ds));
  }
  return out;
}

std::vector<BucketScore> bucket_eval(const Dataset& ds, std::span<const std::size_t> indices,
                                     std::span<const LabelSet> predictions,
                                     const SpanDistanceBuckets& buckets) {
  if (ds.manifest.arity != Arity::Binary) {
    throw ConfigError("bucket evaluation needs a binary (two-span) task");
  }
  if (indices.size() != predictions.size()) {
    throw EvaluationError("bucket_eval: predictions and examples differ in length");
  }
  std::vector<std::vector<LabelSet>> preds(buckets.count()), golds(buckets.count());
  const auto gold = gold_labels(ds, indices);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t b = buckets.bucket_of(span_distance(ds.examples[indices[i]]));
    preds[b].push_back(predictions[i]);
    golds[b].push_back(gold[i]);
  }
  std::vector<BucketScore> out;
  for (std::size_t b = 0; b < buckets.count(); ++b) {
    BucketScore s{buckets.label(b), golds[b].size(), std::nullopt};
    if (!golds[b].empty()) s.macro_f1 = macro_f1(preds[b], golds[b], ds.vocab.size());
    out.push_back(std::move(s));
  }
  return out;
}

BucketRun run_bucket_eval(const TrainConfig& cfg, const Dataset& ds,
                          const SpanDistanceBuckets& buckets) {
  if (ds.manifest.arity != Arity::Binary) {
    throw ConfigError("bucket evaluation needs a binary (two-span) task");
  }
  BucketRun out;
  out.run = run_experiment(cfg, ds);
  const auto test = ds.split_indices(Split::Test);
  for (std::size_t b = 0; b < buckets.count(); ++b) out.buckets.push_back(buckets.label(b));
  out.counts.assign(buckets.count(), 0);
  std::vector<double> sums(buckets.count(), 0.0);
  std::vector<std::size_t> hits(buckets.count(), 0);
  for (const auto& seed : out.run.seeds) {
    const auto scores = bucket_eval(ds, test, seed.test_predictions, buckets);
    std::vector<std::optional<double>> row;
    for (std::size_t b = 0; b < scores.size(); ++b) {
      out.counts[b] = scores[b].n_examples;
      row.push_back(scores[b].macro_f1);
      if (scores[b].macro_f1) {
        sums[b] += *scores[b].macro_f1;
        ++hits[b];
      }
    }
    out.per_seed.push_back(std::move(row));
  }
  for (std::size_t b = 0; b < buckets.count(); ++b) {
    out.mean.push_back(hits[b] ? std::optional<double>(sums[b] / static_cast<double>(hits[b]))
                               : std::nullopt);
  }
  return out;
}

}  // namespace probeforge
