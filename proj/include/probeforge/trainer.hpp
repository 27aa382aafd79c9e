#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probeforge/control.hpp"
#include "probeforge/data.hpp"
#include "probeforge/numcore.hpp"
#include "probeforge/probing.hpp"

namespace probeforge {

enum class GraphMode { Ud, Random };

std::string_view to_string(GraphMode m);
GraphMode parse_graph_mode(std::string_view s);

struct TrainConfig {
  std::uint32_t epochs = 10;
  std::uint32_t batch_size = 64;
  AdamConfig adam;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  // Added to every seed before use.
  std::uint64_t seed_base = 0;
  ControlKind control = ControlKind::Without;
  // GCN/MLP/KAN layers and Message hops.
  std::uint32_t layers = 2;
  GraphMode graph_mode = GraphMode::Ud;
  // Embedding layer to probe; the last one when unset.
  std::optional<std::uint32_t> layer_index;
  // Seed for the random-tree replacement graphs.
  std::uint64_t graph_seed = 0;
  KanOptions kan;
  // Worker threads for per-seed runs.
  std::uint32_t jobs = 1;

  void validate() const;
  std::uint32_t resolved_layer(std::uint32_t n_layers) const;
};

/// Per-sentence inputs shared read-only by every run of one configuration.
class PreparedData {
 public:
  PreparedData(const Dataset& ds, const TrainConfig& cfg);

  const Dataset& dataset() const { return *ds_; }
  std::uint32_t layer() const { return layer_; }
  const Matrix& features(std::uint64_t sentence_id) const;
  const NormalizedAdjacency& adjacency(std::uint64_t sentence_id) const;

 private:
  struct Sentence {
    Matrix features;
    NormalizedAdjacency adj;
  };
  const Dataset* ds_;
  std::uint32_t layer_;
  std::vector<std::optional<Sentence>> sentences_;  // indexed by sentence id
};

using LabelSet = std::vector<std::uint32_t>;

struct TrainedModel {
  std::unique_ptr<ControlModule> control;
  ProbeHead head;
  std::vector<double> loss_curve;
  std::uint64_t updates = 0;
  std::size_t kan_clamped = 0;
};

/// One seeded training run. Initialization, shuffling and update order all
/// derive from a single generator seeded with `seed`.
TrainedModel train_run(const TrainConfig& cfg, const PreparedData& data, std::uint64_t seed);

/// Predicted label sets for the given examples: argmax for single-label tasks,
/// sigmoid(logit) > 0.5 for multi-label tasks.
std::vector<LabelSet> predict_examples(TrainedModel& model, const PreparedData& data,
                                       std::span<const std::size_t> indices);

std::vector<LabelSet> gold_labels(const Dataset& ds, std::span<const std::size_t> indices);

/// Unweighted mean of per-label F1 over labels that occur in the gold sets.
double macro_f1(std::span<const LabelSet> predictions, std::span<const LabelSet> golds,
                std::size_t n_labels);

struct SeedResult {
  std::uint64_t seed = 0;
  double macro_f1 = 0.0;
  std::vector<double> loss_curve;
  std::uint64_t updates = 0;
  std::size_t kan_clamped = 0;
  double wall_clock_seconds = 0.0;
  std::vector<LabelSet> test_predictions;
};

struct RunResult {
  TrainConfig config;
  std::uint32_t layer_index = 0;
  std::vector<SeedResult> seeds;
  double mean_f1 = 0.0;
  // Population variance of the per-seed F1 list.
  double variance_f1 = 0.0;
  std::vector<double> mean_loss_curve;
  double wall_clock_seconds = 0.0;
};

double population_variance(std::span<const double> values);

RunResult run_experiment(const TrainConfig& cfg, const Dataset& ds);

struct DeltaPref {
  double with_control = 0.0;
  double without_control = 0.0;
  double delta = 0.0;
};

struct DeltaResult {
  RunResult with_control;
  RunResult baseline;
  DeltaPref delta;
};

/// Runs the configured control and the Without baseline over the same seeds.
DeltaResult evaluate_delta(const TrainConfig& cfg, const Dataset& ds);

struct AblationResult {
  RunResult ud;
  RunResult random;
  double drop = 0.0;  // ud mean F1 - random mean F1
};

AblationResult ablate_random_graph(const TrainConfig& cfg, const Dataset& ds);

std::vector<RunResult> sweep_layers(const TrainConfig& cfg, const Dataset& ds);

struct BucketScore {
  std::string bucket;
  std::size_t n_examples = 0;
  std::optional<double> macro_f1;  // absent when the bucket holds no examples
};

/// Scores test-split predictions per span-distance bucket.
std::vector<BucketScore> bucket_eval(const Dataset& ds, std::span<const std::size_t> indices,
                                     std::span<const LabelSet> predictions,
                                     const SpanDistanceBuckets& buckets);

struct BucketRun {
  RunResult run;
  std::vector<std::string> buckets;
  std::vector<std::size_t> counts;
  // [seed][bucket]
  std::vector<std::vector<std::optional<double>>> per_seed;
  std::vector<std::optional<double>> mean;
};

BucketRun run_bucket_eval(const TrainConfig& cfg, const Dataset& ds,
                          const SpanDistanceBuckets& buckets);

}  // namespace probeforge
