#include <doctest.h>

#include "oracles.hpp"
#include "probeforge/errors.hpp"
#include "probeforge/synthetic.hpp"
#include "probeforge/trainer.hpp"

using namespace probeforge;

namespace {

// Unary task on chains of 4 words with one subword each. Labels are the sign of
// feature 0 at `signal`; every other layer is independent noise.
Dataset linear_dataset(std::size_t n_sentences, std::uint32_t n_layers, std::uint32_t signal,
                       std::uint64_t seed) {
  constexpr std::uint32_t kWords = 4;
  constexpr std::uint32_t kDim = 3;
  Rng rng(seed);
  Dataset ds;
  ds.manifest.task_name = "linear";
  ds.manifest.embedding_dim = kDim;
  ds.manifest.n_layers = n_layers;
  ds.vocab = LabelVocabulary({"neg", "pos"});
  std::vector<SentenceEmbedding> sentences;
  const std::size_t n_train = n_sentences * 4 / 5;
  for (std::uint64_t sid = 0; sid < n_sentences; ++sid) {
    SentenceEmbedding emb{kWords, std::vector<float>(n_layers * kWords * kDim)};
    for (float& f : emb.values) f = static_cast<float>(rng.normal());
    for (std::uint32_t w = 0; w < kWords; ++w) {
      EdgeProbingExample ex;
      ex.sentence_id = sid;
      ex.tokens = {"a", "b", "c", "d"};
      ex.subword_alignment = {0, 1, 2, 3};
      ex.edges = {{0, 1}, {1, 2}, {2, 3}};
      ex.span1 = {w, w + 1};
      const float x0 = emb.values[(signal * kWords + w) * kDim];
      ex.labels = {x0 > 0 ? "pos" : "neg"};
      ex.split = sid < n_train ? Split::Train : Split::Test;
      ds.examples.push_back(std::move(ex));
    }
    sentences.push_back(std::move(emb));
  }
  ds.manifest.split_sizes = {n_train * kWords, 0, (n_sentences - n_train) * kWords};
  ds.embeddings = EmbeddingStore(kDim, n_layers, std::move(sentences));
  return ds;
}

Dataset relation_dataset() {
  SynthOptions o;
  o.task = SynthTask::Relation;
  o.n_examples = 240;
  o.n_words = 8;
  o.dim = 6;
  o.seed = 11;
  return generate_synthetic(o);
}

TrainConfig quick_config(ControlKind kind) {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seeds = {0, 1};
  cfg.control = kind;
  cfg.adam.lr = 0.01;
  return cfg;
}

void check_same_run(const RunResult& a, const RunResult& b) {
  REQUIRE(a.seeds.size() == b.seeds.size());
  for (std::size_t i = 0; i < a.seeds.size(); ++i) {
    CHECK(a.seeds[i].macro_f1 == b.seeds[i].macro_f1);
    CHECK(a.seeds[i].loss_curve == b.seeds[i].loss_curve);
    CHECK(a.seeds[i].test_predictions == b.seeds[i].test_predictions);
  }
  CHECK(a.mean_f1 == b.mean_f1);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("macro F1 edge cases") {
  const std::vector<LabelSet> gold = {{0}, {1}, {2}, {0}, {1}, {2}};
  CHECK(macro_f1(gold, gold, 3) == 1.0);
  const std::vector<LabelSet> all0(6, LabelSet{0});
  // Class 0: 2TP/(2TP+FP) = 4/8; classes 1 and 2 score 0.
  CHECK(macro_f1(all0, gold, 3) == doctest::Approx(1.0 / 6.0));
  // Labels absent from gold do not count.
  const std::vector<LabelSet> g2 = {{0}, {0}};
  const std::vector<LabelSet> p2 = {{0}, {1}};
  CHECK(macro_f1(p2, g2, 3) == doctest::Approx(2.0 / 3.0));
  const std::vector<LabelSet> none;
  CHECK_THROWS_AS(macro_f1(none, none, 3), EvaluationError);
  CHECK_THROWS_AS(macro_f1(all0, g2, 3), EvaluationError);
  const std::vector<LabelSet> out_of_range = {{5}, {0}};
  CHECK_THROWS_AS(macro_f1(out_of_range, g2, 3), LabelError);
}

TEST_CASE("macro F1 matches the confusion-matrix oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.below(5);
    const std::size_t n = 1 + rng.below(60);
    std::vector<std::size_t> p(n), g(n);
    std::vector<LabelSet> ps(n), gs(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = rng.below(k);
      p[i] = rng.below(k);
      gs[i] = {static_cast<std::uint32_t>(g[i])};
      ps[i] = {static_cast<std::uint32_t>(p[i])};
    }
    CHECK(macro_f1(ps, gs, k) == oracle::confusion_macro_f1(p, g, k));
  }
}

TEST_CASE("multi-label macro F1 matches per-label tables") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng.below(5);
    const std::size_t n = 1 + rng.below(40);
    std::vector<std::vector<bool>> pt(n, std::vector<bool>(k)), gt(n, std::vector<bool>(k));
    std::vector<LabelSet> ps(n), gs(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        pt[i][c] = rng.below(2) == 1;
        gt[i][c] = rng.below(3) == 0;
        if (pt[i][c]) ps[i].push_back(static_cast<std::uint32_t>(c));
        if (gt[i][c]) gs[i].push_back(static_cast<std::uint32_t>(c));
        any |= gt[i][c];
      }
    }
    if (!any) continue;
    CHECK(macro_f1(ps, gs, k) == oracle::table_macro_f1(pt, gt, k));
  }
}

TEST_CASE("population variance") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(1 + rng.below(10));
    for (double& x : xs) x = rng.uniform();
    CHECK(population_variance(xs) == doctest::Approx(oracle::variance(xs)).epsilon(1e-12));
  }
  const std::vector<double> same(5, 0.25);
  CHECK(population_variance(same) == 0.0);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.seeds.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.adam.lr = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.layer_index = 3;
  CHECK_THROWS_AS(cfg.resolved_layer(3), ConfigError);
  CHECK(cfg.resolved_layer(4) == 3);
  cfg.layer_index.reset();
  CHECK(cfg.resolved_layer(4) == 3);
  CHECK(parse_graph_mode("random") == GraphMode::Random);
  CHECK_THROWS_AS(parse_graph_mode("full"), ConfigError);
}

TEST_CASE("training is bitwise deterministic") {
  const Dataset ds = linear_dataset(40, 1, 0, 1);
  for (ControlKind kind : {ControlKind::Gcn, ControlKind::Message, ControlKind::Kan}) {
    CAPTURE(to_string(kind));
    const auto cfg = quick_config(kind);
    check_same_run(run_experiment(cfg, ds), run_experiment(cfg, ds));
  }
}

TEST_CASE("update count and loss curve length") {
  const Dataset ds = linear_dataset(40, 1, 0, 1);  // 128 training examples
  auto cfg = quick_config(ControlKind::Mlp);
  cfg.batch_size = 50;
  const PreparedData data(ds, cfg);
  const TrainedModel m = train_run(cfg, data, 0);
  CHECK(m.updates == 3 * 3);
  CHECK(m.loss_curve.size() == 3);
}

TEST_CASE("the Without baseline trains only the head") {
  const Dataset ds = linear_dataset(20, 1, 0, 2);
  const auto cfg = quick_config(ControlKind::Without);
  const PreparedData data(ds, cfg);
  TrainedModel m = train_run(cfg, data, 0);
  CHECK(m.control->params().empty());
  Rng rng(0);
  const ProbeHead fresh = ProbeHead::init(Arity::Unary, LossKind::SingleLabel, 3, 2, rng);
  CHECK_FALSE(m.head.weight.value == fresh.weight.value);
}

TEST_CASE("a separable task is learned") {
  const Dataset ds = linear_dataset(200, 1, 0, 5);
  auto cfg = quick_config(ControlKind::Without);
  cfg.epochs = 30;
  cfg.adam.lr = 0.02;
  cfg.seeds = {0};
  const RunResult r = run_experiment(cfg, ds);
  const auto& curve = r.seeds[0].loss_curve;
  CHECK(curve.back() < 0.1);
  for (std::size_t e = 1; e < curve.size(); ++e) CHECK(curve[e] <= curve[e - 1]);
  CHECK(r.mean_f1 > 0.95);
}

TEST_CASE("delta against Without is zero for Without") {
  const Dataset ds = linear_dataset(30, 1, 0, 3);
  const DeltaResult d = evaluate_delta(quick_config(ControlKind::Without), ds);
  CHECK(d.delta.delta == 0.0);
  CHECK(d.delta.with_control == d.delta.without_control);
}

TEST_CASE("ablation needs a structural control") {
  const Dataset ds = linear_dataset(30, 1, 0, 3);
  for (ControlKind kind : {ControlKind::Without, ControlKind::Mlp, ControlKind::Kan}) {
    CHECK_THROWS_WITH_AS(ablate_random_graph(quick_config(kind), ds),
                         doctest::Contains("vacuous"), ConfigError);
  }
  const AblationResult a = ablate_random_graph(quick_config(ControlKind::Gcn), ds);
  CHECK(a.drop == doctest::Approx(a.ud.mean_f1 - a.random.mean_f1));
  CHECK(a.ud.config.graph_mode == GraphMode::Ud);
  CHECK(a.random.config.graph_mode == GraphMode::Random);
}

TEST_CASE("random graphs are keyed by the graph seed") {
  const Dataset ds = linear_dataset(30, 1, 0, 3);
  auto cfg = quick_config(ControlKind::Gcn);
  cfg.graph_mode = GraphMode::Random;
  const RunResult a = run_experiment(cfg, ds);
  check_same_run(a, run_experiment(cfg, ds));
  cfg.graph_seed = 9;
  const RunResult b = run_experiment(cfg, ds);
  CHECK(a.seeds[0].loss_curve != b.seeds[0].loss_curve);
}

TEST_CASE("layer sweep") {
  CHECK_THROWS_AS(sweep_layers(quick_config(ControlKind::Without), linear_dataset(10, 1, 0, 1)),
                  ConfigError);
  const Dataset ds = linear_dataset(60, 3, 1, 4);
  auto cfg = quick_config(ControlKind::Without);
  cfg.epochs = 10;
  cfg.adam.lr = 0.05;
  const auto runs = sweep_layers(cfg, ds);
  REQUIRE(runs.size() == 3);
  for (std::uint32_t l = 0; l < 3; ++l) {
    CHECK(runs[l].layer_index == l);
    auto single = cfg;
    single.layer_index = l;
    check_same_run(runs[l], run_experiment(single, ds));
  }
  CHECK(runs[1].mean_f1 > runs[0].mean_f1 + 0.2);
  CHECK(runs[1].mean_f1 > runs[2].mean_f1 + 0.2);

  auto one_epoch = cfg;
  one_epoch.epochs = 1;
  one_epoch.seeds = {0};
  const auto deep = sweep_layers(one_epoch, linear_dataset(10, 13, 0, 2));
  REQUIRE(deep.size() == 13);
  for (std::uint32_t l = 0; l < 13; ++l) CHECK(deep[l].layer_index == l);
}

TEST_CASE("bucket evaluation") {
  const Dataset ds = relation_dataset();
  const auto cfg = quick_config(ControlKind::Without);
  CHECK_THROWS_AS(run_bucket_eval(cfg, linear_dataset(10, 1, 0, 1), SpanDistanceBuckets()),
                  ConfigError);

  const BucketRun one = run_bucket_eval(cfg, ds, SpanDistanceBuckets({1000}));
  REQUIRE(one.buckets.size() == 2);
  CHECK(one.counts[1] == 0);
  CHECK_FALSE(one.mean[1].has_value());
  for (std::size_t s = 0; s < one.run.seeds.size(); ++s) {
    REQUIRE(one.per_seed[s][0].has_value());
    CHECK(*one.per_seed[s][0] == one.run.seeds[s].macro_f1);
  }

  const BucketRun fine = run_bucket_eval(cfg, ds, SpanDistanceBuckets({1, 2, 4}));
  std::size_t total = 0;
  for (auto c : fine.counts) total += c;
  CHECK(total == ds.split_indices(Split::Test).size());

  const auto test = ds.split_indices(Split::Test);
  const std::vector<LabelSet> short_preds(test.size() - 1);
  CHECK_THROWS_AS(bucket_eval(ds, test, short_preds, SpanDistanceBuckets()), EvaluationError);
}

TEST_CASE("parallel seeds match sequential seeds") {
  const Dataset ds = linear_dataset(30, 1, 0, 6);
  auto cfg = quick_config(ControlKind::Gcn);
  cfg.seeds = {0, 1, 2};
  const RunResult seq = run_experiment(cfg, ds);
  cfg.jobs = 2;
  check_same_run(seq, run_experiment(cfg, ds));
}

TEST_CASE("seed base shifts every seed") {
  const Dataset ds = linear_dataset(30, 1, 0, 6);
  auto cfg = quick_config(ControlKind::Mlp);
  cfg.seeds = {5};
  const RunResult a = run_experiment(cfg, ds);
  cfg.seeds = {2};
  cfg.seed_base = 3;
  const RunResult b = run_experiment(cfg, ds);
  CHECK(a.seeds[0].seed == b.seeds[0].seed);
  CHECK(a.seeds[0].loss_curve == b.seeds[0].loss_curve);
}

TEST_CASE("divergence raises a numeric error naming the batch") {
  const Dataset ds = linear_dataset(30, 1, 0, 6);
  auto cfg = quick_config(ControlKind::Mlp);
  cfg.adam.lr = 1e300;
  CHECK_THROWS_WITH_AS(run_experiment(cfg, ds), doctest::Contains("batch"), NumericError);
}

}  // TEST_SUITE
