#include <doctest.h>

#include "probeforge/results.hpp"
#include "probeforge/synthetic.hpp"

using namespace probeforge;
using nlohmann::json;

namespace {

Dataset tiny_relation() {
  SynthOptions o;
  o.task = SynthTask::Relation;
  o.n_examples = 120;
  o.n_words = 6;
  o.dim = 4;
  o.n_layers = 2;
  return generate_synthetic(o);
}

TrainConfig tiny_config(ControlKind kind) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 32;
  cfg.seeds = {0, 1};
  cfg.control = kind;
  return cfg;
}

}  // namespace

TEST_SUITE("results") {

TEST_CASE("strip_wall_clock removes timing at every depth") {
  const json doc = {{"wall_clock_seconds", 1.5},
                    {"a", {{"wall_clock_seconds", 2}, {"keep", 1}}},
                    {"b", json::array({{{"wall_clock_seconds", 3}, {"x", 2}}})}};
  const json expected = {{"a", {{"keep", 1}}}, {"b", json::array({{{"x", 2}}})}};
  CHECK(strip_wall_clock(doc) == expected);
  CHECK(strip_wall_clock(json(4)) == json(4));
}

TEST_CASE("run document layout") {
  const Dataset ds = tiny_relation();
  const auto cfg = tiny_config(ControlKind::Gcn);
  const DeltaResult d = evaluate_delta(cfg, ds);
  const json doc = run_document(ds, d.with_control, &d);
  CHECK(doc["schema_version"] == "pf-results/1");
  CHECK(doc["command"] == "run");
  CHECK(doc["dataset"]["embeddings_checksum"] == ds.embeddings.checksum());
  CHECK(doc["dataset"]["n_labels"] == 2);
  CHECK(doc["config"]["control"] == "gcn");
  CHECK(doc["config"]["layer_index"].is_null());
  CHECK(doc["result"]["per_seed"].size() == 2);
  CHECK(doc["result"]["layer_index"] == 1);
  CHECK(doc["result"]["mean_f1"] == d.with_control.mean_f1);
  CHECK(doc["baseline"]["control"] == "without");
  CHECK(doc["delta_pref"]["delta"] == d.delta.delta);
  CHECK_FALSE(run_document(ds, d.with_control, nullptr).contains("delta_pref"));
}

TEST_CASE("KAN runs report clamped inputs") {
  const Dataset ds = tiny_relation();
  const auto r = run_experiment(tiny_config(ControlKind::Kan), ds);
  const json j = run_to_json(r);
  CHECK(j["per_seed"][0].contains("kan_clamped_inputs"));
  CHECK_FALSE(run_to_json(run_experiment(tiny_config(ControlKind::Mlp), ds))["per_seed"][0]
                  .contains("kan_clamped_inputs"));
}

TEST_CASE("sweep, ablation and bucket documents") {
  const Dataset ds = tiny_relation();
  const auto cfg = tiny_config(ControlKind::Message);
  const json sweep = sweep_document(ds, cfg, sweep_layers(cfg, ds));
  CHECK(sweep["command"] == "sweep-layers");
  CHECK(sweep["results"].size() == 2);
  CHECK(sweep["results"][0]["layer_index"] == 0);

  const auto a = ablate_random_graph(cfg, ds);
  const json abl = ablation_document(ds, a);
  CHECK(abl["command"] == "ablate-random-graph");
  CHECK(abl["ud"]["graph_mode"] == "ud");
  CHECK(abl["random"]["graph_mode"] == "random");
  CHECK(abl["drop"] == a.drop);

  const json buckets = bucket_document(ds, run_bucket_eval(cfg, ds, SpanDistanceBuckets({2})));
  CHECK(buckets["command"] == "bucket-eval");
  REQUIRE(buckets["buckets"].size() == 2);
  CHECK(buckets["buckets"][0]["bucket"] == "[0,2]");
  CHECK(buckets["buckets"][1]["per_seed_macro_f1"].size() == 2);
}

}  // TEST_SUITE
