#include "probeforge/results.hpp"

namespace probeforge {

using nlohmann::json;

namespace {

json envelope(std::string_view command) {
  return json{{"schema_version", kResultsSchema}, {"command", command}};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json config_to_json(const TrainConfig& cfg) {
  return json{{"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"lr", cfg.adam.lr},
              {"beta1", cfg.adam.beta1},
              {"beta2", cfg.adam.beta2},
              {"eps", cfg.adam.eps},
              {"seeds", cfg.seeds},
              {"seed_base", cfg.seed_base},
              {"control", to_string(cfg.control)},
              {"layers", cfg.layers},
              {"graph_mode", to_string(cfg.graph_mode)},
              {"layer_index", cfg.layer_index ? json(*cfg.layer_index) : json(nullptr)},
              {"graph_seed", cfg.graph_seed},
              {"kan_spline_order", cfg.kan.spline_order},
              {"kan_grid_intervals", cfg.kan.grid_intervals},
              {"kan_grid_bound", cfg.kan.grid_bound},
              {"kan_input_scaling", cfg.kan.input_scaling},
              {"kan_residual", cfg.kan.residual},
              {"jobs", cfg.jobs}};
}

json dataset_to_json(const Dataset& ds) {
  const auto& m = ds.manifest;
  return json{{"task_name", m.task_name},
              {"arity", to_string(m.arity)},
              {"loss_kind", to_string(m.loss_kind)},
              {"embedding_dim", m.embedding_dim},
              {"n_layers", m.n_layers},
              {"n_labels", ds.vocab.size()},
              {"split_sizes",
               {{"train", m.split_sizes.train}, {"dev", m.split_sizes.dev}, {"test", m.split_sizes.test}}},
              {"embeddings_checksum", ds.embeddings.checksum()}};
}

json run_to_json(const RunResult& r) {
  json seeds = json::array();
  for (const auto& s : r.seeds) {
    json one{{"seed", s.seed},
             {"macro_f1", s.macro_f1},
             {"loss_curve", s.loss_curve},
             {"updates", s.updates},
             {"wall_clock_seconds", s.wall_clock_seconds}};
    if (r.config.control == ControlKind::Kan) one["kan_clamped_inputs"] = s.kan_clamped;
    seeds.push_back(std::move(one));
  }
  std::vector<double> f1s;
  for (const auto& s : r.seeds) f1s.push_back(s.macro_f1);
  return json{{"control", to_string(r.config.control)},
              {"graph_mode", to_string(r.config.graph_mode)},
              {"layer_index", r.layer_index},
              {"per_seed", std::move(seeds)},
              {"f1_per_seed", f1s},
              {"mean_f1", r.mean_f1},
              {"variance_f1", r.variance_f1},
              {"mean_loss_curve", r.mean_loss_curve},
              {"wall_clock_seconds", r.wall_clock_seconds}};
}

json delta_to_json(const DeltaPref& d) {
  return json{{"with_control", d.with_control},
              {"without_control", d.without_control},
              {"delta", d.delta}};
}

json run_document(const Dataset& ds, const RunResult& r, const DeltaResult* delta) {
  json doc = envelope("run");
  doc["dataset"] = dataset_to_json(ds);
  doc["config"] = config_to_json(r.config);
  doc["result"] = run_to_json(r);
  if (delta != nullptr) {
    doc["baseline"] = run_to_json(delta->baseline);
    doc["delta_pref"] = delta_to_json(delta->delta);
  }
  return doc;
}

json sweep_document(const Dataset& ds, const TrainConfig& cfg, const std::vector<RunResult>& runs) {
  json doc = envelope("sweep-layers");
  doc["dataset"] = dataset_to_json(ds);
  doc["config"] = config_to_json(cfg);
  json arr = json::array();
  for (const auto& r : runs) arr.push_back(run_to_json(r));
  doc["results"] = std::move(arr);
  return doc;
}

json ablation_document(const Dataset& ds, const AblationResult& a) {
  json doc = envelope("ablate-random-graph");
  doc["dataset"] = dataset_to_json(ds);
  doc["config"] = config_to_json(a.ud.config);
  doc["ud"] = run_to_json(a.ud);
  doc["random"] = run_to_json(a.random);
  doc["drop"] = a.drop;
  return doc;
}

json bucket_document(const Dataset& ds, const BucketRun& b) {
  json doc = envelope("bucket-eval");
  doc["dataset"] = dataset_to_json(ds);
  doc["config"] = config_to_json(b.run.config);
  doc["result"] = run_to_json(b.run);
  json buckets = json::array();
  for (std::size_t i = 0; i < b.buckets.size(); ++i) {
    json per_seed = json::array();
    for (const auto& row : b.per_seed) per_seed.push_back(optional_number(row[i]));
    buckets.push_back(json{{"bucket", b.buckets[i]},
                           {"n_examples", b.counts[i]},
                           {"mean_macro_f1", optional_number(b.mean[i])},
                           {"per_seed_macro_f1", std::move(per_seed)}});
  }
  doc["buckets"] = std::move(buckets);
  return doc;
}

json strip_wall_clock(json doc) {
  if (doc.is_object()) {
    doc.erase("wall_clock_seconds");
    for (auto& [key, value] : doc.items()) value = strip_wall_clock(std::move(value));
  } else if (doc.is_array()) {
    for (auto& value : doc) value = strip_wall_clock(std::move(value));
  }
  return doc;
}

}  // namespace probeforge
