#include "probeforge/probeforge.h"

#include <charconv>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <string_view>

#include <json.hpp>

#include "probeforge/data.hpp"
#include "probeforge/errors.hpp"
#include "probeforge/gradcheck.hpp"
#include "probeforge/results.hpp"
#include "probeforge/synthetic.hpp"
#include "probeforge/trainer.hpp"

struct pf_config {
  probeforge::TrainConfig cfg;
};

struct pf_dataset {
  probeforge::Dataset ds;
};

namespace {

using namespace probeforge;
using nlohmann::json;

thread_local std::string g_last_error;

pf_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return PF_ERR_CONFIG;
    case ErrorKind::Data:
    case ErrorKind::Label:
    case ErrorKind::Graph:
    case ErrorKind::Evaluation: return PF_ERR_DATA;
    case ErrorKind::Numeric:
    case ErrorKind::Optimizer: return PF_ERR_NUMERIC;
    case ErrorKind::Dimension:
    case ErrorKind::State: return PF_ERR_INTERNAL;
  }
  return PF_ERR_INTERNAL;
}

pf_status fail(pf_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
pf_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return PF_OK;
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PF_ERR_INTERNAL, e.what());
  }
}

char* to_c_string(const json& doc) {
  const std::string s = doc.dump(2) + "\n";
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key) +
                    " (expected true or false)");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view v) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = std::min(v.find(',', start), v.size());
    seeds.push_back(parse_number<std::uint64_t>("seeds", v.substr(start, comma - start)));
    start = comma + 1;
  }
  return seeds;
}

void set_key(TrainConfig& c, std::string_view key, std::string_view v) {
  if (key == "epochs") c.epochs = parse_number<std::uint32_t>(key, v);
  else if (key == "batch_size") c.batch_size = parse_number<std::uint32_t>(key, v);
  else if (key == "lr") c.adam.lr = parse_number<double>(key, v);
  else if (key == "beta1") c.adam.beta1 = parse_number<double>(key, v);
  else if (key == "beta2") c.adam.beta2 = parse_number<double>(key, v);
  else if (key == "eps") c.adam.eps = parse_number<double>(key, v);
  else if (key == "seeds") c.seeds = parse_seed_list(v);
  else if (key == "seed_base") c.seed_base = parse_number<std::uint64_t>(key, v);
  else if (key == "control") c.control = parse_control_kind(v);
  else if (key == "layers") c.layers = parse_number<std::uint32_t>(key, v);
  else if (key == "graph_mode") c.graph_mode = parse_graph_mode(v);
  else if (key == "layer_index") {
    if (v.empty() || v == "last") c.layer_index.reset();
    else c.layer_index = parse_number<std::uint32_t>(key, v);
  }
  else if (key == "graph_seed") c.graph_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "jobs") c.jobs = parse_number<std::uint32_t>(key, v);
  else if (key == "kan_spline_order") c.kan.spline_order = parse_number<std::uint32_t>(key, v);
  else if (key == "kan_grid_intervals") c.kan.grid_intervals = parse_number<std::uint32_t>(key, v);
  else if (key == "kan_grid_bound") c.kan.grid_bound = parse_number<double>(key, v);
  else if (key == "kan_input_scaling") c.kan.input_scaling = parse_bool(key, v);
  else if (key == "kan_residual") c.kan.residual = parse_bool(key, v);
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

bool check_args(const void* a, const void* b) { return a != nullptr && b != nullptr; }

}  // namespace

extern "C" {

const char* pf_version(void) { return PROBEFORGE_VERSION; }

const char* pf_last_error(void) { return g_last_error.c_str(); }

void pf_string_free(char* s) { delete[] s; }

pf_status pf_config_new(pf_config** out) {
  if (out == nullptr) return fail(PF_ERR_CONFIG, "pf_config_new: null output pointer");
  return guarded([&] { *out = new pf_config{}; });
}

void pf_config_free(pf_config* cfg) { delete cfg; }

pf_status pf_config_set(pf_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr || key == nullptr || value == nullptr) {
    return fail(PF_ERR_CONFIG, "pf_config_set: null argument");
  }
  return guarded([&] {
    TrainConfig next = cfg->cfg;
    set_key(next, key, value);
    cfg->cfg = std::move(next);
  });
}

pf_status pf_config_validate(const pf_config* cfg) {
  if (cfg == nullptr) return fail(PF_ERR_CONFIG, "pf_config_validate: null config");
  return guarded([&] { cfg->cfg.validate(); });
}

pf_status pf_config_to_json(const pf_config* cfg, char** out_json) {
  if (!check_args(cfg, out_json)) return fail(PF_ERR_CONFIG, "pf_config_to_json: null argument");
  return guarded([&] { *out_json = to_c_string(config_to_json(cfg->cfg)); });
}

pf_status pf_dataset_load(const char* dir, pf_dataset** out) {
  if (!check_args(dir, out)) return fail(PF_ERR_DATA, "pf_dataset_load: null argument");
  return guarded([&] { *out = new pf_dataset{load_dataset(dir)}; });
}

void pf_dataset_free(pf_dataset* ds) { delete ds; }

size_t pf_dataset_num_examples(const pf_dataset* ds) { return ds ? ds->ds.examples.size() : 0; }

uint32_t pf_dataset_num_layers(const pf_dataset* ds) { return ds ? ds->ds.manifest.n_layers : 0; }

pf_status pf_validate(const char* dir, char** out_json, int* out_valid) {
  if (!check_args(dir, out_json) || out_valid == nullptr) {
    return fail(PF_ERR_DATA, "pf_validate: null argument");
  }
  return guarded([&] {
    const ValidationReport report = validate_dataset(dir);
    json issues = json::array();
    for (const auto& i : report.issues) {
      issues.push_back({{"file", i.file},
                        {"location", i.location},
                        {"field", i.field},
                        {"message", i.message}});
    }
    json doc{{"schema_version", kResultsSchema},
             {"command", "validate"},
             {"dataset_dir", dir},
             {"valid", report.ok()},
             {"n_issues", report.issues.size()},
             {"issues", issues}};
    if (report.dataset) doc["dataset"] = dataset_to_json(*report.dataset);
    *out_valid = report.ok() ? 1 : 0;
    *out_json = to_c_string(doc);
  });
}

pf_status pf_run(const pf_config* cfg, const pf_dataset* ds, int baseline, char** out_json) {
  if (!check_args(cfg, ds) || out_json == nullptr) return fail(PF_ERR_CONFIG, "pf_run: null argument");
  return guarded([&] {
    if (baseline != 0) {
      const DeltaResult d = evaluate_delta(cfg->cfg, ds->ds);
      *out_json = to_c_string(run_document(ds->ds, d.with_control, &d));
    } else {
      const RunResult r = run_experiment(cfg->cfg, ds->ds);
      *out_json = to_c_string(run_document(ds->ds, r, nullptr));
    }
  });
}

pf_status pf_sweep_layers(const pf_config* cfg, const pf_dataset* ds, char** out_json) {
  if (!check_args(cfg, ds) || out_json == nullptr) {
    return fail(PF_ERR_CONFIG, "pf_sweep_layers: null argument");
  }
  return guarded([&] {
    *out_json = to_c_string(sweep_document(ds->ds, cfg->cfg, sweep_layers(cfg->cfg, ds->ds)));
  });
}

pf_status pf_ablate_random_graph(const pf_config* cfg, const pf_dataset* ds, char** out_json) {
  if (!check_args(cfg, ds) || out_json == nullptr) {
    return fail(PF_ERR_CONFIG, "pf_ablate_random_graph: null argument");
  }
  return guarded([&] {
    *out_json = to_c_string(ablation_document(ds->ds, ablate_random_graph(cfg->cfg, ds->ds)));
  });
}

pf_status pf_bucket_eval(const pf_config* cfg, const pf_dataset* ds, const uint32_t* bounds,
                         size_t n_bounds, char** out_json) {
  if (!check_args(cfg, ds) || out_json == nullptr) {
    return fail(PF_ERR_CONFIG, "pf_bucket_eval: null argument");
  }
  return guarded([&] {
    const SpanDistanceBuckets buckets =
        bounds == nullptr ? SpanDistanceBuckets()
                          : SpanDistanceBuckets(std::vector<std::uint32_t>(bounds, bounds + n_bounds));
    *out_json = to_c_string(bucket_document(ds->ds, run_bucket_eval(cfg->cfg, ds->ds, buckets)));
  });
}

pf_status pf_gradcheck(uint64_t seed, uint32_t instances, char** out_json, int* out_passed) {
  if (out_json == nullptr || out_passed == nullptr) {
    return fail(PF_ERR_CONFIG, "pf_gradcheck: null argument");
  }
  return guarded([&] {
    if (instances == 0) throw ConfigError("gradcheck needs at least one instance");
    const GradCheckReport r = run_gradcheck(seed, instances);
    json checks = json::array();
    for (const auto& e : r.entries) {
      checks.push_back({{"name", e.name},
                        {"instances", e.instances},
                        {"max_rel_error", e.max_rel_error},
                        {"passed", e.passed}});
    }
    *out_passed = r.passed() ? 1 : 0;
    *out_json = to_c_string(json{{"schema_version", kResultsSchema},
                                 {"command", "gradcheck"},
                                 {"seed", seed},
                                 {"h", r.h},
                                 {"tolerance", r.tolerance},
                                 {"checks", checks},
                                 {"passed", r.passed()},
                                 {"wall_clock_seconds", r.seconds}});
  });
}

void pf_synth_options_default(pf_synth_options* opts) {
  if (opts == nullptr) return;
  const SynthOptions d;
  opts->task = "transform";
  opts->n_examples = d.n_examples;
  opts->n_words = d.n_words;
  opts->dim = d.dim;
  opts->seed = d.seed;
  opts->n_layers = d.n_layers;
  opts->signal_layer = -1;
  opts->test_fraction = d.test_fraction;
  opts->scale = 0.0;
  opts->filler_scale = d.filler_scale;
}

pf_status pf_synth(const pf_synth_options* opts, const char* dir) {
  if (!check_args(opts, dir) || opts->task == nullptr) {
    return fail(PF_ERR_CONFIG, "pf_synth: null argument");
  }
  return guarded([&] {
    SynthOptions o;
    o.task = parse_synth_task(opts->task);
    o.n_examples = opts->n_examples;
    o.n_words = opts->n_words;
    o.dim = opts->dim;
    o.seed = opts->seed;
    o.n_layers = opts->n_layers;
    if (opts->signal_layer >= 0) o.signal_layer = static_cast<std::uint32_t>(opts->signal_layer);
    o.test_fraction = opts->test_fraction;
    if (opts->scale != 0.0) o.scale = opts->scale;
    o.filler_scale = opts->filler_scale;
    gen_synthetic(o, dir);
  });
}

}  // extern "C"
