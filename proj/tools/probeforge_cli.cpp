// probeforge command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "probeforge/probeforge.h"

namespace {

struct ConfigDeleter {
  void operator()(pf_config* c) const { pf_config_free(c); }
};
struct DatasetDeleter {
  void operator()(pf_dataset* d) const { pf_dataset_free(d); }
};
using ConfigPtr = std::unique_ptr<pf_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<pf_dataset, DatasetDeleter>;

struct CString {
  char* p = nullptr;
  ~CString() { pf_string_free(p); }
};

int report(pf_status s) {
  std::cerr << "probeforge: " << pf_last_error() << "\n";
  return static_cast<int>(s);
}

int emit(const char* text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::fputs(text, stdout);
    return 0;
  }
  std::ofstream out(output, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "probeforge: cannot write " << output << "\n";
    return PF_ERR_DATA;
  }
  return 0;
}

// TrainConfig fields, kept as text and handed to pf_config_set unchanged.
struct TrainFlags {
  std::map<std::string, std::string> values;
  std::optional<unsigned> seed_count;
  std::string dataset;
  std::string output;

  void attach(CLI::App* cmd) {
    cmd->add_option("--dataset", dataset, "Dataset directory")->required();
    cmd->add_option("--output,-o", output, "Results file (default: stdout)");
    text(cmd, "--epochs", "epochs", "Training epochs");
    text(cmd, "--batch-size", "batch_size", "Examples per update");
    text(cmd, "--lr", "lr", "Adam learning rate");
    text(cmd, "--beta1", "beta1", "Adam beta1");
    text(cmd, "--beta2", "beta2", "Adam beta2");
    text(cmd, "--eps", "eps", "Adam epsilon");
    auto* count = cmd->add_option("--seeds", seed_count, "Use seeds 0..N-1")
                      ->check(CLI::PositiveNumber);
    auto* list = text(cmd, "--seed-list", "seeds", "Comma-separated seeds");
    count->excludes(list);
    text(cmd, "--seed-base", "seed_base", "Offset added to every seed")
        ->envname("PROBEFORGE_SEED_BASE");
    text(cmd, "--control", "control", "without, gcn, message, mlp or kan");
    text(cmd, "--layers", "layers", "Control layers (hops for message)");
    text(cmd, "--graph-mode", "graph_mode", "ud or random");
    text(cmd, "--layer-index", "layer_index", "Embedding layer (default: last)");
    text(cmd, "--graph-seed", "graph_seed", "Seed of the random replacement graphs");
    text(cmd, "--jobs", "jobs", "Worker threads for per-seed runs");
    text(cmd, "--kan-spline-order", "kan_spline_order", "KAN B-spline order");
    text(cmd, "--kan-grid-intervals", "kan_grid_intervals", "KAN grid intervals");
    text(cmd, "--kan-grid-bound", "kan_grid_bound", "KAN grid half-width");
    text(cmd, "--kan-input-scaling", "kan_input_scaling", "Rescale KAN inputs onto the grid");
    text(cmd, "--kan-residual", "kan_residual", "Add the KAN layer input to its output");
  }

  CLI::Option* text(CLI::App* cmd, const std::string& flag, const std::string& key,
                    const std::string& help) {
    return cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  // Builds the config; returns 0 or an exit code.
  int build(ConfigPtr& cfg) const {
    pf_config* raw = nullptr;
    if (pf_status s = pf_config_new(&raw); s != PF_OK) return report(s);
    cfg.reset(raw);
    auto entries = values;
    if (seed_count) {
      std::string list;
      for (unsigned i = 0; i < *seed_count; ++i) list += (i ? "," : "") + std::to_string(i);
      entries["seeds"] = list;
    }
    for (const auto& [key, value] : entries) {
      if (pf_status s = pf_config_set(cfg.get(), key.c_str(), value.c_str()); s != PF_OK) {
        return report(s);
      }
    }
    if (pf_status s = pf_config_validate(cfg.get()); s != PF_OK) return report(s);
    return 0;
  }
};

template <typename Call>
int run_training_command(const TrainFlags& flags, Call&& call) {
  ConfigPtr cfg;
  if (int rc = flags.build(cfg); rc != 0) return rc;
  pf_dataset* raw = nullptr;
  if (pf_status s = pf_dataset_load(flags.dataset.c_str(), &raw); s != PF_OK) return report(s);
  DatasetPtr ds(raw);
  CString json;
  if (pf_status s = call(cfg.get(), ds.get(), &json.p); s != PF_OK) return report(s);
  return emit(json.p, flags.output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probeforge: control-module probing experiments"};
  app.set_version_flag("--version", std::string(pf_version()));
  app.require_subcommand(1);

  TrainFlags run_flags, sweep_flags, ablate_flags, bucket_flags;
  bool baseline = false;
  auto* run = app.add_subcommand("run", "Train and evaluate one configuration over all seeds");
  run_flags.attach(run);
  run->add_flag("--baseline", baseline, "Also run the Without control and report the difference");

  auto* sweep = app.add_subcommand("sweep-layers", "One run per embedding layer");
  sweep_flags.attach(sweep);

  auto* ablate = app.add_subcommand("ablate-random-graph",
                                    "Compare dependency graphs against random trees");
  ablate_flags.attach(ablate);

  std::vector<std::uint32_t> bounds;
  auto* bucket = app.add_subcommand("bucket-eval", "Macro-F1 per span-distance bucket");
  bucket_flags.attach(bucket);
  bucket->add_option("--bounds", bounds, "Bucket upper bounds, e.g. 3,6,9,12,15")
      ->delimiter(',');

  std::uint64_t gc_seed = 0;
  std::uint32_t gc_instances = 20;
  std::string gc_output;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--seed", gc_seed, "Instance generator seed");
  gradcheck->add_option("--instances", gc_instances, "Random instances per check")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--output,-o", gc_output, "Report file (default: stdout)");

  pf_synth_options synth_opts;
  pf_synth_options_default(&synth_opts);
  std::string synth_task = synth_opts.task;
  std::string synth_dir;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--task", synth_task, "transform, structure or relation")
      ->check(CLI::IsMember({"transform", "structure", "relation"}));
  synth->add_option("--output,-o", synth_dir, "Dataset directory")->required();
  synth->add_option("--n-examples", synth_opts.n_examples, "Examples (train + test)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--n-words", synth_opts.n_words, "Words per sentence");
  synth->add_option("--dim", synth_opts.dim, "Embedding dimension");
  synth->add_option("--seed", synth_opts.seed, "Generator seed");
  synth->add_option("--n-layers", synth_opts.n_layers, "Embedding layers");
  synth->add_option("--signal-layer", synth_opts.signal_layer,
                    "Layer carrying the signal (-1: last)");
  synth->add_option("--test-fraction", synth_opts.test_fraction, "Fraction assigned to test");
  synth->add_option("--scale", synth_opts.scale, "Standard deviation of embedding entries (0: task default)");
  synth->add_option("--filler-scale", synth_opts.filler_scale,
                    "Norm factor of transform-task function words");

  std::string validate_dir, validate_output;
  auto* validate = app.add_subcommand("validate", "Check a dataset directory");
  validate->add_option("--dataset", validate_dir, "Dataset directory")->required();
  validate->add_option("--output,-o", validate_output, "Report file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return PF_ERR_CONFIG;
  }

  if (*run) {
    return run_training_command(run_flags, [&](pf_config* c, pf_dataset* d, char** out) {
      return pf_run(c, d, baseline ? 1 : 0, out);
    });
  }
  if (*sweep) return run_training_command(sweep_flags, pf_sweep_layers);
  if (*ablate) return run_training_command(ablate_flags, pf_ablate_random_graph);
  if (*bucket) {
    return run_training_command(bucket_flags, [&](pf_config* c, pf_dataset* d, char** out) {
      return pf_bucket_eval(c, d, bounds.empty() ? nullptr : bounds.data(), bounds.size(), out);
    });
  }
  if (*gradcheck) {
    CString json;
    int passed = 0;
    if (pf_status s = pf_gradcheck(gc_seed, gc_instances, &json.p, &passed); s != PF_OK) {
      return report(s);
    }
    if (int rc = emit(json.p, gc_output); rc != 0) return rc;
    if (!passed) {
      std::cerr << "probeforge: gradient check failed\n";
      return PF_ERR_NUMERIC;
    }
    return 0;
  }
  if (*synth) {
    synth_opts.task = synth_task.c_str();
    if (pf_status s = pf_synth(&synth_opts, synth_dir.c_str()); s != PF_OK) return report(s);
    return 0;
  }
  if (*validate) {
    CString json;
    int valid = 0;
    if (pf_status s = pf_validate(validate_dir.c_str(), &json.p, &valid); s != PF_OK) {
      return report(s);
    }
    if (int rc = emit(json.p, validate_output); rc != 0) return rc;
    if (!valid) {
      std::cerr << "probeforge: " << validate_dir << " failed validation\n";
      return PF_ERR_DATA;
    }
    return 0;
  }
  return PF_ERR_CONFIG;
}
