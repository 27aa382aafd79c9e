#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "probeforge/data.hpp"

namespace probeforge {

// Words at odd depth below node 0 are function words; since trees are bipartite
// every neighbour of a function word is a content word and vice versa.
//
// transform: unary, probes content words; label is the sign of (u.x)(v.x) for the
//   word's own embedding x. Function words carry no u or v component and are
//   shrunk by filler_scale. A linear probe cannot separate it; one ReLU layer can.
// structure: unary, probes function words, whose u component is removed; label is
//   the sign of sum_j u.x_j / sqrt(deg_j + 1) over tree neighbours j.
// relation: binary; label is the sign of (u.x_i)(v.x_j) for the two span words.
enum class SynthTask { Transform, Structure, Relation };

std::string_view to_string(SynthTask t);
SynthTask parse_synth_task(std::string_view s);

struct SynthOptions {
  SynthTask task = SynthTask::Transform;
  std::size_t n_examples = 6000;
  std::uint32_t n_words = 20;
  std::uint32_t dim = 16;
  std::uint64_t seed = 0;
  std::uint32_t n_layers = 1;
  // Layer holding the signal; the others hold independent noise. Defaults to the last.
  std::optional<std::uint32_t> signal_layer;
  // Trailing fraction of examples assigned to the test split; the rest is train.
  double test_fraction = 1.0 / 6.0;
  // Standard deviation of the embedding entries; default_scale(task) when unset.
  std::optional<double> scale;
  // Norm factor applied to transform-task function words.
  double filler_scale = 0.25;
};

/// Fixed projection directions u and v (v orthogonal to u) drawn for a generator seed.
struct SynthProjections {
  std::vector<double> u;
  std::vector<double> v;
};
SynthProjections synth_projections(std::uint64_t seed, std::uint32_t dim);

/// 3 for structure, 1 otherwise.
double default_scale(SynthTask t);

/// Function-word flags of a tree: odd depth below node 0.
std::vector<bool> function_words(const SentenceGraph& tree);

Dataset generate_synthetic(const SynthOptions& opts);
void gen_synthetic(const SynthOptions& opts, const std::filesystem::path& dir);

}  // namespace probeforge
