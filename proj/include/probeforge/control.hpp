#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "probeforge/graph.hpp"
#include "probeforge/numcore.hpp"
#include "probeforge/rng.hpp"

namespace probeforge {

// Control modules map word features Q0 (n x d) to refined features (n x d)
// between the frozen embeddings and the probe head.
enum class ControlKind { Without, Gcn, Message, Mlp, Kan };

std::string_view to_string(ControlKind kind);
// Accepts the lowercase names "without", "gcn", "message", "mlp", "kan".
ControlKind parse_control_kind(std::string_view name);
// True for controls whose output depends on the graph.
bool uses_structure(ControlKind kind);

/// Intermediates recorded by a forward pass and consumed by the matching backward.
struct ControlTape {
  ControlKind kind = ControlKind::Without;
  bool recorded = false;
  const NormalizedAdjacency* adj = nullptr;
  // Per layer (GCN/MLP/KAN) or per hop (Message).
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
  // Message: n x (k+1) gate values.
  Matrix gates;
  // KAN: per-layer scale factor and argmax position of the max-abs scaling.
  std::vector<double> scales;
  std::vector<std::size_t> scale_argmax;
  std::size_t clamped = 0;

  void reset(ControlKind k) {
    *this = ControlTape{};
    kind = k;
  }
};

struct AffineLayer {
  Param weight;  // d x d
  Param bias;    // 1 x d
};

/// Stack shared by GCN and MLP: square layers with a post-activation residual.
struct GcnOrMlpStack {
  std::vector<AffineLayer> layers;

  static GcnOrMlpStack init(std::string_view prefix, std::size_t d, std::size_t layer_count,
                            Rng& rng);
  std::size_t dim() const { return layers.empty() ? 0 : layers.front().weight.value.rows(); }
};

struct MessageParams {
  Param gate;  // the projection vector s, d x 1
  std::uint32_t hops = 2;

  static MessageParams init(std::size_t d, std::uint32_t hops, Rng& rng);
};

struct KanOptions {
  static constexpr std::uint32_t kMaxOrder = 8;

  std::uint32_t spline_order = 3;
  std::uint32_t grid_intervals = 5;
  double grid_bound = 1.0;
  // Rescale each layer's input so its max-abs entry lands on the grid bound.
  bool input_scaling = true;
  // Add the layer input to its output.
  bool residual = true;

  std::size_t basis_count() const { return grid_intervals + spline_order; }
  void validate() const;
};

struct KanLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Param coeff;  // (in_dim * out_dim) x basis_count, row = i * out_dim + j
  Param base;   // in_dim x out_dim
};

struct KanStack {
  KanOptions options;
  std::vector<KanLayer> layers;

  static KanStack init(const KanOptions& options, std::size_t d, std::size_t layer_count,
                       Rng& rng);
  static KanStack init_layer(const KanOptions& options, std::size_t in_dim, std::size_t out_dim,
                             Rng& rng);
};

/// Values of the basis_count B-spline basis functions at x (clamped to the
/// grid). `derivs`, when non-null, receives d/dx of each basis function.
void bspline_basis(const KanOptions& options, double x, std::span<double> values,
                   std::span<double> derivs = {});

double silu(double x);

// Single-layer building blocks.
// ReLU(x W + b): the feature transformation without residual.
Matrix feature_transform(const AffineLayer& layer, const Matrix& x);
// ReLU(adj x W + b) + x.
Matrix gcn_layer(const AffineLayer& layer, const NormalizedAdjacency& adj, const Matrix& x);

// Stack forwards. When `tape` is non-null the intermediates are recorded.
Matrix forward_without(const Matrix& q0);
Matrix forward_gcn(const GcnOrMlpStack& stack, const NormalizedAdjacency& adj, const Matrix& q0,
                   ControlTape* tape = nullptr);
Matrix forward_mlp(const GcnOrMlpStack& stack, const Matrix& q0, ControlTape* tape = nullptr);
Matrix forward_message(const MessageParams& p, const NormalizedAdjacency& adj, const Matrix& q0,
                       ControlTape* tape = nullptr);
Matrix forward_kan(const KanStack& stack, const Matrix& q0, ControlTape* tape = nullptr);

// Backwards accumulate parameter gradients and return the gradient w.r.t. q0.
Matrix backward_without(const Matrix& upstream);
Matrix backward_gcn(GcnOrMlpStack& stack, const ControlTape& tape, const Matrix& upstream);
Matrix backward_mlp(GcnOrMlpStack& stack, const ControlTape& tape, const Matrix& upstream);
Matrix backward_message(MessageParams& p, const ControlTape& tape, const Matrix& upstream);
Matrix backward_kan(KanStack& stack, const ControlTape& tape, const Matrix& upstream);

/// Polymorphic owner used by the trainer.
class ControlModule {
 public:
  virtual ~ControlModule() = default;

  virtual ControlKind kind() const = 0;
  virtual Matrix forward(const NormalizedAdjacency& adj, const Matrix& q0,
                         ControlTape& tape) const = 0;
  virtual Matrix backward(const ControlTape& tape, const Matrix& upstream) = 0;
  virtual std::vector<Param*> params() = 0;

  std::size_t parameter_count();
};

struct ControlConfig {
  ControlKind kind = ControlKind::Without;
  std::size_t dim = 0;
  // GCN/MLP/KAN layer count and Message hop count.
  std::uint32_t layers = 2;
  KanOptions kan;
};

std::unique_ptr<ControlModule> make_control(const ControlConfig& cfg, Rng& rng);

}  // namespace probeforge
