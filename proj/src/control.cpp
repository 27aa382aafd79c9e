#include "probeforge/control.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "probeforge/errors.hpp"

namespace probeforge {

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

void require_features(const Matrix& q0, std::size_t d, std::string_view who) {
  if (q0.cols() != d) {
    throw DimensionError(std::string(who) + ": features " + q0.shape_string() +
                         " do not match module width " + std::to_string(d));
  }
}

void require_graph(const NormalizedAdjacency& adj, const Matrix& q0, std::string_view who) {
  if (adj.n() != q0.rows()) {
    throw DimensionError(std::string(who) + ": adjacency over " + std::to_string(adj.n()) +
                         " nodes vs features " + q0.shape_string());
  }
}

void require_tape(const ControlTape& tape, ControlKind kind, const Matrix& upstream) {
  if (!tape.recorded || tape.kind != kind) {
    throw StateError("backward_" + std::string(to_string(kind)) +
                     " called without a recorded forward pass");
  }
  if (!tape.inputs.empty() && !upstream.same_shape(tape.inputs.front())) {
    throw DimensionError("backward_" + std::string(to_string(kind)) + ": upstream " +
                         upstream.shape_string() + " vs forward output " +
                         tape.inputs.front().shape_string());
  }
}

// Shared by GCN (with adjacency) and MLP (adj == nullptr).
Matrix forward_affine_stack(const GcnOrMlpStack& stack, const NormalizedAdjacency* adj,
                            const Matrix& q0, ControlTape* tape, ControlKind kind) {
  require_features(q0, stack.dim(), to_string(kind));
  if (adj != nullptr) require_graph(*adj, q0, to_string(kind));
  if (tape != nullptr) {
    tape->reset(kind);
    tape->adj = adj;
  }
  Matrix q = q0;
  for (const AffineLayer& layer : stack.layers) {
    Matrix mixed = adj != nullptr ? apply_propagation(*adj, q) : q;
    Matrix z = add_row(matmul(mixed, layer.weight.value), layer.bias.value);
    Matrix next = add(relu(z), q);
    if (tape != nullptr) {
      tape->inputs.push_back(std::move(q));
      tape->pre_activations.push_back(std::move(z));
    }
    q = std::move(next);
  }
  if (tape != nullptr) tape->recorded = true;
  return q;
}

Matrix backward_affine_stack(GcnOrMlpStack& stack, const ControlTape& tape,
                             const Matrix& upstream, ControlKind kind) {
  require_tape(tape, kind, upstream);
  const NormalizedAdjacency* adj = kind == ControlKind::Gcn ? tape.adj : nullptr;
  if (kind == ControlKind::Gcn && adj == nullptr) {
    throw StateError("backward_gcn: tape holds no adjacency");
  }
  Matrix grad = upstream;
  for (std::size_t l = stack.layers.size(); l-- > 0;) {
    AffineLayer& layer = stack.layers[l];
    const Matrix& input = tape.inputs[l];
    Matrix dz = relu_backward(tape.pre_activations[l], grad);
    Matrix mixed = adj != nullptr ? apply_propagation(*adj, input) : input;
    add_inplace(layer.weight.grad, matmul_tn(mixed, dz));
    add_inplace(layer.bias.grad, colsum(dz));
    Matrix dmixed = matmul_nt(dz, layer.weight.value);
    // The normalized adjacency is symmetric, so its transpose is itself.
    if (adj != nullptr) dmixed = apply_propagation(*adj, dmixed);
    add_inplace(grad, dmixed);
  }
  return grad;
}

}  // namespace

std::string_view to_string(ControlKind kind) {
  switch (kind) {
    case ControlKind::Without: return "without";
    case ControlKind::Gcn: return "gcn";
    case ControlKind::Message: return "message";
    case ControlKind::Mlp: return "mlp";
    case ControlKind::Kan: return "kan";
  }
  return "unknown";
}

ControlKind parse_control_kind(std::string_view name) {
  for (auto k : {ControlKind::Without, ControlKind::Gcn, ControlKind::Message, ControlKind::Mlp,
                 ControlKind::Kan}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown control kind '" + std::string(name) +
                    "' (expected without, gcn, message, mlp or kan)");
}

bool uses_structure(ControlKind kind) {
  return kind == ControlKind::Gcn || kind == ControlKind::Message;
}

GcnOrMlpStack GcnOrMlpStack::init(std::string_view prefix, std::size_t d,
                                  std::size_t layer_count, Rng& rng) {
  if (layer_count == 0) throw ConfigError("layer count must be at least 1");
  GcnOrMlpStack stack;
  const double bound = std::sqrt(6.0 / static_cast<double>(2 * d));
  for (std::size_t l = 0; l < layer_count; ++l) {
    const std::string base = std::string(prefix) + "." + std::to_string(l);
    stack.layers.push_back({Param(base + ".weight", uniform_matrix(d, d, bound, rng)),
                            Param(base + ".bias", Matrix(1, d))});
  }
  return stack;
}

MessageParams MessageParams::init(std::size_t d, std::uint32_t hops, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  return MessageParams{Param("message.gate", uniform_matrix(d, 1, bound, rng)), hops};
}

void KanOptions::validate() const {
  if (spline_order < 1 || spline_order > kMaxOrder) {
    throw ConfigError("KAN spline order must be in [1, " + std::to_string(kMaxOrder) + "]");
  }
  if (grid_intervals < 1) throw ConfigError("KAN grid needs at least one interval");
  if (!(grid_bound > 0.0)) throw ConfigError("KAN grid bound must be positive");
}

KanStack KanStack::init(const KanOptions& options, std::size_t d, std::size_t layer_count,
                        Rng& rng) {
  if (layer_count == 0) throw ConfigError("layer count must be at least 1");
  KanStack stack;
  stack.options = options;
  for (std::size_t l = 0; l < layer_count; ++l) {
    KanStack one = init_layer(options, d, d, rng);
    one.layers[0].coeff.name = "kan." + std::to_string(l) + ".coeff";
    one.layers[0].base.name = "kan." + std::to_string(l) + ".base";
    stack.layers.push_back(std::move(one.layers[0]));
  }
  return stack;
}

KanStack KanStack::init_layer(const KanOptions& options, std::size_t in_dim,
                              std::size_t out_dim, Rng& rng) {
  options.validate();
  if (options.residual && in_dim != out_dim) {
    throw ConfigError("KAN residual needs equal input and output widths");
  }
  KanStack stack;
  stack.options = options;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  KanLayer layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.coeff = Param("kan.0.coeff",
                      uniform_matrix(in_dim * out_dim, options.basis_count(), 0.1 * bound, rng));
  layer.base = Param("kan.0.base", uniform_matrix(in_dim, out_dim, bound, rng));
  stack.layers.push_back(std::move(layer));
  return stack;
}

void bspline_basis(const KanOptions& options, double x, std::span<double> values,
                   std::span<double> derivs) {
  const auto order = static_cast<std::ptrdiff_t>(options.spline_order);
  const auto intervals = static_cast<std::ptrdiff_t>(options.grid_intervals);
  const std::size_t count = options.basis_count();
  if (values.size() != count || (!derivs.empty() && derivs.size() != count)) {
    throw DimensionError("bspline_basis: output span does not hold " + std::to_string(count) +
                         " basis values");
  }
  std::fill(values.begin(), values.end(), 0.0);
  if (!derivs.empty()) std::fill(derivs.begin(), derivs.end(), 0.0);

  const double bound = options.grid_bound;
  const double h = 2.0 * bound / static_cast<double>(intervals);
  x = std::clamp(x, -bound, bound);
  // Knot t_j = -bound + (j - order) h for j = 0 .. intervals + 2 order.
  auto knot = [&](std::ptrdiff_t j) { return -bound + static_cast<double>(j - order) * h; };
  // Degree-0 interval [t_j, t_j+1) containing x; x == bound uses [t_(n+k), t_(n+k+1)).
  auto j = static_cast<std::ptrdiff_t>(std::floor((x + bound) / h)) + order;
  j = std::clamp(j, order, intervals + order);
  while (j > order && x < knot(j)) --j;
  while (j < intervals + order && x >= knot(j + 1)) ++j;

  // local[r] holds basis (j - p + r) of degree p; lower keeps degree order-1.
  std::array<double, KanOptions::kMaxOrder + 1> local{};
  std::array<double, KanOptions::kMaxOrder + 1> lower{};
  local[0] = 1.0;
  for (std::ptrdiff_t p = 1; p <= order; ++p) {
    if (p == order) lower = local;
    const double denom = static_cast<double>(p) * h;
    for (std::ptrdiff_t r = p; r >= 0; --r) {
      const std::ptrdiff_t i = j - p + r;
      double v = 0.0;
      if (r >= 1) v += (x - knot(i)) / denom * local[r - 1];
      if (r < p) v += (knot(i + p + 1) - x) / denom * local[r];
      local[r] = v;
    }
  }
  for (std::ptrdiff_t r = 0; r <= order; ++r) {
    const std::ptrdiff_t i = j - order + r;
    if (i < 0 || i >= static_cast<std::ptrdiff_t>(count)) continue;
    values[static_cast<std::size_t>(i)] = local[r];
    if (!derivs.empty()) {
      // Uniform knots: B'_{i,k} = (B_{i,k-1} - B_{i+1,k-1}) / h.
      const double left = r >= 1 ? lower[r - 1] : 0.0;
      const double right = r < order ? lower[r] : 0.0;
      derivs[static_cast<std::size_t>(i)] = (left - right) / h;
    }
  }
}

double silu(double x) { return x * sigmoid(x); }

namespace {

double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace

Matrix feature_transform(const AffineLayer& layer, const Matrix& x) {
  return relu(add_row(matmul(x, layer.weight.value), layer.bias.value));
}

Matrix gcn_layer(const AffineLayer& layer, const NormalizedAdjacency& adj, const Matrix& x) {
  return add(feature_transform(layer, apply_propagation(adj, x)), x);
}

Matrix forward_without(const Matrix& q0) { return q0; }

Matrix backward_without(const Matrix& upstream) { return upstream; }

Matrix forward_gcn(const GcnOrMlpStack& stack, const NormalizedAdjacency& adj, const Matrix& q0,
                   ControlTape* tape) {
  return forward_affine_stack(stack, &adj, q0, tape, ControlKind::Gcn);
}

Matrix forward_mlp(const GcnOrMlpStack& stack, const Matrix& q0, ControlTape* tape) {
  return forward_affine_stack(stack, nullptr, q0, tape, ControlKind::Mlp);
}

Matrix backward_gcn(GcnOrMlpStack& stack, const ControlTape& tape, const Matrix& upstream) {
  return backward_affine_stack(stack, tape, upstream, ControlKind::Gcn);
}

Matrix backward_mlp(GcnOrMlpStack& stack, const ControlTape& tape, const Matrix& upstream) {
  return backward_affine_stack(stack, tape, upstream, ControlKind::Mlp);
}

Matrix forward_message(const MessageParams& p, const NormalizedAdjacency& adj, const Matrix& q0,
                       ControlTape* tape) {
  require_features(q0, p.gate.value.rows(), "message");
  require_graph(adj, q0, "message");
  const std::size_t n = q0.rows();
  const std::size_t d = q0.cols();
  const std::size_t hops = p.hops;

  std::vector<Matrix> stacked;
  stacked.reserve(hops + 1);
  stacked.push_back(q0);
  for (std::size_t l = 0; l < hops; ++l) stacked.push_back(apply_propagation(adj, stacked.back()));

  Matrix gates(n, hops + 1);
  Matrix out(n, d);
  for (std::size_t l = 0; l <= hops; ++l) {
    const Matrix score = matmul(stacked[l], p.gate.value);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = sigmoid(score(i, 0));
      gates(i, l) = g;
      auto src = stacked[l].row(i);
      auto dst = out.row(i);
      for (std::size_t c = 0; c < d; ++c) dst[c] += g * src[c];
    }
  }
  if (tape != nullptr) {
    tape->reset(ControlKind::Message);
    tape->adj = &adj;
    tape->inputs = std::move(stacked);
    tape->gates = std::move(gates);
    tape->recorded = true;
  }
  return out;
}

Matrix backward_message(MessageParams& p, const ControlTape& tape, const Matrix& upstream) {
  require_tape(tape, ControlKind::Message, upstream);
  if (tape.adj == nullptr) throw StateError("backward_message: tape holds no adjacency");
  const std::size_t hops = tape.inputs.size() - 1;
  const std::size_t n = upstream.rows();
  const std::size_t d = upstream.cols();
  const auto s = p.gate.value.values();
  auto ds = p.gate.grad.values();

  // Gradient w.r.t. each hop's representation, before chaining through propagation.
  std::vector<Matrix> dhop(hops + 1, Matrix(n, d));
  for (std::size_t l = 0; l <= hops; ++l) {
    const Matrix& q = tape.inputs[l];
    for (std::size_t i = 0; i < n; ++i) {
      const double g = tape.gates(i, l);
      auto up = upstream.row(i);
      auto qi = q.row(i);
      double dg = 0.0;
      for (std::size_t c = 0; c < d; ++c) dg += up[c] * qi[c];
      const double dscore = dg * g * (1.0 - g);
      auto dq = dhop[l].row(i);
      for (std::size_t c = 0; c < d; ++c) {
        dq[c] += g * up[c] + dscore * s[c];
        ds[c] += dscore * qi[c];
      }
    }
  }
  Matrix grad = std::move(dhop[hops]);
  for (std::size_t l = hops; l-- > 0;) {
    grad = apply_propagation(*tape.adj, grad);
    add_inplace(grad, dhop[l]);
  }
  return grad;
}

namespace {

// u = clamp(x * scale) for one KAN layer; returns the number of clamped entries.
std::size_t scale_and_clamp(const KanOptions& opt, const Matrix& x, double scale, Matrix& u) {
  const double bound = opt.grid_bound;
  const double tol = bound * 1e-12;
  std::size_t clamped = 0;
  u = x;
  for (double& v : u.values()) {
    v *= scale;
    if (std::abs(v) > bound + tol) ++clamped;
    v = std::clamp(v, -bound, bound);
  }
  return clamped;
}

}  // namespace

Matrix forward_kan(const KanStack& stack, const Matrix& q0, ControlTape* tape) {
  if (stack.layers.empty()) throw ConfigError("KAN stack has no layers");
  require_features(q0, stack.layers.front().in_dim, "kan");
  const KanOptions& opt = stack.options;
  const std::size_t nb = opt.basis_count();
  if (tape != nullptr) tape->reset(ControlKind::Kan);

  std::vector<double> basis(nb);
  Matrix x = q0;
  for (const KanLayer& layer : stack.layers) {
    if (x.cols() != layer.in_dim) {
      throw DimensionError("kan: layer input " + x.shape_string() + " vs width " +
                           std::to_string(layer.in_dim));
    }
    double scale = 1.0;
    std::size_t argmax = 0;
    if (opt.input_scaling) {
      double m = 0.0;
      auto xs = x.values();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(xs[i]) > m) {
          m = std::abs(xs[i]);
          argmax = i;
        }
      }
      if (m > 0.0) scale = opt.grid_bound / m;
    }
    Matrix u;
    const std::size_t clamped = scale_and_clamp(opt, x, scale, u);

    Matrix out = opt.residual ? x : Matrix(x.rows(), layer.out_dim);
    const auto coeff = layer.coeff.value.values();
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto orow = out.row(r);
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        const double ui = u(r, i);
        bspline_basis(opt, ui, basis);
        const double base_act = silu(ui);
        for (std::size_t j = 0; j < layer.out_dim; ++j) {
          const double* c = coeff.data() + (i * layer.out_dim + j) * nb;
          double acc = layer.base.value(i, j) * base_act;
          for (std::size_t b = 0; b < nb; ++b) acc += c[b] * basis[b];
          orow[j] += acc;
        }
      }
    }
    if (tape != nullptr) {
      tape->inputs.push_back(std::move(x));
      tape->pre_activations.push_back(std::move(u));
      tape->scales.push_back(scale);
      tape->scale_argmax.push_back(argmax);
      tape->clamped += clamped;
    }
    x = std::move(out);
  }
  if (tape != nullptr) tape->recorded = true;
  return x;
}

Matrix backward_kan(KanStack& stack, const ControlTape& tape, const Matrix& upstream) {
  if (!tape.recorded || tape.kind != ControlKind::Kan) {
    throw StateError("backward_kan called without a recorded forward pass");
  }
  const KanOptions& opt = stack.options;
  const std::size_t nb = opt.basis_count();
  const double bound = opt.grid_bound;
  std::vector<double> basis(nb);
  std::vector<double> dbasis(nb);

  Matrix grad = upstream;
  for (std::size_t l = stack.layers.size(); l-- > 0;) {
    KanLayer& layer = stack.layers[l];
    const Matrix& x = tape.inputs[l];
    const Matrix& u = tape.pre_activations[l];
    const double scale = tape.scales[l];
    if (grad.rows() != x.rows() || grad.cols() != layer.out_dim) {
      throw DimensionError("backward_kan: upstream " + grad.shape_string() +
                           " does not match layer output");
    }
    Matrix dx = opt.residual ? grad : Matrix(x.rows(), layer.in_dim);
    const auto coeff = layer.coeff.value.values();
    auto dcoeff = layer.coeff.grad.values();
    double dscale = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto g = grad.row(r);
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        const double ui = u(r, i);
        bspline_basis(opt, ui, basis, dbasis);
        const double base_act = silu(ui);
        const double base_slope = silu_grad(ui);
        double du = 0.0;
        for (std::size_t j = 0; j < layer.out_dim; ++j) {
          const std::size_t row = (i * layer.out_dim + j) * nb;
          layer.base.grad(i, j) += g[j] * base_act;
          double slope = layer.base.value(i, j) * base_slope;
          for (std::size_t b = 0; b < nb; ++b) {
            dcoeff[row + b] += g[j] * basis[b];
            slope += coeff[row + b] * dbasis[b];
          }
          du += g[j] * slope;
        }
        if (std::abs(x(r, i) * scale) > bound * (1.0 + 1e-12)) continue;  // clamped
        dx(r, i) += du * scale;
        dscale += du * x(r, i);
      }
    }
    if (opt.input_scaling && scale != 1.0) {
      // scale = bound / |x[argmax]|, so d scale / d x[argmax] = -scale^2 sign(x) / bound.
      const std::size_t a = tape.scale_argmax[l];
      const double xa = x.values()[a];
      dx.values()[a] += dscale * (-scale * scale / bound) * (xa > 0.0 ? 1.0 : -1.0);
    }
    grad = std::move(dx);
  }
  return grad;
}

std::size_t ControlModule::parameter_count() {
  std::size_t total = 0;
  for (const Param* p : params()) total += p->value.size();
  return total;
}

namespace {

class WithoutControl final : public ControlModule {
 public:
  ControlKind kind() const override { return ControlKind::Without; }
  Matrix forward(const NormalizedAdjacency&, const Matrix& q0, ControlTape& tape) const override {
    tape.reset(ControlKind::Without);
    tape.recorded = true;
    return forward_without(q0);
  }
  Matrix backward(const ControlTape& tape, const Matrix& upstream) override {
    if (!tape.recorded || tape.kind != ControlKind::Without) {
      throw StateError("backward_without called without a recorded forward pass");
    }
    return backward_without(upstream);
  }
  std::vector<Param*> params() override { return {}; }
};

class AffineControl final : public ControlModule {
 public:
  AffineControl(ControlKind kind, GcnOrMlpStack stack) : kind_(kind), stack_(std::move(stack)) {}
  ControlKind kind() const override { return kind_; }
  Matrix forward(const NormalizedAdjacency& adj, const Matrix& q0,
                 ControlTape& tape) const override {
    return kind_ == ControlKind::Gcn ? forward_gcn(stack_, adj, q0, &tape)
                                     : forward_mlp(stack_, q0, &tape);
  }
  Matrix backward(const ControlTape& tape, const Matrix& upstream) override {
    return kind_ == ControlKind::Gcn ? backward_gcn(stack_, tape, upstream)
                                     : backward_mlp(stack_, tape, upstream);
  }
  std::vector<Param*> params() override {
    std::vector<Param*> out;
    for (auto& layer : stack_.layers) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
    return out;
  }

 private:
  ControlKind kind_;
  GcnOrMlpStack stack_;
};

class MessageControl final : public ControlModule {
 public:
  explicit MessageControl(MessageParams p) : p_(std::move(p)) {}
  ControlKind kind() const override { return ControlKind::Message; }
  Matrix forward(const NormalizedAdjacency& adj, const Matrix& q0,
                 ControlTape& tape) const override {
    return forward_message(p_, adj, q0, &tape);
  }
  Matrix backward(const ControlTape& tape, const Matrix& upstream) override {
    return backward_message(p_, tape, upstream);
  }
  std::vector<Param*> params() override { return {&p_.gate}; }

 private:
  MessageParams p_;
};

class KanControl final : public ControlModule {
 public:
  explicit KanControl(KanStack stack) : stack_(std::move(stack)) {}
  ControlKind kind() const override { return ControlKind::Kan; }
  Matrix forward(const NormalizedAdjacency&, const Matrix& q0, ControlTape& tape) const override {
    return forward_kan(stack_, q0, &tape);
  }
  Matrix backward(const ControlTape& tape, const Matrix& upstream) override {
    return backward_kan(stack_, tape, upstream);
  }
  std::vector<Param*> params() override {
    std::vector<Param*> out;
    for (auto& layer : stack_.layers) {
      out.push_back(&layer.coeff);
      out.push_back(&layer.base);
    }
    return out;
  }

 private:
  KanStack stack_;
};

}  // namespace

std::unique_ptr<ControlModule> make_control(const ControlConfig& cfg, Rng& rng) {
  if (cfg.dim == 0) throw ConfigError("control width must be positive");
  switch (cfg.kind) {
    case ControlKind::Without:
      return std::make_unique<WithoutControl>();
    case ControlKind::Gcn:
    case ControlKind::Mlp:
      return std::make_unique<AffineControl>(
          cfg.kind, GcnOrMlpStack::init(to_string(cfg.kind), cfg.dim, cfg.layers, rng));
    case ControlKind::Message:
      return std::make_unique<MessageControl>(MessageParams::init(cfg.dim, cfg.layers, rng));
    case ControlKind::Kan:
      return std::make_unique<KanControl>(KanStack::init(cfg.kan, cfg.dim, cfg.layers, rng));
  }
  throw ConfigError("unknown control kind");
}

}  // namespace probeforge
