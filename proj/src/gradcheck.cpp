#include "probeforge/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "probeforge/control.hpp"
#include "probeforge/graph.hpp"
#include "probeforge/rng.hpp"

namespace probeforge {

Matrix central_difference(const std::function<double()>& objective, Matrix& x, double h) {
  Matrix out(x.rows(), x.cols());
  auto xs = x.values();
  auto os = out.values();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double keep = xs[i];
    xs[i] = keep + h;
    const double up = objective();
    xs[i] = keep - h;
    const double down = objective();
    xs[i] = keep;
    os[i] = (up - down) / (2.0 * h);
  }
  return out;
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max(max_abs(analytic), max_abs(numeric));
  if (scale == 0.0) return 0.0;
  double diff = 0.0;
  auto a = analytic.values();
  auto n = numeric.values();
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - n[i]));
  return diff / scale;
}

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

namespace {

Matrix normal_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void jitter(Param& p, Rng& rng, double scale) {
  for (double& v : p.value.values()) v += scale * rng.normal();
  p.zero_grad();
}

// A random tree plus, sometimes, one extra edge so graphs are not always trees.
SentenceGraph random_graph(std::uint32_t n, Rng& rng) {
  SentenceGraph g = random_tree(n, rng.next_u64());
  if (n >= 3 && rng.below(2) == 0) {
    const auto a = static_cast<std::uint32_t>(rng.below(n));
    auto b = static_cast<std::uint32_t>(rng.below(n - 1));
    if (b >= a) ++b;
    g.edges.push_back({a, b});
  }
  return g;
}

// Max relative error of the analytic gradients of sum(upstream * f(q0)) against
// central differences, over the input and every parameter.
template <typename Forward, typename Backward>
double check_module(Matrix& q0, std::vector<Param*> params, const Matrix& upstream,
                    Forward&& forward, Backward&& backward, double h) {
  auto objective = [&] {
    const Matrix out = forward(q0, nullptr);
    double s = 0.0;
    auto o = out.values();
    auto u = upstream.values();
    for (std::size_t i = 0; i < o.size(); ++i) s += o[i] * u[i];
    return s;
  };
  for (Param* p : params) p->zero_grad();
  ControlTape tape;
  forward(q0, &tape);
  const Matrix dq = backward(tape, upstream);
  double worst = relative_error(dq, central_difference(objective, q0, h));
  for (Param* p : params) {
    worst = std::max(worst, relative_error(p->grad, central_difference(objective, p->value, h)));
  }
  return worst;
}

}  // namespace

GradCheckReport run_gradcheck(std::uint64_t seed, std::size_t instances, double h,
                              double tolerance) {
  const auto t0 = std::chrono::steady_clock::now();
  GradCheckReport report;
  report.h = h;
  report.tolerance = tolerance;
  Rng rng(seed);
  const char* names[] = {"gcn", "message", "mlp", "kan", "softmax_cross_entropy", "bce_with_logits"};
  for (const char* name : names) {
    GradCheckEntry entry{name, instances, 0.0, false};
    const std::string kind = name;
    for (std::size_t t = 0; t < instances; ++t) {
      const auto n = static_cast<std::uint32_t>(1 + rng.below(5));
      const auto d = static_cast<std::size_t>(1 + rng.below(4));
      const NormalizedAdjacency adj = normalize(random_graph(n, rng));
      Matrix q0 = normal_matrix(n, d, rng);
      const Matrix upstream = normal_matrix(n, d, rng);
      double err = 0.0;
      if (kind == "gcn" || kind == "mlp") {
        auto stack = GcnOrMlpStack::init(kind, d, 2, rng);
        for (auto& l : stack.layers) {
          jitter(l.weight, rng, 0.5);
          jitter(l.bias, rng, 0.5);
        }
        std::vector<Param*> ps;
        for (auto& l : stack.layers) {
          ps.push_back(&l.weight);
          ps.push_back(&l.bias);
        }
        if (kind == "gcn") {
          err = check_module(
              q0, ps, upstream,
              [&](const Matrix& q, ControlTape* tp) { return forward_gcn(stack, adj, q, tp); },
              [&](const ControlTape& tp, const Matrix& u) { return backward_gcn(stack, tp, u); }, h);
        } else {
          err = check_module(
              q0, ps, upstream,
              [&](const Matrix& q, ControlTape* tp) { return forward_mlp(stack, q, tp); },
              [&](const ControlTape& tp, const Matrix& u) { return backward_mlp(stack, tp, u); }, h);
        }
      } else if (kind == "message") {
        auto p = MessageParams::init(d, 2, rng);
        jitter(p.gate, rng, 0.5);
        err = check_module(
            q0, {&p.gate}, upstream,
            [&](const Matrix& q, ControlTape* tp) { return forward_message(p, adj, q, tp); },
            [&](const ControlTape& tp, const Matrix& u) { return backward_message(p, tp, u); }, h);
      } else if (kind == "kan") {
        auto stack = KanStack::init(KanOptions{}, d, 2, rng);
        std::vector<Param*> ps;
        for (auto& l : stack.layers) {
          jitter(l.coeff, rng, 0.5);
          jitter(l.base, rng, 0.5);
          ps.push_back(&l.coeff);
          ps.push_back(&l.base);
        }
        err = check_module(
            q0, ps, upstream,
            [&](const Matrix& q, ControlTape* tp) { return forward_kan(stack, q, tp); },
            [&](const ControlTape& tp, const Matrix& u) { return backward_kan(stack, tp, u); }, h);
      } else {
        const std::size_t batch = 1 + rng.below(5);
        const std::size_t classes = 2 + rng.below(4);
        Matrix logits = normal_matrix(batch, classes, rng);
        if (kind == "softmax_cross_entropy") {
          std::vector<std::size_t> targets(batch);
          for (auto& tgt : targets) tgt = rng.below(classes);
          const Matrix grad = softmax_cross_entropy(logits, targets).grad;
          err = relative_error(grad, central_difference(
                                         [&] { return softmax_cross_entropy(logits, targets).loss; },
                                         logits, h));
        } else {
          Matrix targets(batch, classes);
          for (double& v : targets.values()) v = static_cast<double>(rng.below(2));
          const Matrix grad = bce_with_logits(logits, targets).grad;
          err = relative_error(grad, central_difference(
                                         [&] { return bce_with_logits(logits, targets).loss; },
                                         logits, h));
        }
      }
      entry.max_rel_error = std::max(entry.max_rel_error, err);
    }
    entry.passed = entry.max_rel_error <= tolerance;
    report.entries.push_back(std::move(entry));
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace probeforge
