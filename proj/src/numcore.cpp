#include "probeforge/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "probeforge/errors.hpp"

namespace probeforge {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() +
                         " vs " + b.shape_string());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DimensionError("Matrix: " + std::to_string(values_.size()) +
                         " values do not fill " + shape_string());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << "(" << rows_ << "x" << cols_ << ")";
  return os.str();
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + a.shape_string() + " x " +
                         b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i).data();
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a(i, k);
      const double* brow = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: shape mismatch " + a.shape_string() + "^T x " +
                         b.shape_string());
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* arow = a.row(k).data();
    const double* brow = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: shape mismatch " + a.shape_string() + " x " +
                         b.shape_string() + "^T");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      out(i, j) = s;
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  add_inplace(out, b);
  return out;
}

void add_inplace(Matrix& acc, const Matrix& b) {
  require_same_shape(acc, b, "add");
  auto dst = acc.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Matrix add_row(const Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: shape mismatch " + a.shape_string() + " + " +
                         row.shape_string());
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += row(0, j);
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  auto dst = out.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

Matrix colsum(const Matrix& a) {
  Matrix out(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out(0, j) += r[j];
  }
  return out;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.values().begin(), a.values().end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& x, const Matrix& upstream) {
  require_same_shape(x, upstream, "relu_backward");
  Matrix out(x.rows(), x.cols());
  auto xs = x.values();
  auto us = upstream.values();
  auto os = out.values();
  for (std::size_t i = 0; i < xs.size(); ++i) os[i] = xs[i] > 0.0 ? us[i] : 0.0;
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = sigmoid(v);
  return out;
}

Matrix sigmoid_backward(const Matrix& y, const Matrix& upstream) {
  require_same_shape(y, upstream, "sigmoid_backward");
  Matrix out(y.rows(), y.cols());
  auto ys = y.values();
  auto us = upstream.values();
  auto os = out.values();
  for (std::size_t i = 0; i < ys.size(); ++i) os[i] = ys[i] * (1.0 - ys[i]) * us[i];
  return out;
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const std::size_t> targets) {
  if (targets.size() != logits.rows()) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                         " targets for logits " + logits.shape_string());
  }
  const std::size_t classes = logits.cols();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= classes) {
      throw LabelError("softmax_cross_entropy: target " + std::to_string(targets[i]) +
                       " at row " + std::to_string(i) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
  LossResult result{0.0, Matrix(logits.rows(), classes)};
  if (logits.rows() == 0) return result;
  const double inv_batch = 1.0 / static_cast<double>(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto z = logits.row(i);
    const auto top = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    const double m = z[top];
    // log-sum-exp as m + log1p(sum of the non-maximal terms); keeps tiny losses exact.
    double rest = 0.0;
    for (std::size_t c = 0; c < classes; ++c)
      if (c != top) rest += std::exp(z[c] - m);
    const double lse = m + std::log1p(rest);
    result.loss += lse - z[targets[i]];
    auto g = result.grad.row(i);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(z[c] - lse);
      g[c] = (p - (c == targets[i] ? 1.0 : 0.0)) * inv_batch;
    }
  }
  result.loss *= inv_batch;
  return result;
}

LossResult bce_with_logits(const Matrix& logits, const Matrix& targets) {
  require_same_shape(logits, targets, "bce_with_logits");
  LossResult result{0.0, Matrix(logits.rows(), logits.cols())};
  if (logits.size() == 0) return result;
  const double inv = 1.0 / static_cast<double>(logits.size());
  auto xs = logits.values();
  auto ts = targets.values();
  auto gs = result.grad.values();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double t = ts[i];
    if (t != 0.0 && t != 1.0) {
      throw LabelError("bce_with_logits: target " + std::to_string(t) + " at entry " +
                       std::to_string(i) + " is not 0 or 1");
    }
    result.loss += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
    gs[i] = (sigmoid(x) - t) * inv;
  }
  result.loss *= inv;
  return result;
}

Param::Param(std::string name_, Matrix init)
    : name(std::move(name_)),
      value(std::move(init)),
      grad(value.rows(), value.cols()),
      adam_m(value.rows(), value.cols()),
      adam_v(value.rows(), value.cols()) {}

void adam_step(Param& p, const AdamConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw OptimizerError("adam_step: learning rate must be positive");
  if (!p.grad.same_shape(p.value)) {
    throw DimensionError("adam_step: gradient of '" + p.name + "' has shape " +
                         p.grad.shape_string() + ", value " + p.value.shape_string());
  }
  if (!all_finite(p.grad)) {
    throw OptimizerError("adam_step: non-finite gradient in parameter '" + p.name + "'");
  }
  ++p.step;
  const double t = static_cast<double>(p.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto w = p.value.values();
  auto g = p.grad.values();
  auto m = p.adam_m.values();
  auto v = p.adam_v.values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    g[i] = 0.0;
  }
}

}  // namespace probeforge
