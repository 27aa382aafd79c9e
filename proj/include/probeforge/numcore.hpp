#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace probeforge {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_string() const;
  void fill(double v);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
void add_inplace(Matrix& acc, const Matrix& b);
// Adds the 1 x cols row vector to every row.
Matrix add_row(const Matrix& a, const Matrix& row);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
// Column sums as a 1 x cols matrix.
Matrix colsum(const Matrix& a);
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);

Matrix relu(const Matrix& x);
Matrix relu_backward(const Matrix& x, const Matrix& upstream);

double sigmoid(double x);
Matrix sigmoid(const Matrix& x);
// Takes the forward output y = sigmoid(x).
Matrix sigmoid_backward(const Matrix& y, const Matrix& upstream);

struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

/// Mean softmax cross-entropy over the batch. The gradient is with respect to
/// the logits and already divided by the batch size.
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const std::size_t> targets);

/// Mean binary cross-entropy over every (row, class) entry, computed from logits.
LossResult bce_with_logits(const Matrix& logits, const Matrix& targets);

/// Trainable tensor with its gradient and Adam moments.
struct Param {
  Param() = default;
  Param(std::string name, Matrix init);

  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  std::uint64_t step = 0;

  void zero_grad() { grad.fill(0.0); }
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update. Zeroes the gradient afterwards.
void adam_step(Param& p, const AdamConfig& cfg);

}  // namespace probeforge
