#pragma once

// Dense numeric kernel for small fully connected networks: row-major matrices,
// flat parameter vectors, softmax/cross-entropy and exact backpropagation.

#include <cstddef>
#include <span>
#include <vector>

namespace mpl {

// Probabilities below this floor are clamped before taking a log.
inline constexpr double kProbFloor = 1e-12;

// Gradient norms below this are treated as zero by cosine_similarity.
inline constexpr double kZeroNorm = 1e-12;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  // Rows selected by index, in the given order.
  Matrix gather(std::span<const std::size_t> rows) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation { sigmoid, relu };

struct LayerShape {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

// Network weights stored as one flat vector.
//
// Layer l occupies [offset(l), offset(l) + fan_in*fan_out + fan_out): first the
// weight matrix row-major as [fan_in x fan_out], then the bias vector. Hidden
// layer l applies activation(l); the last layer is linear and yields logits.
class Params {
 public:
  Params() = default;
  Params(std::vector<LayerShape> layers, std::vector<Activation> hidden_activations);
  Params(std::vector<LayerShape> layers, std::vector<Activation> hidden_activations,
         std::vector<double> values);

  static std::size_t count_for(std::span<const LayerShape> layers);

  const std::vector<LayerShape>& layers() const noexcept { return layers_; }
  const std::vector<Activation>& activations() const noexcept { return activations_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t input_dim() const { return layers_.front().fan_in; }
  std::size_t output_dim() const { return layers_.back().fan_out; }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + layers_[layer].fan_in * layers_[layer].fan_out;
  }
  double& weight(std::size_t layer, std::size_t in, std::size_t out) {
    return values_[weight_offset(layer) + in * layers_[layer].fan_out + out];
  }
  double weight(std::size_t layer, std::size_t in, std::size_t out) const {
    return values_[weight_offset(layer) + in * layers_[layer].fan_out + out];
  }
  double& bias(std::size_t layer, std::size_t out) { return values_[bias_offset(layer) + out]; }
  double bias(std::size_t layer, std::size_t out) const { return values_[bias_offset(layer) + out]; }

  bool all_finite() const;
  bool same_shape(const Params& other) const {
    return layers_ == other.layers_ && activations_ == other.activations_;
  }

  friend bool operator==(const Params&, const Params&) = default;

 private:
  void build_offsets();

  std::vector<LayerShape> layers_;
  std::vector<Activation> activations_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

// A gradient (or any other vector) congruent with some Params.
struct GradVec {
  std::vector<double> values;

  GradVec() = default;
  explicit GradVec(std::size_t n) : values(n, 0.0) {}
  explicit GradVec(std::vector<double> v) : values(std::move(v)) {}
  static GradVec zeros_like(const Params& p) { return GradVec(p.size()); }

  std::size_t size() const noexcept { return values.size(); }
  double norm() const;
  bool all_finite() const;

  GradVec& operator+=(const GradVec& other);
  GradVec& operator*=(double s);
  // this += s * other
  GradVec& add_scaled(double s, const GradVec& other);

  friend bool operator==(const GradVec&, const GradVec&) = default;
};

double dot(const GradVec& a, const GradVec& b);

// A categorical distribution over K classes.
class Dist {
 public:
  // Validates: entries >= 0 and sum within 1e-9 of one.
  explicit Dist(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
};

// Logits for every row of x, shape [batch x K].
Matrix forward(const Params& params, const Matrix& x);

// exp(l / tau) / sum exp(l / tau), computed with the max subtracted.
Dist softmax_temp(std::span<const double> logits, double tau);

// Row-wise softmax_temp; returns a [batch x K] probability matrix.
Matrix softmax_rows(const Matrix& logits, double tau = 1.0);

Matrix one_hot(std::span<const int> labels, std::size_t num_classes);

// Mean over rows of -sum_k q_k log max(p_k, kProbFloor).
double cross_entropy(const Matrix& target, const Matrix& pred);
double cross_entropy(std::span<const int> labels, const Matrix& pred);

struct LossGrad {
  double loss = 0.0;
  GradVec grad;
};

// Exact gradient of cross_entropy(target, softmax(forward(params, x))).
LossGrad backprop(const Params& params, const Matrix& x, const Matrix& soft_target);
LossGrad backprop(const Params& params, const Matrix& x, std::span<const int> labels);

// Backpropagates a caller-supplied gradient w.r.t. the logits.
GradVec backprop_logits(const Params& params, const Matrix& x, const Matrix& dlogits);

// buf <- mu * buf + grad;  params <- params - lr * buf.
void sgd_momentum_update(Params& params, const GradVec& grad, double lr, double mu, GradVec& buf);

struct SgdResult {
  Params params;
  GradVec buffer;
};
SgdResult sgd_momentum_step(Params params, const GradVec& grad, double lr, double mu, GradVec buf);

// Cosine of the angle between a and b; zero if either norm is below kZeroNorm.
double cosine_similarity(const GradVec& a, const GradVec& b);

// Fraction of rows whose argmax matches the label.
double accuracy(const Matrix& probs_or_logits, std::span<const int> labels);
std::size_t argmax(std::span<const double> row);

}  // namespace mpl
