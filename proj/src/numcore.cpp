#include "mpl/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mpl/errors.hpp"

namespace mpl {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::relu:
      return z > 0.0 ? z : 0.0;
  }
  return z;
}

// Derivative expressed through the activation output.
double activate_grad(Activation a, double out) {
  switch (a) {
    case Activation::sigmoid:
      return out * (1.0 - out);
    case Activation::relu:
      return out > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

void check_input(const Params& params, const Matrix& x) {
  if (params.num_layers() == 0) throw ShapeError("forward: network has no layers");
  if (x.cols() != params.input_dim()) {
    throw ShapeError("forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                     std::to_string(params.input_dim()));
  }
}

// Outputs of every layer; outputs[0] is the input, outputs.back() the logits.
std::vector<Matrix> forward_all(const Params& params, const Matrix& x) {
  check_input(params, x);
  std::vector<Matrix> outputs;
  outputs.reserve(params.num_layers() + 1);
  outputs.push_back(x);
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const auto [fan_in, fan_out] = params.layers()[l];
    const Matrix& in = outputs.back();
    Matrix out(in.rows(), fan_out);
    const bool hidden = l + 1 < params.num_layers();
    for (std::size_t r = 0; r < in.rows(); ++r) {
      auto out_row = out.row(r);
      for (std::size_t j = 0; j < fan_out; ++j) out_row[j] = params.bias(l, j);
      const auto in_row = in.row(r);
      for (std::size_t i = 0; i < fan_in; ++i) {
        const double v = in_row[i];
        const double* w = params.values().data() + params.weight_offset(l) + i * fan_out;
        for (std::size_t j = 0; j < fan_out; ++j) out_row[j] += v * w[j];
      }
      if (hidden) {
        for (auto& z : out_row) z = activate(params.activations()[l], z);
      }
    }
    outputs.push_back(std::move(out));
  }
  return outputs;
}

GradVec backward(const Params& params, const std::vector<Matrix>& outputs, Matrix delta) {
  GradVec grad(params.size());
  for (std::size_t l = params.num_layers(); l-- > 0;) {
    const auto [fan_in, fan_out] = params.layers()[l];
    const Matrix& in = outputs[l];
    double* gw = grad.values.data() + params.weight_offset(l);
    double* gb = grad.values.data() + params.bias_offset(l);
    for (std::size_t r = 0; r < in.rows(); ++r) {
      const auto d = delta.row(r);
      const auto a = in.row(r);
      for (std::size_t i = 0; i < fan_in; ++i) {
        for (std::size_t j = 0; j < fan_out; ++j) gw[i * fan_out + j] += a[i] * d[j];
      }
      for (std::size_t j = 0; j < fan_out; ++j) gb[j] += d[j];
    }
    if (l == 0) break;
    Matrix prev(in.rows(), fan_in);
    const Activation act = params.activations()[l - 1];
    for (std::size_t r = 0; r < in.rows(); ++r) {
      const auto d = delta.row(r);
      const auto a = in.row(r);
      auto p = prev.row(r);
      for (std::size_t i = 0; i < fan_in; ++i) {
        const double* w = params.values().data() + params.weight_offset(l) + i * fan_out;
        double s = 0.0;
        for (std::size_t j = 0; j < fan_out; ++j) s += w[j] * d[j];
        p[i] = s * activate_grad(act, a[i]);
      }
    }
    delta = std::move(prev);
  }
  return grad;
}

void check_targets(const Matrix& target, const Matrix& pred) {
  if (pred.rows() == 0) throw std::domain_error("cross_entropy: empty batch");
  if (target.rows() != pred.rows() || target.cols() != pred.cols()) {
    throw ShapeError("cross_entropy: target and prediction shapes differ");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw ShapeError("Matrix: data size does not match rows*cols");
}

Matrix Matrix::gather(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= rows_) throw std::out_of_range("Matrix::gather: row index out of range");
    std::copy_n(row(rows[i]).begin(), cols_, out.row(i).begin());
  }
  return out;
}

Params::Params(std::vector<LayerShape> layers, std::vector<Activation> hidden_activations)
    : layers_(std::move(layers)), activations_(std::move(hidden_activations)) {
  build_offsets();
  values_.assign(count_for(layers_), 0.0);
}

Params::Params(std::vector<LayerShape> layers, std::vector<Activation> hidden_activations,
               std::vector<double> values)
    : layers_(std::move(layers)), activations_(std::move(hidden_activations)), values_(std::move(values)) {
  build_offsets();
  if (values_.size() != count_for(layers_)) {
    throw ShapeError("Params: value count " + std::to_string(values_.size()) + " does not match shape (" +
                     std::to_string(count_for(layers_)) + ")");
  }
  if (!all_finite()) throw std::domain_error("Params: non-finite value");
}

std::size_t Params::count_for(std::span<const LayerShape> layers) {
  std::size_t n = 0;
  for (const auto& s : layers) n += s.fan_in * s.fan_out + s.fan_out;
  return n;
}

void Params::build_offsets() {
  if (layers_.empty()) throw ShapeError("Params: at least one layer required");
  if (activations_.size() + 1 != layers_.size()) {
    throw ShapeError("Params: need exactly one activation per hidden layer");
  }
  offsets_.clear();
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& s = layers_[l];
    if (s.fan_in == 0 || s.fan_out == 0) throw ShapeError("Params: zero-width layer");
    if (l > 0 && layers_[l - 1].fan_out != s.fan_in) throw ShapeError("Params: consecutive layers do not chain");
    offsets_.push_back(off);
    off += s.fan_in * s.fan_out + s.fan_out;
  }
}

bool Params::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GradVec::norm() const { return std::sqrt(dot(*this, *this)); }

bool GradVec::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

GradVec& GradVec::operator+=(const GradVec& other) { return add_scaled(1.0, other); }

GradVec& GradVec::operator*=(double s) {
  for (auto& v : values) v *= s;
  return *this;
}

GradVec& GradVec::add_scaled(double s, const GradVec& other) {
  if (other.size() != size()) throw ShapeError("GradVec: size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += s * other.values[i];
  return *this;
}

double dot(const GradVec& a, const GradVec& b) {
  if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

Dist::Dist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::domain_error("Dist: no classes");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::domain_error("Dist: negative or NaN probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::domain_error("Dist: probabilities do not sum to one");
}

Matrix forward(const Params& params, const Matrix& x) { return std::move(forward_all(params, x).back()); }

namespace {

void softmax_into(std::span<const double> logits, double tau, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp((logits[k] - mx) / tau);
    sum += out[k];
  }
  for (auto& v : out) v /= sum;
}

}  // namespace

Dist softmax_temp(std::span<const double> logits, double tau) {
  if (!(tau > 0.0)) throw std::domain_error("softmax_temp: temperature must be positive");
  if (logits.empty()) throw std::domain_error("softmax_temp: empty logits");
  std::vector<double> p(logits.size());
  softmax_into(logits, tau, p);
  return Dist(std::move(p));
}

Matrix softmax_rows(const Matrix& logits, double tau) {
  if (!(tau > 0.0)) throw std::domain_error("softmax_rows: temperature must be positive");
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) softmax_into(logits.row(r), tau, out.row(r));
  return out;
}

Matrix one_hot(std::span<const int> labels, std::size_t num_classes) {
  Matrix out(labels.size(), num_classes);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= num_classes) {
      throw std::domain_error("one_hot: label " + std::to_string(labels[r]) + " out of range");
    }
    out(r, static_cast<std::size_t>(labels[r])) = 1.0;
  }
  return out;
}

double cross_entropy(const Matrix& target, const Matrix& pred) {
  check_targets(target, pred);
  double total = 0.0;
  for (std::size_t r = 0; r < pred.rows(); ++r) {
    double row = 0.0;
    for (std::size_t k = 0; k < pred.cols(); ++k) {
      const double q = target(r, k);
      if (q != 0.0) row -= q * std::log(std::max(pred(r, k), kProbFloor));
    }
    total += row;
  }
  return total / static_cast<double>(pred.rows());
}

double cross_entropy(std::span<const int> labels, const Matrix& pred) {
  return cross_entropy(one_hot(labels, pred.cols()), pred);
}

LossGrad backprop(const Params& params, const Matrix& x, const Matrix& soft_target) {
  auto outputs = forward_all(params, x);
  const Matrix probs = softmax_rows(outputs.back());
  check_targets(soft_target, probs);
  const double loss = cross_entropy(soft_target, probs);
  const double inv_batch = 1.0 / static_cast<double>(x.rows());
  // d CE / d logits = (p - q) * sum(q) / batch; targets are distributions so sum(q) = 1.
  Matrix delta(probs.rows(), probs.cols());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    double mass = 0.0;
    for (std::size_t k = 0; k < probs.cols(); ++k) mass += soft_target(r, k);
    for (std::size_t k = 0; k < probs.cols(); ++k) {
      delta(r, k) = (probs(r, k) * mass - soft_target(r, k)) * inv_batch;
    }
  }
  return {loss, backward(params, outputs, std::move(delta))};
}

LossGrad backprop(const Params& params, const Matrix& x, std::span<const int> labels) {
  return backprop(params, x, one_hot(labels, params.output_dim()));
}

GradVec backprop_logits(const Params& params, const Matrix& x, const Matrix& dlogits) {
  auto outputs = forward_all(params, x);
  if (dlogits.rows() != x.rows() || dlogits.cols() != params.output_dim()) {
    throw ShapeError("backprop_logits: upstream gradient shape mismatch");
  }
  return backward(params, outputs, dlogits);
}

void sgd_momentum_update(Params& params, const GradVec& grad, double lr, double mu, GradVec& buf) {
  if (grad.size() != params.size() || buf.size() != params.size()) {
    throw ShapeError("sgd_momentum_step: gradient/buffer not congruent with params");
  }
  if (!(lr >= 0.0)) throw std::domain_error("sgd_momentum_step: negative learning rate");
  if (!(mu >= 0.0 && mu < 1.0)) throw std::domain_error("sgd_momentum_step: momentum outside [0,1)");
  auto v = params.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    buf.values[i] = mu * buf.values[i] + grad.values[i];
    v[i] -= lr * buf.values[i];
  }
}

SgdResult sgd_momentum_step(Params params, const GradVec& grad, double lr, double mu, GradVec buf) {
  sgd_momentum_update(params, grad, lr, mu, buf);
  return {std::move(params), std::move(buf)};
}

double cosine_similarity(const GradVec& a, const GradVec& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kZeroNorm || nb < kZeroNorm) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

double accuracy(const Matrix& probs_or_logits, std::span<const int> labels) {
  if (probs_or_logits.rows() != labels.size()) throw ShapeError("accuracy: row/label count mismatch");
  if (labels.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (static_cast<int>(argmax(probs_or_logits.row(r))) == labels[r]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace mpl
