#include "mpl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mpl/errors.hpp"
#include "mpl/model.hpp"
#include "mpl/rng.hpp"

namespace mpl {

GradVec finite_diff_grad(const LossFn& loss_fn, const Params& params, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("finite_diff_grad: eps must be > 0");
  GradVec g(params.size());
  Params probe = params;
  auto v = probe.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double orig = v[i];
    v[i] = orig + eps;
    const double up = loss_fn(probe);
    v[i] = orig - eps;
    const double down = loss_fn(probe);
    v[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("finite_diff_grad: non-finite loss at coordinate " + std::to_string(i));
    }
    g.values[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

double relative_error(const GradVec& a, const GradVec& b) {
  GradVec d = a;
  d.add_scaled(-1.0, b);
  return d.norm() / std::max({1e-8, a.norm(), b.norm()});
}

double max_elementwise_relative_error(const GradVec& a, const GradVec& b) {
  if (a.size() != b.size()) throw ShapeError("max_elementwise_relative_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max(1e-8, std::abs(a.values[i]) + std::abs(b.values[i]));
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / denom);
  }
  return worst;
}

std::vector<std::vector<int>> enumerate_assignments(std::size_t num_classes, std::size_t batch) {
  double count = std::pow(static_cast<double>(num_classes), static_cast<double>(batch));
  if (count > static_cast<double>(kMaxAssignments)) {
    throw std::domain_error("enumerate_assignments: K^m exceeds the enumeration bound");
  }
  std::vector<std::vector<int>> out;
  std::vector<int> cur(batch, 0);
  while (true) {
    out.push_back(cur);
    std::size_t pos = batch;
    while (pos > 0) {
      --pos;
      if (static_cast<std::size_t>(++cur[pos]) < num_classes) break;
      cur[pos] = 0;
      if (pos == 0) return out;
    }
    if (batch == 0) return out;
  }
}

double assignment_probability(const Matrix& teacher_probs, std::span<const int> y) {
  double p = 1.0;
  for (std::size_t b = 0; b < y.size(); ++b) p *= teacher_probs(b, static_cast<std::size_t>(y[b]));
  return p;
}

namespace {

// grad_T[-log P(y | x)] as a sum of single-example cross-entropy gradients.
GradVec neg_log_prob_grad(const Params& teacher, const Matrix& x_u, std::span<const int> y) {
  GradVec g(teacher.size());
  for (std::size_t b = 0; b < x_u.rows(); ++b) {
    const std::size_t row[] = {b};
    const int label[] = {y[b]};
    g += backprop(teacher, x_u.gather(row), label).grad;
  }
  return g;
}

}  // namespace

Params expected_student_update(const Params& teacher, const Params& student, const Matrix& x_u, double eta_s) {
  const Matrix probs = predict(teacher, x_u);
  GradVec mean_grad(student.size());
  for (const auto& y : enumerate_assignments(teacher.output_dim(), x_u.rows())) {
    const double p = assignment_probability(probs, y);
    mean_grad.add_scaled(p, backprop(student, x_u, y).grad);
  }
  Params out = student;
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= eta_s * mean_grad.values[i];
  return out;
}

double enumerated_bilevel_objective(const Params& teacher, const Params& student, const Matrix& x_u,
                                    const Matrix& x_l, std::span<const int> y_l, double eta_s) {
  const Params updated = expected_student_update(teacher, student, x_u, eta_s);
  return cross_entropy(y_l, predict(updated, x_l));
}

GradVec score_function_expectation(const Params& teacher, const Matrix& x_u,
                                   const std::function<double(std::span<const int>)>& payoff) {
  const Matrix probs = predict(teacher, x_u);
  GradVec out(teacher.size());
  for (const auto& y : enumerate_assignments(teacher.output_dim(), x_u.rows())) {
    const double p = assignment_probability(probs, y);
    out.add_scaled(p * payoff(y), neg_log_prob_grad(teacher, x_u, y));
  }
  return out;
}

GradVec exact_expected_teacher_grad(const Params& teacher, const Params& student, const Matrix& x_u,
                                    const Matrix& x_l, std::span<const int> y_l, double eta_s) {
  const Params expected = expected_student_update(teacher, student, x_u, eta_s);
  const GradVec g_l = backprop(expected, x_l, y_l).grad;
  return score_function_expectation(teacher, x_u, [&](std::span<const int> y) {
    return eta_s * dot(g_l, backprop(student, x_u, y).grad);
  });
}

double soft_path_objective(const Params& teacher, const Params& student, const Matrix& x_u, const Matrix& x_l,
                           std::span<const int> y_l, double eta_s) {
  const Matrix soft = predict(teacher, x_u);
  const GradVec g = backprop(student, x_u, soft).grad;
  Params updated = student;
  auto v = updated.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= eta_s * g.values[i];
  return cross_entropy(y_l, predict(updated, x_l));
}

GradVec soft_path_teacher_grad_fd(const Params& teacher, const Params& student, const Matrix& x_u,
                                  const Matrix& x_l, std::span<const int> y_l, double eta_s, double eps) {
  return finite_diff_grad(
      [&](const Params& t) { return soft_path_objective(t, student, x_u, x_l, y_l, eta_s); }, teacher, eps);
}

namespace {

Params random_net(const MlpSpec& spec, Rng& rng, double scale) {
  Params p = init_params(spec, rng.next_u64());
  for (auto& v : p.values()) v = rng.uniform(-scale, scale);
  return p;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

bool run_oracle_suite(std::ostream& out, std::uint64_t seed) {
  Rng rng(seed);
  bool all = true;
  auto report = [&](const std::string& name, bool ok, double value, double tol) {
    out << (ok ? "PASS " : "FAIL ") << name << " value=" << value << " tol=" << tol << '\n';
    all = all && ok;
  };

  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    MlpSpec spec{3, {5, 4}, 3, trial % 2 ? Activation::relu : Activation::sigmoid};
    const Params p = random_net(spec, rng, 1.0);
    const Matrix x = random_matrix(4, 3, rng);
    const std::vector<int> y = {0, 2, 1, 2};
    const GradVec analytic = backprop(p, x, y).grad;
    const GradVec fd = finite_diff_grad([&](const Params& q) { return cross_entropy(y, predict(q, x)); }, p);
    worst = std::max(worst, max_elementwise_relative_error(analytic, fd));
  }
  report("backprop_vs_finite_differences", worst < 1e-4, worst, 1e-4);

  worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    MlpSpec spec{2, {4}, 2, Activation::sigmoid};
    const Params teacher = random_net(spec, rng, 1.0);
    const Params student = random_net(spec, rng, 1.0);
    const Matrix x_u = random_matrix(2, 2, rng);
    const Matrix x_l = random_matrix(2, 2, rng);
    const std::vector<int> y_l = {0, 1};
    const double eta = 0.5;
    const GradVec exact = exact_expected_teacher_grad(teacher, student, x_u, x_l, y_l, eta);
    const GradVec fd = finite_diff_grad(
        [&](const Params& t) { return enumerated_bilevel_objective(t, student, x_u, x_l, y_l, eta); }, teacher);
    worst = std::max(worst, relative_error(exact, fd));
  }
  report("bilevel_gradient_vs_enumerated_finite_differences", worst < 1e-3, worst, 1e-3);

  {
    MlpSpec spec{2, {4}, 2, Activation::sigmoid};
    const Params teacher = random_net(spec, rng, 1.0);
    const Params student = random_net(spec, rng, 1.0);
    const Matrix x_u = random_matrix(3, 2, rng);
    const Matrix x_l = random_matrix(2, 2, rng);
    const std::vector<int> y_l = {1, 0};
    const GradVec soft = soft_path_teacher_grad_fd(teacher, student, x_u, x_l, y_l, 0.5);
    const GradVec exact = exact_expected_teacher_grad(teacher, student, x_u, x_l, y_l, 0.5);
    const double err = relative_error(soft, exact);
    report("soft_path_matches_enumerated_gradient", soft.all_finite() && err < 1e-3, err, 1e-3);
  }
  return all;
}

}  // namespace mpl
