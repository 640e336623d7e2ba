#pragma once

// Independent gradient oracles.
//
// Nothing here calls into the trainers: the bi-level teacher gradient is
// computed by exhaustive enumeration of pseudo-label assignments and checked
// against finite differences of the enumerated objective.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mpl/numcore.hpp"

namespace mpl {

inline constexpr double kFiniteDiffEps = 1e-5;
inline constexpr std::size_t kMaxAssignments = 10000;

using LossFn = std::function<double(const Params&)>;

// Central differences per coordinate. Throws NumericalError naming the
// coordinate when the loss is non-finite at a probe point.
GradVec finite_diff_grad(const LossFn& loss_fn, const Params& params, double eps = kFiniteDiffEps);

// ||a - b|| / max(1e-8, ||a||, ||b||)
double relative_error(const GradVec& a, const GradVec& b);

// max_i |a_i - b_i| / max(1e-8, |a_i| + |b_i|)
double max_elementwise_relative_error(const GradVec& a, const GradVec& b);

// All K^m label vectors in lexicographic order. Throws std::domain_error past kMaxAssignments.
std::vector<std::vector<int>> enumerate_assignments(std::size_t num_classes, std::size_t batch);

// P(y | x; theta) = prod_b softmax(T(x_b))[y_b]
double assignment_probability(const Matrix& teacher_probs, std::span<const int> y);

// Expected one-step student parameters over all assignments:
//   theta_S - eta_S * sum_y P(y) * grad_S CE(y, S(x_u; theta_S))
Params expected_student_update(const Params& teacher, const Params& student, const Matrix& x_u, double eta_s);

// CE(y_l, S(x_l; expected_student_update(...))), the bi-level objective as a
// function of the teacher.
double enumerated_bilevel_objective(const Params& teacher, const Params& student, const Matrix& x_u,
                                    const Matrix& x_l, std::span<const int> y_l, double eta_s);

// Score-function identity: sum_y P(y) * payoff(y) * grad_T[-log P(y)].
// With constant payoff this is zero.
GradVec score_function_expectation(const Params& teacher, const Matrix& x_u,
                                   const std::function<double(std::span<const int>)>& payoff);

// eta_S * sum_y P(y) * <g_l(theta_bar'), g_S(y)> * grad_T[-log P(y)], with
// g_l evaluated at the expected update theta_bar'.
GradVec exact_expected_teacher_grad(const Params& teacher, const Params& student, const Matrix& x_u,
                                    const Matrix& x_l, std::span<const int> y_l, double eta_s);

// Soft pseudo-label objective L_l(theta_S - eta_S * grad_S CE(T(x_u), S(x_u)))
// and its finite-difference gradient over the teacher.
double soft_path_objective(const Params& teacher, const Params& student, const Matrix& x_u, const Matrix& x_l,
                           std::span<const int> y_l, double eta_s);
GradVec soft_path_teacher_grad_fd(const Params& teacher, const Params& student, const Matrix& x_u,
                                  const Matrix& x_l, std::span<const int> y_l, double eta_s,
                                  double eps = kFiniteDiffEps);

// Short oracle self-check used by the `verify` CLI command. Prints one line
// per check and returns true when all pass.
bool run_oracle_suite(std::ostream& out, std::uint64_t seed = 7);

}  // namespace mpl
