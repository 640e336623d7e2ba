#pragma once

// Supervised, Pseudo Labels and Meta Pseudo Labels training procedures.
//
// Every trainer derives its random streams from TrainerConfig::seed:
//   stream 1 teacher init, 2 student init, 3 batch sampling,
//   4 pseudo-label sampling, 5 augmentation.
// Sharing the numbering is what makes an MPL run with a frozen teacher replay a
// Pseudo Labels run exactly.

#include <cstdint>
#include <optional>
#include <vector>

#include "mpl/data.hpp"
#include "mpl/model.hpp"
#include "mpl/numcore.hpp"
#include "mpl/rng.hpp"

namespace mpl {

enum class FeedbackMode { dot, cosine };

struct TrainerConfig {
  MlpSpec net;                 // shared by teacher and student (separate weights)
  double lr_student = 0.1;
  double lr_teacher = 0.1;
  double momentum = 0.0;
  std::size_t steps = 1000;
  std::size_t batch_l = 6;
  std::size_t batch_u = 64;
  double uda_factor = 0.0;
  double uda_temperature = 1.0;
  double jitter_magnitude = 0.1;
  bool uda_on_labeled = false;   // consistency branch over x_l instead of x_u
  bool uda_mask = false;         // accepted for config compatibility; no effect
  FeedbackMode feedback_mode = FeedbackMode::dot;
  double baseline_decay = 0.99;
  bool feedback_enabled = true;  // false forces h = 0 (ablation)
  double teacher_supervised_weight = 1.0;
  double pl_confidence_threshold = 0.0;
  double pl_labeled_weight = 1.0;
  double label_smoothing = 0.0;
  std::size_t finetune_steps = 0;
  double finetune_lr = 0.1;
  double calibrator_init_noise = 1e-4;
  std::size_t eval_every = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainerState {
  Params teacher;
  Params student;
  GradVec mom_teacher;
  GradVec mom_student;
  double baseline = 0.0;
  std::size_t step = 0;
};

struct MetricsRow {
  std::size_t step = 0;
  double loss_student = 0.0;
  double loss_teacher_total = 0.0;
  double h_raw = 0.0;
  double h_after_baseline = 0.0;
  double cosine_value = 0.0;
  double teacher_train_acc = 0.0;
  double student_train_acc = 0.0;
  double test_acc = 0.0;
};

struct TrainResult {
  Params student;
  std::optional<Params> teacher;
  std::vector<MetricsRow> metrics;
  // Student updates that consumed ground-truth labels before finetuning.
  std::size_t student_label_updates = 0;
  // Pseudo Labels only: unlabeled epochs in which no example passed the threshold.
  std::size_t empty_pseudo_epochs = 0;
};

TrainerState init_state(const TrainerConfig& config);

// --- building blocks -------------------------------------------------------

int sample_pseudo_label(const Dist& teacher_dist, Rng& rng);
std::vector<int> sample_pseudo_labels(const Matrix& teacher_probs, Rng& rng);

struct StudentStep {
  Params student;      // theta_S'
  GradVec momentum;    // updated student momentum buffer
  GradVec grad;        // g_u = grad_S CE(y_hat, S(x_u; theta_S)), before the update
  double loss = 0.0;
};
StudentStep student_step(const TrainerState& state, const Matrix& x_u, std::span<const int> y_hat,
                         const TrainerConfig& config);

struct Feedback {
  double h_raw = 0.0;  // before the baseline
  double h = 0.0;      // h_raw - baseline
};
// dot:    h_raw = eta_S * <g_l, g_u>
// cosine: h_raw = cos(g_l, g_u)
Feedback feedback_coefficient(const GradVec& g_l, const GradVec& g_u, double eta_s, FeedbackMode mode,
                              double baseline);

// h * grad_T [ -log P(y_hat | x_u; theta_T) ], i.e. h times the summed
// per-example cross-entropy gradient of the teacher on its own samples.
GradVec teacher_feedback_grad(double h, const Params& teacher, const Matrix& x_u, std::span<const int> y_hat);

// Gradient of CE(stopgrad(softmax(T(x)/tau)), softmax(T(jitter(x)))) through
// the augmented branch only. Not scaled by uda_factor.
LossGrad teacher_uda_grad(const Params& teacher, const Matrix& x, const TrainerConfig& config, Rng& aug_rng);

LossGrad teacher_supervised_grad(const Params& teacher, const Matrix& x_l, std::span<const int> y_l);

double moving_baseline(double previous, double h_raw, double decay);

struct StepOutcome {
  TrainerState state;
  MetricsRow row;
  std::vector<int> pseudo_labels;
  GradVec g_l;
  GradVec g_u;
};

// One iteration of the teacher/student alternation. Throws NumericalError when
// h or any gradient becomes non-finite. row.test_acc is left for the caller.
StepOutcome mpl_step(TrainerState state, const Batch& batch, const TrainerConfig& config, Rng& label_rng,
                     Rng& aug_rng);

// --- trainers ----------------------------------------------------------------

TrainResult supervised_train(const TrainerConfig& config, const Split& split, const Params* init = nullptr);

// Teacher is never updated. Each step: labeled CE (weight pl_labeled_weight)
// plus CE on sampled teacher labels for rows whose teacher confidence reaches
// the threshold.
TrainResult pseudo_label_train(const TrainerConfig& config, const Split& split, const Params& teacher);

// N mpl_steps then finetune on labeled data. Returns the student; the final
// teacher is kept for inspection. A null initial_teacher means a random teacher.
TrainResult mpl_train(const TrainerConfig& config, const Split& split, const Params* initial_teacher = nullptr);

// Plain full-batch SGD on labeled cross-entropy with a constant learning rate.
Params finetune(Params student, const Matrix& x_l, std::span<const int> y_l, std::size_t steps, double lr);

// mpl_train with the unlabeled pool replaced by the labeled features.
TrainResult regularizer_mode_train(const TrainerConfig& config, const Split& split,
                                   const Params* initial_teacher = nullptr);

// Calibrator input: centered log-probabilities of the big teacher. softmax of
// this vector reproduces the distribution, so an identity map is an exact
// calibrator.
Matrix calibrator_inputs(const Matrix& teacher_probs);

// Identity calibrator K -> ... -> K built from relu(z) - relu(-z) = z, plus
// U(-noise, noise) perturbation. Needs relu hidden layers at least 2K wide.
Params identity_calibrator(const MlpSpec& spec, double noise, std::uint64_t seed);

struct ReducedResult {
  Params student;
  Params calibrator;
  std::vector<MetricsRow> metrics;
  Matrix first_targets;  // student targets at step 0 (diagnostic)
};

// The big teacher's distributions are computed once for every pool example.
// The student learns from calibrator outputs as soft targets; the calibrator is
// updated with the feedback coefficient on labels sampled from its output.
ReducedResult reduced_mpl_train(const TrainerConfig& config, const Split& split, const Params& big_teacher,
                                const MlpSpec& calibrator_spec);

double evaluate(const Params& params, const Matrix& x, std::span<const int> y);

}  // namespace mpl
