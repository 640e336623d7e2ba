#include "mpl/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mpl/augment.hpp"
#include "mpl/errors.hpp"

namespace mpl {

namespace {

enum Stream : std::uint64_t {
  kTeacherInit = 1,
  kStudentInit = 2,
  kBatches = 3,
  kPseudoLabels = 4,
  kAugment = 5,
};

void require_finite(double v, std::size_t step, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericalError("step " + std::to_string(step) + ": non-finite " + what + " (" + std::to_string(v) + ")");
  }
}

void require_finite(const GradVec& g, std::size_t step, const char* what) {
  if (!g.all_finite()) throw NumericalError("step " + std::to_string(step) + ": non-finite " + what);
}

bool eval_due(const TrainerConfig& c, std::size_t step) {
  return c.eval_every > 0 && ((step + 1) % c.eval_every == 0 || step + 1 == c.steps || step == 0);
}

}  // namespace

void TrainerConfig::validate() const {
  net.validate();
  if (!(lr_student > 0.0)) throw ConfigError("lr_student must be > 0");
  if (!(lr_teacher >= 0.0)) throw ConfigError("lr_teacher must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (batch_l < 1 || batch_u < 1) throw ConfigError("batch sizes must be >= 1");
  if (!(uda_factor >= 0.0)) throw ConfigError("uda_factor must be >= 0");
  if (!(uda_temperature > 0.0)) throw ConfigError("uda_temperature must be > 0");
  if (!(jitter_magnitude >= 0.0)) throw ConfigError("jitter_magnitude must be >= 0");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw ConfigError("baseline_decay must lie in [0, 1)");
  if (!(pl_confidence_threshold >= 0.0 && pl_confidence_threshold <= 1.0)) {
    throw ConfigError("pl_confidence_threshold must lie in [0, 1]");
  }
  if (!(pl_labeled_weight >= 0.0)) throw ConfigError("pl_labeled_weight must be >= 0");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) throw ConfigError("label_smoothing must lie in [0, 1)");
  if (!(finetune_lr >= 0.0)) throw ConfigError("finetune_lr must be >= 0");
  if (!(teacher_supervised_weight >= 0.0)) throw ConfigError("teacher_supervised_weight must be >= 0");
  if (!(calibrator_init_noise >= 0.0)) throw ConfigError("calibrator_init_noise must be >= 0");
}

TrainerState init_state(const TrainerConfig& config) {
  TrainerState s;
  s.teacher = init_params(config.net, mix_seed(config.seed, kTeacherInit));
  s.student = init_params(config.net, mix_seed(config.seed, kStudentInit));
  s.mom_teacher = GradVec::zeros_like(s.teacher);
  s.mom_student = GradVec::zeros_like(s.student);
  return s;
}

double evaluate(const Params& params, const Matrix& x, std::span<const int> y) {
  if (x.rows() == 0) return 0.0;
  return accuracy(forward(params, x), y);
}

int sample_pseudo_label(const Dist& teacher_dist, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t k = 0; k < teacher_dist.size(); ++k) {
    cum += teacher_dist[k];
    if (u < cum) return static_cast<int>(k);
  }
  // u landed in the rounding gap above the last cumulative sum.
  for (std::size_t k = teacher_dist.size(); k-- > 0;) {
    if (teacher_dist[k] > 0.0) return static_cast<int>(k);
  }
  return 0;
}

std::vector<int> sample_pseudo_labels(const Matrix& teacher_probs, Rng& rng) {
  std::vector<int> out(teacher_probs.rows());
  for (std::size_t r = 0; r < teacher_probs.rows(); ++r) {
    const auto row = teacher_probs.row(r);
    out[r] = sample_pseudo_label(Dist(std::vector<double>(row.begin(), row.end())), rng);
  }
  return out;
}

StudentStep student_step(const TrainerState& state, const Matrix& x_u, std::span<const int> y_hat,
                         const TrainerConfig& config) {
  auto [loss, grad] = backprop(state.student, x_u, y_hat);
  StudentStep out{state.student, state.mom_student, std::move(grad), loss};
  sgd_momentum_update(out.student, out.grad, config.lr_student, config.momentum, out.momentum);
  return out;
}

Feedback feedback_coefficient(const GradVec& g_l, const GradVec& g_u, double eta_s, FeedbackMode mode,
                              double baseline) {
  Feedback fb;
  fb.h_raw = mode == FeedbackMode::dot ? eta_s * dot(g_l, g_u) : cosine_similarity(g_l, g_u);
  fb.h = fb.h_raw - baseline;
  return fb;
}

GradVec teacher_feedback_grad(double h, const Params& teacher, const Matrix& x_u, std::span<const int> y_hat) {
  if (h == 0.0) return GradVec::zeros_like(teacher);
  GradVec g = backprop(teacher, x_u, y_hat).grad;
  // backprop averages over the batch; the score function of the joint sample sums.
  g *= h * static_cast<double>(x_u.rows());
  return g;
}

LossGrad teacher_uda_grad(const Params& teacher, const Matrix& x, const TrainerConfig& config, Rng& aug_rng) {
  const Matrix target = softmax_rows(forward(teacher, x), config.uda_temperature);
  const Matrix augmented = jitter(x, config.jitter_magnitude, aug_rng);
  return backprop(teacher, augmented, target);
}

LossGrad teacher_supervised_grad(const Params& teacher, const Matrix& x_l, std::span<const int> y_l) {
  if (x_l.rows() == 0) throw std::domain_error("teacher_supervised_grad: empty labeled batch");
  return backprop(teacher, x_l, y_l);
}

double moving_baseline(double previous, double h_raw, double decay) {
  return decay * previous + (1.0 - decay) * h_raw;
}

StepOutcome mpl_step(TrainerState state, const Batch& batch, const TrainerConfig& config, Rng& label_rng,
                     Rng& aug_rng) {
  const std::size_t t = state.step;
  MetricsRow row;
  row.step = t;

  const Matrix teacher_probs = predict(state.teacher, batch.x_u);
  std::vector<int> y_hat = sample_pseudo_labels(teacher_probs, label_rng);
  row.student_train_acc = accuracy(forward(state.student, batch.x_u), y_hat);

  StudentStep st = student_step(state, batch.x_u, y_hat, config);
  row.loss_student = st.loss;
  require_finite(st.grad, t, "student gradient");

  GradVec g_l = backprop(st.student, batch.x_l, batch.y_l).grad;
  require_finite(g_l, t, "labeled gradient at updated student");

  const Feedback fb = feedback_coefficient(g_l, st.grad, config.lr_student, config.feedback_mode, state.baseline);
  require_finite(fb.h_raw, t, "feedback coefficient");
  row.h_raw = fb.h_raw;
  row.h_after_baseline = config.feedback_enabled ? fb.h : 0.0;
  row.cosine_value = cosine_similarity(g_l, st.grad);
  state.baseline = moving_baseline(state.baseline, fb.h_raw, config.baseline_decay);

  GradVec g_teacher = teacher_feedback_grad(row.h_after_baseline, state.teacher, batch.x_u, y_hat);
  const double feedback_loss = cross_entropy(y_hat, teacher_probs);
  row.loss_teacher_total =
      row.h_after_baseline * feedback_loss * static_cast<double>(batch.x_u.rows());

  const Matrix teacher_labeled = forward(state.teacher, batch.x_l);
  row.teacher_train_acc = accuracy(teacher_labeled, batch.y_l);
  if (config.teacher_supervised_weight > 0.0) {
    auto sup = teacher_supervised_grad(state.teacher, batch.x_l, batch.y_l);
    g_teacher.add_scaled(config.teacher_supervised_weight, sup.grad);
    row.loss_teacher_total += config.teacher_supervised_weight * sup.loss;
  }
  if (config.uda_factor > 0.0) {
    auto uda = teacher_uda_grad(state.teacher, config.uda_on_labeled ? batch.x_l : batch.x_u, config, aug_rng);
    g_teacher.add_scaled(config.uda_factor, uda.grad);
    row.loss_teacher_total += config.uda_factor * uda.loss;
  }
  require_finite(g_teacher, t, "teacher gradient");

  sgd_momentum_update(state.teacher, g_teacher, config.lr_teacher, config.momentum, state.mom_teacher);
  state.student = std::move(st.student);
  state.mom_student = std::move(st.momentum);
  ++state.step;
  if (!state.teacher.all_finite() || !state.student.all_finite()) {
    throw NumericalError("step " + std::to_string(t) + ": parameters became non-finite");
  }
  return {std::move(state), row, std::move(y_hat), std::move(g_l), std::move(st.grad)};
}

TrainResult supervised_train(const TrainerConfig& config, const Split& split, const Params* init) {
  config.validate();
  if (split.labeled_x.rows() == 0) throw std::domain_error("supervised_train: no labeled data");
  const std::size_t batch = std::min(config.batch_l, split.labeled_x.rows());
  TrainResult out;
  out.student = init ? *init : init_params(config.net, mix_seed(config.seed, kStudentInit));
  GradVec mom = GradVec::zeros_like(out.student);
  IndexSampler sampler(split.labeled_x.rows(), mix_seed(mix_seed(config.seed, kBatches), 10));
  const bool smooth = config.label_smoothing > 0.0;
  double last_acc = 0.0;
  for (std::size_t t = 0; t < config.steps; ++t) {
    const auto idx = sampler.take(batch);
    const Matrix x = split.labeled_x.gather(idx);
    std::vector<int> y;
    for (auto i : idx) y.push_back(split.labeled_y[i]);
    LossGrad lg = smooth ? backprop(out.student, x, label_smooth(y, config.net.classes, config.label_smoothing))
                         : backprop(out.student, x, y);
    require_finite(lg.loss, t, "supervised loss");
    MetricsRow row;
    row.step = t;
    row.loss_student = lg.loss;
    row.student_train_acc = evaluate(out.student, x, y);
    sgd_momentum_update(out.student, lg.grad, config.lr_student, config.momentum, mom);
    ++out.student_label_updates;
    if (eval_due(config, t)) last_acc = evaluate(out.student, split.eval_x, split.eval_y);
    row.test_acc = last_acc;
    out.metrics.push_back(row);
  }
  return out;
}

TrainResult pseudo_label_train(const TrainerConfig& config, const Split& split, const Params& teacher) {
  config.validate();
  if (!teacher.same_shape(init_params(config.net, 0))) throw ShapeError("pseudo_label_train: teacher shape mismatch");
  TrainResult out;
  out.student = init_params(config.net, mix_seed(config.seed, kStudentInit));
  out.teacher = teacher;
  GradVec mom = GradVec::zeros_like(out.student);
  BatchStream stream(split, config.batch_l, config.batch_u, mix_seed(config.seed, kBatches));
  Rng label_rng(mix_seed(config.seed, kPseudoLabels));

  const std::size_t steps_per_epoch = (split.unlabeled_x.rows() + config.batch_u - 1) / config.batch_u;
  std::size_t passed_this_epoch = 0;
  double last_acc = 0.0;
  for (std::size_t t = 0; t < config.steps; ++t) {
    const Batch b = stream.next();
    const Matrix teacher_probs = predict(teacher, b.x_u);
    const std::vector<int> y_hat = sample_pseudo_labels(teacher_probs, label_rng);

    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < teacher_probs.rows(); ++r) {
      const auto p = teacher_probs.row(r);
      if (*std::max_element(p.begin(), p.end()) >= config.pl_confidence_threshold) keep.push_back(r);
    }
    passed_this_epoch += keep.size();

    MetricsRow row;
    row.step = t;
    row.teacher_train_acc = evaluate(teacher, b.x_l, b.y_l);
    GradVec grad = GradVec::zeros_like(out.student);
    if (!keep.empty()) {
      const Matrix x_keep = b.x_u.gather(keep);
      std::vector<int> y_keep;
      for (auto r : keep) y_keep.push_back(y_hat[r]);
      row.student_train_acc = evaluate(out.student, x_keep, y_keep);
      auto lg = backprop(out.student, x_keep, y_keep);
      row.loss_student += lg.loss;
      grad = std::move(lg.grad);
    }
    if (config.pl_labeled_weight > 0.0) {
      auto lg = backprop(out.student, b.x_l, b.y_l);
      row.loss_student += config.pl_labeled_weight * lg.loss;
      grad.add_scaled(config.pl_labeled_weight, lg.grad);
      ++out.student_label_updates;
    }
    require_finite(grad, t, "pseudo-label student gradient");
    sgd_momentum_update(out.student, grad, config.lr_student, config.momentum, mom);

    if ((t + 1) % steps_per_epoch == 0) {
      if (passed_this_epoch == 0) ++out.empty_pseudo_epochs;
      passed_this_epoch = 0;
    }
    if (eval_due(config, t)) last_acc = evaluate(out.student, split.eval_x, split.eval_y);
    row.test_acc = last_acc;
    out.metrics.push_back(row);
  }
  return out;
}

Params finetune(Params student, const Matrix& x_l, std::span<const int> y_l, std::size_t steps, double lr) {
  if (steps == 0) return student;
  if (x_l.rows() == 0) throw std::domain_error("finetune: no labeled data");
  GradVec mom = GradVec::zeros_like(student);
  for (std::size_t t = 0; t < steps; ++t) {
    auto lg = backprop(student, x_l, y_l);
    require_finite(lg.grad, t, "finetune gradient");
    sgd_momentum_update(student, lg.grad, lr, 0.0, mom);
  }
  return student;
}

TrainResult mpl_train(const TrainerConfig& config, const Split& split, const Params* initial_teacher) {
  config.validate();
  TrainerState state = init_state(config);
  if (initial_teacher) {
    if (!initial_teacher->same_shape(state.teacher)) throw ShapeError("mpl_train: teacher shape mismatch");
    state.teacher = *initial_teacher;
  }
  BatchStream stream(split, config.batch_l, config.batch_u, mix_seed(config.seed, kBatches));
  Rng label_rng(mix_seed(config.seed, kPseudoLabels));
  Rng aug_rng(mix_seed(config.seed, kAugment));

  TrainResult out;
  out.metrics.reserve(config.steps);
  double last_acc = 0.0;
  for (std::size_t t = 0; t < config.steps; ++t) {
    const Batch b = stream.next();
    StepOutcome step = mpl_step(std::move(state), b, config, label_rng, aug_rng);
    state = std::move(step.state);
    if (eval_due(config, t)) last_acc = evaluate(state.student, split.eval_x, split.eval_y);
    step.row.test_acc = last_acc;
    out.metrics.push_back(step.row);
  }
  out.student = finetune(std::move(state.student), split.labeled_x, split.labeled_y, config.finetune_steps,
                         config.finetune_lr);
  out.teacher = std::move(state.teacher);
  return out;
}

TrainResult regularizer_mode_train(const TrainerConfig& config, const Split& split, const Params* initial_teacher) {
  return mpl_train(config, regularizer_split(split), initial_teacher);
}

Matrix calibrator_inputs(const Matrix& teacher_probs) {
  Matrix out(teacher_probs.rows(), teacher_probs.cols());
  for (std::size_t r = 0; r < teacher_probs.rows(); ++r) {
    double mean = 0.0;
    for (std::size_t k = 0; k < teacher_probs.cols(); ++k) {
      out(r, k) = std::log(std::max(teacher_probs(r, k), kProbFloor));
      mean += out(r, k);
    }
    mean /= static_cast<double>(teacher_probs.cols());
    for (std::size_t k = 0; k < teacher_probs.cols(); ++k) out(r, k) -= mean;
  }
  return out;
}

Params identity_calibrator(const MlpSpec& spec, double noise, std::uint64_t seed) {
  spec.validate();
  const std::size_t k = spec.classes;
  if (spec.input_dim != k) throw ShapeError("identity_calibrator: input dim must equal the class count");
  if (spec.hidden.empty() || spec.activation != Activation::relu) {
    throw ShapeError("identity_calibrator: needs relu hidden layers");
  }
  for (auto w : spec.hidden) {
    if (w < 2 * k) throw ShapeError("identity_calibrator: hidden layers must be at least 2K wide");
  }
  Params p(spec.layers(), std::vector<Activation>(spec.hidden.size(), Activation::relu));
  // First layer: units [0,K) carry relu(z), units [K,2K) carry relu(-z).
  for (std::size_t i = 0; i < k; ++i) {
    p.weight(0, i, i) = 1.0;
    p.weight(0, i, k + i) = -1.0;
  }
  for (std::size_t l = 1; l + 1 < p.num_layers(); ++l) {
    for (std::size_t i = 0; i < 2 * k; ++i) p.weight(l, i, i) = 1.0;
  }
  const std::size_t last = p.num_layers() - 1;
  for (std::size_t i = 0; i < k; ++i) {
    p.weight(last, i, i) = 1.0;
    p.weight(last, k + i, i) = -1.0;
  }
  if (noise > 0.0) {
    Rng rng(seed);
    for (auto& v : p.values()) v += rng.uniform(-noise, noise);
  }
  return p;
}

ReducedResult reduced_mpl_train(const TrainerConfig& config, const Split& split, const Params& big_teacher,
                                const MlpSpec& calibrator_spec) {
  config.validate();
  const std::size_t k = config.net.classes;
  if (calibrator_spec.input_dim != k || calibrator_spec.classes != k) {
    throw ShapeError("reduced_mpl_train: calibrator input/output dims must equal K=" + std::to_string(k));
  }
  if (big_teacher.output_dim() != k) throw ShapeError("reduced_mpl_train: big teacher emits the wrong class count");

  // Precomputed once; the big teacher is never touched again.
  const Matrix cal_in_l = calibrator_inputs(predict(big_teacher, split.labeled_x));
  const Matrix cal_in_u = calibrator_inputs(predict(big_teacher, split.unlabeled_x));

  ReducedResult out;
  out.calibrator = identity_calibrator(calibrator_spec, config.calibrator_init_noise, mix_seed(config.seed, kTeacherInit));
  out.student = init_params(config.net, mix_seed(config.seed, kStudentInit));
  GradVec mom_s = GradVec::zeros_like(out.student);
  GradVec mom_c = GradVec::zeros_like(out.calibrator);
  double baseline = 0.0;

  BatchStream stream(split, config.batch_l, config.batch_u, mix_seed(config.seed, kBatches));
  Rng label_rng(mix_seed(config.seed, kPseudoLabels));
  double last_acc = 0.0;
  for (std::size_t t = 0; t < config.steps; ++t) {
    const Batch b = stream.next();
    const Matrix c_u = cal_in_u.gather(b.idx_u);
    const Matrix c_l = cal_in_l.gather(b.idx_l);
    const Matrix targets = predict(out.calibrator, c_u);
    if (t == 0) out.first_targets = targets;

    MetricsRow row;
    row.step = t;
    auto soft = backprop(out.student, b.x_u, targets);
    row.loss_student = soft.loss;
    Params student_next = out.student;
    GradVec mom_next = mom_s;
    sgd_momentum_update(student_next, soft.grad, config.lr_student, config.momentum, mom_next);

    const GradVec g_l = backprop(student_next, b.x_l, b.y_l).grad;
    const std::vector<int> y_hat = sample_pseudo_labels(targets, label_rng);
    const GradVec g_hard = backprop(out.student, b.x_u, y_hat).grad;
    row.student_train_acc = evaluate(out.student, b.x_u, y_hat);

    const Feedback fb = feedback_coefficient(g_l, g_hard, config.lr_student, config.feedback_mode, baseline);
    require_finite(fb.h_raw, t, "feedback coefficient");
    row.h_raw = fb.h_raw;
    row.h_after_baseline = config.feedback_enabled ? fb.h : 0.0;
    row.cosine_value = cosine_similarity(g_l, g_hard);
    baseline = moving_baseline(baseline, fb.h_raw, config.baseline_decay);

    GradVec g_c = teacher_feedback_grad(row.h_after_baseline, out.calibrator, c_u, y_hat);
    row.teacher_train_acc = evaluate(out.calibrator, c_l, b.y_l);
    if (config.teacher_supervised_weight > 0.0) {
      auto sup = teacher_supervised_grad(out.calibrator, c_l, b.y_l);
      g_c.add_scaled(config.teacher_supervised_weight, sup.grad);
      row.loss_teacher_total += config.teacher_supervised_weight * sup.loss;
    }
    require_finite(g_c, t, "calibrator gradient");
    sgd_momentum_update(out.calibrator, g_c, config.lr_teacher, config.momentum, mom_c);
    out.student = std::move(student_next);
    mom_s = std::move(mom_next);

    if (eval_due(config, t)) last_acc = evaluate(out.student, split.eval_x, split.eval_y);
    row.test_acc = last_acc;
    out.metrics.push_back(row);
  }
  out.student = finetune(std::move(out.student), split.labeled_x, split.labeled_y, config.finetune_steps,
                         config.finetune_lr);
  return out;
}

}  // namespace mpl
