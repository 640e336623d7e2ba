#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mpl/augment.hpp"
#include "mpl/errors.hpp"
#include "mpl/model.hpp"
#include "mpl/trainers.hpp"
#include "mpl/verify.hpp"

using namespace mpl;

namespace {

Params random_params(const MlpSpec& spec, Rng& rng, double scale = 1.0) {
  Params p = init_params(spec, 0);
  for (auto& v : p.values()) v = rng.uniform(-scale, scale);
  return p;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data()) v = rng.uniform(-scale, scale);
  return m;
}

Split moons(std::size_t n_per_cluster, std::size_t labeled, std::uint64_t seed, double noise = 0.1) {
  return label_split(two_moon_generate(n_per_cluster, noise, seed), labeled, 0, seed + 1);
}

// Gradient of CE for a 2-[3]-2 sigmoid net, written out per example.
struct Tiny {
  double w1[2][3], b1[3], w2[3][2], b2[2];
};

Tiny unpack(const Params& p) {
  Tiny t{};
  const auto v = p.values();
  std::size_t o = 0;
  for (auto& row : t.w1) for (auto& x : row) x = v[o++];
  for (auto& x : t.b1) x = v[o++];
  for (auto& row : t.w2) for (auto& x : row) x = v[o++];
  for (auto& x : t.b2) x = v[o++];
  return t;
}

void probs_and_grad(const Tiny& t, double x0, double x1, int y, double* p, double* g) {
  double h[3];
  for (int j = 0; j < 3; ++j) h[j] = 1.0 / (1.0 + std::exp(-(x0 * t.w1[0][j] + x1 * t.w1[1][j] + t.b1[j])));
  double z[2];
  for (int k = 0; k < 2; ++k) z[k] = h[0] * t.w2[0][k] + h[1] * t.w2[1][k] + h[2] * t.w2[2][k] + t.b2[k];
  const double m = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
  p[0] = e0 / (e0 + e1);
  p[1] = e1 / (e0 + e1);
  if (!g) return;
  const double dz[2] = {p[0] - (y == 0), p[1] - (y == 1)};
  double da[3];
  for (int j = 0; j < 3; ++j) da[j] = (t.w2[j][0] * dz[0] + t.w2[j][1] * dz[1]) * h[j] * (1 - h[j]);
  std::size_t o = 0;
  for (int j = 0; j < 3; ++j) g[o++] += x0 * da[j];
  for (int j = 0; j < 3; ++j) g[o++] += x1 * da[j];
  for (int j = 0; j < 3; ++j) g[o++] += da[j];
  for (int j = 0; j < 3; ++j) for (int k = 0; k < 2; ++k) g[o++] += h[j] * dz[k];
  for (int k = 0; k < 2; ++k) g[o++] += dz[k];
}

constexpr int kTiny = 2 * 3 + 3 + 3 * 2 + 2;

}  // namespace

TEST_CASE("sample_pseudo_label") {
  Rng rng(1);
  SUBCASE("degenerate distribution") {
    for (int i = 0; i < 1000; ++i) CHECK(sample_pseudo_label(Dist({1.0, 0.0}), rng) == 0);
  }
  SUBCASE("fair coin frequency") {
    int zeros = 0;
    for (int i = 0; i < 100000; ++i) zeros += sample_pseudo_label(Dist({0.5, 0.5}), rng) == 0;
    CHECK(zeros / 1e5 >= 0.494);
    CHECK(zeros / 1e5 <= 0.506);
  }
  SUBCASE("uniform over four classes covers all labels in 100 draws") {
    std::vector<int> seen(4, 0);
    for (int i = 0; i < 100; ++i) seen[sample_pseudo_label(Dist({0.25, 0.25, 0.25, 0.25}), rng)]++;
    for (int c : seen) CHECK(c > 0);
  }
  SUBCASE("deterministic per rng state") {
    Rng a(9), b(9);
    const Matrix probs(50, 3, 1.0 / 3.0);
    CHECK(sample_pseudo_labels(probs, a) == sample_pseudo_labels(probs, b));
  }
}

TEST_CASE("student_step") {
  Rng rng(2);
  TrainerConfig c;
  c.net = {2, {4}, 2};
  TrainerState s;
  s.student = random_params(c.net, rng);
  s.mom_student = GradVec::zeros_like(s.student);
  const Matrix x = random_matrix(5, 2, rng);
  const std::vector<int> y = {0, 1, 1, 0, 1};

  SUBCASE("returns the pre-update gradient") {
    const StudentStep st = student_step(s, x, y, c);
    CHECK(st.grad == backprop(s.student, x, y).grad);
    const GradVec fd = finite_diff_grad([&](const Params& p) { return cross_entropy(y, predict(p, x)); }, s.student);
    CHECK(max_elementwise_relative_error(st.grad, fd) < 1e-4);
  }
  SUBCASE("zero learning rate keeps the student") {
    c.lr_student = 1e-300;
    CHECK(student_step(s, x, y, c).student == s.student);
  }
  SUBCASE("small step descends") {
    c.lr_student = 1e-3;
    const StudentStep st = student_step(s, x, y, c);
    CHECK(cross_entropy(y, predict(st.student, x)) < cross_entropy(y, predict(s.student, x)));
  }
}

TEST_CASE("feedback_coefficient") {
  Rng rng(3);
  GradVec g(std::vector<double>{0.3, -1.0, 2.0});
  const GradVec zero(3);
  SUBCASE("zero pseudo-label gradient leaves minus the baseline") {
    CHECK(feedback_coefficient(g, zero, 0.1, FeedbackMode::dot, 0.25).h == doctest::Approx(-0.25));
    CHECK(feedback_coefficient(g, zero, 0.1, FeedbackMode::cosine, 0.25).h == doctest::Approx(-0.25));
  }
  SUBCASE("identical gradients in cosine mode") {
    CHECK(feedback_coefficient(g, g, 0.1, FeedbackMode::cosine, 0.0).h == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("dot mode on a TwoMoon-sized net against a plain loop") {
    const MlpSpec spec;
    const Params p = random_params(spec, rng);
    const Matrix x = random_matrix(6, 2, rng);
    const std::vector<int> a = {0, 1, 0, 1, 1, 0}, b = {1, 1, 0, 0, 1, 0};
    const GradVec ga = backprop(p, x, a).grad, gb = backprop(p, x, b).grad;
    REQUIRE(ga.size() == 114);
    long double ref = 0;
    for (std::size_t i = 0; i < 114; ++i) ref += static_cast<long double>(ga.values[i]) * gb.values[i];
    const Feedback fb = feedback_coefficient(ga, gb, 0.1, FeedbackMode::dot, 0.0);
    CHECK(std::abs(fb.h_raw - 0.1 * static_cast<double>(ref)) < 1e-10);
    CHECK(fb.h == fb.h_raw);
  }
}

TEST_CASE("dot and cosine feedback agree in sign") {
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    GradVec a(10), b(10);
    for (auto& v : a.values) v = rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-6, 2));
    for (auto& v : b.values) v = rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-6, 2));
    const double d = feedback_coefficient(a, b, 0.1, FeedbackMode::dot, 0.0).h_raw;
    const double c = feedback_coefficient(a, b, 0.1, FeedbackMode::cosine, 0.0).h_raw;
    CHECK((d > 0) == (c > 0));
    CHECK((d < 0) == (c < 0));
  }
}

TEST_CASE("teacher_feedback_grad") {
  Rng rng(5);
  const Params t = random_params({2, {4}, 2}, rng);
  const Matrix x1 = random_matrix(1, 2, rng);
  const std::vector<int> y1 = {1};
  CHECK(teacher_feedback_grad(0.0, t, x1, y1) == GradVec::zeros_like(t));
  CHECK(teacher_feedback_grad(1.0, t, x1, y1) == backprop(t, x1, y1).grad);

  // For a batch the score function of the joint sample is the sum of the
  // per-example log-probability gradients.
  const Matrix x3 = random_matrix(3, 2, rng);
  const std::vector<int> y3 = {0, 1, 1};
  GradVec sum(t.size());
  for (std::size_t r = 0; r < 3; ++r) {
    const std::size_t idx[] = {r};
    const int lab[] = {y3[r]};
    sum += backprop(t, x3.gather(idx), lab).grad;
  }
  sum *= -0.7;
  CHECK(relative_error(teacher_feedback_grad(-0.7, t, x3, y3), sum) < 1e-14);
}

TEST_CASE("teacher_uda_grad") {
  Rng rng(6);
  TrainerConfig c;
  c.net = {2, {5}, 3};
  const Params t = random_params(c.net, rng);
  const Matrix x = random_matrix(4, 2, rng);
  SUBCASE("no jitter at unit temperature is a fixed point") {
    c.jitter_magnitude = 0.0;
    c.uda_temperature = 1.0;
    Rng aug(1);
    CHECK(teacher_uda_grad(t, x, c, aug).grad.norm() < 1e-15);
  }
  SUBCASE("matches finite differences with the clean branch frozen") {
    c.jitter_magnitude = 0.3;
    c.uda_temperature = 0.6;
    Rng aug(7);
    const LossGrad lg = teacher_uda_grad(t, x, c, aug);
    const Matrix target = softmax_rows(forward(t, x), 0.6);
    const Matrix noisy = jitter(x, 0.3, 7);
    const GradVec fd = finite_diff_grad([&](const Params& p) { return cross_entropy(target, predict(p, noisy)); }, t);
    CHECK(max_elementwise_relative_error(lg.grad, fd) < 1e-4);
  }
}

TEST_CASE("teacher_supervised_grad") {
  Rng rng(8);
  const Params t = random_params({2, {4}, 2}, rng);
  const Matrix x = random_matrix(3, 2, rng);
  const std::vector<int> y = {1, 0, 1};
  CHECK(teacher_supervised_grad(t, x, y).grad == backprop(t, x, y).grad);
  const GradVec fd = finite_diff_grad([&](const Params& p) { return cross_entropy(y, predict(p, x)); }, t);
  CHECK(max_elementwise_relative_error(teacher_supervised_grad(t, x, y).grad, fd) < 1e-4);

  Params perfect({{2, 2}}, {});
  perfect.bias(0, 1) = 40.0;
  const std::vector<int> ones = {1, 1, 1};
  CHECK(teacher_supervised_grad(perfect, x, ones).grad.norm() < 1e-6);
  CHECK_THROWS_AS(teacher_supervised_grad(t, Matrix(0, 2), std::vector<int>{}), std::domain_error);
}

TEST_CASE("moving baseline recursion") {
  double b = 0.0;
  Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    const double h = rng.uniform(-3, 3);
    const double next = moving_baseline(b, h, 0.95);
    CHECK(next == 0.95 * b + (1 - 0.95) * h);
    b = next;
    CHECK(std::abs(b) <= 3.0);
  }
}

TEST_CASE("one MPL step matches a hand-unrolled computation") {
  Rng rng(10);
  TrainerConfig c;
  c.net = {2, {3}, 2, Activation::sigmoid};
  c.lr_student = 0.3;
  c.lr_teacher = 0.2;
  c.baseline_decay = 0.9;
  c.teacher_supervised_weight = 0.5;
  TrainerState s;
  s.teacher = random_params(c.net, rng);
  s.student = random_params(c.net, rng);
  s.mom_teacher = GradVec::zeros_like(s.teacher);
  s.mom_student = GradVec::zeros_like(s.student);
  s.baseline = 0.013;
  REQUIRE(s.teacher.size() == kTiny);

  Batch b;
  b.x_u = random_matrix(1, 2, rng, 2.0);
  b.x_l = random_matrix(2, 2, rng, 2.0);
  b.y_l = {1, 0};

  Rng label_rng(77), aug_rng(78);
  Rng label_copy = label_rng;
  const StepOutcome out = mpl_step(s, b, c, label_rng, aug_rng);

  const Tiny T = unpack(s.teacher), S = unpack(s.student);
  double pt[2];
  probs_and_grad(T, b.x_u(0, 0), b.x_u(0, 1), 0, pt, nullptr);
  const int y_hat = label_copy.uniform() < pt[0] ? 0 : 1;
  CHECK(out.pseudo_labels[0] == y_hat);

  double gu[kTiny] = {}, pdummy[2];
  probs_and_grad(S, b.x_u(0, 0), b.x_u(0, 1), y_hat, pdummy, gu);
  Params s_next = s.student;
  for (int i = 0; i < kTiny; ++i) s_next.values()[i] -= c.lr_student * gu[i];
  const Tiny S2 = unpack(s_next);
  double gl[kTiny] = {};
  for (int r = 0; r < 2; ++r) probs_and_grad(S2, b.x_l(r, 0), b.x_l(r, 1), b.y_l[r], pdummy, gl);
  for (double& v : gl) v /= 2.0;
  double dotp = 0;
  for (int i = 0; i < kTiny; ++i) dotp += gl[i] * gu[i];
  const double h_raw = c.lr_student * dotp;
  const double h = h_raw - s.baseline;

  double gt[kTiny] = {}, gsup[kTiny] = {};
  probs_and_grad(T, b.x_u(0, 0), b.x_u(0, 1), y_hat, pdummy, gt);
  for (int r = 0; r < 2; ++r) probs_and_grad(T, b.x_l(r, 0), b.x_l(r, 1), b.y_l[r], pdummy, gsup);
  Params t_next = s.teacher;
  for (int i = 0; i < kTiny; ++i) t_next.values()[i] -= c.lr_teacher * (h * gt[i] + 0.5 * gsup[i] / 2.0);

  CHECK(out.row.h_raw == doctest::Approx(h_raw).epsilon(1e-12));
  CHECK(out.state.baseline == doctest::Approx(0.9 * 0.013 + 0.1 * h_raw).epsilon(1e-12));
  CHECK(out.state.step == 1);
  for (int i = 0; i < kTiny; ++i) {
    CHECK(std::abs(out.state.teacher.values()[i] - t_next.values()[i]) < 1e-10);
    CHECK(std::abs(out.state.student.values()[i] - s_next.values()[i]) < 1e-10);
  }
}

TEST_CASE("mpl_step is deterministic") {
  const Split sp = moons(50, 3, 1);
  TrainerConfig c;
  c.batch_u = 16;
  c.uda_factor = 0.5;
  const TrainerState s = init_state(c);
  BatchStream bs(sp, 6, 16, 3);
  const Batch b = bs.next();
  Rng l1(1), a1(2), l2(1), a2(2);
  const StepOutcome x = mpl_step(s, b, c, l1, a1);
  const StepOutcome y = mpl_step(s, b, c, l2, a2);
  CHECK(x.state.teacher == y.state.teacher);
  CHECK(x.state.student == y.state.student);
  CHECK(x.state.baseline == y.state.baseline);
}

TEST_CASE("mpl_step aborts on non-finite values") {
  const Split sp = moons(20, 3, 1);
  TrainerConfig c;
  c.batch_u = 4;
  TrainerState s = init_state(c);
  s.student.values()[0] = std::nan("");
  BatchStream bs(sp, 6, 4, 3);
  Rng l(1), a(2);
  try {
    mpl_step(s, bs.next(), c, l, a);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("supervised_train") {
  const Split sp = moons(1000, 3, 2);
  TrainerConfig c;
  SUBCASE("zero steps returns the initialization") {
    c.steps = 0;
    CHECK(supervised_train(c, sp).student == init_params(c.net, mix_seed(c.seed, 2)));
  }
  SUBCASE("fits the six labeled points") {
    c.steps = 10000;
    c.eval_every = 0;
    const TrainResult r = supervised_train(c, sp);
    CHECK(evaluate(r.student, sp.labeled_x, sp.labeled_y) == 1.0);
    REQUIRE(r.metrics.size() == 10000);
    // 100-step window means of the loss never increase.
    double prev = 1e9;
    for (std::size_t w = 0; w < 100; ++w) {
      double m = 0;
      for (std::size_t i = 0; i < 100; ++i) m += r.metrics[w * 100 + i].loss_student / 100;
      CHECK(m <= prev + 1e-12);
      prev = m;
    }
  }
}

TEST_CASE("finetune") {
  const Split sp = moons(100, 3, 3);
  const Params init = init_params(MlpSpec{}, 5);
  CHECK(finetune(init, sp.labeled_x, sp.labeled_y, 0, 0.1) == init);
  const Params tuned = finetune(init, sp.labeled_x, sp.labeled_y, 50, 0.05);
  CHECK(cross_entropy(sp.labeled_y, predict(tuned, sp.labeled_x)) <
        cross_entropy(sp.labeled_y, predict(init, sp.labeled_x)));

  // Full-batch supervised training with the same settings takes the same path.
  TrainerConfig c;
  c.steps = 50;
  c.lr_student = 0.05;
  c.batch_l = 6;
  c.eval_every = 0;
  const Params sup = supervised_train(c, sp, &init).student;
  for (std::size_t i = 0; i < sup.size(); ++i) CHECK(std::abs(sup.values()[i] - tuned.values()[i]) < 1e-12);
}

TEST_CASE("pseudo_label_train") {
  const Split sp = moons(200, 3, 4);
  TrainerConfig c;
  c.steps = 200;
  c.batch_u = 32;
  c.eval_every = 0;
  SUBCASE("threshold one with an unsaturated teacher trains on labels only") {
    c.pl_confidence_threshold = 1.0;
    const Params teacher = init_params(c.net, 99);
    const TrainResult r = pseudo_label_train(c, sp, teacher);
    CHECK(r.empty_pseudo_epochs > 0);
    CHECK(r.student_label_updates == 200);
    // Same as supervised training on the same labeled batches.
    TrainerConfig pure = c;
    pure.pl_labeled_weight = 1.0;
    BatchStream bs(sp, c.batch_l, c.batch_u, mix_seed(c.seed, 3));
    Params s = init_params(c.net, mix_seed(c.seed, 2));
    GradVec mom = GradVec::zeros_like(s);
    for (int t = 0; t < 200; ++t) {
      const Batch b = bs.next();
      sgd_momentum_update(s, backprop(s, b.x_l, b.y_l).grad, c.lr_student, 0.0, mom);
    }
    CHECK(r.student == s);
  }
  SUBCASE("teacher is never modified") {
    const Params teacher = init_params(c.net, 99);
    CHECK(*pseudo_label_train(c, sp, teacher).teacher == teacher);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(pseudo_label_train(c, sp, init_params(MlpSpec{2, {4}, 2}, 1)), ShapeError);
  }
}

TEST_CASE("pseudo labels from a near-perfect teacher transfer its accuracy") {
  // A teacher fitted on every label with a large step size separates the moons.
  const Dataset ds = two_moon_generate(300, 0.1, 6);
  const Split full = label_split(ds, 300, 0, 7);
  TrainerConfig tc;
  tc.lr_student = 2.0;
  tc.batch_l = 600;
  tc.steps = 6000;
  tc.eval_every = 0;
  const Params teacher = supervised_train(tc, full).student;
  const double teacher_acc = evaluate(teacher, full.eval_x, full.eval_y);
  REQUIRE(teacher_acc >= 0.97);

  const Split sp = label_split(ds, 3, 0, 8);
  TrainerConfig c;
  c.lr_student = 2.0;
  c.batch_u = 64;
  c.steps = 6000;
  c.eval_every = 0;
  c.pl_confidence_threshold = 0.0;
  const TrainResult r = pseudo_label_train(c, sp, teacher);
  CHECK(std::abs(evaluate(r.student, sp.eval_x, sp.eval_y) - teacher_acc) <= 0.02);
}

TEST_CASE("frozen teacher MPL replays Pseudo Labels bit for bit") {
  const Split sp = moons(100, 3, 5);
  TrainerConfig c;
  c.steps = 300;
  c.batch_u = 16;
  c.lr_teacher = 0.0;
  c.uda_factor = 0.0;
  c.pl_confidence_threshold = 0.0;
  c.pl_labeled_weight = 0.0;
  c.eval_every = 50;
  const Params teacher = init_params(c.net, 1234);
  const TrainResult a = mpl_train(c, sp, &teacher);
  const TrainResult b = pseudo_label_train(c, sp, teacher);
  CHECK(a.student == b.student);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) CHECK(a.metrics[i].test_acc == b.metrics[i].test_acc);
}

TEST_CASE("student never reads labels directly") {
  const Split sp = moons(100, 3, 6);
  Split flipped = sp;
  for (auto& y : flipped.labeled_y) y = 1 - y;
  TrainerConfig c;
  c.steps = 100;
  c.batch_u = 16;
  c.lr_teacher = 0.0;
  c.eval_every = 0;
  CHECK(mpl_train(c, sp).student == mpl_train(c, flipped).student);
  c.batch_u = 6;
  CHECK(regularizer_mode_train(c, sp).student == regularizer_mode_train(c, flipped).student);
  // With a learning teacher the labels do matter, through the teacher only.
  c.lr_teacher = 0.1;
  CHECK_FALSE(*mpl_train(c, sp).teacher == *mpl_train(c, flipped).teacher);
}

TEST_CASE("mpl_train with no steps returns the initial student") {
  const Split sp = moons(20, 3, 7);
  TrainerConfig c;
  c.steps = 0;
  c.batch_u = 8;
  const TrainResult r = mpl_train(c, sp);
  CHECK(r.student == init_state(c).student);
  CHECK(r.metrics.empty());
}

TEST_CASE("regularizer mode draws unlabeled batches from labeled features") {
  const Split sp = moons(50, 3, 8);
  const Split reg = regularizer_split(sp);
  CHECK(reg.unlabeled_x == sp.labeled_x);
  CHECK(reg.labeled_x == sp.labeled_x);
  CHECK(reg.eval_x == sp.eval_x);
}

TEST_CASE("reduced MPL") {
  const Split sp = moons(100, 3, 9);
  TrainerConfig bc;
  bc.net = {2, {16}, 2};
  bc.steps = 500;
  bc.eval_every = 0;
  const Params big = supervised_train(bc, sp).student;
  const MlpSpec cal{2, {4}, 2, Activation::relu};

  TrainerConfig c;
  c.batch_u = 16;
  c.steps = 200;
  c.eval_every = 0;

  SUBCASE("identity calibrator reproduces the big teacher at the first step") {
    const ReducedResult r = reduced_mpl_train(c, sp, big, cal);
    BatchStream bs(sp, c.batch_l, c.batch_u, mix_seed(c.seed, 3));
    const Matrix ref = predict(big, bs.next().x_u);
    REQUIRE(r.first_targets.rows() == ref.rows());
    for (std::size_t i = 0; i < ref.rows(); ++i) {
      double tv = 0;
      for (std::size_t k = 0; k < 2; ++k) tv += 0.5 * std::abs(ref(i, k) - r.first_targets(i, k));
      CHECK(tv < 1e-3);
    }
  }
  SUBCASE("frozen exact identity is soft-label distillation") {
    c.lr_teacher = 0.0;
    c.calibrator_init_noise = 0.0;
    const ReducedResult r = reduced_mpl_train(c, sp, big, cal);
    BatchStream bs(sp, c.batch_l, c.batch_u, mix_seed(c.seed, 3));
    Params s = init_params(c.net, mix_seed(c.seed, 2));
    GradVec mom = GradVec::zeros_like(s);
    for (std::size_t t = 0; t < c.steps; ++t) {
      const Batch b = bs.next();
      sgd_momentum_update(s, backprop(s, b.x_u, predict(big, b.x_u)).grad, c.lr_student, 0.0, mom);
    }
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s.values()[i] - r.student.values()[i]) < 1e-9);
  }
  SUBCASE("calibrator dims must equal K") {
    CHECK_THROWS_AS(reduced_mpl_train(c, sp, big, MlpSpec{3, {6}, 2, Activation::relu}), ShapeError);
  }
  SUBCASE("identity construction is exact without noise") {
    const Params id = identity_calibrator(MlpSpec{3, {6, 6}, 3, Activation::relu}, 0.0, 0);
    Rng rng(1);
    const Matrix z = random_matrix(5, 3, rng, 4.0);
    CHECK(forward(id, z) == z);
    CHECK_THROWS_AS(identity_calibrator(MlpSpec{3, {5}, 3, Activation::relu}, 0.0, 0), ShapeError);
  }
}

TEST_CASE("TrainerConfig validation") {
  TrainerConfig c;
  CHECK_NOTHROW(c.validate());
  c.lr_student = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.baseline_decay = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.pl_confidence_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.uda_temperature = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
