#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpl/data.hpp"
#include "mpl/model.hpp"
#include "mpl/trainers.hpp"

namespace mpl {

enum class Method { supervised, pseudo_labels, mpl, mpl_regularizer, reduced_mpl, label_smoothing };
enum class DatasetKind { two_moon, csv };
enum class TeacherInit { random, supervised };

struct ExperimentConfig {
  Method method = Method::mpl;
  DatasetKind dataset = DatasetKind::two_moon;

  std::size_t n_per_cluster = 1000;
  double noise_sd = kDefaultMoonNoise;
  std::filesystem::path csv_path;
  CsvSchema csv_schema{2, 2, std::size_t{2}};
  std::size_t n_labeled_per_class = 3;
  std::size_t n_test = 0;

  TrainerConfig trainer;

  // Teacher for Pseudo Labels, and optional warm start for the MPL teacher.
  std::size_t teacher_pretrain_steps = 1000;
  TeacherInit mpl_teacher_init = TeacherInit::random;

  // Reduced MPL: the big teacher is trained supervised before the run.
  MlpSpec big_teacher_net{2, {32, 32}, 2, Activation::sigmoid};
  std::size_t big_teacher_steps = 2000;
  MlpSpec calibrator_net{2, {4}, 2, Activation::relu};

  std::size_t n_seeds = 20;
  std::uint64_t base_seed = 0;
  double success_threshold = 0.95;
  std::filesystem::path output_dir = "runs";
  bool write_checkpoints = true;

  void validate() const;
};

// Flat `key = value` text with `[section]` headers. Keys are addressed as
// `section.key`; `#` starts a comment. Unknown keys are a ConfigError.
std::map<std::string, std::string> parse_key_values(std::istream& in);
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// The canonical text form; parsing it yields an equal configuration.
std::string format_experiment_config(const ExperimentConfig& config);

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct SeedResult {
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  double final_accuracy = 0.0;   // on the split's evaluation set
  double labeled_accuracy = 0.0;
  bool success = false;
  std::vector<MetricsRow> metrics;
  Params student;
};

// Data generation, split and training for one seed. Pure; writes nothing.
SeedResult run_seed(const ExperimentConfig& config, std::size_t seed_index);

struct ExperimentSummary {
  Method method = Method::mpl;
  std::vector<SeedResult> seeds;  // metrics/params dropped once written
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

// Runs every seed, writing <out>/seed_<i>/metrics.csv and student.ckpt plus
// <out>/summary.csv and <out>/summary.txt. The output directory is checked for
// writability before any training starts.
ExperimentSummary run_experiment(const ExperimentConfig& config);

// Aggregation without files.
ExperimentSummary summarize(Method method, std::vector<SeedResult> seeds, double threshold);

double success_rate(std::span<const double> per_seed_accuracy, double threshold);

inline constexpr const char* kMetricsHeader =
    "step,loss_student,loss_teacher_total,h_raw,h_after_baseline,cosine_value,teacher_train_acc,student_train_acc,"
    "test_acc";
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);

struct GridBounds {
  double x_min = -1.5, x_max = 2.5, y_min = -1.0, y_max = 1.5;
};
GridBounds parse_bounds(const std::string& text);

struct GridPoint {
  double x = 0.0, y = 0.0;
  int label = 0;
  double p0 = 0.0;
};
// resolution x resolution evaluations of a 2-D classifier, row-major in y then x.
std::vector<GridPoint> decision_grid(const Params& params, const GridBounds& bounds, std::size_t resolution);
void write_grid_csv(std::ostream& out, std::span<const GridPoint> grid);

// Reads summary.txt files under dir (recursively) and prints one table row each.
void print_report(const std::filesystem::path& dir, std::ostream& out);

}  // namespace mpl
