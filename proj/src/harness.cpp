#include "mpl/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "mpl/errors.hpp"

namespace mpl {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that reads back to the same double.
std::string fmt_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<std::size_t>(parse_uint(key, item)));
  }
  return out;
}

std::string fmt_widths(const std::vector<std::size_t>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "," : "") + std::to_string(w[i]);
  return out;
}

Activation parse_activation(const std::string& key, const std::string& v) {
  if (v == "sigmoid") return Activation::sigmoid;
  if (v == "relu") return Activation::relu;
  throw ConfigError(key + ": unknown activation '" + v + "'");
}

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "sigmoid"; }

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field number(T ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.*member = parse_double(k, v);
            } else {
              c.*member = static_cast<T>(parse_uint(k, v));
            }
          },
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

template <typename T>
Field trainer_number(T TrainerConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.trainer.*member = parse_double(k, v);
            } else {
              c.trainer.*member = static_cast<T>(parse_uint(k, v));
            }
          },
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt_double(c.trainer.*member);
            } else {
              return std::to_string(c.trainer.*member);
            }
          }};
}

Field trainer_flag(bool TrainerConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.trainer.*member = parse_bool(k, v);
          },
          [member](const ExperimentConfig& c) { return std::string(c.trainer.*member ? "true" : "false"); }};
}

Field spec_fields(MlpSpec ExperimentConfig::*spec, const char* which) {
  const std::string part = which;
  if (part == "hidden") {
    return {[spec](ExperimentConfig& c, const std::string& k, const std::string& v) {
              (c.*spec).hidden = parse_widths(k, v);
            },
            [spec](const ExperimentConfig& c) { return fmt_widths((c.*spec).hidden); }};
  }
  return {[spec](ExperimentConfig& c, const std::string& k, const std::string& v) {
            (c.*spec).activation = parse_activation(k, v);
          },
          [spec](const ExperimentConfig& c) { return std::string(activation_name((c.*spec).activation)); }};
}

// Ordered so that format_experiment_config emits a stable, sectioned file.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("experiment.method",
                   Field{[](ExperimentConfig& c, const std::string&, const std::string& v) {
                           c.method = method_from_string(v);
                         },
                         [](const ExperimentConfig& c) { return to_string(c.method); }});
    t.emplace_back("experiment.n_seeds", number(&ExperimentConfig::n_seeds));
    t.emplace_back("experiment.base_seed", number(&ExperimentConfig::base_seed));
    t.emplace_back("experiment.success_threshold", number(&ExperimentConfig::success_threshold));
    t.emplace_back("experiment.output_dir",
                   Field{[](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; },
                         [](const ExperimentConfig& c) { return c.output_dir.string(); }});
    t.emplace_back("experiment.write_checkpoints",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           c.write_checkpoints = parse_bool(k, v);
                         },
                         [](const ExperimentConfig& c) { return std::string(c.write_checkpoints ? "true" : "false"); }});
    t.emplace_back("experiment.teacher_pretrain_steps", number(&ExperimentConfig::teacher_pretrain_steps));
    t.emplace_back("experiment.mpl_teacher_init",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           if (v == "random") {
                             c.mpl_teacher_init = TeacherInit::random;
                           } else if (v == "supervised") {
                             c.mpl_teacher_init = TeacherInit::supervised;
                           } else {
                             throw ConfigError(k + ": expected random or supervised");
                           }
                         },
                         [](const ExperimentConfig& c) {
                           return std::string(c.mpl_teacher_init == TeacherInit::random ? "random" : "supervised");
                         }});

    t.emplace_back("data.dataset",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           if (v == "two_moon") {
                             c.dataset = DatasetKind::two_moon;
                           } else if (v == "csv") {
                             c.dataset = DatasetKind::csv;
                           } else {
                             throw ConfigError(k + ": expected two_moon or csv");
                           }
                         },
                         [](const ExperimentConfig& c) {
                           return std::string(c.dataset == DatasetKind::two_moon ? "two_moon" : "csv");
                         }});
    t.emplace_back("data.n_per_cluster", number(&ExperimentConfig::n_per_cluster));
    t.emplace_back("data.noise_sd", number(&ExperimentConfig::noise_sd));
    t.emplace_back("data.csv_path",
                   Field{[](ExperimentConfig& c, const std::string&, const std::string& v) { c.csv_path = v; },
                         [](const ExperimentConfig& c) { return c.csv_path.string(); }});
    t.emplace_back("data.csv_dim",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           c.csv_schema.dim = static_cast<std::size_t>(parse_uint(k, v));
                         },
                         [](const ExperimentConfig& c) { return std::to_string(c.csv_schema.dim); }});
    t.emplace_back("data.csv_classes",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           c.csv_schema.num_classes = static_cast<std::size_t>(parse_uint(k, v));
                         },
                         [](const ExperimentConfig& c) { return std::to_string(c.csv_schema.num_classes); }});
    t.emplace_back("data.csv_label_column",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           if (v == "none") {
                             c.csv_schema.label_column.reset();
                           } else {
                             c.csv_schema.label_column = static_cast<std::size_t>(parse_uint(k, v));
                           }
                         },
                         [](const ExperimentConfig& c) {
                           return c.csv_schema.label_column ? std::to_string(*c.csv_schema.label_column)
                                                            : std::string("none");
                         }});
    t.emplace_back("data.n_labeled_per_class", number(&ExperimentConfig::n_labeled_per_class));
    t.emplace_back("data.n_test", number(&ExperimentConfig::n_test));

    t.emplace_back("model.hidden",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           c.trainer.net.hidden = parse_widths(k, v);
                         },
                         [](const ExperimentConfig& c) { return fmt_widths(c.trainer.net.hidden); }});
    t.emplace_back("model.activation",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           c.trainer.net.activation = parse_activation(k, v);
                         },
                         [](const ExperimentConfig& c) { return std::string(activation_name(c.trainer.net.activation)); }});

    t.emplace_back("trainer.lr_student", trainer_number(&TrainerConfig::lr_student));
    t.emplace_back("trainer.lr_teacher", trainer_number(&TrainerConfig::lr_teacher));
    t.emplace_back("trainer.momentum", trainer_number(&TrainerConfig::momentum));
    t.emplace_back("trainer.steps", trainer_number(&TrainerConfig::steps));
    t.emplace_back("trainer.batch_l", trainer_number(&TrainerConfig::batch_l));
    t.emplace_back("trainer.batch_u", trainer_number(&TrainerConfig::batch_u));
    t.emplace_back("trainer.uda_factor", trainer_number(&TrainerConfig::uda_factor));
    t.emplace_back("trainer.uda_temperature", trainer_number(&TrainerConfig::uda_temperature));
    t.emplace_back("trainer.jitter_magnitude", trainer_number(&TrainerConfig::jitter_magnitude));
    t.emplace_back("trainer.uda_on_labeled", trainer_flag(&TrainerConfig::uda_on_labeled));
    t.emplace_back("trainer.uda_mask", trainer_flag(&TrainerConfig::uda_mask));
    t.emplace_back("trainer.feedback_mode",
                   Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           if (v == "dot") {
                             c.trainer.feedback_mode = FeedbackMode::dot;
                           } else if (v == "cosine") {
                             c.trainer.feedback_mode = FeedbackMode::cosine;
                           } else {
                             throw ConfigError(k + ": expected dot or cosine");
                           }
                         },
                         [](const ExperimentConfig& c) {
                           return std::string(c.trainer.feedback_mode == FeedbackMode::dot ? "dot" : "cosine");
                         }});
    t.emplace_back("trainer.baseline_decay", trainer_number(&TrainerConfig::baseline_decay));
    t.emplace_back("trainer.feedback_enabled", trainer_flag(&TrainerConfig::feedback_enabled));
    t.emplace_back("trainer.teacher_supervised_weight", trainer_number(&TrainerConfig::teacher_supervised_weight));
    t.emplace_back("trainer.pl_confidence_threshold", trainer_number(&TrainerConfig::pl_confidence_threshold));
    t.emplace_back("trainer.pl_labeled_weight", trainer_number(&TrainerConfig::pl_labeled_weight));
    t.emplace_back("trainer.label_smoothing", trainer_number(&TrainerConfig::label_smoothing));
    t.emplace_back("trainer.finetune_steps", trainer_number(&TrainerConfig::finetune_steps));
    t.emplace_back("trainer.finetune_lr", trainer_number(&TrainerConfig::finetune_lr));
    t.emplace_back("trainer.calibrator_init_noise", trainer_number(&TrainerConfig::calibrator_init_noise));
    t.emplace_back("trainer.eval_every", trainer_number(&TrainerConfig::eval_every));

    t.emplace_back("reduced.big_teacher_hidden", spec_fields(&ExperimentConfig::big_teacher_net, "hidden"));
    t.emplace_back("reduced.big_teacher_activation", spec_fields(&ExperimentConfig::big_teacher_net, "activation"));
    t.emplace_back("reduced.big_teacher_steps", number(&ExperimentConfig::big_teacher_steps));
    t.emplace_back("reduced.calibrator_hidden", spec_fields(&ExperimentConfig::calibrator_net, "hidden"));
    return t;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return f;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator); zero for a single seed.
double std_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::supervised: return "supervised";
    case Method::pseudo_labels: return "pseudo_labels";
    case Method::mpl: return "mpl";
    case Method::mpl_regularizer: return "mpl_regularizer";
    case Method::reduced_mpl: return "reduced_mpl";
    case Method::label_smoothing: return "label_smoothing";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::supervised, Method::pseudo_labels, Method::mpl, Method::mpl_regularizer,
                   Method::reduced_mpl, Method::label_smoothing}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown method '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  if (!(success_threshold > 0.0 && success_threshold <= 1.0)) throw ConfigError("success_threshold must lie in (0, 1]");
  if (dataset == DatasetKind::csv && csv_path.empty()) throw ConfigError("data.csv_path is required for csv datasets");
  if (dataset == DatasetKind::two_moon && n_per_cluster < 1) throw ConfigError("n_per_cluster must be >= 1");
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be >= 0");
  if (n_labeled_per_class < 1) throw ConfigError("n_labeled_per_class must be >= 1");
  if (method == Method::label_smoothing && !(trainer.label_smoothing > 0.0)) {
    throw ConfigError("label_smoothing method needs trainer.label_smoothing > 0");
  }
  try {
    trainer.validate();
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
}

namespace {

struct Entry {
  std::string key, value;
  std::size_t line = 0;
};

std::vector<Entry> read_entries(std::istream& in) {
  std::vector<Entry> out;
  std::set<std::string> seen;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!seen.insert(full).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
    }
    out.push_back({full, trim(line.substr(eq + 1)), line_no});
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  for (auto& e : read_entries(in)) out[e.key] = std::move(e.value);
  return out;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig c;
  for (const auto& e : read_entries(in)) {
    try {
      find_field(e.key).set(c, e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_experiment_config(in);
}

std::string format_experiment_config(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, field] : fields()) {
    const auto dot_pos = key.find('.');
    const std::string sec = key.substr(0, dot_pos);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot_pos + 1) << " = " << field.get(config) << '\n';
  }
  return out.str();
}

double success_rate(std::span<const double> per_seed_accuracy, double threshold) {
  if (per_seed_accuracy.empty()) throw std::domain_error("success_rate: no seeds");
  const auto hits = std::count_if(per_seed_accuracy.begin(), per_seed_accuracy.end(),
                                  [threshold](double a) { return a >= threshold; });
  return static_cast<double>(hits) / static_cast<double>(per_seed_accuracy.size());
}

SeedResult run_seed(const ExperimentConfig& config, std::size_t seed_index) {
  const std::uint64_t seed = config.base_seed + seed_index;
  Dataset ds = config.dataset == DatasetKind::two_moon
                   ? two_moon_generate(config.n_per_cluster, config.noise_sd, mix_seed(seed, 100))
                   : csv_ingest(config.csv_path, config.csv_schema);
  const Split split = label_split(ds, config.n_labeled_per_class, config.n_test, mix_seed(seed, 101));

  TrainerConfig tc = config.trainer;
  tc.seed = mix_seed(seed, 102);
  tc.net.input_dim = ds.features.cols();
  tc.net.classes = ds.num_classes;
  tc.batch_l = std::min(tc.batch_l, split.labeled_x.rows());

  // Supervised teacher grown from the same initialization an MPL teacher would use.
  auto pretrained_teacher = [&] {
    TrainerConfig pc = tc;
    pc.steps = config.teacher_pretrain_steps;
    pc.label_smoothing = 0.0;
    const Params init = init_params(pc.net, mix_seed(tc.seed, 1));
    return supervised_train(pc, split, &init).student;
  };

  SeedResult r;
  r.seed_index = seed_index;
  r.seed = seed;
  switch (config.method) {
    case Method::supervised: {
      TrainerConfig sc = tc;
      sc.label_smoothing = 0.0;
      auto res = supervised_train(sc, split);
      r.student = std::move(res.student);
      r.metrics = std::move(res.metrics);
      break;
    }
    case Method::label_smoothing: {
      auto res = supervised_train(tc, split);
      r.student = std::move(res.student);
      r.metrics = std::move(res.metrics);
      break;
    }
    case Method::pseudo_labels: {
      tc.batch_u = std::min(tc.batch_u, split.unlabeled_x.rows());
      const Params teacher = pretrained_teacher();
      auto res = pseudo_label_train(tc, split, teacher);
      r.student = std::move(res.student);
      r.metrics = std::move(res.metrics);
      break;
    }
    case Method::mpl:
    case Method::mpl_regularizer: {
      std::optional<Params> teacher;
      if (config.mpl_teacher_init == TeacherInit::supervised) teacher = pretrained_teacher();
      const Params* init = teacher ? &*teacher : nullptr;
      TrainResult res;
      if (config.method == Method::mpl) {
        tc.batch_u = std::min(tc.batch_u, split.unlabeled_x.rows());
        res = mpl_train(tc, split, init);
      } else {
        tc.batch_u = std::min(tc.batch_u, split.labeled_x.rows());
        res = regularizer_mode_train(tc, split, init);
      }
      r.student = std::move(res.student);
      r.metrics = std::move(res.metrics);
      break;
    }
    case Method::reduced_mpl: {
      tc.batch_u = std::min(tc.batch_u, split.unlabeled_x.rows());
      TrainerConfig bc = tc;
      bc.net.hidden = config.big_teacher_net.hidden;
      bc.net.activation = config.big_teacher_net.activation;
      bc.steps = config.big_teacher_steps;
      bc.label_smoothing = 0.0;
      const Params big = supervised_train(bc, split).student;
      MlpSpec cal = config.calibrator_net;
      cal.input_dim = ds.num_classes;
      cal.classes = ds.num_classes;
      cal.activation = Activation::relu;
      auto res = reduced_mpl_train(tc, split, big, cal);
      r.student = std::move(res.student);
      r.metrics = std::move(res.metrics);
      break;
    }
  }
  r.final_accuracy = evaluate(r.student, split.eval_x, split.eval_y);
  r.labeled_accuracy = evaluate(r.student, split.labeled_x, split.labeled_y);
  r.success = r.final_accuracy >= config.success_threshold;
  return r;
}

ExperimentSummary summarize(Method method, std::vector<SeedResult> seeds, double threshold) {
  ExperimentSummary s;
  s.method = method;
  std::vector<double> acc;
  for (const auto& r : seeds) acc.push_back(r.final_accuracy);
  s.success_rate = success_rate(acc, threshold);
  s.successes = static_cast<std::size_t>(std::count_if(acc.begin(), acc.end(), [&](double a) { return a >= threshold; }));
  s.mean_accuracy = mean_of(acc);
  s.std_accuracy = std_of(acc);
  s.seeds = std::move(seeds);
  return s;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.step << ',' << fmt_double(r.loss_student) << ',' << fmt_double(r.loss_teacher_total) << ','
        << fmt_double(r.h_raw) << ',' << fmt_double(r.h_after_baseline) << ',' << fmt_double(r.cosine_value) << ','
        << fmt_double(r.teacher_train_acc) << ',' << fmt_double(r.student_train_acc) << ','
        << fmt_double(r.test_acc) << '\n';
  }
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  const fs::path& out = config.output_dir;
  {
    std::error_code ec;
    fs::create_directories(out, ec);
    const fs::path probe = out / ".write_probe";
    std::ofstream f(probe);
    if (ec || !f) throw std::runtime_error("output directory " + out.string() + " is not writable");
    f.close();
    fs::remove(probe, ec);
  }
  {
    std::ofstream f(out / "config.txt");
    f << format_experiment_config(config);
  }

  std::vector<SeedResult> results;
  results.reserve(config.n_seeds);
  for (std::size_t i = 0; i < config.n_seeds; ++i) {
    SeedResult r = run_seed(config, i);
    const fs::path dir = out / ("seed_" + std::to_string(i));
    fs::create_directories(dir);
    {
      std::ofstream f(dir / "metrics.csv", std::ios::trunc);
      write_metrics_csv(f, r.metrics);
      if (!f) throw std::runtime_error("failed writing " + (dir / "metrics.csv").string());
    }
    if (config.write_checkpoints) save_params(r.student, dir / "student.ckpt");
    r.metrics.clear();
    r.metrics.shrink_to_fit();
    results.push_back(std::move(r));
  }

  ExperimentSummary s = summarize(config.method, std::move(results), config.success_threshold);
  {
    std::ofstream f(out / "summary.csv", std::ios::trunc);
    f << "seed_index,seed,final_accuracy,labeled_accuracy,success\n";
    for (const auto& r : s.seeds) {
      f << r.seed_index << ',' << r.seed << ',' << fmt_double(r.final_accuracy) << ','
        << fmt_double(r.labeled_accuracy) << ',' << (r.success ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream f(out / "summary.txt", std::ios::trunc);
    f << "method=" << to_string(s.method) << '\n'
      << "n_seeds=" << s.seeds.size() << '\n'
      << "success_threshold=" << fmt_double(config.success_threshold) << '\n'
      << "successes=" << s.successes << '\n'
      << "success_rate=" << fmt_double(s.success_rate) << '\n'
      << "mean_accuracy=" << fmt_double(s.mean_accuracy) << '\n'
      << "std_accuracy=" << fmt_double(s.std_accuracy) << '\n';
  }
  return s;
}

GridBounds parse_bounds(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(parse_double("bounds", trim(item)));
  if (v.size() != 4) throw ConfigError("bounds: expected x_min,x_max,y_min,y_max");
  GridBounds b{v[0], v[1], v[2], v[3]};
  if (!(b.x_min < b.x_max && b.y_min < b.y_max)) throw ConfigError("bounds: minimum must be below maximum");
  return b;
}

std::vector<GridPoint> decision_grid(const Params& params, const GridBounds& bounds, std::size_t resolution) {
  if (params.input_dim() != 2) throw std::domain_error("decision_grid: model input is not 2-D");
  if (resolution < 1) throw std::domain_error("decision_grid: resolution must be >= 1");
  const auto coord = [resolution](double lo, double hi, std::size_t i) {
    return resolution == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
  };
  Matrix x(resolution * resolution, 2);
  for (std::size_t iy = 0; iy < resolution; ++iy) {
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      x(iy * resolution + ix, 0) = coord(bounds.x_min, bounds.x_max, ix);
      x(iy * resolution + ix, 1) = coord(bounds.y_min, bounds.y_max, iy);
    }
  }
  const Matrix probs = predict(params, x);
  std::vector<GridPoint> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    out[r] = {x(r, 0), x(r, 1), static_cast<int>(argmax(probs.row(r))), probs(r, 0)};
  }
  return out;
}

void write_grid_csv(std::ostream& out, std::span<const GridPoint> grid) {
  out << "x,y,class,p0\n";
  for (const auto& g : grid) {
    out << fmt_double(g.x) << ',' << fmt_double(g.y) << ',' << g.label << ',' << fmt_double(g.p0) << '\n';
  }
}

void print_report(const std::filesystem::path& dir, std::ostream& out) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("report: " + dir.string() + " is not a directory");
  std::vector<fs::path> summaries;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == "summary.txt") summaries.push_back(e.path());
  }
  std::sort(summaries.begin(), summaries.end());
  if (summaries.empty()) throw std::runtime_error("report: no summary.txt under " + dir.string());

  out << std::left << std::setw(32) << "run" << std::setw(18) << "method" << std::setw(8) << "seeds"
      << std::setw(10) << "success" << "accuracy (mean +- std)\n";
  for (const auto& p : summaries) {
    std::ifstream f(p);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const fs::path rel = fs::relative(p.parent_path(), dir);
    char acc[64];
    std::snprintf(acc, sizeof acc, "%.4f +- %.4f", std::stod(kv["mean_accuracy"]), std::stod(kv["std_accuracy"]));
    out << std::left << std::setw(32) << (rel.empty() || rel == "." ? std::string(".") : rel.string())
        << std::setw(18) << kv["method"] << std::setw(8) << kv["n_seeds"] << std::setw(10)
        << (kv["successes"] + "/" + kv["n_seeds"]) << acc << '\n';
  }
}

}  // namespace mpl
