#include "mpl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mpl/errors.hpp"

namespace mpl {

void Dataset::validate() const {
  if (features.rows() < 1) throw std::domain_error("Dataset: no rows");
  if (has_labels()) {
    if (labels.size() != features.rows()) throw ShapeError("Dataset: label count differs from row count");
    for (int y : labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
        throw std::domain_error("Dataset: label " + std::to_string(y) + " out of range");
      }
    }
  }
}

Dataset two_moon_generate(std::size_t n_per_cluster, double noise_sd, std::uint64_t seed) {
  if (n_per_cluster < 1) throw std::domain_error("two_moon_generate: n_per_cluster must be >= 1");
  if (!(noise_sd >= 0.0)) throw std::domain_error("two_moon_generate: noise_sd must be >= 0");
  Rng arc_rng(mix_seed(seed, 0));
  Rng noise_rng(mix_seed(seed, 1));
  Dataset ds;
  ds.num_classes = 2;
  ds.features = Matrix(2 * n_per_cluster, 2);
  ds.labels.resize(2 * n_per_cluster);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < n_per_cluster; ++i) {
      const std::size_t r = c * n_per_cluster + i;
      const double t = arc_rng.uniform(0.0, std::numbers::pi);
      double x = std::cos(t);
      double y = std::sin(t);
      if (c == 1) {
        x = 1.0 - x;
        y = 0.5 - y;
      }
      ds.features(r, 0) = x + noise_sd * noise_rng.normal();
      ds.features(r, 1) = y + noise_sd * noise_rng.normal();
      ds.labels[r] = static_cast<int>(c);
    }
  }
  return ds;
}

Split label_split(const Dataset& ds, std::size_t n_labeled_per_class, std::size_t n_test, std::uint64_t seed) {
  ds.validate();
  if (!ds.has_labels()) throw std::domain_error("label_split: dataset has no labels");
  if (n_labeled_per_class < 1) throw std::domain_error("label_split: need at least one label per class");
  Rng rng(seed);

  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  Split s;
  s.num_classes = ds.num_classes;
  std::vector<char> taken(ds.size(), 0);
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    auto& pool = by_class[c];
    if (pool.size() < n_labeled_per_class) {
      throw std::domain_error("label_split: class " + std::to_string(c) + " has only " +
                              std::to_string(pool.size()) + " examples");
    }
    // Partial Fisher-Yates: the first n slots become a uniform sample.
    for (std::size_t i = 0; i < n_labeled_per_class; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
      std::swap(pool[i], pool[j]);
      s.labeled_idx.push_back(pool[i]);
      taken[pool[i]] = 1;
    }
  }

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!taken[i]) rest.push_back(i);
  }
  if (n_test > rest.size()) throw std::domain_error("label_split: not enough examples left for the test set");
  rng.shuffle(std::span(rest));
  s.test_idx.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.unlabeled_idx.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_test), rest.end());
  std::sort(s.test_idx.begin(), s.test_idx.end());
  std::sort(s.unlabeled_idx.begin(), s.unlabeled_idx.end());

  auto labels_at = [&](const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(ds.labels[i]);
    return out;
  };
  s.labeled_x = ds.features.gather(s.labeled_idx);
  s.labeled_y = labels_at(s.labeled_idx);
  s.unlabeled_x = ds.features.gather(s.unlabeled_idx);
  s.unlabeled_truth = labels_at(s.unlabeled_idx);
  s.test_x = ds.features.gather(s.test_idx);
  s.test_y = labels_at(s.test_idx);
  if (n_test > 0) {
    s.eval_x = s.test_x;
    s.eval_y = s.test_y;
  } else {
    s.eval_x = ds.features;
    s.eval_y = ds.labels;
  }
  return s;
}

Split regularizer_split(const Split& split) {
  Split s = split;
  s.unlabeled_x = split.labeled_x;
  s.unlabeled_idx = split.labeled_idx;
  s.unlabeled_truth.clear();
  return s;
}

IndexSampler::IndexSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
  if (n == 0) throw std::domain_error("IndexSampler: empty pool");
  for (std::size_t i = 0; i < n; ++i) order_[i] = i;
  rng_.shuffle(std::span(order_));
}

std::vector<std::size_t> IndexSampler::take(std::size_t count) {
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    if (pos_ == order_.size()) {
      rng_.shuffle(std::span(order_));
      pos_ = 0;
    }
    out.push_back(order_[pos_++]);
  }
  return out;
}

namespace {

std::size_t checked_pool(std::size_t n) {
  if (n == 0) throw std::domain_error("BatchStream: empty labeled or unlabeled pool");
  return n;
}

}  // namespace

BatchStream::BatchStream(const Split& split, std::size_t batch_l, std::size_t batch_u, std::uint64_t seed)
    : split_(&split),
      batch_l_(batch_l),
      batch_u_(batch_u),
      labeled_(checked_pool(split.labeled_x.rows()), mix_seed(seed, 10)),
      unlabeled_(checked_pool(split.unlabeled_x.rows()), mix_seed(seed, 11)) {
  if (batch_l < 1 || batch_u < 1) throw std::domain_error("BatchStream: batch sizes must be >= 1");
  if (batch_l > split.labeled_x.rows() || batch_u > split.unlabeled_x.rows()) {
    throw std::domain_error("BatchStream: batch size exceeds pool size");
  }
}

Batch BatchStream::next() {
  Batch b;
  b.idx_l = labeled_.take(batch_l_);
  b.idx_u = unlabeled_.take(batch_u_);
  b.x_l = split_->labeled_x.gather(b.idx_l);
  b.y_l.reserve(b.idx_l.size());
  for (auto i : b.idx_l) b.y_l.push_back(split_->labeled_y[i]);
  b.x_u = split_->unlabeled_x.gather(b.idx_u);
  return b;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset csv_ingest(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv_ingest: cannot open " + path.string());
  if (schema.dim < 1) throw std::domain_error("csv_ingest: dim must be >= 1");
  const std::size_t width = schema.dim + (schema.label_column ? 1 : 0);
  if (schema.label_column && *schema.label_column >= width) {
    throw std::domain_error("csv_ingest: label column index out of range");
  }

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  ++line_no;
  if (split_fields(line).size() != width) {
    throw ParseError(line_no, "header has the wrong number of columns (expected " + std::to_string(width) + ")");
  }

  Dataset ds;
  ds.num_classes = schema.num_classes;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw ParseError(line_no, "expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      const auto f = trim(fields[c]);
      if (schema.label_column && c == *schema.label_column) {
        int y = 0;
        const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), y);
        if (ec != std::errc() || p != f.data() + f.size()) {
          throw ParseError(line_no, "label field '" + std::string(f) + "' is not an integer");
        }
        if (y < 0 || static_cast<std::size_t>(y) >= schema.num_classes) {
          throw std::domain_error("csv_ingest: line " + std::to_string(line_no) + ": label " + std::to_string(y) +
                                  " out of range");
        }
        ds.labels.push_back(y);
      } else {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v)) {
          throw ParseError(line_no, "field " + std::to_string(c) + " ('" + std::string(f) + "') is not a number");
        }
        values.push_back(v);
      }
    }
  }
  const std::size_t rows = values.size() / schema.dim;
  ds.features = Matrix(rows, schema.dim, std::move(values));
  ds.validate();
  return ds;
}

void csv_export(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("csv_export: cannot open " + path.string());
  const std::size_t d = ds.features.cols();
  for (std::size_t c = 0; c < d; ++c) out << (c ? "," : "") << 'f' << c;
  if (ds.has_labels()) out << ",label";
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features(r, c));
      out << (c ? "," : "") << buf;
    }
    if (ds.has_labels()) out << ',' << ds.labels[r];
    out << '\n';
  }
}

}  // namespace mpl
