#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mpl/numcore.hpp"
#include "mpl/rng.hpp"

namespace mpl {

struct Dataset {
  Matrix features;
  std::vector<int> labels;  // empty when ground truth is withheld
  std::size_t num_classes = 2;

  std::size_t size() const { return features.rows(); }
  bool has_labels() const { return !labels.empty(); }
  void validate() const;
};

// Labeled / unlabeled / test partition of one Dataset.
//
// Ground truth for the unlabeled pool is kept in unlabeled_truth for
// evaluation only; no trainer reads it. When test is empty, the evaluation set
// is the full dataset.
struct Split {
  Matrix labeled_x;
  std::vector<int> labeled_y;
  Matrix unlabeled_x;
  std::vector<int> unlabeled_truth;
  Matrix test_x;
  std::vector<int> test_y;
  Matrix eval_x;
  std::vector<int> eval_y;
  std::vector<std::size_t> labeled_idx, unlabeled_idx, test_idx;
  std::size_t num_classes = 2;
};

// Noiseless geometry: class 0 on (cos t, sin t), class 1 on (1 - cos t, 0.5 - sin t),
// t ~ U[0, pi]. Every coordinate then gets N(0, noise_sd^2) added. Rows are
// ordered class 0 first, then class 1.
Dataset two_moon_generate(std::size_t n_per_cluster, double noise_sd, std::uint64_t seed);

inline constexpr double kDefaultMoonNoise = 0.1;

// Picks n_labeled_per_class examples of each class uniformly without
// replacement, then n_test of the remainder for test; the rest is unlabeled.
Split label_split(const Dataset& ds, std::size_t n_labeled_per_class, std::size_t n_test, std::uint64_t seed);

// The unlabeled pool replaced by the labeled features (labels withheld).
Split regularizer_split(const Split& split);

struct Batch {
  Matrix x_l;
  std::vector<int> y_l;
  Matrix x_u;
  std::vector<std::size_t> idx_l;
  std::vector<std::size_t> idx_u;
};

// Endless epoch-shuffled index sampling over a pool of n items. When the
// current permutation runs out the pool is reshuffled and sampling continues
// from the new epoch, so every epoch visits each index exactly once.
class IndexSampler {
 public:
  IndexSampler(std::size_t n, std::uint64_t seed);
  std::vector<std::size_t> take(std::size_t count);
  std::size_t pool_size() const { return order_.size(); }

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  Rng rng_;
};

// Endless epoch-shuffled sampling of labeled and unlabeled batches.
//
// The labeled and unlabeled pools use independent IndexSamplers.
class BatchStream {
 public:
  BatchStream(const Split& split, std::size_t batch_l, std::size_t batch_u, std::uint64_t seed);

  Batch next();

 private:
  const Split* split_;
  std::size_t batch_l_, batch_u_;
  IndexSampler labeled_, unlabeled_;
};

struct CsvSchema {
  std::size_t dim = 2;
  std::size_t num_classes = 2;
  // Zero-based column holding the integer label; nullopt when labels are absent.
  std::optional<std::size_t> label_column;
};

// Reads `f0,...,f{d-1},label` style CSV with a header row. Row order preserved.
Dataset csv_ingest(const std::filesystem::path& path, const CsvSchema& schema);

// Writes the same format csv_ingest reads, with round-trip precision.
void csv_export(const Dataset& ds, const std::filesystem::path& path);

}  // namespace mpl
