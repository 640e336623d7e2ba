#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mpl/numcore.hpp"

namespace mpl {

struct MlpSpec {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden{8, 8};
  std::size_t classes = 2;
  Activation activation = Activation::sigmoid;

  void validate() const;
  std::vector<LayerShape> layers() const;
  std::size_t param_count() const { return Params::count_for(layers()); }
};

// Half-width of the uniform initialization interval.
inline constexpr double kInitScale = 0.1;

// Every weight and bias drawn from U(-0.1, 0.1), deterministic per seed.
Params init_params(const MlpSpec& spec, std::uint64_t seed);

// Row-wise softmax of the logits at temperature one.
Matrix predict(const Params& params, const Matrix& x);

// Checkpoint format (all integers and floats little-endian):
//   "MPLP" | u32 version=1 | u32 layer_count
//   | layer_count x (u64 fan_in, u64 fan_out)
//   | (layer_count-1) x u8 activation (0 sigmoid, 1 relu)
//   | u64 value_count | value_count x f64
void save_params(const Params& params, const std::filesystem::path& path);
Params load_params(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_params(const Params& params);
Params decode_params(std::span<const std::uint8_t> bytes);

}  // namespace mpl
