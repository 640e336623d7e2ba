#include "mpl/model.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "mpl/errors.hpp"
#include "mpl/rng.hpp"

namespace mpl {

void MlpSpec::validate() const {
  if (input_dim < 1) throw ShapeError("MlpSpec: input_dim must be >= 1");
  if (classes < 2) throw ShapeError("MlpSpec: need at least two classes");
  for (auto w : hidden) {
    if (w < 1) throw ShapeError("MlpSpec: hidden widths must be >= 1");
  }
}

std::vector<LayerShape> MlpSpec::layers() const {
  std::vector<LayerShape> out;
  std::size_t prev = input_dim;
  for (auto w : hidden) {
    out.push_back({prev, w});
    prev = w;
  }
  out.push_back({prev, classes});
  return out;
}

Params init_params(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Params p(spec.layers(), std::vector<Activation>(spec.hidden.size(), spec.activation));
  Rng rng(seed);
  for (auto& v : p.values()) v = rng.uniform(-kInitScale, kInitScale);
  return p;
}

Matrix predict(const Params& params, const Matrix& x) { return softmax_rows(forward(params, x), 1.0); }

namespace {

constexpr char kMagic[4] = {'M', 'P', 'L', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw std::runtime_error("checkpoint: truncated file");
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_params(const Params& params) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.num_layers()));
  for (const auto& s : params.layers()) {
    put<std::uint64_t>(out, s.fan_in);
    put<std::uint64_t>(out, s.fan_out);
  }
  for (auto a : params.activations()) put<std::uint8_t>(out, a == Activation::relu ? 1 : 0);
  put<std::uint64_t>(out, params.size());
  for (double v : params.values()) put<double>(out, v);
  return out;
}

Params decode_params(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  Reader r(bytes.subspan(4));
  if (r.get<std::uint32_t>() != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  const auto n_layers = r.get<std::uint32_t>();
  if (n_layers == 0 || n_layers > 1024) throw std::runtime_error("checkpoint: bad layer count");
  std::vector<LayerShape> layers;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const auto fi = r.get<std::uint64_t>();
    const auto fo = r.get<std::uint64_t>();
    layers.push_back({static_cast<std::size_t>(fi), static_cast<std::size_t>(fo)});
  }
  std::vector<Activation> acts;
  for (std::uint32_t l = 0; l + 1 < n_layers; ++l) {
    const auto a = r.get<std::uint8_t>();
    if (a > 1) throw std::runtime_error("checkpoint: unknown activation code");
    acts.push_back(a == 1 ? Activation::relu : Activation::sigmoid);
  }
  const auto count = r.get<std::uint64_t>();
  if (count != Params::count_for(layers)) throw std::runtime_error("checkpoint: value count does not match shape");
  std::vector<double> values(count);
  for (auto& v : values) v = r.get<double>();
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return Params(std::move(layers), std::move(acts), std::move(values));
}

void save_params(const Params& params, const std::filesystem::path& path) {
  const auto bytes = encode_params(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Params load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_params(bytes);
}

}  // namespace mpl
