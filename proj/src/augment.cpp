#include "mpl/augment.hpp"

#include <stdexcept>
#include <string>

namespace mpl {

Matrix jitter(const Matrix& x, double magnitude, Rng& rng) {
  if (!(magnitude >= 0.0)) throw std::domain_error("jitter: magnitude must be >= 0");
  Matrix out = x;
  if (magnitude == 0.0) return out;
  for (auto& v : out.data()) v += magnitude * rng.normal();
  return out;
}

Matrix jitter(const Matrix& x, double magnitude, std::uint64_t seed) {
  Rng rng(seed);
  return jitter(x, magnitude, rng);
}

namespace {

void check_smoothing(int y, std::size_t k, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::domain_error("label_smooth: eps must lie in [0, 1)");
  if (k < 2) throw std::domain_error("label_smooth: need at least two classes");
  if (y < 0 || static_cast<std::size_t>(y) >= k) {
    throw std::domain_error("label_smooth: label " + std::to_string(y) + " out of range");
  }
}

}  // namespace

Dist label_smooth(int y, std::size_t num_classes, double eps) {
  check_smoothing(y, num_classes, eps);
  std::vector<double> p(num_classes, eps / static_cast<double>(num_classes));
  p[static_cast<std::size_t>(y)] += 1.0 - eps;
  return Dist(std::move(p));
}

Matrix label_smooth(std::span<const int> labels, std::size_t num_classes, double eps) {
  Matrix out(labels.size(), num_classes);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const Dist d = label_smooth(labels[r], num_classes, eps);
    for (std::size_t k = 0; k < num_classes; ++k) out(r, k) = d[k];
  }
  return out;
}

}  // namespace mpl
