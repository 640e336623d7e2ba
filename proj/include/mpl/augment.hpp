#pragma once

#include <cstdint>

#include "mpl/numcore.hpp"
#include "mpl/rng.hpp"

namespace mpl {

// x + N(0, magnitude^2) independently per coordinate.
Matrix jitter(const Matrix& x, double magnitude, std::uint64_t seed);
Matrix jitter(const Matrix& x, double magnitude, Rng& rng);

// (1 - eps) * onehot(y) + eps / K.
Dist label_smooth(int y, std::size_t num_classes, double eps);
Matrix label_smooth(std::span<const int> labels, std::size_t num_classes, double eps);

}  // namespace mpl
