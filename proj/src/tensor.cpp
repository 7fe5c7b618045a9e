#include "t3dp/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace t3dp {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace t3dp
