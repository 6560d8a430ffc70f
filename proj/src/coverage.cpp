#include "grlsnam/coverage.hpp"

#include <algorithm>
#include <cmath>

namespace grlsnam {

CoverageTracker::CoverageTracker(double side_length, double resolution, int supersample)
    : side_length_(side_length), resolution_(resolution) {
  if (!(side_length > 0.0) || !(resolution > 0.0) || supersample < 1)
    throw ConfigError("coverage raster: invalid side length or resolution");
  // snap so the fine raster tiles [0, L] exactly
  n_ = std::max(1, static_cast<int>(std::ceil(side_length / (resolution / supersample) - 1e-9)));
  fine_ = side_length / n_;
  covered_.assign(static_cast<std::size_t>(n_) * n_, 0);
}

void CoverageTracker::add_window(const Window& window) {
  windows_.push_back(window);
  const Vec2 lo = window.lo() / fine_, hi = window.hi() / fine_;
  const int i0 = std::max(0, static_cast<int>(std::ceil(lo.x() - 0.5)));
  const int j0 = std::max(0, static_cast<int>(std::ceil(lo.y() - 0.5)));
  const int i1 = std::min(n_ - 1, static_cast<int>(std::floor(hi.x() - 0.5)));
  const int j1 = std::min(n_ - 1, static_cast<int>(std::floor(hi.y() - 0.5)));
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      auto& c = covered_[static_cast<std::size_t>(j) * n_ + i];
      if (!c) {
        c = 1;
        ++covered_count_;
      }
    }
}

double CoverageTracker::covered_area() const {
  return static_cast<double>(covered_count_) * fine_ * fine_;
}

double mapping_ratio(const CoverageTracker& tracker, double side_length) {
  if (!(side_length > 0.0)) throw ConfigError("mapping_ratio: side length must be positive");
  return std::clamp(tracker.covered_area() / (side_length * side_length), 0.0, 1.0);
}

}  // namespace grlsnam
