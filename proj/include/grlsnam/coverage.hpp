#pragma once

#include "grlsnam/workspace.hpp"

#include <vector>

namespace grlsnam {

/// Union-of-windows area accounting on a raster of [0, L]^2. Each raster cell
/// of size `resolution` is supersampled `supersample` x `supersample` times;
/// a subsample counts as covered once its centre falls inside any window.
class CoverageTracker {
 public:
  CoverageTracker(double side_length, double resolution, int supersample = 4);

  void add_window(const Window& window);

  double covered_area() const;
  const std::vector<Window>& windows() const { return windows_; }
  double resolution() const { return resolution_; }
  double side_length() const { return side_length_; }

 private:
  double side_length_;
  double resolution_;
  double fine_;
  int n_;
  std::vector<std::uint8_t> covered_;
  std::size_t covered_count_ = 0;
  std::vector<Window> windows_;
};

/// area(union of windows clipped to [0, L]^2) / L^2.
double mapping_ratio(const CoverageTracker& tracker, double side_length);

}  // namespace grlsnam
