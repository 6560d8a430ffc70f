#pragma once

#include "grlsnam/common.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace grlsnam {

struct SdfField;

/// Circular obstacle. `weight` scales its contribution to the boundary
/// integrated ring barrier.
struct Obstacle {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double weight = 1.0;

  void validate() const;
};

/// ||point - center|| - radius. Negative iff the point penetrates the disc.
double signed_distance(const Obstacle& obstacle, const Vec2& point);

/// Boolean occupancy raster. Cell (x, y) covers
/// [x*cell_size, (x+1)*cell_size] x [y*cell_size, (y+1)*cell_size]; y is the
/// row index of the source file (first line is y = 0).
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double cell_size = 1.0;
  std::vector<std::uint8_t> cells;  // row-major, 1 = occupied

  OccupancyGrid() = default;
  OccupancyGrid(int w, int h, double cell = 1.0)
      : width(w), height(h), cell_size(cell), cells(static_cast<std::size_t>(w) * h, 0) {}

  bool in_range(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool occupied(int x, int y) const { return cells[index(x, y)] != 0; }
  void set(int x, int y, bool occ) { cells[index(x, y)] = occ ? 1 : 0; }
  Vec2 cell_center(int x, int y) const { return {(x + 0.5) * cell_size, (y + 0.5) * cell_size}; }
  int count_occupied() const;

  /// Distance from `point` to the nearest occupied cell square (0 inside one).
  /// Search is bounded by `max_distance`; returns max_distance if nothing is
  /// closer.
  double distance_to_occupied(const Vec2& point, double max_distance) const;
};

/// A world instance: continuous obstacles and/or an occupancy grid over
/// [0, L]^2, plus a start/goal pair.
struct Workspace {
  double side_length = 10.0;
  std::vector<Obstacle> obstacles;
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  std::optional<OccupancyGrid> grid;
  std::shared_ptr<const SdfField> sdf;  // set together with `grid`
  std::uint64_t seed = 0;
  std::string family;

  /// Installs an occupancy grid, derives side_length from it and
  /// precomputes its SDF.
  void set_grid(OccupancyGrid g);

  bool inside(const Vec2& p) const {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= side_length && p.y() <= side_length;
  }
  bool has_grid() const { return grid.has_value(); }

  /// Checks the invariants (bounds, collision-free endpoints, grid extent).
  /// Throws SchemaError on violation.
  void validate() const;
};

/// Ground-truth clearance of a disc body of `body_radius` centred at `point`
/// against every obstacle (and grid wall) of the workspace. Used for metrics
/// and collision checks, never for control.
double true_clearance(const Workspace& ws, const Vec2& point, double body_radius,
                      double search_radius = 4.0);

struct Window {
  Vec2 center = Vec2::Zero();
  double half_extent = 1.0;

  Vec2 lo() const { return center - Vec2::Constant(half_extent); }
  Vec2 hi() const { return center + Vec2::Constant(half_extent); }
};

/// Exact disc / axis-aligned square intersection (closest-point clamp).
/// Touching counts as intersecting.
bool disc_intersects_window(const Obstacle& obstacle, const Window& window);

struct IndexedObstacle {
  int index = 0;
  Obstacle obstacle;
};

/// Locally sensed environment: what the navigator is allowed to see.
struct EnvironmentContext {
  Vec2 stage_goal = Vec2::Zero();
  std::vector<IndexedObstacle> obstacles;
  Window window;

  int constraint_count() const { return static_cast<int>(obstacles.size()); }
  const Obstacle* find(int index) const;
};

class StageManager;
class CoverageTracker;

struct SenseOptions {
  int max_circles = 16;            // grid workspaces: disc budget per window
  double max_radius_cells = 3.0;  // grid workspaces: disc radius clamp
};

/// Returns the obstacles whose disc intersects the square window
/// [position +- half_extent]^2. Grid workspaces are converted to discs with
/// extract_circles. The stage goal comes from `stages` when given (else the
/// global goal) and the window is registered in `tracker` when given.
EnvironmentContext sense(const Workspace& ws, const Vec2& position, double half_extent,
                         const StageManager* stages = nullptr, CoverageTracker* tracker = nullptr,
                         const SenseOptions& options = {});

/// Indices of ctx obstacles with signed_distance(obstacle, position) -
/// body_radius <= d_hat.
std::vector<int> active_set(const Vec2& position, const EnvironmentContext& ctx, double d_hat,
                            double body_radius = 0.0);

}  // namespace grlsnam
