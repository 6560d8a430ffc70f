#include "grlsnam/workspace.hpp"

#include "grlsnam/coverage.hpp"
#include "grlsnam/grid.hpp"
#include "grlsnam/stages.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grlsnam {

void Obstacle::validate() const {
  if (!center.allFinite() || !std::isfinite(radius) || !std::isfinite(weight))
    throw SchemaError("obstacle has non-finite fields");
  if (radius <= 0.0) throw SchemaError("obstacle radius must be positive");
  if (weight < 0.0) throw SchemaError("obstacle weight must be nonnegative");
}

double signed_distance(const Obstacle& obstacle, const Vec2& point) {
  return (point - obstacle.center).norm() - obstacle.radius;
}

int OccupancyGrid::count_occupied() const {
  return static_cast<int>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

double OccupancyGrid::distance_to_occupied(const Vec2& point, double max_distance) const {
  const double reach = max_distance / cell_size;
  const double px = point.x() / cell_size, py = point.y() / cell_size;
  const int x0 = std::max(0, static_cast<int>(std::floor(px - reach)));
  const int x1 = std::min(width - 1, static_cast<int>(std::floor(px + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(py - reach)));
  const int y1 = std::min(height - 1, static_cast<int>(std::floor(py + reach)));
  double best2 = reach * reach;
  bool hit = false;
  for (int y = y0; y <= y1; ++y) {
    const double dy = std::max({y - py, 0.0, py - (y + 1)});
    if (dy * dy > best2) continue;
    for (int x = x0; x <= x1; ++x) {
      if (!occupied(x, y)) continue;
      const double dx = std::max({x - px, 0.0, px - (x + 1)});
      const double d2 = dx * dx + dy * dy;
      if (d2 <= best2) {
        best2 = d2;
        hit = true;
      }
    }
  }
  return hit ? std::sqrt(best2) * cell_size : max_distance;
}

void Workspace::set_grid(OccupancyGrid g) {
  if (g.width <= 0 || g.height <= 0) throw SchemaError("occupancy grid is empty");
  if (g.cells.size() != static_cast<std::size_t>(g.width) * g.height)
    throw SchemaError("occupancy grid size mismatch");
  side_length = std::max(g.width, g.height) * g.cell_size;
  sdf = std::make_shared<const SdfField>(grid_to_sdf(g));
  grid = std::move(g);
}

void Workspace::validate() const {
  if (!(side_length > 0.0) || !std::isfinite(side_length))
    throw SchemaError("side length must be positive");
  for (const auto& o : obstacles) o.validate();
  if (!inside(start)) throw SchemaError("start lies outside the workspace");
  if (!inside(goal)) throw SchemaError("goal lies outside the workspace");
  for (const auto& o : obstacles) {
    if (signed_distance(o, start) < 0.0) throw SchemaError("start collides with an obstacle");
    if (signed_distance(o, goal) < 0.0) throw SchemaError("goal collides with an obstacle");
  }
  if (grid) {
    const double extent = std::max(grid->width, grid->height) * grid->cell_size;
    if (std::abs(extent - side_length) > 1e-9 * std::max(1.0, side_length))
      throw SchemaError("occupancy grid extent does not match the side length");
    if (grid->distance_to_occupied(start, 1.0) <= 0.0)
      throw SchemaError("start lies in an occupied cell");
    if (grid->distance_to_occupied(goal, 1.0) <= 0.0)
      throw SchemaError("goal lies in an occupied cell");
  }
}

double true_clearance(const Workspace& ws, const Vec2& point, double body_radius,
                      double search_radius) {
  double best = search_radius;
  for (const auto& o : ws.obstacles) best = std::min(best, signed_distance(o, point));
  if (ws.grid) best = std::min(best, ws.grid->distance_to_occupied(point, search_radius));
  return best - body_radius;
}

bool disc_intersects_window(const Obstacle& obstacle, const Window& window) {
  const Vec2 lo = window.lo(), hi = window.hi();
  const Vec2 closest = obstacle.center.cwiseMax(lo).cwiseMin(hi);
  return (closest - obstacle.center).squaredNorm() <= obstacle.radius * obstacle.radius;
}

const Obstacle* EnvironmentContext::find(int index) const {
  for (const auto& io : obstacles)
    if (io.index == index) return &io.obstacle;
  return nullptr;
}

EnvironmentContext sense(const Workspace& ws, const Vec2& position, double half_extent,
                         const StageManager* stages, CoverageTracker* tracker,
                         const SenseOptions& options) {
  if (!position.allFinite() || !ws.inside(position))
    throw OutOfBoundsError("sensing position lies outside the workspace");
  EnvironmentContext ctx;
  ctx.window = Window{position, half_extent};
  ctx.stage_goal = stages ? stages->exit_goal() : ws.goal;
  for (std::size_t i = 0; i < ws.obstacles.size(); ++i)
    if (disc_intersects_window(ws.obstacles[i], ctx.window))
      ctx.obstacles.push_back({static_cast<int>(i), ws.obstacles[i]});
  if (ws.grid && ws.sdf) {
    CircleFitOptions fit;
    fit.max_circles = options.max_circles;
    fit.max_radius_cells = options.max_radius_cells;
    const int offset = static_cast<int>(ws.obstacles.size());
    for (auto io : extract_circles(*ws.grid, *ws.sdf, cells_in_window(*ws.grid, ctx.window), fit)) {
      io.index += offset;
      ctx.obstacles.push_back(io);
    }
  }
  if (tracker) tracker->add_window(ctx.window);
  return ctx;
}

std::vector<int> active_set(const Vec2& position, const EnvironmentContext& ctx, double d_hat,
                            double body_radius) {
  std::vector<int> out;
  for (const auto& io : ctx.obstacles)
    if (signed_distance(io.obstacle, position) - body_radius <= d_hat) out.push_back(io.index);
  return out;
}

}  // namespace grlsnam
