#include "grlsnam/stages.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>

namespace grlsnam {

namespace {

std::vector<double> origins(double extent, double length, double overlap) {
  std::vector<double> out;
  if (extent >= length) return {0.0};
  const double step = extent * (1.0 - overlap);
  for (double o = 0.0;; o += step) {
    if (o + extent >= length - 1e-12) {
      out.push_back(length - extent);
      break;
    }
    out.push_back(o);
  }
  return out;
}

double clearance_at(const Workspace& ws, const Vec2& p, double cap) {
  return true_clearance(ws, p, 0.0, cap);
}

// Free raster over a stage. Cell (i, j) has centre lo + (i + 0.5, j + 0.5) * h.
struct StageRaster {
  Vec2 lo;
  double h = 0.05;
  int nx = 1, ny = 1;
  std::vector<std::uint8_t> free;

  StageRaster(const Rect& stage, const Workspace& ws, double resolution, double inflate)
      : lo(stage.lo), h(resolution) {
    const Vec2 ext = stage.hi - stage.lo;
    nx = std::max(1, static_cast<int>(std::ceil(ext.x() / h - 1e-9)));
    ny = std::max(1, static_cast<int>(std::ceil(ext.y() / h - 1e-9)));
    free.resize(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        free[idx(i, j)] = clearance_at(ws, center(i, j), inflate + 1.0) > inflate;
  }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  Vec2 center(int i, int j) const { return lo + Vec2((i + 0.5) * h, (j + 0.5) * h); }
  std::pair<int, int> cell_of(const Vec2& p) const {
    const int i = std::clamp(static_cast<int>(std::floor((p.x() - lo.x()) / h)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y() - lo.y()) / h)), 0, ny - 1);
    return {i, j};
  }

  // 8-connected Dijkstra from `from`; the start cell is always enterable.
  std::vector<double> distances(const Vec2& from, std::vector<int>* parent = nullptr) const {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(free.size(), inf);
    if (parent) parent->assign(free.size(), -1);
    const auto [si, sj] = cell_of(from);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[idx(si, sj)] = 0.0;
    open.push({0.0, static_cast<int>(idx(si, sj))});
    while (!open.empty()) {
      const auto [d, u] = open.top();
      open.pop();
      if (d > dist[u]) continue;
      const int ui = u % nx, uj = u / nx;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (!di && !dj) continue;
          const int vi = ui + di, vj = uj + dj;
          if (vi < 0 || vj < 0 || vi >= nx || vj >= ny) continue;
          const std::size_t v = idx(vi, vj);
          if (!free[v]) continue;
          if (di && dj && (!free[idx(ui + di, uj)] || !free[idx(ui, uj + dj)])) continue;
          const double nd = d + ((di && dj) ? std::numbers::sqrt2 : 1.0);
          if (nd < dist[v]) {
            dist[v] = nd;
            if (parent) (*parent)[v] = u;
            open.push({nd, static_cast<int>(v)});
          }
        }
    }
    return dist;
  }
};

bool on_workspace_boundary(double coord, double L) {
  return std::abs(coord) < 1e-9 || std::abs(coord - L) < 1e-9;
}

// Edge through which the segment from `p` (inside) toward `goal` leaves the
// rectangle, or -1 if the goal is inside.
int crossing_edge(const Rect& r, const Vec2& p, const Vec2& goal) {
  const Vec2 d = goal - p;
  double best = std::numeric_limits<double>::infinity();
  int edge = -1;
  auto consider = [&](double t, int e) {
    if (t > 0.0 && t <= 1.0 && t < best) {
      best = t;
      edge = e;
    }
  };
  if (d.x() < 0) consider((r.lo.x() - p.x()) / d.x(), static_cast<int>(Edge::West));
  if (d.x() > 0) consider((r.hi.x() - p.x()) / d.x(), static_cast<int>(Edge::East));
  if (d.y() < 0) consider((r.lo.y() - p.y()) / d.y(), static_cast<int>(Edge::South));
  if (d.y() > 0) consider((r.hi.y() - p.y()) / d.y(), static_cast<int>(Edge::North));
  return edge;
}

bool faces_goal(const Rect& r, Edge e, const Vec2& goal) {
  switch (e) {
    case Edge::West: return goal.x() < r.lo.x();
    case Edge::East: return goal.x() > r.hi.x();
    case Edge::South: return goal.y() < r.lo.y();
    case Edge::North: return goal.y() > r.hi.y();
  }
  return false;
}

}  // namespace

StageManager::StageManager(double side_length, const StageOptions& options)
    : side_length_(side_length) {
  if (!(side_length > 0.0)) throw ConfigError("stage tiling: side length must be positive");
  if (!(options.width > 0.0) || !(options.height > 0.0))
    throw ConfigError("stage tiling: stage dimensions must be positive");
  if (options.overlap < 0.0 || options.overlap >= 1.0)
    throw ConfigError("stage tiling: overlap must lie in [0, 1)");
  const double w = std::min(options.width, side_length);
  const double h = std::min(options.height, side_length);
  const auto xs = origins(w, side_length, options.overlap);
  const auto ys = origins(h, side_length, options.overlap);
  for (double y : ys)
    for (double x : xs) stages_.push_back(Rect{Vec2(x, y), Vec2(x + w, y + h)});
}

std::vector<int> StageManager::containing(const Vec2& p) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < stages_.size(); ++i)
    if (stages_[i].contains(p)) out.push_back(static_cast<int>(i));
  return out;
}

int StageManager::activate(const Vec2& position, const Vec2& goal, int exclude) {
  auto cand = containing(position);
  if (cand.empty()) throw OutOfBoundsError("no stage contains the position");
  if (cand.size() > 1) std::erase(cand, exclude);
  int best = cand.front();
  double best_d = (stages_[best].center() - goal).norm();
  for (int c : cand) {
    const double d = (stages_[c].center() - goal).norm();
    if (d < best_d - 1e-12) {
      best = c;
      best_d = d;
    }
  }
  active_ = best;
  return best;
}

bool StageManager::hand_over(const Vec2& position) {
  for (int c : containing(position))
    if (stages_[static_cast<std::size_t>(c)].contains(exit_goal_)) {
      active_ = c;
      return true;
    }
  return false;
}

std::vector<Opening> stage_openings(const Rect& stage, const Workspace& ws,
                                    const ExitOptions& options, const Vec2* from) {
  std::vector<Opening> out;
  const int n = std::max(1, options.samples_per_edge);
  std::optional<StageRaster> raster;
  std::vector<double> reach;
  if (options.require_reachable && from) {
    raster.emplace(stage, ws, options.raster_resolution, options.inflate);
    reach = raster->distances(*from);
  }
  const double L = ws.side_length;
  for (int e = 0; e < 4; ++e) {
    const Edge edge = static_cast<Edge>(e);
    Vec2 a, b;
    switch (edge) {
      case Edge::West: a = stage.lo; b = Vec2(stage.lo.x(), stage.hi.y()); break;
      case Edge::East: a = Vec2(stage.hi.x(), stage.lo.y()); b = stage.hi; break;
      case Edge::South: a = stage.lo; b = Vec2(stage.hi.x(), stage.lo.y()); break;
      case Edge::North: a = Vec2(stage.lo.x(), stage.hi.y()); b = stage.hi; break;
    }
    const bool vertical = edge == Edge::West || edge == Edge::East;
    if (on_workspace_boundary(vertical ? a.x() : a.y(), L)) continue;
    const double spacing = (b - a).norm() / n;
    int run_start = -1;
    for (int k = 0; k <= n; ++k) {
      bool ok = false;
      if (k < n) {
        const Vec2 p = a + (b - a) * ((k + 0.5) / n);
        ok = clearance_at(ws, p, options.inflate + 1.0) > options.inflate;
        if (ok && raster) {
          const auto [i, j] = raster->cell_of(p);
          ok = std::isfinite(reach[raster->idx(i, j)]);
        }
      }
      if (ok && run_start < 0) run_start = k;
      if (!ok && run_start >= 0) {
        Opening o;
        o.edge = edge;
        o.first = a + (b - a) * ((run_start + 0.5) / n);
        o.last = a + (b - a) * ((k - 0.5) / n);
        o.midpoint = 0.5 * (o.first + o.last);
        o.width = (k - run_start) * spacing;
        out.push_back(o);
        run_start = -1;
      }
    }
  }
  return out;
}

ExitChoice stage_exit_goal(const StageManager& stages, const Workspace& ws,
                           const Vec2& position, const ExitOptions& options) {
  const Rect& stage = stages.active_rect();
  ExitChoice choice;
  if (stage.contains(ws.goal)) {
    choice.goal = ws.goal;
    choice.terminal = true;
    return choice;
  }
  auto openings = stage_openings(stage, ws, options, &position);
  std::erase_if(openings, [&](const Opening& o) { return o.width < options.min_opening; });
  if (openings.empty()) throw DeadEndError("stage has no free exit opening");
  const int cross = crossing_edge(stage, position, ws.goal);
  auto tier = [&](const Opening& o) {
    if (static_cast<int>(o.edge) == cross) return 0;
    if (faces_goal(stage, o.edge, ws.goal)) return 1;
    return 2;
  };
  const Opening* best = nullptr;
  for (const auto& o : openings) {
    if (!best) {
      best = &o;
      continue;
    }
    const int tb = tier(*best), to = tier(o);
    if (to != tb) {
      if (to < tb) best = &o;
      continue;
    }
    if (o.width > best->width + 1e-12) {
      best = &o;
    } else if (std::abs(o.width - best->width) <= 1e-12 &&
               (o.midpoint - ws.goal).norm() < (best->midpoint - ws.goal).norm()) {
      best = &o;
    }
  }
  choice.goal = best->midpoint;
  choice.opening = *best;
  return choice;
}

double ExitMemory::value(const Vec2& p, const Vec2& goal) const {
  for (const auto& n : nodes_)
    if ((n.point - p).norm() <= kMatch) return n.h;
  return (p - goal).norm();
}

void ExitMemory::raise(const Vec2& p, double value) {
  for (auto& n : nodes_)
    if ((n.point - p).norm() <= kMatch) {
      n.h = std::max(n.h, value);
      return;
    }
  nodes_.push_back({p, value});
}

ExitChoice search_exit_goal(StageManager& stages, const Workspace& ws, const Vec2& position,
                            const ExitOptions& options, ExitMemory& memory, const Vec2* reached) {
  const double inf = std::numeric_limits<double>::infinity();
  ExitChoice best;
  double best_cost = inf;
  for (int s : stages.containing(position)) {
    const Rect& stage = stages.stages()[static_cast<std::size_t>(s)];
    const StageRaster raster(stage, ws, options.raster_resolution, options.inflate);
    const auto dist = raster.distances(position);
    auto reach = [&](const Vec2& p) {
      const auto [i, j] = raster.cell_of(p);
      return dist[raster.idx(i, j)] * raster.h;
    };
    if (stage.contains(ws.goal)) {
      const double g = reach(ws.goal);
      if (g < best_cost) {
        best_cost = g;
        best = ExitChoice{ws.goal, true, {}, s};
      }
    }
    ExitOptions plain = options;
    plain.require_reachable = false;
    for (const auto& o : stage_openings(stage, ws, plain)) {
      if (o.width < options.min_opening) continue;
      const double g = reach(o.midpoint);
      if (!std::isfinite(g) || (o.midpoint - position).norm() <= memory.radius()) continue;
      const double cost = g + memory.value(o.midpoint, ws.goal);
      if (cost < best_cost) {
        best_cost = cost;
        best = ExitChoice{o.midpoint, false, o, s};
      }
    }
  }
  if (best.stage < 0) throw DeadEndError("no reachable stage exit");
  if (reached) memory.raise(*reached, best_cost);
  stages.set_active(best.stage);
  return best;
}

Vec2 stage_waypoint(const Rect& stage, const Workspace& ws, const Vec2& position,
                    const Vec2& target, double inflate, double resolution) {
  const StageRaster raster(stage, ws, resolution, inflate);
  auto visible = [&](const Vec2& a, const Vec2& b) {
    const double len = (b - a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * resolution))));
    for (int k = 1; k <= steps; ++k) {
      const Vec2 p = a + (b - a) * (double(k) / steps);
      const auto [i, j] = raster.cell_of(p);
      if (!raster.free[raster.idx(i, j)] && (p - target).norm() > resolution) return false;
    }
    return true;
  };
  if (visible(position, target)) return target;
  std::vector<int> parent;
  const auto dist = raster.distances(position, &parent);
  const auto [ti, tj] = raster.cell_of(target);
  // the target cell may be blocked (exit on an inflated edge); finish at the
  // closest reached neighbour
  int goal_cell = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const int i = ti + di, j = tj + dj;
      if (i < 0 || j < 0 || i >= raster.nx || j >= raster.ny) continue;
      const double d = dist[raster.idx(i, j)];
      if (d < best) {
        best = d;
        goal_cell = static_cast<int>(raster.idx(i, j));
      }
    }
  if (goal_cell < 0) return target;
  std::vector<int> path;
  for (int c = goal_cell; c >= 0; c = parent[c]) path.push_back(c);
  std::reverse(path.begin(), path.end());
  for (std::size_t k = path.size(); k-- > 1;) {
    const Vec2 p = raster.center(path[k] % raster.nx, path[k] / raster.nx);
    if (visible(position, p)) return p;
  }
  return path.size() > 1 ? raster.center(path[1] % raster.nx, path[1] / raster.nx) : target;
}

}  // namespace grlsnam
