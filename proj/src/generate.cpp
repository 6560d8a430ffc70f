#include "grlsnam/generate.hpp"

#include "grlsnam/baselines.hpp"
#include "grlsnam/grid.hpp"
#include "grlsnam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grlsnam {

FamilyParams family_params(const std::string& family) {
  FamilyParams p;
  if (family == "train" || family == "test_id") return p;
  if (family == "test_ood") {
    p.n_min = 40;
    p.n_max = 48;
    p.min_gap = 0.6;
    return p;
  }
  throw ConfigError("unknown scene family '" + family + "'");
}

Workspace generate_workspace(const FamilyParams& params, std::uint64_t seed, const std::string& family) {
  Rng rng = make_rng(seed, 0x9e7);
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Workspace ws;
    ws.side_length = params.L;
    ws.seed = seed;
    ws.family = family;
    const double lo = params.margin, hi = params.L - params.margin;
    ws.start = Vec2(uniform(rng, lo, hi), uniform(rng, lo, hi));
    int tries = 0;
    do {
      ws.goal = Vec2(uniform(rng, lo, hi), uniform(rng, lo, hi));
    } while ((ws.goal - ws.start).norm() < params.start_goal_min_dist && ++tries < 1000);
    if ((ws.goal - ws.start).norm() < params.start_goal_min_dist) continue;
    const int n = params.n_min + static_cast<int>(uniform01(rng) * (params.n_max - params.n_min + 1));
    for (int k = 0; k < n; ++k) {
      for (int t = 0; t < 200; ++t) {
        Obstacle o;
        o.center = Vec2(uniform(rng, 0.0, params.L), uniform(rng, 0.0, params.L));
        o.radius = uniform(rng, params.r_min, params.r_max);
        if (signed_distance(o, ws.start) < params.endpoint_clearance ||
            signed_distance(o, ws.goal) < params.endpoint_clearance)
          continue;
        bool ok = true;
        for (const auto& e : ws.obstacles)
          if ((o.center - e.center).norm() - o.radius - e.radius < params.min_gap) {
            ok = false;
            break;
          }
        if (!ok) continue;
        ws.obstacles.push_back(o);
        break;
      }
    }
    const auto plan = astar_rigid(ws, params.feasibility_resolution, params.feasibility_inflation);
    if (!plan.feasible) continue;
    ws.validate();
    return ws;
  }
  throw GenerationError("scene generation exhausted its attempt budget");
}

Workspace generate_bottleneck(const BottleneckParams& params, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xb07);
  Workspace ws;
  ws.side_length = params.L;
  ws.seed = seed;
  ws.family = "bottleneck";
  const double L = params.L, rho = params.disc_radius;
  const double yc = uniform(rng, 0.35 * L, 0.65 * L);
  const double g = uniform(rng, params.half_gap_lo, params.half_gap_hi);
  const double x = 0.5 * L;
  // lower column ends at yc - g - rho, upper starts at yc + g + rho
  for (double y = yc - g - rho; y > -rho; y -= params.disc_spacing) ws.obstacles.push_back({Vec2(x, y), rho, 1.0});
  for (double y = yc + g + rho; y < L + rho; y += params.disc_spacing) ws.obstacles.push_back({Vec2(x, y), rho, 1.0});
  ws.start = Vec2(uniform(rng, 0.15 * L, 0.2 * L), yc + uniform(rng, -0.1 * L, 0.1 * L));
  ws.goal = Vec2(uniform(rng, 0.8 * L, 0.85 * L), yc + uniform(rng, -0.1 * L, 0.1 * L));
  ws.validate();
  return ws;
}

namespace {

struct Region {
  int x0, y0, x1, y1;  // inclusive free interior
};

void divide(OccupancyGrid& g, const Region& r, const DungeonParams& p, Rng& rng) {
  const int w = r.x1 - r.x0 + 1, h = r.y1 - r.y0 + 1;
  const bool can_v = w >= 2 * p.min_room + p.wall;
  const bool can_h = h >= 2 * p.min_room + p.wall;
  if (!can_v && !can_h) return;
  const bool vertical = can_v && (!can_h || w > h || (w == h && uniform01(rng) < 0.5));
  if (vertical) {
    const int lo = r.x0 + p.min_room, hi = r.x1 - p.min_room - p.wall + 1;
    const int wx = lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
    const int door = r.y0 + static_cast<int>(uniform01(rng) * std::max(1, h - p.door + 1));
    for (int y = r.y0; y <= r.y1; ++y)
      for (int k = 0; k < p.wall; ++k) g.set(wx + k, y, y < door || y >= door + p.door);
    divide(g, {r.x0, r.y0, wx - 1, r.y1}, p, rng);
    divide(g, {wx + p.wall, r.y0, r.x1, r.y1}, p, rng);
  } else {
    const int lo = r.y0 + p.min_room, hi = r.y1 - p.min_room - p.wall + 1;
    const int wy = lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
    const int door = r.x0 + static_cast<int>(uniform01(rng) * std::max(1, w - p.door + 1));
    for (int x = r.x0; x <= r.x1; ++x)
      for (int k = 0; k < p.wall; ++k) g.set(x, wy + k, x < door || x >= door + p.door);
    divide(g, {r.x0, r.y0, r.x1, wy - 1}, p, rng);
    divide(g, {r.x0, wy + p.wall, r.x1, r.y1}, p, rng);
  }
}

}  // namespace

Workspace generate_dungeon(const DungeonParams& params, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xd07);
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    OccupancyGrid g(params.size, params.size, params.cell_size);
    for (int y = 0; y < params.size; ++y)
      for (int x = 0; x < params.size; ++x) {
        const bool border = x < params.wall || y < params.wall || x >= params.size - params.wall ||
                            y >= params.size - params.wall;
        g.set(x, y, border);
      }
    divide(g, {params.wall, params.wall, params.size - params.wall - 1, params.size - params.wall - 1},
           params, rng);
    Workspace ws;
    ws.seed = seed;
    ws.family = "dungeon";
    ws.set_grid(std::move(g));
    // endpoints: random cells at least 5 cells from any wall
    auto sample_free = [&]() {
      for (int t = 0; t < 10000; ++t) {
        const int x = static_cast<int>(uniform01(rng) * params.size);
        const int y = static_cast<int>(uniform01(rng) * params.size);
        if (ws.sdf->at(x, y) >= 5.0) return ws.grid->cell_center(x, y);
      }
      throw GenerationError("dungeon has no open cell");
    };
    ws.start = sample_free();
    int tries = 0;
    do {
      ws.goal = sample_free();
    } while ((ws.goal - ws.start).norm() < params.start_goal_min_dist * params.cell_size && ++tries < 200);
    if ((ws.goal - ws.start).norm() < params.start_goal_min_dist * params.cell_size) continue;
    if (!astar_rigid(ws, params.cell_size, 2.0 * params.cell_size).feasible) continue;
    ws.validate();
    return ws;
  }
  throw GenerationError("dungeon generation exhausted its attempt budget");
}

Workspace generate_family(const std::string& family, std::uint64_t seed) {
  if (family == "dungeon") return generate_dungeon({}, seed);
  if (family == "bottleneck") return generate_bottleneck({}, seed);
  return generate_workspace(family_params(family), seed, family);
}

double mean_gap_width(const Workspace& ws) {
  if (ws.obstacles.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ws.obstacles.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ws.obstacles.size(); ++j) {
      if (i == j) continue;
      const auto& a = ws.obstacles[i];
      const auto& b = ws.obstacles[j];
      best = std::min(best, (a.center - b.center).norm() - a.radius - b.radius);
    }
    sum += best;
  }
  return sum / static_cast<double>(ws.obstacles.size());
}

}  // namespace grlsnam
