#include "doctest.h"
#include "grlsnam/baselines.hpp"
#include "grlsnam/rng.hpp"

#include <cmath>
#include <limits>
#include <queue>

using namespace grlsnam;

namespace {

// plain Dijkstra with the same 8-connectivity and no corner cutting
double dijkstra(const ClearanceGrid& g, std::pair<int, int> s, std::pair<int, int> t, double thr) {
  const double inf = std::numeric_limits<double>::infinity();
  auto ok = [&](int x, int y) { return x >= 0 && y >= 0 && x < g.nx && y < g.ny && g.clearance[g.idx(x, y)] >= thr; };
  std::vector<double> dist(g.clearance.size(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  if (!ok(s.first, s.second) || !ok(t.first, t.second)) return inf;
  dist[g.idx(s.first, s.second)] = 0;
  open.push({0, g.idx(s.first, s.second)});
  while (!open.empty()) {
    auto [d, i] = open.top();
    open.pop();
    if (d > dist[i]) continue;
    const int x = int(i % g.nx), y = int(i / g.nx);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        if ((!dx && !dy) || !ok(x + dx, y + dy)) continue;
        if (dx && dy && (!ok(x + dx, y) || !ok(x, y + dy))) continue;
        const double nd = d + (dx && dy ? std::sqrt(2.0) : 1.0);
        if (nd < dist[g.idx(x + dx, y + dy)]) {
          dist[g.idx(x + dx, y + dy)] = nd;
          open.push({nd, g.idx(x + dx, y + dy)});
        }
      }
  }
  return dist[g.idx(t.first, t.second)];
}

EnvironmentContext ctx_with(std::vector<Obstacle> obs) {
  EnvironmentContext c;
  for (std::size_t i = 0; i < obs.size(); ++i) c.obstacles.push_back({int(i), obs[i]});
  return c;
}

}  // namespace

TEST_CASE("grid A* cost equals Dijkstra") {
  Rng rng = make_rng(21);
  for (int k = 0; k < 30; ++k) {
    ClearanceGrid g;
    g.nx = 10 + int(uniform01(rng) * 30);
    g.ny = 10 + int(uniform01(rng) * 30);
    for (int i = 0; i < g.nx * g.ny; ++i) g.clearance.push_back(uniform01(rng));
    const std::pair<int, int> s{1, 1}, t{g.nx - 2, g.ny - 2};
    g.clearance[g.idx(1, 1)] = g.clearance[g.idx(t.first, t.second)] = 1.0;
    const double thr = 0.3;
    const GridPlan p = grid_astar(g, s, t, [&](double c) { return c >= thr; }, [](double len, double) { return len; });
    const double ref = dijkstra(g, s, t, thr);
    if (std::isinf(ref)) {
      CHECK(!p.feasible);
    } else {
      REQUIRE(p.feasible);
      CHECK(p.cost == doctest::Approx(ref).epsilon(1e-12));
      CHECK(p.length == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("reference length on open maps") {
  Workspace ws;
  ws.side_length = 10.0;
  ws.start = Vec2(1.05, 5.05);
  ws.goal = Vec2(8.05, 5.05);
  const GridPlan p = astar_rigid(ws, 0.1, 0.2);
  REQUIRE(p.feasible);
  CHECK(p.length == doctest::Approx(7.0).epsilon(1e-9));
  ws.goal = ws.start;
  CHECK(astar_rigid(ws, 0.1, 0.2).length == 0.0);
}

TEST_CASE("deformable A* squeezes where the rigid disc cannot") {
  Workspace ws;
  ws.side_length = 6.0;
  ws.start = Vec2(1.0, 3.0);
  ws.goal = Vec2(5.0, 3.0);
  // wall at x = 3; discs at y = 2.5 and 3.5 leave a half-gap of 0.25
  for (double y = 0.0; y <= 6.0; y += 0.25)
    if (std::abs(y - 3.0) > 0.3) ws.obstacles.push_back({Vec2(3.0, y), 0.25, 1.0});
  CHECK(!astar_rigid(ws, 0.05, 0.4).feasible);
  const GridPlan d = astar_deformable(ws, 0.05, 0.2, 0.4, 1.0);
  CHECK(d.feasible);

  Workspace open;
  open.side_length = 6.0;
  open.start = ws.start;
  open.goal = ws.goal;
  const GridPlan r = astar_rigid(open, 0.1, 0.4), f = astar_deformable(open, 0.1, 0.2, 0.4, 1.0);
  CHECK(r.cells == f.cells);
}

TEST_CASE("potential field step") {
  PfGains g;
  g.v_max = 100.0;
  const Vec2 v = pf_step(Vec2(0, 0), EnvironmentContext{}, Vec2(3, 4), g);
  CHECK(v.normalized().isApprox(Vec2(0.6, 0.8)));

  // symmetric pair flanking the line to the goal
  const auto pair = ctx_with({{Vec2(1.0, 0.6), 0.3, 1.0}, {Vec2(1.0, -0.6), 0.3, 1.0}});
  CHECK(std::abs(pf_step(Vec2(0.5, 0), pair, Vec2(4, 0), g).y()) < 1e-12);

  g.v_max = 1.0;
  CHECK(pf_step(Vec2(0, 0), EnvironmentContext{}, Vec2(30, 40), g).norm() == doctest::Approx(1.0));
}

TEST_CASE("dynamic window") {
  DwaConfig cfg;
  const DwaState st;
  const auto cands = dwa_candidates(st, cfg);
  CHECK(cands.size() == std::size_t(cfg.n_v * cfg.n_v));
  const DwaResult r = dwa_step(st, EnvironmentContext{}, Vec2(5, 0), cfg);
  CHECK(!r.blocked);
  // fastest column toward the goal, at most one grid step off axis
  double best_x = -1, spacing = 1e9;
  for (const Vec2& c : cands) {
    best_x = std::max(best_x, c.x());
    if (c.y() > 1e-12) spacing = std::min(spacing, c.y());
  }
  CHECK(r.command.x() == doctest::Approx(best_x));
  CHECK(std::abs(r.command.y()) <= spacing + 1e-12);

  // wall straight ahead: the chosen rollout never penetrates
  const auto wall = ctx_with({{Vec2(0.5, 0.0), 0.3, 1.0}});
  const DwaState moving{Vec2(0, 0), Vec2(0.8, 0)};
  const DwaResult w = dwa_step(moving, wall, Vec2(5, 0), cfg);
  if (!w.blocked) {
    CHECK(std::isfinite(dwa_score(moving, w.command, wall, Vec2(5, 0), cfg)));
    Vec2 p = moving.position;
    for (int k = 0; k < cfg.horizon; ++k) {
      p += cfg.dt * w.command;
      CHECK(signed_distance(wall.obstacles[0].obstacle, p) > 0.0);
    }
  }
}
