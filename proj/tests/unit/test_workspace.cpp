#include "doctest.h"
#include "grlsnam/coverage.hpp"
#include "grlsnam/generate.hpp"
#include "grlsnam/grid.hpp"
#include "grlsnam/rng.hpp"
#include "grlsnam/stages.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace grlsnam;

TEST_CASE("signed distance") {
  const Obstacle o{Vec2(0, 0), 2.0, 1.0};
  CHECK(signed_distance(o, Vec2(3, 4)) == doctest::Approx(3.0));
  CHECK(signed_distance(o, Vec2(2, 0)) == doctest::Approx(0.0));
  CHECK(signed_distance(Obstacle{Vec2(1, 1), 1.0, 1.0}, Vec2(1, 1)) == -1.0);
  CHECK_THROWS_AS((Obstacle{Vec2(0, 0), -1.0, 1.0}).validate(), SchemaError);
}

TEST_CASE("disc-window intersection matches point sampling") {
  Rng rng = make_rng(7);
  for (int k = 0; k < 300; ++k) {
    const Obstacle o{Vec2(uniform(rng, -2, 2), uniform(rng, -2, 2)), uniform(rng, 0.1, 1.0), 1.0};
    const Window w{Vec2(0, 0), 1.0};
    bool sampled = false;
    for (int i = 0; i < 100 && !sampled; ++i)
      for (int j = 0; j < 100 && !sampled; ++j) {
        const double r = o.radius * i / 99.0, a = 2 * std::numbers::pi * j / 100.0;
        const Vec2 p = o.center + r * Vec2(std::cos(a), std::sin(a));
        sampled = std::abs(p.x()) <= 1.0 && std::abs(p.y()) <= 1.0;
      }
    // sampling can only miss slivers thinner than its spacing
    if (sampled) CHECK(disc_intersects_window(o, w));
    const double dx = std::max(0.0, std::abs(o.center.x()) - 1.0), dy = std::max(0.0, std::abs(o.center.y()) - 1.0);
    CHECK(disc_intersects_window(o, w) == (std::hypot(dx, dy) <= o.radius));
  }
  CHECK(disc_intersects_window(Obstacle{Vec2(2.0, 0.0), 1.0, 1.0}, Window{Vec2(0, 0), 1.0}));  // touching
}

TEST_CASE("sensing and active set") {
  Workspace ws;
  ws.side_length = 10;
  CHECK(sense(ws, Vec2(5, 5), 1.0).constraint_count() == 0);
  ws.obstacles = {{Vec2(5.5, 5.0), 0.2, 1.0}, {Vec2(9.0, 9.0), 0.3, 1.0}, {Vec2(6.0, 6.0), 0.5, 1.0}};
  const EnvironmentContext ctx = sense(ws, Vec2(5, 5), 1.0);
  CHECK(ctx.constraint_count() == 2);
  CHECK(ctx.find(1) == nullptr);
  REQUIRE(ctx.find(2) != nullptr);
  const auto act = active_set(Vec2(5, 5), ctx, 0.5);
  std::vector<int> ref;
  for (const auto& io : ctx.obstacles)
    if ((Vec2(5, 5) - io.obstacle.center).norm() - io.obstacle.radius <= 0.5) ref.push_back(io.index);
  CHECK(act == ref);
  CHECK(active_set(Vec2(5, 5), ctx, 100.0).size() == 2);
}

TEST_CASE("grid distance transform against brute force") {
  OccupancyGrid single(8, 8);
  single.set(0, 0, true);
  CHECK(grid_to_sdf(single).at(3, 4) == doctest::Approx(5.0));
  const SdfField free = grid_to_sdf(OccupancyGrid(5, 5));
  CHECK(free.degenerate);
  CHECK(std::all_of(free.values.begin(), free.values.end(), [&](double v) { return v == free.values[0] && v > 0; }));

  Rng rng = make_rng(8);
  OccupancyGrid g(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) g.set(x, y, uniform01(rng) < 0.2);
  const SdfField f = grid_to_sdf(g);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      double best = 1e9;
      for (int v = 0; v < 32; ++v)
        for (int u = 0; u < 32; ++u)
          if (g.occupied(u, v) != g.occupied(x, y)) best = std::min(best, std::hypot(u - x, v - y));
      CHECK(f.at(x, y) == (g.occupied(x, y) ? -best : best));
    }
}

TEST_CASE("circle extraction") {
  OccupancyGrid g(20, 20);
  const SdfField e = grid_to_sdf(g);
  CHECK(extract_circles(g, e, CellWindow{0, 0, 19, 19}).empty());
  g.set(5, 5, true);
  const auto one = extract_circles(g, grid_to_sdf(g), CellWindow{0, 0, 19, 19});
  REQUIRE(one.size() == 1);
  CHECK(one[0].obstacle.radius == doctest::Approx(1.0));
  CHECK((one[0].obstacle.center - g.cell_center(5, 5)).norm() < 1e-12);

  OccupancyGrid wall(20, 20);
  for (int x = 3; x < 13; ++x) wall.set(x, 8, true);
  const auto discs = extract_circles(wall, grid_to_sdf(wall), CellWindow{0, 0, 19, 19});
  for (int x = 3; x < 13; ++x) {
    const Vec2 c = wall.cell_center(x, 8);
    bool covered = false;
    for (const auto& d : discs) covered = covered || (c - d.obstacle.center).norm() <= d.obstacle.radius + 1.0;
    CHECK(covered);
  }
}

TEST_CASE("grid text round trips") {
  OccupancyGrid g(6, 3);
  g.set(1, 0, true);
  g.set(4, 2, true);
  std::stringstream a;
  write_ascii_grid(a, g);
  const OccupancyGrid ga = read_ascii_grid(a);
  CHECK(ga.cells == g.cells);
  std::stringstream p;
  write_pgm(p, g);
  CHECK(p.str().rfind("P2", 0) == 0);
  const OccupancyGrid gp = read_pgm(p, 0.5);
  CHECK(gp.cells == g.cells);
  CHECK(gp.cell_size == 0.5);
}

TEST_CASE("coverage tracker") {
  const double L = 10.0;
  CoverageTracker one(L, 0.125);
  one.add_window(Window{Vec2(5, 5), 1.0});
  CHECK(mapping_ratio(one, L) == doctest::Approx(4.0 / 100.0).epsilon(1e-9));

  CoverageTracker all(L, 0.125);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) all.add_window(Window{Vec2(1 + 2 * i, 1 + 2 * j), 1.0});
  CHECK(mapping_ratio(all, L) == doctest::Approx(1.0));

  CoverageTracker two(L, 0.25);
  two.add_window(Window{Vec2(2, 2), 1.0});
  two.add_window(Window{Vec2(9.5, 9.5), 1.0});  // clipped to a 1.5 x 1.5 corner
  CHECK(mapping_ratio(two, L) == doctest::Approx((4.0 + 2.25) / 100.0).epsilon(1e-9));
}

TEST_CASE("stage tiling and exits") {
  const StageManager sm(10.0, StageOptions{4.0, 4.0, 0.25});
  for (double x = 0.0; x <= 10.0; x += 0.25)
    for (double y = 0.0; y <= 10.0; y += 0.25) CHECK(!sm.containing(Vec2(x, y)).empty());
  for (const Rect& r : sm.stages()) {
    CHECK(r.lo.minCoeff() >= -1e-12);
    CHECK(r.hi.maxCoeff() <= 10.0 + 1e-12);
  }
  StageManager outside(10.0);
  CHECK_THROWS_AS(outside.activate(Vec2(12.0, 5.0), Vec2(1, 1)), OutOfBoundsError);

  Workspace ws;
  ws.side_length = 10.0;
  ws.goal = Vec2(9.5, 2.0);
  StageManager s2(10.0, StageOptions{4.0, 4.0, 0.25});
  s2.activate(Vec2(1.0, 2.0), ws.goal);
  const Rect r = s2.active_rect();
  const ExitChoice e = stage_exit_goal(s2, ws, Vec2(1.0, 2.0));
  CHECK(!e.terminal);
  CHECK(e.opening.edge == Edge::East);
  CHECK(e.goal.x() == doctest::Approx(r.hi.x()));

  ws.goal = Vec2(1.5, 1.5);
  s2.activate(Vec2(1.0, 2.0), ws.goal);
  const ExitChoice t = stage_exit_goal(s2, ws, Vec2(1.0, 2.0));
  CHECK(t.terminal);
  CHECK(t.goal == ws.goal);
}

TEST_CASE("blocked half edge: exit at the free sub-segment midpoint") {
  Workspace ws;
  ws.side_length = 12.0;
  ws.goal = Vec2(11.0, 2.0);
  StageManager sm(12.0, StageOptions{4.0, 4.0, 0.0});
  sm.activate(Vec2(1.0, 2.0), ws.goal);
  const Rect r = sm.active_rect();
  ws.obstacles.push_back({Vec2(r.hi.x() + 0.5, r.lo.y()), 2.0, 1.0});
  ExitOptions opt;
  const ExitChoice e = stage_exit_goal(sm, ws, Vec2(1.0, 2.0), opt);
  // brute-force sweep of the east edge
  double first = -1, last = -1;
  for (int i = 0; i < 1000; ++i) {
    const double y = r.lo.y() + (r.hi.y() - r.lo.y()) * i / 999.0;
    if (signed_distance(ws.obstacles[0], Vec2(r.hi.x(), y)) > opt.inflate) {
      if (first < 0) first = y;
      last = y;
    }
  }
  CHECK(e.opening.edge == Edge::East);
  CHECK(e.goal.y() == doctest::Approx(0.5 * (first + last)).epsilon(1e-2));
}

TEST_CASE("exit memory is a max-raising table keyed by midpoint") {
  ExitMemory m(2.0);
  const Vec2 a(1, 1), goal(4, 5);
  CHECK(m.value(a, goal) == doctest::Approx(5.0));
  m.raise(a, 9.0);
  CHECK(m.value(a, goal) == 9.0);
  m.raise(a, 3.0);
  CHECK(m.value(a, goal) == 9.0);
  CHECK(m.value(a + Vec2(1e-3, 0), goal) == doctest::Approx((a + Vec2(1e-3, 0) - goal).norm()));
  CHECK(m.size() == 1);
  CHECK(m.radius() == 2.0);
}

TEST_CASE("generated families are reproducible and valid") {
  for (const char* fam : {"train", "test_id", "test_ood", "bottleneck"}) {
    const Workspace a = generate_family(fam, 42), b = generate_family(fam, 42);
    CHECK_NOTHROW(a.validate());
    REQUIRE(a.obstacles.size() == b.obstacles.size());
    for (std::size_t i = 0; i < a.obstacles.size(); ++i) CHECK(a.obstacles[i].center == b.obstacles[i].center);
  }
  const Workspace d = generate_family("dungeon", 3);
  CHECK(d.has_grid());
  CHECK(d.grid->count_occupied() > 0);
  CHECK_THROWS_AS(generate_family("nope", 0), ConfigError);
}

TEST_CASE("ood split shifts the gap statistics") {
  double id = 0.0, ood = 0.0;
  for (int s = 0; s < 8; ++s) {
    id += mean_gap_width(generate_family("test_id", s));
    ood += mean_gap_width(generate_family("test_ood", s));
  }
  const FamilyParams pi = family_params("test_id"), po = family_params("test_ood");
  CHECK(id / 8 >= pi.min_gap);
  CHECK(ood / 8 >= po.min_gap);
  CHECK(std::abs(id - ood) > 1e-3);
}
