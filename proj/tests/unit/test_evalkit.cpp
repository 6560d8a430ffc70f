#include "doctest.h"
#include "grlsnam/artifacts.hpp"
#include "grlsnam/config.hpp"
#include "grlsnam/generate.hpp"

#include <cmath>
#include <numbers>
#include <regex>
#include <sstream>

using namespace grlsnam;

TEST_CASE("SPL") {
  CHECK(spl(true, 10.0, 10.0) == 1.0);
  CHECK(spl(false, 10.0, 10.0) == 0.0);
  CHECK(spl(true, 15.0, 10.0) == doctest::Approx(2.0 / 3.0));
  CHECK(spl(true, 9.0, 10.0) == 1.0);
}

TEST_CASE("smoothness") {
  CHECK(smoothness({}) == 0.0);
  CHECK(smoothness({Vec2(0, 0), Vec2(0, 0)}) == 0.0);
  CHECK(smoothness({Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)}) == 0.0);
  // turns of +90 and -45 degrees over two heading changes
  const std::vector<Vec2> zig{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(2, 2)};
  CHECK(smoothness(zig) == doctest::Approx((std::numbers::pi / 2 + std::numbers::pi / 4) / 2));
}

TEST_CASE("aggregation") {
  EpisodeMetrics a, b;
  a.success = true;
  a.spl = 1.0;
  a.detour = 1.1;
  b.success = false;
  b.spl = 0.0;
  const Aggregate one = aggregate("m", {a});
  CHECK(one.all.at("spl").mean == 1.0);
  CHECK(one.all.at("detour").mean == 1.1);
  const Aggregate two = aggregate("m", {a, b});
  CHECK(two.success_rate == 0.5);
  CHECK(two.all.at("spl").mean == 0.5);
  CHECK(two.success_only.at("spl").mean == 1.0);

  const Stats s = summarize({3, 1, 2, 10});
  CHECK(s.mean == 4.0);
  CHECK(s.median == 2.5);
  CHECK(s.min == 1.0);
  CHECK(s.max == 10.0);
  CHECK(s.count == 4);
}

TEST_CASE("perturbations") {
  const PerturbationModel zero(PerturbationSpec{});
  EnvironmentContext ctx;
  ctx.obstacles.push_back({0, Obstacle{Vec2(1, 2), 0.5, 1.0}});
  EnvironmentContext copy = ctx;
  Rng rng = make_rng(1);
  zero.apply(copy, rng);
  CHECK(copy.obstacles[0].obstacle.center == ctx.obstacles[0].obstacle.center);
  CHECK(zero.velocity(Vec2(1, 2), rng) == Vec2(1, 2));

  PerturbationSpec drop;
  drop.p_drop = 1.0;
  PerturbationModel(drop).apply(copy, rng);
  CHECK(copy.obstacles.empty());

  CHECK(perturbation_level("nominal").is_zero());
  const PerturbationSpec mild = perturbation_level("mild"), severe = perturbation_level("severe");
  CHECK(mild.sigma_pos < severe.sigma_pos);
  CHECK(mild.damping_scale > severe.damping_scale);
  CHECK_THROWS_AS(perturbation_level("extreme"), ConfigError);
}

TEST_CASE("episode metrics for planners") {
  const RunConfig cfg = preset_config("test_id");
  const EvalSettings st = eval_settings(cfg, nullptr);
  const Workspace ws = generate_family("test_id", 2);
  const EpisodeMetrics m = evaluate(Method::AstarRigid, ws, st, 0);
  CHECK(m.l_ref > 0.0);
  CHECK(m.mapping_ratio == 1.0);
  std::ostringstream md;
  write_markdown_table(md, {aggregate("astar_rigid", {m})});
  const std::string table = md.str();
  CHECK(table.find("astar_rigid") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);  // header, rule, one row
}

TEST_CASE("config round trips and rejects unknown keys") {
  RunConfig c = preset_config("dungeon");
  c.seed = 99;
  c.episode.adapt.eps = 0.5;
  const RunConfig j = config_from_json(config_to_json(c));
  CHECK(config_to_json(j) == config_to_json(c));
  const RunConfig t = config_from_toml(config_to_toml(c));
  CHECK(config_to_json(t) == config_to_json(c));
  CHECK_THROWS_AS(config_from_toml("no_such_key = 3\n"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"episode\": {\"tau\": -1}}"), ConfigError);
  const RunConfig dotted = config_from_toml("adapt.eps = 1e-3\n", preset_config("test_id"));
  CHECK(dotted.episode.adapt.eps == 1e-3);
}

TEST_CASE("workspace JSON round trip") {
  const Workspace ws = generate_family("test_ood", 4);
  const Workspace back = workspace_from_json(workspace_to_json(ws));
  CHECK(back.side_length == ws.side_length);
  REQUIRE(back.obstacles.size() == ws.obstacles.size());
  CHECK(back.obstacles[3].center == ws.obstacles[3].center);
  CHECK(back.goal == ws.goal);
  CHECK_THROWS_AS(workspace_from_json("{\"L\": 5}"), SchemaError);
}

TEST_CASE("step CSV is deterministic and round trips") {
  const RunConfig cfg = preset_config("bottleneck");
  const auto meta = make_meta(cfg);
  const Workspace ws = generate_family("bottleneck", 1);
  const EpisodeResult r1 = run_episode(ws, cfg.episode, *meta, 1);
  const EpisodeResult r2 = run_episode(ws, cfg.episode, *meta, 1);
  std::ostringstream a, b;
  write_step_csv(a, r1);
  write_step_csv(b, r2);
  CHECK(a.str() == b.str());
  std::istringstream in(a.str());
  const StepTable t = read_step_csv(in);
  CHECK(t.rows.size() == r1.steps.size());
  for (const char* col : {"t", "H", "clr", "beta", "mu", "true_clr", "stage"}) CHECK(t.has(col));
  CHECK_THROWS_AS(t.column("nope"), SchemaError);
  const auto path = table_path(t);
  CHECK((path.back() - r1.position(r1.steps.size() - 1)).norm() < 1e-6);
}

TEST_CASE("SVG coordinates follow the view transform") {
  Workspace ws;
  ws.side_length = 10.0;
  const std::vector<Vec2> path{Vec2(1, 2), Vec2(3, 4), Vec2(9, 1)};
  std::ostringstream out;
  write_map_svg(out, ws, path, {}, {}, 500.0);
  const std::string svg = out.str();
  const ViewTransform vt{10.0, 500.0, 20.0};
  const std::regex poly("<polyline[^>]*points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, poly));
  std::istringstream pts(m[1].str());
  for (const Vec2& p : path) {
    double x, y;
    char comma;
    pts >> x >> comma >> y;
    const Vec2 e = vt.map(p);
    CHECK(x == doctest::Approx(e.x()).epsilon(1e-3));
    CHECK(y == doctest::Approx(e.y()).epsilon(1e-3));
  }
  std::ostringstream empty;
  write_map_svg(empty, ws, {}, {});
  CHECK(empty.str().find("<svg") != std::string::npos);
  CHECK(empty.str().find("<polyline") == std::string::npos);
}
