#include "grlsnam/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

namespace grlsnam {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::pair<int, int> ClearanceGrid::cell_of(const Vec2& p) const {
  const int x = std::clamp(static_cast<int>(std::floor(p.x() / resolution)), 0, nx - 1);
  const int y = std::clamp(static_cast<int>(std::floor(p.y() / resolution)), 0, ny - 1);
  return {x, y};
}

ClearanceGrid clearance_grid(const Workspace& ws, double resolution, double cap) {
  if (!(resolution > 0.0)) throw ConfigError("planner resolution must be positive");
  ClearanceGrid g;
  g.resolution = resolution;
  g.nx = g.ny = std::max(1, static_cast<int>(std::ceil(ws.side_length / resolution - 1e-9)));
  g.clearance.resize(static_cast<std::size_t>(g.nx) * g.ny);
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x)
      g.clearance[g.idx(x, y)] = std::min(cap, true_clearance(ws, g.center(x, y), 0.0, cap));
  return g;
}

GridPlan grid_astar(const ClearanceGrid& grid, std::pair<int, int> start, std::pair<int, int> goal,
                    const std::function<bool(double)>& passable,
                    const std::function<double(double, double)>& step_cost) {
  GridPlan plan;
  const auto ok = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < grid.nx && y < grid.ny && passable(grid.clearance[grid.idx(x, y)]);
  };
  if (!ok(start.first, start.second) || !ok(goal.first, goal.second)) return plan;
  const double h = grid.resolution;
  const auto heuristic = [&](int x, int y) {
    const double dx = std::abs(x - goal.first), dy = std::abs(y - goal.second);
    return h * (std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy));
  };
  const std::size_t n = grid.clearance.size();
  std::vector<double> g(n, kInf);
  std::vector<int> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  using Item = std::tuple<double, double, int>;  // f, h, cell
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const int s = static_cast<int>(grid.idx(start.first, start.second));
  const int t = static_cast<int>(grid.idx(goal.first, goal.second));
  g[s] = 0.0;
  open.push({heuristic(start.first, start.second), heuristic(start.first, start.second), s});
  while (!open.empty()) {
    const auto [fv, hv, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = 1;
    ++plan.expansions;
    if (u == t) break;
    const int ux = u % grid.nx, uy = u / grid.nx;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const int vx = ux + dx, vy = uy + dy;
        if (!ok(vx, vy)) continue;
        if (dx && dy && (!ok(ux + dx, uy) || !ok(ux, uy + dy))) continue;
        const int v = static_cast<int>(grid.idx(vx, vy));
        if (closed[v]) continue;
        const double len = (dx && dy) ? h * std::numbers::sqrt2 : h;
        const double c = step_cost(len, grid.clearance[v]);
        if (!std::isfinite(c)) continue;
        const double ng = g[u] + c;
        if (ng < g[v]) {
          g[v] = ng;
          parent[v] = u;
          const double hh = heuristic(vx, vy);
          open.push({ng + hh, hh, v});
        }
      }
  }
  if (!std::isfinite(g[t])) return plan;
  plan.feasible = true;
  plan.cost = g[t];
  for (int c = t; c >= 0; c = parent[c]) plan.cells.push_back({c % grid.nx, c / grid.nx});
  std::reverse(plan.cells.begin(), plan.cells.end());
  for (const auto& [x, y] : plan.cells) plan.waypoints.push_back(grid.center(x, y));
  for (std::size_t k = 1; k < plan.waypoints.size(); ++k)
    plan.length += (plan.waypoints[k] - plan.waypoints[k - 1]).norm();
  return plan;
}

GridPlan astar_rigid(const Workspace& ws, double resolution, double inflation_radius) {
  const auto grid = clearance_grid(ws, resolution, inflation_radius + resolution);
  return grid_astar(
      grid, grid.cell_of(ws.start), grid.cell_of(ws.goal),
      [&](double clr) { return clr >= inflation_radius; }, [](double len, double) { return len; });
}

GridPlan astar_deformable(const Workspace& ws, double resolution, double r_min, double r_rest,
                          double penalty_gain) {
  const auto grid = clearance_grid(ws, resolution, std::max(r_min, r_rest) + resolution);
  return grid_astar(
      grid, grid.cell_of(ws.start), grid.cell_of(ws.goal), [&](double clr) { return clr > r_min; },
      [&](double len, double clr) {
        if (clr <= r_min) return kInf;
        return len * (1.0 + penalty_gain * std::max(0.0, r_rest - clr) / (clr - r_min));
      });
}

Vec2 pf_step(const Vec2& position, const EnvironmentContext& ctx, const Vec2& stage_goal,
             const PfGains& gains) {
  Vec2 v = gains.k_att * (stage_goal - position);
  for (const auto& io : ctx.obstacles) {
    const Vec2 rel = position - io.obstacle.center;
    const double n = rel.norm();
    if (n == 0.0) continue;
    double d = n - io.obstacle.radius - gains.body_radius;
    if (d >= gains.d_hat) continue;
    d = std::max(d, 1e-3);
    v += gains.k_rep * (1.0 / d - 1.0 / gains.d_hat) / (d * d) * rel / n;
  }
  if (v.norm() > gains.v_max) v *= gains.v_max / v.norm();
  return v;
}

std::vector<Vec2> dwa_candidates(const DwaState& state, const DwaConfig& cfg) {
  std::vector<Vec2> out;
  const int n = std::max(2, cfg.n_v);
  const double half = cfg.a_max * cfg.dt_window;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Vec2 v = state.velocity + half * Vec2(2.0 * i / (n - 1) - 1.0, 2.0 * j / (n - 1) - 1.0);
      if (v.norm() > cfg.v_max) v *= cfg.v_max / v.norm();
      out.push_back(v);
    }
  return out;
}

double dwa_score(const DwaState& state, const Vec2& v, const EnvironmentContext& ctx,
                 const Vec2& stage_goal, const DwaConfig& cfg) {
  double clr = cfg.clearance_cap;
  Vec2 p = state.position;
  for (int k = 1; k <= cfg.horizon; ++k) {
    p = state.position + v * (k * cfg.dt);
    for (const auto& io : ctx.obstacles)
      clr = std::min(clr, signed_distance(io.obstacle, p) - cfg.body_radius);
    if (clr < 0.0) return -kInf;
    // exits lie on the stage boundary, so allow a small overshoot
    if (cfg.has_stage && !cfg.stage.contains(p, cfg.stage_slack)) return -kInf;
  }
  const double progress = (state.position - stage_goal).norm() - (p - stage_goal).norm();
  return cfg.w_progress * progress + cfg.w_clearance * std::min(clr, cfg.clearance_cap) +
         cfg.w_speed * v.norm();
}

DwaResult dwa_step(const DwaState& state, const EnvironmentContext& ctx, const Vec2& stage_goal,
                   const DwaConfig& cfg) {
  DwaResult r;
  r.score = -kInf;
  const auto cand = dwa_candidates(state, cfg);
  for (std::size_t k = 0; k < cand.size(); ++k) {
    const double s = dwa_score(state, cand[k], ctx, stage_goal, cfg);
    if (s > r.score) {
      r.score = s;
      r.index = static_cast<int>(k);
      r.command = cand[k];
    }
  }
  if (r.index < 0) {
    r.blocked = true;
    r.command.setZero();
  }
  return r;
}

EpisodeResult run_baseline_episode(const Workspace& ws, const EpisodeConfig& cfg, Baseline kind,
                                   const PfGains& pf, const DwaConfig& dwa, std::uint64_t seed,
                                   const SensingPerturbation* perturb) {
  cfg.validate();
  Rng rng = make_rng(seed, 0xba5e);
  const bool is_ring = cfg.agent.kind == AgentKind::Ring;
  std::optional<RingModel> model;
  if (is_ring) model.emplace(cfg.agent.ring);
  const double body_nominal = agent_body_radius(cfg.agent);
  const double body_ctrl = is_ring ? model->r_eff : cfg.agent.point_radius;

  EpisodeResult res;
  res.method = kind == Baseline::PotentialField ? "pf" : "dwa";
  res.layout = is_ring ? StateLayout{2, 2} : StateLayout{0, 0};
  res.side_length = ws.side_length;
  res.body_radius = body_nominal;
  res.goal = ws.goal;
  const int f = res.layout.frame();
  const int si = res.layout.scale_index();

  StageManager stages(ws.side_length, cfg.stages);
  const double cov_res = cfg.coverage_resolution > 0.0 ? cfg.coverage_resolution : cfg.d_hat / 8.0;
  CoverageTracker tracker(ws.side_length, cov_res);

  Vec2 c = ws.start, vel = Vec2::Zero();
  double s = 1.0;
  std::map<int, Obstacle> memory;
  EnvironmentContext nav;
  Vec2 exit_goal = ws.goal, local_goal = ws.goal;
  bool terminal = !cfg.use_stages;

  auto record = [&](double t) {
    StepRecord r;
    r.t = t;
    r.q = VecX::Zero(res.layout.dim());
    r.p = VecX::Zero(res.layout.dim());
    r.q.segment<2>(f) = c;
    r.p.segment<2>(f) = cfg.agent.M_c * vel;
    if (si >= 0) r.q[si] = s;
    r.H = 0.5 * cfg.agent.M_c * vel.squaredNorm();
    r.obs.dist = (c - ws.goal).norm();
    r.obs.speed = vel.norm();
    double clr = cfg.d_hat;
    for (const auto& io : nav.obstacles)
      clr = std::min(clr, signed_distance(io.obstacle, c) - body_ctrl * s);
    r.obs.clr = clr;
    r.stage_goal = local_goal;
    r.true_clearance = true_clearance(ws, c, body_nominal * s, cfg.d_hat + 4.0);
    r.stage = cfg.use_stages ? stages.active() : -1;
    res.steps.push_back(std::move(r));
  };
  auto finish = [&](Termination cause) {
    res.cause = cause;
    res.windows = tracker.windows();
    res.mapping_ratio = mapping_ratio(tracker, ws.side_length);
    return res;
  };
  ExitMemory exit_memory(cfg.exits.search_radius);
  auto refresh_exit = [&](const Vec2* reached) {
    const ExitChoice ch = cfg.exits.search
                              ? search_exit_goal(stages, ws, c, cfg.exits, exit_memory, reached)
                              : stage_exit_goal(stages, ws, c, cfg.exits);
    exit_goal = ch.goal;
    terminal = ch.terminal;
    stages.set_exit_goal(exit_goal);
  };

  if (cfg.use_stages) {
    stages.activate(c, ws.goal);
    try {
      refresh_exit(nullptr);
    } catch (const DeadEndError&) {
      record(0.0);
      return finish(Termination::DeadEnd);
    }
  }
  local_goal = exit_goal;
  record(0.0);
  if (res.steps.back().true_clearance < 0.0) return finish(Termination::Collision);
  if ((c - ws.goal).norm() < cfg.eps_goal) return finish(Termination::Success);

  for (int n = 0; n < cfg.N_max; ++n) {
    bool need_sense = n % cfg.T_y == 0;
    if (cfg.use_stages) {
      const bool reached = !terminal && (c - exit_goal).norm() < cfg.eps_stage;
      const bool left = !stages.active_rect().contains(c);
      if (!reached && left && !terminal && stages.hand_over(c)) {
        need_sense = true;
      } else if (reached || left) {
        try {
          if (!cfg.exits.search) stages.activate(c, ws.goal, reached ? stages.active() : -1);
          const Vec2 done = exit_goal;
          refresh_exit(reached ? &done : nullptr);
        } catch (const DeadEndError&) {
          return finish(Termination::DeadEnd);
        } catch (const OutOfBoundsError&) {
          return finish(Termination::Collision);
        }
        need_sense = true;
      }
    }
    if (need_sense) {
      EnvironmentContext ctx;
      try {
        ctx = sense(ws, c, cfg.sense_half_extent, cfg.use_stages ? &stages : nullptr, &tracker, cfg.sense);
      } catch (const OutOfBoundsError&) {
        return finish(Termination::Collision);
      }
      if (perturb) perturb->apply(ctx, rng);
      for (const auto& io : ctx.obstacles) memory[io.index] = io.obstacle;
      nav.obstacles.clear();
      for (const auto& [i, o] : memory) nav.obstacles.push_back({i, o});
      nav.window = ctx.window;
      local_goal = exit_goal;
      if (cfg.waypoints) {
        const Rect area = cfg.use_stages ? stages.active_rect()
                                         : Rect{Vec2::Zero(), Vec2::Constant(ws.side_length)};
        local_goal = stage_waypoint(area, ws, c, terminal ? ws.goal : exit_goal, cfg.waypoint_inflate,
                                    cfg.waypoint_resolution);
      }
      nav.stage_goal = local_goal;
    }
    if (is_ring) {
      double d_min = kInf;
      for (const auto& io : nav.obstacles)
        d_min = std::min(d_min, signed_distance(io.obstacle, c) - body_ctrl * s);
      s = scale_target(std::isfinite(d_min) ? d_min : 1e9, cfg.agent.ring.s0, cfg.agent.ring.delta);
    }
    const double body = body_ctrl * s;
    if (kind == Baseline::PotentialField) {
      PfGains g = pf;
      g.body_radius = body;
      vel = pf_step(c, nav, local_goal, g);
    } else {
      DwaConfig d = dwa;
      d.body_radius = body;
      d.dt = cfg.tau;
      if (cfg.use_stages) {
        d.has_stage = true;
        d.stage = stages.active_rect();
        d.stage_slack = cfg.eps_stage;
      }
      DwaState st{c, vel};
      if (perturb) st.velocity = perturb->velocity(vel, rng);
      vel = dwa_step(st, nav, local_goal, d).command;
    }
    c += cfg.tau * vel;
    if (!ws.inside(c)) return finish(Termination::Collision);
    record((n + 1) * cfg.tau);
    if (res.steps.back().true_clearance < 0.0) return finish(Termination::Collision);
    if ((c - ws.goal).norm() < cfg.eps_goal) return finish(Termination::Success);
    const int N = static_cast<int>(res.steps.size()) - 1;
    if (N >= cfg.stuck_window &&
        (c - res.position(static_cast<std::size_t>(N - cfg.stuck_window))).norm() < cfg.eps_stuck)
      return finish(Termination::Stuck);
  }
  return finish(Termination::Timeout);
}

}  // namespace grlsnam
