#pragma once

#include "grlsnam/navigator.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace grlsnam {

/// Clearance (m) of every cell centre of a planning raster over [0, L]^2.
/// Values are capped at `cap`.
struct ClearanceGrid {
  int nx = 0, ny = 0;
  double resolution = 1.0;
  std::vector<double> clearance;

  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * nx + x; }
  Vec2 center(int x, int y) const { return {(x + 0.5) * resolution, (y + 0.5) * resolution}; }
  std::pair<int, int> cell_of(const Vec2& p) const;
};

ClearanceGrid clearance_grid(const Workspace& ws, double resolution, double cap);

struct GridPlan {
  std::vector<std::pair<int, int>> cells;
  std::vector<Vec2> waypoints;  // cell centres
  double length = 0.0;          // polyline length of the cell centres (L_ref)
  double cost = 0.0;            // accumulated edge cost
  long expansions = 0;
  bool feasible = false;
};

/// Generic 8-connected A* with unit/sqrt(2) step lengths. `step_cost` maps
/// (geometric length, clearance of the destination cell) to an edge cost;
/// +inf blocks the edge. Diagonal moves require both orthogonal
/// neighbours to be passable (no corner cutting).
GridPlan grid_astar(const ClearanceGrid& grid, std::pair<int, int> start, std::pair<int, int> goal,
                    const std::function<bool(double)>& passable,
                    const std::function<double(double, double)>& step_cost);

/// Shortest path for a rigid disc: cells with clearance >= inflation.
GridPlan astar_rigid(const Workspace& ws, double resolution, double inflation_radius);

/// Edge cost = length (1 + gain max(0, r_rest - clr) / (clr - r_min)) for
/// clr > r_min, blocked otherwise.
GridPlan astar_deformable(const Workspace& ws, double resolution, double r_min, double r_rest,
                          double penalty_gain);

struct PfGains {
  double k_att = 1.0;
  double k_rep = 0.5;
  double d_hat = 1.0;
  double v_max = 1.0;
  double body_radius = 0.0;
};

/// Attractive pull toward the stage goal plus repulsion away from every
/// sensed obstacle closer than d_hat; the result is clamped to v_max.
Vec2 pf_step(const Vec2& position, const EnvironmentContext& ctx, const Vec2& stage_goal,
             const PfGains& gains);

struct DwaConfig {
  int n_v = 7;             // candidates per axis
  double v_max = 1.0;
  double a_max = 3.0;      // dynamic window half-width = a_max * dt_window
  double dt_window = 0.3;
  int horizon = 10;        // simulated steps
  double dt = 0.03;
  double w_progress = 1.0;
  double w_clearance = 0.3;
  double w_speed = 0.1;
  double clearance_cap = 1.0;
  double body_radius = 0.0;
  bool has_stage = false;  // reject candidates whose rollout leaves the stage
  Rect stage;
  double stage_slack = 0.3;  // exits lie on the boundary; allow this overshoot
};

struct DwaState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

struct DwaResult {
  Vec2 command = Vec2::Zero();
  double score = 0.0;
  int index = -1;
  bool blocked = false;
};

/// Candidate velocities on an n_v x n_v grid around the current velocity.
std::vector<Vec2> dwa_candidates(const DwaState& state, const DwaConfig& cfg);

/// Score of one candidate, or -inf when its rollout collides or leaves the stage.
double dwa_score(const DwaState& state, const Vec2& v, const EnvironmentContext& ctx,
                 const Vec2& stage_goal, const DwaConfig& cfg);

DwaResult dwa_step(const DwaState& state, const EnvironmentContext& ctx, const Vec2& stage_goal,
                   const DwaConfig& cfg);

enum class Baseline { PotentialField, Dwa };

/// Kinematic baseline episode under the navigator's stagewise sensing. The
/// ring scale follows the clearance target so the body matches GRL-SNAM.
EpisodeResult run_baseline_episode(const Workspace& ws, const EpisodeConfig& cfg, Baseline kind,
                                   const PfGains& pf, const DwaConfig& dwa, std::uint64_t seed = 0,
                                   const SensingPerturbation* perturb = nullptr);

}  // namespace grlsnam
