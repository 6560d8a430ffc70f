#pragma once

#include "grlsnam/workspace.hpp"

#include <string>

namespace grlsnam {

/// Circular-obstacle scene family. Splits differ in density and in the
/// minimum surface gap between obstacles.
struct FamilyParams {
  double L = 16.0;
  int n_min = 28;
  int n_max = 36;
  double r_min = 0.3;
  double r_max = 0.7;
  double min_gap = 0.9;              // surface gap between any two obstacles
  double endpoint_clearance = 1.0;   // start/goal to obstacle surfaces
  double start_goal_min_dist = 10.0;
  double margin = 0.8;               // start/goal distance to the workspace edge
  double feasibility_inflation = 0.2;  // deformable body radius at minimum scale
  double feasibility_resolution = 0.1;
  int max_attempts = 200;
};

FamilyParams family_params(const std::string& family);  // train, test_id, test_ood

/// Rejection sampling until start/goal are free and an inflated-grid A*
/// path exists. Throws GenerationError after max_attempts layouts.
Workspace generate_workspace(const FamilyParams& params, std::uint64_t seed,
                             const std::string& family = "custom");

/// A wall of overlapping discs across x = L/2 with one gap of half-width g.
struct BottleneckParams {
  double L = 6.0;
  double half_gap_lo = 0.22;
  double half_gap_hi = 0.38;
  double disc_radius = 0.3;
  double disc_spacing = 0.3;
};

Workspace generate_bottleneck(const BottleneckParams& params, std::uint64_t seed);

/// Recursive-division rooms with doors on an occupancy grid.
struct DungeonParams {
  int size = 128;
  int wall = 2;
  int min_room = 18;
  int door = 8;
  double cell_size = 1.0;
  double start_goal_min_dist = 60.0;
  int max_attempts = 50;
};

Workspace generate_dungeon(const DungeonParams& params, std::uint64_t seed);

/// Dispatches on train | test_id | test_ood | dungeon | bottleneck.
Workspace generate_family(const std::string& family, std::uint64_t seed);

/// Mean over obstacles of the surface gap to the nearest other obstacle.
double mean_gap_width(const Workspace& ws);

}  // namespace grlsnam
