#pragma once

#include "grlsnam/workspace.hpp"

#include <vector>

namespace grlsnam {

struct Rect {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();

  bool contains(const Vec2& p, double tol = 1e-9) const {
    return p.x() >= lo.x() - tol && p.y() >= lo.y() - tol && p.x() <= hi.x() + tol &&
           p.y() <= hi.y() + tol;
  }
  Vec2 center() const { return 0.5 * (lo + hi); }
};

struct StageOptions {
  double width = 2.6;
  double height = 2.0;
  double overlap = 0.3;
};

/// Tiling of [0, L]^2 into overlapping rectangles. The last row/column is
/// shifted inward so every stage lies inside the workspace.
class StageManager {
 public:
  void set_active(int index) { active_ = index; }
  StageManager(double side_length, const StageOptions& options = {});

  const std::vector<Rect>& stages() const { return stages_; }
  double side_length() const { return side_length_; }
  int active() const { return active_; }
  const Rect& active_rect() const { return stages_[static_cast<std::size_t>(active_)]; }
  const Vec2& exit_goal() const { return exit_goal_; }
  void set_exit_goal(const Vec2& g) { exit_goal_ = g; }

  std::vector<int> containing(const Vec2& p) const;

  /// Makes the stage that contains `position` and whose centre is closest to
  /// `goal` active. `exclude` is skipped unless it is the only candidate.
  /// Throws OutOfBoundsError when no stage contains the position.
  int activate(const Vec2& position, const Vec2& goal, int exclude = -1);

  /// After drifting out of the active stage short of its exit: switch to a
  /// stage that contains both the position and the current exit goal, so
  /// the goal stays valid. Returns false when there is none.
  bool hand_over(const Vec2& position);

 private:
  double side_length_;
  std::vector<Rect> stages_;
  int active_ = 0;
  Vec2 exit_goal_ = Vec2::Zero();
};

enum class Edge { West = 0, East = 1, South = 2, North = 3 };

struct ExitOptions {
  double inflate = 0.2;        // obstacle inflation defining the free tube
  double min_opening = 0.0;    // openings narrower than this are ignored
  int samples_per_edge = 1000;
  bool require_reachable = false;
  double raster_resolution = 0.05;
  bool search = false;        // real-time search over openings (mazes)
  double search_radius = 4.0;  // node matching radius of the search memory
};

/// A maximal run of free boundary samples on one stage edge.
struct Opening {
  Edge edge = Edge::West;
  Vec2 first = Vec2::Zero();
  Vec2 last = Vec2::Zero();
  Vec2 midpoint = Vec2::Zero();
  double width = 0.0;
  bool reachable = true;
};

/// Free intervals on every stage edge that is not part of the workspace
/// boundary. A sample is free when its clearance exceeds `inflate`.
std::vector<Opening> stage_openings(const Rect& stage, const Workspace& ws,
                                    const ExitOptions& options, const Vec2* from = nullptr);

struct ExitChoice {
  Vec2 goal = Vec2::Zero();
  bool terminal = false;  // global goal lies in the stage
  Opening opening;
  int stage = -1;
};

/// Learned cost-to-go of stage openings, keyed by midpoint, for real-time
/// search in mazes. Unvisited openings default to the straight-line
/// distance to the goal.
class ExitMemory {
 public:
  explicit ExitMemory(double radius = 1.0) : radius_(radius) {}
  double value(const Vec2& midpoint, const Vec2& goal) const;
  /// h <- max(h, value) for the opening at `midpoint`.
  void raise(const Vec2& midpoint, double value);
  std::size_t size() const { return nodes_.size(); }
  /// Openings closer than this to the agent are not candidates.
  double radius() const { return radius_; }

 private:
  static constexpr double kMatch = 1e-6;
  struct Node {
    Vec2 point;
    double h;
  };
  double radius_;
  std::vector<Node> nodes_;
};

/// Local goal for the active stage. Returns the global goal when it lies in
/// the stage. Otherwise openings are ranked in tiers: the edge crossed by the
/// straight segment toward the goal, then edges facing the goal, then the
/// rest; inside the first non-empty tier the widest opening wins and ties go
/// to the midpoint closest to the goal. Throws DeadEndError when the stage
/// has no usable opening.
ExitChoice stage_exit_goal(const StageManager& stages, const Workspace& ws,
                           const Vec2& position, const ExitOptions& options = {});

/// Real-time search variant for mazes (LRTA*-style): over every stage
/// containing the position, picks the reachable opening (or the goal)
/// minimising in-stage raster distance plus learned cost-to-go, raises the
/// value of the just-reached opening to that minimum and activates the
/// chosen stage. Openings within the memory radius of the position are
/// skipped. Throws DeadEndError when nothing is reachable.
ExitChoice search_exit_goal(StageManager& stages, const Workspace& ws, const Vec2& position,
                            const ExitOptions& options, ExitMemory& memory,
                            const Vec2* reached = nullptr);

/// Next line-of-sight waypoint on the shortest in-stage raster path from
/// `position` to `target` (cells closer than `inflate` to walls are blocked).
/// Returns `target` when it is directly visible or unreachable.
Vec2 stage_waypoint(const Rect& stage, const Workspace& ws, const Vec2& position,
                    const Vec2& target, double inflate, double resolution);

}  // namespace grlsnam
