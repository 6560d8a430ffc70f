#pragma once

#include "grlsnam/evalkit.hpp"
#include "grlsnam/learning.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace grlsnam {

/// {"L", "obstacles": [{"c", "r", "w"}], "start", "goal", "seed"} plus
/// optional "family", "grid" (PGM path relative to the JSON file) and
/// "cell_size".
std::string workspace_to_json(const Workspace& ws, const std::string& grid_file = "");
Workspace workspace_from_json(const std::string& text, const std::string& base_dir = ".");

/// Grid workspaces also write <stem>.pgm next to the JSON file.
void save_workspace(const std::string& path, const Workspace& ws);
Workspace load_workspace(const std::string& path);

/// One training sample per file; the reference rollout is stored and
/// re-checked against a fresh rollout on load (SchemaError on mismatch).
std::string datum_to_json(const SceneDatum& d);
SceneDatum datum_from_json(const std::string& text);
std::vector<SceneDatum> load_dataset(const std::string& dir);

/// Per-step log. Columns: t, q0.., p0.., H, clr, dist, speed, E_sensor,
/// E_goal, E_obj, E_barrier_total, beta, lambda, alpha_sum, active_count,
/// mu, u_fx, u_fy, true_clr, stage.
void write_step_csv(std::ostream& out, const EpisodeResult& result);

struct StepTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  bool has(const std::string& name) const;
  /// Throws SchemaError when the column is missing.
  std::vector<double> column(const std::string& name) const;
};

StepTable read_step_csv(std::istream& in);

/// Frame positions (x, y) of each row, from the q columns named by the
/// "frame" index (q0/q1 for point agents, q2/q3 for the ring).
std::vector<Vec2> table_path(const StepTable& table);

std::string summary_json(const EpisodeResult& result, const EpisodeMetrics& metrics);

/// World to SVG: x' = margin + s x, y' = margin + s (L - y), s = size / L.
struct ViewTransform {
  double L = 1.0;
  double size = 600.0;
  double margin = 20.0;

  double scale() const { return size / L; }
  Vec2 map(const Vec2& p) const { return {margin + scale() * p.x(), margin + scale() * (L - p.y())}; }
};

/// Workspace, visited windows, trajectory polyline and ring snapshots.
void write_map_svg(std::ostream& out, const Workspace& ws, const std::vector<Vec2>& path,
                   const std::vector<Window>& windows,
                   const std::vector<std::vector<Vec2>>& snapshots = {}, double size = 600.0);

/// One polyline per weight column present (beta, lambda, alpha_sum, mu).
void write_timeseries_svg(std::ostream& out, const StepTable& table);

}  // namespace grlsnam
