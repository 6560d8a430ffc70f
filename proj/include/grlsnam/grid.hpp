#pragma once

#include "grlsnam/workspace.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace grlsnam {

/// Per-cell signed distance in cell units: free cells hold the distance to the
/// nearest occupied cell centre, occupied cells the negated distance to the
/// nearest free cell centre.
struct SdfField {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  bool degenerate = false;  // all-free or all-occupied; values are +-cap

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Exact Euclidean distance transform (separable lower-envelope algorithm).
/// Degenerate grids are capped at the grid diameter.
SdfField grid_to_sdf(const OccupancyGrid& grid);

struct CellWindow {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive cell range
};

/// Cells whose centres lie inside `window`, clipped to the grid.
CellWindow cells_in_window(const OccupancyGrid& grid, const Window& window);

struct CircleFitOptions {
  int max_circles = 16;
  double max_radius_cells = 3.0;  // upper clamp on the disc radius (d_hat in cells)
};

/// Greedy disc cover of the occupied cells in `window`. Each pick is the
/// uncovered cell deepest inside a wall (largest -SDF, ties toward the window
/// centre, then lowest index); its radius is the local half-thickness clamped
/// to [1, max_radius_cells] cells and every cell within one cell of the disc
/// is marked covered.
std::vector<IndexedObstacle> extract_circles(const OccupancyGrid& grid, const SdfField& sdf,
                                             const CellWindow& window,
                                             const CircleFitOptions& options = {});

/// Plain-text PGM (P2). Dark pixels (< maxval / 2) are occupied.
OccupancyGrid read_pgm(std::istream& in, double cell_size = 1.0);
void write_pgm(std::ostream& out, const OccupancyGrid& grid);

/// ASCII art: '#' occupied, '.' free, one row per line.
OccupancyGrid read_ascii_grid(std::istream& in, double cell_size = 1.0);
void write_ascii_grid(std::ostream& out, const OccupancyGrid& grid);

/// Dispatches on the first bytes ("P2" means PGM).
OccupancyGrid load_grid_file(const std::string& path, double cell_size = 1.0);

}  // namespace grlsnam
