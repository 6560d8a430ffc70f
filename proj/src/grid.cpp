#include "grlsnam/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace grlsnam {

namespace {

// 1D squared distance transform of a sampled function (lower envelope of
// parabolas). f holds 0 at sites and +inf elsewhere.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    while (k >= 0) {
      const int r = v[k];
      const double s = ((f[q] + double(q) * q) - (f[r] + double(r) * r)) / (2.0 * (q - r));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -inf : ((f[q] + double(q) * q) - (f[v[k - 1]] + double(v[k - 1]) * v[k - 1])) /
                               (2.0 * (q - v[k - 1]));
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

// Squared distance from every cell to the nearest cell where site(x, y).
std::vector<double> squared_edt(int w, int h, const std::vector<std::uint8_t>& site) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(static_cast<std::size_t>(w) * h);
  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    f.assign(h, inf);
    d.assign(h, inf);
    for (int y = 0; y < h; ++y)
      if (site[static_cast<std::size_t>(y) * w + x]) f[y] = 0.0;
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) g[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.assign(g.begin() + static_cast<std::ptrdiff_t>(y) * w,
             g.begin() + static_cast<std::ptrdiff_t>(y + 1) * w);
    d.assign(w, inf);
    edt_1d(f, d, v, z);
    std::copy(d.begin(), d.end(), g.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  return g;
}

}  // namespace

SdfField grid_to_sdf(const OccupancyGrid& grid) {
  if (grid.width <= 0 || grid.height <= 0) throw SchemaError("grid_to_sdf: empty grid");
  SdfField out;
  out.width = grid.width;
  out.height = grid.height;
  const std::size_t n = grid.cells.size();
  const int occ = grid.count_occupied();
  if (occ == 0 || occ == static_cast<int>(n)) {
    const double cap = std::hypot(double(grid.width), double(grid.height));
    out.degenerate = true;
    out.values.assign(n, occ == 0 ? cap : -cap);
    return out;
  }
  std::vector<std::uint8_t> free_site(n);
  for (std::size_t i = 0; i < n; ++i) free_site[i] = grid.cells[i] ? 0 : 1;
  const auto to_occ = squared_edt(grid.width, grid.height, grid.cells);
  const auto to_free = squared_edt(grid.width, grid.height, free_site);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.values[i] = grid.cells[i] ? -std::sqrt(to_free[i]) : std::sqrt(to_occ[i]);
  return out;
}

CellWindow cells_in_window(const OccupancyGrid& grid, const Window& window) {
  const Vec2 lo = window.lo() / grid.cell_size, hi = window.hi() / grid.cell_size;
  CellWindow cw;
  cw.x0 = std::max(0, static_cast<int>(std::ceil(lo.x() - 0.5)));
  cw.y0 = std::max(0, static_cast<int>(std::ceil(lo.y() - 0.5)));
  cw.x1 = std::min(grid.width - 1, static_cast<int>(std::floor(hi.x() - 0.5)));
  cw.y1 = std::min(grid.height - 1, static_cast<int>(std::floor(hi.y() - 0.5)));
  return cw;
}

std::vector<IndexedObstacle> extract_circles(const OccupancyGrid& grid, const SdfField& sdf,
                                             const CellWindow& window,
                                             const CircleFitOptions& options) {
  std::vector<IndexedObstacle> out;
  if (window.x1 < window.x0 || window.y1 < window.y0) return out;
  struct Cell {
    int x, y;
  };
  std::vector<Cell> pending;
  for (int y = window.y0; y <= window.y1; ++y)
    for (int x = window.x0; x <= window.x1; ++x)
      if (grid.occupied(x, y)) pending.push_back({x, y});
  const double cx = 0.5 * (window.x0 + window.x1), cy = 0.5 * (window.y0 + window.y1);
  while (!pending.empty() && static_cast<int>(out.size()) < options.max_circles) {
    std::size_t best = 0;
    double best_depth = -1.0, best_off = 0.0;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const auto& c = pending[k];
      const double depth = -sdf.at(c.x, c.y);
      const double off = std::hypot(c.x - cx, c.y - cy);
      // pending is in row-major order, so strict comparisons keep the lowest index
      if (depth > best_depth || (depth == best_depth && off < best_off)) {
        best = k;
        best_depth = depth;
        best_off = off;
      }
    }
    const Cell pick = pending[best];
    const double r = std::clamp(best_depth - 0.5, 1.0, std::max(1.0, options.max_radius_cells));
    IndexedObstacle io;
    io.index = static_cast<int>(grid.index(pick.x, pick.y));
    io.obstacle.center = grid.cell_center(pick.x, pick.y);
    io.obstacle.radius = r * grid.cell_size;
    io.obstacle.weight = 1.0;
    out.push_back(io);
    const double reach2 = (r + 1.0) * (r + 1.0);
    std::erase_if(pending, [&](const Cell& c) {
      const double dx = c.x - pick.x, dy = c.y - pick.y;
      return dx * dx + dy * dy <= reach2;
    });
  }
  return out;
}

namespace {

// Next whitespace-separated token, skipping '#' comments (PGM convention).
bool next_token(std::istream& in, std::string& tok) {
  tok.clear();
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) return true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) return true;
      continue;
    }
    tok.push_back(ch);
  }
  return !tok.empty();
}

int parse_int(std::istream& in, const char* what) {
  std::string tok;
  if (!next_token(in, tok)) throw SchemaError(std::string("PGM: missing ") + what);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw SchemaError("");
    return v;
  } catch (const std::exception&) {
    throw SchemaError(std::string("PGM: bad ") + what + " '" + tok + "'");
  }
}

}  // namespace

OccupancyGrid read_pgm(std::istream& in, double cell_size) {
  std::string magic;
  if (!next_token(in, magic) || magic != "P2") throw SchemaError("PGM: expected P2 header");
  const int w = parse_int(in, "width");
  const int h = parse_int(in, "height");
  const int maxval = parse_int(in, "maxval");
  if (w <= 0 || h <= 0 || maxval <= 0) throw SchemaError("PGM: bad dimensions");
  OccupancyGrid g(w, h, cell_size);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) g.set(x, y, parse_int(in, "pixel") * 2 < maxval);
  return g;
}

void write_pgm(std::ostream& out, const OccupancyGrid& grid) {
  out << "P2\n" << grid.width << ' ' << grid.height << "\n255\n";
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) out << (x ? " " : "") << (grid.occupied(x, y) ? 0 : 255);
    out << '\n';
  }
}

OccupancyGrid read_ascii_grid(std::istream& in, double cell_size) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw SchemaError("ASCII grid: no rows");
  const int w = static_cast<int>(rows.front().size());
  OccupancyGrid g(w, static_cast<int>(rows.size()), cell_size);
  for (int y = 0; y < g.height; ++y) {
    if (static_cast<int>(rows[y].size()) != w) throw SchemaError("ASCII grid: ragged rows");
    for (int x = 0; x < w; ++x) {
      const char c = rows[y][x];
      if (c != '#' && c != '.') throw SchemaError(std::string("ASCII grid: bad character '") + c + "'");
      g.set(x, y, c == '#');
    }
  }
  return g;
}

void write_ascii_grid(std::ostream& out, const OccupancyGrid& grid) {
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) out << (grid.occupied(x, y) ? '#' : '.');
    out << '\n';
  }
}

OccupancyGrid load_grid_file(const std::string& path, double cell_size) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open grid file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  std::istringstream in(text);
  if (text.rfind("P2", 0) == 0) return read_pgm(in, cell_size);
  return read_ascii_grid(in, cell_size);
}

}  // namespace grlsnam
