#include "grlsnam/artifacts.hpp"

#include "grlsnam/grid.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace grlsnam {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 read_vec(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
    throw SchemaError(std::string("workspace: '") + key + "' must be [x, y]");
  return {j[key][0].get<double>(), j[key][1].get<double>()};
}

// %.17g round-trips doubles; CSV bytes stay identical across reruns
std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string px(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

}  // namespace

std::string workspace_to_json(const Workspace& ws, const std::string& grid_file) {
  json j;
  j["L"] = ws.side_length;
  j["obstacles"] = json::array();
  for (const auto& o : ws.obstacles) j["obstacles"].push_back({{"c", vec(o.center)}, {"r", o.radius}, {"w", o.weight}});
  j["start"] = vec(ws.start);
  j["goal"] = vec(ws.goal);
  j["seed"] = ws.seed;
  if (!ws.family.empty()) j["family"] = ws.family;
  if (ws.has_grid()) {
    j["grid"] = grid_file;
    j["cell_size"] = ws.grid->cell_size;
  }
  return j.dump(2) + "\n";
}

Workspace workspace_from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("workspace JSON: ") + e.what());
  }
  Workspace ws;
  try {
    if (j.contains("grid") && !j["grid"].get<std::string>().empty()) {
      const double cell = j.value("cell_size", 1.0);
      ws.set_grid(load_grid_file((fs::path(base_dir) / j["grid"].get<std::string>()).string(), cell));
    }
    if (!j.contains("L") || !j["L"].is_number()) throw SchemaError("workspace: 'L' must be a number");
    ws.side_length = j["L"].get<double>();
    for (const auto& o : j.value("obstacles", json::array())) {
      Obstacle ob;
      ob.center = read_vec(o, "c");
      ob.radius = o.at("r").get<double>();
      ob.weight = o.value("w", 1.0);
      ob.validate();
      ws.obstacles.push_back(ob);
    }
    ws.start = read_vec(j, "start");
    ws.goal = read_vec(j, "goal");
    ws.seed = j.value("seed", std::uint64_t{0});
    ws.family = j.value("family", std::string());
  } catch (const json::exception& e) {
    throw SchemaError(std::string("workspace JSON: ") + e.what());
  }
  ws.validate();
  return ws;
}

void save_workspace(const std::string& path, const Workspace& ws) {
  std::string grid_file;
  if (ws.has_grid()) {
    const fs::path p(path);
    grid_file = p.stem().string() + ".pgm";
    std::ofstream g(p.parent_path() / grid_file);
    if (!g) throw Error("cannot write " + grid_file);
    write_pgm(g, *ws.grid);
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << workspace_to_json(ws, grid_file);
}

Workspace load_workspace(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const auto dir = fs::path(path).parent_path();
  return workspace_from_json(ss.str(), dir.empty() ? "." : dir.string());
}

std::string datum_to_json(const SceneDatum& d) {
  json j;
  j["stage_goal"] = vec(d.ctx.stage_goal);
  j["window"] = {{"c", vec(d.ctx.window.center)}, {"h", d.ctx.window.half_extent}};
  j["obstacles"] = json::array();
  for (const auto& io : d.ctx.obstacles)
    j["obstacles"].push_back({{"i", io.index}, {"c", vec(io.obstacle.center)}, {"r", io.obstacle.radius},
                              {"w", io.obstacle.weight}});
  j["q0"] = vec(d.z0.q.head<2>());
  j["p0"] = vec(d.z0.p.head<2>());
  j["mass"] = d.mass;
  j["d_hat"] = d.d_hat;
  j["body"] = d.body;
  j["tau"] = d.tau;
  j["horizon"] = d.horizon;
  json alpha = json::object();
  for (const auto& [i, a] : d.ref.alpha) alpha[std::to_string(i)] = a;
  j["ref"] = {{"beta", d.ref.beta}, {"lambda", d.ref.lambda}, {"mu", d.ref.mu}, {"alpha", alpha}};
  j["q_ref"] = json::array();
  j["v_ref"] = json::array();
  for (const auto& q : d.q_ref) j["q_ref"].push_back(vec(q.head<2>()));
  for (const auto& v : d.v_ref) j["v_ref"].push_back(vec(v.head<2>()));
  return j.dump(1) + "\n";
}

SceneDatum datum_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EnvironmentContext ctx;
    ctx.stage_goal = read_vec(j, "stage_goal");
    ctx.window.center = read_vec(j.at("window"), "c");
    ctx.window.half_extent = j.at("window").at("h").get<double>();
    for (const auto& o : j.at("obstacles")) {
      IndexedObstacle io;
      io.index = o.at("i").get<int>();
      io.obstacle.center = read_vec(o, "c");
      io.obstacle.radius = o.at("r").get<double>();
      io.obstacle.weight = o.value("w", 1.0);
      ctx.obstacles.push_back(io);
    }
    PhaseState z0;
    z0.q = read_vec(j, "q0");
    z0.p = read_vec(j, "p0");
    EnergyWeights ref;
    const auto& r = j.at("ref");
    ref.beta = r.at("beta").get<double>();
    ref.lambda = r.at("lambda").get<double>();
    ref.mu = r.at("mu").get<double>();
    for (const auto& [k, v] : r.at("alpha").items()) ref.alpha[std::stoi(k)] = v.get<double>();
    SceneDatum d = make_scene_datum(ctx, z0, ref, j.at("d_hat").get<double>(), j.at("horizon").get<int>(),
                                    j.at("tau").get<double>(), j.value("body", 0.0));
    const auto& qr = j.at("q_ref");
    if (qr.size() != d.q_ref.size()) throw SchemaError("datum: reference length mismatch");
    for (std::size_t t = 0; t < qr.size(); ++t)
      if ((Vec2(qr[t][0].get<double>(), qr[t][1].get<double>()) - d.q_ref[t].head<2>()).norm() > 1e-9)
        throw SchemaError("datum: stored reference rollout does not match its weights");
    return d;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("datum JSON: ") + e.what());
  }
}

std::vector<SceneDatum> load_dataset(const std::string& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw Error("dataset directory " + dir + " does not exist");
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<SceneDatum> out;
  for (const auto& p : files) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    out.push_back(datum_from_json(ss.str()));
  }
  return out;
}

void write_step_csv(std::ostream& out, const EpisodeResult& r) {
  const int dim = r.layout.dim();
  out << "t";
  for (int i = 0; i < dim; ++i) out << ",q" << i;
  for (int i = 0; i < dim; ++i) out << ",p" << i;
  out << ",H,clr,dist,speed,E_sensor,E_goal,E_obj,E_barrier_total,beta,lambda,alpha_sum,active_count,mu,"
         "u_fx,u_fy,true_clr,stage\n";
  for (const auto& s : r.steps) {
    out << num(s.t);
    for (int i = 0; i < dim; ++i) out << ',' << num(s.q[i]);
    for (int i = 0; i < dim; ++i) out << ',' << num(s.p[i]);
    for (double v : {s.H, s.obs.clr, s.obs.dist, s.obs.speed, s.energy.sensor, s.energy.goal, s.energy.object,
                     s.energy.barrier, s.beta, s.lambda, s.alpha_sum})
      out << ',' << num(v);
    out << ',' << s.active_count << ',' << num(s.mu) << ',' << num(s.u_f.x()) << ',' << num(s.u_f.y()) << ','
        << num(s.true_clearance) << ',' << s.stage << '\n';
  }
}

bool StepTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> StepTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("step CSV has no column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

StepTable read_step_csv(std::istream& in) {
  StepTable t;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("step CSV is empty");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw SchemaError("step CSV line " + std::to_string(n) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != t.header.size())
      throw SchemaError("step CSV line " + std::to_string(n) + " has " + std::to_string(row.size()) +
                        " fields, expected " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<Vec2> table_path(const StepTable& t) {
  int dim = 0;
  while (t.has("q" + std::to_string(dim))) ++dim;
  if (dim < 2) throw SchemaError("step CSV has no position columns");
  // the ring stores [sensor (2), frame (2), theta, s]; a point only the frame
  const int f = dim == 6 ? 2 : 0;
  const auto x = t.column("q" + std::to_string(f));
  const auto y = t.column("q" + std::to_string(f + 1));
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], y[i]);
  return out;
}

std::string summary_json(const EpisodeResult& r, const EpisodeMetrics& m) {
  json j;
  j["method"] = r.method;
  j["termination"] = to_string(r.cause);
  j["success"] = m.success;
  j["steps"] = m.steps;
  j["path_length"] = m.path_length;
  j["L_ref"] = m.l_ref;
  j["spl"] = m.spl;
  j["detour"] = m.detour;
  j["min_clearance"] = m.min_clearance;
  j["mean_clearance"] = m.mean_clearance;
  j["collisions"] = m.collisions;
  j["smoothness"] = m.smoothness;
  j["grazing"] = m.grazing;
  j["mapping_ratio"] = r.mapping_ratio;
  j["goal_distance"] = m.goal_distance;
  j["windows"] = r.windows.size();
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump(2) + "\n";
}

void write_map_svg(std::ostream& out, const Workspace& ws, const std::vector<Vec2>& path,
                   const std::vector<Window>& windows, const std::vector<std::vector<Vec2>>& snapshots,
                   double size) {
  const ViewTransform v{ws.side_length, size, 20.0};
  const double total = size + 2.0 * v.margin;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(total) << "\" height=\"" << px(total)
      << "\" viewBox=\"0 0 " << px(total) << ' ' << px(total) << "\">\n";
  out << "<rect id=\"workspace\" x=\"" << px(v.margin) << "\" y=\"" << px(v.margin) << "\" width=\"" << px(size)
      << "\" height=\"" << px(size) << "\" fill=\"white\" stroke=\"black\"/>\n";
  out << "<g id=\"windows\" fill=\"#4a90d9\" fill-opacity=\"0.08\" stroke=\"none\">\n";
  for (const auto& w : windows) {
    const Vec2 a = v.map(Vec2(w.lo().x(), w.hi().y()));
    out << "<rect x=\"" << px(a.x()) << "\" y=\"" << px(a.y()) << "\" width=\"" << px(2 * w.half_extent * v.scale())
        << "\" height=\"" << px(2 * w.half_extent * v.scale()) << "\"/>\n";
  }
  out << "</g>\n";
  if (ws.has_grid()) {
    const auto& g = *ws.grid;
    out << "<g id=\"grid\" fill=\"#333\">\n";
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < g.width; ++x) {
        if (!g.occupied(x, y)) continue;
        const Vec2 a = v.map(Vec2(x * g.cell_size, (y + 1) * g.cell_size));
        out << "<rect x=\"" << px(a.x()) << "\" y=\"" << px(a.y()) << "\" width=\"" << px(g.cell_size * v.scale())
            << "\" height=\"" << px(g.cell_size * v.scale()) << "\"/>\n";
      }
    out << "</g>\n";
  }
  out << "<g id=\"obstacles\" fill=\"#888\">\n";
  for (const auto& o : ws.obstacles) {
    const Vec2 c = v.map(o.center);
    out << "<circle cx=\"" << px(c.x()) << "\" cy=\"" << px(c.y()) << "\" r=\"" << px(o.radius * v.scale())
        << "\"/>\n";
  }
  out << "</g>\n";
  out << "<g id=\"snapshots\" fill=\"none\" stroke=\"#2a7\" stroke-width=\"1\">\n";
  for (const auto& s : snapshots) {
    out << "<polygon points=\"";
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Vec2 p = v.map(s[i]);
      out << (i ? " " : "") << px(p.x()) << ',' << px(p.y());
    }
    out << "\"/>\n";
  }
  out << "</g>\n";
  if (!path.empty()) {
    out << "<polyline id=\"trajectory\" fill=\"none\" stroke=\"#d33\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < path.size(); ++i) {
      const Vec2 p = v.map(path[i]);
      out << (i ? " " : "") << px(p.x()) << ',' << px(p.y());
    }
    out << "\"/>\n";
  }
  const Vec2 s = v.map(ws.start), g = v.map(ws.goal);
  out << "<circle id=\"start\" cx=\"" << px(s.x()) << "\" cy=\"" << px(s.y()) << "\" r=\"4\" fill=\"#2a2\"/>\n";
  out << "<circle id=\"goal\" cx=\"" << px(g.x()) << "\" cy=\"" << px(g.y()) << "\" r=\"4\" fill=\"#22d\"/>\n";
  out << "</svg>\n";
}

void write_timeseries_svg(std::ostream& out, const StepTable& t) {
  const std::vector<std::pair<std::string, std::string>> series = {
      {"beta", "#d33"}, {"lambda", "#2a2"}, {"alpha_sum", "#22d"}, {"mu", "#a6a"}};
  const double W = 600, H = 300, m = 30;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(W + 2 * m) << "\" height=\"" << px(H + 2 * m)
      << "\">\n";
  out << "<rect x=\"" << px(m) << "\" y=\"" << px(m) << "\" width=\"" << px(W) << "\" height=\"" << px(H)
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  const auto time = t.column("t");
  double t0 = 0, t1 = 1;
  if (!time.empty()) {
    t0 = time.front();
    t1 = std::max(time.back(), t0 + 1e-9);
  }
  for (const auto& [name, color] : series) {
    if (!t.has(name)) continue;
    const auto y = t.column(name);
    double lo = 0.0, hi = 1e-9;
    for (double v : y) hi = std::max(hi, v);
    out << "<polyline class=\"series\" id=\"" << name << "\" fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double xs = m + W * (time[i] - t0) / (t1 - t0);
      const double ys = m + H * (1.0 - (y[i] - lo) / (hi - lo));
      out << (i ? " " : "") << px(xs) << ',' << px(ys);
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace grlsnam
