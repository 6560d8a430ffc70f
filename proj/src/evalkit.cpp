#include "grlsnam/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <thread>

namespace grlsnam {

double spl(bool success, double length, double l_ref) {
  if (!success) return 0.0;
  const double denom = std::max(length, l_ref);
  return denom > 0.0 ? l_ref / denom : 1.0;
}

double smoothness(const std::vector<Vec2>& path) {
  std::vector<double> heading;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec2 d = path[i] - path[i - 1];
    if (d.norm() < 1e-9) continue;
    heading.push_back(std::atan2(d.y(), d.x()));
  }
  if (heading.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < heading.size(); ++i) {
    double dh = heading[i] - heading[i - 1];
    dh = std::remainder(dh, 2.0 * std::numbers::pi);
    sum += std::abs(dh);
  }
  return sum / static_cast<double>(heading.size() - 1);
}

EpisodeMetrics episode_metrics(const EpisodeResult& r, double l_ref, double d_thr, double wall_time) {
  EpisodeMetrics m;
  m.method = r.method;
  m.success = r.cause == Termination::Success;
  m.cause = to_string(r.cause);
  m.l_ref = l_ref;
  m.steps = static_cast<int>(r.steps.size());
  m.mapping_ratio = r.mapping_ratio;
  m.wall_time = wall_time;
  std::vector<Vec2> path;
  path.reserve(r.steps.size());
  for (std::size_t n = 0; n < r.steps.size(); ++n) path.push_back(r.position(n));
  for (std::size_t i = 1; i < path.size(); ++i) m.path_length += (path[i] - path[i - 1]).norm();
  m.spl = spl(m.success, m.path_length, l_ref);
  m.detour = l_ref > 0.0 ? m.path_length / l_ref : 0.0;
  m.smoothness = smoothness(path);
  if (!r.steps.empty()) {
    m.min_clearance = std::numeric_limits<double>::infinity();
    for (const auto& s : r.steps) {
      m.min_clearance = std::min(m.min_clearance, s.true_clearance);
      m.mean_clearance += s.true_clearance;
      if (s.true_clearance < 0.0) ++m.collisions;
    }
    m.mean_clearance /= static_cast<double>(r.steps.size());
    m.goal_distance = (path.back() - r.goal).norm();
  }
  m.grazing = !r.steps.empty() && m.min_clearance <= d_thr;
  return m;
}

// ---------------------------------------------------------------- perturbation

void PerturbationSpec::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  prob(p_drop, "p_drop");
  prob(p_hallucinate, "p_hallucinate");
  if (!(sigma_pos >= 0.0) || !(sigma_r >= 0.0) || !(sigma_vel >= 0.0))
    throw ConfigError("perturbation std devs must be >= 0");
  if (!(damping_scale > 0.0)) throw ConfigError("damping_scale must be > 0");
  if (!(halluc_r_lo > 0.0 && halluc_r_hi >= halluc_r_lo)) throw ConfigError("bad hallucination radii");
}

bool PerturbationSpec::is_zero() const {
  return sigma_pos == 0.0 && sigma_r == 0.0 && p_drop == 0.0 && p_hallucinate == 0.0 &&
         damping_scale == 1.0 && sigma_vel == 0.0;
}

PerturbationSpec perturbation_level(const std::string& name) {
  PerturbationSpec s;
  double sigma = 0.0;
  if (name == "nominal") {
    s.damping_scale = 1.0;
  } else if (name == "mild") {
    sigma = 0.05;
    s.damping_scale = 0.9;
  } else if (name == "severe") {
    sigma = 0.10;
    s.damping_scale = 0.7;
  } else {
    throw ConfigError("unknown perturbation level '" + name + "'");
  }
  s.sigma_pos = sigma;
  s.sigma_r = sigma;
  s.sigma_vel = sigma;
  return s;
}

PerturbationModel::PerturbationModel(PerturbationSpec spec) : spec_(spec) { spec_.validate(); }

void PerturbationModel::apply(EnvironmentContext& ctx, Rng& rng) const {
  if (spec_.is_zero()) return;
  std::vector<IndexedObstacle> out;
  out.reserve(ctx.obstacles.size());
  for (auto io : ctx.obstacles) {
    if (spec_.p_drop > 0.0 && bernoulli(rng, spec_.p_drop)) continue;
    if (spec_.sigma_pos > 0.0) {
      const double dx = normal(rng), dy = normal(rng);
      io.obstacle.center += spec_.sigma_pos * Vec2(dx, dy);
    }
    if (spec_.sigma_r > 0.0) io.obstacle.radius = std::max(1e-3, io.obstacle.radius * (1.0 + spec_.sigma_r * normal(rng)));
    out.push_back(io);
  }
  if (spec_.p_hallucinate > 0.0 && bernoulli(rng, spec_.p_hallucinate)) {
    IndexedObstacle h;
    // ghost indices live far above any real obstacle index
    h.index = 1'000'000 + static_cast<int>(rng() % 1'000'000);
    const Vec2 lo = ctx.window.lo(), hi = ctx.window.hi();
    h.obstacle.center = Vec2(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
    h.obstacle.radius = uniform(rng, spec_.halluc_r_lo, spec_.halluc_r_hi);
    out.push_back(h);
  }
  ctx.obstacles = std::move(out);
}

Vec2 PerturbationModel::velocity(const Vec2& v, Rng& rng) const {
  if (spec_.sigma_vel == 0.0) return v;
  const double dx = normal(rng), dy = normal(rng);
  return v + spec_.sigma_vel * Vec2(dx, dy);
}

// ---------------------------------------------------------------- methods

Method parse_method(const std::string& name) {
  if (name == "grlsnam") return Method::GrlSnam;
  if (name == "pf") return Method::PotentialField;
  if (name == "dwa") return Method::Dwa;
  if (name == "astar_rigid") return Method::AstarRigid;
  if (name == "astar_deform") return Method::AstarDeform;
  throw ConfigError("unknown method '" + name + "' (grlsnam, pf, dwa, astar_rigid, astar_deform)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::GrlSnam: return "grlsnam";
    case Method::PotentialField: return "pf";
    case Method::Dwa: return "dwa";
    case Method::AstarRigid: return "astar_rigid";
    case Method::AstarDeform: return "astar_deform";
  }
  return "?";
}

namespace {

double min_body(const AgentConfig& a) {
  if (a.kind == AgentKind::Point) return a.point_radius;
  return RingModel(a.ring).r_eff * a.ring.s0;
}

double rest_body(const AgentConfig& a) {
  if (a.kind == AgentKind::Point) return a.point_radius;
  return RingModel(a.ring).r_max;
}

EpisodeMetrics plan_metrics(Method m, const GridPlan& plan, const Workspace& ws, double l_ref,
                            double body, double d_thr) {
  EpisodeMetrics e;
  e.method = to_string(m);
  e.success = plan.feasible;
  e.cause = plan.feasible ? "success" : "infeasible";
  e.l_ref = l_ref;
  e.mapping_ratio = 1.0;  // full-map planner by convention
  if (!plan.feasible) {
    e.goal_distance = (ws.start - ws.goal).norm();
    return e;
  }
  e.path_length = plan.length;
  e.spl = spl(true, plan.length, l_ref);
  e.detour = l_ref > 0.0 ? plan.length / l_ref : 0.0;
  e.smoothness = smoothness(plan.waypoints);
  e.steps = static_cast<int>(plan.waypoints.size());
  e.min_clearance = std::numeric_limits<double>::infinity();
  for (const auto& w : plan.waypoints) {
    const double c = true_clearance(ws, w, body);
    e.min_clearance = std::min(e.min_clearance, c);
    e.mean_clearance += c;
    if (c < 0.0) ++e.collisions;
  }
  if (!plan.waypoints.empty()) {
    e.mean_clearance /= static_cast<double>(plan.waypoints.size());
    e.goal_distance = (plan.waypoints.back() - ws.goal).norm();
  }
  e.grazing = e.min_clearance <= d_thr;
  return e;
}

}  // namespace

double reference_length(const Workspace& ws, const EpisodeConfig& cfg, double resolution,
                        double deform_gain) {
  const double r = min_body(cfg.agent);
  const GridPlan rigid = astar_rigid(ws, resolution, r);
  if (rigid.feasible) return rigid.length;
  const GridPlan soft = astar_deformable(ws, resolution, 0.5 * r, rest_body(cfg.agent), deform_gain);
  return soft.feasible ? soft.length : 0.0;
}

EpisodeMetrics evaluate(Method method, const Workspace& ws, const EvalSettings& st, std::uint64_t seed,
                        EpisodeResult* result) {
  const double l_ref = reference_length(ws, st.episode, st.lref_resolution, st.deform_gain);
  if (method == Method::AstarRigid)
    return plan_metrics(method, astar_rigid(ws, st.lref_resolution, rest_body(st.episode.agent)), ws,
                        l_ref, rest_body(st.episode.agent), st.d_thr);
  if (method == Method::AstarDeform)
    return plan_metrics(method,
                        astar_deformable(ws, st.lref_resolution, min_body(st.episode.agent),
                                         rest_body(st.episode.agent), st.deform_gain),
                        ws, l_ref, min_body(st.episode.agent), st.d_thr);
  const PerturbationModel perturb(st.perturb);
  const SensingPerturbation* pp = st.perturb.is_zero() ? nullptr : &perturb;
  const auto t0 = std::chrono::steady_clock::now();
  EpisodeResult r;
  if (method == Method::GrlSnam) {
    if (!st.meta) throw ConfigError("grlsnam evaluation needs a meta policy");
    r = run_episode(ws, st.episode, *st.meta, seed, pp);
  } else {
    r = run_baseline_episode(ws, st.episode,
                             method == Method::Dwa ? Baseline::Dwa : Baseline::PotentialField, st.pf,
                             st.dwa, seed, pp);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EpisodeMetrics m = episode_metrics(r, l_ref, st.d_thr, wall);
  if (result) *result = std::move(r);
  return m;
}

// ---------------------------------------------------------------- aggregation

Stats summarize(std::vector<double> v) {
  Stats s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  s.min = v.front();
  s.max = v.back();
  return s;
}

namespace {

std::vector<std::pair<std::string, double>> fields(const EpisodeMetrics& m) {
  return {{"success", m.success ? 1.0 : 0.0},
          {"path_length", m.path_length},
          {"spl", m.spl},
          {"detour", m.detour},
          {"min_clearance", m.min_clearance},
          {"mean_clearance", m.mean_clearance},
          {"collisions", static_cast<double>(m.collisions)},
          {"smoothness", m.smoothness},
          {"grazing", m.grazing ? 1.0 : 0.0},
          {"mapping_ratio", m.mapping_ratio},
          {"goal_distance", m.goal_distance},
          {"steps", static_cast<double>(m.steps)},
          {"wall_time", m.wall_time}};
}

}  // namespace

Aggregate aggregate(const std::string& method, const std::vector<EpisodeMetrics>& runs) {
  Aggregate a;
  a.method = method;
  a.episodes = static_cast<int>(runs.size());
  std::map<std::string, std::vector<double>> all, ok;
  int successes = 0;
  for (const auto& r : runs) {
    if (r.success) ++successes;
    for (const auto& [k, v] : fields(r)) {
      all[k].push_back(v);
      if (r.success) ok[k].push_back(v);
    }
  }
  a.success_rate = runs.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(runs.size());
  for (auto& [k, v] : all) a.all[k] = summarize(std::move(v));
  for (auto& [k, v] : ok) a.success_only[k] = summarize(std::move(v));
  return a;
}

std::vector<Aggregate> batch_eval(const std::vector<Method>& methods, const std::vector<Workspace>& workspaces,
                                  const EvalSettings& settings, const std::vector<std::uint64_t>& seeds,
                                  std::vector<EpisodeMetrics>* runs) {
  if (methods.empty() || workspaces.empty() || seeds.empty()) throw ConfigError("batch_eval: empty input");
  struct Job {
    Method method;
    std::size_t ws;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (Method m : methods)
    for (std::size_t w = 0; w < workspaces.size(); ++w)
      for (std::uint64_t s : seeds) jobs.push_back({m, w, s});
  std::vector<EpisodeMetrics> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();)
      out[i] = evaluate(jobs[i].method, workspaces[jobs[i].ws], settings, jobs[i].seed);
  };
  const int n = std::max(1, std::min<int>(settings.threads, static_cast<int>(jobs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<Aggregate> rows;
  for (Method m : methods) {
    std::vector<EpisodeMetrics> mine;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (jobs[i].method == m) mine.push_back(out[i]);
    rows.push_back(aggregate(to_string(m), mine));
  }
  if (runs) *runs = std::move(out);
  return rows;
}

namespace {

double ok_mean(const Aggregate& a, const std::string& k) {
  const auto it = a.success_only.find(k);
  return it == a.success_only.end() ? std::nan("") : it->second.mean;
}

// SPL and mapping already score failures, so they average over every episode
double all_mean(const Aggregate& a, const std::string& k) {
  const auto it = a.all.find(k);
  return it == a.all.end() ? std::nan("") : it->second.mean;
}

}  // namespace

void write_markdown_table(std::ostream& out, const std::vector<Aggregate>& rows) {
  out << "| Method | SPL | Detour | MinClear | Mapping |\n";
  out << "|---|---|---|---|---|\n";
  out << std::fixed;
  for (const auto& a : rows) {
    out << "| " << a.method << " | " << std::setprecision(2) << all_mean(a, "spl") << " | "
        << ok_mean(a, "detour") << " | " << ok_mean(a, "min_clearance") << " | " << std::setprecision(1)
        << 100.0 * all_mean(a, "mapping_ratio") << "% |\n";
  }
  out << std::defaultfloat;
}

void write_csv_table(std::ostream& out, const std::vector<Aggregate>& rows) {
  out << "method,SPL,Detour,MinClear,Mapping\n";
  out << std::setprecision(10);
  for (const auto& a : rows)
    out << a.method << ',' << all_mean(a, "spl") << ',' << ok_mean(a, "detour") << ','
        << ok_mean(a, "min_clearance") << ',' << all_mean(a, "mapping_ratio") << '\n';
}

void write_metrics_csv(std::ostream& out, const std::vector<EpisodeMetrics>& runs) {
  out << "method,cause";
  if (!runs.empty())
    for (const auto& [k, v] : fields(runs.front())) out << ',' << k;
  out << '\n' << std::setprecision(10);
  for (const auto& r : runs) {
    out << r.method << ',' << r.cause;
    for (const auto& [k, v] : fields(r)) out << ',' << v;
    out << '\n';
  }
}

}  // namespace grlsnam
