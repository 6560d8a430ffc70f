#include "grlsnam/config.hpp"

#include "json.hpp"
#include "toml.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace grlsnam {

using json = nlohmann::json;

namespace {

// Every field is listed once here; the writers/readers below give it a
// dotted key in JSON and TOML.
template <class V>
void visit(RunConfig& c, V& v) {
  v("method", c.method);
  v("family", c.family);
  v("seed", c.seed);
  v("out_dir", c.out_dir);
  v("count", c.count);
  v("plot", c.plot);
  v("checkpoint", c.checkpoint);

  auto& e = c.episode;
  v("episode.T_y", e.T_y);
  v("episode.T_f", e.T_f);
  v("episode.T_o", e.T_o);
  v("episode.tau", e.tau);
  v("episode.N_max", e.N_max);
  v("episode.eps_goal", e.eps_goal);
  v("episode.stuck_window", e.stuck_window);
  v("episode.eps_stuck", e.eps_stuck);
  v("episode.d_hat", e.d_hat);
  v("episode.sense_half_extent", e.sense_half_extent);
  v("episode.sensor_weight", e.sensor_weight);
  v("episode.use_stages", e.use_stages);
  v("episode.eps_stage", e.eps_stage);
  v("episode.waypoints", e.waypoints);
  v("episode.waypoint_inflate", e.waypoint_inflate);
  v("episode.waypoint_resolution", e.waypoint_resolution);
  v("episode.coverage_resolution", e.coverage_resolution);
  v("episode.v_max", e.v_max);
  v("episode.record_snapshots", e.record_snapshots);
  v("episode.snapshot_every", e.snapshot_every);
  v("episode.stages.width", e.stages.width);
  v("episode.stages.height", e.stages.height);
  v("episode.stages.overlap", e.stages.overlap);
  v("episode.exits.inflate", e.exits.inflate);
  v("episode.exits.min_opening", e.exits.min_opening);
  v("episode.exits.samples_per_edge", e.exits.samples_per_edge);
  v("episode.exits.require_reachable", e.exits.require_reachable);
  v("episode.exits.raster_resolution", e.exits.raster_resolution);
  v("episode.exits.search", e.exits.search);
  v("episode.exits.search_radius", e.exits.search_radius);
  v("episode.sense.max_circles", e.sense.max_circles);
  v("episode.sense.max_radius_cells", e.sense.max_radius_cells);

  auto& a = e.agent;
  v.choice("agent.kind", a.kind, {{"ring", AgentKind::Ring}, {"point", AgentKind::Point}});
  v("agent.M_c", a.M_c);
  v("agent.inertia", a.inertia);
  v("agent.gamma_theta", a.gamma_theta);
  v("agent.gamma_s", a.gamma_s);
  v("agent.damp_shape", a.damp_shape);
  v("agent.point_radius", a.point_radius);
  v("agent.ring.r_base", a.ring.r_base);
  v("agent.ring.n_ctrl", a.ring.n_ctrl);
  v("agent.ring.K", a.ring.K);
  v("agent.ring.k_bulk", a.ring.k_bulk);
  v("agent.ring.M_s", a.ring.M_s);
  v("agent.ring.s0", a.ring.s0);
  v("agent.ring.delta", a.ring.delta);

  auto& d = e.adapt;
  v("adapt.enabled", d.enabled);
  v("adapt.rho", d.rho);
  v("adapt.eps", d.eps);
  v("adapt.kappa_beta", d.kappa_beta);
  v("adapt.kappa_gamma", d.kappa_gamma);
  v("adapt.kappa_alpha", d.kappa_alpha);
  v("adapt.lambda_zeta", d.lambda_zeta);
  v("adapt.k_alpha", d.k_alpha);
  v.choice("adapt.form", d.form, {{"additive", UpdateForm::Additive}, {"convex", UpdateForm::Convex}});
  v.choice("adapt.mode", d.mode, {{"relative", TargetMode::Relative}, {"fixed", TargetMode::Fixed}});
  v("adapt.j0_scale", d.j0_scale);
  v("adapt.port", d.port);
  v("adapt.kappa_v", d.kappa_v);
  v("adapt.lambda_u", d.lambda_u);
  v("adapt.u_lo", d.u_lo);
  v("adapt.u_hi", d.u_hi);
  v("adapt.learn_port", d.learn_port);
  v("adapt.setpoints.m_safe", d.setpoints.m_safe);
  v("adapt.setpoints.eps_prog", d.setpoints.eps_prog);
  v("adapt.setpoints.v_min", d.setpoints.v_min);
  v("adapt.setpoints.clr_star", d.setpoints.clr_star);
  v("adapt.setpoints.dist_star", d.setpoints.dist_star);
  v("adapt.setpoints.speed_star", d.setpoints.speed_star);

  v("weights.beta", c.weights.beta);
  v("weights.lambda", c.weights.lambda);
  v("weights.mu", c.weights.mu);
  v("weights.alpha", c.weights.alpha);

  v("pf.k_att", c.pf.k_att);
  v("pf.k_rep", c.pf.k_rep);
  v("pf.d_hat", c.pf.d_hat);
  v("pf.v_max", c.pf.v_max);

  v("dwa.n_v", c.dwa.n_v);
  v("dwa.v_max", c.dwa.v_max);
  v("dwa.a_max", c.dwa.a_max);
  v("dwa.dt_window", c.dwa.dt_window);
  v("dwa.horizon", c.dwa.horizon);
  v("dwa.dt", c.dwa.dt);
  v("dwa.w_progress", c.dwa.w_progress);
  v("dwa.w_clearance", c.dwa.w_clearance);
  v("dwa.w_speed", c.dwa.w_speed);
  v("dwa.clearance_cap", c.dwa.clearance_cap);

  auto& t = c.train;
  v("train.epochs", t.epochs);
  v("train.batch", t.batch);
  v("train.lr", t.lr);
  v("train.momentum", t.momentum);
  v("train.clip", t.clip);
  v("train.fd_rel", t.fd_rel);
  v("train.w_traj", t.loss.w_q);
  v("train.w_vel", t.loss.w_v);
  v("train.w_fric", t.loss.w_mu);
  v("train.w_multi", t.loss.w_d);
  v("train.use_multi", t.use_multi);
  v("train.heads_only", t.heads_only);
  v("train.multi.trials", t.multi.trials);
  v("train.multi.steps", t.multi.steps);
  v("train.multi.tau", t.multi.tau);
  v("train.multi.speed", t.multi.speed);
  v("train.multi.r_min", t.multi.r_min);
  v("train.multi.literal", t.multi.literal);

  v("dataset.scenes", c.dataset.scenes);
  v("dataset.horizon", c.dataset.horizon);
  v("dataset.ref_perturb", c.dataset.ref_perturb);

  v("eval.episodes", c.eval.episodes);
  v("eval.lref_resolution", c.eval.lref_resolution);
  v("eval.d_thr", c.eval.d_thr);
  v("eval.deform_gain", c.eval.deform_gain);
  v("eval.perturbation", c.eval.perturbation);
}

json::json_pointer pointer(const std::string& dotted) {
  std::string p = "/" + dotted;
  for (auto& ch : p)
    if (ch == '.') ch = '/';
  return json::json_pointer(p);
}

template <class E>
using Choices = std::initializer_list<std::pair<const char*, E>>;

struct Writer {
  json out = json::object();
  template <class T>
  void operator()(const std::string& key, T& value) {
    if constexpr (std::is_same_v<T, Vec2>)
      out[pointer(key)] = {value.x(), value.y()};
    else
      out[pointer(key)] = value;
  }
  template <class E>
  void choice(const std::string& key, E& value, Choices<E> names) {
    for (const auto& [n, e] : names)
      if (e == value) out[pointer(key)] = n;
  }
};

struct Reader {
  const json& in;
  std::set<std::string> used;

  const json* find(const std::string& key) {
    const auto p = pointer(key);
    if (!in.contains(p)) return nullptr;
    used.insert(key);
    return &in.at(p);
  }
  [[noreturn]] static void bad(const std::string& key, const std::string& what) {
    throw ConfigError(key + ": " + what);
  }

  template <class T>
  void operator()(const std::string& key, T& value) {
    const json* j = find(key);
    if (!j) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!j->is_boolean()) bad(key, "expected a boolean");
      value = j->get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j->is_string()) bad(key, "expected a string");
      value = j->get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!j->is_number()) bad(key, "expected a number");
      value = j->get<double>();
    } else if constexpr (std::is_integral_v<T>) {
      if (j->is_number_integer()) {
        if constexpr (std::is_unsigned_v<T>) {
          if (j->is_number_unsigned() || j->get<long long>() >= 0)
            value = j->get<T>();
          else
            bad(key, "expected a nonnegative integer");
        } else {
          value = j->get<T>();
        }
      } else if (j->is_number_float() && std::floor(j->get<double>()) == j->get<double>()) {
        value = static_cast<T>(j->get<double>());
      } else {
        bad(key, "expected an integer");
      }
    } else if constexpr (std::is_same_v<T, Vec2>) {
      if (!j->is_array() || j->size() != 2 || !(*j)[0].is_number() || !(*j)[1].is_number())
        bad(key, "expected [x, y]");
      value = Vec2((*j)[0].get<double>(), (*j)[1].get<double>());
    }
  }
  template <class E>
  void choice(const std::string& key, E& value, Choices<E> names) {
    const json* j = find(key);
    if (!j) return;
    if (!j->is_string()) bad(key, "expected a string");
    std::string options;
    for (const auto& [n, e] : names) {
      if (j->get<std::string>() == n) {
        value = e;
        return;
      }
      options += options.empty() ? n : std::string(", ") + n;
    }
    bad(key, "must be one of " + options);
  }
};

void leaf_keys(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) leaf_keys(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out.push_back(prefix);
  }
}

RunConfig apply_json(const json& j, const RunConfig& base) {
  if (!j.is_object()) throw ConfigError("config root must be a table");
  RunConfig c = base;
  Reader r{j, {}};
  visit(c, r);
  std::vector<std::string> keys;
  leaf_keys(j, "", keys);
  for (const auto& k : keys)
    if (k != "preset" && !r.used.count(k)) throw ConfigError(k + ": unknown key");
  c.validate();
  return c;
}

json toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json o = json::object();
    for (const auto& [k, v] : *t) o[std::string(k.str())] = toml_to_json(v);
    return o;
  }
  if (const auto* a = n.as_array()) {
    json o = json::array();
    for (const auto& v : *a) o.push_back(toml_to_json(v));
    return o;
  }
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  if (const auto* v = n.as_string()) return v->get();
  throw ConfigError("unsupported TOML value type");
}

void json_to_toml(const json& j, toml::table& t) {
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      toml::table sub;
      json_to_toml(v, sub);
      t.insert(k, std::move(sub));
    } else if (v.is_array()) {
      toml::array arr;
      for (const auto& x : v) arr.push_back(x.get<double>());
      t.insert(k, std::move(arr));
    } else if (v.is_boolean()) {
      t.insert(k, v.get<bool>());
    } else if (v.is_number_integer()) {
      if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
        throw ConfigError(k + ": integer too large for TOML");
      t.insert(k, v.get<std::int64_t>());
    } else if (v.is_number_float()) {
      t.insert(k, v.get<double>());
    } else if (v.is_string()) {
      t.insert(k, v.get<std::string>());
    }
  }
}

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

void RunConfig::validate() const {
  const auto& e = episode;
  check(e.tau > 0.0 && e.tau <= 1.0, "episode.tau", "must lie in (0, 1]");
  check(e.T_y >= 1, "episode.T_y", "must be >= 1");
  check(e.T_f >= 1, "episode.T_f", "must be >= 1");
  check(e.T_o >= 1, "episode.T_o", "must be >= 1");
  check(e.N_max >= 0, "episode.N_max", "must be >= 0");
  check(e.eps_goal > 0.0, "episode.eps_goal", "must be > 0");
  check(e.d_hat > 0.0, "episode.d_hat", "must be > 0");
  check(e.sense_half_extent > 0.0, "episode.sense_half_extent", "must be > 0");
  check(e.stages.width > 0.0 && e.stages.height > 0.0, "episode.stages", "dimensions must be > 0");
  check(e.stages.overlap >= 0.0 && e.stages.overlap < 1.0, "episode.stages.overlap", "must lie in [0, 1)");
  check(e.exits.inflate >= 0.0, "episode.exits.inflate", "must be >= 0");
  check(e.exits.samples_per_edge >= 1, "episode.exits.samples_per_edge", "must be >= 1");
  check(e.coverage_resolution >= 0.0, "episode.coverage_resolution", "must be >= 0");
  check(e.v_max >= 0.0, "episode.v_max", "must be >= 0");
  check(e.agent.M_c > 0.0 && e.agent.inertia > 0.0, "agent", "masses must be > 0");
  check(e.agent.ring.r_base > 0.0, "agent.ring.r_base", "must be > 0");
  check(e.agent.ring.s0 > 0.0 && e.agent.ring.s0 <= 1.0, "agent.ring.s0", "must lie in (0, 1]");
  check(e.agent.ring.n_ctrl >= 4, "agent.ring.n_ctrl", "must be >= 4");
  check(e.agent.ring.K >= e.agent.ring.n_ctrl, "agent.ring.K", "must be >= n_ctrl");
  check(e.adapt.rho >= 0.0 && e.adapt.rho < 1.0, "adapt.rho", "must lie in [0, 1)");
  check(e.adapt.k_alpha >= 0, "adapt.k_alpha", "must be >= 0");
  check(e.adapt.lambda_zeta >= 0.0, "adapt.lambda_zeta", "must be >= 0");
  check(e.adapt.lambda_u > 0.0, "adapt.lambda_u", "must be > 0");
  check((e.adapt.u_lo.array() <= e.adapt.u_hi.array()).all(), "adapt.u_lo", "must not exceed u_hi");
  check(weights.beta >= 0.0 && weights.lambda >= 0.0 && weights.mu >= 0.0 && weights.alpha >= 0.0,
        "weights", "must be >= 0");
  check(train.lr > 0.0, "train.lr", "must be > 0");
  check(train.momentum >= 0.0 && train.momentum < 1.0, "train.momentum", "must lie in [0, 1)");
  check(train.batch >= 1, "train.batch", "must be >= 1");
  check(train.epochs >= 0, "train.epochs", "must be >= 0");
  check(dataset.horizon >= 1, "dataset.horizon", "must be >= 1");
  check(count >= 0, "count", "must be >= 0");
  check(eval.episodes >= 1, "eval.episodes", "must be >= 1");
  check(eval.lref_resolution > 0.0, "eval.lref_resolution", "must be > 0");
  check(dwa.n_v >= 1 && dwa.horizon >= 1, "dwa", "n_v and horizon must be >= 1");
  try {
    parse_method(method);
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("method: ") + err.what());
  }
  try {
    perturbation_level(eval.perturbation);
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("eval.perturbation: ") + err.what());
  }
  e.validate();
}

RunConfig preset_config(const std::string& family) {
  RunConfig c;
  c.family = family;
  auto& e = c.episode;
  if (family == "train" || family == "test_id" || family == "test_ood") {
    e.d_hat = 0.6;
    e.sense_half_extent = 1.0;
    e.exits.inflate = 0.4;  // rest radius: exits the ring can reach unsqueezed
    e.eps_stage = 0.5;
    e.N_max = 6000;
    e.v_max = 0.6;
    c.weights.alpha = 2.0;
    c.pf.d_hat = e.d_hat;  // identical sensing range
    c.pf.k_rep = 0.05;
    return c;
  }
  if (family == "bottleneck") {
    e.d_hat = 0.3;
    e.sense_half_extent = 1.0;
    e.use_stages = false;
    e.N_max = 4000;
    e.v_max = 0.6;  // the IPC barrier is weak at small d_hat
    c.weights.alpha = 5.0;
    return c;
  }
  if (family == "dungeon") {
    e.agent.kind = AgentKind::Point;
    e.agent.point_radius = 0.0;
    e.agent.M_c = 1.0;
    e.tau = 0.075;  // 0.3 split into four substeps
    e.d_hat = 1.0;
    e.sense_half_extent = 2.0;
    e.v_max = 3.0;
    e.eps_goal = 0.5;
    e.N_max = 8000;
    e.stuck_window = 1000;  // exit search revisits places while it learns
    e.stages.width = 60.0;
    e.stages.height = 60.0;
    e.exits.inflate = 2.0;  // generator guarantees feasibility at 2 cells
    e.exits.require_reachable = true;
    e.exits.raster_resolution = 1.0;
    e.exits.search = true;
    e.exits.search_radius = 4.0;
    e.eps_stage = 2.0;
    e.waypoints = true;
    e.waypoint_inflate = 2.0;
    e.waypoint_resolution = 1.0;
    e.sense.max_radius_cells = 1.0;
    e.adapt.enabled = false;
    c.weights.beta = 20.0;
    c.weights.alpha = 0.0;
    c.weights.mu = 4.0;
    c.pf.d_hat = 1.0;
    c.pf.v_max = 3.0;
    c.dwa.v_max = 3.0;
    c.eval.episodes = 10;
    c.eval.lref_resolution = 1.0;
    return c;
  }
  throw ConfigError("family: unknown preset '" + family + "'");
}

RunConfig config_from_json(const std::string& text, const RunConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return apply_json(j, base);
}

RunConfig config_from_toml(const std::string& text, const RunConfig& base) {
  try {
    return apply_json(toml_to_json(toml::parse(text)), base);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string("invalid TOML: ") + std::string(e.description()));
  }
}

std::string config_to_json(const RunConfig& cfg) {
  RunConfig c = cfg;
  Writer w;
  visit(c, w);
  return w.out.dump(2) + "\n";
}

std::string config_to_toml(const RunConfig& cfg) {
  RunConfig c = cfg;
  Writer w;
  visit(c, w);
  toml::table t;
  json_to_toml(w.out, t);
  std::ostringstream os;
  os << t << '\n';
  return os.str();
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  const bool is_toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  json j;
  try {
    j = is_toml ? toml_to_json(toml::parse(text)) : json::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(path + ": invalid TOML: " + std::string(e.description()));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  RunConfig base;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
    base = preset_config(j["preset"].get<std::string>());
  }
  return apply_json(j, base);
}

std::unique_ptr<MetaPolicy> make_meta(const RunConfig& cfg) {
  if (!cfg.checkpoint.empty()) return std::make_unique<RegressorMeta>(load_checkpoint(cfg.checkpoint));
  return std::make_unique<FixedMeta>(cfg.weights.beta, cfg.weights.lambda, cfg.weights.mu, cfg.weights.alpha);
}

EvalSettings eval_settings(const RunConfig& cfg, const MetaPolicy* meta) {
  EvalSettings s;
  s.episode = cfg.episode;
  s.pf = cfg.pf;
  s.dwa = cfg.dwa;
  s.meta = meta;
  s.perturb = perturbation_level(cfg.eval.perturbation);
  s.lref_resolution = cfg.eval.lref_resolution;
  s.d_thr = cfg.eval.d_thr;
  s.deform_gain = cfg.eval.deform_gain;
  return s;
}

}  // namespace grlsnam
