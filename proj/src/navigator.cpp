#include "grlsnam/navigator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace grlsnam {

Observables compute_observables(const PhaseState& z_next, const HamiltonianSpec& spec,
                                const Vec2& x_goal, const std::vector<double>& shape_clearances) {
  Observables o;
  double clr = spec.d_hat;
  for (double d : barrier_distances(z_next.q, spec)) clr = std::min(clr, d);
  for (double d : shape_clearances) clr = std::min(clr, d);
  o.clr = clr;
  const auto f = spec.layout.frame();
  o.dist = (z_next.q.segment<2>(f) - x_goal).norm();
  o.speed = spec.velocity(z_next.p).segment<2>(f).norm();
  return o;
}

Vec3 observable_target(const Vec3& y, TargetMode mode, const Setpoints& sp) {
  if (mode == TargetMode::Fixed) return Vec3(-sp.clr_star, sp.dist_star, -sp.speed_star);
  const double clr = -y[0], dist = y[1], speed = -y[2];
  const double floor = clr >= sp.m_safe ? sp.v_min : 0.0;
  return Vec3(-sp.m_safe, dist - sp.eps_prog, -std::max(speed, floor));
}

MatX secant_jacobian_update(const MatX& J_prev, const Vec3& dy, const VecX& dz, double rho,
                            double eps) {
  if (J_prev.rows() != 3 || J_prev.cols() != dz.size())
    throw ConfigError("secant update: shape mismatch");
  const MatX Jt = dy * dz.transpose() / (dz.squaredNorm() + eps);
  return rho * J_prev + (1.0 - rho) * Jt;
}

VecX tikhonov_step(const MatX& J, const Vec3& dy_des, double lambda) {
  const MatX A = J.transpose() * J + lambda * MatX::Identity(J.cols(), J.cols());
  const VecX b = J.transpose() * dy_des;
  Eigen::LDLT<MatX> ldlt(A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-14 * std::max(1.0, A.norm()))
    throw SingularSystemError("Tikhonov step: singular normal equations");
  return ldlt.solve(b);
}

VecX project_update(const VecX& zeta, const VecX& dzeta, const VecX& kappa, UpdateForm form) {
  VecX out = form == UpdateForm::Additive
                 ? VecX(zeta + kappa.cwiseProduct(dzeta))
                 : VecX((VecX::Ones(zeta.size()) - kappa).cwiseProduct(zeta) + kappa.cwiseProduct(dzeta));
  return out.cwiseMax(0.0);
}

Vec2 port_correction(const Eigen::Matrix<double, 3, 2>& P, const Vec3& r, double lambda_u,
                     const Vec2& lo, const Vec2& hi) {
  if (!(lambda_u > 0.0)) throw ConfigError("port correction: lambda_u must be positive");
  const Eigen::Matrix2d A = P.transpose() * P + lambda_u * Eigen::Matrix2d::Identity();
  const Vec2 u = A.ldlt().solve(P.transpose() * r);
  return u.cwiseMax(lo).cwiseMin(hi);
}

MetaOutput FixedMeta::propose(const MetaInput& in) const {
  MetaOutput o;
  o.beta = beta_;
  o.lambda = lambda_;
  o.mu = mu_;
  for (int i : in.active) o.alpha[i] = alpha_;
  return o;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Success: return "success";
    case Termination::Timeout: return "timeout";
    case Termination::Collision: return "collision";
    case Termination::Stuck: return "stuck";
    case Termination::DeadEnd: return "dead_end";
  }
  return "unknown";
}

void EpisodeConfig::validate() const {
  if (T_y < 1 || T_f < 1 || T_o < 1) throw ConfigError("horizons must be at least 1");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (N_max < 0) throw ConfigError("N_max must be nonnegative");
  if (!(d_hat > 0.0) || !(sense_half_extent > 0.0)) throw ConfigError("d_hat and window must be positive");
  if (stuck_window < 1) throw ConfigError("stuck window must be at least 1");
  if (adapt.rho < 0.0 || adapt.rho >= 1.0) throw ConfigError("rho must lie in [0, 1)");
  if (!(adapt.lambda_u > 0.0)) throw ConfigError("lambda_u must be positive");
  for (double k : {adapt.kappa_beta, adapt.kappa_gamma, adapt.kappa_alpha})
    if (k < 0.0 || k >= 1.0) throw ConfigError("adaptation gains must lie in [0, 1)");
  if (agent.kind == AgentKind::Ring) agent.ring.validate();
}

double agent_body_radius(const AgentConfig& agent) {
  if (agent.kind == AgentKind::Point) return agent.point_radius;
  return RingModel(agent.ring).r_max;
}

namespace {

enum class Kind { Beta = 0, Lambda = 1, Alpha = 2, Mu = 3 };

struct Key {
  Kind kind;
  int index;
  bool operator<(const Key& o) const {
    return kind != o.kind ? kind < o.kind : index < o.index;
  }
};

Vec3 prior_column(const Key& k, double scale) {
  // sign structure: alpha up -> clearance up, beta up -> distance down,
  // mu up -> speed down (y = [-clr, dist, -speed])
  switch (k.kind) {
    case Kind::Alpha: return Vec3(-scale, 0.0, 0.0);
    case Kind::Beta: return Vec3(0.0, -scale, 0.0);
    case Kind::Mu: return Vec3(0.0, 0.0, scale);
    case Kind::Lambda: return Vec3::Zero();
  }
  return Vec3::Zero();
}

struct RingGeometry {
  const RingModel* model = nullptr;
  MatX ctrl0;  // n x 2

  double boundary_clearance(const Vec2& c, double s, const std::vector<Obstacle>& obs) const {
    if (obs.empty()) return std::numeric_limits<double>::infinity();
    const MatX X = model->basis.B * (s * ctrl0);
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      const Vec2 p = c + X.row(j).transpose();
      for (const auto& o : obs) d = std::min(d, signed_distance(o, p));
    }
    return d;
  }
};

}  // namespace

EpisodeResult run_episode(const Workspace& ws, const EpisodeConfig& cfg, const MetaPolicy& meta,
                          std::uint64_t seed, const SensingPerturbation* perturb) {
  cfg.validate();
  Rng rng = make_rng(seed, 0x5e45);
  const bool is_ring = cfg.agent.kind == AgentKind::Ring;
  std::optional<RingModel> model;
  RingGeometry geom;
  if (is_ring) {
    model.emplace(cfg.agent.ring);
    geom.model = &*model;
    geom.ctrl0.resize(model->basis.n_ctrl, 2);
    for (int i = 0; i < model->basis.n_ctrl; ++i) geom.ctrl0.row(i) = model->ctrl0[i].transpose();
  }
  const double body_nominal = agent_body_radius(cfg.agent);

  HamiltonianSpec spec;
  VecX fixed_damping;
  if (is_ring) {
    spec = model->make_spec({}, {}, cfg.d_hat, cfg.agent.M_c, cfg.agent.inertia);
    fixed_damping = VecX::Zero(6);
    if (cfg.agent.damp_shape) {
      fixed_damping[4] = cfg.agent.gamma_theta;
      fixed_damping[5] = cfg.agent.gamma_s;
    }
  } else {
    spec.layout = StateLayout{0, 0};
    spec.mass = MatX::Identity(2, 2) * cfg.agent.M_c;
    spec.body_radius = cfg.agent.point_radius;
    spec.d_hat = cfg.d_hat;
    fixed_damping = VecX::Zero(2);
  }
  spec.sensor_weight = cfg.sensor_weight;
  const StateLayout layout = spec.layout;
  const PortSelectors selectors(layout, fixed_damping);
  const int f = layout.frame();
  const int si = layout.scale_index();
  auto true_body = [&](const VecX& q) { return si >= 0 ? body_nominal * q[si] : body_nominal; };

  EpisodeResult res;
  res.layout = layout;
  res.side_length = ws.side_length;
  res.body_radius = body_nominal;
  res.goal = ws.goal;

  StageManager stages(ws.side_length, cfg.stages);
  const double cov_res = cfg.coverage_resolution > 0.0 ? cfg.coverage_resolution : cfg.d_hat / 8.0;
  CoverageTracker tracker(ws.side_length, cov_res);

  PhaseState z;
  z.q = VecX::Zero(layout.dim());
  z.p = VecX::Zero(layout.dim());
  z.q.segment<2>(f) = ws.start;
  if (si >= 0) z.q[si] = 1.0;

  std::map<int, Obstacle> memory;
  EnvironmentContext nav;
  Vec2 local_goal = ws.goal, exit_goal = ws.goal;
  bool terminal = !cfg.use_stages;
  MetaOutput proposal;
  EnergyWeights weights;
  std::map<Key, double> offset;
  std::map<Key, Vec3> jac;
  std::map<Key, double> zeta_prev;
  Vec3 y_prev = Vec3::Zero();
  bool have_prev = false;
  Eigen::Matrix<double, 3, 2> P_learned = Eigen::Matrix<double, 3, 2>::Zero();
  Vec2 u_f = Vec2::Zero(), u_prev = Vec2::Zero();
  std::vector<double> shape_qoi;
  double s_target = 1.0;
  const double damping_scale = perturb ? perturb->damping_scale() : 1.0;

  auto record = [&](double t, const Observables& obs, int active_count) {
    StepRecord r;
    r.t = t;
    r.q = z.q;
    r.p = z.p;
    r.H = hamiltonian(z, spec);
    r.obs = obs;
    r.energy = potential_terms(z.q, spec);
    r.beta = weights.beta;
    r.lambda = weights.lambda;
    r.alpha_sum = weights.alpha_sum();
    r.mu = weights.mu;
    r.active_count = active_count;
    r.u_f = u_f;
    r.stage_goal = local_goal;
    r.true_clearance = true_clearance(ws, z.q.segment<2>(f), true_body(z.q), cfg.d_hat + 4.0);
    r.stage = cfg.use_stages ? stages.active() : -1;
    res.steps.push_back(std::move(r));
  };
  auto finish = [&](Termination cause) {
    res.cause = cause;
    res.windows = tracker.windows();
    res.mapping_ratio = mapping_ratio(tracker, ws.side_length);
    return res;
  };
  auto snapshot = [&]() {
    if (!is_ring || !cfg.record_snapshots) return;
    const MatX X = model->basis.B * (z.q[si] * geom.ctrl0);
    std::vector<Vec2> pts;
    for (Eigen::Index j = 0; j < X.rows(); ++j) pts.push_back(z.q.segment<2>(f) + X.row(j).transpose());
    res.snapshots.push_back(std::move(pts));
  };

  ExitMemory exit_memory(cfg.exits.search_radius);
  auto refresh_exit = [&](const Vec2& c, const Vec2* reached) {
    const ExitChoice ch = cfg.exits.search
                              ? search_exit_goal(stages, ws, c, cfg.exits, exit_memory, reached)
                              : stage_exit_goal(stages, ws, c, cfg.exits);
    exit_goal = ch.goal;
    terminal = ch.terminal;
    stages.set_exit_goal(exit_goal);
  };

  if (cfg.use_stages) {
    stages.activate(ws.start, ws.goal);
    try {
      refresh_exit(ws.start, nullptr);
    } catch (const DeadEndError&) {
      record(0.0, Observables{}, 0);
      return finish(Termination::DeadEnd);
    }
  }
  local_goal = exit_goal;
  nav.stage_goal = local_goal;
  spec.context = nav;
  Observables obs0;
  obs0.dist = (ws.start - ws.goal).norm();
  obs0.clr = cfg.d_hat;
  record(0.0, obs0, 0);
  snapshot();
  if (res.steps.back().true_clearance < 0.0) return finish(Termination::Collision);
  if ((ws.start - ws.goal).norm() < cfg.eps_goal) return finish(Termination::Success);

  for (int n = 0; n < cfg.N_max; ++n) {
    const Vec2 c = z.q.segment<2>(f);
    bool need_sense = n % cfg.T_y == 0;
    bool need_meta = n % cfg.T_f == 0;

    if (cfg.use_stages) {
      const bool reached = !terminal && (c - exit_goal).norm() < cfg.eps_stage;
      const bool left = !stages.active_rect().contains(c);
      if (!reached && left && !terminal && stages.hand_over(c)) {
        need_sense = need_meta = true;
      } else if (reached || left) {
        const int prev = stages.active();
        try {
          if (!cfg.exits.search) stages.activate(c, ws.goal, reached ? prev : -1);
          const Vec2 done = exit_goal;
          refresh_exit(c, reached ? &done : nullptr);
        } catch (const DeadEndError&) {
          return finish(Termination::DeadEnd);
        } catch (const OutOfBoundsError&) {
          return finish(Termination::Collision);
        }
        need_sense = need_meta = true;
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
      nav.window = ctx.window;
      nav.obstacles.clear();
      for (const auto& [i, o] : memory) nav.obstacles.push_back({i, o});
      local_goal = exit_goal;
      if (cfg.waypoints && cfg.use_stages && !terminal)
        local_goal = stage_waypoint(stages.active_rect(), ws, c, exit_goal, cfg.waypoint_inflate,
                                    cfg.waypoint_resolution);
      else if (cfg.waypoints && terminal)
        local_goal = stage_waypoint(cfg.use_stages ? stages.active_rect() : Rect{Vec2::Zero(), Vec2::Constant(ws.side_length)},
                                    ws, c, ws.goal, cfg.waypoint_inflate, cfg.waypoint_resolution);
      nav.stage_goal = local_goal;
      need_meta = true;
    }
    spec.context = nav;
    const double body = spec.body(z.q);
    const auto active = active_set(c, nav, cfg.d_hat, body);

    if (need_meta) {
      MetaInput in;
      in.position = c;
      in.velocity = spec.velocity(z.p).segment<2>(f);
      if (perturb) in.velocity = perturb->velocity(in.velocity, rng);
      in.stage_goal = local_goal;
      in.body = body;
      in.d_hat = cfg.d_hat;
      in.context = &nav;
      in.active = active;
      proposal = meta.propose(in);
    }

    // committed coefficients: meta proposal plus the persistent secant offsets
    auto off = [&](Kind k, int i) {
      const auto it = offset.find({k, i});
      return it == offset.end() ? 0.0 : it->second;
    };
    weights.beta = std::max(0.0, proposal.beta + off(Kind::Beta, 0));
    weights.lambda = std::max(0.0, proposal.lambda + off(Kind::Lambda, 0));
    weights.mu = std::max(0.0, proposal.mu + off(Kind::Mu, 0));
    weights.alpha.clear();
    for (const auto& [i, o] : memory) {
      const auto it = proposal.alpha.find(i);
      const double a = (it == proposal.alpha.end() ? 0.0 : it->second) + off(Kind::Alpha, i);
      if (a > 0.0) weights.alpha[i] = a;
    }
    weights.u_f = u_f;
    spec.weights = weights;

    // shape horizon: re-target the scale and collect predicted clearances
    if (is_ring && n % cfg.T_o == 0) {
      std::vector<Obstacle> near;
      for (const auto& [i, o] : memory)
        if (signed_distance(o, c) < body_nominal + cfg.d_hat + 1.0) near.push_back(o);
      const double d_min = geom.boundary_clearance(c, z.q[si], near);
      s_target = scale_target(std::isfinite(d_min) ? d_min : 1e9, cfg.agent.ring.s0, cfg.agent.ring.delta);
      spec.shape.s_target = s_target;
      shape_qoi.clear();
      double s = z.q[si], ps = z.p[si];
      VecX q_tmp = z.q;
      for (int k = 0; k < cfg.T_o; ++k) {
        q_tmp[si] = s;
        const double g = potential_grad(q_tmp, spec)[si];
        ps -= cfg.tau * (g + fixed_damping[si] * ps / cfg.agent.ring.M_s);
        s += cfg.tau * ps / cfg.agent.ring.M_s;
        if (!(s > 0.0)) s = 1e-6;
        const double d = geom.boundary_clearance(c, s, near);
        if (std::isfinite(d)) shape_qoi.push_back(d);
      }
    }
    spec.shape.s_target = s_target;

    PhaseState z_next;
    try {
      z_next = step_symplectic_euler(z, potential_grad(z.q, spec), weights.mu * damping_scale, u_f,
                                     spec.mass, cfg.tau, selectors);
    } catch (const NumericError&) {
      res.note = "non-finite state";
      return finish(Termination::Collision);
    }
    if (si >= 0 && !(z_next.q[si] > 1e-6)) {
      z_next.q[si] = 1e-6;
      z_next.p[si] = 0.0;
    }
    if (cfg.v_max > 0.0) {
      const Vec2 v = z_next.p.segment<2>(f) / cfg.agent.M_c;
      if (v.norm() > cfg.v_max) z_next.p.segment<2>(f) *= cfg.v_max / v.norm();
    }

    Observables obs = compute_observables(z_next, spec, ws.goal, shape_qoi);
    if (perturb) obs.speed = perturb->velocity(spec.velocity(z_next.p).segment<2>(f), rng).norm();

    if (cfg.adapt.enabled) {
      const auto& A = cfg.adapt;
      // I_t: beta, lambda, the k_alpha nearest active obstacles, mu
      std::vector<std::pair<double, int>> near_active;
      for (int i : active) {
        const Obstacle* o = nav.find(i);
        near_active.push_back({signed_distance(*o, z_next.q.segment<2>(f)), i});
      }
      std::sort(near_active.begin(), near_active.end());
      std::vector<Key> keys{{Kind::Beta, 0}, {Kind::Lambda, 0}};
      for (int k = 0; k < std::min<int>(A.k_alpha, static_cast<int>(near_active.size())); ++k)
        keys.push_back({Kind::Alpha, near_active[k].second});
      keys.push_back({Kind::Mu, 0});
      const int m = static_cast<int>(keys.size());
      VecX zeta(m), kappa(m);
      MatX J(3, m);
      for (int k = 0; k < m; ++k) {
        const Key& key = keys[k];
        switch (key.kind) {
          case Kind::Beta: zeta[k] = weights.beta; kappa[k] = A.kappa_beta; break;
          case Kind::Lambda: zeta[k] = weights.lambda; kappa[k] = A.kappa_beta; break;
          case Kind::Alpha: zeta[k] = weights.alpha_of(key.index); kappa[k] = A.kappa_alpha; break;
          case Kind::Mu: zeta[k] = weights.mu; kappa[k] = A.kappa_gamma; break;
        }
        const auto it = jac.find(key);
        J.col(k) = it == jac.end() ? prior_column(key, A.j0_scale) : it->second;
      }
      const Vec3 y = obs.y();
      if (have_prev) {
        VecX dz(m);
        for (int k = 0; k < m; ++k) {
          const auto it = zeta_prev.find(keys[k]);
          dz[k] = it == zeta_prev.end() ? 0.0 : zeta[k] - it->second;
        }
        // only a genuine secant pair updates J
        if (dz.squaredNorm() > A.eps) {
          J = secant_jacobian_update(J, y - y_prev, dz, A.rho, A.eps);
          for (int k = 0; k < m; ++k) jac[keys[k]] = J.col(k);
        }
        if (A.learn_port) {
          const Vec2 du = u_f - u_prev;
          if (du.squaredNorm() > A.eps)
            P_learned = A.rho * P_learned + (1.0 - A.rho) * (y - y_prev) * du.transpose() / (du.squaredNorm() + A.eps);
        }
      }
      const Vec3 target = observable_target(y, A.mode, A.setpoints);
      const Vec3 dy_des = target - y;
      const VecX step = tikhonov_step(J, dy_des, A.lambda_zeta);
      const VecX zeta_new = project_update(zeta, step, kappa, A.form);
      for (int k = 0; k < m; ++k) offset[keys[k]] += zeta_new[k] - zeta[k];

      u_prev = u_f;
      if (A.port) {
        Eigen::Matrix<double, 3, 2> P = P_learned;
        if (!A.learn_port || P.isZero()) {
          const Vec2 v = spec.velocity(z_next.p).segment<2>(f);
          Vec2 h = v.norm() > 1e-6 ? Vec2(v.normalized()) : Vec2(local_goal - z_next.q.segment<2>(f));
          if (h.norm() > 1e-12) h.normalize();
          P.setZero();
          P.row(2) = -A.kappa_v * h.transpose();
        }
        const Vec3 r = dy_des - J * step;
        u_f = port_correction(P, r, A.lambda_u, A.u_lo, A.u_hi);
      } else {
        u_f.setZero();
      }
      zeta_prev.clear();
      for (int k = 0; k < m; ++k) zeta_prev[keys[k]] = zeta[k];
      y_prev = y;
      have_prev = true;
    }

    z = z_next;
    record((n + 1) * cfg.tau, obs, static_cast<int>(active.size()));
    if (cfg.record_snapshots && (n + 1) % std::max(1, cfg.snapshot_every) == 0) snapshot();
    const Vec2 c_next = z.q.segment<2>(f);
    if (res.steps.back().true_clearance < 0.0) return finish(Termination::Collision);
    if ((c_next - ws.goal).norm() < cfg.eps_goal) {
      snapshot();
      return finish(Termination::Success);
    }
    const int N = static_cast<int>(res.steps.size()) - 1;
    if (N >= cfg.stuck_window &&
        (c_next - res.position(static_cast<std::size_t>(N - cfg.stuck_window))).norm() < cfg.eps_stuck)
      return finish(Termination::Stuck);
  }
  return finish(Termination::Timeout);
}

}  // namespace grlsnam
