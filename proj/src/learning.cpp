#include "grlsnam/learning.hpp"

#include "grlsnam/generate.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace grlsnam {

using json = nlohmann::json;

void RegressionProblem::validate() const {
  if (targets.empty()) throw ConfigError("regression problem has no steps");
  if (grads.size() != targets.size()) throw ConfigError("targets and gradients differ in length");
  const auto m = grads.front().cols();
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (grads[t].rows() != targets[t].size() || grads[t].cols() != m)
      throw ConfigError("feature gradient shape mismatch at step " + std::to_string(t));
  }
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be >= 0");
}

Gram gram_matrix(const RegressionProblem& problem) {
  problem.validate();
  const int m = problem.features();
  Gram g;
  g.G = MatX::Zero(m, m);
  for (const auto& gt : problem.grads) g.G.noalias() += gt.transpose() * gt;
  if (m == 0) return g;
  Eigen::SelfAdjointEigenSolver<MatX> es(g.G, Eigen::EigenvaluesOnly);
  g.min_eigenvalue = es.eigenvalues().minCoeff();
  g.max_eigenvalue = es.eigenvalues().maxCoeff();
  return g;
}

namespace {

VecX normal_rhs(const RegressionProblem& problem) {
  VecX b = VecX::Zero(problem.features());
  for (int t = 0; t < problem.steps(); ++t) b.noalias() += problem.grads[t].transpose() * problem.targets[t];
  return b;
}

// relative threshold below which G is treated as rank deficient
constexpr double kPeTolerance = 1e-12;

}  // namespace

VecX identify_weights(const RegressionProblem& problem) {
  const Gram g = gram_matrix(problem);
  const int m = problem.features();
  if (m == 0) throw PersistentExcitationError("no features to identify");
  const double scale = std::max(1.0, g.max_eigenvalue);
  if (problem.ridge == 0.0 && g.min_eigenvalue <= kPeTolerance * scale)
    throw PersistentExcitationError("persistent excitation violated: min eigenvalue " +
                                    std::to_string(g.min_eigenvalue));
  const MatX A = g.G + problem.ridge * MatX::Identity(m, m);
  Eigen::LDLT<MatX> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw PersistentExcitationError("normal equations are singular");
  return ldlt.solve(normal_rhs(problem));
}

RegressionProblem regression_from_trajectory(const Trajectory& traj, const HamiltonianSpec& spec,
                                             double tau, double ridge) {
  if (traj.states.size() < 2) throw ConfigError("trajectory needs at least two states");
  HamiltonianSpec bare = spec;
  bare.weights = EnergyWeights{};
  bare.weights.beta = 0.0;
  bare.weights.lambda = 0.0;
  RegressionProblem pr;
  pr.ridge = ridge;
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    const auto& z = traj.states[t];
    const FeatureSet f = features(z.q, spec);
    pr.targets.push_back((z.p - traj.states[t + 1].p) / tau - potential_grad(z.q, bare));
    pr.grads.push_back(f.grads);
    pr.phi.push_back(f.phi);
  }
  return pr;
}

GdLog identify_weights_gd(const RegressionProblem& problem, double step, int max_iter, double tol,
                          const VecX* eta_ref) {
  const Gram g = gram_matrix(problem);
  const int m = problem.features();
  const MatX A = g.G + problem.ridge * MatX::Identity(m, m);
  const VecX b = normal_rhs(problem);
  if (step <= 0.0) step = 1.0 / std::max(g.max_eigenvalue + problem.ridge, 1e-300);
  double phi_max = 1.0;
  if (!problem.phi.empty()) {
    phi_max = 0.0;
    for (const auto& p : problem.phi) phi_max = std::max(phi_max, p.norm());
  }
  GdLog log;
  log.eta = VecX::Zero(m);
  for (int k = 0; k < max_iter; ++k) {
    if (eta_ref) log.error.push_back((log.eta - *eta_ref).norm());
    const VecX next = log.eta - step * (A * log.eta - b);
    const double u = (next - log.eta).norm() * phi_max;
    log.eta = next;
    log.update.push_back(u);
    log.iterations = k + 1;
    if (u < tol) break;
  }
  return log;
}

double meta_loss(const std::vector<VecX>& q, const std::vector<VecX>& v,
                 const std::vector<VecX>& q_ref, const std::vector<VecX>& v_ref, double mu,
                 double mu_ref, const MetaLossWeights& w, double l_multi) {
  if (q.size() != q_ref.size() || v.size() != v_ref.size())
    throw ConfigError("rollout and reference lengths differ");
  double eq = 0.0, ev = 0.0;
  for (std::size_t t = 0; t < q.size(); ++t) eq += (q[t] - q_ref[t]).squaredNorm();
  for (std::size_t t = 0; t < v.size(); ++t) ev += (v[t] - v_ref[t]).squaredNorm();
  if (!q.empty()) eq /= static_cast<double>(q.size());
  if (!v.empty()) ev /= static_cast<double>(v.size());
  return w.w_q * eq + w.w_v * ev + w.w_mu * (mu - mu_ref) * (mu - mu_ref) + w.w_d * l_multi;
}

double multi_start_penalty_from_clearances(const std::vector<double>& clearances,
                                           const MultiStartOptions& o) {
  if (clearances.empty()) return 0.0;
  double sum = 0.0;
  for (double clr : clearances) {
    const double d = o.literal ? o.r_min - clr : std::max(clr - o.r_min, o.floor);
    sum += ipc_barrier(d, o.d_hat);
  }
  return sum / static_cast<double>(clearances.size());
}

double multi_start_penalty(const EnvironmentContext& ctx, const EnergyWeights& weights,
                           const MultiStartOptions& o, Rng& rng) {
  if (ctx.obstacles.empty()) return 0.0;
  if (o.trials < 1) throw ConfigError("multi-start penalty needs at least one trial");
  const HamiltonianSpec spec = point_spec(1.0, ctx, weights, o.d_hat, 0.0);
  const GradFn grad = [&](const VecX& q) { return potential_grad(q, spec); };
  std::vector<double> clr;
  for (int m = 0; m < o.trials; ++m) {
    const auto k = static_cast<std::size_t>(uniform01(rng) * ctx.obstacles.size());
    const Obstacle& ob = ctx.obstacles[std::min(k, ctx.obstacles.size() - 1)].obstacle;
    const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const Vec2 dir(std::cos(ang), std::sin(ang));
    PhaseState z;
    z.q = ob.center + dir * (ob.radius + o.r_min + uniform(rng, 0.0, o.d_hat));
    z.p = -dir * o.speed;
    auto surface = [&](const VecX& q) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& io : ctx.obstacles) best = std::min(best, signed_distance(io.obstacle, q.head<2>()));
      return best;
    };
    double lo = surface(z.q);
    for (int t = 0; t < o.steps; ++t) {
      z = step_leapfrog(z, grad, spec.mass, o.tau);
      if (!z.q.allFinite()) {
        lo = -std::numeric_limits<double>::infinity();
        break;
      }
      lo = std::min(lo, surface(z.q));
    }
    clr.push_back(lo);
  }
  return multi_start_penalty_from_clearances(clr, o);
}

// ---------------------------------------------------------------- regressor

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double softplus_inv(double y) {
  y = std::max(y, 1e-9);
  return y > 30.0 ? y : std::log(std::expm1(y));
}

}  // namespace

MetaRegressor::MetaRegressor(int embed, int hidden) : embed_(embed), hidden_(hidden) {
  if (embed < 1 || hidden < 1) throw ConfigError("regressor sizes must be positive");
  int o = 0;
  w1_ = o; o += embed_ * kTokenDim;
  b1_ = o; o += embed_;
  w2_ = o; o += hidden_ * x_dim();
  b2_ = o; o += hidden_;
  wg_ = o; o += 3 * hidden_;
  bg_ = o; o += 3;
  wah_ = o; o += hidden_;
  wae_ = o; o += embed_;
  ba_ = o; o += 1;
  xi_ = VecX::Zero(o);
}

void MetaRegressor::init_random(std::uint64_t seed, double scale) {
  Rng rng = make_rng(seed, 0x5e7);
  for (int i = 0; i < xi_.size(); ++i) xi_[i] = scale * normal(rng);
}

void MetaRegressor::init_to(const EnergyWeights& w, double alpha) {
  xi_.segment(wg_, 3 * hidden_).setZero();
  xi_[bg_ + 0] = softplus_inv(w.beta);
  xi_[bg_ + 1] = softplus_inv(w.lambda);
  xi_[bg_ + 2] = softplus_inv(w.mu);
  xi_.segment(wah_, hidden_).setZero();
  xi_.segment(wae_, embed_).setZero();
  xi_[ba_] = softplus_inv(alpha);
}

VecX MetaRegressor::head_mask() const {
  VecX m = VecX::Zero(xi_.size());
  m.segment(wg_, xi_.size() - wg_).setOnes();
  return m;
}

MetaOutput MetaRegressor::forward(const MetaInput& in, Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  const int n = in.context ? in.context->constraint_count() : 0;
  c.index.clear();
  c.tokens.resize(kTokenDim, n);
  for (int i = 0; i < n; ++i) {
    const auto& io = in.context->obstacles[i];
    const Vec2 rel = (io.obstacle.center - in.position) / length_scale;
    const double dist = ((io.obstacle.center - in.position).norm() - io.obstacle.radius - in.body) / length_scale;
    c.tokens.col(i) << rel.x(), rel.y(), io.obstacle.radius / length_scale, dist;
    c.index.push_back(io.index);
  }
  const Eigen::Map<const MatX> W1(xi_.data() + w1_, embed_, kTokenDim);
  const Eigen::Map<const MatX> W2(xi_.data() + w2_, hidden_, x_dim());
  const Eigen::Map<const MatX> Wg(xi_.data() + wg_, 3, hidden_);
  c.e = ((W1 * c.tokens).colwise() + xi_.segment(b1_, embed_)).array().tanh().matrix();
  c.x = VecX::Zero(x_dim());
  if (n > 0) c.x.head(embed_) = c.e.rowwise().mean();
  const Vec2 g = (in.stage_goal - in.position) / goal_scale;
  c.x.tail<kContextDim>() << g.x(), g.y(), g.norm(), in.velocity.norm();
  c.h = ((W2 * c.x) + xi_.segment(b2_, hidden_)).array().tanh().matrix();
  c.o = Wg * c.h + xi_.segment<3>(bg_);
  c.s.resize(n);
  const double base = xi_.segment(wah_, hidden_).dot(c.h) + xi_[ba_];
  for (int i = 0; i < n; ++i) c.s[i] = base + xi_.segment(wae_, embed_).dot(c.e.col(i));

  MetaOutput out;
  out.beta = softplus(c.o[0]);
  out.lambda = softplus(c.o[1]);
  out.mu = softplus(c.o[2]);
  for (int i = 0; i < n; ++i) {
    const bool wanted = in.active.empty() ||
                        std::find(in.active.begin(), in.active.end(), c.index[i]) != in.active.end();
    if (wanted) out.alpha[c.index[i]] = softplus(c.s[i]);
  }
  return out;
}

VecX MetaRegressor::backward(const Cache& c, const Eigen::Vector3d& d_out,
                             const std::map<int, double>& d_alpha) const {
  VecX g = VecX::Zero(xi_.size());
  const int n = static_cast<int>(c.index.size());
  const Eigen::Map<const MatX> W2(xi_.data() + w2_, hidden_, x_dim());
  const Eigen::Map<const MatX> Wg(xi_.data() + wg_, 3, hidden_);
  Eigen::Map<MatX> dW1(g.data() + w1_, embed_, kTokenDim);
  Eigen::Map<MatX> dW2(g.data() + w2_, hidden_, x_dim());
  Eigen::Map<MatX> dWg(g.data() + wg_, 3, hidden_);

  VecX dh = VecX::Zero(hidden_);
  MatX de = MatX::Zero(embed_, n);
  for (int k = 0; k < 3; ++k) {
    const double dok = d_out[k] * sigmoid(c.o[k]);
    dWg.row(k) += dok * c.h.transpose();
    g[bg_ + k] += dok;
    dh += dok * Wg.row(k).transpose();
  }
  for (int i = 0; i < n; ++i) {
    const auto it = d_alpha.find(c.index[i]);
    if (it == d_alpha.end()) continue;
    const double ds = it->second * sigmoid(c.s[i]);
    g.segment(wah_, hidden_) += ds * c.h;
    g.segment(wae_, embed_) += ds * c.e.col(i);
    g[ba_] += ds;
    dh += ds * xi_.segment(wah_, hidden_);
    de.col(i) += ds * xi_.segment(wae_, embed_);
  }
  const VecX dz = dh.array() * (1.0 - c.h.array().square());
  dW2 += dz * c.x.transpose();
  g.segment(b2_, hidden_) += dz;
  const VecX dx = W2.transpose() * dz;
  if (n > 0) de.colwise() += dx.head(embed_) / static_cast<double>(n);
  const MatX da = de.array() * (1.0 - c.e.array().square());
  dW1 += da * c.tokens.transpose();
  g.segment(b1_, embed_) += da.rowwise().sum();
  return g;
}

// ---------------------------------------------------------------- training

MetaInput SceneDatum::meta_input() const {
  MetaInput in;
  in.position = z0.q.head<2>();
  in.velocity = z0.p.head<2>() / mass;
  in.stage_goal = ctx.stage_goal;
  in.body = body;
  in.d_hat = d_hat;
  in.context = &ctx;
  return in;
}

void rollout_datum(const SceneDatum& d, const EnergyWeights& w, std::vector<VecX>& q,
                   std::vector<VecX>& v) {
  const HamiltonianSpec spec = point_spec(d.mass, d.ctx, w, d.d_hat, d.body);
  IntegratorConfig ic;
  ic.tau = d.tau;
  ic.horizon = d.horizon;
  const Trajectory tr = rollout(d.z0, spec, ic, w.mu, Vec2::Zero(), PortSelectors(spec.layout));
  q.clear();
  v.clear();
  for (std::size_t t = 1; t < tr.states.size(); ++t) {
    q.push_back(tr.states[t].q);
    v.push_back(spec.velocity(tr.states[t].p));
  }
  // a diverged rollout is padded with its last state so lengths match
  while (static_cast<int>(q.size()) < d.horizon) {
    q.push_back(q.empty() ? d.z0.q : q.back());
    v.push_back(v.empty() ? VecX(spec.velocity(d.z0.p)) : v.back());
  }
}

SceneDatum make_scene_datum(const EnvironmentContext& ctx, const PhaseState& z0,
                            const EnergyWeights& ref, double d_hat, int horizon, double tau,
                            double body) {
  if (horizon < 1) throw ConfigError("datum horizon must be >= 1");
  SceneDatum d;
  d.ctx = ctx;
  d.z0 = z0;
  d.d_hat = d_hat;
  d.horizon = horizon;
  d.tau = tau;
  d.body = body;
  d.ref = ref;
  rollout_datum(d, ref, d.q_ref, d.v_ref);
  return d;
}

std::vector<SceneDatum> make_dataset(const std::string& family, int scenes, int horizon, double tau,
                                     double d_hat, double half_extent, const EnergyWeights& base,
                                     double base_alpha, double spread, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xda7a);
  std::vector<SceneDatum> out;
  for (int k = 0; k < scenes; ++k) {
    const Workspace ws = generate_family(family, derive_seed(seed, static_cast<std::uint64_t>(k)));
    // a free point within d_hat of some obstacle surface
    Vec2 pos = ws.start;
    for (int t = 0; t < 1000; ++t) {
      const Vec2 cand(uniform(rng, 0.0, ws.side_length), uniform(rng, 0.0, ws.side_length));
      const double clr = true_clearance(ws, cand, 0.0, d_hat + 1.0);
      if (clr > 0.1 * d_hat && clr < d_hat) {
        pos = cand;
        break;
      }
    }
    EnvironmentContext ctx = sense(ws, pos, half_extent);
    ctx.stage_goal = ws.goal;
    auto jitter = [&](double v) { return v * (1.0 + spread * uniform(rng, -1.0, 1.0)); };
    EnergyWeights ref = base;
    ref.beta = jitter(base.beta);
    ref.lambda = jitter(base.lambda);
    ref.mu = jitter(base.mu);
    ref.alpha.clear();
    for (const auto& io : ctx.obstacles) ref.alpha[io.index] = jitter(base_alpha);
    const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    PhaseState z0;
    z0.q = pos;
    z0.p = uniform(rng, 0.3, 1.0) * Vec2(std::cos(ang), std::sin(ang));
    out.push_back(make_scene_datum(ctx, z0, ref, d_hat, horizon, tau));
  }
  return out;
}

namespace {

EnergyWeights to_weights(const MetaOutput& o) {
  EnergyWeights w;
  w.beta = o.beta;
  w.lambda = o.lambda;
  w.mu = o.mu;
  w.alpha = o.alpha;
  return w;
}

double weights_loss(const SceneDatum& d, const EnergyWeights& w, const TrainConfig& cfg,
                    std::uint64_t penalty_seed) {
  std::vector<VecX> q, v;
  rollout_datum(d, w, q, v);
  double multi = 0.0;
  if (cfg.use_multi && cfg.loss.w_d != 0.0) {
    Rng rng = make_rng(penalty_seed, 0x3a1);
    MultiStartOptions mo = cfg.multi;
    mo.d_hat = d.d_hat;
    multi = multi_start_penalty(d.ctx, w, mo, rng);
  }
  return meta_loss(q, v, d.q_ref, d.v_ref, w.mu, d.ref.mu, cfg.loss, multi);
}

// dL/d(beta, lambda, mu) and dL/dalpha by central differences
double loss_and_output_grad(const SceneDatum& d, const MetaOutput& out, const TrainConfig& cfg,
                            std::uint64_t penalty_seed, Eigen::Vector3d& d_out,
                            std::map<int, double>& d_alpha) {
  const EnergyWeights w0 = to_weights(out);
  const double L0 = weights_loss(d, w0, cfg, penalty_seed);
  auto central = [&](auto&& set) {
    EnergyWeights wp = w0, wm = w0;
    const double h = set(wp, wm);
    return (weights_loss(d, wp, cfg, penalty_seed) - weights_loss(d, wm, cfg, penalty_seed)) / (2.0 * h);
  };
  auto step = [&](double x) { return cfg.fd_rel * std::max(1.0, std::abs(x)); };
  d_out[0] = central([&](EnergyWeights& p, EnergyWeights& m) {
    const double h = step(w0.beta);
    p.beta += h;
    m.beta -= h;
    return h;
  });
  d_out[1] = central([&](EnergyWeights& p, EnergyWeights& m) {
    const double h = step(w0.lambda);
    p.lambda += h;
    m.lambda -= h;
    return h;
  });
  d_out[2] = central([&](EnergyWeights& p, EnergyWeights& m) {
    const double h = step(w0.mu);
    p.mu += h;
    m.mu -= h;
    return h;
  });
  d_alpha.clear();
  for (const auto& [idx, a] : w0.alpha) {
    d_alpha[idx] = central([&, idx = idx, a = a](EnergyWeights& p, EnergyWeights& m) {
      const double h = step(a);
      p.alpha[idx] += h;
      m.alpha[idx] -= h;
      return h;
    });
  }
  return L0;
}

struct Momentum {
  VecX velocity;
  void apply(VecX& xi, const VecX& grad, const TrainConfig& cfg) {
    if (velocity.size() != xi.size()) velocity = VecX::Zero(xi.size());
    velocity = cfg.momentum * velocity - cfg.lr * grad;
    xi += velocity;
  }
};

VecX clip(VecX g, double limit) {
  const double n = g.norm();
  if (limit > 0.0 && n > limit) g *= limit / n;
  return g;
}

}  // namespace

double datum_loss(const MetaRegressor& reg, const SceneDatum& d, const TrainConfig& cfg) {
  return weights_loss(d, to_weights(reg.forward(d.meta_input())), cfg, cfg.seed);
}

TrainLog train_offline(MetaRegressor& reg, const std::vector<SceneDatum>& data,
                       const TrainConfig& cfg) {
  if (data.empty()) throw ConfigError("training dataset is empty");
  if (cfg.batch < 1 || cfg.epochs < 0) throw ConfigError("invalid batch size or epoch count");
  const VecX mask = cfg.heads_only ? reg.head_mask() : VecX::Ones(reg.size());
  Momentum opt;
  TrainLog log;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t b0 = 0; b0 < data.size(); b0 += cfg.batch) {
      const std::size_t b1 = std::min(data.size(), b0 + cfg.batch);
      VecX grad = VecX::Zero(reg.size());
      for (std::size_t i = b0; i < b1; ++i) {
        MetaRegressor::Cache cache;
        const MetaOutput out = reg.forward(data[i].meta_input(), &cache);
        Eigen::Vector3d d_out;
        std::map<int, double> d_alpha;
        const double L = loss_and_output_grad(data[i], out, cfg, cfg.seed, d_out, d_alpha);
        if (!std::isfinite(L) || !d_out.allFinite())
          throw NumericError("meta loss diverged at epoch " + std::to_string(epoch) + ", sample " +
                             std::to_string(i) + " (loss " + std::to_string(L) + ")");
        total += L;
        grad += reg.backward(cache, d_out, d_alpha);
      }
      grad /= static_cast<double>(b1 - b0);
      opt.apply(reg.params(), clip(grad.cwiseProduct(mask), cfg.clip), cfg);
    }
    log.epoch_loss.push_back(total / static_cast<double>(data.size()));
  }
  return log;
}

TrainLog fit_outputs(MetaRegressor& reg, const std::vector<MetaInput>& inputs,
                     const std::vector<MetaOutput>& targets, const TrainConfig& cfg) {
  if (inputs.empty() || inputs.size() != targets.size()) throw ConfigError("fit_outputs: bad dataset");
  const VecX mask = cfg.heads_only ? reg.head_mask() : VecX::Ones(reg.size());
  Momentum opt;
  TrainLog log;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    VecX grad = VecX::Zero(reg.size());
    double total = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      MetaRegressor::Cache cache;
      const MetaOutput o = reg.forward(inputs[i], &cache);
      const MetaOutput& t = targets[i];
      const Eigen::Vector3d r(o.beta - t.beta, o.lambda - t.lambda, o.mu - t.mu);
      total += r.squaredNorm();
      std::map<int, double> da;
      for (const auto& [idx, a] : o.alpha) {
        const auto it = t.alpha.find(idx);
        const double ra = a - (it == t.alpha.end() ? 0.0 : it->second);
        total += ra * ra;
        da[idx] = 2.0 * ra;
      }
      grad += reg.backward(cache, 2.0 * r, da);
    }
    const double n = static_cast<double>(inputs.size());
    log.epoch_loss.push_back(total / n);
    if (!std::isfinite(total)) throw NumericError("supervised loss diverged");
    opt.apply(reg.params(), clip(grad.cwiseProduct(mask) / n, cfg.clip), cfg);
  }
  return log;
}

// ---------------------------------------------------------------- checkpoints

void save_checkpoint(std::ostream& out, const MetaRegressor& reg) {
  static_assert(std::endian::native == std::endian::little, "checkpoints assume little-endian doubles");
  json h = {{"format", "grlsnam-meta"},
            {"version", 1},
            {"embed", reg.embed()},
            {"hidden", reg.hidden()},
            {"token_dim", MetaRegressor::kTokenDim},
            {"context_dim", MetaRegressor::kContextDim},
            {"n_params", reg.size()},
            {"token_features", {"rel_x", "rel_y", "radius", "surface_distance"}},
            {"context_features", {"goal_x", "goal_y", "goal_distance", "speed"}},
            {"outputs", {"beta", "lambda", "mu", "alpha"}},
            {"length_scale", reg.length_scale},
            {"goal_scale", reg.goal_scale}};
  out << h.dump() << '\n';
  out.write(reinterpret_cast<const char*>(reg.params().data()),
            static_cast<std::streamsize>(sizeof(double) * reg.size()));
  if (!out) throw Error("failed to write checkpoint");
}

MetaRegressor load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("checkpoint header missing");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("checkpoint header is not JSON: ") + e.what());
  }
  if (h.value("format", "") != "grlsnam-meta") throw SchemaError("not a regressor checkpoint");
  if (h.value("version", 0) != 1) throw SchemaError("unsupported checkpoint version");
  MetaRegressor reg(h.at("embed").get<int>(), h.at("hidden").get<int>());
  if (h.at("n_params").get<int>() != reg.size()) throw SchemaError("checkpoint parameter count mismatch");
  reg.length_scale = h.value("length_scale", 1.0);
  reg.goal_scale = h.value("goal_scale", 10.0);
  in.read(reinterpret_cast<char*>(reg.params().data()), static_cast<std::streamsize>(sizeof(double) * reg.size()));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * reg.size()))
    throw SchemaError("checkpoint is truncated");
  return reg;
}

void save_checkpoint(const std::string& path, const MetaRegressor& reg) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  save_checkpoint(f, reg);
}

MetaRegressor load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  return load_checkpoint(f);
}

}  // namespace grlsnam
