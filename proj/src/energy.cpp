#include "grlsnam/energy.hpp"

#include <algorithm>
#include <cmath>

namespace grlsnam {

double ipc_barrier(double d, double d_hat) {
  if (d <= 0.0) return kBarrierCeiling;
  if (d >= d_hat) return 0.0;
  const double g = d - d_hat;
  return std::clamp(-g * g * std::log(d / d_hat), 0.0, kBarrierCeiling);
}

double ipc_barrier_grad(double d, double d_hat) {
  if (d <= 0.0 || d >= d_hat) return 0.0;
  const double g = d - d_hat;
  return std::clamp(-2.0 * g * std::log(d / d_hat) - g * g / d, -kBarrierCeiling, kBarrierCeiling);
}

double EnergyWeights::alpha_sum() const {
  double s = 0.0;
  for (const auto& [k, v] : alpha) s += v;
  return s;
}

void EnergyWeights::validate() const {
  if (!(beta >= 0.0) || !(lambda >= 0.0) || !(mu >= 0.0))
    throw ConfigError("energy weights: beta, lambda, mu must be nonnegative");
  for (const auto& [k, v] : alpha)
    if (!(v >= 0.0)) throw ConfigError("energy weights: alpha must be nonnegative");
  if (!u_f.allFinite()) throw ConfigError("energy weights: port input must be finite");
}

void HamiltonianSpec::validate() const {
  const int n = layout.dim();
  if (mass.rows() != n || mass.cols() != n) throw ConfigError("mass matrix has the wrong size");
  if (!mass.isApprox(mass.transpose())) throw ConfigError("mass matrix must be symmetric");
  if (mass.llt().info() != Eigen::Success) throw ConfigError("mass matrix must be positive definite");
  if (!(d_hat > 0.0)) throw ConfigError("d_hat must be positive");
  weights.validate();
}

double HamiltonianSpec::body(const VecX& q) const {
  const int si = layout.scale_index();
  return si >= 0 ? body_radius + shape_radius * q[si] : body_radius;
}

VecX HamiltonianSpec::velocity(const VecX& p) const {
  if (mass.isDiagonal()) return p.cwiseQuotient(mass.diagonal());
  return mass.llt().solve(p);
}

HamiltonianSpec point_spec(double mass, const EnvironmentContext& ctx, const EnergyWeights& w,
                           double d_hat, double body_radius) {
  HamiltonianSpec s;
  s.mass = MatX::Identity(2, 2) * mass;
  s.context = ctx;
  s.weights = w;
  s.d_hat = d_hat;
  s.body_radius = body_radius;
  return s;
}

std::vector<double> barrier_distances(const VecX& q, const HamiltonianSpec& spec) {
  const Vec2 c = spec.layout.frame_of(q);
  const double body = spec.body(q);
  std::vector<double> out;
  out.reserve(spec.context.obstacles.size());
  for (const auto& io : spec.context.obstacles) out.push_back(signed_distance(io.obstacle, c) - body);
  return out;
}

namespace {

double object_energy(const VecX& q, const HamiltonianSpec& spec) {
  const int si = spec.layout.scale_index();
  if (!spec.shape.enabled || si < 0) return 0.0;
  const double s = q[si], st = spec.shape.s_target;
  const double diff = (s * s - st * st) * spec.shape.a_ref;
  return 0.5 * spec.shape.k_bulk * diff * diff;
}

double object_energy_ds(const VecX& q, const HamiltonianSpec& spec) {
  const int si = spec.layout.scale_index();
  if (!spec.shape.enabled || si < 0) return 0.0;
  const double s = q[si], st = spec.shape.s_target;
  const double a = spec.shape.a_ref;
  return 2.0 * spec.shape.k_bulk * a * s * (s * s * a - st * st * a);
}

}  // namespace

EnergyBreakdown potential_terms(const VecX& q, const HamiltonianSpec& spec) {
  EnergyBreakdown e;
  const auto& L = spec.layout;
  if (L.sensor_dim > 0) e.sensor = spec.sensor_weight * q.head(L.sensor_dim).squaredNorm();
  e.goal = (L.frame_of(q) - spec.context.stage_goal).squaredNorm();
  e.object = object_energy(q, spec);
  const auto d = barrier_distances(q, spec);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double a = spec.weights.alpha_of(spec.context.obstacles[i].index);
    if (a != 0.0) e.barrier += a * ipc_barrier(d[i], spec.d_hat);
  }
  e.total = e.sensor + spec.weights.beta * e.goal + spec.weights.lambda * e.object + e.barrier;
  return e;
}

double potential(const VecX& q, const HamiltonianSpec& spec) { return potential_terms(q, spec).total; }

VecX potential_grad(const VecX& q, const HamiltonianSpec& spec, bool* degenerate) {
  const auto& L = spec.layout;
  VecX g = VecX::Zero(q.size());
  if (L.sensor_dim > 0) g.head(L.sensor_dim) = 2.0 * spec.sensor_weight * q.head(L.sensor_dim);
  const Vec2 c = L.frame_of(q);
  g.segment<2>(L.frame()) += 2.0 * spec.weights.beta * (c - spec.context.stage_goal);
  const int si = L.scale_index();
  if (si >= 0) g[si] += spec.weights.lambda * object_energy_ds(q, spec);
  const double body = spec.body(q);
  for (const auto& io : spec.context.obstacles) {
    const double a = spec.weights.alpha_of(io.index);
    if (a == 0.0) continue;
    const Vec2 rel = c - io.obstacle.center;
    const double n = rel.norm();
    const double db = ipc_barrier_grad(n - io.obstacle.radius - body, spec.d_hat);
    if (db == 0.0) continue;
    if (n == 0.0) {
      if (degenerate) *degenerate = true;
    } else {
      g.segment<2>(L.frame()) += a * db * rel / n;
    }
    if (si >= 0) g[si] -= a * db * spec.shape_radius;
  }
  return g;
}

double kinetic(const VecX& p, const HamiltonianSpec& spec) { return 0.5 * p.dot(spec.velocity(p)); }

double hamiltonian(const PhaseState& z, const HamiltonianSpec& spec) {
  return kinetic(z.p, spec) + potential(z.q, spec);
}

FeatureSet features(const VecX& q, const HamiltonianSpec& spec) {
  const auto& L = spec.layout;
  std::vector<std::size_t> order(spec.context.obstacles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.context.obstacles[a].index < spec.context.obstacles[b].index;
  });
  const int m = static_cast<int>(order.size());
  FeatureSet f;
  f.phi = VecX::Zero(2 + m);
  f.grads = MatX::Zero(q.size(), 2 + m);
  const Vec2 c = L.frame_of(q);
  f.phi[0] = (c - spec.context.stage_goal).squaredNorm();
  f.grads.block<2, 1>(L.frame(), 0) = 2.0 * (c - spec.context.stage_goal);
  f.phi[1] = object_energy(q, spec);
  const int si = L.scale_index();
  if (si >= 0) f.grads(si, 1) = object_energy_ds(q, spec);
  const double body = spec.body(q);
  for (int j = 0; j < m; ++j) {
    const auto& io = spec.context.obstacles[order[j]];
    f.obstacle_index.push_back(io.index);
    const Vec2 rel = c - io.obstacle.center;
    const double n = rel.norm();
    const double d = n - io.obstacle.radius - body;
    f.phi[2 + j] = ipc_barrier(d, spec.d_hat);
    const double db = ipc_barrier_grad(d, spec.d_hat);
    if (n > 0.0) f.grads.block<2, 1>(L.frame(), 2 + j) = db * rel / n;
    if (si >= 0) f.grads(si, 2 + j) = -db * spec.shape_radius;
  }
  return f;
}

VecX weights_to_eta(const EnergyWeights& w, const std::vector<int>& obstacle_index) {
  VecX eta(2 + obstacle_index.size());
  eta[0] = w.beta;
  eta[1] = w.lambda;
  for (std::size_t j = 0; j < obstacle_index.size(); ++j) eta[2 + j] = w.alpha_of(obstacle_index[j]);
  return eta;
}

}  // namespace grlsnam
