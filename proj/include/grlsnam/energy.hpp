#pragma once

#include "grlsnam/workspace.hpp"

#include <map>
#include <vector>

namespace grlsnam {

inline constexpr double kBarrierCeiling = 200.0;  // clamp and V_penalty

/// IPC barrier -(d - d_hat)^2 log(d / d_hat) on (0, d_hat), 0 beyond,
/// kBarrierCeiling for d <= 0. Clamped to [0, kBarrierCeiling].
double ipc_barrier(double d, double d_hat);

/// Derivative of ipc_barrier in d. Zero on the penalty plateau (d <= 0) and
/// for d >= d_hat; clamped to [-kBarrierCeiling, kBarrierCeiling].
double ipc_barrier_grad(double d, double d_hat);

/// Dual weights the meta-policy emits plus the frame friction and port.
struct EnergyWeights {
  double beta = 1.0;
  double lambda = 1.0;
  std::map<int, double> alpha;  // obstacle index -> barrier weight
  double mu = 0.0;
  Vec2 u_f = Vec2::Zero();

  double alpha_of(int index) const {
    const auto it = alpha.find(index);
    return it == alpha.end() ? 0.0 : it->second;
  }
  double alpha_sum() const;
  void validate() const;
};

/// Layout of q = [y (sensor), c (frame, 2), shape]. For the ring the shape
/// block is (theta, s) and s is the last coordinate.
struct StateLayout {
  int sensor_dim = 0;
  int shape_dim = 0;

  int dim() const { return sensor_dim + 2 + shape_dim; }
  int frame() const { return sensor_dim; }
  int scale_index() const { return shape_dim > 0 ? dim() - 1 : -1; }
  Vec2 frame_of(const VecX& q) const { return q.segment<2>(frame()); }
};

struct PhaseState {
  VecX q;
  VecX p;
};

/// Bulk term on the scale coordinate: (k/2)(A(s) - A(s_t))^2, A(s) = s^2 A_ref.
struct ShapeTerm {
  bool enabled = false;
  double k_bulk = 1.5;
  double a_ref = 1.0;
  double s_target = 1.0;  // frozen within a shape horizon
};

struct HamiltonianSpec {
  StateLayout layout;
  MatX mass;  // SPD, dim x dim
  EnergyWeights weights;
  EnvironmentContext context;  // obstacles and stage goal
  double d_hat = 1.0;
  double sensor_weight = 1.0;  // S = sensor_weight * I
  // Barrier distance d_i = ||c - c_i|| - r_i - body, body = body_radius +
  // shape_radius * s (the second part only when a scale coordinate exists).
  double body_radius = 0.0;
  double shape_radius = 0.0;
  ShapeTerm shape;

  void validate() const;
  double body(const VecX& q) const;
  VecX velocity(const VecX& p) const;  // M^{-1} p
};

/// Builds a spec for a point agent (no sensor or shape coordinates).
HamiltonianSpec point_spec(double mass, const EnvironmentContext& ctx, const EnergyWeights& w,
                           double d_hat, double body_radius = 0.0);

struct EnergyBreakdown {
  double sensor = 0.0;
  double goal = 0.0;    // unweighted ||c - goal||^2
  double object = 0.0;  // unweighted E_obj
  double barrier = 0.0;  // sum_i alpha_i b(d_i)
  double total = 0.0;   // sensor + beta goal + lambda object + barrier
};

EnergyBreakdown potential_terms(const VecX& q, const HamiltonianSpec& spec);
double potential(const VecX& q, const HamiltonianSpec& spec);

/// Analytic gradient. An obstacle whose centre coincides with c contributes
/// nothing and sets *degenerate.
VecX potential_grad(const VecX& q, const HamiltonianSpec& spec, bool* degenerate = nullptr);

double kinetic(const VecX& p, const HamiltonianSpec& spec);
double hamiltonian(const PhaseState& z, const HamiltonianSpec& spec);

/// Barrier distance of every context obstacle at q, ordered as in the context.
std::vector<double> barrier_distances(const VecX& q, const HamiltonianSpec& spec);

/// Linear-in-weights view: phi = [E_goal, E_obj, b(d_1) ... b(d_m)] with
/// obstacles in ascending index order; grads has one column per feature.
struct FeatureSet {
  VecX phi;
  MatX grads;  // dim(q) x (2 + m)
  std::vector<int> obstacle_index;
};

FeatureSet features(const VecX& q, const HamiltonianSpec& spec);

/// eta in feature order: [beta, lambda, alpha_{i_1}, ..., alpha_{i_m}].
VecX weights_to_eta(const EnergyWeights& w, const std::vector<int>& obstacle_index);

}  // namespace grlsnam
