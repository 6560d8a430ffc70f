#pragma once

#include "grlsnam/energy.hpp"

#include <vector>

namespace grlsnam {

struct RingParams {
  double r_base = 0.4;
  int n_ctrl = 20;
  int K = 240;
  double k_bulk = 1.5;
  double M_s = 1.0;
  double s0 = 0.5;
  double delta = 2.0;

  void validate() const;
};

/// Periodic uniform cubic B-spline sampled at u_j = j / K, u in [0, 1).
/// D is the derivative in u, so sum_j w_j ||D P||_j approximates the perimeter.
struct SplineBasis {
  int n_ctrl = 0;
  int K = 0;
  MatX B;  // K x n_ctrl
  MatX D;  // K x n_ctrl
  VecX w;  // quadrature weights, 1 / K each
};

/// P_i = r [cos(2 pi i / n), sin(2 pi i / n)], i = 0 .. n-1.
std::vector<Vec2> reference_control_points(int n_ctrl, double r_base);

SplineBasis spline_basis(int n_ctrl, int K);

/// Curve point and u-derivative at an arbitrary parameter (for refinement
/// oracles and plotting).
Vec2 spline_point(const std::vector<Vec2>& ctrl, double u);
Vec2 spline_tangent(const std::vector<Vec2>& ctrl, double u);

struct RingState {
  Vec2 center = Vec2::Zero();
  double scale = 1.0;
  double p_scale = 0.0;
  Vec2 p_frame = Vec2::Zero();
};

struct BoundarySamples {
  std::vector<Vec2> points;
  std::vector<Vec2> tangents;  // unit
  VecX arc;                    // l_j = ||X'_j||
};

/// X_j = sum_i B_ji (o + s P0_i). Throws NumericError for s <= 0.
BoundarySamples boundary_samples(const RingState& ring, const RingParams& params,
                                 const SplineBasis& basis);

struct RingBarrier {
  double energy = 0.0;
  double d_min = 0.0;  // min_{j,k} d_jk; +inf without obstacles
};

/// sum_j w_j l_j sum_k w_k b(d_jk), d_jk = ||X_j - c_k|| - r_k.
RingBarrier ring_barrier_energy(const BoundarySamples& samples, const SplineBasis& basis,
                                const std::vector<Obstacle>& obstacles, double d_hat);

/// s0 + (1 - s0) tanh(delta max(d_min, 0)).
double scale_target(double d_min, double s0, double delta);

/// (k/2)(A(s) - A(s_t))^2 with A(s) = s^2 A_ref.
double bulk_potential(double s, double s_target, double k_bulk, double a_ref);
double bulk_potential_grad(double s, double s_target, double k_bulk, double a_ref);

/// Precomputed geometry of the reference ring.
struct RingModel {
  RingParams params;
  SplineBasis basis;
  std::vector<Vec2> ctrl0;
  double a_ref = 0.0;  // shoelace area of the s = 1 boundary samples
  double r_eff = 0.0;  // smallest sample radius at s = 1
  double r_max = 0.0;  // largest sample radius at s = 1

  explicit RingModel(const RingParams& p = {});

  /// Mass block [sensor (2), frame (2), theta, s] and fixed shape damping.
  HamiltonianSpec make_spec(const EnvironmentContext& ctx, const EnergyWeights& w, double d_hat,
                            double M_c, double inertia) const;
};

}  // namespace grlsnam
