#pragma once

#include "grlsnam/energy.hpp"

#include <functional>
#include <vector>

namespace grlsnam {

enum class Scheme { SymplecticEuler, Leapfrog };

struct IntegratorConfig {
  double tau = 0.03;
  int horizon = 1;
  Scheme scheme = Scheme::SymplecticEuler;
};

/// Gamma(mu) = mu on the frame momentum block, zero elsewhere; G selects the
/// frame block. `fixed_damping` is a per-coordinate damping independent of
/// mu (shape damping of the ring); it never touches the frame block.
struct PortSelectors {
  StateLayout layout;
  VecX fixed_damping;

  explicit PortSelectors(const StateLayout& l = {}, VecX fixed = {});
  MatX gamma(double mu) const;
  MatX port_gain() const;  // dim x 2
};

/// p' = p - tau g - tau Gamma(mu) M^{-1} p - tau D M^{-1} p + tau G u_f,
/// q' = q + tau M^{-1} p'. Throws NumericError on non-finite input.
PhaseState step_symplectic_euler(const PhaseState& z, const VecX& grad_q, double mu,
                                 const Vec2& u_f, const MatX& mass, double tau,
                                 const PortSelectors& selectors);

using GradFn = std::function<VecX(const VecX&)>;

/// Kick-drift-kick. The conservative scheme; forcing is not applied.
PhaseState step_leapfrog(const PhaseState& z, const GradFn& grad, const MatX& mass, double tau);

struct Trajectory {
  std::vector<PhaseState> states;
  std::vector<double> times;
  std::vector<double> energy;     // H_n
  std::vector<double> drift;      // ||M^{-1} p_n||
  std::vector<double> min_distance;  // smallest barrier distance at q_n
  bool diverged = false;
};

/// T steps of cfg.scheme under spec. The leapfrog scheme ignores mu and u_f.
/// A non-finite state or ||p|| > 1e3 max(1, ||p_0||) stops the rollout and
/// sets `diverged`.
Trajectory rollout(const PhaseState& z0, const HamiltonianSpec& spec, const IntegratorConfig& cfg,
                   double mu, const Vec2& u_f, const PortSelectors& selectors);

/// max_n |H_n - H_0|.
double energy_drift(const Trajectory& traj);

}  // namespace grlsnam
