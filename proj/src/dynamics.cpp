#include "grlsnam/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grlsnam {

namespace {

VecX solve_mass(const MatX& mass, const VecX& p) {
  if (mass.isDiagonal()) return p.cwiseQuotient(mass.diagonal());
  return mass.llt().solve(p);
}

}  // namespace

PortSelectors::PortSelectors(const StateLayout& l, VecX fixed) : layout(l), fixed_damping(std::move(fixed)) {
  if (fixed_damping.size() == 0) fixed_damping = VecX::Zero(layout.dim());
  if (fixed_damping.size() != layout.dim()) throw ConfigError("fixed damping has the wrong size");
  fixed_damping.segment<2>(layout.frame()).setZero();
}

MatX PortSelectors::gamma(double mu) const {
  MatX g = MatX::Zero(layout.dim(), layout.dim());
  g.block<2, 2>(layout.frame(), layout.frame()) = mu * Eigen::Matrix2d::Identity();
  return g;
}

MatX PortSelectors::port_gain() const {
  MatX g = MatX::Zero(layout.dim(), 2);
  g.block<2, 2>(layout.frame(), 0).setIdentity();
  return g;
}

PhaseState step_symplectic_euler(const PhaseState& z, const VecX& grad_q, double mu,
                                 const Vec2& u_f, const MatX& mass, double tau,
                                 const PortSelectors& selectors) {
  if (!z.q.allFinite() || !z.p.allFinite() || !grad_q.allFinite() || !std::isfinite(mu) ||
      !u_f.allFinite())
    throw NumericError("symplectic Euler: non-finite input");
  if (!(tau > 0.0)) throw ConfigError("symplectic Euler: tau must be positive");
  const VecX v = solve_mass(mass, z.p);
  PhaseState out;
  out.p = z.p - tau * grad_q - tau * selectors.fixed_damping.cwiseProduct(v);
  // frame block only: Gamma(mu) M^{-1} p and G u_f
  const int f = selectors.layout.frame();
  out.p.segment<2>(f) += -tau * mu * v.segment<2>(f) + tau * u_f;
  out.q = z.q + tau * solve_mass(mass, out.p);
  return out;
}

PhaseState step_leapfrog(const PhaseState& z, const GradFn& grad, const MatX& mass, double tau) {
  if (!z.q.allFinite() || !z.p.allFinite()) throw NumericError("leapfrog: non-finite input");
  if (!(tau > 0.0)) throw ConfigError("leapfrog: tau must be positive");
  PhaseState out;
  const VecX half = z.p - 0.5 * tau * grad(z.q);
  out.q = z.q + tau * solve_mass(mass, half);
  out.p = half - 0.5 * tau * grad(out.q);
  return out;
}

Trajectory rollout(const PhaseState& z0, const HamiltonianSpec& spec, const IntegratorConfig& cfg,
                   double mu, const Vec2& u_f, const PortSelectors& selectors) {
  Trajectory tr;
  auto record = [&](const PhaseState& z, int n) {
    tr.states.push_back(z);
    tr.times.push_back(n * cfg.tau);
    tr.energy.push_back(hamiltonian(z, spec));
    tr.drift.push_back(spec.velocity(z.p).norm());
    const auto d = barrier_distances(z.q, spec);
    tr.min_distance.push_back(d.empty() ? std::numeric_limits<double>::infinity()
                                        : *std::min_element(d.begin(), d.end()));
  };
  if (!z0.q.allFinite() || !z0.p.allFinite()) {
    tr.diverged = true;
    return tr;
  }
  record(z0, 0);
  const double limit = 1e3 * std::max(1.0, z0.p.norm());
  const GradFn grad = [&](const VecX& q) { return potential_grad(q, spec); };
  PhaseState z = z0;
  for (int n = 1; n <= cfg.horizon; ++n) {
    if (cfg.scheme == Scheme::Leapfrog) {
      z = step_leapfrog(z, grad, spec.mass, cfg.tau);
    } else {
      z = step_symplectic_euler(z, grad(z.q), mu, u_f, spec.mass, cfg.tau, selectors);
    }
    if (!z.q.allFinite() || !z.p.allFinite() || z.p.norm() > limit) {
      tr.diverged = true;
      break;
    }
    record(z, n);
  }
  return tr;
}

double energy_drift(const Trajectory& traj) {
  double m = 0.0;
  for (double h : traj.energy) m = std::max(m, std::abs(h - traj.energy.front()));
  return m;
}

}  // namespace grlsnam
