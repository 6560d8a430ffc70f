#include "doctest.h"
#include "grlsnam/dynamics.hpp"
#include "grlsnam/ring.hpp"

#include <cmath>

using namespace grlsnam;

namespace {

HamiltonianSpec free_point() {
  EnvironmentContext ctx;
  EnergyWeights w;
  w.beta = 0.0;
  w.lambda = 0.0;
  return point_spec(1.0, ctx, w, 1.0);
}

}  // namespace

TEST_CASE("symplectic Euler update equations") {
  const HamiltonianSpec spec = free_point();
  const PortSelectors sel(spec.layout);
  const PhaseState z{Vec2(1.0, 2.0), Vec2(0.5, -0.25)};
  const PhaseState free = step_symplectic_euler(z, Vec2::Zero(), 0.0, Vec2::Zero(), spec.mass, 0.1, sel);
  CHECK(free.p == z.p);
  CHECK((free.q - (z.q + 0.1 * z.p)).norm() < 1e-15);

  const Vec2 g(2.0, -1.0);
  const PhaseState rest{Vec2(0.0, 0.0), Vec2::Zero()};
  const PhaseState kicked = step_symplectic_euler(rest, g, 0.0, Vec2::Zero(), spec.mass, 0.1, sel);
  CHECK((kicked.p + 0.1 * g).norm() < 1e-15);
  CHECK((kicked.q + 0.01 * g).norm() < 1e-15);

  const PhaseState damped =
      step_symplectic_euler(PhaseState{Vec2::Zero(), Vec2(1.0, 0.0)}, Vec2::Zero(), 4.0, Vec2::Zero(), spec.mass, 0.03, sel);
  CHECK(damped.p[0] == doctest::Approx(0.88));

  const PhaseState pushed =
      step_symplectic_euler(rest, Vec2::Zero(), 0.0, Vec2(1.0, 2.0), spec.mass, 0.5, sel);
  CHECK((pushed.p - Vec2(0.5, 1.0)).norm() < 1e-15);

  VecX bad(2);
  bad << std::nan(""), 0.0;
  CHECK_THROWS_AS(step_symplectic_euler(PhaseState{bad, Vec2::Zero()}, Vec2::Zero(), 0, Vec2::Zero(), spec.mass, 0.1, sel),
                  NumericError);
}

TEST_CASE("port selectors act on the frame block only") {
  const StateLayout ring_layout{2, 2};
  VecX fixed = VecX::Zero(6);
  fixed[5] = 2.0;
  const PortSelectors sel(ring_layout, fixed);
  const MatX G = sel.gamma(3.0);
  CHECK(G(2, 2) == 3.0);
  CHECK(G(3, 3) == 3.0);
  CHECK(G(0, 0) == 0.0);
  CHECK(G(5, 5) == 0.0);
  const MatX B = sel.port_gain();
  CHECK(B.rows() == 6);
  CHECK(B(2, 0) == 1.0);
  CHECK(B(3, 1) == 1.0);
  CHECK(B.col(0).sum() == 1.0);
}

TEST_CASE("leapfrog is time reversible and drifts freely without force") {
  EnvironmentContext ctx;
  ctx.stage_goal = Vec2(2.0, 1.0);
  ctx.obstacles.push_back({0, Obstacle{Vec2(1.0, 1.0), 0.3, 1.0}});
  EnergyWeights w;
  w.alpha[0] = 1.0;
  const HamiltonianSpec spec = point_spec(2.0, ctx, w, 0.8);
  const GradFn grad = [&](const VecX& q) { return potential_grad(q, spec); };
  PhaseState z{Vec2(0.0, 0.2), Vec2(1.0, 0.4)};
  const PhaseState z0 = z;
  for (int i = 0; i < 1000; ++i) z = step_leapfrog(z, grad, spec.mass, 0.01);
  z.p = -z.p;
  for (int i = 0; i < 1000; ++i) z = step_leapfrog(z, grad, spec.mass, 0.01);
  CHECK((z.q - z0.q).norm() < 1e-8);
  CHECK((z.p + z0.p).norm() < 1e-8);

  const GradFn none = [](const VecX& q) { return VecX::Zero(q.size()); };
  const PhaseState f = step_leapfrog(z0, none, spec.mass, 0.1);
  CHECK((f.q - (z0.q + 0.05 * z0.p)).norm() < 1e-15);
}

TEST_CASE("rollout bookkeeping and energy drift") {
  const HamiltonianSpec spec = free_point();
  IntegratorConfig ic;
  ic.horizon = 0;
  const PhaseState z0{Vec2(0, 0), Vec2(1, 0)};
  const Trajectory t0 = rollout(z0, spec, ic, 0.0, Vec2::Zero(), PortSelectors(spec.layout));
  CHECK(t0.states.size() == 1);
  CHECK(energy_drift(t0) == 0.0);

  ic.horizon = 50;
  ic.scheme = Scheme::Leapfrog;
  const Trajectory free = rollout(z0, spec, ic, 0.0, Vec2::Zero(), PortSelectors(spec.layout));
  CHECK(free.states.size() == 51);
  CHECK(energy_drift(free) == 0.0);

  EnvironmentContext ctx;
  EnergyWeights w;
  w.beta = 1.0;
  const HamiltonianSpec osc = point_spec(1.0, ctx, w, 1.0);
  ic.horizon = 3000;
  const Trajectory h = rollout(PhaseState{Vec2(1, 0), Vec2(0, 1)}, osc, ic, 0, Vec2::Zero(), PortSelectors(osc.layout));
  CHECK(energy_drift(h) < 1e-3 * h.energy.front());
}

TEST_CASE("frame-only forcing leaves sensor and shape momenta bit-identical") {
  const RingModel ring;
  EnvironmentContext ctx;
  ctx.stage_goal = Vec2(3, 3);
  ctx.obstacles.push_back({0, Obstacle{Vec2(1.2, 1.0), 0.3, 1.0}});
  EnergyWeights w;
  w.alpha[0] = 2.0;
  const HamiltonianSpec spec = ring.make_spec(ctx, w, 1.0, 1.5, 0.6);
  VecX fixed = VecX::Zero(6);
  fixed[4] = 1.6;
  fixed[5] = 2.0;
  const PortSelectors sel(spec.layout, fixed);
  PhaseState z;
  z.q.resize(6);
  z.q << 0.1, 0.2, 0.5, 0.6, 0.3, 0.9;
  z.p.resize(6);
  z.p << 0.3, 0.1, -0.2, 0.4, 0.5, -0.1;
  const VecX g = potential_grad(z.q, spec);
  const PhaseState a = step_symplectic_euler(z, g, 0.0, Vec2::Zero(), spec.mass, 0.03, sel);
  const PhaseState b = step_symplectic_euler(z, g, 9.0, Vec2(-2.0, 5.0), spec.mass, 0.03, sel);
  for (int i : {0, 1, 4, 5}) {
    CHECK(a.p[i] == b.p[i]);
    CHECK(a.q[i] == b.q[i]);
  }
  CHECK(a.p[2] != b.p[2]);
}

TEST_CASE("divergence guard stops the rollout") {
  EnvironmentContext ctx;
  ctx.obstacles.push_back({0, Obstacle{Vec2(0.0, 0.0), 1.0, 1.0}});
  EnergyWeights w;
  w.beta = 0.0;
  w.alpha[0] = 1e6;
  const HamiltonianSpec spec = point_spec(1.0, ctx, w, 1.0);
  IntegratorConfig ic;
  ic.horizon = 200;
  ic.tau = 0.05;
  const Trajectory t =
      rollout(PhaseState{Vec2(1.2, 0.0), Vec2(-1e-3, 0.0)}, spec, ic, 0.0, Vec2::Zero(), PortSelectors(spec.layout));
  CHECK(t.diverged);
  CHECK(t.states.size() < 201);
}
