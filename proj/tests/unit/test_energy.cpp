#include "doctest.h"
#include "grlsnam/energy.hpp"
#include "grlsnam/ring.hpp"
#include "grlsnam/rng.hpp"

#include <cmath>
#include <numbers>

using namespace grlsnam;

namespace {

// closed forms written out independently of the library
double barrier_ref(double d, double dh) {
  if (d <= 0.0) return kBarrierCeiling;
  if (d >= dh) return 0.0;
  return -(d - dh) * (d - dh) * std::log(d / dh);
}
double barrier_grad_ref(double d, double dh) {
  if (d <= 0.0 || d >= dh) return 0.0;
  return -2.0 * (d - dh) * std::log(d / dh) - (d - dh) * (d - dh) / d;
}

EnvironmentContext one_obstacle(const Vec2& c, double r) {
  EnvironmentContext ctx;
  ctx.obstacles.push_back({0, Obstacle{c, r, 1.0}});
  return ctx;
}

}  // namespace

TEST_CASE("barrier value cases") {
  CHECK(ipc_barrier(1.0, 1.0) == 0.0);
  CHECK(ipc_barrier(2.0, 1.0) == 0.0);
  CHECK(ipc_barrier(0.5, 1.0) == doctest::Approx(0.1732867).epsilon(1e-7));
  CHECK(ipc_barrier(-0.1, 1.0) == kBarrierCeiling);
  CHECK(ipc_barrier(1e-300, 1.0) == kBarrierCeiling);  // clamp
  Rng rng = make_rng(1);
  for (int i = 0; i < 200; ++i) {
    const double dh = uniform(rng, 0.1, 3.0);
    const double d = uniform(rng, 0.01, 1.5) * dh;
    const double ref = std::min(barrier_ref(d, dh), kBarrierCeiling);
    CHECK(ipc_barrier(d, dh) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("barrier derivative cases") {
  CHECK(ipc_barrier_grad(1.0, 1.0) == 0.0);
  CHECK(ipc_barrier_grad(3.0, 1.0) == 0.0);
  CHECK(ipc_barrier_grad(-1.0, 1.0) == 0.0);
  CHECK(ipc_barrier_grad(0.5, 1.0) == doctest::Approx(-1.193147).epsilon(1e-6));
  CHECK(ipc_barrier_grad(1e-9, 1.0) == -kBarrierCeiling);
  Rng rng = make_rng(2);
  for (int i = 0; i < 200; ++i) {
    const double dh = uniform(rng, 0.2, 2.0);
    const double d = uniform(rng, 0.05, 0.999) * dh;
    const double h = 1e-6 * dh;
    const double fd = (ipc_barrier(d + h, dh) - ipc_barrier(d - h, dh)) / (2.0 * h);
    CHECK(ipc_barrier_grad(d, dh) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(ipc_barrier_grad(d, dh) == doctest::Approx(barrier_grad_ref(d, dh)).epsilon(1e-12));
  }
}

TEST_CASE("complementarity bound on a grid") {
  for (int i = 1; i <= 50; ++i)
    for (int j = 1; j <= 200; ++j) {
      const double dh = 0.04 * i;
      const double d = dh * j / 150.0;
      const double r = -d * ipc_barrier_grad(d, dh);
      CHECK(r >= 0.0);
      CHECK(r <= dh * dh * (1.0 + 2.0 / std::numbers::e));
    }
}

TEST_CASE("potential examples") {
  EnvironmentContext ctx;
  ctx.stage_goal = Vec2(1.0, 1.0);
  EnergyWeights w;
  w.beta = 0.0;
  w.lambda = 0.0;
  HamiltonianSpec spec = point_spec(1.0, ctx, w, 1.0);
  CHECK(potential(Vec2(1.0, 1.0), spec) == 0.0);
  CHECK(potential_grad(Vec2(1.0, 1.0), spec).norm() == 0.0);

  spec.weights.beta = 2.0;
  CHECK(potential(Vec2(2.0, 1.0), spec) == doctest::Approx(2.0));

  // obstacle surface at distance 0.5, alpha 3
  HamiltonianSpec b = point_spec(1.0, one_obstacle(Vec2(0.0, 0.0), 1.0), w, 1.0);
  b.context.stage_goal = Vec2(1.5, 0.0);
  b.weights.alpha[0] = 3.0;
  CHECK(potential(Vec2(1.5, 0.0), b) == doctest::Approx(0.5198602).epsilon(1e-6));

  // kinetic energy
  CHECK(kinetic(Vec2(3.0, 4.0), spec) == doctest::Approx(12.5));
}

TEST_CASE("hamiltonian equals independent term sum") {
  const RingModel ring;
  Rng rng = make_rng(3);
  for (int k = 0; k < 20; ++k) {
    EnvironmentContext ctx;
    ctx.stage_goal = Vec2(uniform(rng, 0, 5), uniform(rng, 0, 5));
    for (int i = 0; i < 3; ++i)
      ctx.obstacles.push_back({i, Obstacle{Vec2(uniform(rng, 0, 5), uniform(rng, 0, 5)), 0.3, 1.0}});
    EnergyWeights w;
    w.beta = uniform(rng, 0.1, 2);
    w.lambda = uniform(rng, 0.1, 2);
    for (int i = 0; i < 3; ++i) w.alpha[i] = uniform(rng, 0.1, 3);
    const HamiltonianSpec spec = ring.make_spec(ctx, w, 1.0, 1.5, 0.6);
    PhaseState z;
    z.q.resize(6);
    z.q << uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0, 5), uniform(rng, 0, 5), 0.2,
        uniform(rng, 0.5, 1.0);
    z.p = VecX::NullaryExpr(6, [&] { return uniform(rng, -1, 1); });
    const EnergyBreakdown e = potential_terms(z.q, spec);
    double bar = 0.0;
    const auto ds = barrier_distances(z.q, spec);
    for (int i = 0; i < 3; ++i) {
      const double body = spec.body_radius + spec.shape_radius * z.q[5];
      CHECK(ds[i] == doctest::Approx((z.q.segment<2>(2) - ctx.obstacles[i].obstacle.center).norm() - 0.3 - body));
      bar += w.alpha[i] * ipc_barrier(ds[i], 1.0);
    }
    CHECK(e.barrier == doctest::Approx(bar));
    CHECK(e.goal == doctest::Approx((z.q.segment<2>(2) - ctx.stage_goal).squaredNorm()));
    const double kin = 0.5 * z.p.dot(spec.mass.inverse() * z.p);
    CHECK(hamiltonian(z, spec) == doctest::Approx(kin + e.total));
    CHECK(e.total == doctest::Approx(e.sensor + w.beta * e.goal + w.lambda * e.object + e.barrier));
  }
}

TEST_CASE("features reproduce the weighted potential and gradient") {
  const RingModel ring;
  Rng rng = make_rng(4);
  EnvironmentContext ctx;
  ctx.stage_goal = Vec2(3, 3);
  ctx.obstacles.push_back({4, Obstacle{Vec2(1.5, 1.0), 0.4, 1.0}});
  ctx.obstacles.push_back({1, Obstacle{Vec2(1.0, 1.8), 0.3, 1.0}});
  EnergyWeights w;
  w.beta = 0.7;
  w.lambda = 1.3;
  w.alpha = {{4, 2.0}, {1, 0.5}};
  const HamiltonianSpec spec = ring.make_spec(ctx, w, 1.0, 1.5, 0.6);
  VecX q(6);
  q << 0.0, 0.0, 1.0, 1.0, 0.0, 0.8;
  const FeatureSet fs = features(q, spec);
  REQUIRE(fs.obstacle_index == std::vector<int>{1, 4});
  const VecX eta = weights_to_eta(w, fs.obstacle_index);
  CHECK(eta[2] == 0.5);
  CHECK(eta[3] == 2.0);
  const EnergyBreakdown e = potential_terms(q, spec);
  CHECK(fs.phi.dot(eta) == doctest::Approx(e.total - e.sensor));
  VecX g = potential_grad(q, spec);
  g.head(2).setZero();  // sensor block is not a feature
  CHECK((fs.grads * eta - g).norm() < 1e-10);

  HamiltonianSpec empty = spec;
  empty.context.obstacles.clear();
  CHECK(features(q, empty).phi.size() == 2);
}

TEST_CASE("gradient matches central differences") {
  const RingModel ring;
  Rng rng = make_rng(5);
  int checked = 0;
  while (checked < 100) {
    EnvironmentContext ctx;
    ctx.stage_goal = Vec2(uniform(rng, 0, 4), uniform(rng, 0, 4));
    for (int i = 0; i < 4; ++i)
      ctx.obstacles.push_back({i, Obstacle{Vec2(uniform(rng, 0, 4), uniform(rng, 0, 4)), uniform(rng, 0.2, 0.5), 1.0}});
    EnergyWeights w;
    for (int i = 0; i < 4; ++i) w.alpha[i] = uniform(rng, 0.5, 3);
    const HamiltonianSpec spec = ring.make_spec(ctx, w, 1.0, 1.5, 0.6);
    VecX q(6);
    q << uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0, 4), uniform(rng, 0, 4), 1.0, uniform(rng, 0.5, 1);
    const auto ds = barrier_distances(q, spec);
    if (*std::min_element(ds.begin(), ds.end()) < 0.05) continue;
    const VecX g = potential_grad(q, spec);
    for (int i = 0; i < 6; ++i) {
      VecX a = q, b = q;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      const double fd = (potential(a, spec) - potential(b, spec)) / 2e-6;
      CHECK(std::abs(g[i] - fd) <= 1e-5 * std::max(1.0, g.norm()));
    }
    ++checked;
  }
}

TEST_CASE("coincident obstacle centre gives a finite gradient") {
  EnergyWeights w;
  w.beta = 0.0;
  w.lambda = 0.0;
  w.alpha[0] = 1.0;
  const HamiltonianSpec spec = point_spec(1.0, one_obstacle(Vec2(1, 1), 0.5), w, 1.0);
  const VecX g = potential_grad(Vec2(1, 1), spec);
  CHECK(g.allFinite());
  CHECK(g.norm() == 0.0);  // penetration plateau
}

TEST_CASE("weights validation") {
  EnergyWeights w;
  w.beta = -1.0;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  EnergyWeights ok;
  ok.alpha = {{0, 1.0}, {3, 2.5}};
  CHECK(ok.alpha_sum() == 3.5);
  CHECK(ok.alpha_of(7) == 0.0);
}
