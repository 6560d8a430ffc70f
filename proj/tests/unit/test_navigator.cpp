#include "doctest.h"
#include "grlsnam/config.hpp"
#include "grlsnam/generate.hpp"
#include "grlsnam/navigator.hpp"

#include <cmath>
#include <numbers>

using namespace grlsnam;

TEST_CASE("observable targets") {
  Setpoints sp;
  const Vec3 slow = observable_target(Observables{0.5, 2.0, 0.1}.y(), TargetMode::Relative, sp);
  CHECK(slow[0] == -sp.m_safe);
  CHECK(slow[1] == doctest::Approx(2.0 - sp.eps_prog));
  CHECK(slow[2] == -sp.v_min);
  const Vec3 tight = observable_target(Observables{0.05, 2.0, 0.1}.y(), TargetMode::Relative, sp);
  CHECK(tight[2] == -0.1);
  const Vec3 fixed = observable_target(Vec3::Zero(), TargetMode::Fixed, sp);
  CHECK(fixed == Vec3(-sp.clr_star, sp.dist_star, -sp.speed_star));
}

TEST_CASE("observables") {
  EnvironmentContext ctx;
  ctx.stage_goal = Vec2(1, 1);
  const HamiltonianSpec spec = point_spec(1.0, ctx, EnergyWeights{}, 0.7);
  const Observables at = compute_observables(PhaseState{Vec2(1, 1), Vec2::Zero()}, spec, Vec2(1, 1), {});
  CHECK(at.clr == 0.7);  // empty min capped at d_hat
  CHECK(at.dist == 0.0);
  CHECK(at.speed == 0.0);
  ctx.obstacles.push_back({0, Obstacle{Vec2(1, 1), 0.5, 1.0}});
  const HamiltonianSpec pen = point_spec(1.0, ctx, EnergyWeights{}, 0.7);
  const Observables in = compute_observables(PhaseState{Vec2(1.2, 1), Vec2::Zero()}, pen, Vec2(1, 1), {});
  CHECK(in.clr < 0.0);
  CHECK(in.y()[0] > 0.0);
}

TEST_CASE("secant Jacobian update") {
  const MatX J = MatX::Constant(3, 4, 0.5);
  const MatX same = secant_jacobian_update(J, Vec3(1, 2, 3), VecX::Zero(4), 0.9, 1e-6);
  CHECK((same - 0.9 * J).norm() < 1e-15);
  VecX dz(4);
  dz << 1, 0, 2, 0;
  const Vec3 dy(1, -1, 0.5);
  const MatX fresh = secant_jacobian_update(J, dy, dz, 0.0, 0.0);
  CHECK((fresh - dy * dz.transpose() / 5.0).norm() < 1e-15);
  CHECK((fresh * dz - dy).norm() < 1e-12);  // secant condition
  CHECK_THROWS_AS(secant_jacobian_update(J, dy, VecX::Zero(2), 0.5, 0.0), ConfigError);
}

TEST_CASE("Tikhonov step") {
  CHECK((tikhonov_step(MatX::Identity(3, 3), Vec3(1, 2, 3), 0.0) - Vec3(1, 2, 3)).norm() < 1e-14);
  MatX J = MatX::Identity(3, 3);
  J(0, 0) = 2.0;
  const VecX s = tikhonov_step(J, Vec3(1, 0, 0), 1.0);
  CHECK(s[0] == doctest::Approx(0.4));
  CHECK(s.tail(2).norm() == 0.0);
  CHECK(tikhonov_step(J, Vec3(1, 1, 1), 1e12).norm() < 1e-10);
  CHECK_THROWS_AS(tikhonov_step(MatX::Zero(3, 2), Vec3(1, 1, 1), 0.0), SingularSystemError);
}

TEST_CASE("projected coefficient update") {
  VecX z(3), dz(3), k(3);
  z << 1, 2, 3;
  dz << 0, 0, 0;
  k << 0.5, 0.5, 0.5;
  CHECK(project_update(z, dz, k) == z);
  dz << -10, 1, 0;
  const VecX a = project_update(z, dz, k);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == 2.5);
  const VecX c = project_update(z, dz, k, UpdateForm::Convex);
  CHECK(c[1] == doctest::Approx(1.5));
  CHECK(c[0] == 0.0);
}

TEST_CASE("port correction") {
  Eigen::Matrix<double, 3, 2> P = Eigen::Matrix<double, 3, 2>::Zero();
  const Vec2 lo(-1, -1), hi(1, 1);
  CHECK(port_correction(P, Vec3::Zero(), 1.0, lo, hi).norm() == 0.0);
  // default structure: only the speed row couples, along the heading
  const double kv = 0.5, lu = 1.0;
  P.row(2) = -kv * Vec2(1, 0).transpose();
  const Vec2 u = port_correction(P, Vec3(0.3, -0.2, 0.4), lu, Vec2(-9, -9), Vec2(9, 9));
  CHECK(u[0] == doctest::Approx(-kv * 0.4 / (kv * kv + lu)));
  CHECK(u[1] == 0.0);
  CHECK(port_correction(P, Vec3(0, 0, -100), lu, lo, hi)[0] == 1.0);
  CHECK_THROWS_AS(port_correction(P, Vec3::Zero(), 0.0, lo, hi), ConfigError);
}

TEST_CASE("episode edge cases") {
  Workspace ws;
  ws.side_length = 6.0;
  ws.start = Vec2(1, 1);
  ws.goal = Vec2(5, 5);
  EpisodeConfig cfg;
  cfg.N_max = 0;
  const FixedMeta meta(1, 1, 4, 1);
  CHECK(run_episode(ws, cfg, meta).cause == Termination::Timeout);

  ws.obstacles.push_back({Vec2(1, 1), 0.5, 1.0});
  cfg.N_max = 100;
  CHECK(run_episode(ws, cfg, meta).cause == Termination::Collision);
}

TEST_CASE("episodes are deterministic and reach the goal on an open map") {
  const RunConfig cfg = preset_config("test_id");
  const auto meta = make_meta(cfg);
  const Workspace ws = generate_family("test_id", 5);
  const EpisodeResult a = run_episode(ws, cfg.episode, *meta, 3);
  const EpisodeResult b = run_episode(ws, cfg.episode, *meta, 3);
  REQUIRE(a.steps.size() == b.steps.size());
  CHECK(a.steps.back().q == b.steps.back().q);
  CHECK(a.cause == Termination::Success);
  CHECK((a.position(a.steps.size() - 1) - ws.goal).norm() <= cfg.episode.eps_goal);
  CHECK(a.mapping_ratio > 0.0);
  CHECK(a.mapping_ratio < 1.0);
}

TEST_CASE("fixed meta proposes alpha for active obstacles") {
  EnvironmentContext ctx;
  ctx.obstacles.push_back({3, Obstacle{Vec2(0, 0), 0.1, 1.0}});
  MetaInput in;
  in.context = &ctx;
  in.active = {3};
  const MetaOutput o = FixedMeta(2, 3, 4, 5).propose(in);
  CHECK(o.beta == 2);
  CHECK(o.lambda == 3);
  CHECK(o.mu == 4);
  CHECK(o.alpha.at(3) == 5);
}
