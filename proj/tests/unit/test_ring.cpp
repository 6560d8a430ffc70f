#include "doctest.h"
#include "grlsnam/ring.hpp"

#include <cmath>
#include <numbers>

using namespace grlsnam;

TEST_CASE("reference control points") {
  const auto p = reference_control_points(4, 1.0);
  REQUIRE(p.size() == 4);
  CHECK((p[0] - Vec2(1, 0)).norm() < 1e-15);
  CHECK((p[1] - Vec2(0, 1)).norm() < 1e-15);
  CHECK((p[2] - Vec2(-1, 0)).norm() < 1e-15);
  CHECK((p[3] - Vec2(0, -1)).norm() < 1e-15);
}

TEST_CASE("spline basis is a partition of unity and matches point evaluation") {
  const SplineBasis b = spline_basis(12, 96);
  CHECK(b.B.rows() == 96);
  for (int j = 0; j < 96; ++j) {
    CHECK(b.B.row(j).sum() == doctest::Approx(1.0));
    CHECK(std::abs(b.D.row(j).sum()) < 1e-12);
  }
  CHECK(b.w.sum() == doctest::Approx(1.0));
  const auto ctrl = reference_control_points(12, 0.7);
  for (int j = 0; j < 96; j += 7) {
    Vec2 x = Vec2::Zero(), dx = Vec2::Zero();
    for (int i = 0; i < 12; ++i) {
      x += b.B(j, i) * ctrl[i];
      dx += b.D(j, i) * ctrl[i];
    }
    const double u = double(j) / 96;
    CHECK((x - spline_point(ctrl, u)).norm() < 1e-12);
    CHECK((dx - spline_tangent(ctrl, u)).norm() < 1e-10);
    // tangent against a central difference of the curve
    const Vec2 fd = (spline_point(ctrl, u + 1e-6) - spline_point(ctrl, u - 1e-6)) / 2e-6;
    CHECK((fd - spline_tangent(ctrl, u)).norm() < 1e-5);
  }
}

TEST_CASE("ring geometry") {
  const RingModel m;
  // shrunken circle: area close to pi r^2, perimeter close to 2 pi r
  CHECK(m.a_ref == doctest::Approx(std::numbers::pi * m.r_eff * m.r_eff).epsilon(0.05));
  CHECK(m.r_eff <= m.r_max);
  RingState st;
  st.center = Vec2(2, 3);
  st.scale = 0.5;
  const BoundarySamples s = boundary_samples(st, m.params, m.basis);
  double perim = 0.0;
  for (int j = 0; j < s.arc.size(); ++j) perim += m.basis.w[j] * s.arc[j];
  CHECK(perim == doctest::Approx(2 * std::numbers::pi * 0.5 * (m.r_eff + m.r_max) / 2).epsilon(0.02));
  for (const Vec2& t : s.tangents) CHECK(t.norm() == doctest::Approx(1.0));
  st.scale = 0.0;
  CHECK_THROWS_AS(boundary_samples(st, m.params, m.basis), NumericError);
}

TEST_CASE("ring barrier") {
  const RingModel m;
  RingState st;
  const BoundarySamples s = boundary_samples(st, m.params, m.basis);
  const RingBarrier none = ring_barrier_energy(s, m.basis, {}, 0.5);
  CHECK(none.energy == 0.0);
  CHECK(std::isinf(none.d_min));
  const RingBarrier far = ring_barrier_energy(s, m.basis, {{Vec2(10, 10), 0.5, 1.0}}, 0.5);
  CHECK(far.energy == 0.0);
  const RingBarrier near = ring_barrier_energy(s, m.basis, {{Vec2(m.r_max + 0.3, 0), 0.1, 1.0}}, 0.5);
  CHECK(near.energy > 0.0);
  CHECK(near.d_min == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("scale target and bulk potential") {
  CHECK(scale_target(0.0, 0.5, 2.0) == 0.5);
  CHECK(scale_target(-1.0, 0.5, 2.0) == 0.5);
  CHECK(scale_target(1e6, 0.5, 2.0) == doctest::Approx(1.0));
  CHECK(bulk_potential(0.7, 0.7, 1.5, 1.0) == 0.0);
  CHECK(bulk_potential(1.0, 0.5, 2.0, 1.0) == doctest::Approx(0.5625));
  for (double s : {0.3, 0.8, 1.1}) {
    const double fd = (bulk_potential(s + 1e-6, 0.6, 1.5, 0.4) - bulk_potential(s - 1e-6, 0.6, 1.5, 0.4)) / 2e-6;
    CHECK(bulk_potential_grad(s, 0.6, 1.5, 0.4) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("ring params validation") {
  RingParams p;
  p.s0 = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
