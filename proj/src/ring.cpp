#include "grlsnam/ring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace grlsnam {

namespace {

void cubic_weights(double t, double b[4], double db[4]) {
  const double t2 = t * t, t3 = t2 * t, u = 1.0 - t;
  b[0] = u * u * u / 6.0;
  b[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
  b[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
  b[3] = t3 / 6.0;
  db[0] = -0.5 * u * u;
  db[1] = 1.5 * t2 - 2.0 * t;
  db[2] = -1.5 * t2 + t + 0.5;
  db[3] = 0.5 * t2;
}

// Segment index and local parameter for u in [0, 1) with n segments.
void locate(double u, int n, int& seg, double& t) {
  double x = (u - std::floor(u)) * n;
  seg = static_cast<int>(std::floor(x));
  if (seg >= n) seg = n - 1;
  t = x - seg;
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

void RingParams::validate() const {
  if (n_ctrl < 8) throw ConfigError("ring: n_ctrl must be at least 8");
  if (K < 4 * n_ctrl) throw ConfigError("ring: K must be at least 4 n_ctrl");
  if (!(s0 > 0.0 && s0 < 1.0)) throw ConfigError("ring: s0 must lie in (0, 1)");
  if (!(k_bulk > 0.0) || !(M_s > 0.0) || !(delta > 0.0) || !(r_base > 0.0))
    throw ConfigError("ring: k_bulk, M_s, delta, r_base must be positive");
}

std::vector<Vec2> reference_control_points(int n_ctrl, double r_base) {
  if (n_ctrl < 3) throw ConfigError("ring: need at least 3 control points");
  std::vector<Vec2> out;
  for (int i = 0; i < n_ctrl; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n_ctrl;
    out.emplace_back(r_base * std::cos(a), r_base * std::sin(a));
  }
  return out;
}

SplineBasis spline_basis(int n_ctrl, int K) {
  if (n_ctrl < 3 || K < 1) throw ConfigError("spline basis: bad sizes");
  SplineBasis s;
  s.n_ctrl = n_ctrl;
  s.K = K;
  s.B = MatX::Zero(K, n_ctrl);
  s.D = MatX::Zero(K, n_ctrl);
  s.w = VecX::Constant(K, 1.0 / K);
  for (int j = 0; j < K; ++j) {
    int seg;
    double t, b[4], db[4];
    locate(static_cast<double>(j) / K, n_ctrl, seg, t);
    cubic_weights(t, b, db);
    for (int m = 0; m < 4; ++m) {
      const int i = wrap(seg + m - 1, n_ctrl);
      s.B(j, i) += b[m];
      s.D(j, i) += n_ctrl * db[m];
    }
  }
  return s;
}

Vec2 spline_point(const std::vector<Vec2>& ctrl, double u) {
  const int n = static_cast<int>(ctrl.size());
  int seg;
  double t, b[4], db[4];
  locate(u, n, seg, t);
  cubic_weights(t, b, db);
  Vec2 x = Vec2::Zero();
  for (int m = 0; m < 4; ++m) x += b[m] * ctrl[wrap(seg + m - 1, n)];
  return x;
}

Vec2 spline_tangent(const std::vector<Vec2>& ctrl, double u) {
  const int n = static_cast<int>(ctrl.size());
  int seg;
  double t, b[4], db[4];
  locate(u, n, seg, t);
  cubic_weights(t, b, db);
  Vec2 x = Vec2::Zero();
  for (int m = 0; m < 4; ++m) x += n * db[m] * ctrl[wrap(seg + m - 1, n)];
  return x;
}

BoundarySamples boundary_samples(const RingState& ring, const RingParams& params,
                                 const SplineBasis& basis) {
  if (!(ring.scale > 0.0)) throw NumericError("ring scale must be positive");
  const auto ctrl0 = reference_control_points(basis.n_ctrl, params.r_base);
  MatX P(basis.n_ctrl, 2);
  for (int i = 0; i < basis.n_ctrl; ++i) P.row(i) = (ring.scale * ctrl0[i]).transpose();
  const MatX X = basis.B * P;
  const MatX T = basis.D * P;
  BoundarySamples out;
  out.arc.resize(basis.K);
  // rows of B sum to one, so the translation is added exactly once
  for (int j = 0; j < basis.K; ++j) {
    out.points.push_back(ring.center + X.row(j).transpose());
    const Vec2 t = T.row(j).transpose();
    out.arc[j] = t.norm();
    out.tangents.push_back(t / out.arc[j]);
  }
  return out;
}

RingBarrier ring_barrier_energy(const BoundarySamples& samples, const SplineBasis& basis,
                                const std::vector<Obstacle>& obstacles, double d_hat) {
  RingBarrier r;
  r.d_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < samples.points.size(); ++j) {
    double acc = 0.0;
    for (const auto& o : obstacles) {
      const double d = signed_distance(o, samples.points[j]);
      r.d_min = std::min(r.d_min, d);
      acc += o.weight * ipc_barrier(d, d_hat);
    }
    r.energy += basis.w[static_cast<Eigen::Index>(j)] * samples.arc[static_cast<Eigen::Index>(j)] * acc;
  }
  return r;
}

double scale_target(double d_min, double s0, double delta) {
  return s0 + (1.0 - s0) * std::tanh(delta * std::max(d_min, 0.0));
}

double bulk_potential(double s, double s_target, double k_bulk, double a_ref) {
  const double diff = (s * s - s_target * s_target) * a_ref;
  return 0.5 * k_bulk * diff * diff;
}

double bulk_potential_grad(double s, double s_target, double k_bulk, double a_ref) {
  return 2.0 * k_bulk * a_ref * s * (s * s * a_ref - s_target * s_target * a_ref);
}

RingModel::RingModel(const RingParams& p) : params(p) {
  params.validate();
  basis = spline_basis(params.n_ctrl, params.K);
  ctrl0 = reference_control_points(params.n_ctrl, params.r_base);
  const auto samples = boundary_samples(RingState{}, params, basis);
  double area = 0.0;
  r_eff = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < samples.points.size(); ++j) {
    const Vec2& a = samples.points[j];
    const Vec2& b = samples.points[(j + 1) % samples.points.size()];
    area += a.x() * b.y() - b.x() * a.y();
    r_eff = std::min(r_eff, a.norm());
    r_max = std::max(r_max, a.norm());
  }
  a_ref = 0.5 * std::abs(area);
}

HamiltonianSpec RingModel::make_spec(const EnvironmentContext& ctx, const EnergyWeights& w,
                                     double d_hat, double M_c, double inertia) const {
  HamiltonianSpec s;
  s.layout = StateLayout{2, 2};
  VecX m(6);
  m << 1.0, 1.0, M_c, M_c, inertia, params.M_s;
  s.mass = m.asDiagonal();
  s.context = ctx;
  s.weights = w;
  s.d_hat = d_hat;
  s.shape_radius = r_eff;
  s.shape.enabled = true;
  s.shape.k_bulk = params.k_bulk;
  s.shape.a_ref = a_ref;
  return s;
}

}  // namespace grlsnam
