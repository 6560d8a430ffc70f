#pragma once

#include "grlsnam/coverage.hpp"
#include "grlsnam/dynamics.hpp"
#include "grlsnam/rng.hpp"
#include "grlsnam/ring.hpp"
#include "grlsnam/stages.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace grlsnam {

using Vec3 = Eigen::Vector3d;

struct Observables {
  double clr = 0.0;
  double dist = 0.0;
  double speed = 0.0;

  Vec3 y() const { return Vec3(-clr, dist, -speed); }
};

/// clr = min(barrier distances at q, shape clearances), capped at d_hat;
/// dist = ||c - x_g||; speed = ||M^{-1} p|| over the frame block.
Observables compute_observables(const PhaseState& z_next, const HamiltonianSpec& spec,
                                const Vec2& x_goal, const std::vector<double>& shape_clearances);

enum class TargetMode { Relative, Fixed };

struct Setpoints {
  double m_safe = 0.1;
  double eps_prog = 0.05;
  double v_min = 0.3;
  double clr_star = 0.3;
  double dist_star = 0.0;
  double speed_star = 0.8;
};

Vec3 observable_target(const Vec3& y, TargetMode mode, const Setpoints& sp);

/// J = rho J_prev + (1 - rho) dy dz^T / (||dz||^2 + eps).
MatX secant_jacobian_update(const MatX& J_prev, const Vec3& dy, const VecX& dz, double rho,
                            double eps);

/// (J^T J + lambda I)^{-1} J^T dy_des. Throws SingularSystemError when the
/// system is singular (only possible for lambda = 0).
VecX tikhonov_step(const MatX& J, const Vec3& dy_des, double lambda);

enum class UpdateForm { Additive, Convex };

/// Additive: max(0, zeta + kappa .* dzeta). Convex: max(0, (1 - kappa) .* zeta
/// + kappa .* dzeta).
VecX project_update(const VecX& zeta, const VecX& dzeta, const VecX& kappa,
                    UpdateForm form = UpdateForm::Additive);

/// (P^T P + lambda_u I)^{-1} P^T r clipped to [lo, hi] componentwise.
Vec2 port_correction(const Eigen::Matrix<double, 3, 2>& P, const Vec3& r, double lambda_u,
                     const Vec2& lo, const Vec2& hi);

struct MetaInput {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Vec2 stage_goal = Vec2::Zero();
  double body = 0.0;
  double d_hat = 1.0;
  const EnvironmentContext* context = nullptr;  // remembered obstacles
  std::vector<int> active;                       // indices within d_hat
};

struct MetaOutput {
  double beta = 1.0;
  double lambda = 1.0;
  double mu = 4.0;
  std::map<int, double> alpha;
};

/// Coefficient proposals g_xi(E). Implementations must be deterministic.
class MetaPolicy {
 public:
  virtual ~MetaPolicy() = default;
  virtual MetaOutput propose(const MetaInput& in) const = 0;
};

/// Fixed weights; every active obstacle gets `alpha`.
class FixedMeta : public MetaPolicy {
 public:
  FixedMeta(double beta, double lambda, double mu, double alpha)
      : beta_(beta), lambda_(lambda), mu_(mu), alpha_(alpha) {}
  MetaOutput propose(const MetaInput& in) const override;

 private:
  double beta_, lambda_, mu_, alpha_;
};

/// Sensing corruption hooks; implemented by the evaluation harness.
class SensingPerturbation {
 public:
  virtual ~SensingPerturbation() = default;
  virtual void apply(EnvironmentContext& ctx, Rng& rng) const = 0;
  virtual Vec2 velocity(const Vec2& v, Rng& rng) const = 0;
  virtual double damping_scale() const = 0;
};

enum class AgentKind { Ring, Point };

struct AgentConfig {
  AgentKind kind = AgentKind::Ring;
  RingParams ring;
  double M_c = 1.5;
  double inertia = 0.6;
  double gamma_theta = 1.6;
  double gamma_s = 2.0;
  bool damp_shape = true;       // false sets the shape damping to zero
  double point_radius = 0.0;    // body radius of the point agent
};

struct AdaptConfig {
  bool enabled = true;
  double rho = 0.9;
  double eps = 1e-2;  // also damps secants built from noisy observables
  double kappa_beta = 0.25;   // beta and lambda
  double kappa_gamma = 0.05;  // mu
  double kappa_alpha = 0.4;
  double lambda_zeta = 1.0;
  int k_alpha = 2;
  UpdateForm form = UpdateForm::Additive;
  TargetMode mode = TargetMode::Relative;
  Setpoints setpoints;
  double j0_scale = 1e-2;   // sign-structured initial Jacobian; 0 gives zeros
  bool port = true;
  double kappa_v = 0.5;
  double lambda_u = 1.0;
  Vec2 u_lo = Vec2::Constant(-1.0);
  Vec2 u_hi = Vec2::Constant(1.0);
  bool learn_port = false;  // secant recipe on P as well
};

struct EpisodeConfig {
  int T_y = 10;
  int T_f = 5;
  int T_o = 1;
  double tau = 0.03;
  int N_max = 4000;
  double eps_goal = 0.25;
  int stuck_window = 50;
  double eps_stuck = 0.05;
  double d_hat = 1.0;
  double sense_half_extent = 1.0;
  double sensor_weight = 1.0;
  bool use_stages = true;
  StageOptions stages;
  ExitOptions exits;
  double eps_stage = 0.3;
  bool waypoints = false;  // line-of-sight waypoints toward the stage exit
  double waypoint_inflate = 0.0;
  double waypoint_resolution = 1.0;
  SenseOptions sense;
  double coverage_resolution = 0.0;  // 0 means d_hat / 8
  double v_max = 0.0;                // 0 disables the speed cap
  AgentConfig agent;
  AdaptConfig adapt;
  bool record_snapshots = false;
  int snapshot_every = 50;

  void validate() const;
};

enum class Termination { Success, Timeout, Collision, Stuck, DeadEnd };
std::string to_string(Termination t);

struct StepRecord {
  double t = 0.0;
  VecX q, p;
  double H = 0.0;
  Observables obs;
  EnergyBreakdown energy;
  double beta = 0.0, lambda = 0.0, alpha_sum = 0.0, mu = 0.0;
  int active_count = 0;
  Vec2 u_f = Vec2::Zero();
  Vec2 stage_goal = Vec2::Zero();
  double true_clearance = 0.0;  // ground truth, never fed back
  int stage = -1;
};

struct EpisodeResult {
  std::string method = "grlsnam";
  StateLayout layout;
  std::vector<StepRecord> steps;
  Termination cause = Termination::Timeout;
  std::vector<Window> windows;
  double mapping_ratio = 0.0;
  double side_length = 0.0;
  double body_radius = 0.0;  // nominal (s = 1)
  Vec2 goal = Vec2::Zero();
  std::vector<std::vector<Vec2>> snapshots;  // ring boundaries
  std::string note;

  Vec2 position(std::size_t n) const { return steps[n].q.segment<2>(layout.frame()); }
};

/// Body radius of the agent at s = 1 used for ground-truth clearance.
double agent_body_radius(const AgentConfig& agent);

/// The online loop. Sensing every T_y steps (and on stage switches), meta
/// proposals every T_f steps, shape rollout every T_o steps, one
/// symplectic-Euler step plus secant/Tikhonov/port adaptation per step.
EpisodeResult run_episode(const Workspace& ws, const EpisodeConfig& cfg, const MetaPolicy& meta,
                          std::uint64_t seed = 0, const SensingPerturbation* perturb = nullptr);

}  // namespace grlsnam
