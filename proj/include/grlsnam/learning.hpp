#pragma once

#include "grlsnam/navigator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace grlsnam {

/// Linear weight identification: y_t = sum_j eta_j g_{t,j}.
struct RegressionProblem {
  std::vector<VecX> targets;  // (p_t - p_{t+1}) / tau minus known terms
  std::vector<MatX> grads;    // dim x m, one column per feature
  std::vector<VecX> phi;      // optional feature values (vanishing-update log)
  double ridge = 0.0;

  int steps() const { return static_cast<int>(targets.size()); }
  int features() const { return grads.empty() ? 0 : static_cast<int>(grads.front().cols()); }
  void validate() const;
};

struct Gram {
  MatX G;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

Gram gram_matrix(const RegressionProblem& problem);

/// Normal-equation solve of the ridge least-squares loss. Throws
/// PersistentExcitationError when G is singular and ridge = 0.
VecX identify_weights(const RegressionProblem& problem);

/// Builds the problem from a conservative, undamped symplectic-Euler rollout:
/// the target is the momentum decrement minus the sensor gradient.
RegressionProblem regression_from_trajectory(const Trajectory& traj, const HamiltonianSpec& spec,
                                             double tau, double ridge = 0.0);

struct GdLog {
  VecX eta;
  std::vector<double> update;  // ||eta_{k+1} - eta_k|| max_t ||phi_t||
  std::vector<double> error;   // ||eta_k - eta_ref|| when a reference is given
  int iterations = 0;
};

/// Plain gradient descent on the ridge loss. step <= 0 picks 1 / L with
/// L = max-eig(G + ridge I). Stops early once the update falls below `tol`.
GdLog identify_weights_gd(const RegressionProblem& problem, double step, int max_iter, double tol,
                          const VecX* eta_ref = nullptr);

struct MetaLossWeights {
  double w_q = 1.0;
  double w_v = 1.0;
  double w_mu = 0.1;  // friction term
  double w_d = 0.5;   // multi-start penalty
};

/// w_q mean ||q - q_ref||^2 + w_v mean ||v - v_ref||^2 + w_mu (mu - mu_ref)^2
/// + w_d L_multi. Throws ConfigError on length mismatch.
double meta_loss(const std::vector<VecX>& q, const std::vector<VecX>& v,
                 const std::vector<VecX>& q_ref, const std::vector<VecX>& v_ref, double mu,
                 double mu_ref, const MetaLossWeights& w, double l_multi);

struct MultiStartOptions {
  int trials = 8;
  int steps = 20;
  double tau = 0.03;
  double speed = 1.0;      // initial momentum magnitude toward the obstacle
  double r_min = 0.2;
  double d_hat = 1.0;
  double floor = 1e-6;
  bool literal = false;    // b(r_min - clr) as written, not the corrected sign
};

/// Mean of b(max(clr - r_min, floor), d_hat) over the given clearances.
double multi_start_penalty_from_clearances(const std::vector<double>& clearances,
                                           const MultiStartOptions& options);

/// Samples trials near random obstacles with momentum toward them, runs
/// leapfrog on a unit-mass point under (weights, obstacles) and penalises the
/// minimum surface clearance reached. Zero without obstacles.
double multi_start_penalty(const EnvironmentContext& ctx, const EnergyWeights& weights,
                           const MultiStartOptions& options, Rng& rng);

/// Permutation-invariant set encoder g_xi. Tokens are the remembered
/// obstacles; outputs pass through softplus so every weight is >= 0.
class MetaRegressor {
 public:
  static constexpr int kTokenDim = 4;    // rel x, rel y, radius, surface distance
  static constexpr int kContextDim = 4;  // rel goal x, rel goal y, goal distance, speed

  explicit MetaRegressor(int embed = 16, int hidden = 32);

  int embed() const { return embed_; }
  int hidden() const { return hidden_; }
  int size() const { return static_cast<int>(xi_.size()); }
  VecX& params() { return xi_; }
  const VecX& params() const { return xi_; }

  double length_scale = 1.0;  // token / goal normalisation
  double goal_scale = 10.0;

  void init_random(std::uint64_t seed, double scale = 0.1);
  /// Zero every head weight and set biases so the outputs equal `w` for any input.
  void init_to(const EnergyWeights& w, double alpha);

  struct Cache {
    std::vector<int> index;
    MatX tokens;   // token_dim x n
    MatX e;        // embed x n
    VecX x, h;
    Eigen::Vector3d o;  // beta, lambda, mu pre-activations
    VecX s;             // alpha pre-activations
  };

  /// Forward pass. Tokens come from every context obstacle; alpha is emitted
  /// for in.active (for every token when in.active is empty).
  MetaOutput forward(const MetaInput& in, Cache* cache = nullptr) const;

  /// Parameter gradient for dL/d(beta, lambda, mu) and dL/dalpha (by index).
  VecX backward(const Cache& cache, const Eigen::Vector3d& d_out,
                const std::map<int, double>& d_alpha) const;

  /// Mask selecting the output-head parameters.
  VecX head_mask() const;

 private:
  int embed_, hidden_;
  VecX xi_;
  // offsets into xi_
  int w1_, b1_, w2_, b2_, wg_, bg_, wah_, wae_, ba_;
  int x_dim() const { return embed_ + kContextDim; }
};

class RegressorMeta : public MetaPolicy {
 public:
  explicit RegressorMeta(MetaRegressor reg) : reg_(std::move(reg)) {}
  MetaOutput propose(const MetaInput& in) const override { return reg_.forward(in); }
  const MetaRegressor& regressor() const { return reg_; }

 private:
  MetaRegressor reg_;
};

/// Offline sample: a short reference rollout generated under known weights.
struct SceneDatum {
  EnvironmentContext ctx;
  PhaseState z0;          // point agent, q = c
  double mass = 1.0;
  double d_hat = 1.0;
  double body = 0.0;
  double tau = 0.03;
  int horizon = 4;
  EnergyWeights ref;      // includes mu
  std::vector<VecX> q_ref, v_ref;

  MetaInput meta_input() const;
};

/// Rolls the reference trajectory out under `ref` (self-consistent datum).
SceneDatum make_scene_datum(const EnvironmentContext& ctx, const PhaseState& z0,
                            const EnergyWeights& ref, double d_hat, int horizon, double tau,
                            double body = 0.0);

/// Random near-obstacle states in generated workspaces of `family`, with
/// reference weights spread by +-spread (relative) around `base`.
std::vector<SceneDatum> make_dataset(const std::string& family, int scenes, int horizon, double tau,
                                     double d_hat, double half_extent, const EnergyWeights& base,
                                     double base_alpha, double spread, std::uint64_t seed);

/// Predicted rollout positions and velocities under weights w.
void rollout_datum(const SceneDatum& d, const EnergyWeights& w, std::vector<VecX>& q,
                   std::vector<VecX>& v);

struct TrainConfig {
  int epochs = 20;
  int batch = 8;
  double lr = 3e-4;
  double momentum = 0.9;
  double clip = 5.0;
  double fd_rel = 1e-4;
  MetaLossWeights loss;
  MultiStartOptions multi;
  bool use_multi = true;
  bool heads_only = false;
  std::uint64_t seed = 0;
};

struct TrainLog {
  std::vector<double> epoch_loss;
};

/// Loss of one datum under the regressor's current parameters.
double datum_loss(const MetaRegressor& reg, const SceneDatum& d, const TrainConfig& cfg);

/// Momentum gradient descent on the meta loss. Rollout sensitivities by
/// central differences in (eta, mu). Throws NumericError if the loss turns
/// non-finite.
TrainLog train_offline(MetaRegressor& reg, const std::vector<SceneDatum>& data,
                       const TrainConfig& cfg);

/// Supervised fit of the outputs (squared error over beta, lambda, mu and
/// every alpha); used for warm starts and head-only checks.
TrainLog fit_outputs(MetaRegressor& reg, const std::vector<MetaInput>& inputs,
                     const std::vector<MetaOutput>& targets, const TrainConfig& cfg);

/// Checkpoint: one JSON header line, then the raw little-endian doubles.
void save_checkpoint(std::ostream& out, const MetaRegressor& reg);
MetaRegressor load_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const MetaRegressor& reg);
MetaRegressor load_checkpoint(const std::string& path);

}  // namespace grlsnam
