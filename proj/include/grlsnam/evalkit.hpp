#pragma once

#include "grlsnam/baselines.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace grlsnam {

struct EpisodeMetrics {
  std::string method;
  bool success = false;
  std::string cause;
  double path_length = 0.0;
  double l_ref = 0.0;
  double spl = 0.0;
  double detour = 0.0;  // L / L_ref; 0 when L_ref is unknown
  double min_clearance = 0.0;
  double mean_clearance = 0.0;
  int collisions = 0;          // steps with true clearance < 0
  double smoothness = 0.0;     // mean |heading change| per step, rad
  bool grazing = false;        // min clearance <= d_thr
  double mapping_ratio = 0.0;
  double goal_distance = 0.0;  // terminal distance to the global goal
  int steps = 0;
  double wall_time = 0.0;
};

/// S L_ref / max(L, L_ref); 0 on failure.
double spl(bool success, double length, double l_ref);

/// Mean absolute heading change between consecutive displacements; steps
/// shorter than 1e-9 are skipped. Zero for fewer than two displacements.
double smoothness(const std::vector<Vec2>& path);

EpisodeMetrics episode_metrics(const EpisodeResult& result, double l_ref, double d_thr = 1.5,
                               double wall_time = 0.0);

/// Sensing corruption applied per sensing event.
struct PerturbationSpec {
  double sigma_pos = 0.0;      // centre jitter std
  double sigma_r = 0.0;        // multiplicative radius error std
  double p_drop = 0.0;
  double p_hallucinate = 0.0;
  double damping_scale = 1.0;
  double sigma_vel = 0.0;      // velocity measurement noise std
  double halluc_r_lo = 0.3;
  double halluc_r_hi = 0.7;

  void validate() const;
  bool is_zero() const;
};

/// Robustness levels (noise, damping scale): the noise std drives centre
/// jitter, radius error and velocity noise together.
PerturbationSpec perturbation_level(const std::string& name);  // nominal | mild | severe

class PerturbationModel : public SensingPerturbation {
 public:
  explicit PerturbationModel(PerturbationSpec spec);
  void apply(EnvironmentContext& ctx, Rng& rng) const override;
  Vec2 velocity(const Vec2& v, Rng& rng) const override;
  double damping_scale() const override { return spec_.damping_scale; }
  const PerturbationSpec& spec() const { return spec_; }

 private:
  PerturbationSpec spec_;
};

enum class Method { GrlSnam, PotentialField, Dwa, AstarRigid, AstarDeform };
Method parse_method(const std::string& name);
std::string to_string(Method m);

struct EvalSettings {
  EpisodeConfig episode;
  PfGains pf;
  DwaConfig dwa;
  const MetaPolicy* meta = nullptr;  // required for GrlSnam
  PerturbationSpec perturb;
  double lref_resolution = 0.05;
  double d_thr = 1.5;
  double deform_gain = 1.0;
  int threads = 1;
};

/// Reference path length: rigid A* inflated by the agent's smallest body,
/// falling back to deformable A* when the rigid disc cannot pass. Returns 0
/// when neither finds a path.
double reference_length(const Workspace& ws, const EpisodeConfig& cfg, double resolution,
                        double deform_gain = 1.0);

/// One episode of `method` on `ws`; A* methods report their plan as the path.
EpisodeMetrics evaluate(Method method, const Workspace& ws, const EvalSettings& settings,
                        std::uint64_t seed, EpisodeResult* result = nullptr);

struct Stats {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

Stats summarize(std::vector<double> values);

struct Aggregate {
  std::string method;
  int episodes = 0;
  double success_rate = 0.0;
  std::map<std::string, Stats> all;           // every numeric metric
  std::map<std::string, Stats> success_only;  // same, over successful runs
};

Aggregate aggregate(const std::string& method, const std::vector<EpisodeMetrics>& runs);

/// Every (workspace, seed) pair for every method; episodes run on
/// settings.threads workers and are reduced in input order.
std::vector<Aggregate> batch_eval(const std::vector<Method>& methods,
                                  const std::vector<Workspace>& workspaces,
                                  const EvalSettings& settings,
                                  const std::vector<std::uint64_t>& seeds,
                                  std::vector<EpisodeMetrics>* runs = nullptr);

/// Method | SPL | Detour | MinClear | Mapping over successful runs.
void write_markdown_table(std::ostream& out, const std::vector<Aggregate>& rows);
void write_csv_table(std::ostream& out, const std::vector<Aggregate>& rows);
void write_metrics_csv(std::ostream& out, const std::vector<EpisodeMetrics>& runs);

}  // namespace grlsnam
