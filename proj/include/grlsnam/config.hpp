#pragma once

#include "grlsnam/evalkit.hpp"
#include "grlsnam/learning.hpp"

#include <string>

namespace grlsnam {

/// Fixed dual weights used when no checkpoint is given.
struct WeightDefaults {
  double beta = 1.0;
  double lambda = 1.0;
  double mu = 4.0;
  double alpha = 1.0;
};

struct EvalOptions {
  int episodes = 50;
  double lref_resolution = 0.05;
  double d_thr = 1.5;
  double deform_gain = 1.0;
  std::string perturbation = "nominal";
};

struct DatasetOptions {
  int scenes = 32;
  int horizon = 4;
  double ref_perturb = 0.3;  // relative spread of reference weights
};

/// Every tunable of a run. Serialised as TOML (hand-edited) or JSON.
struct RunConfig {
  std::string method = "grlsnam";
  std::string family = "test_id";
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int count = 1;
  bool plot = false;
  std::string checkpoint;  // optional meta-regressor checkpoint
  EpisodeConfig episode;
  WeightDefaults weights;
  PfGains pf;
  DwaConfig dwa;
  TrainConfig train;
  DatasetOptions dataset;
  EvalOptions eval;

  /// Range checks with the offending dotted key in the message.
  void validate() const;
};

/// Tuned defaults per scene family: test_id/train/test_ood (ring, L = 16),
/// bottleneck (ring, L = 6) and dungeon (point agent on a pixel grid).
RunConfig preset_config(const std::string& family);

/// Missing keys keep the value of `base`; unknown keys raise ConfigError.
RunConfig config_from_json(const std::string& text, const RunConfig& base = {});
RunConfig config_from_toml(const std::string& text, const RunConfig& base = {});
std::string config_to_json(const RunConfig& cfg);
std::string config_to_toml(const RunConfig& cfg);

/// Dispatches on the extension (.toml or .json). A top-level `preset` key
/// selects the base preset before the rest of the file is applied.
RunConfig load_config(const std::string& path);

/// Meta policy for a config: the checkpoint when set, else FixedMeta.
std::unique_ptr<MetaPolicy> make_meta(const RunConfig& cfg);

/// Settings for evaluate()/batch_eval() derived from a config.
EvalSettings eval_settings(const RunConfig& cfg, const MetaPolicy* meta);

}  // namespace grlsnam
