// grlsnam: generate | dataset | run | train | eval | plot

#include "grlsnam/artifacts.hpp"
#include "grlsnam/config.hpp"
#include "grlsnam/generate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace grlsnam;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string method;
};

int env_threads() {
  const char* s = std::getenv("GRLSNAM_THREADS");
  if (!s) return 1;
  try {
    return std::max(1, std::stoi(s));
  } catch (const std::exception&) {
    throw ConfigError("GRLSNAM_THREADS must be an integer");
  }
}

RunConfig resolve(const Common& c, const std::string& family_hint = "") {
  RunConfig cfg = c.config.empty() ? preset_config(family_hint.empty() ? "test_id" : family_hint)
                                   : load_config(c.config);
  if (c.seed_set) cfg.seed = c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!c.method.empty()) cfg.method = c.method;
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

std::string pad(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", i);
  return buf;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "TOML or JSON run config");
  app->add_option_function<std::uint64_t>("--seed", [&c](const std::uint64_t& s) {
    c.seed = s;
    c.seed_set = true;
  }, "master seed");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--method", c.method, "grlsnam | pf | dwa | astar_rigid | astar_deform");
}

int cmd_generate(const Common& c, const std::string& family, int count) {
  RunConfig cfg = resolve(c, family);
  if (!family.empty()) cfg.family = family;
  if (count >= 0) cfg.count = count;
  fs::create_directories(cfg.out_dir);
  for (int i = 0; i < cfg.count; ++i) {
    const Workspace ws = generate_family(cfg.family, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    save_workspace((fs::path(cfg.out_dir) / (cfg.family + "_" + pad(i) + ".json")).string(), ws);
  }
  std::cout << "wrote " << cfg.count << " " << cfg.family << " workspaces to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_dataset(const Common& c, const std::string& family, int scenes) {
  RunConfig cfg = resolve(c, family);
  if (!family.empty()) cfg.family = family;
  if (scenes >= 0) cfg.dataset.scenes = scenes;
  EnergyWeights base;
  base.beta = cfg.weights.beta;
  base.lambda = cfg.weights.lambda;
  base.mu = cfg.weights.mu;
  const auto data = make_dataset(cfg.family, cfg.dataset.scenes, cfg.dataset.horizon, cfg.episode.tau,
                                 cfg.episode.d_hat, cfg.episode.sense_half_extent, base, cfg.weights.alpha,
                                 cfg.dataset.ref_perturb, cfg.seed);
  fs::create_directories(cfg.out_dir);
  for (std::size_t i = 0; i < data.size(); ++i)
    write_file(fs::path(cfg.out_dir) / ("datum_" + pad(static_cast<int>(i)) + ".json"), datum_to_json(data[i]));
  std::cout << "wrote " << data.size() << " training samples to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_run(const Common& c, const std::string& workspace_path, bool plot) {
  std::optional<Workspace> given;
  if (!workspace_path.empty()) given = load_workspace(workspace_path);
  // without a config, a generated workspace brings its own preset
  std::string hint;
  if (given && !given->family.empty()) {
    try {
      preset_config(given->family);
      hint = given->family;
    } catch (const ConfigError&) {
    }
  }
  RunConfig cfg = resolve(c, hint);
  if (plot) cfg.plot = true;
  const Workspace ws = given ? *given : generate_family(cfg.family, cfg.seed);
  const auto meta = make_meta(cfg);
  const EvalSettings st = eval_settings(cfg, meta.get());
  const Method m = parse_method(cfg.method);
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  EpisodeResult res;
  const EpisodeMetrics met = evaluate(m, ws, st, cfg.seed, &res);
  if (m == Method::AstarRigid || m == Method::AstarDeform) {
    nlohmann::json j = {{"method", cfg.method}, {"feasible", met.success}, {"L_ref", met.l_ref},
                        {"path_length", met.path_length}, {"min_clearance", met.min_clearance},
                        {"mapping_ratio", met.mapping_ratio}};
    write_file(out / "summary.json", j.dump(2) + "\n");
    std::cout << cfg.method << ": feasible=" << met.success << " L=" << met.path_length << "\n";
    return 0;
  }
  {
    std::ofstream f(out / "steps.csv", std::ios::binary);
    write_step_csv(f, res);
  }
  write_file(out / "summary.json", summary_json(res, met));
  if (cfg.plot) {
    std::vector<Vec2> path;
    for (std::size_t n = 0; n < res.steps.size(); ++n) path.push_back(res.position(n));
    std::ofstream f(out / "map.svg");
    write_map_svg(f, ws, path, res.windows, res.snapshots);
  }
  std::cout << cfg.method << ": " << met.cause << " steps=" << met.steps << " L=" << met.path_length
            << " spl=" << met.spl << " mapping=" << met.mapping_ratio << "\n";
  return 0;
}

int cmd_train(const Common& c, const std::string& dataset_dir) {
  RunConfig cfg = resolve(c);
  const auto data = load_dataset(dataset_dir);
  if (data.empty()) throw ConfigError("dataset " + dataset_dir + " contains no samples");
  MetaRegressor reg;
  reg.init_random(cfg.seed, 0.1);
  EnergyWeights w0;
  w0.beta = cfg.weights.beta;
  w0.lambda = cfg.weights.lambda;
  w0.mu = cfg.weights.mu;
  reg.init_to(w0, cfg.weights.alpha);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  tc.multi.tau = cfg.episode.tau;
  const TrainLog log = train_offline(reg, data, tc);
  fs::create_directories(cfg.out_dir);
  save_checkpoint((fs::path(cfg.out_dir) / "meta.ckpt").string(), reg);
  std::ofstream f(fs::path(cfg.out_dir) / "loss.csv");
  f << "epoch,loss\n";
  for (std::size_t i = 0; i < log.epoch_loss.size(); ++i) f << i << ',' << log.epoch_loss[i] << '\n';
  std::cout << "trained on " << data.size() << " samples; final loss "
            << (log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back()) << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& dir, const std::vector<std::string>& method_names) {
  RunConfig cfg = resolve(c);
  std::vector<Workspace> wss;
  if (!dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) wss.push_back(load_workspace(p.string()));
  } else {
    for (int i = 0; i < cfg.eval.episodes; ++i)
      wss.push_back(generate_family(cfg.family, derive_seed(cfg.seed, static_cast<std::uint64_t>(i))));
  }
  std::vector<Method> methods;
  for (const auto& n : method_names.empty() ? std::vector<std::string>{cfg.method} : method_names)
    methods.push_back(parse_method(n));
  const auto meta = make_meta(cfg);
  EvalSettings st = eval_settings(cfg, meta.get());
  st.threads = env_threads();
  std::vector<EpisodeMetrics> runs;
  const auto rows = batch_eval(methods, wss, st, {cfg.seed}, &runs);
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream f(fs::path(cfg.out_dir) / "table.md");
    write_markdown_table(f, rows);
  }
  {
    std::ofstream f(fs::path(cfg.out_dir) / "table.csv");
    write_csv_table(f, rows);
  }
  {
    std::ofstream f(fs::path(cfg.out_dir) / "episodes.csv");
    write_metrics_csv(f, runs);
  }
  write_markdown_table(std::cout, rows);
  for (const auto& r : rows) std::cout << r.method << " success " << r.success_rate << "\n";
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& workspace_path, const std::string& out_dir) {
  std::ifstream f(csv);
  if (!f) throw Error("cannot open " + csv);
  const StepTable t = read_step_csv(f);
  fs::create_directories(out_dir);
  if (!workspace_path.empty()) {
    const Workspace ws = load_workspace(workspace_path);
    std::ofstream m(fs::path(out_dir) / "map.svg");
    write_map_svg(m, ws, t.rows.empty() ? std::vector<Vec2>{} : table_path(t), {});
  }
  std::ofstream s(fs::path(out_dir) / "weights.svg");
  write_timeseries_svg(s, t);
  std::cout << "wrote plots to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian-energy navigation with stagewise sensing"};
  app.require_subcommand(1);
  Common common;

  std::string family;
  int count = -1;
  auto* gen = app.add_subcommand("generate", "write procedurally generated workspaces");
  add_common(gen, common);
  gen->add_option("--family", family, "train | test_id | test_ood | dungeon | bottleneck");
  gen->add_option("--count", count, "number of workspaces");

  int scenes = -1;
  auto* ds = app.add_subcommand("dataset", "write offline training samples");
  add_common(ds, common);
  ds->add_option("--family", family, "scene family");
  ds->add_option("--scenes", scenes, "number of samples");

  std::string workspace;
  bool plot = false;
  auto* run = app.add_subcommand("run", "run one episode and write its artifacts");
  add_common(run, common);
  run->add_option("--workspace", workspace, "workspace JSON (default: generate from the config family)");
  run->add_flag("--plot", plot, "also write map.svg");

  std::string dataset;
  auto* train = app.add_subcommand("train", "train the meta-regressor");
  add_common(train, common);
  train->add_option("--dataset", dataset, "directory of sample JSON files")->required();

  std::string dir;
  std::vector<std::string> methods;
  auto* eval = app.add_subcommand("eval", "compare methods over many workspaces");
  add_common(eval, common);
  eval->add_option("--workspaces", dir, "directory of workspace JSON files");
  eval->add_option("--methods", methods, "methods to compare")->delimiter(',');

  std::string csv;
  auto* plt = app.add_subcommand("plot", "render SVG plots from a step CSV");
  add_common(plt, common);
  plt->add_option("--csv", csv, "step CSV")->required();
  plt->add_option("--workspace", workspace, "workspace JSON for the map overlay");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(common, family, count);
    if (*ds) return cmd_dataset(common, family, scenes);
    if (*run) return cmd_run(common, workspace, plot);
    if (*train) return cmd_train(common, dataset);
    if (*eval) return cmd_eval(common, dir, methods);
    if (*plt) return cmd_plot(csv, workspace, common.out.empty() ? "." : common.out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
