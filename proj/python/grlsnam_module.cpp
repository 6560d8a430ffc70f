#include "grlsnam/artifacts.hpp"
#include "grlsnam/config.hpp"
#include "grlsnam/generate.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace grlsnam;

namespace {

py::dict metrics_dict(const EpisodeMetrics& m) {
  py::dict d;
  d["method"] = m.method;
  d["success"] = m.success;
  d["cause"] = m.cause;
  d["path_length"] = m.path_length;
  d["l_ref"] = m.l_ref;
  d["spl"] = m.spl;
  d["detour"] = m.detour;
  d["min_clearance"] = m.min_clearance;
  d["collisions"] = m.collisions;
  d["mapping_ratio"] = m.mapping_ratio;
  d["goal_distance"] = m.goal_distance;
  d["steps"] = m.steps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_grlsnam, m) {
  m.doc() = "Hamiltonian-energy navigation core";
  py::register_exception<Error>(m, "GrlsnamError");

  m.def("ipc_barrier", &ipc_barrier, py::arg("d"), py::arg("d_hat"));
  m.def("ipc_barrier_grad", &ipc_barrier_grad, py::arg("d"), py::arg("d_hat"));
  m.def("spl", &spl, py::arg("success"), py::arg("length"), py::arg("l_ref"));

  m.def(
      "generate_workspace_json",
      [](const std::string& family, std::uint64_t seed) { return workspace_to_json(generate_family(family, seed)); },
      py::arg("family"), py::arg("seed"), "Generated workspace as JSON text (continuous families only).");

  m.def("preset_config_toml", [](const std::string& family) { return config_to_toml(preset_config(family)); },
        py::arg("family"));

  m.def(
      "run",
      [](const std::string& family, std::uint64_t seed, const std::string& method, const std::string& config_toml) {
        RunConfig cfg = config_toml.empty() ? preset_config(family) : config_from_toml(config_toml, preset_config(family));
        const Workspace ws = generate_family(family, seed);
        const auto meta = make_meta(cfg);
        py::gil_scoped_release release;
        const EpisodeMetrics met = evaluate(parse_method(method), ws, eval_settings(cfg, meta.get()), seed);
        py::gil_scoped_acquire acquire;
        return metrics_dict(met);
      },
      py::arg("family"), py::arg("seed"), py::arg("method") = "grlsnam", py::arg("config_toml") = "",
      "Run one episode on a generated workspace and return its metrics.");
}
