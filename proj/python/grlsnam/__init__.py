"""Python bindings for the grlsnam navigation core."""

from ._grlsnam import (  # noqa: F401
    GrlsnamError,
    generate_workspace_json,
    ipc_barrier,
    ipc_barrier_grad,
    preset_config_toml,
    run,
    spl,
)

__all__ = [
    "GrlsnamError",
    "generate_workspace_json",
    "ipc_barrier",
    "ipc_barrier_grad",
    "preset_config_toml",
    "run",
    "spl",
]
