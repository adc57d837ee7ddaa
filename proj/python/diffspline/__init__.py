"""Variational interpolation on torus diffeomorphism groups.

Thin re-export of the compiled core. Fields are float64 arrays shaped
(dim, n) in one dimension and (dim, n, n) in two; time-sampled paths add a
leading node axis.
"""

from ._core import (
    DiffsplineError,
    GridSpec,
    ad,
    ad_dagger,
    coad,
    compose,
    compose_field,
    dual_norm_sq,
    flat,
    forced_rollout,
    geodesic_shoot,
    gronwall_monitor,
    inner_hs,
    interpolate_sequence,
    inverse,
    jacobian,
    node_coords,
    objective,
    run_checks,
    sharp,
    solve,
    transport_residual,
)

__all__ = [
    "DiffsplineError",
    "GridSpec",
    "ad",
    "ad_dagger",
    "coad",
    "compose",
    "compose_field",
    "dual_norm_sq",
    "flat",
    "forced_rollout",
    "geodesic_shoot",
    "gronwall_monitor",
    "inner_hs",
    "interpolate_sequence",
    "inverse",
    "jacobian",
    "node_coords",
    "objective",
    "run_checks",
    "sharp",
    "solve",
    "transport_residual",
]

__version__ = "1.0.0"
