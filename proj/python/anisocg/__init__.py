"""Matrix-free preconditioned CG for strongly anisotropic elliptic equations.

Thin wrapper around the C++ extension module; all numerics live there.
Fields are exchanged as C-contiguous (m, m, n_z) float64 arrays.
"""

from ._anisocg import (
    KernelTimings,
    OperatorContext,
    PanelGeometry,
    SolveResult,
    VerticalGrid,
    VerticalProfile,
    anisotropy,
    apply,
    assemble_csr,
    cost_model,
    cubed_sphere_panel,
    planar_panel,
    precondition,
    random_field,
    solve,
    true_residual,
    vertical_grid,
    vertical_profile,
)

__all__ = [
    "KernelTimings",
    "OperatorContext",
    "PanelGeometry",
    "SolveResult",
    "VerticalGrid",
    "VerticalProfile",
    "anisotropy",
    "apply",
    "assemble_csr",
    "cost_model",
    "cubed_sphere_panel",
    "planar_panel",
    "precondition",
    "random_field",
    "solve",
    "true_residual",
    "vertical_grid",
    "vertical_profile",
]
