"""Boundary-MPS importance sampling over a column partition."""

from .envs import (BoundaryEnvs, ColumnLayout, EnvError, build_layouts,
                   build_norm_envs, env_norm_estimate)
from .mps import MPSError, max_bond_dim, mps_compress, mps_norm, mps_overlap, mps_scalar
from .sample import (BatchStats, SampleAbort, SampleRecord, bootstrap_var_omega,
                     sample_batch, sample_one, weight_diagnostics)

__all__ = [
    "BoundaryEnvs", "ColumnLayout", "EnvError", "build_layouts", "build_norm_envs",
    "env_norm_estimate",
    "MPSError", "max_bond_dim", "mps_compress", "mps_norm", "mps_overlap", "mps_scalar",
    "BatchStats", "SampleAbort", "SampleRecord", "bootstrap_var_omega", "sample_batch",
    "sample_one", "weight_diagnostics",
]
