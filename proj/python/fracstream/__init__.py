"""Time-fractional PDE solvers with incrementally compressed solution history."""

from ._fracstream import (
    ConfigError,
    FactorizationError,
    Grid2D,
    IncrementalSvd,
    InvalidInput,
    SparseSpdMatrix,
    assemble_mass,
    assemble_stiffness,
    bench_csv,
    build_full,
    build_grid,
    dense_svd_econ,
    dense_svd_full,
    l1_weights,
    run_bench,
    solve,
    wave_weights,
)

__all__ = [
    "ConfigError",
    "FactorizationError",
    "Grid2D",
    "IncrementalSvd",
    "InvalidInput",
    "SparseSpdMatrix",
    "assemble_mass",
    "assemble_stiffness",
    "bench_csv",
    "build_full",
    "build_grid",
    "dense_svd_econ",
    "dense_svd_full",
    "l1_weights",
    "run_bench",
    "solve",
    "wave_weights",
]
