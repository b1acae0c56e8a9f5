"""Python bindings for the fairdef C++ library."""

from ._fairdef import (
    FairdefError,
    eod,
    fedasl_weights,
    fednolowe_weights,
    load_dataset,
    parse_dataset,
    project_simplex,
    run_config,
    run_defense,
    spd,
    synthetic_csv,
)

__all__ = [
    "FairdefError",
    "eod",
    "fedasl_weights",
    "fednolowe_weights",
    "load_dataset",
    "parse_dataset",
    "project_simplex",
    "run_config",
    "run_defense",
    "spd",
    "synthetic_csv",
]
