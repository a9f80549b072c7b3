"""Composite physics-informed networks for singularly perturbed boundary-value problems."""

from ._cpinn import (
    ConfigError,
    DivergenceError,
    IoError,
    Model,
    analytic_solution,
    boundary_points,
    lhs_2d,
    manufactured_source,
    problems,
    safe_exp,
    train,
    uniform_collocation_1d,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "IoError",
    "Model",
    "analytic_solution",
    "boundary_points",
    "lhs_2d",
    "manufactured_source",
    "problems",
    "safe_exp",
    "train",
    "uniform_collocation_1d",
]
