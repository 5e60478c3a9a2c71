"""Monte Carlo study of random Voronoi cells and their limiting measure laws."""

from __future__ import annotations

__version__ = "0.1.0"

from .cells import CellMode, CellOptions, CellQuery, CellReport, resolve_cell
from .density import GridDensity, IsotropicGaussian, Mixture, UniformBox, density_from_spec
from .limit_law import limiting_moment, moment_quadrature, sample_dk, sample_limit_law
from .point_process import PointCloud, sample_iid, sample_poisson
from .stats import EmpiricalDistribution, Histogram, ks_two_sample

__all__ = [
    "CellMode",
    "CellOptions",
    "CellQuery",
    "CellReport",
    "EmpiricalDistribution",
    "GridDensity",
    "Histogram",
    "IsotropicGaussian",
    "Mixture",
    "PointCloud",
    "UniformBox",
    "__version__",
    "density_from_spec",
    "ks_two_sample",
    "limiting_moment",
    "moment_quadrature",
    "sample_dk",
    "sample_iid",
    "sample_limit_law",
    "sample_poisson",
    "resolve_cell",
]
