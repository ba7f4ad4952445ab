"""Spherical-harmonic low-pass filtering of 3D point clouds."""
__version__ = "0.1.0"

from .cloud import Centroid, PointCloud, SphericalCoord, center, to_spherical
from .cloudio import CloudFormat, load_cloud, save_cloud
from .projection import GridSpec, RadialField, build_grid, project
from .sht import SHCoefficients, eval_ylm, forward_sht, inverse_sht, power_spectrum
from .lpf import FilterSpec, apply_filter, degree_weights, lowpass_cloud, reconstruct, resample
from .analysis import DisCoefMap, dis_coef, export_triangle, spectrum_delta
from .preprocess import PerturbSpec, SorParams, perturb, sor, srs
from .dataset import DefenseDatasetJob, make_defense_dataset

__all__ = [
    "Centroid", "PointCloud", "SphericalCoord", "center", "to_spherical",
    "CloudFormat", "load_cloud", "save_cloud",
    "GridSpec", "RadialField", "build_grid", "project",
    "SHCoefficients", "eval_ylm", "forward_sht", "inverse_sht", "power_spectrum",
    "FilterSpec", "apply_filter", "degree_weights", "lowpass_cloud", "reconstruct", "resample",
    "DisCoefMap", "dis_coef", "export_triangle", "spectrum_delta",
    "PerturbSpec", "SorParams", "perturb", "sor", "srs",
    "DefenseDatasetJob", "make_defense_dataset",
]
