"""Full-reference quality and QoE prediction for stereoscopic 360-degree images."""
from .binocular import EnergyMaps, fuse_viewport, local_energy, rivalry_weights
from .depth import diff_mean, diff_stddev, difference_map, entropy
from .evaluation import cross_validate, fit_logistic5, plcc_rmse, srocc
from .fsim import fsim, gradient_magnitude, phase_congruency
from .pipeline import PipelineConfig, extract_image_features
from .projection import extract_viewport, sphere_to_erp
from .regression import SvrModel, assemble_features, predict, train
from .viewpoints import SphericalViewpoint, ViewpointSet, sample_viewpoints

__version__ = "0.1.0"
