"""Shape from defocus by min-sum loopy belief propagation."""

from .bp import DepthMap, PriorParams, Schedule, labeling_energy, pairwise_cost, run_bp
from .cost import CostVolume, LabelSet, build_cost_volume, build_label_set, data_cost_plane
from .defocus import (
    BlurSpec,
    CameraConfig,
    Direction,
    RelativeBlur,
    gaussian_kernel,
    relative_sigma,
    sigma_from_depth,
)
from .imaging import render_observation_stack, space_variant_blur
from .oracle import TinyInstance, chain_dp, exhaustive_map

__version__ = "0.1.0"
