"""Spatial predator-prey simulator plus a two-phase parameter exploration toolkit.

Phase 1 (model-based screening): Latin hypercube designs, replicated batch
simulation, aleatoric-limit estimation, ANOVA variance decomposition,
regression-tree thresholding and replication sizing.

Phase 2 (data-driven analysis): MLP surrogate classification, variance-based
sensitivity indices, PDP/ICE response curves and a dual-forest conformal
uncertainty decomposition.
"""

__version__ = "0.1.0"

from ecosweep.space import ParameterSpace, default_space, refine_space
from ecosweep.design import Design, lhs_sample, expand_replicates
from ecosweep.sim import SimConfig, SpeciesConstants, Outcome, run_simulation
from ecosweep.runner import Dataset, run_batch, save_dataset, load_dataset

__all__ = [
    "ParameterSpace",
    "default_space",
    "refine_space",
    "Design",
    "lhs_sample",
    "expand_replicates",
    "SimConfig",
    "SpeciesConstants",
    "Outcome",
    "run_simulation",
    "Dataset",
    "run_batch",
    "save_dataset",
    "load_dataset",
    "__version__",
]
