"""Phase-2 data-driven surrogate: MLP classifier over the parameter space."""

from ecosweep.surrogate.mlp import (
    MLPSurrogate,
    init_params,
    load_model,
    loss_and_grads,
    save_model,
)
from ecosweep.surrogate.crossval import CvReport, cross_validate, stratified_group_folds

__all__ = [
    "CvReport",
    "MLPSurrogate",
    "cross_validate",
    "init_params",
    "load_model",
    "loss_and_grads",
    "save_model",
    "stratified_group_folds",
]
