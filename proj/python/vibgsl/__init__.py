"""Graph structure learning with a variational information bottleneck."""

import json

from ._vibgsl import (
    ContractError,
    Dataset,
    DimensionError,
    Graph,
    Model,
    ParameterError,
    ValidationError,
    entropy,
    gaussian_kl,
    gradcheck,
    perturb,
    synth,
    timing_probe,
    verify_bounds,
)
from . import _vibgsl

__all__ = [
    "ContractError",
    "Dataset",
    "DimensionError",
    "Graph",
    "Model",
    "ParameterError",
    "ValidationError",
    "beta_sweep",
    "cross_validate",
    "default_config",
    "entropy",
    "gaussian_kl",
    "gradcheck",
    "perturb",
    "synth",
    "timing_probe",
    "train",
    "verify_bounds",
]


def _config_json(config):
    return json.dumps(config or {})


def default_config():
    return json.loads(_vibgsl._default_config())


def cross_validate(dataset, config=None):
    return json.loads(_vibgsl._cross_validate(dataset, _config_json(config)))


def beta_sweep(dataset, betas, config=None):
    return json.loads(_vibgsl._beta_sweep(dataset, _config_json(config), list(betas)))["reports"]


def train(dataset, config=None):
    """Train on every graph; returns (report, model)."""
    report, model = _vibgsl._train(dataset, _config_json(config))
    return json.loads(report), model
