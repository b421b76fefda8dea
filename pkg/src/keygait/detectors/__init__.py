"""One-class detectors that fit a subject's templates and score queries.

All detectors share the fit/score contract in :mod:`.base`; higher
scores mean more likely genuine. `build_detector` turns a declarative
DetectorConfig into an instance, injecting a seed so ensemble members
and per-subject instances stay independently and reproducibly seeded.
"""

from __future__ import annotations

from ..config import DetectorConfig
from .autoencoder import TiedAutoencoder
from .base import Detector
from .contractive import ContractiveAutoencoder
from .ensemble import MeanEnsemble, ensemble_score
from .manhattan import ManhattanDetector
from .ocsvm import OneClassSvm
from .variational import VariationalAutoencoder

__all__ = [
    "Detector",
    "ManhattanDetector",
    "TiedAutoencoder",
    "ContractiveAutoencoder",
    "VariationalAutoencoder",
    "OneClassSvm",
    "MeanEnsemble",
    "ensemble_score",
    "build_detector",
    "DETECTOR_NAMES",
]

_SEEDED = {"autoencoder", "contractive", "variational"}

_CLASSES = {
    "manhattan": ManhattanDetector,
    "autoencoder": TiedAutoencoder,
    "contractive": ContractiveAutoencoder,
    "variational": VariationalAutoencoder,
    "ocsvm": OneClassSvm,
}

DETECTOR_NAMES = (*sorted(_CLASSES), "ensemble")


def build_detector(config: DetectorConfig, seed: int = 0) -> Detector:
    """Instantiate a detector from its config.

    Hyperparameters come from ``config.params``; ``seed`` overrides any
    seed in the params so the pipeline's per-subject derivation wins.
    Ensemble members get distinct seeds derived from ``seed`` by offset.
    """
    if config.name == "ensemble":
        if not config.members or len(config.members) < 2:
            raise ValueError("ensemble config needs at least 2 members")
        members = [
            build_detector(member, seed=seed + 1 + i)
            for i, member in enumerate(config.members)
        ]
        return MeanEnsemble(members)
    cls = _CLASSES.get(config.name)
    if cls is None:
        raise ValueError(
            f"unknown detector {config.name!r}; expected one of {DETECTOR_NAMES}"
        )
    params = dict(config.params)
    lists_ok = {"hidden_sizes"}
    for key in lists_ok:
        if key in params and isinstance(params[key], list):
            params[key] = tuple(params[key])
    if config.name in _SEEDED:
        params["seed"] = seed
    else:
        params.pop("seed", None)
    return cls(**params)
