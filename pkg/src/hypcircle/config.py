"""
Live experiment objects built from validated schemas.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

from pydantic import ValidationError

from .errors import ConfigError
from .fuchsian import FuchsianGroup, resolve_group
from .observables import (ConstantObservable, GammaBump, ModelEigenfunction, Mollifier, Observable,
                          SpectralParams, TangentialDerivative)
from .schema import ExperimentConfig, ObservableSpec, parse_nu
from .sl2 import SL2Matrix, iwasawa_coords

logger = logging.getLogger(__name__)

DEFAULT_BASE = (0.1, 1.2, 0.3)
DEFAULT_BUMP_CENTER = (0.0, 1.15, 0.5)


def build_observable(spec: ObservableSpec, G: FuchsianGroup) -> Observable:
    p = spec.params
    if spec.kind == "constant":
        return ConstantObservable(p.get("c", 1.0))
    if spec.kind == "eigenfunction":
        return ModelEigenfunction(parse_nu(p["nu"]), int(p.get("n", 0)))
    if spec.kind == "bump":
        x, y, angle = (float(p.get(k, d)) for k, d in zip(("x", "y", "angle"), DEFAULT_BUMP_CENTER))
        return GammaBump(G, iwasawa_coords(x, y, angle), float(p.get("width", 0.2)),
                         float(p.get("amplitude", 1.0)))
    if spec.kind == "tangent":
        return TangentialDerivative(Mollifier(G, float(p.get("delta", 0.5))), p.get("c", 0.0))
    return Mollifier(G, float(p.get("delta", 0.3)))


@dataclass
class Experiment:
    """The internal representation of one run: config echo plus resolved objects."""
    config: ExperimentConfig
    group: FuchsianGroup
    observable: Observable
    base_point: SL2Matrix
    params: Optional[SpectralParams] = None

    @property
    def name(self) -> str:
        return self.config.name or self.config.subcommand

    @classmethod
    def from_schema(cls, schema: ExperimentConfig) -> "Experiment":
        group = resolve_group(schema.group)
        observable = build_observable(schema.observable, group)
        x, y, angle = schema.options.get("base", DEFAULT_BASE)
        params = None
        if isinstance(observable, ModelEigenfunction):
            params = SpectralParams.from_nu(observable.nu, observable.n, schema.theta)
        elif isinstance(observable, ConstantObservable):
            params = SpectralParams.from_nu(1.0, 0, schema.theta)
        logger.debug("experiment %s: group=%s observable=%s", schema.name, group.name, observable.name)
        return cls(config=schema, group=group, observable=observable,
                   base_point=iwasawa_coords(float(x), float(y), float(angle)), params=params)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Experiment":
        return cls.from_schema(load_config(data))


def load_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment configuration: {e}") from e
