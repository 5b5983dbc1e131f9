"""
Pydantic schemas for experiment presets, CLI configs and run manifests.
"""

import math
import re
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

SCHEMA_VERSION = "hypcircle-v1"
FOUR_PI = 4.0 * math.pi

Subcommand = Literal["ode-check", "expand", "equidist", "dlt", "translate", "count", "avg-count"]
ObservableKind = Literal["constant", "eigenfunction", "bump", "mollifier", "tangent"]

KIND_ALIASES = {
    "const": "constant",
    "constant": "constant",
    "eigen": "eigenfunction",
    "eigenfunction": "eigenfunction",
    "bump": "bump",
    "mollifier": "mollifier",
    "tangent": "tangent",
}

DEFAULT_T_GRIDS = {
    "ode-check": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
    "expand": [3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
    "equidist": [3.0, 4.0, 5.0, 6.0, 7.0],
    "dlt": [4.0, 6.0, 8.0],
}
DEFAULT_R_GRIDS = {
    "count": [float(r) for r in range(1, 11)],
    "avg-count": [2.0, 4.0, 6.0],
}

_THETA_PATTERN = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_theta(value: Union[str, float, int]) -> float:
    """Accepts a number or 'pi', '4pi', '2*pi', 'pi/2', '3pi/4'."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().lower()
    m = _THETA_PATTERN.match(text)
    if m is None:
        return float(text)
    coeff = float(m.group(1)) if m.group(1) not in ("", None) else 1.0
    denom = float(m.group(2)) if m.group(2) else 1.0
    return coeff * math.pi / denom


def parse_grid(value: Union[str, List[float]]) -> List[float]:
    """'a:b:step' (inclusive of b up to rounding) or a comma list."""
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    text = str(value).strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"Grid '{text}' must be 'start:stop:step' with a positive step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(count, 0))]
    return [float(p) for p in text.split(",") if p.strip()]


def parse_nu(value: Union[str, float, complex]) -> complex:
    """Real values or imaginary ones written '2i', 'i', '0.5j'."""
    if isinstance(value, (int, float, complex)):
        return complex(value)
    text = str(value).strip().lower().replace("i", "j")
    if text == "j":
        return 1j
    return complex(text)


class ObservableSpec(BaseModel):
    kind: ObservableKind
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("kind", mode="before")
    @classmethod
    def normalize_kind(cls, v: Any) -> Any:
        return KIND_ALIASES.get(str(v).strip().lower(), v)

    @classmethod
    def parse(cls, text: str) -> "ObservableSpec":
        """'eigen:nu=0.5,n=1', 'bump:width=0.2', 'const:c=1', 'mollifier:delta=0.3', 'tangent:delta=0.5,c=1'."""
        kind, _, rest = text.partition(":")
        params: Dict[str, Any] = {}
        for item in filter(None, (p.strip() for p in rest.split(","))):
            key, sep, val = item.partition("=")
            if not sep:
                raise ValueError(f"Observable parameter '{item}' must look like key=value")
            params[key.strip()] = _scalar(val.strip())
        return cls(kind=kind, params=params)

    def label(self) -> str:
        args = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}:{args}" if args else self.kind

    @model_validator(mode="after")
    def check_params(self) -> "ObservableSpec":
        allowed = {
            "constant": {"c"},
            "eigenfunction": {"nu", "n"},
            "bump": {"width", "amplitude", "x", "y", "angle"},
            "mollifier": {"delta"},
            "tangent": {"delta", "c"},
        }[self.kind]
        unknown = set(self.params) - allowed
        if unknown:
            raise ValueError(f"Unknown parameters {sorted(unknown)} for observable '{self.kind}'")
        if self.kind == "eigenfunction" and "nu" not in self.params:
            raise ValueError("An eigenfunction observable needs 'nu'")
        return self


def _scalar(text: str) -> Any:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


class ExperimentConfig(BaseModel):
    """A complete, reproducible description of one run."""
    subcommand: Subcommand
    name: Optional[str] = None
    description: str = ""
    group: str = "triangle:2,3,7"
    observable: ObservableSpec = Field(default_factory=lambda: ObservableSpec(kind="eigenfunction",
                                                                             params={"nu": 0.5}))
    theta: float = FOUR_PI
    t_grid: List[float] = Field(default_factory=list)
    r_grid: List[float] = Field(default_factory=list)
    tol: float = 1e-7
    seed: int = 0
    workers: int = 1
    samples: int = 1000
    out: str = "results"
    options: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("theta", mode="before")
    @classmethod
    def coerce_theta(cls, v: Any) -> Any:
        return parse_theta(v) if isinstance(v, str) else v

    @field_validator("t_grid", "r_grid", mode="before")
    @classmethod
    def coerce_grid(cls, v: Any) -> Any:
        return parse_grid(v) if isinstance(v, str) else v

    @field_validator("observable", mode="before")
    @classmethod
    def coerce_observable(cls, v: Any) -> Any:
        return ObservableSpec.parse(v) if isinstance(v, str) else v

    @model_validator(mode="after")
    def check_ranges(self) -> "ExperimentConfig":
        if not 0.0 < self.theta <= FOUR_PI + 1e-12:
            raise ValueError(f"theta must lie in (0, 4pi], got {self.theta}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.samples < 2:
            raise ValueError(f"samples must be >= 2, got {self.samples}")
        if not self.t_grid:
            self.t_grid = list(DEFAULT_T_GRIDS.get(self.subcommand, []))
        if not self.r_grid:
            self.r_grid = list(DEFAULT_R_GRIDS.get(self.subcommand, []))
        for label, grid in (("t_grid", self.t_grid), ("r_grid", self.r_grid)):
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError(f"{label} must be strictly increasing, got {grid}")
            if grid and grid[0] <= 0:
                raise ValueError(f"{label} entries must be positive, got {grid}")
        return self


class CheckRecord(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    details: str = ""


class RunManifest(BaseModel):
    schema_version: str = SCHEMA_VERSION
    config: ExperimentConfig
    versions: Dict[str, str] = Field(default_factory=dict)
    started_at: str
    wall_clock_s: float = 0.0
    checks: List[CheckRecord] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    errors: List[str] = Field(default_factory=list)
    partial: bool = False
    passed: bool = False
