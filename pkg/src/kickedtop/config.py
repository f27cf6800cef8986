"""Run configuration: one flat key = value file, CLI flags win.

Every numeric knob of the experiment pipelines lives here so that a run is
fully specified by (config, seed) and can be hashed for resumability. The
text form round-trips losslessly (floats are written with shortest
round-trip precision).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .grids import GEOMETRIES

ALPHA_DEFAULT = 11.0 * math.pi / 19.0

Interval = tuple[float, float]


@dataclass
class ExperimentConfig:
    alpha: float = ALPHA_DEFAULT
    gamma: tuple[float, ...] = (2.6,)
    #: sweep values of j; ensemble commands treat each entry as an ensemble center
    j: tuple[int, ...] = (150,)
    j_offset_lo: int = -5
    j_offset_hi: int = 5
    j_step: int = 1
    n_phi: int = 300
    n_theta: int = 300
    grid_geometry: str = "angle"
    n_kicks: int = 10_000
    poincare_inits: int = 225
    poincare_kicks: int = 400
    seed: int = 7
    out_dir: str = "out"
    workers: int = 1
    lambda_cut: float | None = None
    m_intervals: tuple[Interval, ...] = ((-0.8, 0.7), (-0.2, 0.2))
    zeta_window: float = 0.4
    zeta_step: float = 0.1
    r_coe: float = 0.5269
    include_wrap: bool = True
    #: split the spectrum into the two parity sectors before r statistics
    #: (mixing them superposes two independent sequences and buries the
    #: Poisson/COE distinction)
    split_parity: bool = True
    pm_bins: int = 40
    save_vectors: bool = False
    husimi_states: tuple[int, ...] = ()
    husimi_targets: tuple[float, ...] = ()

    def validate(self) -> "ExperimentConfig":
        if not math.isfinite(self.alpha):
            raise ConfigError("alpha must be finite")
        if any(not (g >= 0) or not math.isfinite(g) for g in self.gamma):
            raise ConfigError("gamma values must be finite and >= 0")
        if any(jj < 1 for jj in self.j):
            raise ConfigError("j values must be >= 1")
        if self.j_step < 1:
            raise ConfigError("j_step must be >= 1")
        if self.j_offset_lo > self.j_offset_hi:
            raise ConfigError("j_offset_lo must not exceed j_offset_hi")
        if self.n_phi < 2 or self.n_theta < 2:
            raise ConfigError("grid resolution must be at least 2x2")
        if self.grid_geometry not in GEOMETRIES:
            raise ConfigError(f"grid_geometry must be one of {GEOMETRIES}")
        if self.n_kicks < 1 or self.poincare_inits < 1 or self.poincare_kicks < 0:
            raise ConfigError("kick and initial-condition counts must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.lambda_cut is not None and not (self.lambda_cut >= 0):
            raise ConfigError("lambda_cut must be >= 0 when set")
        for lo, hi in self.m_intervals:
            if not (-1.0 <= lo < hi <= 1.0):
                raise ConfigError(f"bad M interval [{lo}, {hi}]")
        if not (0 < self.zeta_window <= 2.0) or self.zeta_step <= 0:
            raise ConfigError("zeta_window must lie in (0, 2] and zeta_step be positive")
        if self.pm_bins < 2:
            raise ConfigError("pm_bins must be >= 2")
        if not (self.r_coe > 2.0 * math.log(2.0) - 1.0):
            raise ConfigError("r_coe must exceed the Poisson mean ratio")
        return self

    def ensemble_members(self, center: int) -> list[int]:
        members = list(
            range(center + self.j_offset_lo, center + self.j_offset_hi + 1, self.j_step)
        )
        if not members or members[0] < 1:
            raise ConfigError(f"ensemble around j={center} reaches below j=1")
        return members

    # --- serialization ---

    def to_text(self) -> str:
        lines = ["# kicked-top run configuration"]
        for f in fields(self):
            lines.append(f"{f.name} = {_encode(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = _decode(key, val.strip())
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"line {lineno}: {exc}") from exc
        return cls(**values).validate()

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        return cls.from_text(text)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **overrides).validate()

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


_INT_TUPLES = {"j", "husimi_states"}
_FLOAT_TUPLES = {"gamma", "husimi_targets"}
_INTS = {
    "j_offset_lo",
    "j_offset_hi",
    "j_step",
    "n_phi",
    "n_theta",
    "n_kicks",
    "poincare_inits",
    "poincare_kicks",
    "seed",
    "workers",
    "pm_bins",
}
_FLOATS = {"alpha", "zeta_window", "zeta_step", "r_coe"}
_BOOLS = {"include_wrap", "save_vectors", "split_parity"}


def _encode(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{repr(lo)}:{repr(hi)}" for lo, hi in value)
        return ", ".join(_encode(v) for v in value)
    return str(value)


def parse_interval_list(text: str) -> tuple[Interval, ...]:
    out = []
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        lo, sep, hi = chunk.partition(":")
        if not sep:
            raise ConfigError(f"interval {chunk!r} must look like lo:hi")
        out.append((float(lo), float(hi)))
    return tuple(out)


def _decode(key: str, val: str):
    if key in _BOOLS:
        if val.lower() in ("true", "1", "yes"):
            return True
        if val.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"expected a boolean, got {val!r}")
    if key in _INTS:
        return int(val)
    if key in _FLOATS:
        return float(val)
    if key in _INT_TUPLES:
        return tuple(int(v) for v in filter(None, (c.strip() for c in val.split(","))))
    if key in _FLOAT_TUPLES:
        return tuple(float(v) for v in filter(None, (c.strip() for c in val.split(","))))
    if key == "lambda_cut":
        return None if val.lower() in ("none", "") else float(val)
    if key == "m_intervals":
        return parse_interval_list(val)
    if key in ("grid_geometry", "out_dir"):
        return val
    raise ConfigError(f"unhandled key {key!r}")
