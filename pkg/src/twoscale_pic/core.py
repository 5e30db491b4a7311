"""Domain types shared by the two-scale and the reference solvers.

A scenario is described by a flat :class:`ScenarioConfig`.  Particles live
in a :class:`ParticleEnsemble`, stored as mirrored pairs so that the
convention ``f(t, r, v) = f(t, -r, -v)`` holds to the last bit.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

import numpy as np

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Invalid scenario configuration or solver parameter."""


class InstabilityError(RuntimeError):
    """Non-finite values appeared in an ensemble during a push."""

    def __init__(self, step: int, stage: int, solver: str):
        self.step = step
        self.stage = stage
        self.solver = solver
        super().__init__(f"{solver}: non-finite particle data at step {step}, stage {stage}")


class H1Kind(str, enum.Enum):
    ZERO = "zero"
    COS = "cos"
    COS2 = "cos2"


class Representation(str, enum.Enum):
    SLOW_PROFILE_G = "G"
    PHYSICAL_F = "F"


class SamplingMeasure(str, enum.Enum):
    AREA = "area"      # |r| drawn with density proportional to r
    PLANAR = "planar"  # |r| uniform on [0, a]


def h1_eval(kind: H1Kind, x):
    """Oscillating field shape ``H1(x)``."""
    if kind is H1Kind.ZERO:
        return np.zeros_like(np.asarray(x, dtype=float))
    if kind is H1Kind.COS:
        return np.cos(x)
    return np.cos(x) ** 2


@dataclass(frozen=True)
class ScenarioConfig:
    epsilon: float
    h1_kind: H1Kind
    t_end: float
    # Fraction when the ratio omega1/omega0 is declared rational, float otherwise.
    omega1: Union[Fraction, float] = Fraction(1)
    omega1_irrational: bool = False
    intensity: float = 1.0
    vth: float = 0.0727518214392
    half_width: float = 0.75
    n_particles: int = 50_000
    grid_nodes: int = 129
    grid_extent: Optional[float] = None
    quad_nodes: int = 15
    dt: float = 0.05
    dt_ref: Optional[float] = None
    seed: int = 1
    self_field_enabled: bool = True
    sampling: SamplingMeasure = SamplingMeasure.AREA
    snapshot_times: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "h1_kind", H1Kind(self.h1_kind))
        object.__setattr__(self, "sampling", SamplingMeasure(self.sampling))
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        if self.omega1_irrational:
            object.__setattr__(self, "omega1", float(self.omega1))
        elif not isinstance(self.omega1, Fraction):
            object.__setattr__(self, "omega1", Fraction(str(self.omega1)))
        self.validate()

    @property
    def omega1_value(self) -> float:
        return float(self.omega1)

    @property
    def extent(self) -> float:
        """Grid half-extent R_max (defaults to four beam half-widths)."""
        return self.grid_extent if self.grid_extent is not None else 4.0 * self.half_width

    @property
    def reference_dt(self) -> float:
        return self.dt_ref if self.dt_ref is not None else self.epsilon * self.dt

    def validate(self) -> None:
        checks = [
            (self.epsilon > 0, "epsilon must be positive"),
            (self.dt > 0, "dt must be positive"),
            (self.dt_ref is None or self.dt_ref > 0, "dt_ref must be positive"),
            (self.t_end > 0, "t_end must be positive"),
            (self.quad_nodes >= 1, "quad_nodes must be >= 1"),
            (self.grid_nodes >= 3, "grid_nodes must be >= 3"),
            (self.grid_nodes % 2 == 1, "grid_nodes must be odd so that r = 0 is a node"),
            (self.half_width > 0, "half_width must be positive"),
            (self.extent > self.half_width, "grid_extent must exceed half_width"),
            (self.vth >= 0, "vth must be non-negative"),
            (self.intensity >= 0, "intensity must be non-negative"),
            (self.n_particles >= 2 and self.n_particles % 2 == 0,
             "n_particles must be a positive even number (mirrored pairs)"),
            (all(0 < t <= self.t_end for t in self.snapshot_times),
             "snapshot times must lie in (0, t_end]"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        if self.h1_kind is not H1Kind.ZERO and not self.omega1_value > 0:
            raise ConfigError("omega1 must be positive")

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class ParticleEnsemble:
    """Flat phase-space arrays; the first half mirrors the second half."""

    pos: np.ndarray
    vel: np.ndarray
    weight: np.ndarray
    label: Representation = Representation.PHYSICAL_F

    def __post_init__(self):
        self.pos = np.asarray(self.pos, dtype=float)
        self.vel = np.asarray(self.vel, dtype=float)
        self.weight = np.asarray(self.weight, dtype=float)
        if not (self.pos.shape == self.vel.shape == self.weight.shape) or self.pos.ndim != 1:
            raise ValueError("pos, vel and weight must be 1D arrays of equal length")
        self.label = Representation(self.label)

    def __len__(self) -> int:
        return self.pos.size

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weight))

    def with_coords(self, pos, vel, label: Optional[Representation] = None) -> "ParticleEnsemble":
        return ParticleEnsemble(pos, vel, self.weight, self.label if label is None else label)

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.pos.copy(), self.vel.copy(), self.weight.copy(), self.label)

    def is_mirrored(self) -> bool:
        """True when particle ``k + N/2`` is exactly ``(-x_k, -v_k)`` with equal weight."""
        n = len(self)
        if n % 2:
            return False
        h = n // 2
        return bool(
            np.array_equal(self.pos[h:], -self.pos[:h])
            and np.array_equal(self.vel[h:], -self.vel[:h])
            and np.array_equal(self.weight[h:], self.weight[:h])
        )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.pos)) and np.all(np.isfinite(self.vel)))

    @classmethod
    def from_pairs(cls, pos, vel, weight, label=Representation.PHYSICAL_F) -> "ParticleEnsemble":
        """Build an ensemble from one member of each mirrored pair."""
        pos = np.asarray(pos, dtype=float)
        vel = np.asarray(vel, dtype=float)
        weight = np.broadcast_to(np.asarray(weight, dtype=float), pos.shape)
        return cls(
            np.concatenate([pos, -pos]),
            np.concatenate([vel, -vel]),
            np.concatenate([weight, weight]),
            label,
        )


@dataclass(frozen=True)
class ResonanceClass:
    resonant: bool
    effective_period: float = TWO_PI
    h1_factor: float = 0.0


def classify_resonance(omega1: Union[Fraction, float], h1_kind: H1Kind,
                       irrational: bool = False) -> ResonanceClass:
    """Decide whether the oscillating field leaves a mean drift.

    The ratio ``omega1 / omega0`` (``omega0 = 1``) must be declared; it is
    never guessed from a float.  For ``omega1 = l/k`` in lowest terms the
    fast-angle average runs over ``2*pi*k``.
    """
    h1_kind = H1Kind(h1_kind)
    if h1_kind is H1Kind.ZERO:
        return ResonanceClass(False)
    if not float(omega1) > 0:
        raise ConfigError(f"omega1 must be positive, got {omega1}")
    if irrational:
        return ResonanceClass(False)
    if not isinstance(omega1, Fraction):
        raise ConfigError("a rational omega1 must be given as an exact Fraction")
    period = TWO_PI * omega1.denominator
    return ResonanceClass(True, period, 1.0 / period)


def config_resonance(config: ScenarioConfig) -> ResonanceClass:
    return classify_resonance(config.omega1, config.h1_kind, config.omega1_irrational)


def sample_initial(config: ScenarioConfig, rng: Optional[np.random.Generator] = None) -> ParticleEnsemble:
    """Semi-Gaussian beam: uniform in space on [-a, a], Maxwellian in velocity.

    ``N/2`` samples are drawn and completed by their mirror images.  With the
    default area measure ``|r|`` has density ``2r/a^2``, i.e. a uniform
    charge density in the radial Poisson sense.
    """
    if config.n_particles % 2:
        raise ConfigError("n_particles must be even")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    half = config.n_particles // 2
    u = rng.random(half)
    if config.sampling is SamplingMeasure.AREA:
        radius = config.half_width * np.sqrt(u)
    else:
        radius = config.half_width * u
    vel = config.vth * rng.standard_normal(half)
    sign = np.where(rng.random(half) < 0.5, -1.0, 1.0)
    w = config.intensity / config.n_particles
    return ParticleEnsemble.from_pairs(sign * radius, vel, w, Representation.PHYSICAL_F)


# --- config file I/O -------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_REQUIRED = ("epsilon", "h1_kind", "t_end")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_value(key: str, text: str):
    text = text.strip()
    try:
        if key in ("epsilon", "t_end", "intensity", "vth", "half_width", "dt"):
            return float(text)
        if key in ("grid_extent", "dt_ref"):
            return None if text.lower() in ("", "none", "default") else float(text)
        if key in ("n_particles", "grid_nodes", "quad_nodes", "seed"):
            return int(text)
        if key in ("self_field_enabled", "omega1_irrational"):
            return _parse_bool(text)
        if key == "h1_kind":
            return H1Kind(text.lower())
        if key == "sampling":
            return SamplingMeasure(text.lower())
        if key == "omega1":
            return text
        if key == "snapshot_times":
            return tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc
    raise ConfigError(f"unknown key: {key!r}")


def parse_config(text: str) -> ScenarioConfig:
    """Parse the flat ``key = value`` format (``#`` starts a comment)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, value)
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    omega1 = values.pop("omega1", "1")
    irrational = values.get("omega1_irrational", False)
    try:
        values["omega1"] = float(omega1) if irrational else Fraction(omega1)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad value for omega1: {omega1!r}") from exc
    return ScenarioConfig(**values)


def format_config(config: ScenarioConfig) -> str:
    lines = []
    for name in _FIELDS:
        value = getattr(config, name)
        if isinstance(value, enum.Enum):
            text = value.value
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif value is None:
            text = "none"
        elif isinstance(value, tuple):
            text = ", ".join(repr(float(t)) for t in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{name} = {text}")
    return "\n".join(lines) + "\n"


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def save_config(config: ScenarioConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(format_config(config))
