"""Named scenario presets for the validation experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import H1Kind, ScenarioConfig

WIDE_HALF_WIDTH = 1.83271471003


@dataclass(frozen=True)
class Expectation:
    kind: str  # StationaryG, ExactRotation, MeanZero, Focusing, Defocusing, NonlinearCompare
    rate: Optional[float] = None


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    config: ScenarioConfig
    expected: Expectation
    description: str = ""


def _wide(h1_kind, omega1, t_end, snapshots):
    return ScenarioConfig(
        epsilon=0.1, h1_kind=h1_kind, omega1=Fraction(omega1), t_end=t_end,
        half_width=WIDE_HALF_WIDTH, snapshot_times=snapshots,
    )


PRESETS = {
    p.name: p
    for p in [
        ScenarioPreset(
            "linear-nonresonant",
            ScenarioConfig(epsilon=0.01, h1_kind=H1Kind.COS, omega1=4 * math.sqrt(2),
                           omega1_irrational=True, t_end=6.28, self_field_enabled=False,
                           snapshot_times=(6.28,)),
            Expectation("StationaryG"),
            "no self field, H1 = cos(4 sqrt(2) t): the profile does not move",
        ),
        ScenarioPreset(
            "linear-resonant-n2",
            ScenarioConfig(epsilon=0.01, h1_kind=H1Kind.COS2, omega1=Fraction(2), t_end=6.28,
                           self_field_enabled=False, snapshot_times=(6.28,)),
            Expectation("ExactRotation", 0.25),
            "no self field, H1 = cos^2(2t): the profile rotates at rate 1/4",
        ),
        ScenarioPreset(
            "semi-gaussian-eps001",
            ScenarioConfig(epsilon=0.01, h1_kind=H1Kind.ZERO, t_end=69.115, quad_nodes=15,
                           snapshot_times=(0.031, 34.558, 69.115)),
            Expectation("NonlinearCompare"),
            "self-consistent semi-Gaussian beam, no oscillating field",
        ),
        ScenarioPreset(
            "mean-zero-eps01",
            _wide(H1Kind.COS, 1, 9.52, (9.30, 9.52)),
            Expectation("MeanZero"),
            "H1 = cos(t): oscillating field with no mean effect",
        ),
        ScenarioPreset(
            "focusing-cos2",
            _wide(H1Kind.COS2, 1, 72.26, (6.26, 18.85, 31.42, 72.26)),
            Expectation("Focusing"),
            "H1 = cos^2(t): net focusing drift",
        ),
        ScenarioPreset(
            "defocusing-cos2t",
            _wide(H1Kind.COS, 2, 2.20, (2.20,)),
            Expectation("Defocusing"),
            "H1 = cos(2t): net defocusing drift",
        ),
    ]
}


def preset(name: str) -> ScenarioPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None
