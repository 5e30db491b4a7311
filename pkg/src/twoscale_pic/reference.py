"""Conventional PIC solver resolving the fast ``1/epsilon`` rotation.

Characteristics of the stiff radial system:

    dr/dt = v / eps
    dv/dt = E(t, r) + (-1/eps + H1(omega1 t / eps)) r
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import (
    ConfigError,
    InstabilityError,
    ParticleEnsemble,
    Representation,
    ScenarioConfig,
    h1_eval,
)
from .field import RadialGrid, deposit, eval_field, solve_field

# Explicit RK4 is stable for the unit-frequency rotation up to 2*sqrt(2);
# keep a margin.
STABILITY_LIMIT = 2.5


def external_force(t, r, config: ScenarioConfig):
    """Focusing force ``(-H0/eps + H1(omega1 t/eps)) r`` with ``H0 = 1``."""
    h = h1_eval(config.h1_kind, config.omega1_value * (t / config.epsilon))
    return (-1.0 / config.epsilon + h) * np.asarray(r, dtype=float)


def _self_field(r: np.ndarray, weight: np.ndarray, grid: RadialGrid):
    density = deposit(r, weight, grid)
    return eval_field(solve_field(density), r), density.overflow


def reference_step(ensemble: ParticleEnsemble, t: float, dt_ref: float, grid: RadialGrid,
                   config: ScenarioConfig, step: int = 0, overflow: Optional[list] = None
                   ) -> ParticleEnsemble:
    """One RK4 step of the stiff characteristics, field refreshed per stage."""
    if ensemble.label is not Representation.PHYSICAL_F:
        raise ValueError("reference push expects a physical ensemble")
    if not 0 < dt_ref <= STABILITY_LIMIT * config.epsilon:
        raise ConfigError(
            f"dt_ref={dt_ref} violates the RK4 stability bound {STABILITY_LIMIT}*epsilon")
    eps = config.epsilon
    r0, v0, w = ensemble.pos, ensemble.vel, ensemble.weight

    def rhs(ts, r, v):
        force = external_force(ts, r, config)
        if config.self_field_enabled:
            e, ov = _self_field(r, w, grid)
            if overflow is not None:
                overflow.append(ov)
            force = force + e
        return v / eps, force

    increments = []
    r, v = r0, v0
    for stage, (c, frac) in enumerate(((0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, None)), 1):
        kr, kv = rhs(t + c * dt_ref, r, v)
        ir, iv = dt_ref * kr, dt_ref * kv
        if not (np.all(np.isfinite(ir)) and np.all(np.isfinite(iv))):
            raise InstabilityError(step, stage, "reference")
        increments.append((ir, iv))
        if frac is not None:
            r, v = r0 + frac * ir, v0 + frac * iv
    (r1, v1), (r2, v2), (r3, v3), (r4, v4) = increments
    return ensemble.with_coords(
        r0 + r1 / 6 + r2 / 3 + r3 / 3 + r4 / 6,
        v0 + v1 / 6 + v2 / 3 + v3 / 3 + v4 / 6,
    )


class ReferenceSolver:
    def __init__(self, config: ScenarioConfig, grid: Optional[RadialGrid] = None):
        self.config = config
        self.grid = grid or RadialGrid.uniform(config.grid_nodes, config.extent)
        self.overflow = 0

    def step(self, ensemble: ParticleEnsemble, t: float, dt_ref: float, step: int = 0) -> ParticleEnsemble:
        tally: list = []
        out = reference_step(ensemble, t, dt_ref, self.grid, self.config, step, tally)
        if tally:
            self.overflow = max(self.overflow, max(tally))
        return out
