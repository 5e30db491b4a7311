"""Two-scale PIC pusher for the slow profile ``G``.

Each macro-particle ``(Q_k, U_k)`` of the profile follows the averaged
characteristics

    dQ/dt = < -sin(s) * F(s, cos(s) Q + sin(s) U) >
    dU/dt = <  cos(s) * F(s, cos(s) Q + sin(s) U) >

where ``F`` is the self field of the beam seen at fast phase ``s`` plus, in
the resonant case, the oscillating focusing term ``H1(omega1 s) * r``, and
``<.>`` is the mean over one fast period.  The mean is taken with the
periodic trapezoid rule; for every node the field is rebuilt from a
deposit of the rotated ensemble.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import quadrature
from .core import (
    H1Kind,
    InstabilityError,
    ParticleEnsemble,
    Representation,
    ResonanceClass,
    ScenarioConfig,
    config_resonance,
    h1_eval,
)
from .field import RadialGrid, deposit, eval_field, solve_field
from .quadrature import NodeAccumulator, PeriodicQuadrature


@dataclass
class DriftField:
    dq: np.ndarray
    du: np.ndarray
    overflow: int = 0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.dq)) and np.all(np.isfinite(self.du)))


def h1_mean_drift(h1_kind, omega1, q, u, quad: PeriodicQuadrature, res: ResonanceClass):
    """Mean drift produced by the resonant oscillating focusing term.

    Zero unless ``res`` is resonant.  Works elementwise on arrays.
    """
    q = np.asarray(q, dtype=float)
    u = np.asarray(u, dtype=float)
    if not res.resonant or H1Kind(h1_kind) is H1Kind.ZERO:
        return np.zeros_like(q + u), np.zeros_like(q + u)
    shape = np.broadcast(q, u).shape
    acc_q = NodeAccumulator(shape, quad.compensated)
    acc_u = NodeAccumulator(shape, quad.compensated)
    omega1 = float(omega1)
    for sigma, gamma in zip(quad.nodes, quad.weights):
        c, s = math.cos(sigma), math.sin(sigma)
        h = gamma * float(h1_eval(h1_kind, omega1 * sigma))
        a = c * q + s * u
        acc_q.add(-s * h * a)
        acc_u.add(c * h * a)
    return res.h1_factor * acc_q.total, res.h1_factor * acc_u.total


def _self_field_at_node(ensemble: ParticleEnsemble, sigma: float, grid: RadialGrid):
    a = math.cos(sigma) * ensemble.pos + math.sin(sigma) * ensemble.vel
    density = deposit(a, ensemble.weight, grid)
    return eval_field(solve_field(density), a), density.overflow


def eval_drift(ensemble: ParticleEnsemble, quad: PeriodicQuadrature, grid: RadialGrid,
               res: ResonanceClass, config: ScenarioConfig, threads: int = 1,
               normalized: bool = True) -> DriftField:
    """Averaged drift of every profile particle.

    With ``normalized=False`` the self-field integral is not divided by the
    period; this matches an ensemble whose weights carry the extra
    ``1/period`` of the profile's initial condition.
    """
    n = len(ensemble)
    acc_q = NodeAccumulator(n, quad.compensated)
    acc_u = NodeAccumulator(n, quad.compensated)
    overflow = 0
    if config.self_field_enabled:
        field_factor = 1.0 / quad.period if normalized else 1.0

        def node_field(sigma):
            return _self_field_at_node(ensemble, sigma, grid)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(node_field, quad.nodes))
        else:
            results = [node_field(sigma) for sigma in quad.nodes]
        # accumulation order is the node order whatever the thread count
        for sigma, gamma, (e, node_overflow) in zip(quad.nodes, quad.weights, results):
            coef = field_factor * gamma
            acc_q.add(coef * -math.sin(sigma) * e)
            acc_u.add(coef * math.cos(sigma) * e)
            overflow = max(overflow, node_overflow)
    dq, du = acc_q.total, acc_u.total
    if res.resonant:
        hq, hu = h1_mean_drift(config.h1_kind, config.omega1, ensemble.pos, ensemble.vel, quad, res)
        dq = dq + hq
        du = du + hu
    return DriftField(dq, du, overflow)


def rk4_step(ensemble: ParticleEnsemble, t: float, dt: float, drift, step: int = 0) -> ParticleEnsemble:
    """One classical Runge-Kutta step of the averaged characteristics.

    ``drift`` maps an ensemble to a :class:`DriftField`; it is called on the
    four stage ensembles so every stage gets fresh deposits and field solves.
    The drift is autonomous, so ``t`` only labels diagnostics.
    """
    if ensemble.label is not Representation.SLOW_PROFILE_G:
        raise ValueError("two-scale push expects a slow-profile ensemble")
    q0, u0 = ensemble.pos, ensemble.vel
    increments = []
    stage_ens = ensemble
    for stage, frac in enumerate((0.5, 0.5, 1.0, None), 1):
        k = drift(stage_ens)
        if not k.is_finite():
            raise InstabilityError(step, stage, "two-scale")
        iq, iu = dt * k.dq, dt * k.du
        increments.append((iq, iu))
        if frac is not None:
            stage_ens = ensemble.with_coords(q0 + frac * iq, u0 + frac * iu)
    (q1, u1), (q2, u2), (q3, u3), (q4, u4) = increments
    q = q0 + q1 / 6 + q2 / 3 + q3 / 3 + q4 / 6
    u = u0 + u1 / 6 + u2 / 3 + u3 / 3 + u4 / 6
    return ensemble.with_coords(q, u)


class TwoScaleSolver:
    """Bundles the quadrature, grid and resonance class of one scenario."""

    def __init__(self, config: ScenarioConfig, threads: int = 1, normalized: bool = True,
                 quad: Optional[PeriodicQuadrature] = None, grid: Optional[RadialGrid] = None):
        self.config = config
        self.res = config_resonance(config)
        self.quad = quad or quadrature.build(config.quad_nodes, self.res.effective_period)
        self.grid = grid or RadialGrid.uniform(config.grid_nodes, config.extent)
        self.threads = threads
        self.normalized = normalized
        self.overflow = 0

    def drift(self, ensemble: ParticleEnsemble) -> DriftField:
        d = eval_drift(ensemble, self.quad, self.grid, self.res, self.config,
                       threads=self.threads, normalized=self.normalized)
        self.overflow = max(self.overflow, d.overflow)
        return d

    def step(self, ensemble: ParticleEnsemble, t: float, dt: float, step: int = 0) -> ParticleEnsemble:
        return rk4_step(ensemble, t, dt, self.drift, step)
