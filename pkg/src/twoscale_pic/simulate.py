"""Time-integration drivers shared by the CLI, the tests and the benchmarks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .analysis import BeamMoments, density_discrepancy, moments, reconstruct, to_profile
from .core import InstabilityError, ParticleEnsemble, Representation, ScenarioConfig, sample_initial
from .field import RadialGrid
from .reference import ReferenceSolver
from .twoscale import TwoScaleSolver


def time_segments(config: ScenarioConfig) -> List[Tuple[float, float, int]]:
    """Split ``[0, t_end]`` at snapshot times into ``(t_start, t_stop, n_steps)``.

    Each segment uses equal steps no longer than ``dt`` so that every
    snapshot time is hit exactly.
    """
    stops = sorted(set(config.snapshot_times) | {config.t_end})
    segments = []
    start = 0.0
    for stop in stops:
        n = max(1, math.ceil((stop - start) / config.dt - 1e-9))
        segments.append((start, stop, n))
        start = stop
    return segments


def substeps_per_step(config: ScenarioConfig) -> int:
    """Reference steps per two-scale step (``1/eps`` for the default ``dt_ref``)."""
    ratio = config.dt / config.reference_dt
    k = round(ratio)
    if k >= 1 and abs(ratio - k) <= 1e-9 * ratio:
        return k
    return max(1, math.ceil(ratio))


@dataclass
class RunResult:
    solver: str
    config: ScenarioConfig
    initial: ParticleEnsemble
    final: ParticleEnsemble
    snapshots: Dict[float, ParticleEnsemble] = field(default_factory=dict)
    moments: List[Tuple[float, BeamMoments]] = field(default_factory=list)
    steps: int = 0
    wall_s: float = 0.0
    overflow: int = 0

    def physical(self, ensemble: ParticleEnsemble, t: float) -> ParticleEnsemble:
        if ensemble.label is Representation.SLOW_PROFILE_G:
            return reconstruct(ensemble, t / self.config.epsilon)
        return ensemble

    def physical_snapshot(self, t: float) -> ParticleEnsemble:
        return self.physical(self.snapshots[t], t)

    @property
    def final_physical(self) -> ParticleEnsemble:
        return self.physical(self.final, self.config.t_end)


def _check(ens: ParticleEnsemble, step: int, solver: str) -> None:
    if not ens.is_finite():
        raise InstabilityError(step, 0, solver)


def run_two_scale(config: ScenarioConfig, initial: Optional[ParticleEnsemble] = None,
                  threads: int = 1, normalized: bool = True, progress=None) -> RunResult:
    """Integrate the slow profile to ``t_end``; the profile starts from the physical beam."""
    if initial is None:
        initial = sample_initial(config)
    solver = TwoScaleSolver(config, threads=threads, normalized=normalized)
    ens = to_profile(initial)
    result = RunResult("two-scale", config, initial, ens)
    result.moments.append((0.0, moments(initial)))
    tic = time.perf_counter()
    steps = 0
    for start, stop, n in time_segments(config):
        h = (stop - start) / n
        for i in range(n):
            t = start + i * h
            ens = solver.step(ens, t, h, steps)
            steps += 1
            _check(ens, steps, "two-scale")
            t_new = stop if i == n - 1 else start + (i + 1) * h
            result.moments.append((t_new, moments(reconstruct(ens, t_new / config.epsilon))))
            if progress is not None:
                progress(t_new)
        if stop in config.snapshot_times:
            result.snapshots[stop] = ens
    result.final = ens
    result.steps = steps
    result.wall_s = time.perf_counter() - tic
    result.overflow = solver.overflow
    return result


def run_reference(config: ScenarioConfig, initial: Optional[ParticleEnsemble] = None,
                  progress=None) -> RunResult:
    """Integrate the stiff system with ``substeps_per_step`` RK4 steps per slow step."""
    if initial is None:
        initial = sample_initial(config)
    solver = ReferenceSolver(config)
    k = substeps_per_step(config)
    ens = initial
    result = RunResult("reference", config, initial, ens)
    result.moments.append((0.0, moments(initial)))
    tic = time.perf_counter()
    steps = 0
    for start, stop, n in time_segments(config):
        h = (stop - start) / n
        sub = h / k
        for i in range(n):
            t0 = start + i * h
            for j in range(k):
                ens = solver.step(ens, t0 + j * sub, sub, steps)
                steps += 1
            _check(ens, steps, "reference")
            t_new = stop if i == n - 1 else start + (i + 1) * h
            result.moments.append((t_new, moments(ens)))
            if progress is not None:
                progress(t_new)
        if stop in config.snapshot_times:
            result.snapshots[stop] = ens
    result.final = ens
    result.steps = steps
    result.wall_s = time.perf_counter() - tic
    result.overflow = solver.overflow
    return result


@dataclass
class Comparison:
    two_scale: RunResult
    reference: RunResult
    times: List[float]
    discrepancy: List[float]
    moment_diff: List[Dict[str, float]]

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancy) if self.discrepancy else 0.0


def compare(config: ScenarioConfig, threads: int = 1, initial: Optional[ParticleEnsemble] = None) -> Comparison:
    """Run both solvers from the same sample and compare them at the snapshot times."""
    if not config.snapshot_times or config.t_end not in config.snapshot_times:
        config = config.replace(snapshot_times=tuple(sorted(set(config.snapshot_times) | {config.t_end})))
    if initial is None:
        initial = sample_initial(config)
    ts = run_two_scale(config, initial, threads=threads)
    ref = run_reference(config, initial)
    grid = RadialGrid.uniform(config.grid_nodes, config.extent)
    times, disc, mdiff = [], [], []
    for t in sorted(config.snapshot_times):
        beam_ts = ts.physical_snapshot(t)
        beam_ref = ref.snapshots[t]
        times.append(t)
        disc.append(density_discrepancy(beam_ref, beam_ts, grid))
        m_ts, m_ref = moments(beam_ts), moments(beam_ref)
        mdiff.append({
            "rms_radius_rel": abs(m_ts.rms_radius - m_ref.rms_radius) / m_ref.rms_radius,
            "r2": m_ts.r2 - m_ref.r2,
            "v2": m_ts.v2 - m_ref.v2,
            "rv": m_ts.rv - m_ref.rv,
            "emittance": m_ts.emittance - m_ref.emittance,
        })
    return Comparison(ts, ref, times, disc, mdiff)


def noise_floor(config: ScenarioConfig, tau: float = 0.0, seeds=(11, 12, 13, 14)) -> float:
    """Seed-averaged discrepancy between independent samples of the initial beam.

    Both samples are rotated to fast phase ``tau`` before deposition.
    """
    grid = RadialGrid.uniform(config.grid_nodes, config.extent)
    values = []
    for s in seeds:
        a = sample_initial(config, np.random.default_rng(s))
        b = sample_initial(config, np.random.default_rng(s + 1000))
        a = reconstruct(to_profile(a), tau)
        b = reconstruct(to_profile(b), tau)
        values.append(density_discrepancy(a, b, grid))
    return float(np.mean(values))
