"""Convergence and quadrature studies backing the ``convergence`` and
``quadrature-check`` commands."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import quadrature
from .analysis import reconstruct, to_profile
from .core import H1Kind, ScenarioConfig, classify_resonance, sample_initial
from .field import DensityTable, RadialGrid, eval_field, solve_field
from .simulate import run_two_scale
from .twoscale import h1_mean_drift

EXACT_TOL = 1e-12


def fit_order(h, err) -> float:
    """Least-squares slope of log(err) against log(h)."""
    slope, _ = np.polyfit(np.log(np.asarray(h, float)), np.log(np.asarray(err, float)), 1)
    return float(slope)


def exact_rotation(q0, u0, t, rate):
    c, s = math.cos(rate * t), math.sin(rate * t)
    return c * q0 - s * u0, s * q0 + c * u0


def resonant_time_errors(config: ScenarioConfig, dts):
    """Max particle error of the profile against its exact rotation at rate 1/4.

    ``config`` should be a self-field-free ``cos^2(n .)`` scenario with
    ``n >= 2``.
    """
    initial = sample_initial(config)
    g0 = to_profile(initial)
    q_ex, u_ex = exact_rotation(g0.pos, g0.vel, config.t_end, 0.25)
    errors = []
    for dt in dts:
        run = run_two_scale(config.replace(dt=dt, snapshot_times=()), initial)
        err = max(np.max(np.abs(run.final.pos - q_ex)), np.max(np.abs(run.final.vel - u_ex)))
        errors.append(float(err))
    return errors


def uniform_beam_density(grid: RadialGrid, rho0: float, radius: float) -> DensityTable:
    """Line charge of a uniform radial density ``rho0`` on ``[0, radius]``, sampled at nodes.

    A node sitting on the beam edge takes the mean of the one-sided limits.
    """
    q = np.abs(grid.nodes)
    values = np.where(q < radius, 0.5 * rho0 * q, 0.0)
    values[np.isclose(q, radius, rtol=1e-12, atol=0.0)] = 0.25 * rho0 * radius
    return DensityTable(grid, values)


def uniform_beam_field(x, rho0: float, radius: float):
    ax = np.abs(x)
    inside = 0.5 * rho0 * ax
    with np.errstate(divide="ignore"):
        outside = 0.5 * rho0 * radius**2 / ax
    return np.sign(x) * np.where(ax <= radius, inside, outside)


def field_grid_errors(node_counts=(33, 65, 129, 257), rho0=1.0, radius=1.0, extent=2.0):
    """Max error of the interpolated field of a uniform beam for several grids.

    The beam edge sits on a node of every grid in the default sweep.  Probes
    closer to the edge than one coarse cell are skipped: the density jump
    costs first order there.
    """
    coarse = 2.0 * extent / (min(node_counts) - 1)
    probe = np.linspace(0.0, extent, 4001)
    probe = probe[np.abs(probe - radius) >= coarse]
    spacings, errors = [], []
    for a in node_counts:
        grid = RadialGrid.uniform(a, extent)
        fld = solve_field(uniform_beam_density(grid, rho0, radius))
        err = np.max(np.abs(eval_field(fld, probe) - uniform_beam_field(probe, rho0, radius)))
        spacings.append(grid.spacing)
        errors.append(float(err))
    return spacings, errors


def gaussian_field_errors(node_counts=(33, 65, 129, 257), extent=4.0):
    """Nodal field error for the smooth radial density ``exp(-r^2)``.

    Exact field: ``(1 - exp(-r^2)) / (2 r)``.
    """
    spacings, errors = [], []
    for a in node_counts:
        grid = RadialGrid.uniform(a, extent)
        q = grid.nodes
        fld = solve_field(DensityTable(grid, 0.5 * np.abs(q) * np.exp(-q * q)))
        pos = grid.positive_nodes[1:]
        exact = (1.0 - np.exp(-pos * pos)) / (2.0 * pos)
        errors.append(float(np.max(np.abs(fld.values[grid.center + 1:] - exact))))
        spacings.append(grid.spacing)
    return spacings, errors


def resonant_drift_error(n: int, p: int, kind=H1Kind.COS2) -> float:
    """Max deviation of the ``cos^2(n s)`` mean drift from ``(-u/4, q/4)`` (n >= 2)."""
    res = classify_resonance(Fraction(n), kind)
    quad = quadrature.build(p, res.effective_period)
    q = np.array([0.0, 1.0, 0.3])
    u = np.array([1.0, 0.0, -0.7])
    dq, du = h1_mean_drift(kind, n, q, u, quad, res)
    return float(max(np.max(np.abs(dq + u / 4)), np.max(np.abs(du - q / 4))))


def min_exact_nodes(n: int, p_max: int = 64, tol: float = EXACT_TOL):
    """Smallest ``p0`` such that every ``p`` in ``[p0, p_max]`` is exact to ``tol``.

    Returns ``(p0, errors)`` with ``errors[p-1]`` the error at ``p`` nodes.
    """
    errors = [resonant_drift_error(n, p) for p in range(1, p_max + 1)]
    p0 = p_max + 1
    for p in range(p_max, 0, -1):
        if errors[p - 1] > tol:
            break
        p0 = p
    return p0, errors


def stationary_check(config: ScenarioConfig):
    """Run a scenario and return (max profile drift, max physical-beam error vs rotated initial)."""
    initial = sample_initial(config)
    run = run_two_scale(config, initial)
    g0 = to_profile(initial)
    drift = max(np.max(np.abs(run.final.pos - g0.pos)), np.max(np.abs(run.final.vel - g0.vel)))
    beam = reconstruct(run.final, config.t_end / config.epsilon)
    rotated = reconstruct(g0, config.t_end / config.epsilon)
    err = max(np.max(np.abs(beam.pos - rotated.pos)), np.max(np.abs(beam.vel - rotated.vel)))
    return float(drift), float(err), run
