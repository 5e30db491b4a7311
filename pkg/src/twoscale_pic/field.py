"""Radial grid, cloud-in-cell deposition and the enclosed-charge field solve.

Densities are stored on a grid symmetric about ``r = 0``.  A particle of
weight ``w`` at ``x`` and its mirror at ``-x`` together represent a ring of
charge ``2w``; the field at radius ``r`` is the charge inside ``|x| < r``
divided by ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray
    spacing: float

    @classmethod
    def uniform(cls, n_nodes: int, extent: float) -> "RadialGrid":
        if n_nodes < 3 or n_nodes % 2 == 0:
            raise ValueError("grid needs an odd node count >= 3")
        if not extent > 0:
            raise ValueError("grid extent must be positive")
        half = (n_nodes - 1) // 2
        spacing = extent / half
        nodes = np.arange(-half, half + 1) * spacing
        nodes.setflags(write=False)
        return cls(nodes, spacing)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def extent(self) -> float:
        return float(self.nodes[-1])

    @property
    def center(self) -> int:
        return self.size // 2

    @property
    def positive_nodes(self) -> np.ndarray:
        return self.nodes[self.center:]


@dataclass(frozen=True)
class DensityTable:
    grid: RadialGrid
    values: np.ndarray  # line charge per node
    overflow: int = 0

    @property
    def total(self) -> float:
        return float(np.sum(self.values) * self.grid.spacing)


@dataclass(frozen=True)
class FieldTable:
    grid: RadialGrid
    values: np.ndarray
    total_charge: float


def _cic(positions: np.ndarray, grid: RadialGrid):
    """Left node index and right-node fraction; out-of-grid clamps to the edge.

    Non-finite positions get a NaN fraction so that the deposited density,
    and everything computed from it, turns NaN instead of failing on the
    index cast.
    """
    n = grid.size
    finite = np.isfinite(positions)
    s = (np.where(finite, positions, 0.0) + grid.extent) / grid.spacing
    overflow = int(np.count_nonzero(np.abs(positions[finite]) > grid.extent))
    s = np.clip(s, 0.0, n - 1.0)
    idx = np.minimum(np.floor(s).astype(np.intp), n - 2)
    frac = np.where(finite, s - idx, np.nan)
    return idx, frac, overflow


def deposit(positions, weights, grid: RadialGrid, symmetrize: bool = True) -> DensityTable:
    """Linear-hat (cloud-in-cell) charge assignment.

    Returns line charge per node.  Particles beyond ``R_max`` land on the
    boundary node and are counted in ``overflow``.
    """
    positions = np.asarray(positions, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if positions.shape != weights.shape:
        raise ValueError("positions and weights must have equal length")
    idx, frac, overflow = _cic(positions, grid)
    n = grid.size
    charge = np.bincount(idx, weights * (1.0 - frac), minlength=n)
    charge += np.bincount(idx + 1, weights * frac, minlength=n)
    values = charge / grid.spacing
    if symmetrize:
        values = 0.5 * (values + values[::-1])
    return DensityTable(grid, values, overflow)


def rotated_deposit(ensemble, sigma: float, grid: RadialGrid) -> DensityTable:
    """Deposit the profile ensemble after rotating phase space by ``sigma``.

    The first rotated coordinate ``cos(sigma) q + sin(sigma) u`` is the
    physical radius at fast phase ``sigma``.
    """
    rotated = np.cos(sigma) * ensemble.pos + np.sin(sigma) * ensemble.vel
    return deposit(rotated, ensemble.weight, grid)


def enclosed_charge(density: DensityTable) -> np.ndarray:
    """Trapezoid-rule charge inside ``|x| < q_i`` for the non-negative nodes."""
    grid = density.grid
    c = grid.center
    lam = density.values
    ring = lam[c:] + lam[c::-1]  # both mirrored halves
    enclosed = np.zeros(ring.size)
    np.cumsum(0.5 * grid.spacing * (ring[1:] + ring[:-1]), out=enclosed[1:])
    return enclosed


def solve_field(density: DensityTable) -> FieldTable:
    """Radial field ``E(q) = S(q)/q`` from the enclosed charge ``S``."""
    grid = density.grid
    c = grid.center
    enclosed = enclosed_charge(density)
    half = np.zeros(enclosed.size)
    half[1:] = enclosed[1:] / grid.nodes[c + 1:]
    values = np.concatenate([-half[:0:-1], half])
    return FieldTable(grid, values, density.total)


def eval_field(field: FieldTable, x):
    """Linear interpolation of the field; point-charge tail beyond ``R_max``.

    Evaluated on ``|x|`` and signed afterwards so the result is exactly odd.
    """
    x = np.asarray(x, dtype=float)
    grid = field.grid
    ax = np.abs(x)
    c = grid.center
    half = field.values[c:]
    inside = ax <= grid.extent
    s = np.where(inside, ax, 0.0) / grid.spacing
    nearest = np.rint(s)
    s = np.where(np.abs(s - nearest) <= 4 * np.finfo(float).eps * nearest, nearest, s)
    idx = np.minimum(np.floor(s).astype(np.intp), half.size - 2)
    frac = s - idx
    value = half[idx] * (1.0 - frac) + half[idx + 1] * frac
    with np.errstate(divide="ignore", over="ignore"):
        tail = field.total_charge / ax
    value = np.where(inside, value, tail)
    return np.copysign(value, x) * (ax > 0)


def write_table_csv(table, path, header: str = "") -> None:
    """Write a DensityTable or FieldTable as ``q,value`` CSV."""
    path = Path(path)
    with path.open("w") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write("q,value\n")
        for q, v in zip(table.grid.nodes.tolist(), table.values.tolist()):
            fh.write(f"{q!r},{v!r}\n")
