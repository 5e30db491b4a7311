"""Reconstruction of the physical beam, beam moments and solver comparison."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .core import ParticleEnsemble, Representation
from .field import RadialGrid, deposit


def rotate(ensemble: ParticleEnsemble, tau: float, label=None) -> ParticleEnsemble:
    """Apply the phase-space rotation ``exp(tau M)``."""
    c, s = math.cos(tau), math.sin(tau)
    q, u = ensemble.pos, ensemble.vel
    return ensemble.with_coords(c * q + s * u, -s * q + c * u, label)


def reconstruct(g_ensemble: ParticleEnsemble, tau: float) -> ParticleEnsemble:
    """Physical beam at fast phase ``tau`` (use ``tau = t / eps``) from the slow profile."""
    if g_ensemble.label is not Representation.SLOW_PROFILE_G:
        raise ValueError("reconstruct expects a slow-profile ensemble")
    return rotate(g_ensemble, tau, Representation.PHYSICAL_F)


def to_profile(f_ensemble: ParticleEnsemble, tau: float = 0.0) -> ParticleEnsemble:
    """Inverse of :func:`reconstruct`."""
    return rotate(f_ensemble, -tau, Representation.SLOW_PROFILE_G)


@dataclass(frozen=True)
class BeamMoments:
    mean_r: float
    mean_v: float
    r2: float
    v2: float
    rv: float
    emittance: float
    second_moment_sum: float
    weight_sum: float

    @property
    def rms_radius(self) -> float:
        return math.sqrt(self.r2)


def _halves_sum(x: np.ndarray) -> float:
    # Summing the two halves separately keeps mirrored means exactly zero.
    h = x.size // 2
    return float(np.sum(x[:h]) + np.sum(x[h:]))


def moments(ensemble: ParticleEnsemble) -> BeamMoments:
    w, r, v = ensemble.weight, ensemble.pos, ensemble.vel
    total = _halves_sum(w)
    if total == 0:
        raise ValueError("ensemble carries no weight")
    mean_r = _halves_sum(w * r) / total
    mean_v = _halves_sum(w * v) / total
    r2 = _halves_sum(w * r * r) / total
    v2 = _halves_sum(w * v * v) / total
    rv = _halves_sum(w * r * v) / total
    emittance = math.sqrt(max(r2 * v2 - rv * rv, 0.0))
    return BeamMoments(mean_r, mean_v, r2, v2, rv, emittance, r2 + v2, total)


def density_discrepancy(ens_a: ParticleEnsemble, ens_b: ParticleEnsemble, grid: RadialGrid) -> float:
    """Relative L2 distance between the gridded spatial densities of two beams."""
    lam_a = deposit(ens_a.pos, ens_a.weight, grid).values
    lam_b = deposit(ens_b.pos, ens_b.weight, grid).values
    norm = float(np.linalg.norm(lam_a))
    if norm == 0:
        raise ValueError("reference density has zero norm")
    return float(np.linalg.norm(lam_a - lam_b)) / norm


# --- CSV export --------------------------------------------------------------

MOMENT_FIELDS = [f.name for f in fields(BeamMoments)]


def write_moments_csv(series, path) -> None:
    """``series`` is an iterable of ``(t, BeamMoments)``."""
    with Path(path).open("w") as fh:
        fh.write(",".join(["t"] + MOMENT_FIELDS) + "\n")
        for t, m in series:
            row = [t] + [getattr(m, name) for name in MOMENT_FIELDS]
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_snapshot_csv(ensemble: ParticleEnsemble, path, t: float, tau: float) -> None:
    with Path(path).open("w") as fh:
        fh.write(f"# t={t!r} tau={tau!r} representation={ensemble.label.value}\n")
        fh.write("coord,vel,weight\n")
        for x, v, w in zip(ensemble.pos.tolist(), ensemble.vel.tolist(), ensemble.weight.tolist()):
            fh.write(f"{x!r},{v!r},{w!r}\n")


def read_snapshot_csv(path):
    """Return ``(ensemble, metadata)`` from a snapshot written by :func:`write_snapshot_csv`."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline()
    if not header.startswith("#"):
        raise ValueError(f"{path}: missing metadata header")
    meta = dict(item.split("=", 1) for item in header[1:].split())
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    ens = ParticleEnsemble(data[:, 0], data[:, 1], data[:, 2], Representation(meta["representation"]))
    return ens, {"t": float(meta["t"]), "tau": float(meta["tau"]), "representation": meta["representation"]}


def moments_dict(m: BeamMoments) -> dict:
    return asdict(m)
