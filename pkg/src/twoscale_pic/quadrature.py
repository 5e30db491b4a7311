"""Equispaced (periodic trapezoidal) quadrature over the fast angle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Above this node count sums switch to compensated accumulation.
COMPENSATED_THRESHOLD = 64


@dataclass(frozen=True)
class PeriodicQuadrature:
    nodes: np.ndarray
    weights: np.ndarray
    period: float

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def compensated(self) -> bool:
        return self.size > COMPENSATED_THRESHOLD


def build(p: int, period: float = 2.0 * math.pi) -> PeriodicQuadrature:
    """``p`` left-endpoint nodes ``m*T/p`` with equal weights ``T/p``.

    For a periodic integrand the trapezoid rule merges both endpoints, so
    this is the composite trapezoid rule on one period.
    """
    if p < 1:
        raise ValueError(f"need at least one node, got p={p}")
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    nodes = np.arange(p) * (period / p)
    weights = np.full(p, period / p)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return PeriodicQuadrature(nodes, weights, float(period))


def integrate(quad: PeriodicQuadrature, samples) -> float:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (quad.size,):
        raise ValueError(f"expected {quad.size} samples, got shape {samples.shape}")
    terms = quad.weights * samples
    if quad.compensated:
        return math.fsum(terms)
    total = 0.0
    for term in terms:  # fixed ascending order
        total += term
    return total


class NodeAccumulator:
    """Ascending-order sum of per-node arrays, Kahan-compensated for large p."""

    def __init__(self, shape, compensated: bool):
        self.total = np.zeros(shape)
        self._carry = np.zeros(shape) if compensated else None

    def add(self, term: np.ndarray) -> None:
        if self._carry is None:
            self.total += term
            return
        y = term - self._carry
        t = self.total + y
        self._carry = (t - self.total) - y
        self.total = t
