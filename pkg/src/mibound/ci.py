"""Confidence floors for plug-in mutual information estimates.

An L1 concentration bound for the empirical joint,

    Pr(V(p_hat, p) >= eps) <= (2**K - 2) * exp(-n * eps**2 / 2),

is inverted into a radius ``eps(n, K, delta)``; the minimum mutual
information over that L1 ball around ``p_hat`` is then a lower confidence
limit at level ``1 - delta``. The bound is the distribution-free form of
Weissman et al. (2003); only :func:`epsilon_for_confidence` depends on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .dist import DistributionError, InfoValue, JointDist, mutual_information
from .solver import SolverConfig
from .sweep import DEFAULT_POINTS, BoundReport, lower_bound

DEFAULT_DELTA = 0.05


class ZeroTotal(DistributionError):
    def __init__(self):
        super().__init__("counts table has zero total")


class MalformedCounts(DistributionError):
    pass


@dataclass(frozen=True, eq=False)
class CountsTable:
    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts)
        if c.ndim != 2 or c.shape[0] != 2 or c.shape[1] < 1:
            raise MalformedCounts(f"counts must be a 2 x M_y table, got shape {c.shape}")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(np.isfinite(c)) or np.any(c != np.round(c)):
                raise MalformedCounts("counts must be integers")
            c = c.astype(np.int64)
        if np.any(c < 0):
            raise MalformedCounts("counts must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def my(self) -> int:
        return self.counts.shape[1]


@dataclass(frozen=True)
class ConfidenceSpec:
    delta: float
    k: int
    n: int

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.k < 2:
            raise ValueError(f"alphabet size must be at least 2, got {self.k}")
        if self.n < 1:
            raise ValueError(f"sample count must be at least 1, got {self.n}")


@dataclass(frozen=True, eq=False)
class ConfidenceReport:
    n: int
    delta: float
    eps: float
    i_hat: InfoValue
    floor: InfoValue
    bound: BoundReport

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "delta": self.delta,
            "eps": self.eps,
            "I_hat_bits": self.i_hat.bits,
            "I_hat_nats": self.i_hat.nats,
            "floor_bits": self.floor.bits,
            "floor_nats": self.floor.nats,
            "certified": self.bound.certified,
        }


def read_counts(fh: TextIO) -> CountsTable:
    """Two non-empty lines of whitespace-separated nonnegative integers."""
    lines = [ln.split() for ln in fh.read().splitlines() if ln.strip()]
    if len(lines) != 2:
        raise MalformedCounts(f"expected 2 lines of counts, got {len(lines)}")
    if len(lines[0]) != len(lines[1]):
        raise MalformedCounts("both lines must hold the same number of counts")
    try:
        rows = [[int(tok) for tok in line] for line in lines]
    except ValueError:
        raise MalformedCounts("counts must be integers") from None
    return CountsTable(np.array(rows, dtype=np.int64))


def empirical_joint(c: CountsTable) -> tuple[JointDist, int]:
    n = c.n
    if n == 0:
        raise ZeroTotal()
    return JointDist(c.counts / n), n


def _log_atoms(k: int) -> float:
    """log(2**k - 2) without forming 2**k."""
    if k <= 60:
        return math.log(2.0**k - 2.0)
    return k * math.log(2.0) + math.log1p(-(2.0 ** (1 - k)))


def epsilon_for_confidence(spec: ConfidenceSpec) -> float:
    """Smallest L1 radius containing the true joint with probability >= 1 - delta."""
    radius = math.sqrt(2.0 / spec.n * (_log_atoms(spec.k) - math.log(spec.delta)))
    return min(2.0, radius)


def mi_confidence_floor(
    c: CountsTable,
    delta: float = DEFAULT_DELTA,
    n_points: int = DEFAULT_POINTS,
    cfg: SolverConfig | None = None,
) -> ConfidenceReport:
    p_hat, n = empirical_joint(c)
    eps = epsilon_for_confidence(ConfidenceSpec(delta, 2 * c.my, n))
    report = lower_bound(p_hat, eps, n_points, cfg)
    return ConfidenceReport(n, delta, eps, mutual_information(p_hat), report.bound, report)
