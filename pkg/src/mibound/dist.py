"""Discrete distributions over a binary X and a finite Y, and the
information measures used by the bound.

All logarithms are natural; :class:`InfoValue` converts to bits on demand.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

SUM_TOL = 1e-9
# entries below this are exact zeros inside logarithms
ZERO_CUTOFF = 1e-15
LN2 = math.log(2.0)

Policy = Literal["strict", "renormalize"]


class DistributionError(ValueError):
    """Base class for invalid distribution input."""


class NegativeEntry(DistributionError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"negative entry at index {index}")


class MassMismatch(DistributionError):
    def __init__(self, total: float):
        self.total = total
        super().__init__(f"total mass {total:.12g} differs from 1 by more than {SUM_TOL:g}")


class ZeroMass(DistributionError):
    def __init__(self):
        super().__init__("distribution has zero total mass")


class DimensionMismatch(DistributionError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_vector(values: np.ndarray, what: str) -> None:
    if values.ndim != 1 or values.size == 0:
        raise DimensionMismatch(f"{what} must be a non-empty vector, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise DistributionError(f"{what} has non-finite entries")
    neg = np.flatnonzero(values < 0)
    if neg.size:
        raise NegativeEntry(int(neg[0]))
    if abs(values.sum() - 1.0) > SUM_TOL:
        raise MassMismatch(float(values.sum()))


@dataclass(frozen=True, eq=False)
class InfoValue:
    """An information quantity stored in nats."""

    nats: float

    @property
    def bits(self) -> float:
        return self.nats / LN2

    def in_unit(self, unit: str) -> float:
        if unit == "nats":
            return self.nats
        if unit == "bits":
            return self.bits
        raise ValueError(f"unknown unit {unit!r}")

    def __float__(self) -> float:
        return self.nats


@dataclass(frozen=True, eq=False)
class JointDist:
    """A 2 x M_y joint probability matrix ``values[x, y]``.

    Construct through :func:`validate_joint` (or :meth:`from_json`) when the
    input is untrusted; the constructor itself enforces the strict invariants.
    """

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2 or v.shape[0] != 2 or v.shape[1] < 1:
            raise DimensionMismatch(f"joint must be 2 x M_y with M_y >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DistributionError("joint has non-finite entries")
        neg = np.argwhere(v < 0)
        if neg.size:
            raise NegativeEntry(tuple(int(k) for k in neg[0]))
        if abs(v.sum() - 1.0) > SUM_TOL:
            raise MassMismatch(float(v.sum()))
        object.__setattr__(self, "values", v)

    @property
    def my(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def to_json(self) -> str:
        return json.dumps({"pxy": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str, policy: Policy = "strict") -> "JointDist":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DistributionError(f"invalid JSON: {exc}") from None
        if not isinstance(obj, dict) or "pxy" not in obj:
            raise DistributionError('expected an object with key "pxy"')
        rows = obj["pxy"]
        if not isinstance(rows, list) or len(rows) != 2:
            raise DimensionMismatch('"pxy" must hold exactly two rows')
        if not all(isinstance(r, list) for r in rows) or len(rows[0]) != len(rows[1]):
            raise DimensionMismatch('"pxy" rows must be arrays of equal length')
        return validate_joint(rows, policy)

    def __repr__(self) -> str:
        return f"JointDist({self.values.tolist()!r})"


@dataclass(frozen=True, eq=False)
class MarginalX:
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (2,):
            raise DimensionMismatch(f"binary marginal must have 2 entries, got shape {v.shape}")
        _check_vector(v, "marginal of X")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class MarginalY:
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        _check_vector(v, "marginal of Y")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class Conditional:
    """Row ``i`` is the distribution of Y given X = i."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2 or v.shape[0] != 2:
            raise DimensionMismatch(f"conditional must be 2 x M_y, got shape {v.shape}")
        for row in v:
            _check_vector(row, "conditional row")
        object.__setattr__(self, "values", v)


def validate_joint(raw: Sequence[Sequence[float]] | np.ndarray, policy: Policy = "strict") -> JointDist:
    """Check a raw 2 x M_y matrix and turn it into a :class:`JointDist`.

    ``strict`` accepts only matrices summing to 1 within ``SUM_TOL``.
    ``renormalize`` accepts any nonnegative matrix with positive mass and
    divides it by its sum.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != 2 or arr.shape[1] < 1:
        raise DimensionMismatch(f"joint must be 2 x M_y with M_y >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DistributionError("joint has non-finite entries")
    neg = np.argwhere(arr < 0)
    if neg.size:
        raise NegativeEntry(tuple(int(k) for k in neg[0]))
    total = float(arr.sum())
    if policy == "strict":
        if abs(total - 1.0) > SUM_TOL:
            raise MassMismatch(total)
        return JointDist(arr)
    if policy == "renormalize":
        if total <= 0:
            raise ZeroMass()
        return JointDist(arr / total)
    raise ValueError(f"unknown policy {policy!r}")


def marginal_x(j: JointDist) -> MarginalX:
    return MarginalX(j.values.sum(axis=1))


def marginal_y(j: JointDist) -> MarginalY:
    return MarginalY(j.values.sum(axis=0))


def conditional_y_given_x(j: JointDist) -> Conditional:
    """Row-normalize the joint. A row with zero mass gets the uniform
    distribution, since the conditional is arbitrary on that branch."""
    v = j.values
    px = v.sum(axis=1)
    out = np.empty_like(v)
    for i in range(2):
        if px[i] > 0:
            out[i] = v[i] / px[i]
        else:
            out[i] = 1.0 / v.shape[1]
    return Conditional(out)


def compose(qx: MarginalX, c: Conditional) -> JointDist:
    if c.values.shape[0] != qx.values.shape[0]:
        raise DimensionMismatch("marginal and conditional disagree on |X|")
    return JointDist(qx.values[:, None] * c.values)


def _as_array(x) -> np.ndarray:
    if isinstance(x, (JointDist, MarginalX, MarginalY, Conditional)):
        return x.values
    return np.asarray(x, dtype=float)


def kl_nats(p: np.ndarray, q: np.ndarray) -> float:
    """sum p log(p/q) on raw arrays; +inf when p > 0 where q == 0."""
    p = np.ravel(p)
    q = np.ravel(q)
    mask = p > ZERO_CUTOFF
    if not mask.any():
        return 0.0
    pm = p[mask]
    qm = q[mask]
    if np.any(qm <= ZERO_CUTOFF):
        return math.inf
    return float(np.sum(pm * np.log(pm / qm)))


def relative_entropy(p, q) -> InfoValue:
    """Kullback-Leibler divergence ``D(p || q)`` in nats.

    Returns ``InfoValue(inf)`` when ``p`` puts mass where ``q`` has none.
    """
    pa, qa = _as_array(p), _as_array(q)
    if pa.shape != qa.shape:
        raise DimensionMismatch(f"shapes differ: {pa.shape} vs {qa.shape}")
    if np.any(pa < 0) or np.any(qa < 0):
        raise DistributionError("relative entropy needs nonnegative arguments")
    value = kl_nats(pa, qa)
    if abs(pa.sum() - 1) <= SUM_TOL and abs(qa.sum() - 1) <= SUM_TOL:
        # Gibbs' inequality; negative values here are rounding noise
        value = max(0.0, value)
    return InfoValue(value)


def mi_nats(v: np.ndarray) -> float:
    """Mutual information of a raw joint matrix, in nats, never negative."""
    px = v.sum(axis=1)
    py = v.sum(axis=0)
    mask = v > ZERO_CUTOFF
    if not mask.any():
        return 0.0
    # px[i] * py[j] >= v[i, j] ** 2 > 0 wherever v[i, j] > 0
    vm = v[mask]
    return max(0.0, float(np.sum(vm * np.log(vm / np.outer(px, py)[mask]))))


def mutual_information(j: JointDist) -> InfoValue:
    return InfoValue(mi_nats(j.values))


def variational_distance(a, b) -> float:
    """L1 distance between two distributions of equal shape, in [0, 2]."""
    aa, ba = _as_array(a), _as_array(b)
    if aa.shape != ba.shape:
        raise DimensionMismatch(f"shapes differ: {aa.shape} vs {ba.shape}")
    return float(np.abs(aa - ba).sum())


def product(qx, qy) -> JointDist:
    """The independent joint ``qx(i) * qy(j)``."""
    return JointDist(np.outer(_as_array(qx), _as_array(qy)))
