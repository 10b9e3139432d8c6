"""Minimize I(q_X q_{Y|X}) over conditionals with q_X fixed and the joint
kept inside an L1 ball around a reference joint.

The feasible set is the polytope

    P = {q >= 0 : q.sum(axis=1) == qx, ||q - p||_1 <= eps}

and the objective is convex on it. Frank-Wolfe with an active set (pairwise
steps by default, away steps optionally) and an exact linear minimization
oracle returns a point together with the duality-gap certificate
``value - min <= gap``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dist import (
    DimensionMismatch,
    DistributionError,
    InfoValue,
    JointDist,
    MarginalX,
    marginal_x,
    mi_nats,
)

# slack when comparing L1 budgets computed in floating point
FEAS_TOL = 1e-12
_TINY = np.finfo(float).tiny


class Infeasible(DistributionError):
    """The L1 ball cannot reach the requested X marginal."""


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    ITER_CAP = "IterCap"
    ERROR = "Error"


@dataclass(frozen=True)
class SolverConfig:
    gap_tol: float = 1e-7
    max_iters: int = 50_000
    interior_floor: float = 1e-12
    variant: str = "pairwise"

    def __post_init__(self):
        if self.variant not in ("pairwise", "away"):
            raise ValueError(f"unknown Frank-Wolfe variant {self.variant!r}")
        if not self.gap_tol > 0:
            raise ValueError("gap_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.interior_floor <= 1e-9:
            raise ValueError("interior_floor must lie in (0, 1e-9]")


@dataclass(frozen=True, eq=False)
class InnerProblem:
    p: JointDist
    qx: MarginalX
    eps: float

    def __post_init__(self):
        if not 0 <= self.eps <= 2:
            raise ValueError(f"eps must lie in [0, 2], got {self.eps}")
        if self.p.values.shape[0] != self.qx.values.shape[0]:
            raise DimensionMismatch("reference joint and marginal disagree on |X|")
        shift = float(np.abs(self.qx.values - self.p.values.sum(axis=1)).sum())
        if shift > self.eps + FEAS_TOL:
            raise Infeasible(
                f"marginal shift {shift:.6g} exceeds the L1 radius {self.eps:.6g}"
            )


@dataclass(frozen=True, eq=False)
class InnerResult:
    value: InfoValue
    argmin: JointDist
    gap: float
    iterations: int
    status: Status


def feasible_init(prob: InnerProblem) -> JointDist:
    """Rescale each row of ``p`` to the target row sum.

    The L1 cost of the rescaling is exactly ``||qx - p_X||_1``.
    """
    return JointDist(_rescale_rows(prob.p.values, prob.qx.values))


def _rescale_rows(p: np.ndarray, qx: np.ndarray) -> np.ndarray:
    px = p.sum(axis=1)
    q = np.empty_like(p)
    for i in range(p.shape[0]):
        if px[i] > 0:
            q[i] = p[i] * (qx[i] / px[i])
        else:
            q[i] = qx[i] / p.shape[1]
    return q


def _grad(q: np.ndarray, floor: float) -> np.ndarray:
    qc = np.maximum(q, floor)
    qy = np.maximum(q.sum(axis=0), floor)
    return np.log(qc / qy)


def mi_gradient(q: JointDist | np.ndarray, interior_floor: float = 1e-12) -> np.ndarray:
    """Gradient of I(q) with respect to the entries of q, holding row sums fixed.

    Entry (i, j) is ``log(q[i, j] / q_Y[j])``, i.e. the log of the posterior
    ``q_{X|Y}(i | j)``. Entries are clamped at ``interior_floor`` first.
    """
    arr = q.values if isinstance(q, JointDist) else np.asarray(q, dtype=float)
    return _grad(arr, interior_floor)


def _lmo(grad: np.ndarray, p: np.ndarray, qx: np.ndarray, eps: float) -> np.ndarray:
    """Exact minimizer of <grad, q> over the feasible polytope.

    Write q = p + d. In each row all added mass goes to the cheapest column;
    removals e[i, j] in [0, p[i, j]] are bought at two units of L1 budget per
    unit of mass, except that a row whose sum must shrink by r_i removes r_i
    unconditionally. Maximizing sum (grad[i, j] - grad[i, k*_i]) e[i, j] is
    then a separable concave allocation, so the greedy order is optimal.
    Ties resolve to the lowest (row, column) index.
    """
    n_rows, m = p.shape
    change = (qx - p.sum(axis=1)).tolist()
    # sum_i (a_i + sum_j e_ij) = sum(change) + 2 * sum(e) <= eps
    budget = max(0.0, (eps - sum(change)) / 2.0)
    cheapest = np.argmin(grad, axis=1)
    benefit = grad - grad[np.arange(n_rows), cheapest][:, None]
    # stable sort on -benefit keeps the lower index first among ties
    order = np.argsort(-benefit.ravel(), kind="stable").tolist()
    ben = benefit.ravel().tolist()
    cap = p.ravel().tolist()
    removed = [0.0] * (n_rows * m)

    spent = 0.0
    for i in range(n_rows):
        need = -change[i]
        if need <= 0:
            continue
        spent += need
        for k in order:
            if k // m != i:
                continue
            take = min(cap[k], need)
            removed[k] = take
            need -= take
            if need <= 0:
                break
        if need > FEAS_TOL:
            raise Infeasible(f"row {i} cannot shed enough mass")

    left = budget - spent
    for k in order:
        if left <= 0 or ben[k] <= 0:
            break
        take = min(cap[k] - removed[k], left)
        if take > 0:
            removed[k] += take
            left -= take

    rem = np.array(removed).reshape(n_rows, m)
    s = p - rem
    added = np.maximum(np.array(change) + rem.sum(axis=1), 0.0)
    s[np.arange(n_rows), cheapest] += added
    np.maximum(s, 0.0, out=s)
    return s


def linear_oracle(grad: np.ndarray, prob: InnerProblem) -> JointDist:
    """Vertex of the feasible polytope minimizing ``<grad, q>``."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != prob.p.shape:
        raise DimensionMismatch(f"gradient shape {grad.shape} != {prob.p.shape}")
    return JointDist(_lmo(grad, prob.p.values, prob.qx.values, prob.eps))


def _line_search(q: np.ndarray, d: np.ndarray, t_max: float) -> float:
    """Exact minimizer over [0, t_max] of t -> I(q + t d).

    Safeguarded Newton on the derivative ``sum d log(q_ij / q_Yj)``, which is
    nondecreasing because the restriction is convex. Logs use the smallest
    normal float as floor so the root is located on the unclamped objective.
    """
    dy = d.sum(axis=0)
    d2 = d * d
    dy2 = dy * dy

    def slope(t: float) -> tuple[float, float]:
        qt = np.maximum(q + t * d, _TINY)
        qy = np.maximum(qt.sum(axis=0), _TINY)
        first = np.sum(d * np.log(qt)) - dy @ np.log(qy)
        second = np.sum(d2 / qt) - dy2 @ (1.0 / qy)
        return float(first), float(second)

    hi_slope, _ = slope(t_max)
    if hi_slope <= 0:
        return t_max
    sl, curv = slope(0.0)
    if sl >= 0:
        return 0.0
    lo, hi = 0.0, t_max
    t = 0.0
    for _ in range(100):
        cand = t - sl / curv if curv > 0 else math.inf
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi)
        t = cand
        sl, curv = slope(t)
        if sl < 0:
            lo = t
        elif sl > 0:
            hi = t
        else:
            break
        if hi - lo <= 1e-15 * hi or abs(sl) <= 1e-15:
            break
    return t


def _fw_gap(q: np.ndarray, p: np.ndarray, qx: np.ndarray, eps: float, floor: float) -> float:
    g = _grad(q, floor)
    s = _lmo(g, p, qx, eps)
    return max(0.0, float(np.sum(g * (q - s))))


def _solve(p: np.ndarray, qx: np.ndarray, eps: float, cfg: SolverConfig):
    """Active-set Frank-Wolfe on raw arrays.

    Pairwise steps move weight from the worst active atom straight to the
    oracle vertex; away steps choose between the plain FW direction and
    moving away from the worst atom. Returns ``(q, gap, iterations, status)``.
    """
    variant = cfg.variant
    q = _rescale_rows(p, qx)
    n = q.size
    cap = 8 * n + 8
    atoms = np.empty((cap, n))
    weights = np.zeros(cap)
    atoms[0] = q.ravel()
    weights[0] = 1.0
    n_atoms = 1

    gap = math.inf
    for it in range(cfg.max_iters):
        g = _grad(q, cfg.interior_floor)
        s = _lmo(g, p, qx, eps)
        gf = g.ravel()
        qg = float(gf @ q.ravel())
        gap = max(0.0, qg - float(gf @ s.ravel()))
        if gap <= cfg.gap_tol:
            return q, gap, it, Status.CONVERGED

        scores = atoms[:n_atoms] @ gf
        scores[weights[:n_atoms] <= 0] = -math.inf
        away = int(np.argmax(scores))
        w_away = weights[away]
        away_gap = float(scores[away]) - qg

        s_flat = s.ravel()
        match = np.flatnonzero(np.all(atoms[:n_atoms] == s_flat, axis=1))
        k_s = int(match[0]) if match.size else -1

        if variant == "pairwise":
            d = s - atoms[away].reshape(q.shape)
            t_max = w_away
            mode = "pair"
        elif gap >= away_gap:
            d = s - q
            t_max = 1.0
            mode = "fw"
        else:
            d = q - atoms[away].reshape(q.shape)
            t_max = w_away / (1.0 - w_away) if w_away < 1 else math.inf
            mode = "away"
        if not np.isfinite(t_max):
            return q, gap, it, Status.ITER_CAP

        t = _line_search(q, d, t_max)
        if t <= 0:
            return q, gap, it, Status.ITER_CAP

        if k_s < 0 and mode != "away":
            if n_atoms == cap:
                atoms, weights, n_atoms = _compact(atoms, weights, n_atoms)
            k_s = n_atoms
            atoms[k_s] = s_flat
            weights[k_s] = 0.0
            n_atoms += 1

        if mode == "pair":
            weights[away] -= t
            weights[k_s] += t
            if t >= t_max:
                weights[away] = 0.0
        elif mode == "fw":
            weights[:n_atoms] *= 1 - t
            weights[k_s] += t
            if t >= t_max:
                weights[:n_atoms] = 0.0
                weights[k_s] = 1.0
        else:
            weights[:n_atoms] *= 1 + t
            weights[away] -= t
            if t >= t_max:
                weights[away] = 0.0
        q = q + t * d
        np.maximum(q, 0.0, out=q)
        if n_atoms == cap:
            atoms, weights, n_atoms = _compact(atoms, weights, n_atoms)

    gap = _fw_gap(q, p, qx, eps, cfg.interior_floor)
    status = Status.CONVERGED if gap <= cfg.gap_tol else Status.ITER_CAP
    return q, gap, cfg.max_iters, status


def _compact(atoms, weights, n_atoms):
    keep = np.flatnonzero(weights[:n_atoms] > 0)
    k = keep.size
    atoms[:k] = atoms[keep]
    weights[:k] = weights[keep]
    weights[k:] = 0.0
    return atoms, weights, k


def inner_minimize(prob: InnerProblem, cfg: SolverConfig | None = None) -> InnerResult:
    """Minimize mutual information over the L1 ball with the X marginal fixed.

    When ``status`` is ``Converged`` the returned value exceeds the true
    minimum by at most ``gap`` nats. ``IterCap`` results carry their (larger)
    gap and are not certified to ``gap_tol``.
    """
    cfg = cfg or SolverConfig()
    p = prob.p.values
    qx = prob.qx.values
    q, gap, iters, status = _solve(p, qx, prob.eps, cfg)
    value = mi_nats(q)
    start = _rescale_rows(p, qx)
    start_value = mi_nats(start)
    if value > start_value:
        # only reachable through rounding noise; never report worse than the start
        q, value = start, start_value
        gap = _fw_gap(q, p, qx, prob.eps, cfg.interior_floor)
        if gap > cfg.gap_tol:
            status = Status.ITER_CAP
    argmin = JointDist(q)
    return InnerResult(InfoValue(value), argmin, gap, iters, status)


def is_feasible(q: JointDist | np.ndarray, prob: InnerProblem, tol: float = 1e-9) -> bool:
    arr = q.values if isinstance(q, JointDist) else np.asarray(q)
    return bool(
        np.all(arr >= 0)
        and np.allclose(arr.sum(axis=1), prob.qx.values, rtol=0, atol=1e-10)
        and np.abs(arr - prob.p.values).sum() <= prob.eps + tol
    )


__all__ = [
    "Infeasible",
    "InnerProblem",
    "InnerResult",
    "SolverConfig",
    "Status",
    "feasible_init",
    "inner_minimize",
    "is_feasible",
    "linear_oracle",
    "marginal_x",
    "mi_gradient",
]
