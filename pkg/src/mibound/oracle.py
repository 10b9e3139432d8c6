"""Brute-force reference minimizers and random feasible points.

These never call the Frank-Wolfe solver; they exist to check it. Grid search
is limited to M_y <= 3.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dist import DistributionError, InfoValue, JointDist, marginal_x, mi_nats
from .solver import InnerProblem, feasible_init
from .sweep import make_grid, qx_of_gamma

MAX_MY = 3


class DimensionGuard(DistributionError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    resolution: float | None = None  # None picks 1e-3 for M_y <= 2, 5e-3 for M_y = 3
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.resolution is not None and not 0 < self.resolution <= 0.1:
            raise ValueError("resolution must lie in (0, 0.1]")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")

    def step_for(self, my: int) -> float:
        if self.resolution is not None:
            return self.resolution
        return 1e-3 if my <= 2 else 5e-3


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: InfoValue
    slack: float  # nats; the true minimum is >= value - slack
    argmin: JointDist | None
    n_evaluated: int


def random_feasible(prob: InnerProblem, n: int, seed: int = 0) -> list[JointDist]:
    """``n`` seeded feasible points of the inner problem.

    Each point blends a random joint with the prescribed row sums toward the
    rescaled reference; half the draws sit on the L1 sphere, the rest inside.
    """
    rng = np.random.default_rng(seed)
    p = prob.p.values
    qx = prob.qx.values
    base = feasible_init(prob).values
    m = p.shape[1]

    alpha = rng.choice([0.2, 1.0, 5.0], size=(n, 1, 1))
    raw = rng.gamma(np.broadcast_to(alpha, (n, 2, m)))
    raw_sum = raw.sum(axis=2, keepdims=True)
    rows = np.where(raw_sum > 0, raw / np.where(raw_sum > 0, raw_sum, 1.0), 1.0 / m)
    draws = rows * qx[None, :, None]

    def dist(lam):
        z = base[None] + lam[:, None, None] * (draws - base[None])
        return np.abs(z - p[None]).sum(axis=(1, 2))

    lo = np.zeros(n)
    hi = np.ones(n)
    inside = dist(hi) <= prob.eps
    lo[inside] = 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        ok = dist(mid) <= prob.eps
        lo = np.where(ok & ~inside, mid, lo)
        hi = np.where(ok | inside, hi, mid)
    shrink = np.where(rng.random(n) < 0.5, 1.0, rng.random(n))
    lam = lo * shrink
    pts = base[None] + lam[:, None, None] * (draws - base[None])
    np.maximum(pts, 0.0, out=pts)
    return [JointDist(q) for q in pts]


def _row_grid(center: np.ndarray, total: float, step: float) -> np.ndarray:
    """All rows with the given total whose free coordinates sit on the
    lattice ``center + k * step`` and whose entries are nonnegative."""
    m = center.size
    if m == 1:
        return np.array([[total]])
    axes = []
    for j in range(m - 1):
        lo = -math.floor(center[j] / step + 1e-9)
        hi = math.floor((total - center[j]) / step + 1e-9)
        axes.append(center[j] + step * np.arange(lo, hi + 1))
    free = np.array(list(itertools.product(*axes))) if m > 2 else axes[0][:, None]
    free = np.maximum(free, 0.0)
    last = total - free.sum(axis=1)
    keep = last >= -1e-12
    return np.column_stack([free[keep], np.maximum(last[keep], 0.0)])


def _plogp(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def _entropy_modulus(tv: float, k: int) -> float:
    """Fannes-type continuity bound for Shannon entropy (nats) over ``k``
    outcomes at total-variation distance ``tv``."""
    if k <= 1 or tv <= 0:
        return 0.0
    if tv >= 1 - 1 / k:
        return math.log(k)
    h = min(tv, 0.5)
    binary = -h * math.log(h) - (1 - h) * math.log1p(-h)
    return tv * math.log(k - 1) + binary


def _mi_modulus(l1: float, my: int, fixed_x: bool = True) -> float:
    """Bound on |I(q) - I(q')| for joints at L1 distance ``l1``.

    Uses I = H(X) + H(Y) - H(X, Y); H(X) drops out when both joints share
    the X marginal.
    """
    tv = l1 / 2
    total = _entropy_modulus(tv, my) + _entropy_modulus(tv, 2 * my)
    if not fixed_x:
        total += _entropy_modulus(tv, 2)
    return min(math.log(2), total)


def _slack(rounding: float, room: float, anchor_mi: float, my: int, fixed_x: bool = True) -> float:
    """Worst-case gap between the lattice minimum and the true minimum.

    Shrink the minimizer q* toward a feasible anchor a with L1 room ``room``
    to spare: z = (1 - lam) q* + lam a with lam = rounding / room leaves room
    to round z onto the lattice, and by convexity I(z) - I(q*) <= lam I(a).
    Rounding moves z by at most ``rounding`` in L1, charged through the
    entropy continuity bound. Near-zero entries can make the rounded point
    slightly infeasible, so this is a heuristic bound.
    """
    if my == 1:
        return 0.0
    if room <= 0:
        return math.log(2)
    lam = min(1.0, rounding / room)
    return min(math.log(2), lam * anchor_mi + _mi_modulus(rounding, my, fixed_x))


def _check_dims(p: JointDist) -> None:
    if p.my > MAX_MY:
        raise DimensionGuard(f"brute force supports M_y <= {MAX_MY}, got {p.my}")


def brute_force_inner(prob: InnerProblem, cfg: OracleConfig | None = None) -> OracleResult:
    """Exhaustive lattice search over both rows of the inner problem.

    The lattice passes through the rescaled reference, so it always holds a
    feasible point and ``eps = 0`` reproduces I(p) exactly. Ties keep the
    first point in lexicographic lattice order.
    """
    cfg = cfg or OracleConfig()
    _check_dims(prob.p)
    p = prob.p.values
    qx = prob.qx.values
    my = p.shape[1]
    step = cfg.step_for(my)
    center = feasible_init(prob).values

    rows = [_row_grid(center[i], qx[i], step) for i in range(2)]
    cost = [np.abs(r - p[i]).sum(axis=1) for i, r in enumerate(rows)]
    budget = prob.eps + 1e-12
    keep = [c <= budget for c in cost]
    rows = [r[k] for r, k in zip(rows, keep)]
    cost = [c[k] for c, k in zip(cost, keep)]
    h = [_plogp(r).sum(axis=1) for r in rows]
    const = float(_plogp(qx).sum())

    best = math.inf
    best_pair = None
    n_eval = 0
    r2, c2, h2 = rows[1], cost[1], h[1]
    chunk = max(1, 2_000_000 // max(1, len(r2) * my))
    for start in range(0, len(rows[0]), chunk):
        r1 = rows[0][start : start + chunk]
        ok = (cost[0][start : start + chunk, None] + c2[None, :]) <= budget
        if not ok.any():
            continue
        qy = r1[:, None, :] + r2[None, :, :]
        vals = h[0][start : start + chunk, None] + h2[None, :] - _plogp(qy).sum(axis=2) - const
        vals = np.where(ok, vals, np.inf)
        n_eval += int(ok.sum())
        k = int(np.argmin(vals))
        if vals.flat[k] < best:
            best = float(vals.flat[k])
            a, b = divmod(k, len(r2))
            best_pair = (start + a, b)

    room = prob.eps - float(np.abs(center - p).sum())
    slack = _slack(4 * (my - 1) * step, room, mi_nats(center), my)
    q = np.vstack([rows[0][best_pair[0]], rows[1][best_pair[1]]])
    # exact re-evaluation of the winner
    return OracleResult(InfoValue(mi_nats(q)), slack, JointDist(q), n_eval)


def brute_force_bound(p: JointDist, eps: float, cfg: OracleConfig | None = None) -> OracleResult:
    """Lattice search over gamma and both rows, for the full minimum over the L1 ball."""
    cfg = cfg or OracleConfig()
    _check_dims(p)
    step = cfg.step_for(p.my)
    n_gamma = max(1, int(round(eps / step)) + 1)
    px = marginal_x(p)
    best = None
    total = 0
    for gamma in make_grid(eps, n_gamma).points:
        res = brute_force_inner(InnerProblem(p, qx_of_gamma(px, gamma), eps), cfg)
        total += res.n_evaluated
        if best is None or res.value.nats < best.value.nats:
            best = res
    if eps <= 0:
        slack = best.slack
    else:
        # anchor at p itself; gamma rounding adds up to 2 * step of L1
        rounding = 4 * (p.my - 1) * step + 2 * step
        slack = _slack(rounding, eps, mi_nats(p.values), p.my, fixed_x=False)
    return OracleResult(best.value, slack, best.argmin, total)
