"""Outer minimization over the binary X marginal.

With |X| = 2 the marginal has one free coordinate ``gamma``. Since the L1
distance between joints dominates the distance between their X marginals,
only ``|gamma| <= eps / 2`` can be feasible, and shifting the marginal by
row rescaling costs exactly ``2 |gamma|``. The bound is the smallest inner
minimum over an equidistant grid on that interval.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .dist import LN2, InfoValue, JointDist, MarginalX, marginal_x, mutual_information
from .solver import InnerProblem, SolverConfig, Status, inner_minimize

CSV_HEADER = ("gamma", "I_bits", "I_nats", "gap_nats", "status")
DEFAULT_POINTS = 1000
REFINE_TOL_BITS = 1e-4


@dataclass(frozen=True)
class GammaGrid:
    eps: float
    points: tuple[float, ...]

    @property
    def n_points(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=False)
class SweepPoint:
    gamma: float
    qx: MarginalX
    value: InfoValue | None
    argmin: JointDist | None
    gap: float
    status: Status
    error: str | None = None

    @property
    def usable(self) -> bool:
        return self.value is not None


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Global minimum over the gamma grid.

    ``certified`` is False when some point hit the iteration cap (or failed)
    without its certified lower range ``value - gap`` clearing the minimum
    over the converged points; the bound is then reported with a warning.
    """

    bound: InfoValue
    arg_gamma: float
    argmin: JointDist
    curve: list[SweepPoint]
    i_of_p: InfoValue
    eps: float
    certified: bool = True
    warnings: list[str] = field(default_factory=list)
    refine_delta_bits: float | None = None

    @property
    def max_gap(self) -> float:
        return max((pt.gap for pt in self.curve if pt.usable), default=0.0)

    @property
    def refined_ok(self) -> bool | None:
        if self.refine_delta_bits is None:
            return None
        return self.refine_delta_bits < REFINE_TOL_BITS

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "n_points": len(self.curve),
            "I_p_bits": self.i_of_p.bits,
            "I_p_nats": self.i_of_p.nats,
            "bound_bits": self.bound.bits,
            "bound_nats": self.bound.nats,
            "arg_gamma": self.arg_gamma,
            "argmin": {"pxy": self.argmin.values.tolist()},
            "max_gap_nats": self.max_gap,
            "certified": self.certified,
            "warnings": list(self.warnings),
            "refine_delta_bits": self.refine_delta_bits,
        }


def qx_of_gamma(px: MarginalX, gamma: float) -> MarginalX:
    """Shift the binary marginal by ``gamma``, clamping to the simplex."""
    if abs(gamma) > 1:
        raise ValueError(f"|gamma| must not exceed 1, got {gamma}")
    a, b = px.values
    # the upper clamp on the first entry and the lower clamp on the second
    # bind together; the mirrored pair covers negative gamma
    first = min(max(a + gamma, 0.0), 1.0)
    second = min(max(b - gamma, 0.0), 1.0)
    return MarginalX(np.array([first, second]))


def make_grid(eps: float, n_points: int = DEFAULT_POINTS) -> GammaGrid:
    if not 0 <= eps <= 2:
        raise ValueError(f"eps must lie in [0, 2], got {eps}")
    if n_points < 1:
        raise ValueError("n_points must be at least 1")
    if n_points == 1 or eps == 0:
        return GammaGrid(eps, (0.0,))
    pts = np.linspace(-eps / 2.0, eps / 2.0, n_points)
    return GammaGrid(eps, tuple(float(g) for g in pts))


def _solve_point(args) -> SweepPoint:
    p, eps, gamma, cfg = args
    qx = qx_of_gamma(marginal_x(p), gamma)
    try:
        res = inner_minimize(InnerProblem(p, qx, eps), cfg)
    except (ValueError, ArithmeticError) as exc:
        return SweepPoint(gamma, qx, None, None, math.inf, Status.ERROR, str(exc))
    return SweepPoint(gamma, qx, res.value, res.argmin, res.gap, res.status)


def sweep(
    p: JointDist,
    eps: float,
    grid: GammaGrid,
    cfg: SolverConfig | None = None,
    workers: int = 1,
) -> list[SweepPoint]:
    """Solve the inner problem at every grid point, in ascending gamma order.

    A failing point is returned with ``Status.ERROR`` instead of aborting the
    sweep. ``workers > 1`` evaluates points in separate processes; the output
    is identical to the sequential run.
    """
    if not math.isclose(grid.eps, eps, rel_tol=0, abs_tol=1e-15):
        raise ValueError(f"grid was built for eps={grid.eps}, not {eps}")
    cfg = cfg or SolverConfig()
    jobs = [(p, eps, g, cfg) for g in grid.points]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_solve_point(job) for job in jobs]


def summarize(p: JointDist, eps: float, curve: list[SweepPoint]) -> BoundReport:
    usable = [pt for pt in curve if pt.usable]
    if not usable:
        raise ArithmeticError("no sweep point could be solved")
    best = min(usable, key=lambda pt: pt.value.nats)  # first minimum wins
    converged = [pt.value.nats for pt in usable if pt.status == Status.CONVERGED]
    ref = min(converged) if converged else math.inf

    warnings = []
    for pt in curve:
        if pt.status == Status.CONVERGED:
            continue
        if pt.status == Status.ERROR:
            warnings.append(f"gamma={pt.gamma:.12g}: solver error: {pt.error}")
        elif pt.value.nats - pt.gap <= ref:
            warnings.append(
                f"gamma={pt.gamma:.12g}: iteration cap with gap {pt.gap:.3g} nats "
                "could hide a smaller minimum"
            )
    return BoundReport(
        bound=best.value,
        arg_gamma=best.gamma,
        argmin=best.argmin,
        curve=curve,
        i_of_p=mutual_information(p),
        eps=eps,
        certified=not warnings,
        warnings=warnings,
    )


def lower_bound(
    p: JointDist,
    eps: float,
    n_points: int = DEFAULT_POINTS,
    cfg: SolverConfig | None = None,
    refine: bool = False,
    workers: int = 1,
) -> BoundReport:
    """Smallest mutual information over joints within L1 distance ``eps`` of ``p``.

    With ``refine=True`` the sweep is repeated on ``2 * n_points`` and the
    change of the bound in bits is stored in ``refine_delta_bits``.
    """
    cfg = cfg or SolverConfig()
    report = summarize(p, eps, sweep(p, eps, make_grid(eps, n_points), cfg, workers))
    if refine:
        fine = summarize(p, eps, sweep(p, eps, make_grid(eps, 2 * n_points), cfg, workers))
        delta = abs(fine.bound.nats - report.bound.nats) / LN2
        report = BoundReport(
            report.bound,
            report.arg_gamma,
            report.argmin,
            report.curve,
            report.i_of_p,
            report.eps,
            report.certified,
            report.warnings,
            delta,
        )
    return report


def curve_rows(curve: Iterable[SweepPoint]) -> list[list[str]]:
    rows = []
    for pt in curve:
        if pt.value is None:
            bits = nats = "nan"
        else:
            bits = f"{pt.value.bits:.12g}"
            nats = f"{pt.value.nats:.12g}"
        rows.append([f"{pt.gamma:.12g}", bits, nats, f"{pt.gap:.12g}", pt.status.value])
    return rows


def write_curve_csv(curve: Iterable[SweepPoint], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(curve_rows(curve))


def curve_csv(curve: Iterable[SweepPoint]) -> str:
    buf = io.StringIO()
    write_curve_csv(curve, buf)
    return buf.getvalue()


def read_curve_csv(fh) -> list[dict]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(
            {
                "gamma": float(row["gamma"]),
                "I_bits": float(row["I_bits"]),
                "I_nats": float(row["I_nats"]),
                "gap_nats": float(row["gap_nats"]),
                "status": row["status"],
            }
        )
    return out


def midpoint_violations(values, margin: float = 0.0) -> tuple[int, int]:
    """Count index triples (k - h, k, k + h) on an equidistant curve that
    violate midpoint convexity and midpoint concavity by more than ``margin``.
    """
    v = np.asarray(values, dtype=float)
    convex_bad = concave_bad = 0
    for h in range(1, (len(v) - 1) // 2 + 1):
        mid = 0.5 * (v[: -2 * h] + v[2 * h :])
        centre = v[h:-h]
        convex_bad += int(np.count_nonzero(centre > mid + margin))
        concave_bad += int(np.count_nonzero(centre < mid - margin))
    return convex_bad, concave_bad


def slope_gap_at_zero(gammas, values, k: int = 5) -> tuple[float, float]:
    """Compare secant slopes just left and right of gamma = 0.

    Uses the ``k`` nearest grid points on each side. Returns the jump between
    the mean left and mean right slope and the largest spread of consecutive
    slopes within one side; a kink shows as a jump far above the spread.
    """
    g = np.asarray(gammas, dtype=float)
    v = np.asarray(values, dtype=float)
    left = np.flatnonzero(g < 0)[-k:]
    right = np.flatnonzero(g > 0)[:k]
    if len(left) < 2 or len(right) < 2:
        raise ValueError(f"need at least 2 grid points on each side of 0, k={k}")
    sl = np.diff(v[left]) / np.diff(g[left])
    sr = np.diff(v[right]) / np.diff(g[right])
    jump = abs(float(sr.mean() - sl.mean()))
    spread = max(float(np.ptp(sl)), float(np.ptp(sr)))
    return jump, spread
