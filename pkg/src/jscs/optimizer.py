"""Joint AmOS + AppOS power model and its minimizer over p_t.

Total power is P_total(p_t) = P_AmOS(p_t) + P_AppOS(p_t) on (0, p(H0)).
AppOS power blows up as p_t -> 0 and AmOS power blows up as p_t -> p(H0),
so a minimizer always exists. The function is convex where P_FA < 1/2
(p_t > p(H0)/2); elsewhere it may not be, so the search scans a grid first
and only then refines with golden-section search.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from jscs.appos import SourceEnv, log_p_appos, p_appos, p_appos_deriv
from jscs.sensing import (
    SensingEnv,
    n_of_p_t,
    p_amos,
    p_amos_deriv,
    p_t_lower_bound,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Regime(Enum):
    NO_SENSING = "NoSensing"
    SENSING = "Sensing"


class Solver(Enum):
    GOLDEN_SECTION = "GoldenSection"
    GRID_REFINE = "GridRefine"


class BracketError(RuntimeError):
    """Grid scan found no interior minimum."""


class KinkError(ValueError):
    """Derivative requested exactly at the no-sensing/sensing junction."""

    def __init__(self, p_t, left, right):
        self.p_t = p_t
        self.left = left
        self.right = right
        super().__init__(
            f"p_t={p_t:.12g} is the regime junction; one-sided derivatives "
            f"left={left:.9g}, right={right:.9g}"
        )


@dataclass(frozen=True)
class OperatingPoint:
    p_t: float
    n_samples: float
    p_amos_w: float
    p_appos_w: float
    p_total_w: float
    regime: Regime
    amos_share: float


@dataclass(frozen=True)
class Optimum:
    point: OperatingPoint
    bracket: tuple
    iterations: int
    certified_convex: bool
    solver: Solver


@dataclass
class ConvexityReport:
    """Outcome of a second-difference convexity scan.

    ``certified`` only looks at the region where P_FA < 1/2; violations
    elsewhere are listed in ``outside_violations`` but do not fail it.
    """

    certified: bool
    convex_region: tuple
    grid: tuple
    violations: list = field(default_factory=list)
    outside_violations: list = field(default_factory=list)


def total_power(p_t, senv: SensingEnv, aenv: SourceEnv):
    """Vectorized P_total [W]."""
    return p_amos(p_t, senv) + p_appos(p_t, aenv, senv)


def log_total_power(p_t, senv: SensingEnv, aenv: SourceEnv):
    """log P_total, finite even where C^{L/(2 p_t W)} overflows."""
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log(p_amos(p_t, senv)), log_p_appos(p_t, aenv, senv))


def p_total(p_t: float, senv: SensingEnv, aenv: SourceEnv) -> OperatingPoint:
    """Evaluate every component of the power budget at one p_t."""
    p_t = float(p_t)
    n = n_of_p_t(p_t, senv)
    amos = n * senv.e_sample / senv.slot_len
    appos = p_appos(p_t, aenv, senv)
    total = amos + appos
    return OperatingPoint(
        p_t=p_t,
        n_samples=n,
        p_amos_w=amos,
        p_appos_w=appos,
        p_total_w=total,
        regime=Regime.SENSING if n > 0 else Regime.NO_SENSING,
        amos_share=amos / total if total > 0 else 0.0,
    )


def p_total_deriv(p_t, senv: SensingEnv, aenv: SourceEnv):
    """Analytic d P_total / d p_t.

    At the exact regime junction a :class:`KinkError` carries both
    one-sided derivatives.
    """
    if np.ndim(p_t) == 0:
        lb = p_t_lower_bound(senv)
        if abs(p_t - lb) <= 1e-12 * lb:
            left = p_appos_deriv(p_t, aenv, senv)
            # the sensing-side AmOS slope vanishes as N -> 0
            right = left + p_amos_deriv(lb * (1 + 1e-12), senv)
            raise KinkError(p_t, left, right)
    return p_amos_deriv(p_t, senv) + p_appos_deriv(p_t, aenv, senv)


def _interior_grid(lo, hi, n):
    return lo + (hi - lo) * np.arange(1, n + 1) / (n + 1)


def _second_differences(values):
    d2 = values[:-2] - 2.0 * values[1:-1] + values[2:]
    scale = np.maximum(np.abs(values[:-2]), np.maximum(np.abs(values[1:-1]), np.abs(values[2:])))
    return d2, scale


def certify_convexity(senv: SensingEnv, aenv: SourceEnv, grid_size: int = 1024,
                      interval=None, rel_tol: float = 1e-9) -> ConvexityReport:
    """Check second central differences of P_total on a uniform grid.

    The grid spans (0, p(H0)) unless ``interval`` narrows it. A stencil
    counts as a violation when its second difference is below
    ``-rel_tol * max|P|`` over the stencil.
    """
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16")
    region = (senv.p_h0 / 2.0, senv.p_h0)
    lo, hi = interval if interval is not None else (0.0, senv.p_h0)
    grid = _interior_grid(lo, hi, grid_size)
    with np.errstate(invalid="ignore"):
        d2, scale = _second_differences(total_power(grid, senv, aenv))
    bad = ~(d2 >= -rel_tol * scale)
    centers = grid[1:-1]
    inside = centers > region[0]
    violations = [(float(p), float(v)) for p, v in zip(centers[bad & inside], d2[bad & inside])]
    outside = [(float(p), float(v)) for p, v in zip(centers[bad & ~inside], d2[bad & ~inside])]
    certified = not violations
    if interval is not None:
        certified = certified and lo >= region[0]
    return ConvexityReport(certified, region, (float(lo), float(hi)), violations, outside)


def search_grid(senv: SensingEnv, points: int = 512, edge: float = 1e-3,
                edge_fraction: float = 0.1, closest: float = 1e-9) -> np.ndarray:
    """p_t grid with log clustering near both ends and the regime junction.

    ``edge_fraction`` of the points on each side sit within ``edge`` of the
    boundary, log-spaced down to ``closest``.
    """
    ph0 = senv.p_h0
    n_edge = max(3, int(round(points * edge_fraction)))
    n_mid = points - 2 * n_edge - 1
    offsets = np.geomspace(closest, edge, n_edge, endpoint=False)
    grid = np.concatenate([
        offsets,
        np.linspace(edge, ph0 - edge, n_mid),
        ph0 - offsets[::-1],
        [p_t_lower_bound(senv)],
    ])
    return np.unique(grid)


def golden_section(f, a, b, xtol):
    """Golden-section search for a minimum of a unimodal ``f`` on [a, b].

    Returns (x, f(x), iterations) for the best interior point evaluated.
    """
    seen = []

    def g(x):
        v = f(x)
        seen.append((v, x))
        return v

    h = b - a
    c = b - INV_PHI * h
    d = a + INV_PHI * h
    fc, fd = g(c), g(d)
    it = 0
    while h > xtol:
        it += 1
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - INV_PHI * h
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INV_PHI * h
            fd = g(d)
    fx, x = min(seen)
    return x, fx, it


def minimize(senv: SensingEnv, aenv: SourceEnv, tol_pt: float = 1e-4,
             grid_points: int = 512) -> Optimum:
    """Global minimizer of P_total over (0, p(H0)).

    The grid scan covers both regimes so a no-sensing optimum is possible.
    The refinement runs well past ``tol_pt`` since it is cheap.
    """
    if not 0 < tol_pt <= 1e-2:
        raise ValueError("tol_pt must lie in (0, 1e-2]")
    aenv.rate  # surfaces infeasible distortion before any evaluation
    grid = search_grid(senv, grid_points)
    logs = log_total_power(grid, senv, aenv)
    i = int(np.argmin(logs))

    if i == len(grid) - 1 and senv.e_sample == 0:
        # free sensing: AppOS alone keeps falling, so take the last grid point
        point = p_total(grid[-1], senv, aenv)
        return Optimum(point, (float(grid[-2]), float(grid[-1])), 0, False, Solver.GRID_REFINE)
    if i == 0 or i == len(grid) - 1:
        raise BracketError(
            f"P_total is monotone over the search grid (minimum at p_t={grid[i]:.6g}); "
            "check the environment parameters"
        )

    a, b = float(grid[i - 1]), float(grid[i + 1])
    def f(p):
        return total_power(p, senv, aenv)
    x, _, iters = golden_section(f, a, b, xtol=tol_pt * 1e-3)
    # golden-section only saw the bracket; the grid centre may still be best
    if f(float(grid[i])) < f(x):
        x = float(grid[i])
    point = p_total(x, senv, aenv)

    certified = False
    if x > senv.p_h0 / 2.0:
        certified = certify_convexity(senv, aenv, 16, interval=(a, b)).certified
    return Optimum(point, (a, b), iters, certified, Solver.GOLDEN_SECTION)


@dataclass(frozen=True)
class Calibration:
    """Slot length and channel noise PSD fitted to a reported optimum."""

    slot_len: float
    n0: float
    p_t: float
    total_w: float
    amos_share: float


def calibrate(senv: SensingEnv, aenv: SourceEnv, p_t: float = 0.42,
              total_w: float = 4.8) -> Calibration:
    """Fit T and N0 so that ``p_t`` is stationary with total power ``total_w``.

    AmOS power scales with 1/T and AppOS power with N0, so both conditions
    (zero derivative, matching total) are linear in (1/T, N0). The AmOS
    share at the fitted point is returned as an independent prediction.
    """
    unit_s = replace(senv, slot_len=1.0, e_sample=1.0)
    unit_a = replace(aenv, n0=1.0)
    n, dn = n_of_p_t(p_t, unit_s), p_amos_deriv(p_t, unit_s)
    b, db = p_appos(p_t, unit_a, senv), p_appos_deriv(p_t, unit_a, senv)
    lhs = np.array([[senv.e_sample * dn, db], [senv.e_sample * n, b]])
    inv_t, n0 = np.linalg.solve(lhs, [0.0, total_w])
    if not (inv_t > 0 and n0 > 0):
        raise ValueError(f"no positive (T, N0) makes p_t={p_t} a stationary point")
    share = inv_t * senv.e_sample * n / total_w
    return Calibration(float(1.0 / inv_t), float(n0), p_t, total_w, float(share))
