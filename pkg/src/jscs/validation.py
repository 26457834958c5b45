"""Self-checks of the closed-form model: inversions, derivatives, shape claims."""

from dataclasses import dataclass

import numpy as np

from jscs import appos, sensing
from jscs.normal_tail import q, q_inv
from jscs.optimizer import certify_convexity, minimize, p_total_deriv, total_power


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def central_difference(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def derivative_errors(f, df, points, h=1e-6, scale=None):
    """Relative mismatch between ``df`` and central differences of ``f``.

    The step is ``h * |x|``: near p_t -> 0 the AppOS exponent is large and
    a fixed step leaves O(h^2) truncation error above 1e-6.
    ``scale`` (same shape as ``points``) replaces |df| as the denominator
    where the derivative itself cancels, e.g. at a stationary point.
    """
    fd = central_difference(f, points, h * np.abs(points))
    an = df(points)
    denom = np.abs(fd) if scale is None else np.maximum(np.abs(fd), scale)
    return np.abs(an - fd) / denom


def interior_points(senv, n, rng, margin=0.02, kink_gap=1e-3):
    """Random p_t well inside (0, p(H0)) and away from the regime junction."""
    lb = sensing.p_t_lower_bound(senv)
    out = []
    while len(out) < n:
        p = rng.uniform(margin, senv.p_h0 - margin, 2 * n)
        out.extend(p[np.abs(p - lb) > kink_gap])
    return np.array(out[:n])


def component_scale(p, senv, aenv):
    return np.abs(sensing.p_amos_deriv(p, senv)) + np.abs(appos.p_appos_deriv(p, aenv, senv))


def run_checks(senv, aenv, appos_deriv=None, n_points=100, seed=0, rtol=1e-6):
    """Property suite behind ``jscs validate``.

    ``appos_deriv`` swaps in another AppOS derivative, which is how the
    finite-difference check is exercised against a broken formula.
    """
    appos_deriv = appos_deriv or appos.p_appos_deriv
    rng = np.random.default_rng(seed)
    results = []

    def add(name, ok, detail):
        results.append(CheckResult(name, bool(ok), detail))

    p = rng.uniform(1e-8, 1 - 1e-8, 1000)
    err = np.abs(q(q_inv(p)) - p) / np.maximum(p, 1e-3)
    add("q_inv round trip", err.max() <= 1e-10, f"max scaled error {err.max():.3g}")

    ns = np.array([10.0, 1e3, 1e6])
    eps = sensing.threshold_for_target(ns, senv)
    err = np.abs(sensing.p_d_of(eps, ns, senv) - (1 - senv.p_e))
    add("threshold round trip", err.max() <= 1e-9, f"max error {err.max():.3g}")

    lb = sensing.p_t_lower_bound(senv)
    pts = np.linspace(lb, senv.p_h0, 1002)[1:-1]
    back = sensing.p_t_of_n(sensing.n_of_p_t(pts, senv), senv)
    err = np.abs(back - pts) / pts
    add("p_t/N inversion", err.max() <= 1e-8, f"max relative error {err.max():.3g}")

    pts = interior_points(senv, n_points, rng)
    err = derivative_errors(lambda x: appos.p_appos(x, aenv, senv),
                            lambda x: appos_deriv(x, aenv, senv), pts)
    add("AppOS derivative vs finite differences", err.max() <= rtol,
        f"max relative error {err.max():.3g}")

    err = derivative_errors(lambda x: total_power(x, senv, aenv),
                            lambda x: p_total_deriv(x, senv, aenv), pts,
                            scale=component_scale(pts, senv, aenv))
    add("total derivative vs finite differences", err.max() <= rtol,
        f"max relative error {err.max():.3g}")

    grid = np.linspace(1.0 / 256, 1.0, 256)
    diffs = np.diff(appos.p_appos(grid, aenv, senv))
    add("AppOS strictly decreasing", np.all(diffs < 0), f"{int(np.sum(diffs >= 0))} non-negative steps")

    report = certify_convexity(senv, aenv, 1024)
    add("convex where P_FA < 1/2", report.certified, f"{len(report.violations)} violations")

    opt = minimize(senv, aenv)
    fine = np.linspace(0, senv.p_h0, 100_002)[1:-1]
    with np.errstate(over="ignore"):
        best = np.min(total_power(fine, senv, aenv))
    ok = opt.point.p_total_w <= best * (1 + 1e-9)
    add("minimizer beats fine grid", ok,
        f"p_t*={opt.point.p_t:.6g}, P*={opt.point.p_total_w:.6g} W, grid best {best:.6g} W")
    return results
