"""Standard-normal tail probability Q(x) = 1 - Phi(x) and its inverse.

Both functions accept scalars or numpy arrays. Scalars come back as plain
floats so the sensing/AppOS code can stay agnostic about the call shape.
"""

import math

import numpy as np
from scipy.special import erfc

# Beyond this the tail is below the smallest subnormal double.
CLAMP = 40.0

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Acklam's rational approximation for the lower-tail normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549671010366788e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _wrap(result, scalar):
    return float(result) if scalar else result


def phi(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def q(x):
    """Upper tail of the standard normal, Q(x) = P(Z > x).

    Arguments outside [-40, 40] clamp to 1 and 0. NaN or infinite input
    raises ``ValueError``.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("q() requires finite input")
    out = 0.5 * erfc(x / _SQRT2)
    out = np.where(x < -CLAMP, 1.0, np.where(x > CLAMP, 0.0, out))
    return _wrap(out, scalar)


def _lower_quantile_guess(p):
    # Acklam, valid for 0 < p <= 0.5; relative error ~1e-9.
    out = np.empty_like(p)
    low = p < _P_LOW
    if np.any(low):
        t = np.sqrt(-2.0 * np.log(p[low]))
        num = ((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5]
        den = (((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0
        out[low] = num / den
    mid = ~low
    if np.any(mid):
        u = p[mid] - 0.5
        r = u * u
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * u
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        out[mid] = num / den
    return out


def q_inv(p):
    """Inverse of :func:`q`: returns x with Q(x) = p, for 0 < p < 1.

    A rational first guess is polished with two Newton steps on Q itself,
    which brings the round trip error down to a few ulps of p.
    """
    scalar = np.ndim(p) == 0
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise ValueError("q_inv() requires 0 < p < 1")

    # Work in the smaller tail; 1 - p is exact for p in [0.5, 1].
    upper = p > 0.5
    tail = np.where(upper, 1.0 - p, p)

    # Q(x) = tail  <=>  x = -Phi^{-1}(tail)
    x = -_lower_quantile_guess(tail)
    for _ in range(2):
        x = x + (0.5 * erfc(x / _SQRT2) - tail) / phi(x)

    out = np.where(upper, -x, x)
    return _wrap(out, scalar)


def q_inv_deriv(p):
    """d/dp of Q^{-1}(p), equal to -1 / phi(Q^{-1}(p))."""
    scalar = np.ndim(p) == 0
    return _wrap(-1.0 / phi(q_inv(p)), scalar)
