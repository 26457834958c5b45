"""Distortion-constrained source sensing (AppOS) power model.

K sensor nodes observe a Gaussian source through independent Gaussian noise
and report to the access point. The symmetric Gaussian CEO sum rate fixes the
source coding rate for a target distortion D; since only a fraction p_t of
slots can carry data, the channel rate is inflated to R_source / p_t and the
AWGN energy per bit grows accordingly.

All exponentials are taken as exp(x * ln C) so that the p_t -> 0 blowup can
be handled in the log domain (:func:`log_p_appos`).
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from jscs.sensing import SensingEnv


class InfeasibleDistortionError(ValueError):
    """The distortion target cannot be met with this many nodes and this noise."""

    def __init__(self, distortion, min_distortion):
        self.distortion = distortion
        self.min_distortion = min_distortion
        super().__init__(
            f"distortion D={distortion:.6g} is infeasible; "
            f"it must exceed {min_distortion:.6g} for this node count and observation noise"
        )


@dataclass(frozen=True)
class CeoRate:
    """Symmetric Gaussian CEO sum rate and the log argument C behind it."""

    bits_per_s: float
    c: float
    ln_c: float


@dataclass(frozen=True)
class SourceEnv:
    """Application source and AWGN channel parameters.

    ``sigma_W_sq`` is the per-node observation noise; ``n0`` is the one-sided
    noise PSD of the delivery channel in W/Hz.
    """

    sigma_S_sq: float = 1.0
    sigma_W_sq: float = 0.1
    k_nodes: int = 10
    symbol_rate: float = 1e6
    distortion: float = 0.1
    bandwidth: float = 5e6
    n0: float = 2.52e-5

    def __post_init__(self):
        if not self.sigma_S_sq > 0:
            raise ValueError(f"sigma_S_sq must be > 0, got {self.sigma_S_sq}")
        if not self.sigma_W_sq >= 0:
            raise ValueError(f"sigma_W_sq must be >= 0, got {self.sigma_W_sq}")
        if int(self.k_nodes) != self.k_nodes or self.k_nodes < 1:
            raise ValueError(f"k_nodes must be a positive integer, got {self.k_nodes}")
        for name in ("symbol_rate", "bandwidth", "n0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.distortion <= self.sigma_S_sq:
            raise ValueError(
                f"distortion must lie in (0, sigma_S_sq={self.sigma_S_sq}], got {self.distortion}"
            )

    @property
    def min_distortion(self) -> float:
        """Infimum of feasible D: where the CEO denominator reaches zero."""
        if self.sigma_W_sq == 0:
            return 0.0
        return self.sigma_S_sq * self.sigma_W_sq / (self.k_nodes * self.sigma_S_sq + self.sigma_W_sq)

    @property
    def feasible(self) -> bool:
        return self.distortion > self.min_distortion

    @cached_property
    def rate(self) -> CeoRate:
        return ceo_rate(self)


def ceo_rate(env: SourceEnv) -> CeoRate:
    """Sum rate R_source(D) in bits/s for the symmetric Gaussian CEO problem."""
    s2, w2, k, d = env.sigma_S_sq, env.sigma_W_sq, env.k_nodes, env.distortion
    denom = 1.0 - (w2 / k) * (1.0 / d - 1.0 / s2)
    if not denom > 0:
        raise InfeasibleDistortionError(d, env.min_distortion)
    ln_c = math.log(s2 / d) / k - math.log(denom)
    bits = env.symbol_rate / 2.0 * ln_c / math.log(2.0)
    return CeoRate(bits_per_s=bits, c=math.exp(ln_c), ln_c=ln_c)


def energy_per_bit(r_channel, env: SourceEnv):
    """AWGN energy per delivered bit at channel rate R [J/bit]."""
    r = np.asarray(r_channel, dtype=float)
    if np.any(r <= 0):
        raise ValueError("channel rate must be > 0")
    x = r / env.bandwidth * math.log(2.0)
    out = env.n0 * env.bandwidth * np.expm1(x) / r
    return float(out) if np.ndim(r_channel) == 0 else out


def channel_rate(p_t, env: SourceEnv):
    """Channel coding rate R_source / p_t needed to offset silent slots."""
    return env.rate.bits_per_s / np.asarray(p_t, dtype=float)


def _exponent(p, env):
    # ln(C^{L / (2 p W)})
    return env.rate.ln_c * env.symbol_rate / (2.0 * env.bandwidth * p)


def _check_p_t(p_t):
    p = np.asarray(p_t, dtype=float)
    if np.any(~(p > 0)):
        raise ValueError("p_t must be > 0")
    return p


def p_appos(p_t, env: SourceEnv, sensing: SensingEnv):
    """Average AppOS power [W]; +inf once C^{L/(2 p_t W)} overflows."""
    p = _check_p_t(p_t)
    with np.errstate(over="ignore"):
        out = (p + sensing.collision_prob) * env.n0 * env.bandwidth * np.expm1(_exponent(p, env))
    return float(out) if np.ndim(p_t) == 0 else out


def log_p_appos(p_t, env: SourceEnv, sensing: SensingEnv):
    """Natural log of :func:`p_appos`, finite for any p_t > 0 when C > 1."""
    p = _check_p_t(p_t)
    x = _exponent(p, env)
    with np.errstate(divide="ignore"):
        # log(expm1(x)) = x + log1p(-exp(-x)) is the stable form for large x
        log_expm1 = np.where(x > 30.0, x + np.log1p(-np.exp(-np.minimum(x, 700.0))),
                             np.log(np.expm1(np.minimum(x, 30.0))))
        out = np.log(p + sensing.collision_prob) + math.log(env.n0 * env.bandwidth) + log_expm1
    return float(out) if np.ndim(p_t) == 0 else out


def p_appos_deriv(p_t, env: SourceEnv, sensing: SensingEnv):
    """d P_AppOS / d p_t, from direct differentiation of the power law."""
    p = _check_p_t(p_t)
    a = sensing.collision_prob
    x = _exponent(p, env)
    with np.errstate(over="ignore", invalid="ignore"):
        # e^x (1 - x (p + a) / p) - 1, with x = k / p
        out = env.n0 * env.bandwidth * (np.expm1(x) - np.exp(x) * x * (p + a) / p)
    out = np.where(np.isnan(out) & (x > 0), -np.inf, out)
    return float(out) if np.ndim(p_t) == 0 else out


def p_appos_second_deriv(p_t, env: SourceEnv, sensing: SensingEnv):
    p = _check_p_t(p_t)
    a = sensing.collision_prob
    lnc, L, W = env.rate.ln_c, env.symbol_rate, env.bandwidth
    with np.errstate(over="ignore"):
        out = (L * env.n0 * lnc * np.exp(_exponent(p, env))
               * (L * lnc * (p + a) + 4.0 * p * W * a) / (4.0 * p**4 * W))
    return float(out) if np.ndim(p_t) == 0 else out
