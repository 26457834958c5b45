"""Energy-detection spectrum sensing (AmOS) in closed form.

The detector averages N samples of |y(n)|^2 and declares the channel busy
when the average exceeds a threshold. Under the CLT approximation the
statistic is Gaussian under both hypotheses, which gives P_FA and P_D as
Q-function expressions. The threshold is always pinned by the miss-detection
cap, P_D = 1 - P_E, so everything here is a function of the sample count N
alone, or equivalently of the effective transmission probability p_t.

N is kept real-valued so the optimizer can differentiate through it.
"""

from dataclasses import dataclass

import numpy as np

from jscs.normal_tail import phi, q, q_inv

# AS4 default cap on the tolerated miss-detection probability.
MAX_MISS_DETECTION = 0.1


@dataclass(frozen=True)
class SensingEnv:
    """Primary-user and detector environment.

    Attributes:
        sigma_s_sq: primary signal power.
        sigma_u_sq: receiver noise power.
        p_h0: prior probability that the primary user is idle.
        p_e: miss-detection cap P_E = 1 - P_D.
        e_sample: energy per detector sample [J].
        slot_len: slot length T [s].
        allow_high_pe: lift the P_E <= 0.1 cap (for degenerate studies).
    """

    sigma_s_sq: float
    sigma_u_sq: float = 1.0
    p_h0: float = 0.7
    p_e: float = MAX_MISS_DETECTION
    e_sample: float = 1e-4
    slot_len: float = 1.0
    allow_high_pe: bool = False

    def __post_init__(self):
        if not self.sigma_s_sq > 0:
            raise ValueError(f"sigma_s_sq must be > 0, got {self.sigma_s_sq}")
        if not self.sigma_u_sq > 0:
            raise ValueError(f"sigma_u_sq must be > 0, got {self.sigma_u_sq}")
        if not 0.0 < self.p_h0 < 1.0:
            raise ValueError(f"p_h0 must lie in (0, 1), got {self.p_h0}")
        if not 0.0 < self.p_e < 1.0:
            raise ValueError(f"p_e must lie in (0, 1), got {self.p_e}")
        if self.p_e > MAX_MISS_DETECTION and not self.allow_high_pe:
            raise ValueError(
                f"p_e={self.p_e} exceeds the {MAX_MISS_DETECTION} cap; "
                "pass allow_high_pe=True to override"
            )
        if not self.e_sample >= 0:
            raise ValueError(f"e_sample must be >= 0, got {self.e_sample}")
        if not self.slot_len > 0:
            raise ValueError(f"slot_len must be > 0, got {self.slot_len}")

    @property
    def p_h1(self) -> float:
        return 1.0 - self.p_h0

    @property
    def gamma(self) -> float:
        """Linear primary-user SNR sigma_s^2 / sigma_u^2."""
        return self.sigma_s_sq / self.sigma_u_sq

    @property
    def sensing_offset(self) -> float:
        """sqrt(2*gamma + 1) * Q^{-1}(1 - P_E), negative whenever P_E < 1/2."""
        return float(np.sqrt(2.0 * self.gamma + 1.0) * q_inv(1.0 - self.p_e))

    @property
    def collision_prob(self) -> float:
        """P_C = P_E * p(H1): transmissions that hit an active primary user."""
        return self.p_e * self.p_h1


@dataclass(frozen=True)
class DetectorStatistics:
    """Gaussian approximation of T(y) under H0 and H1 for a given N."""

    mu_0: float
    sigma_0_sq: float
    mu_1: float
    sigma_1_sq: float


@dataclass(frozen=True)
class SensingDesign:
    n_samples: float
    threshold: float
    p_fa: float
    p_d: float
    p_transmit_raw: float
    p_transmit_eff: float
    p_collision: float


def _check_positive_n(n):
    if np.any(np.asarray(n) <= 0):
        raise ValueError("sample count must be > 0")


def detector_statistics(n: float, env: SensingEnv) -> DetectorStatistics:
    _check_positive_n(n)
    su2 = env.sigma_u_sq
    return DetectorStatistics(
        mu_0=su2,
        sigma_0_sq=su2**2 / n,
        mu_1=su2 + env.sigma_s_sq,
        sigma_1_sq=su2**2 * (2.0 * env.gamma + 1.0) / n,
    )


def p_fa_of(threshold, n, env: SensingEnv):
    """False-alarm probability for threshold epsilon and N samples."""
    _check_positive_n(n)
    return q((threshold / env.sigma_u_sq - 1.0) * np.sqrt(n))


def p_d_of(threshold, n, env: SensingEnv):
    """Detection probability for threshold epsilon and N samples."""
    _check_positive_n(n)
    g = env.gamma
    arg = ((threshold - env.sigma_s_sq) / env.sigma_u_sq - 1.0) * np.sqrt(n / (2.0 * g + 1.0))
    return q(arg)


def threshold_for_target(n, env: SensingEnv):
    """Threshold that gives exactly P_D = 1 - P_E with N samples."""
    _check_positive_n(n)
    spread = q_inv(1.0 - env.p_e) * np.sqrt((2.0 * env.gamma + 1.0) / n)
    return env.sigma_u_sq * (1.0 + spread) + env.sigma_s_sq


def p_fa_given_n(n, env: SensingEnv):
    """P_FA once the threshold is pinned by the miss-detection cap."""
    if np.any(np.asarray(n) < 0):
        raise ValueError("sample count must be >= 0")
    return q(env.sensing_offset + np.sqrt(n) * env.gamma)


def p_t_of_n(n, env: SensingEnv):
    """Effective transmission probability (1 - P_FA) p(H0) for N samples."""
    if np.any(np.asarray(n) < 0):
        raise ValueError("sample count must be >= 0")
    # 1 - Q(x) = Q(-x) keeps precision when P_FA is close to 1.
    return q(-(env.sensing_offset + np.sqrt(n) * env.gamma)) * env.p_h0


def p_t_lower_bound(env: SensingEnv) -> float:
    """Below this p_t the miss-detection cap holds without sensing at all."""
    return float(q(-env.sensing_offset) * env.p_h0)


def _check_p_t(p_t, env):
    p = np.asarray(p_t, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p <= 0.0) or np.any(p >= env.p_h0):
        raise ValueError(f"p_t must lie in (0, p_h0={env.p_h0})")
    return p


def _sqrt_n_times_gamma(p, env):
    # Q^{-1}(1 - p/p_h0) - offset, written with p_h0 - p to keep the tail exact
    return q_inv((env.p_h0 - p) / env.p_h0) - env.sensing_offset


def is_sensing(p_t, env: SensingEnv):
    """True where p_t is above the no-sensing bound."""
    return np.asarray(p_t) > p_t_lower_bound(env)


def n_of_p_t(p_t, env: SensingEnv):
    """Sample count needed to reach effective transmission probability p_t.

    Returns 0 in the no-sensing regime.
    """
    scalar = np.ndim(p_t) == 0
    p = _check_p_t(p_t, env)
    root = np.maximum(_sqrt_n_times_gamma(p, env), 0.0)
    n = (root / env.gamma) ** 2
    n = np.where(is_sensing(p, env), n, 0.0)
    return float(n) if scalar else n


def p_amos(p_t, env: SensingEnv):
    """Average sensing power [W] as a function of p_t."""
    return n_of_p_t(p_t, env) * env.e_sample / env.slot_len


def p_amos_deriv(p_t, env: SensingEnv):
    """d P_AmOS / d p_t; identically zero in the no-sensing regime."""
    scalar = np.ndim(p_t) == 0
    p = _check_p_t(p_t, env)
    root = _sqrt_n_times_gamma(p, env)
    # d/dp Q^{-1}((p_h0 - p)/p_h0) = 1 / (p_h0 * phi(.))
    df = 1.0 / (env.p_h0 * phi(root + env.sensing_offset))
    d = 2.0 * root * df / env.gamma**2 * env.e_sample / env.slot_len
    d = np.where(is_sensing(p, env), d, 0.0)
    return float(d) if scalar else d


def sensing_design(n: float, env: SensingEnv) -> SensingDesign:
    """Full operating description of the detector for a given N > 0."""
    eps = threshold_for_target(n, env)
    p_fa = p_fa_of(eps, n, env)
    p_d = p_d_of(eps, n, env)
    p_eff = float(p_t_of_n(n, env))
    p_c = env.collision_prob
    return SensingDesign(
        n_samples=float(n),
        threshold=float(eps),
        p_fa=float(p_fa),
        p_d=float(p_d),
        p_transmit_raw=p_eff + p_c,
        p_transmit_eff=p_eff,
        p_collision=float(p_c),
    )
