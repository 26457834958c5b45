"""Shared fixtures-by-function for the test suite."""

import math

import numpy as np

from jscs.appos import SourceEnv
from jscs.sensing import SensingEnv

PU_SNR_15DB = 10 ** -1.5


def reference_envs():
    """Reference setup at PU SNR -15 dB, source SNR 10 dB,
    with the calibrated T = 1 s and N0 = 2.52e-5 W/Hz."""
    return SensingEnv(sigma_s_sq=PU_SNR_15DB), SourceEnv()


def random_envs(count, seed=0):
    """Random feasible (SensingEnv, SourceEnv) pairs.

    The CEO denominator is drawn directly in [0.2, 0.95] and D solved from
    it, so every draw is feasible and the AppOS exponent stays finite on the
    p_t grids used by the tests.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        senv = SensingEnv(
            sigma_s_sq=10 ** (rng.uniform(-20, -5) / 10),
            p_h0=1 - rng.uniform(0.1, 0.5),
            p_e=rng.uniform(0.01, 0.1),
            e_sample=10 ** rng.uniform(-6, -3),
            slot_len=10 ** rng.uniform(-0.5, 0.5),
        )
        s2 = rng.uniform(0.5, 2.0)
        k = int(rng.integers(2, 21))
        w2 = s2 / 10 ** (rng.uniform(0, 20) / 10)
        denom = rng.uniform(0.2, 0.95)
        d = 1.0 / (1.0 / s2 + (1.0 - denom) * k / w2)
        aenv = SourceEnv(
            sigma_S_sq=s2,
            sigma_W_sq=w2,
            k_nodes=k,
            symbol_rate=10 ** rng.uniform(5, math.log10(2e6)),
            distortion=d,
            bandwidth=10 ** rng.uniform(6, 7),
            n0=10 ** rng.uniform(-6, -4),
        )
        out.append((senv, aenv))
    return out


# filled by test_acceptance, printed by the conftest terminal-summary hook
ACCEPTANCE_LINES = []
