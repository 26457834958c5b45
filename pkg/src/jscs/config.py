"""Scenario configuration: INI-style sections, SI units, ``_db`` keys for SNRs.

Example::

    [sensing]
    pu_snr_db = -15
    sigma_u_sq = 1
    p_h1 = 0.3
    p_e = 0.1
    e_sample = 0.0001
    slot_len = 1

    [source]
    source_snr_db = 10
    sigma_S_sq = 1
    ...

The primary-user SNR sets sigma_s^2 = sigma_u^2 * 10^(snr/10); the source
SNR sets sigma_W^2 = sigma_S^2 / 10^(snr/10).
"""

import configparser
import io
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from jscs.appos import SourceEnv
from jscs.sensing import SensingEnv


class ConfigError(ValueError):
    pass


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SweepSpec:
    p_t_min: float = 0.1
    p_t_max: float = 0.69
    points: int = 512

    def grid(self):
        return np.linspace(self.p_t_min, self.p_t_max, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    """Defaults reproduce the reference simulation setup, with the slot
    length and channel noise PSD set by calibration to its reported optimum."""

    pu_snr_db: float = -15.0
    sigma_u_sq: float = 1.0
    p_h1: float = 0.3
    p_e: float = 0.1
    e_sample: float = 1e-4
    slot_len: float = 1.0
    source_snr_db: float = 10.0
    sigma_S_sq: float = 1.0
    k_nodes: int = 10
    symbol_rate: float = 1e6
    distortion: float = 0.1
    bandwidth: float = 5e6
    n0: float = 2.52e-5
    sweep: SweepSpec = SweepSpec()
    tol_pt: float = 1e-4

    @property
    def senv(self) -> SensingEnv:
        try:
            return SensingEnv(
                sigma_s_sq=self.sigma_u_sq * db_to_linear(self.pu_snr_db),
                sigma_u_sq=self.sigma_u_sq,
                p_h0=1.0 - self.p_h1,
                p_e=self.p_e,
                e_sample=self.e_sample,
                slot_len=self.slot_len,
            )
        except ValueError as exc:
            raise ConfigError(f"[sensing] {exc}") from exc

    @property
    def aenv(self) -> SourceEnv:
        try:
            return SourceEnv(
                sigma_S_sq=self.sigma_S_sq,
                sigma_W_sq=self.sigma_S_sq / db_to_linear(self.source_snr_db),
                k_nodes=self.k_nodes,
                symbol_rate=self.symbol_rate,
                distortion=self.distortion,
                bandwidth=self.bandwidth,
                n0=self.n0,
            )
        except ValueError as exc:
            raise ConfigError(f"[source] {exc}") from exc

    def with_snrs(self, pu_snr_db: float, source_snr_db: float) -> "ScenarioConfig":
        return replace(self, pu_snr_db=pu_snr_db, source_snr_db=source_snr_db)


_SECTIONS = {
    "sensing": ("pu_snr_db", "sigma_u_sq", "p_h1", "p_e", "e_sample", "slot_len"),
    "source": ("source_snr_db", "sigma_S_sq", "k_nodes", "symbol_rate", "distortion", "bandwidth", "n0"),
    "solver": ("tol_pt",),
}
_SWEEP_KEYS = tuple(f.name for f in fields(SweepSpec))


def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


def serialize(config: ScenarioConfig) -> str:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    for section, keys in _SECTIONS.items():
        parser[section] = {k: _fmt(getattr(config, k)) for k in keys}
    parser["sweep"] = {k: _fmt(getattr(config.sweep, k)) for k in _SWEEP_KEYS}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def _convert(name, raw, default):
    try:
        if isinstance(default, int):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None


def parse(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    defaults = ScenarioConfig()
    known = set(_SECTIONS) | {"sweep"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    values = {}
    for section, keys in _SECTIONS.items():
        if section not in parser:
            continue
        extra = set(parser[section]) - set(keys)
        if extra:
            raise ConfigError(f"[{section}] unknown key(s): {', '.join(sorted(extra))}")
        for k, raw in parser[section].items():
            values[k] = _convert(f"[{section}] {k}", raw, getattr(defaults, k))

    sweep = defaults.sweep
    if "sweep" in parser:
        extra = set(parser["sweep"]) - set(_SWEEP_KEYS)
        if extra:
            raise ConfigError(f"[sweep] unknown key(s): {', '.join(sorted(extra))}")
        sweep = replace(sweep, **{
            k: _convert(f"[sweep] {k}", raw, getattr(sweep, k)) for k, raw in parser["sweep"].items()
        })
    return ScenarioConfig(sweep=sweep, **values)


def load(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
