"""Experiment configuration: YAML documents with nested blocks.

Example::

    seed: 0
    scenario:
      n_tx: 2
      n_rx: 4
      code_len: 16
      theta_deg: 30.0
      tx_spacing: 1.0
      rx_spacing: 0.5
      rho: 0.8
      radius: 0.5
      t0:                 # (magnitude, phase in radians) per tap
        - [0.2, 0.7853981633974483]
        - ...
    constraint:
      kind: cmsc          # ec | cmsc | scsc
      e_t: 1.0
      delta: 1.0          # cmsc, scsc
      e_i: 1.0            # scsc
      bands:              # scsc
        - {f1: 0.3, f2: 0.4, weight: 0.6}
    algo:
      beta: 0.05
      eta: 0.002
      eps_c: 0.001
      eps_s: 0.001
      max_iter_c: 200
      max_iter_s: 50
      m_trials: 100
    sweep:
      variable: e_t
      values: [1.0, 10.0, 100.0]
      series: {variable: radius, values: [0.1, 0.8]}
      pfa: 1.0e-6
    output:
      directory: out
      formats: [csv, svg]

Missing blocks take the defaults below.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from ..model import CMSC, EC, SCSC, Band, ModelError, Scenario, default_scenario, lfm_reference
from ..model import reference_t0

SWEEP_VARIABLES = ("e_t", "radius", "delta", "e_i")
FORMATS = ("csv", "svg")
KINDS = ("ec", "cmsc", "scsc")


class ConfigError(ModelError):
    """Invalid configuration; the message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _default_t0() -> list[list[float]]:
    t0 = reference_t0()
    return [[float(abs(z)), float(np.angle(z))] for z in t0]


@dataclass
class ScenarioCfg:
    n_tx: int = 2
    n_rx: int = 4
    code_len: int = 16
    theta_deg: float = 30.0
    tx_spacing: float = 1.0
    rx_spacing: float = 0.5
    rho: float = 0.8
    radius: float = 0.5
    t0: list = field(default_factory=_default_t0)


@dataclass
class BandCfg:
    f1: float
    f2: float
    weight: float = 1.0


def _default_bands() -> list[BandCfg]:
    return [BandCfg(0.30, 0.40, 0.6), BandCfg(0.60, 0.80, 0.4)]


@dataclass
class ConstraintCfg:
    kind: str = "ec"
    e_t: float = 1.0
    delta: float = 1.0
    e_i: float = 1.0
    bands: list = field(default_factory=_default_bands)


@dataclass
class AlgoCfg:
    beta: float = 0.05
    eta: float = 0.002
    eps_c: float = 1e-3
    eps_s: float = 1e-3
    max_iter_c: int = 200
    max_iter_s: int = 50
    m_trials: int = 100


@dataclass
class SeriesCfg:
    variable: str = "radius"
    values: list = field(default_factory=list)


@dataclass
class SweepCfg:
    variable: str = "e_t"
    values: list = field(default_factory=list)
    series: Optional[SeriesCfg] = None
    pfa: float = 1e-6


@dataclass
class OutputCfg:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "svg"])


@dataclass
class ExperimentConfig:
    seed: int = 0
    scenario: ScenarioCfg = field(default_factory=ScenarioCfg)
    constraint: ConstraintCfg = field(default_factory=ConstraintCfg)
    algo: AlgoCfg = field(default_factory=AlgoCfg)
    sweep: SweepCfg = field(default_factory=SweepCfg)
    output: OutputCfg = field(default_factory=OutputCfg)

    # -- derived objects ------------------------------------------------
    def t0(self) -> np.ndarray:
        pairs = np.asarray(self.scenario.t0, dtype=float)
        return pairs[:, 0] * np.exp(1j * pairs[:, 1])

    def build_scenario(self, radius: float | None = None) -> Scenario:
        sc = self.scenario
        scn = default_scenario(radius=sc.radius if radius is None else radius, rho=sc.rho,
                               t0=self.t0(), n_tx=sc.n_tx, n_rx=sc.n_rx, code_len=sc.code_len,
                               theta_deg=sc.theta_deg)
        if (sc.tx_spacing, sc.rx_spacing) != (scn.tx_spacing, scn.rx_spacing):
            scn = Scenario(scn.n_tx, scn.n_rx, scn.code_len, scn.tir_len, scn.theta_t,
                           scn.noise_cov, scn.t0, scn.radius, sc.tx_spacing, sc.rx_spacing)
        return scn

    def build_constraint(self, kind: str | None = None, e_t: float | None = None,
                         delta: float | None = None, e_i: float | None = None):
        c = self.constraint
        kind = kind or c.kind
        e_t = c.e_t if e_t is None else e_t
        delta = c.delta if delta is None else delta
        e_i = c.e_i if e_i is None else e_i
        if kind == "ec":
            return EC(e_t)
        s0 = lfm_reference(self.scenario.n_tx, self.scenario.code_len, e_t)
        if kind == "cmsc":
            return CMSC(e_t, delta, s0)
        bands = tuple(Band(b.f1, b.f2, b.weight) for b in c.bands)
        return SCSC(e_t, delta, s0, bands, e_i)

    # -- serialisation --------------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# parsing and validation

def _build(cls, data: Any, path: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown field")
    kwargs = {}
    for name, value in data.items():
        sub = f"{path}.{name}" if path else name
        kwargs[name] = _coerce(cls, name, value, sub)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(path or "<root>", str(exc)) from None


_NESTED = {
    (ExperimentConfig, "scenario"): ScenarioCfg,
    (ExperimentConfig, "constraint"): ConstraintCfg,
    (ExperimentConfig, "algo"): AlgoCfg,
    (ExperimentConfig, "sweep"): SweepCfg,
    (ExperimentConfig, "output"): OutputCfg,
    (SweepCfg, "series"): SeriesCfg,
}


def _coerce(cls, name, value, path):
    nested = _NESTED.get((cls, name))
    if nested is not None:
        return None if (value is None and nested is SeriesCfg) else _build(nested, value, path)
    if cls is ConstraintCfg and name == "bands":
        if not isinstance(value, list):
            raise ConfigError(path, "expected a list of bands")
        return [_build(BandCfg, b, f"{path}[{i}]") for i, b in enumerate(value)]
    return value


def _number(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if not np.isfinite(value):
        raise ConfigError(path, "must be finite")
    return value


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    _number(cfg.seed, "seed", integer=True)
    sc = cfg.scenario
    for name in ("n_tx", "n_rx", "code_len"):
        if _number(getattr(sc, name), f"scenario.{name}", integer=True) < 1:
            raise ConfigError(f"scenario.{name}", "must be a positive integer")
    for name in ("theta_deg", "tx_spacing", "rx_spacing"):
        _number(getattr(sc, name), f"scenario.{name}")
    if not 0 <= _number(sc.rho, "scenario.rho") < 1:
        raise ConfigError("scenario.rho", "must lie in [0, 1)")
    if _number(sc.radius, "scenario.radius") < 0:
        raise ConfigError("scenario.radius", "must be nonnegative")
    if not isinstance(sc.t0, list) or not sc.t0:
        raise ConfigError("scenario.t0", "expected a non-empty list of [magnitude, phase] pairs")
    for i, pair in enumerate(sc.t0):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"scenario.t0[{i}]", "expected [magnitude, phase]")
        if _number(pair[0], f"scenario.t0[{i}][0]") < 0:
            raise ConfigError(f"scenario.t0[{i}][0]", "magnitude must be nonnegative")
        _number(pair[1], f"scenario.t0[{i}][1]")

    c = cfg.constraint
    if c.kind not in KINDS:
        raise ConfigError("constraint.kind", f"must be one of {', '.join(KINDS)}")
    if not _number(c.e_t, "constraint.e_t") > 0:
        raise ConfigError("constraint.e_t", "must be positive")
    if not 0 < _number(c.delta, "constraint.delta") <= 2:
        raise ConfigError("constraint.delta", "must lie in (0, 2]")
    if not _number(c.e_i, "constraint.e_i") > 0:
        raise ConfigError("constraint.e_i", "must be positive")
    if c.kind == "scsc" and not c.bands:
        raise ConfigError("constraint.bands", "at least one band is required")
    for i, b in enumerate(c.bands):
        p = f"constraint.bands[{i}]"
        if not 0 <= _number(b.f1, f"{p}.f1") < _number(b.f2, f"{p}.f2") <= 1:
            raise ConfigError(p, "needs 0 <= f1 < f2 <= 1")
        if _number(b.weight, f"{p}.weight") < 0:
            raise ConfigError(f"{p}.weight", "must be nonnegative")

    a = cfg.algo
    if _number(a.beta, "algo.beta") < 0:
        raise ConfigError("algo.beta", "must be nonnegative")
    for name in ("eta", "eps_c", "eps_s"):
        if not _number(getattr(a, name), f"algo.{name}") > 0:
            raise ConfigError(f"algo.{name}", "must be positive")
    for name in ("max_iter_c", "max_iter_s", "m_trials"):
        if _number(getattr(a, name), f"algo.{name}", integer=True) < 1:
            raise ConfigError(f"algo.{name}", "must be at least 1")

    sw = cfg.sweep
    if sw.variable not in SWEEP_VARIABLES:
        raise ConfigError("sweep.variable", f"must be one of {', '.join(SWEEP_VARIABLES)}")
    if not isinstance(sw.values, list):
        raise ConfigError("sweep.values", "expected a list")
    for i, v in enumerate(sw.values):
        _check_sweep_value(sw.variable, v, f"sweep.values[{i}]")
    if sw.series is not None:
        if sw.series.variable not in SWEEP_VARIABLES or sw.series.variable == sw.variable:
            raise ConfigError("sweep.series.variable",
                              f"must be one of {', '.join(SWEEP_VARIABLES)} and differ from sweep.variable")
        for i, v in enumerate(sw.series.values):
            _check_sweep_value(sw.series.variable, v, f"sweep.series.values[{i}]")
    if not 0 < _number(sw.pfa, "sweep.pfa") < 1:
        raise ConfigError("sweep.pfa", "must lie in (0, 1)")

    if not isinstance(cfg.output.formats, list) or any(f not in FORMATS for f in cfg.output.formats):
        raise ConfigError("output.formats", f"must be a list drawn from {', '.join(FORMATS)}")
    if not isinstance(cfg.output.directory, str) or not cfg.output.directory:
        raise ConfigError("output.directory", "must be a non-empty path")
    return cfg


def _check_sweep_value(variable, v, path):
    _number(v, path)
    if variable == "delta" and not 0 < v <= 2:
        raise ConfigError(path, "delta must lie in (0, 2]")
    if variable == "radius" and v < 0:
        raise ConfigError(path, "radius must be nonnegative")
    if variable in ("e_t", "e_i") and not v > 0:
        raise ConfigError(path, f"{variable} must be positive")


def from_dict(data: dict | None) -> ExperimentConfig:
    return validate(_build(ExperimentConfig, copy.deepcopy(data) or {}, ""))


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read, fill defaults and validate; ``None`` gives the default configuration."""
    if path is None:
        return from_dict({})
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(str(p), f"cannot read: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(p), f"parse error: {exc}") from None
    return from_dict(data)


def save_config(cfg: ExperimentConfig, path: str | Path):
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


def apply_overrides(cfg: ExperimentConfig, assignments: list[str]) -> ExperimentConfig:
    """Apply ``block.field=value`` strings (values parsed as YAML) and revalidate."""
    data = cfg.to_dict()
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(item, "override must look like block.field=value")
        parts = key.strip().split(".")
        node = data
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                if part in node and node[part] is None:
                    node[part] = {}
                else:
                    raise ConfigError(key, "unknown block")
            node = node[part]
        node[parts[-1]] = yaml.safe_load(raw)
    return from_dict(data)
