"""Experiment runners: each turns a configuration into one or more result tables."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from ..detection import detection_probability
from ..model import CMSC, EC, SCSC, DesignResult, ModelError, Waveform, sinr
from ..games.cmsc import Algo2Params, design_cmsc, run_algo2
from ..games.ec import design_ec
from ..games.scsc import Algo3Params, design_scsc
from ..solvers.ball import sample_ball
from ..solvers.conic import SolverError
from .config import ExperimentConfig
from .signal import autocorrelation, compression_db, notch_depth_db, peak_sidelobe_db, psd
from .tables import PlotSpec, ResultTable

log = logging.getLogger(__name__)

COLUMN_NAMES = {"e_t": "e_t", "radius": "r", "delta": "delta", "e_i": "e_i"}


def _meta(cfg: ExperimentConfig, start: float, **extra) -> dict:
    return {"config_hash": cfg.hash(), "seed": cfg.seed,
            "wall_s": round(time.perf_counter() - start, 3), **extra}


def algo2_params(cfg: ExperimentConfig) -> Algo2Params:
    a = cfg.algo
    return Algo2Params(a.beta, a.eta, a.eps_c, a.max_iter_c, a.m_trials, cfg.seed)


def algo3_params(cfg: ExperimentConfig) -> Algo3Params:
    return Algo3Params(cfg.algo.eps_s, cfg.algo.max_iter_s)


def run_design(cfg: ExperimentConfig, kind: str | None = None, **point) -> DesignResult:
    """Run the configured algorithm at one point; ``point`` overrides radius, e_t, delta or e_i."""
    radius = point.pop("radius", None)
    scn = cfg.build_scenario(radius)
    c = cfg.build_constraint(kind, **point)
    if isinstance(c, EC):
        return design_ec(scn, c.e_t)
    if isinstance(c, CMSC):
        return design_cmsc(scn, c, algo2_params(cfg))
    return design_scsc(scn, c, algo3_params(cfg))


@dataclass
class DesignBundle:
    """A design and the objects needed to interpret it."""

    cfg: ExperimentConfig
    result: DesignResult
    constraint: object

    @property
    def waveform(self) -> Waveform:
        return self.result.s_opt


def design_bundle(cfg: ExperimentConfig, kind: str | None = None) -> DesignBundle:
    c = cfg.build_constraint(kind)
    return DesignBundle(cfg, run_design(cfg, kind), c)


# --------------------------------------------------------------------------
# detection sweep

def _grid(cfg: ExperimentConfig):
    sw = cfg.sweep
    values = list(sw.values) or [getattr(cfg.constraint, sw.variable, None)
                                 if sw.variable != "radius" else cfg.scenario.radius]
    series_var = sw.series.variable if sw.series else None
    series_vals = list(sw.series.values) if sw.series and sw.series.values else [None]
    return sw.variable, values, series_var, series_vals


def run_detection_sweep(cfg: ExperimentConfig) -> ResultTable:
    """Worst-case SINR and detection probability over the sweep grid, one curve per series value."""
    start = time.perf_counter()
    var, values, series_var, series_vals = _grid(cfg)
    pfa = cfg.sweep.pfa
    kind = cfg.constraint.kind
    failures = 0
    records = []
    relaxed_cache: dict = {}
    for sv in series_vals:
        for v in values:
            point = {var: v}
            if series_var is not None:
                point[series_var] = sv
            try:
                res = _sweep_point(cfg, kind, point, relaxed_cache)
                value = res.sinr_worst
                pd = detection_probability(value, pfa)
            except (SolverError, ModelError) as exc:
                log.warning("sweep point %s failed: %s", point, exc)
                failures += 1
                value, pd = np.nan, np.nan
            records.append([v, np.nan if sv is None else sv, value, pd])
    series_name = COLUMN_NAMES.get(series_var, "series")
    cols = [COLUMN_NAMES[var], series_name, "sinr_worst", "p_d"]
    if series_var is None:
        for r in records:
            r[1] = 0.0
    plot = PlotSpec(cols[0], ["p_d"], group=series_name if series_var else None,
                    logx=var in ("e_t", "e_i"), ylabel="detection probability",
                    xlabel=f"{cols[0]}")
    return ResultTable.from_records(cols, records, plot=plot,
                                    metadata=_meta(cfg, start, kind=kind, pfa=pfa,
                                                   failures=failures))


def _sweep_point(cfg, kind, point, relaxed_cache):
    if kind != "cmsc":
        return run_design(cfg, kind, **dict(point))
    # the relaxed game does not see delta, so its solution is shared across delta values
    point = dict(point)
    radius = point.pop("radius", None)
    scn = cfg.build_scenario(radius)
    c = cfg.build_constraint("cmsc", **point)
    key = (scn.radius, c.e_t)
    params = algo2_params(cfg)
    if key not in relaxed_cache:
        relaxed_cache[key] = run_algo2(scn, c, params)
    return design_cmsc(scn, c, params, relaxed=relaxed_cache[key])


# --------------------------------------------------------------------------
# convergence traces

def run_convergence(cfg: ExperimentConfig) -> ResultTable:
    """Per-iteration objective and gap of the iterative designs for every sweep value."""
    start = time.perf_counter()
    kind = cfg.constraint.kind
    if kind not in ("cmsc", "scsc"):
        raise ModelError("constraint.kind: convergence traces need cmsc or scsc")
    var = cfg.sweep.variable
    values = list(cfg.sweep.values) or [None]
    records = []
    flags = {}
    for v in values:
        point = {} if v is None else {var: v}
        scn = cfg.build_scenario(point.pop("radius", None))
        c = cfg.build_constraint(kind, **point)
        if kind == "cmsc":
            _, trace, converged = run_algo2(scn, c, algo2_params(cfg))
        else:
            res = design_scsc(scn, c, algo3_params(cfg))
            trace, converged = res.trace, res.converged
        flags[str(v)] = converged
        for rec in trace:
            records.append([0.0 if v is None else v, rec.iter, rec.objective,
                            np.nan if rec.gap is None else rec.gap])
    name = COLUMN_NAMES[var] if values != [None] else "series"
    plot = PlotSpec("iter", ["objective"], group=name if values != [None] else None,
                    ylabel="relaxed objective" if kind == "cmsc" else "minorizer value")
    return ResultTable.from_records([name, "iter", "objective", "gap"], records, plot=plot,
                                    metadata=_meta(cfg, start, kind=kind, converged=flags))


# --------------------------------------------------------------------------
# waveform diagnostics

def run_psd(source, n_points: int = 1024) -> ResultTable:
    """PSD of a waveform (or of the configured design) in dB relative to its peak."""
    start = time.perf_counter()
    cfg, w, meta = _waveform_source(source)
    f, p = psd(w, n_points)
    db = 10 * np.log10(np.maximum(p / p.max(), 1e-30))
    if isinstance(meta.get("constraint"), SCSC):
        meta["notch_depth_db"] = notch_depth_db(w, meta["constraint"].bands, n_points)
    meta.pop("constraint", None)
    if cfg is not None:
        meta.update(_meta(cfg, start))
    return ResultTable.from_records(["freq", "psd_db", "psd_linear"], np.column_stack([f, db, p]),
                                    metadata=meta, plot=PlotSpec("freq", ["psd_db"],
                                                                 xlabel="normalized frequency",
                                                                 ylabel="PSD (dB)"))


def run_pulse_compression(source, cross_reference: bool = False) -> ResultTable:
    """Per-transmitter autocorrelation in dB (or cross-correlation against ``s0``)."""
    start = time.perf_counter()
    cfg, w, meta = _waveform_source(source)
    ref = None
    if cross_reference:
        c = meta.get("constraint")
        if c is None or not hasattr(c, "s0"):
            raise ModelError("cross-correlation needs a constraint with a reference code")
        ref = c.s0
    meta.pop("constraint", None)
    lags, r = autocorrelation(w, ref)
    db = compression_db(r, lags)
    meta["definition"] = "cross-correlation with s0" if ref is not None else \
        "per-transmitter aperiodic autocorrelation"
    meta["peak_sidelobe_db"] = peak_sidelobe_db(w).tolist()
    if cfg is not None:
        meta.update(_meta(cfg, start))
    cols = ["lag"] + [f"tx{n + 1}_db" for n in range(w.n_tx)]
    return ResultTable.from_records(cols, np.column_stack([lags, db.T]), metadata=meta,
                                    plot=PlotSpec("lag", cols[1:], ylabel="|r(k)| / |r(0)| (dB)"))


def _waveform_source(source):
    if isinstance(source, Waveform):
        return None, source, {}
    if isinstance(source, DesignBundle):
        return source.cfg, source.waveform, {"constraint": source.constraint}
    if isinstance(source, ExperimentConfig):
        b = design_bundle(source)
        return source, b.waveform, {"constraint": b.constraint}
    raise TypeError("expected a Waveform, DesignBundle or ExperimentConfig")


# --------------------------------------------------------------------------
# robustness sampling

def run_robustness(cfg: ExperimentConfig, n_samples: int = 100,
                   bundle: DesignBundle | None = None) -> tuple[ResultTable, ResultTable]:
    """SINR of the fixed designed pair at responses drawn uniformly from the ball.

    Returns the per-sample table and a one-row summary ``(min, mean, sinr_worst)``.
    """
    start = time.perf_counter()
    bundle = bundle or design_bundle(cfg)
    res = bundle.result
    scn = cfg.build_scenario()
    samples = sample_ball(scn.t0, scn.radius, n_samples, cfg.seed)
    vals = np.array([sinr(scn, res.s_opt.s, res.w_opt, t) for t in samples])
    meta = _meta(cfg, start, kind=cfg.constraint.kind)
    table = ResultTable.from_records(["sample", "sinr", "sinr_worst"],
                                     np.column_stack([np.arange(n_samples), vals,
                                                      np.full(n_samples, res.sinr_worst)]),
                                     metadata=meta,
                                     plot=PlotSpec("sample", ["sinr", "sinr_worst"],
                                                   ylabel="output SINR"))
    summary = ResultTable.from_records(["min", "mean", "sinr_worst"],
                                       [[vals.min(), vals.mean(), res.sinr_worst]], metadata=meta)
    return table, summary


# --------------------------------------------------------------------------
# design summaries

def design_tables(bundle: DesignBundle) -> dict[str, ResultTable]:
    """Waveform entries, scalar summary and (for iterative designs) the trace."""
    res = bundle.result
    cfg = bundle.cfg
    w = res.s_opt
    S = w.matrix
    n_tx, L = S.shape
    tx, lag = np.meshgrid(np.arange(1, n_tx + 1), np.arange(1, L + 1), indexing="ij")
    meta = _meta(cfg, time.perf_counter(), kind=cfg.constraint.kind, converged=res.converged)
    entries = ResultTable.from_records(
        ["tx", "l", "re", "im", "modulus"],
        np.column_stack([tx.ravel(), lag.ravel(), S.real.ravel(), S.imag.ravel(),
                         np.abs(S).ravel()]),
        metadata=meta, plot=PlotSpec("l", ["modulus"], group="tx", xlabel="code index",
                                     ylabel="|S(n, l)|"))
    pd = detection_probability(res.sinr_worst, cfg.sweep.pfa)
    summary = ResultTable.from_records(
        ["sinr_worst", "sinr_worst_db", "p_d", "energy", "iterations", "converged"],
        [[res.sinr_worst, 10 * np.log10(max(res.sinr_worst, 1e-300)), pd, w.energy,
          len(res.trace), float(res.converged)]], metadata=meta)
    out = {"waveform": entries, "summary": summary}
    if len(res.trace) > 1:
        out["trace"] = ResultTable.from_records(
            ["iter", "objective", "gap"],
            [[r.iter, r.objective, np.nan if r.gap is None else r.gap] for r in res.trace],
            metadata=meta, plot=PlotSpec("iter", ["objective"]))
    return out
