"""A small deterministic end-to-end run with built-in sanity checks."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..detection import detection_probability
from ..model import op_G, op_H
from ..games.cmsc import design_cmsc
from ..games.ec import design_ec
from ..games.scsc import Algo3Params, design_scsc
from .config import ExperimentConfig
from .experiments import (DesignBundle, algo2_params, design_tables, run_psd,
                          run_pulse_compression, run_robustness)
from .tables import PlotSpec, ResultTable


@dataclass
class SelftestReport:
    tables: dict[str, ResultTable] = field(default_factory=dict)
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def check(self, name: str, passed: bool, detail: str):
        self.checks.append((name, bool(passed), detail))


def selftest(cfg: ExperimentConfig, mm_iters: int = 3) -> SelftestReport:
    """EC, CM-SC and a few MM steps on the configured scenario, plus operator and detector checks."""
    rep = SelftestReport()
    scn = cfg.build_scenario()
    rng = np.random.default_rng(cfg.seed)

    worst = 0.0
    for _ in range(20):
        s = rng.standard_normal(scn.code_dim) + 1j * rng.standard_normal(scn.code_dim)
        t = rng.standard_normal(scn.tir_len) + 1j * rng.standard_normal(scn.tir_len)
        err = np.linalg.norm(op_G(scn, t) @ s - op_H(scn, s) @ t)
        worst = max(worst, err / (1 + np.linalg.norm(s) * np.linalg.norm(t)))
    rep.check("operator identity", worst <= 1e-10, f"max scaled residual {worst:.2e}")

    pfa = cfg.sweep.pfa
    err = abs(detection_probability(0.0, pfa) - pfa)
    rep.check("detector at zero SINR", err <= 1e-9, f"|P_d(0) - P_fa| = {err:.1e}")

    ec = cfg.build_constraint("ec")
    res = design_ec(scn, ec.e_t)
    bundle = DesignBundle(replace(cfg, constraint=replace(cfg.constraint, kind="ec")), res, ec)
    for name, tab in design_tables(bundle).items():
        rep.tables[f"ec_{name}"] = tab
    samples, summary = run_robustness(bundle.cfg, 100, bundle)
    rep.tables["ec_robustness"] = samples
    floor = summary.rows[0, 0] - res.sinr_worst
    rep.check("EC robustness floor", floor >= -1e-6, f"min sample minus worst case {floor:.2e}")
    rep.tables["ec_psd"] = run_psd(bundle)
    rep.tables["ec_pulse"] = run_pulse_compression(bundle)

    cm = cfg.build_constraint("cmsc")
    res = design_cmsc(scn, cm, algo2_params(cfg))
    rep.check("CM-SC membership", cm.contains(res.s_opt.s), f"{len(res.trace)} relaxed iterations")
    rep.tables["cmsc_trace"] = design_tables(
        DesignBundle(replace(cfg, constraint=replace(cfg.constraint, kind="cmsc")), res, cm)
    ).get("trace", _trace_table(res))

    sc = cfg.build_constraint("scsc")
    res = design_scsc(scn, sc, Algo3Params(cfg.algo.eps_s, mm_iters))
    obj = np.array([r.objective for r in res.trace])
    drop = float(np.min(np.diff(obj))) if obj.size > 1 else 0.0
    rep.check("MM monotone", drop >= -1e-8, f"smallest step {drop:.2e}")
    rep.tables["scsc_trace"] = _trace_table(res)
    return rep


def _trace_table(res) -> ResultTable:
    return ResultTable.from_records(
        ["iter", "objective"], [[r.iter, r.objective] for r in res.trace],
        plot=PlotSpec("iter", ["objective"]))
