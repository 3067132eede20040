"""End-to-end acceptance checks on the reference scenario.

Each test prints one ``[criterion N] PASS|FAIL`` line; the lines are also
collected into the terminal summary.
"""
import time

import numpy as np
import pytest

from radargame.detection import detection_probability
from radargame.games import (Algo2Params, Algo3Params, design_cmsc, design_ec, design_scsc,
                             maxmin_oracle, randomize_cm, relaxed_game_value, run_algo2,
                             verify_nash_ec, worst_case_tir)
from radargame.harness import from_dict, run_detection_sweep
from radargame.harness.signal import notch_depth_db
from radargame.model import (CMSC, SCSC, Band, default_scenario, lfm_reference, op_G, op_H,
                             sinr, waveform_gram)
from radargame.solvers import sample_ball, trs_dual

from conftest import ACCEPTANCE_LINES

BANDS = (Band(0.30, 0.40, 0.6), Band(0.60, 0.80, 0.4))
E_T_GRID = np.logspace(0, 2, 10).tolist()
E_I_GRID = [0.1, 0.3, 1.0]


def report(n: int, ok: bool, detail: str):
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# ---------------------------------------------------------------- 1

def test_criterion_1_operator_identity():
    start = time.perf_counter()
    scn = default_scenario(radius=0.5)
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        s = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        t = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        err = np.linalg.norm(op_G(scn, t) @ s - op_H(scn, s) @ t)
        worst = max(worst, err / (1 + np.linalg.norm(s) * np.linalg.norm(t)))
    wall = time.perf_counter() - start
    report(1, worst <= 1e-10 and wall < 5,
           f"200 pairs, max ||G(t)s - H(s)t|| / (1 + ||s|| ||t||) = {worst:.2e}, {wall:.2f} s")


# ---------------------------------------------------------------- 2

def test_criterion_2_nash_certificate():
    start = time.perf_counter()
    parts, ok = [], True
    for r in (0.1, 0.3, 0.5, 0.8):
        scn = default_scenario(radius=r)
        res = design_ec(scn, 1.0)
        rep = verify_nash_ec(scn, 1.0, res, n_trials=500, seed=11, tol=1e-6)
        oracle, _ = maxmin_oracle(scn, 1.0, seed=5)
        rel = abs(oracle - res.sinr_worst) / res.sinr_worst
        ok &= rep.violations == 0 and rel <= 0.01
        parts.append(f"r={r}: value {res.sinr_worst:.6g}, violations {rep.violations}/500, "
                     f"oracle gap {100 * rel:.3f}%")
    wall = time.perf_counter() - start
    report(2, ok and wall < 300, "; ".join(parts) + f"; {wall:.1f} s")


# ---------------------------------------------------------------- 3

def _series(table, name):
    vals = table.column(name)
    return {v: table.rows[vals == v] for v in dict.fromkeys(vals.tolist())}


def test_criterion_3_detection_trends():
    start = time.perf_counter()
    ec_cfg = from_dict({"constraint": {"kind": "ec"},
                        "sweep": {"variable": "e_t", "values": E_T_GRID,
                                  "series": {"variable": "radius", "values": [0.1, 0.3, 0.5, 0.8]}}})
    cm_cfg = from_dict({"scenario": {"radius": 0.8}, "constraint": {"kind": "cmsc"},
                        "sweep": {"variable": "e_t", "values": E_T_GRID,
                                  "series": {"variable": "delta", "values": [0.1, 1.0]}}})
    ec = run_detection_sweep(ec_cfg)
    cm = run_detection_sweep(cm_cfg)
    pd_col = ec.columns.index("p_d")
    worst_mono = 0.0
    for tab, name in ((ec, "r"), (cm, "delta")):
        for rows in _series(tab, name).values():
            worst_mono = max(worst_mono, float(np.max(-np.diff(rows[:, pd_col]), initial=0.0)))
    by_r = _series(ec, "r")
    by_d = _series(cm, "delta")
    r_viol = float(np.max(by_r[0.8][:, pd_col] - by_r[0.1][:, pd_col]))
    d_viol = float(np.max(by_d[0.1][:, pd_col] - by_d[1.0][:, pd_col]))
    failures = ec.metadata["failures"] + cm.metadata["failures"]
    wall = time.perf_counter() - start
    ok = (failures == 0 and worst_mono <= 1e-9 and r_viol <= 1e-9 and d_viol <= 1e-9
          and wall < 600)
    report(3, ok, f"e_t over 20 dB x 10 points; largest p_d drop along e_t {worst_mono:.1e}; "
                  f"max p_d(r=0.8)-p_d(r=0.1) {r_viol:.2e}; max p_d(d=0.1)-p_d(d=1) {d_viol:.2e}; "
                  f"failed points {failures}; {wall:.1f} s")


# ---------------------------------------------------------------- 4

def _quad(U, P):
    return np.einsum("ni,ij,nj->n", P.conj(), U, P).real


def _sampled_ball_min(U, t0, r, n, rng, n_uniform=20_000, rounds=80, shrink=0.9):
    """Min of ``t^H U t`` over ``n`` random points of the ball.

    ``n_uniform`` points are uniform over the ball; the rest are uniform in
    sub-balls around the incumbent whose radius shrinks geometrically, pulled
    back into the ball.  Returns the overall minimum and the uniform-only one.
    """
    P = np.array(sample_ball(t0, r, n_uniform, rng))
    v = _quad(U, P)
    k = int(np.argmin(v))
    best, best_v = P[k], float(v[k])
    uniform_min = best_v
    per, scale = (n - n_uniform) // rounds, 0.5 * r
    for _ in range(rounds):
        Q = np.array(sample_ball(best, scale, per, rng))
        d = Q - t0
        nd = np.linalg.norm(d, axis=1, keepdims=True)
        Q = np.where(nd > r, t0 + d * (r / np.maximum(nd, 1e-300)), Q)
        w = _quad(U, Q)
        k = int(np.argmin(w))
        if w[k] < best_v:
            best, best_v = Q[k], float(w[k])
        scale *= shrink
    return best_v, uniform_min


def test_criterion_4_trust_region_duality():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    worst, worst_uniform, below = 0.0, 0.0, 0.0
    for _ in range(50):
        while True:
            X = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
            U = 0.5 * (X + X.conj().T)
            ev = np.linalg.eigvalsh(U)
            if ev[0] < 0 < ev[-1]:
                break
        t0 = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        r = float(rng.uniform(0.2, 2.0))
        value, _ = trs_dual(U, t0, r)
        sampled, uniform = _sampled_ball_min(U, t0, r, 100_000, rng)
        scale = 1 + abs(value)
        worst = max(worst, abs(value - sampled) / scale)
        worst_uniform = max(worst_uniform, abs(value - uniform) / scale)
        below = max(below, (value - sampled) / scale)  # weak duality: the dual never exceeds a sample
    wall = time.perf_counter() - start
    report(4, worst <= 1e-3 and below <= 1e-9 and wall < 60,
           f"50 indefinite 6x6 instances, max |dual - sampled min| / (1+|v|) = {worst:.2e} "
           f"(uniform points alone {worst_uniform:.2e}), {wall:.1f} s")


# ---------------------------------------------------------------- 5, 6

@pytest.fixture(scope="module")
def scsc_runs():
    scn = default_scenario(radius=0.8)
    s0 = lfm_reference(2, 16, 100.0)
    out = {}
    for e_i in E_I_GRID:
        start = time.perf_counter()
        c = SCSC(100.0, 1.0, s0, BANDS, e_i)
        res = design_scsc(scn, c, Algo3Params(eps=1e-3, max_iter=50))
        out[e_i] = (c, res, time.perf_counter() - start)
    return scn, out


def test_criterion_5_mm_monotone_and_bounded(scsc_runs):
    scn, runs = scsc_runs
    bound = 100.0 * np.linalg.eigvalsh(waveform_gram(scn, scn.t0))[-1]
    ok, parts = True, []
    for e_i, (c, res, wall) in runs.items():
        obj = np.array([r.objective for r in res.trace])
        drop = float(np.max(-np.diff(obj), initial=0.0))
        last_inc = abs(res.trace[-1].gap)
        good = (drop <= 1e-8 and res.converged and last_inc <= 1e-3 and len(obj) <= 50
                and obj[-1] <= bound and wall < 600)
        ok &= good
        parts.append(f"e_I={e_i:g}: {len(obj)} iters, final {obj[-1]:.6g}, "
                     f"last increment {last_inc:.1e}, largest drop {drop:.1e}, {wall:.1f} s")
    report(5, ok, f"bound {bound:.6g}; " + "; ".join(parts))


def test_criterion_6_spectral_notching(scsc_runs):
    _, runs = scsc_runs
    depths = [notch_depth_db(runs[e][1].s_opt, BANDS) for e in E_I_GRID]
    ok = depths[0] >= 10.0 and all(b <= a + 1e-9 for a, b in zip(depths, depths[1:]))
    report(6, ok, "notch depth (dB) by e_I: "
                  + ", ".join(f"{e:g} -> {d:.2f}" for e, d in zip(E_I_GRID, depths)))


# ---------------------------------------------------------------- 7

def test_criterion_7_robustness_floor(scsc_runs):
    start = time.perf_counter()
    scn_sc, runs = scsc_runs
    designs = []
    scn = default_scenario(radius=0.5)
    designs.append(("EC", scn, design_ec(scn, 1.0)))
    scn_c = default_scenario(radius=0.1)
    c = CMSC(1.0, 1.0, lfm_reference(2, 16, 1.0))
    designs.append(("CM-SC", scn_c, design_cmsc(scn_c, c, Algo2Params())))
    designs.append(("SC-SC", scn_sc, runs[1.0][1]))
    ok, parts = True, []
    for name, sc, res in designs:
        vals = [sinr(sc, res.s_opt.s, res.w_opt, t) for t in sample_ball(sc.t0, sc.radius, 100, 7)]
        margin = min(vals) - res.sinr_worst
        ok &= margin >= -1e-6
        parts.append(f"{name}: min sample - worst = {margin:.3e}")
    wall = time.perf_counter() - start
    report(7, ok and wall < 60, "; ".join(parts) + f"; {wall:.1f} s")


# ---------------------------------------------------------------- 8

def test_criterion_8_constant_modulus_feasibility():
    start = time.perf_counter()
    ok, parts = True, []
    for r in (0.1, 0.8):
        scn = default_scenario(radius=r)
        value, _ = relaxed_game_value(scn, 1.0)
        s0 = lfm_reference(2, 16, 1.0)
        p = Algo2Params(m_trials=100)
        relaxed = run_algo2(scn, CMSC(1.0, 1.0, s0), p)
        for delta in (0.1, 1.0):
            c = CMSC(1.0, delta, s0)
            res = design_cmsc(scn, c, p, relaxed=relaxed)
            cands = randomize_cm(relaxed[0].R_s, s0, delta, 1.0, p.m_trials, p.seed)
            members = sum(c.contains(w.s) for w in cands)
            excess = max(max(worst_case_tir(scn, w.s).value for w in cands),
                         res.sinr_worst) - value
            ok &= members == len(cands) and c.contains(res.s_opt.s) and excess <= 1e-6
            parts.append(f"r={r} d={delta}: {members}/{len(cands)} in set, worst {res.sinr_worst:.4g} "
                         f"vs relaxed {value:.4g}")
    wall = time.perf_counter() - start
    report(8, ok and wall < 300, "; ".join(parts) + f"; {wall:.1f} s")


# ---------------------------------------------------------------- 9

def test_criterion_9_marcum_validation():
    start = time.perf_counter()
    exact = max(abs(detection_probability(0.0, pfa) - pfa) for pfa in (1e-2, 1e-4, 1e-6))
    rng = np.random.default_rng(9)
    n, snr, pfa = 1_000_000, 10.0, 1e-3
    # square-law detector on a unit-variance complex Gaussian around the signal amplitude
    x = np.sqrt(2 * snr) + rng.standard_normal(n)
    y = rng.standard_normal(n)
    mc = float(np.mean(x * x + y * y > -2 * np.log(pfa)))
    pd = detection_probability(snr, pfa)
    se = np.sqrt(pd * (1 - pd) / n)
    z = abs(mc - pd) / se
    wall = time.perf_counter() - start
    report(9, exact <= 1e-9 and z <= 3 and wall < 120,
           f"|P_d(0) - pfa| max {exact:.1e}; P_d(10, 1e-3) = {pd:.6f}, Monte Carlo {mc:.6f} "
           f"({z:.2f} SE); {wall:.1f} s")


# ---------------------------------------------------------------- 10

def test_criterion_10_selftest_determinism(tmp_path):
    from radargame.cli import main

    dirs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["selftest", "--seed", "17", "--format", "csv", "--out", str(d)]) for d in dirs]
    files = sorted(p.name for p in (dirs[0] / "selftest").glob("*.csv"))
    same = [((dirs[0] / "selftest" / f).read_bytes() == (dirs[1] / "selftest" / f).read_bytes())
            for f in files]
    report(10, codes == [0, 0] and files and all(same),
           f"{len(files)} CSV files, {sum(same)} byte-identical across two runs with seed 17")
