import numpy as np
import pytest

from radargame.games import (Algo2Params, Algo3Params, GameState2, InfeasibleError,
                             algo2_inner_max, design_cmsc, design_ec, design_scsc, feasible_init,
                             maxmin_oracle, minorizer_value, mm_step, randomize_cm,
                             relaxed_game_value, relaxed_objective, tir_gram, verify_nash_ec,
                             worst_case_tir)
from radargame.games.cmsc import _project_fixed_diag, _prox_conic
from radargame.games.scsc import lift_toward_reference
from radargame.model import CMSC, SCSC, Band, ModelError, default_scenario, lfm_reference, sinr, \
    waveform_gram
from radargame.solvers import sample_ball

from conftest import crandn

BANDS = (Band(0.30, 0.40, 0.6), Band(0.60, 0.80, 0.4))


@pytest.fixture(scope="module")
def ec_half():
    scn = default_scenario(radius=0.5)
    return scn, design_ec(scn, 1.0)


# ---------------------------------------------------------------- energy constraint

def test_ec_nominal_is_top_eigenvalue():
    scn = default_scenario(radius=0.0)
    res = design_ec(scn, 2.0)
    top = np.linalg.eigvalsh(waveform_gram(scn, scn.t0))[-1]
    assert res.sinr_worst == pytest.approx(2.0 * top, rel=1e-10)
    assert res.s_opt.energy == pytest.approx(2.0)


def test_ec_reduced_matches_literal_lmi():
    scn = default_scenario(radius=0.3)
    a = design_ec(scn, 1.0)
    b = design_ec(scn, 1.0, literal=True)
    assert a.sinr_worst == pytest.approx(b.sinr_worst, rel=1e-6)


def test_ec_is_a_saddle_point(ec_half):
    scn, res = ec_half
    assert res.s_opt.energy == pytest.approx(1.0, rel=1e-9)
    rep = verify_nash_ec(scn, 1.0, res, n_trials=100, seed=7)
    assert rep.ok and rep.violations == 0
    assert rep.target_gap <= 1e-6


def test_ec_agrees_with_subgradient_oracle(ec_half):
    scn, res = ec_half
    val, s = maxmin_oracle(scn, 1.0, iters=150, starts=2)
    assert val <= res.sinr_worst * (1 + 1e-6)
    assert val >= 0.99 * res.sinr_worst


def test_ec_scales_linearly_in_energy(ec_half):
    scn, res = ec_half
    assert design_ec(scn, 10.0).sinr_worst == pytest.approx(10 * res.sinr_worst, rel=1e-6)


def test_ec_worst_case_floor(ec_half):
    scn, res = ec_half
    for t in sample_ball(scn.t0, scn.radius, 50, seed=1):
        assert sinr(scn, res.s_opt.s, res.w_opt, t) >= res.sinr_worst - 1e-6


def test_worst_value_decreases_with_radius():
    vals = [design_ec(default_scenario(radius=r), 1.0).sinr_worst for r in (0.1, 0.3, 0.5)]
    assert vals[0] > vals[1] > vals[2]


# ---------------------------------------------------------------- constant modulus

def test_tir_gram_identity(scn, rng):
    s = crandn(rng, 32)
    R = np.outer(s, s.conj())
    t = crandn(rng, 6)
    lhs = np.vdot(t, tir_gram(scn, R) @ t).real
    assert lhs == pytest.approx(np.trace(waveform_gram(scn, t) @ R).real, rel=1e-10)


def _feasible_fixed_diag(rng, n, d):
    g = crandn(rng, n, n + 2)
    X = g @ g.conj().T
    D = 1 / np.sqrt(np.diag(X).real)
    return d * X * np.outer(D, D)


def test_fixed_diag_projection_variational_inequality(rng):
    # P solves the projection iff Re tr((K - P)(X - P)) <= 0 for all feasible X
    n, d = 8, 0.3
    K = crandn(rng, n, n)
    K = K + K.conj().T
    P, resid = _project_fixed_diag(K, d)
    assert resid <= 1e-10
    assert np.allclose(np.diag(P).real, d, atol=1e-10)
    assert np.linalg.eigvalsh(P).min() >= -1e-10
    for _ in range(200):
        X = _feasible_fixed_diag(rng, n, d)
        assert np.trace((K - P) @ (X - P)).real <= 1e-8


def test_projection_matches_conic_proximal_step(rng):
    n, d, beta = 6, 0.2, 0.05
    C = crandn(rng, n, n)
    C = C @ C.conj().T
    R0 = _feasible_fixed_diag(rng, n, d)
    P, _ = _project_fixed_diag(R0 + C / (2 * beta), d)
    Q = _prox_conic(C, R0, d, beta)
    assert np.allclose(P, Q, atol=1e-5)


def test_inner_max_beats_reference(scn):
    c = CMSC(1.0, 1.0, lfm_reference(2, 16, 1.0))
    R0 = np.outer(c.s0.s, c.s0.s.conj())
    st = GameState2(R0, scn.t0.copy())
    R = algo2_inner_max(scn, st, R0, 0.05, 1.0)
    assert relaxed_objective(scn, R, scn.t0, R0, 0.05) >= relaxed_objective(scn, R0, scn.t0, R0, 0.05)
    with pytest.raises(ModelError):
        algo2_inner_max(scn, st, R0, 0.05, 1.0, method="bogus")


@pytest.mark.parametrize("delta", [0.1, 1.0, 2.0])
def test_randomized_candidates_are_feasible(delta, rng):
    s0 = lfm_reference(2, 16, 3.0)
    c = CMSC(3.0, delta, s0)
    R = _feasible_fixed_diag(rng, 32, 3.0 / 32)
    cands = randomize_cm(R, s0, delta, 3.0, 40, seed=2)
    assert all(c.contains(w.s) for w in cands)
    again = randomize_cm(R, s0, delta, 3.0, 40, seed=2)
    assert all(np.array_equal(a.s, b.s) for a, b in zip(cands, again))


def test_relaxed_value_bounds_constant_modulus_codes(rng):
    scn = default_scenario(radius=0.5)
    value, _ = relaxed_game_value(scn, 1.0)
    for _ in range(30):
        s = np.exp(2j * np.pi * rng.uniform(size=32)) / np.sqrt(32)
        assert worst_case_tir(scn, s).value <= value + 1e-7


def test_cmsc_small_radius_converges():
    scn = default_scenario(radius=0.1)
    c = CMSC(1.0, 1.0, lfm_reference(2, 16, 1.0))
    res = design_cmsc(scn, c, Algo2Params(m_trials=20))
    assert res.converged
    assert res.trace[-1].gap <= 1e-3
    assert c.contains(res.s_opt.s)
    value, _ = relaxed_game_value(scn, 1.0)
    assert res.sinr_worst <= value + 1e-6


def test_cmsc_rejects_non_constant_modulus_reference(scn):
    s0 = lfm_reference(2, 16, 1.0)
    bad = type(s0)(s0.s * np.linspace(0.5, 1.5, 32), 2)
    with pytest.raises(ModelError):
        design_cmsc(scn, CMSC(1.0, 1.0, bad))


# ---------------------------------------------------------------- spectral compatibility

def test_minorizer_is_tight_below_bound(scn, rng):
    s_l = crandn(rng, 32)
    assert minorizer_value(scn, s_l, s_l) == pytest.approx(worst_case_tir(scn, s_l).value, rel=1e-8)
    for _ in range(10):
        s = s_l + 0.3 * crandn(rng, 32)
        assert minorizer_value(scn, s, s_l) <= worst_case_tir(scn, s).value + 1e-9


def _scsc(e_t, delta, e_i):
    return SCSC(e_t, delta, lfm_reference(2, 16, e_t), BANDS, e_i)


def test_mm_step_feasible_and_ascending():
    scn = default_scenario(radius=0.8)
    c = _scsc(100.0, 1.0, 1.0)
    s_floor, floor = feasible_init(scn, c)
    assert floor <= 1.0
    s1 = lift_toward_reference(c, s_floor.s)
    assert c.violation(s1) <= 1e-7
    s2 = mm_step(scn, c, s1)
    assert c.violation(s2.s) <= 1e-6
    assert minorizer_value(scn, s2, s1) >= worst_case_tir(scn, s1).value - 1e-6


def test_scsc_trace_monotone():
    scn = default_scenario(radius=0.8)
    res = design_scsc(scn, _scsc(100.0, 1.0, 1.0), Algo3Params(max_iter=5))
    obj = np.array([r.objective for r in res.trace])
    assert np.all(np.diff(obj) >= -1e-8)
    assert res.info["stopband_energy"] <= 1.0 + 1e-6


def test_scsc_infeasible_budget():
    scn = default_scenario(radius=0.8)
    with pytest.raises(InfeasibleError):
        design_scsc(scn, _scsc(100.0, 0.05, 1e-6), Algo3Params(max_iter=2))
