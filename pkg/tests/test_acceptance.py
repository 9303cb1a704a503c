"""Acceptance criteria, one printed PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py`` (add ``-m "not slow"`` to skip the
replica cross-check and the large-budget diagnostic). The lines are printed
in the terminal summary.
"""

import math
import time
import warnings

import numpy as np
import pytest

from conftest import (
    ACCEPTANCE_LINES,
    SWEEP_BUDGET,
    SWEEP_SEED,
    construct,
    exact_variance_gap,
    random_parameter_sets,
)
from mmqssa import lna
from mmqssa.deterministic import State2, eval_vf, integrate
from mmqssa.errors import AbsorbingStateWarning
from mmqssa.fenichel import factorization_for, projector_at
from mmqssa.model import SET_A, Parameters, derive, beta_sweep_parameters, fixed_point
from mmqssa.ssa import (
    CountState,
    build_full_network,
    build_reduced_network,
    ensemble_moments,
    simulate,
    stationary_moments,
)
from mmqssa.sweep import DEFAULT_BETAS, sweep_beta, sweep_csv

FAST_LIMIT = 1.0  # seconds, after JIT warm-up
SETS = random_parameter_sets(1000)


def report(name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def timed(fn):
    fn()  # warm-up (numba compilation, imports)
    start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - start


# criterion 1 ---------------------------------------------------------------


def test_criterion_1_closed_form_variance_equals_lyapunov():
    def run():
        return max(abs(lna.sigma2_full(p) - lna.lyapunov_cross_check(p)) / lna.sigma2_full(p) for p in SETS)

    worst, elapsed = timed(run)
    ok = worst <= 1e-10 and elapsed < FAST_LIMIT
    report("criterion 1 (closed-form vs Lyapunov, 1000 sets)", ok,
           f"max rel err {worst:.2e} (tol 1e-10), {elapsed:.3f} s")  # fmt: skip
    assert worst <= 1e-10
    assert elapsed < FAST_LIMIT


# criterion 2 ---------------------------------------------------------------


def test_criterion_2_discrepancy_identity():
    # the variance-gap side cancels digits in floating point, so it is evaluated exactly
    exact = [float(exact_variance_gap(p)) for p in SETS]

    def run():
        return max(abs(lna.discrepancy(p) - e) / e for p, e in zip(SETS, exact))

    worst, elapsed = timed(run)
    ok = worst <= 1e-12 and elapsed < FAST_LIMIT
    report("criterion 2 (discrepancy identity, 1000 sets)", ok, f"max rel err {worst:.2e} (tol 1e-12), {elapsed:.3f} s")
    assert worst <= 1e-12
    assert elapsed < FAST_LIMIT


# criterion 3 ---------------------------------------------------------------


def sweep_checks(points, k_se: float, abs_floor: bool) -> tuple[dict[str, bool], list[str]]:
    """Sub-checks (a)-(d) with ``k_se`` standard errors.

    With ``abs_floor`` the stated absolute tolerances are widened to
    ``max(stated, k_se*SE)``.
    """
    res = {"a": True, "b": True, "c": True, "d": True}
    notes = []
    for pt in points:
        mean_tol = 0.02 * 1000
        if abs_floor:
            mean_tol = max(mean_tol, k_se * pt.full.se_mean)
        if abs(pt.full.mean - 1000) > mean_tol:
            res["a"] = False
            notes.append(f"(a) beta={pt.beta:g}: mean {pt.full.mean:.1f}")
        if abs(pt.full.variance - pt.sigma2_full_lna) > k_se * pt.full.se_variance:
            res["b"] = False
            notes.append(
                f"(b) beta={pt.beta:g}: var {pt.full.variance:.0f} vs {pt.sigma2_full_lna:.0f}, "
                f"{abs(pt.full.variance - pt.sigma2_full_lna) / pt.full.se_variance:.1f} SE"
            )
        if abs(pt.reduced.variance - pt.sigma2_red_lna) > k_se * pt.reduced.se_variance:
            res["c"] = False
            notes.append(f"(c) beta={pt.beta:g}: var {pt.reduced.variance:.0f} vs 2000")
    by_beta = {pt.beta: pt for pt in points}
    hi, lo = by_beta[100.0], by_beta[0.01]
    tol_hi = max(0.03, k_se * hi.ssa_discrepancy_se) if abs_floor else 0.03
    tol_lo = max(0.01, k_se * lo.ssa_discrepancy_se) if abs_floor else 0.01
    if abs(hi.ssa_discrepancy - 0.33) > tol_hi:
        res["d"] = False
    if lo.ssa_discrepancy > tol_lo:
        res["d"] = False
    notes.append(
        f"(d) beta=100: {hi.ssa_discrepancy:.3f}+-{hi.ssa_discrepancy_se:.3f} (want 0.33+-{tol_hi:.2g}); "
        f"beta=0.01: {lo.ssa_discrepancy:.3f}+-{lo.ssa_discrepancy_se:.3f} (want <= {tol_lo:.2g})"
    )
    return res, notes


def test_criterion_3_beta_sweep(beta_sweep):
    res, notes = sweep_checks(beta_sweep, k_se=3.0, abs_floor=False)
    ok = all(res.values())
    summary = " ".join(f"({k}) {'ok' if v else 'FAIL'}" for k, v in res.items())
    report(f"criterion 3 (beta sweep, {SWEEP_BUDGET:.0e} events/point/network, seed {SWEEP_SEED})", ok,
           summary + "; " + "; ".join(notes))  # fmt: skip
    assert ok, "; ".join(notes)


@pytest.mark.slow
def test_criterion_3_replica_cross_check():
    points = sweep_beta(DEFAULT_BETAS, seed=SWEEP_SEED, replicas=1000)
    res, notes = sweep_checks(points, k_se=5.0, abs_floor=True)
    ok = all(res.values())
    summary = " ".join(f"({k}) {'ok' if v else 'FAIL'}" for k, v in res.items())
    report("criterion 3 replica cross-check (1000 replicas, 5 SE)", ok, summary + "; " + "; ".join(notes))
    assert ok, "; ".join(notes)


@pytest.mark.slow
def test_criterion_3_diagnostic_small_beta_at_larger_budget():
    """Not a criterion: beta = 0.01 with 100x the budget, to show the 10^7 failure is budget-bound."""
    p = beta_sweep_parameters(0.01)
    full = stationary_moments(build_full_network(p), 10**9, SWEEP_SEED, stream=(0, 0))
    red = stationary_moments(build_reduced_network(p), 10**9, SWEEP_SEED, stream=(0, 1))
    target = lna.sigma2_full(p)
    z = abs(full.variance - target) / full.se_variance
    d = (red.variance - full.variance) / full.variance
    d_se = math.hypot(red.se_variance / full.variance, red.variance * full.se_variance / full.variance**2)
    ACCEPTANCE_LINES.append(
        f"[INFO] criterion 3 diagnostic (beta=0.01, 1e9 events): full var {full.variance:.0f}+-{full.se_variance:.0f} "
        f"vs {target:.0f} ({z:.1f} SE); discrepancy {d:.3f}+-{d_se:.3f}"
    )
    assert z <= 3
    assert d_se < 0.1


# criterion 4 ---------------------------------------------------------------


def substrate_grid(K: float) -> np.ndarray:
    return np.concatenate([[0.0], K * np.logspace(-3, 2, 19)])


def projector_identities_hold(fact, z, data) -> bool:
    pi = data.pi_matrix
    P, Df = fact.P_eval(z), fact.Df_eval(z)
    scale = max(1.0, np.abs(pi).max())
    return bool(
        np.abs(pi @ pi - pi).max() <= 1e-12 * scale
        and np.abs(pi @ P).max() <= 1e-12 * scale * np.abs(P).max()
        and np.abs(Df @ pi).max() <= 1e-12 * scale * np.abs(Df).max()
        and np.linalg.matrix_rank(pi) == 1
    )


def test_criterion_4_projection_gives_sqssa():
    def run():
        worst, identities = 0.0, True
        for p in SETS[:100]:
            fact = factorization_for("pi1", p)
            d = derive(p)
            for s in substrate_grid(d.K_M):
                z = np.array([s, 0.0])
                data = projector_at(fact, z)
                red = data.pi_matrix @ fact.G_eval(z)
                consumption = d.v * s / (d.K_M + s)
                target = p.k0 - consumption
                worst = max(worst, abs(red[0] - target) / (abs(p.k0) + consumption), abs(red[1]) / (abs(p.k0) + consumption))
                identities &= projector_identities_hold(fact, z, data)
        return worst, identities

    (worst, identities), elapsed = timed(run)
    ok = worst <= 1e-10 and identities and elapsed < FAST_LIMIT
    report("criterion 4 (pi1 projection = sQSSA, 20 x 100)", ok,
           f"max rel err {worst:.2e} (tol 1e-10), projector identities {'hold' if identities else 'FAIL'}, "
           f"{elapsed:.3f} s")  # fmt: skip
    assert worst <= 1e-10 and identities
    assert elapsed < FAST_LIMIT


# criterion 5 ---------------------------------------------------------------


def qea_decade(n: int) -> Parameters:
    """eps_ss = 0.01 * 10^-n and beta = 10^-n at alpha = 1/2, K_S = 500."""
    eps, beta, K_S = 0.01 * 10.0**-n, 10.0**-n, 500.0
    k2 = beta * K_S
    e_T = eps * (K_S + k2)
    return Parameters(k0=0.5 * k2 * e_T, e_T=e_T, k1=1.0, k2=k2, k_m1=K_S)


def qea_special_gap(p: Parameters) -> float:
    K_S = derive(p).K_S
    worst = 0.0
    for s in np.linspace(0, 10 * K_S, 201):
        qea = eval_vf("qea", State2(s, 0), p).s
        special = eval_vf("qea_special", State2(s, 0), p).s
        if special != 0:
            worst = max(worst, abs(qea - special) / abs(special))
    return worst


def test_criterion_5_projection_gives_qea():
    def run():
        worst_proj, worst_chain = 0.0, 0.0
        for p in SETS[:100]:
            fact = factorization_for("pi3", p)
            d = derive(p)
            for s in substrate_grid(d.K_M):
                z = fact.chart(s)
                red = projector_at(fact, z).pi_matrix @ fact.G_eval(z)
                q = p.k_m1 + p.k1 * s
                consumption = p.k2 * p.k1 * p.e_T * s / q
                norm = abs(p.k0) + consumption
                qea = (p.k0 - consumption) / (1 + p.k1 * p.k_m1 * p.e_T / q**2)
                worst_proj = max(worst_proj, abs(red[0] - qea) / norm)
                chain = (p.k0 - p.k1 * d.v * s / q) / (p.k1 * p.k_m1 * p.e_T / q**2 + 1)
                worst_chain = max(worst_chain, abs(eval_vf("qea", State2(s, 0), p).s - chain) / norm)
        gaps = [qea_special_gap(qea_decade(n)) for n in (1, 2, 3)]
        return worst_proj, worst_chain, gaps

    (worst_proj, worst_chain, gaps), elapsed = timed(run)
    ratios = [a / b for a, b in zip(gaps, gaps[1:])]
    proportional = all(abs(r - 10) <= 1.0 for r in ratios)
    ok = worst_proj <= 1e-10 and worst_chain <= 1e-12 and proportional and elapsed < FAST_LIMIT
    report("criterion 5 (pi3 projection = QEA)", ok,
           f"projection {worst_proj:.2e} (tol 1e-10), rewriting chain {worst_chain:.2e} (tol 1e-12), "
           f"special-case gaps {', '.join(f'{g:.2e}' for g in gaps)} (ratios {', '.join(f'{r:.2f}' for r in ratios)}), "
           f"{elapsed:.3f} s")  # fmt: skip
    assert worst_proj <= 1e-10 and worst_chain <= 1e-12 and proportional
    assert elapsed < FAST_LIMIT


# criterion 6 ---------------------------------------------------------------


def test_criterion_6_deterministic_tracking():
    p = construct(0.1, 0.01, 1.0)
    d = derive(p)
    gamma = fixed_point(p).gamma
    step = d.t_C / 10
    t_end = 10 / (d.v / d.K_M)  # ten linear relaxation times of the reduced flow

    def run():
        full = integrate("full_mass_action", State2(0, 0), t_end, step, p)
        red = integrate("sqssa", State2(0, 0), t_end, step, p)
        late = full.times > 10 * d.t_C
        return float(np.max(np.abs(full.s[late] - red.s[late])) / gamma)

    worst, elapsed = timed(run)
    ok = worst < 5 * d.eps_ss and elapsed < FAST_LIMIT
    report("criterion 6 (full vs sQSSA tracking, eps_ss=0.01, alpha=0.1)", ok,
           f"max |s_full - s_sqssa|/gamma = {worst:.2e} (tol {5 * d.eps_ss:g}), {elapsed:.3f} s")  # fmt: skip
    assert worst < 5 * d.eps_ss
    assert elapsed < FAST_LIMIT


# criterion 7 ---------------------------------------------------------------


def test_criterion_7_structure_and_reproducibility():
    net = build_full_network(SET_A)
    traj = simulate(net, CountState(0, 0, 0, 10), math.inf, seed=7, max_events=10**6)
    n_c = traj.counts[:, 1]
    free = net.E_T - n_c
    conserved = bool(traj.events == 10**6 and n_c.min() >= 0 and free.min() >= 0 and np.all(n_c + free == net.E_T))
    stoichiometric = bool(np.array_equal(np.diff(traj.counts, axis=0), net.changes[traj.channels]))

    rerun = simulate(net, CountState(0, 0, 0, 10), math.inf, seed=7, max_events=10**6)
    same_run = traj.to_csv() == rerun.to_csv()
    kw = dict(budget=5 * 10**5, seed=SWEEP_SEED)
    same_workers = sweep_csv(sweep_beta([1.0, 10.0], workers=1, **kw)) == sweep_csv(
        sweep_beta([1.0, 10.0], workers=2, **kw)
    )
    reduced = build_reduced_network(SET_A)
    same_replicas = (
        ensemble_moments(reduced, 64, seed=3, burn_in=2.0, workers=1).to_json()
        == ensemble_moments(reduced, 64, seed=3, burn_in=2.0, workers=4).to_json()
    )

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        closed = build_full_network(SET_A.replace(k0=0.0))
        empty = simulate(closed, CountState(0, 0, 0, 10), 1.0, seed=0)
    absorbing = empty.absorbed_at == 0.0 and any(issubclass(w.category, AbsorbingStateWarning) for w in caught)

    checks = dict(
        conservation=conserved and stoichiometric,
        rerun=same_run,
        workers=same_workers and same_replicas,
        absorbing=absorbing,
    )
    ok = all(checks.values())
    report("criterion 7 (structure and reproducibility)", ok,
           ", ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in checks.items()))  # fmt: skip
    assert ok, checks


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
