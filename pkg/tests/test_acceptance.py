"""Acceptance suite: one PASS/FAIL line per criterion, printed as each test runs.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python3 tests/test_acceptance.py``.
The lines are also repeated in the pytest terminal summary.
"""
import json
import math
import time

import numpy as np
import pytest

from steerlab.canonical import canonicalize
from steerlab.cli import main as cli_main
from steerlab.convex import strengthen, verify_decomposition
from steerlab.criterion import AXIAL, CERTIFIED, eig_form_value, evaluate_criterion, steered_state
from steerlab.family import (
    ansatz_canonical,
    ansatz_chi,
    extremum_guard,
    family_canonical,
    family_state,
    horodecki_chsh,
    is_entangled,
    povm_chsh_threshold,
    unsteerable_ab_condition,
)
from steerlab.jm import DichotomicQubitPOVM, UnsharpFamily, assemblage_eigs, jm_family_sampler, jm_sufficient
from steerlab.lhs import analytic_lhs_steered, convergence_slope, simulate_assemblage
from steerlab.qubit import PauliForm, pauli_compose, trace_distance, werner

from conftest import certified_states, random_direction

RESULTS = []
AXES = np.array([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)], dtype=float)


def record(n, name, ok, detail, elapsed, limit=None):
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
    within = limit is None or elapsed < limit
    line = f"{'PASS' if ok and within else 'FAIL'} criterion {n:>2}: {name}: {detail}; {timing}"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert within, line


def test_01_werner_boundary():
    t0 = time.perf_counter()
    rep = evaluate_criterion(canonicalize(family_state(0.5, math.pi / 4)).canonical)
    dt = time.perf_counter() - t0
    ok = abs(rep.max_value - 1.0) <= 1e-9 and rep.method == AXIAL and rep.verdict == CERTIFIED
    record(1, "Werner boundary", ok,
           f"max={rep.max_value:.12f} method={rep.method} verdict={rep.verdict}", dt, 1.0)


def test_02_family_boundary_equivalence():
    t0 = time.perf_counter()
    ps = np.linspace(0.0, 1.0, 50)
    chis = (math.pi / 4) * np.arange(1, 51) / 50
    disagree, banded = [], 0
    for p in ps:
        for chi in chis:
            rep = evaluate_criterion(canonicalize(family_state(p, chi)).canonical, grid_n=20000)
            if abs(rep.max_value - 1.0) < 1e-6:
                banded += 1
                continue
            if (rep.verdict == CERTIFIED) != unsteerable_ab_condition(p, chi):
                disagree.append((float(p), float(chi), rep.max_value))
    dt = time.perf_counter() - t0
    record(2, "family boundary equivalence", not disagree,
           f"2500 cells, {banded} in band, {len(disagree)} disagreements", dt, 120.0)


def test_03_boundary_identities():
    t0 = time.perf_counter()
    worst_sum, worst_tx, guard_min = 0.0, 0.0, math.inf
    for p in np.linspace(0.5, 0.99, 50):
        if p == 0.5:
            # chi collapses to pi/4 here; the ansatz closed form still applies
            state = ansatz_canonical(p)
        else:
            chi = ansatz_chi(p)
            state = family_canonical(p, chi)
            guard_min = min(guard_min, extremum_guard(p))
        worst_sum = max(worst_sum, abs(state.a[2] ** 2 + 2 * abs(state.t[2]) - 1.0))
        worst_tx = max(worst_tx, abs(2 * abs(state.t[0]) - 2 * (1 - p)))
    dt = time.perf_counter() - t0
    ok = worst_sum <= 1e-9 and worst_tx <= 1e-9 and guard_min > 0
    record(3, "boundary identities", ok,
           f"max|a_z^2+2|T_z|-1|={worst_sum:.2e} max|2|T_x|-2(1-p)|={worst_tx:.2e} min guard={guard_min:.3e}",
           dt, 1.0)


def test_04_lhs_exactness():
    rng = np.random.default_rng(4)
    states = certified_states(rng, 100)
    t0 = time.perf_counter()
    worst = 0.0
    for state in states:
        for x in random_direction(rng, 20):
            worst = max(worst, trace_distance(analytic_lhs_steered(state, x), steered_state(state, x)))
    dt = time.perf_counter() - t0
    record(4, "LHS exactness", worst <= 1e-10, f"max trace distance {worst:.2e} over 2000 pairs", dt, 10.0)


def test_05_lhs_monte_carlo():
    t0 = time.perf_counter()
    state = canonicalize(family_state(0.5, math.pi / 4)).canonical
    rep = simulate_assemblage(state, AXES, 10 ** 6, seed=0)
    worst = rep.max_empirical()
    sizes = sorted({10 ** 4 * 2 ** k for k in range(7)} | {10 ** 5, 10 ** 6})
    slope, _ = convergence_slope(state, AXES, sizes, seed=0, replicates=8)
    dt = time.perf_counter() - t0
    ok = worst <= 5e-3 and abs(slope + 0.5) <= 0.1
    record(5, "LHS Monte Carlo", ok, f"max empirical distance {worst:.2e} at N=1e6, slope {slope:.3f}", dt, 30.0)


def test_06_povm_threshold(capsys):
    t0 = time.perf_counter()
    p_star = povm_chsh_threshold()
    code = cli_main(["threshold"])
    out = capsys.readouterr().out
    dt = time.perf_counter() - t0
    cli_p = float(json.loads(out)["p_star"])
    ok = code == 0 and abs(cli_p - 0.83353) <= 5e-5 and cli_p == p_star
    record(6, "POVM one-way threshold", ok, f"p*={cli_p:.7f}", dt, 5.0)


def test_07_chsh_facts():
    t0 = time.perf_counter()
    ps = np.linspace(0.0, 1.0, 20)
    worst = max(abs(horodecki_chsh(werner(p)) - 2 * p * p) for p in ps)
    lo, hi = 0.5, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if horodecki_chsh(werner(mid)) > 1.0 else (mid, hi)
    crossing = 0.5 * (lo + hi)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and abs(crossing - 1 / math.sqrt(2)) <= 1e-9
    record(7, "CHSH facts", ok, f"max|M-2p^2|={worst:.2e} crossing={crossing:.12f}", dt)


def test_08_joint_measurability():
    t0 = time.perf_counter()
    etas = np.linspace(0.0, 1.0, 41)
    wrong = [e for e in etas if jm_family_sampler(UnsharpFamily(e), 500).certified != (e <= 0.5)]
    rng = np.random.default_rng(8)
    mismatches, worst_identity = 0, 0.0
    for _ in range(10 ** 4):
        n = rng.uniform(0, 1)
        k = rng.uniform(n, 2 - n)
        povm = DichotomicQubitPOVM(k, n * random_direction(rng))
        lhs_value = eig_form_value(assemblage_eigs(povm))
        mismatches += jm_sufficient(povm, tol=0.0) != (lhs_value <= 0.0)
        worst_identity = max(worst_identity, abs(lhs_value - (k * (k - 2) + 2 * povm.m_norm) / 4))
    dt = time.perf_counter() - t0
    ok = not wrong and mismatches == 0 and worst_identity <= 1e-14
    record(8, "joint measurability", ok,
           f"unsharp misclassified={len(wrong)}/41, bridge mismatches={mismatches}/10000, "
           f"identity residual {worst_identity:.1e}", dt)


def test_09_convex_strengthening():
    rho = pauli_compose(PauliForm(np.zeros(3), np.zeros(3), np.diag([0.25, -0.25, 0.75])))
    direct = evaluate_criterion(canonicalize(rho).canonical)
    t0 = time.perf_counter()
    found = verified = 0
    for seed in range(100):
        dec = strengthen(rho, budget=10 ** 4, seed=seed)
        if dec is None:
            continue
        found += 1
        verified += verify_decomposition(rho, dec).ok
    dt = time.perf_counter() - t0
    ok = abs(direct.max_value - 1.5) <= 1e-9 and found >= 99 and verified == found
    record(9, "convex strengthening regression", ok,
           f"direct max={direct.max_value:.6f}, found {found}/100, re-verified {verified}/{found}", dt, 60.0)


def test_10_entanglement_boundary():
    t0 = time.perf_counter()
    worst = 0.0
    for chi in np.linspace(0.05, math.pi / 4, 10):
        lo, hi = 0.0, 1.0
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if is_entangled(family_state(mid, chi), tol=0.0) else (mid, hi)
        worst = max(worst, abs(0.5 * (lo + hi) - 1 / 3))
    dt = time.perf_counter() - t0
    record(10, "entanglement boundary", worst <= 1e-8, f"max|p_flip-1/3|={worst:.2e} over 10 chi", dt)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
