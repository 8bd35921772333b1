"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION <k> PASS|FAIL: <detail>`` line. Run with
``pytest tests/test_acceptance.py -v`` (or ``python tests/test_acceptance.py``).
"""

import sys
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from chainsim import experiments, fermion, oracle
from chainsim.chain import dipolar_couplings, nearest_neighbor_couplings

TOL_ORACLE = 1e-10
TOL_EXACT = 1e-12
TOL_PERFECT = 1e-9


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_criterion_01_oracle_equivalence(verdict):
    start = time.perf_counter()
    worst = {}
    for n in range(2, 9):
        errors = experiments.verify(n, t_max=20.0, n_points=100).summary["max_errors"]
        for key in ("P_xy", "P_dq", "J0", "J2", "Jc0", "Jc2"):
            worst[key] = max(worst.get(key, 0.0), errors[key])
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= TOL_ORACLE and elapsed < 60
    verdict(1, ok, f"max error {max(worst.values()):.2e} (tol {TOL_ORACLE:g}), {elapsed:.1f}s (< 60s)")


def test_criterion_02_conjugation_identity(verdict):
    nn_err = 0.0
    for n in range(2, 11):
        table = nearest_neighbor_couplings(n, 1.0)
        U = oracle.similarity_transform(n)
        mapped = oracle.conjugate(U, oracle.build_hamiltonian("dq", table)).matrix
        nn_err = max(nn_err, float(np.max(np.abs(mapped - oracle.build_hamiltonian("xy", table).matrix))))
    table = dipolar_couplings(6, 1.0, 3)
    U = oracle.similarity_transform(6)
    mapped = oracle.conjugate(U, oracle.build_hamiltonian("dq", table)).matrix
    lr_err = float(np.max(np.abs(mapped - oracle.build_hamiltonian("xy", table).matrix)))
    ok = nn_err < TOL_EXACT and lr_err >= 1e-3
    verdict(2, ok, f"NN N<=10 residual {nn_err:.1e} (< 1e-12); power-law N=6 residual {lr_err:.3f} (>= 1e-3)")


def test_criterion_03_parity_relation(verdict):
    t = np.linspace(0, 20, 200)
    worst = 0.0
    for n in (6, 7):
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                xy = fermion.polarization_xy(a, b, n, 1.0, t)
                dq = fermion.polarization_dq(a, b, n, 1.0, t)
                worst = max(worst, float(np.max(np.abs(np.abs(dq) - xy))))
                if (b - a) % 2 == 0:
                    worst = max(worst, float(np.max(np.abs(dq - xy))))
    verdict(3, worst < TOL_EXACT, f"max parity residual {worst:.1e} (< 1e-12)")


def _refined_max(n, b, t_max=40.0, points=40001):
    t = np.linspace(0, t_max, points)
    p = fermion.polarization_xy(1, b, n, 1.0, t)
    i = int(np.argmax(p))
    step = t[1] - t[0]
    res = minimize_scalar(lambda x: -fermion.polarization_xy(1, b, n, 1.0, x),
                          bounds=(max(t[i] - step, 0), t[i] + step), method="bounded",
                          options={"xatol": 1e-12})
    return max(-res.fun, p[i]), res.x


def test_criterion_04_perfect_transfer(verdict):
    p2, t2 = _refined_max(2, 2, t_max=np.pi)
    p3, t3 = _refined_max(3, 3, t_max=2 * np.pi / np.sqrt(2))
    ok = abs(p2 - 1) <= TOL_PERFECT and abs(t2 - np.pi / 2) < 1e-4
    ok &= abs(p3 - 1) <= TOL_PERFECT and abs(t3 - np.pi / np.sqrt(2)) < 1e-4
    longer = {n: float(fermion.polarization_xy(1, n, n, 1.0, np.linspace(0, 40, 40001)).max()) for n in range(4, 9)}
    ok &= all(v < 0.999 for v in longer.values())
    shown = ", ".join(f"N={n}: {v:.4f}" for n, v in longer.items())
    verdict(4, ok, f"N=2 max {p2:.12f} at {t2:.6f}; N=3 max {p3:.12f} at {t3:.6f}; d*t in [0,40]: {shown} (< 0.999)")


def test_criterion_05_sum_rule(verdict):
    t = np.concatenate([[0.0], np.sort(np.random.default_rng(7).uniform(0, 200, 499))])
    worst, start_err = 0.0, 0.0
    for n in (2, 3, 5, 8, 13, 21, 34):
        for a in range(1, n + 1):
            for j0, j2 in (fermion.mqc_intensities(a, n, 1.0, t), fermion.mqc_intensities_collective(a, n, 1.0, t)):
                worst = max(worst, float(np.max(np.abs(j0 + 2 * j2 - 1))))
                start_err = max(start_err, abs(j0[0] - 1), abs(j2[0]))
    ok = worst <= TOL_EXACT and start_err <= TOL_EXACT
    verdict(5, ok, f"max |J0+2J2-1| {worst:.1e}; t=0 deviation {start_err:.1e} (tol 1e-12)")


def test_criterion_06_coherence_support(verdict):
    t = np.linspace(0.5, 20, 12)
    dq = oracle.build_hamiltonian("dq", nearest_neighbor_couplings(8, 1.0))
    nn_orders = oracle.mqc_protocol(oracle.sigma_z(8, 1), dq, t, max_order=8)
    nn_leak = max(float(np.max(np.abs(v))) for q, v in nn_orders.items() if abs(q) not in (0, 2))
    lr = oracle.build_hamiltonian("dq", dipolar_couplings(6, 1.0, 3))
    lr_orders = oracle.mqc_protocol(oracle.sigma_z(6, 1), lr, t)
    lr_four = max(float(np.max(np.abs(lr_orders[q]))) for q in (-4, 4))
    xy = oracle.build_hamiltonian("xy", nearest_neighbor_couplings(8, 1.0))
    xy_orders = oracle.mqc_protocol(oracle.sigma_z(8, 1), xy, t, max_order=8)
    xy_leak = max(float(np.max(np.abs(v))) for q, v in xy_orders.items() if q)
    ok = nn_leak < TOL_EXACT and lr_four > 1e-6 and xy_leak < TOL_EXACT
    verdict(6, ok, f"NN DQ |q| not in {{0,2}}: {nn_leak:.1e}; power-law |q|=4: {lr_four:.2e}; XY q!=0: {xy_leak:.1e}")


def test_criterion_07_figure1(verdict):
    fig = experiments.figure1_transfer(21).summary
    inset = experiments.figure1_inset_parity(20, 21).summary
    ok = fig["max_abs_difference"] < TOL_EXACT
    ok &= inset["first_extremum_sign_even"] == -1 and inset["first_extremum_sign_odd"] == 1
    verdict(7, ok, f"N=21 max |P_xy-P_dq| {fig['max_abs_difference']:.1e}; inset signs "
                   f"even {inset['first_extremum_sign_even']:+d}, odd {inset['first_extremum_sign_odd']:+d}")


def test_criterion_08_figure2(verdict):
    s = experiments.figure2_mqc(21).summary
    ok = bool(s["period_halved"]) and bool(s["beats_align_with_transfer"])
    offsets = ", ".join(f"{o:.2f}" for o in s["alignment_offsets"])
    verdict(8, ok, f"beat period {s['beat_period']:.3f} vs single-end/2 {s['beat_period_single'] / 2:.3f} "
                   f"(mismatch {s['period_mismatch']:.3f}, grid step {s['grid_step']:.3f}); "
                   f"every-second-beat offsets to P_1N maxima [{offsets}]")


def test_criterion_09_spectrum(verdict):
    eps21 = np.sort(fermion.spectrum("xy", 21).eigenfrequencies)
    expected = np.sort(2 * np.cos(np.pi * np.arange(1, 22) / 22))
    closed = float(np.max(np.abs(eps21 - expected)))
    one_exc = 0.0
    for n in range(2, 11):
        H = oracle.build_hamiltonian("xy", nearest_neighbor_couplings(n, 1.0))
        one_exc = max(one_exc, float(np.max(np.abs(
            np.sort(oracle.one_excitation_energies(H)) - np.sort(fermion.spectrum("xy", n).eigenfrequencies)))))
    full = 0.0
    for n in range(2, 9):
        table = nearest_neighbor_couplings(n, 1.0)
        e_xy = oracle.build_hamiltonian("xy", table).propagator.eigenvalues()
        e_dq = oracle.build_hamiltonian("dq", table).propagator.eigenvalues()
        full = max(full, float(np.max(np.abs(e_xy - e_dq))))
    ok = closed < TOL_ORACLE and one_exc < TOL_ORACLE and full < TOL_ORACLE
    verdict(9, ok, f"N=21 vs 2cos(pi n/22) {closed:.1e}; one-excitation N<=10 {one_exc:.1e}; XY vs DQ N<=8 {full:.1e}")


def test_criterion_10_performance(verdict):
    t = np.linspace(0, 40, 2000)
    start = time.perf_counter()
    p = fermion.polarization_xy(1, 1000, 1000, 1.0, t)
    analytic = time.perf_counter() - start
    start = time.perf_counter()
    H = oracle.build_hamiltonian("dq", nearest_neighbor_couplings(12, 1.0))
    q = oracle.transfer_series(H, oracle.sigma_z(12, 1), 12, np.linspace(0, 20, 100))
    dense = time.perf_counter() - start
    ok = analytic < 10 and dense < 600 and np.all(np.isfinite(p)) and np.all(np.isfinite(q))
    verdict(10, ok, f"analytic N=1000 x 2000 points {analytic:.2f}s (< 10s); oracle N=12 x 100 points {dense:.1f}s (< 600s)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
