"""Acceptance gate: one test per shipping criterion, at the stated tolerance.

Each test prints a single pass/fail line (visible with -s; pytest -v shows
the same verdict per test either way) and then asserts.
"""

import itertools
import json
import time

import numpy as np

from snaq import cli, variational
from snaq.circuit import (
    Gate,
    expand_multicontrolled,
    gate_count,
    plaquette_exponential_error,
    step_exponential_error,
    tadpole_conjugation_error,
    trotter_step_second_order,
)
from snaq.qalgebra import classical_6j, racah_q6j, verify_identities
from snaq.spinnet import (
    EmptyBasisError,
    build_hamiltonian,
    diagonalize,
    enumerate_basis,
    hexagon_network,
    mathieu_oracle,
    single_plaquette_network,
)


def _report(num: int, title: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"[criterion {num:02d}] {status}  {title}: {detail}")
    assert passed, f"criterion {num} ({title}): {detail}"


def _random_outer(k, rng):
    while True:
        outer = tuple(int(x) for x in rng.integers(0, k + 1, size=6))
        try:
            enumerate_basis(hexagon_network(outer), k)
        except EmptyBasisError:
            continue
        return outer


def test_criterion_01_identity_suite():
    worst_core = 0.0
    worst_exact = 0.0
    for k in (1, 2, 3, 4):
        report = verify_identities(k)
        by_name = {c.name: c.max_residual for c in report.checks}
        worst_core = max(worst_core, by_name["pentagon"], by_name["orthogonality"])
        worst_exact = max(
            worst_exact,
            by_name["mirror-symmetry"],
            by_name["weighted-symmetry"],
            by_name["normalization"],
        )
    passed = worst_core < 1e-10 and worst_exact < 1e-12
    _report(
        1,
        "identity suite",
        passed,
        f"pentagon/orthogonality {worst_core:.2e} (< 1e-10), "
        f"symmetry/normalization {worst_exact:.2e} (< 1e-12), k <= 4",
    )


def test_criterion_02_classical_limit():
    labels = list(itertools.product(range(5), repeat=6))
    deviations = []
    for k in (50, 100, 200, 400):
        worst = 0.0
        for tup in labels:
            worst = max(worst, abs(racah_q6j(*tup, k) - classical_6j(*tup)))
        deviations.append(worst)
    monotone = all(a > b for a, b in zip(deviations, deviations[1:]))
    passed = monotone and deviations[-1] < 1e-3
    _report(
        2,
        "classical limit",
        passed,
        f"deviations {['%.2e' % d for d in deviations]} over k in (50,100,200,400), "
        f"monotone={monotone}, final < 1e-3",
    )


def _distribution(g2, k, n, pad):
    basis = enumerate_basis(single_plaquette_network(), k)
    _, vecs = diagonalize(build_hamiltonian(basis, g2), n_states=n + 1)
    out = np.zeros(pad)
    out[: k + 1] = vecs[:, n] ** 2
    return out


def test_criterion_03_truncation_convergence():
    g2 = 0.1
    oracles = [mathieu_oracle(g2, n, 50) ** 2 for n in range(4)]
    ground_err = float(np.max(np.abs(_distribution(g2, 30, 0, 101) - oracles[0])))
    thresholds = []
    for n in range(4):
        found = None
        for k in range(max(n, 1), 61):
            if np.max(np.abs(_distribution(g2, k, n, 101) - oracles[n])) < 1e-6:
                found = k
                break
        thresholds.append(found)
    increasing = None not in thresholds and all(
        a < b for a, b in zip(thresholds, thresholds[1:])
    )
    passed = ground_err < 1e-6 and increasing
    _report(
        3,
        "truncation convergence",
        passed,
        f"k=30 ground-state error {ground_err:.2e} (< 1e-6), "
        f"convergence thresholds {thresholds} strictly increasing",
    )


def test_criterion_04_plaquette_exact_values():
    basis = enumerate_basis(single_plaquette_network(), 1)
    w, _ = diagonalize(build_hamiltonian(basis, 1.0), n_states=2)
    spectrum_err = max(abs(w[0] + 1.0), abs(w[1] - 4.0))
    g2 = 0.7
    path_err = 0.0
    for k in range(1, 7):
        basis = enumerate_basis(single_plaquette_network(), k)
        ham = build_hamiltonian(basis, g2).matrix.toarray()
        t = np.arange(k + 1, dtype=float)
        direct = np.diag(t * (t + 2.0))
        off = np.full(k, -2.0 / g2**2)
        direct += np.diag(off, 1) + np.diag(off, -1)
        path_err = max(path_err, float(np.max(np.abs(ham - direct))))
    passed = spectrum_err < 1e-12 and path_err < 1e-12
    _report(
        4,
        "plaquette exact values",
        passed,
        f"k=1 spectrum error {spectrum_err:.2e}, six-F vs tridiagonal "
        f"{path_err:.2e} for k <= 6 (both < 1e-12)",
    )


def test_criterion_05_energy_oracle():
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst = 0.0
    for k in (1, 2):
        for _ in range(20):
            psi = rng.normal(size=k + 1)
            psi /= np.linalg.norm(psi)
            g2 = float(10.0 ** rng.uniform(-1, 1))
            worst = max(
                worst,
                abs(
                    variational.mean_energy(psi, g2, k)
                    - variational.brute_force_energy(psi, g2, k)
                ),
            )
    elapsed = time.perf_counter() - start
    passed = worst < 1e-10 and elapsed < 60.0
    _report(
        5,
        "energy oracle equivalence",
        passed,
        f"max |analytic - brute force| {worst:.2e} (< 1e-10), "
        f"2x2 torus, k in (1,2), 20 states each, {elapsed:.1f}s (< 60s)",
    )


def test_criterion_06_critical_coupling_law():
    ks = list(range(1, 17))
    criticals = []
    for k in ks:
        scan = variational.phase_scan(k, seed=0)
        assert scan.g2_critical is not None, f"no transition detected at k={k}"
        criticals.append(scan.g2_critical)
    decreasing = all(a > b for a, b in zip(criticals, criticals[1:]))
    fit = variational.fit_critical_law(ks, criticals)
    passed = decreasing and 3.9 <= fit.g0 <= 4.9 and 1.8 <= fit.k0 <= 3.2
    _report(
        6,
        "critical coupling law",
        passed,
        f"g0 = {fit.g0:.4f} in [3.9, 4.9], k0 = {fit.k0:.4f} in [1.8, 3.2], "
        f"g2_c strictly decreasing over k = 1..16: {decreasing}",
    )


def test_criterion_07_reference_comparison(tmp_path, capsys):
    ks = np.arange(1, 17)
    fit = variational.fit_critical_law(ks, (4.4 / (ks + 2.5)) ** 2)
    recovery = max(abs(fit.g0 - 4.4), abs(fit.k0 - 2.5))

    scan = variational.phase_scan(16, seed=0)
    scan_path = tmp_path / "scan.csv"
    scan_path.write_text(cli._scan_csv(scan))
    ref_path = tmp_path / "reference.csv"
    lines = ["beta_or_g2,plaquette,error"]
    for g2, plaquette in zip(scan.g2_values, scan.plaquettes):
        lines.append(f"{g2:.15g},{plaquette:.15g},0")
    ref_path.write_text("\n".join(lines) + "\n")
    code = cli.main(
        ["compare-mc", "--scan", str(scan_path), "--reference", str(ref_path)]
    )
    out = capsys.readouterr().out
    rows = [line.split(",") for line in out.splitlines()[2:]]
    round_trip = max(abs(float(r[5])) for r in rows)
    monotone = bool(np.all(np.diff(scan.plaquettes) <= 1e-10))
    passed = recovery < 1e-9 and code == 0 and round_trip == 0.0 and monotone
    _report(
        7,
        "reference comparison",
        passed,
        f"synthetic fit recovery {recovery:.1e} (< 1e-9), round-trip diff "
        f"{round_trip:.1e} (exact), <U> non-increasing at k=16: {monotone}",
    )


def test_criterion_08_circuit_exactness():
    rng = np.random.default_rng(5)
    worst = 0.0
    for k in (1, 2, 3):
        for _ in range(5):
            outer = _random_outer(k, rng)
            for tau in (0.1, 1.0, 3.0):
                worst = max(worst, plaquette_exponential_error(k, tau, 1.0, outer))
    passed = worst < 1e-8
    _report(
        8,
        "circuit exactness",
        passed,
        f"max |compiled factor - dense exponential| {worst:.2e} (< 1e-8), "
        "k in (1,2,3), 5 random outer sets, tau in (0.1,1.0,3.0)",
    )


def test_criterion_09_plaquette_diagonalization():
    rng = np.random.default_rng(13)
    worst = 0.0
    for k in (1, 2, 3):
        for _ in range(2):
            outer = _random_outer(k, rng)
            block_err, leakage = tadpole_conjugation_error(k, outer)
            worst = max(worst, block_err, leakage)
    passed = worst < 1e-10
    _report(
        9,
        "plaquette diagonalization",
        passed,
        f"five-move conjugation vs half-flux blocks {worst:.2e} (< 1e-10), k <= 3",
    )


def test_criterion_10_trotter_order():
    errs = [step_exponential_error(1, tau, 1.0, (0,) * 6) for tau in (0.2, 0.1, 0.05)]
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    passed = r1 >= 3.5 and r2 >= 3.5
    _report(
        10,
        "trotter order",
        passed,
        f"step errors {['%.2e' % e for e in errs]} shrink {r1:.2f}x, {r2:.2f}x "
        "per tau halving (>= 3.5)",
    )


def test_criterion_11_gate_counting():
    payload = np.eye(2)
    counts_ok = True
    for n in (2, 3, 4):
        gate = Gate("f-move", (0,), tuple((q + 1, 0) for q in range(n)), payload, 0)
        counts_ok &= len(expand_multicontrolled(gate, 9, n + 1)) == 2 * n + 1
    expected = {
        "electric-phase": 2,
        "f-move": 12,
        "f-prime": 4,
        "g": 4,
        "omega-phase": 2,
    }
    margins = []
    inventory_ok = True
    for k in range(1, 7):
        rep = gate_count(trotter_step_second_order(0.1, 1.0, k, "2x2"))
        inventory_ok &= rep.inventory == expected
        margins.append((k, rep.per_unit_cell, rep.bound))
        counts_ok &= bool(rep.within_bound)
    passed = counts_ok and inventory_ok
    worst = max(m[1] / m[2] for m in margins)
    _report(
        11,
        "gate counting",
        passed,
        f"expansions exactly 2n+1; inventory (2 electric, 12 F, 4 F', 4 G, "
        f"2 magnetic phase) matches; per-cell/bound ratio <= {worst:.2f} for k <= 6",
    )


def test_criterion_12_suite_all(capsys):
    start = time.perf_counter()
    code = cli.main(["suite-all"])
    elapsed = time.perf_counter() - start
    out = capsys.readouterr().out
    passed = code == 0 and elapsed < 600.0 and "0 failed" in out
    _report(
        12,
        "end-to-end suite",
        passed,
        f"snaq suite-all exit {code}, {elapsed:.1f}s (< 600s)",
    )
