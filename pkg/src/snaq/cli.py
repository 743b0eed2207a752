"""Command line front end: verification suites, spectra, ground-state scans,
circuit compilation, and complexity reports.

Results go to standard output or --out; logs go to standard error. All
floating-point output is fixed to 15 significant digits so identical
arguments and seed produce byte-identical files. Exit codes: 0 success,
1 validation failure (a check over tolerance), 2 usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from snaq import circuit as circuit_mod
from snaq import qalgebra, spinnet, variational

log = logging.getLogger("snaq")


def _f15(x) -> float:
    return float(f"{float(x):.15g}")


def _s15(x) -> str:
    return f"{float(x):.15g}"


def _json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        log.info("wrote %s", out)


def _parse_ints(text: str, n: int) -> list[int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated integers, got {text!r}")
    return [int(p) for p in parts]


def _resolve_threads(args) -> int:
    env = os.environ.get("SNAQ_THREADS")
    if env:
        return max(1, int(env))
    return max(1, getattr(args, "threads", 1) or 1)


def _network_for(topology: str, outer: str | None) -> spinnet.SpinNetwork:
    if topology == "single-plaquette":
        return spinnet.single_plaquette_network()
    if topology == "hexagon":
        labels = _parse_ints(outer, 6) if outer else [0] * 6
        return spinnet.hexagon_network(tuple(labels))
    if topology.startswith("torus:"):
        spec = topology[len("torus:") :]
        a, sep, b = spec.partition("x")
        if not sep or not a.isdigit() or not b.isdigit() or a != b:
            raise ValueError(f"torus topology must be torus:LxL, got {topology!r}")
        return spinnet.torus_network(int(a))
    raise ValueError(
        f"unknown topology {topology!r}; use single-plaquette, hexagon, or torus:LxL"
    )


# ---------------------------------------------------------------- subcommands


def _cmd_verify(args) -> int:
    report = qalgebra.verify_identities(
        args.k, tol=args.tol, max_k=max(args.k, 6), sink=log.info
    )
    doc = {
        "schema": "snaq-verify/1",
        "k": report.k,
        "tol": _f15(report.tol),
        "checks": [
            {
                "identity": c.name,
                "max_residual": _f15(c.max_residual),
                "num_checked": int(c.num_checked),
            }
            for c in report.checks
        ],
        "passed": report.passed,
    }
    _write(_json_text(doc), args.out)
    return 0 if report.passed else 1


def _cmd_fsymbol(args) -> int:
    labels = _parse_ints(args.labels, 6)
    value = qalgebra.f_matrix(*labels, args.k)
    print(f"{value:.15f}")
    return 0


def _cmd_basis_dim(args) -> int:
    net = _network_for(args.topology, args.outer)
    try:
        dim = spinnet.enumerate_basis(net, args.k).dim
    except spinnet.EmptyBasisError:
        dim = 0
    print(dim)
    return 0


def _cmd_plaquette_spectrum(args) -> int:
    basis = spinnet.enumerate_basis(spinnet.single_plaquette_network(), args.k)
    ham = spinnet.build_hamiltonian(basis, args.g2, args.convention)
    w, vecs = spinnet.diagonalize(ham, n_states=args.levels)
    doc = {
        "schema": "snaq-spectrum/1",
        "k": args.k,
        "g2": _f15(args.g2),
        "convention": args.convention,
        "eigenvalues": [_f15(x) for x in w],
        "distributions": [
            [_f15(vecs[j, n] ** 2) for j in range(basis.dim)]
            for n in range(args.levels)
        ],
    }
    _write(_json_text(doc), args.out)
    return 0


def _cmd_groundstate(args) -> int:
    res = variational.optimize(args.k, args.g2, seed=args.seed, n_random=args.restarts)
    doc = {
        "schema": "snaq-groundstate/1",
        "k": res.k,
        "g2": _f15(res.g2),
        "energy": _f15(res.energy),
        "plaquette": _f15(res.plaquette),
        "converged": bool(res.converged),
        "n_iter": int(res.n_iter),
        "psi": [_f15(x) for x in res.psi],
    }
    _write(_json_text(doc), args.out)
    return 0


def _scan_csv(scan: variational.PhaseScanResult) -> str:
    critical = "none" if scan.g2_critical is None else _s15(scan.g2_critical)
    lines = [
        "# schema = snaq-scan/1",
        f"# k = {scan.k}",
        f"# g2_critical = {critical}",
        "g2,energy,plaquette,converged",
    ]
    for i in range(scan.g2_values.size):
        lines.append(
            ",".join(
                (
                    _s15(scan.g2_values[i]),
                    _s15(scan.energies[i]),
                    _s15(scan.plaquettes[i]),
                    str(int(scan.converged[i])),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _cmd_phase_scan(args) -> int:
    if args.g2_min <= 0 or args.g2_max <= args.g2_min or args.points < 2:
        raise ValueError("need 0 < g2-min < g2-max and at least two points")
    grid = np.geomspace(args.g2_min, args.g2_max, args.points)
    scan = variational.phase_scan(
        args.k, grid, seed=args.seed, threads=_resolve_threads(args)
    )
    _write(_scan_csv(scan), args.out)
    return 0


def _read_scan_meta(path: Path) -> tuple[int | None, float | None]:
    k = None
    critical = None
    for line in path.read_text().splitlines():
        if line.startswith("# k ="):
            k = int(line.split("=", 1)[1])
        elif line.startswith("# g2_critical ="):
            value = line.split("=", 1)[1].strip()
            critical = None if value == "none" else float(value)
    return k, critical


def _cmd_fit_critical(args) -> int:
    root = Path(args.input)
    files = sorted(root.glob("*.csv")) if root.is_dir() else [root]
    points: list[tuple[int, float]] = []
    for f in files:
        k, critical = _read_scan_meta(f)
        if k is None:
            log.warning("%s: no '# k =' header, skipped", f)
            continue
        if critical is None:
            log.warning("%s: no detected transition, skipped", f)
            continue
        points.append((k, critical))
    if len(points) < 2:
        raise ValueError("need at least two scans with detected transitions")
    points.sort()
    fit = variational.fit_critical_law(
        [k for k, _ in points], [critical for _, critical in points]
    )
    doc = {
        "schema": "snaq-fit/1",
        "g0": _f15(fit.g0),
        "k0": _f15(fit.k0),
        "residual": _f15(fit.residual),
        "points": [
            {"k": int(k), "g2_critical": _f15(critical)} for k, critical in points
        ],
    }
    _write(_json_text(doc), args.out)
    return 0


def _read_scan_rows(path: Path) -> list[tuple[float, float, float]]:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except (ValueError, IndexError):
            continue  # header row
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return rows


def _read_reference_rows(path: Path) -> list[tuple[float, float, float]]:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            g2, plaquette = float(parts[0]), float(parts[1])
        except (ValueError, IndexError):
            continue
        err = float(parts[2]) if len(parts) > 2 and parts[2] else 0.0
        rows.append((g2, plaquette, err))
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return rows


def _pair_rows(scan_rows, ref_rows) -> list[tuple[float, ...]]:
    scan_g2 = np.array([r[0] for r in scan_rows])
    paired = []
    for g2_ref, pl_ref, err_ref in ref_rows:
        i = int(np.argmin(np.abs(scan_g2 - g2_ref)))
        pl_scan = scan_rows[i][2]
        paired.append(
            (g2_ref, scan_rows[i][0], pl_scan, pl_ref, err_ref, pl_scan - pl_ref)
        )
    return paired


def _cmd_compare_mc(args) -> int:
    paired = _pair_rows(
        _read_scan_rows(Path(args.scan)), _read_reference_rows(Path(args.reference))
    )
    lines = [
        "# schema = snaq-compare/1",
        "g2_reference,g2_scan,plaquette_scan,plaquette_reference,reference_error,difference",
    ]
    for row in paired:
        lines.append(",".join(_s15(x) for x in row))
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_compile(args) -> int:
    circ = circuit_mod.compile_evolution(
        args.tau, args.g2, args.k, args.lattice, steps=args.steps
    )
    if args.lower_ancilla:
        circ = circuit_mod.lower_circuit(circ)
    doc = circuit_mod.circuit_to_json(circ)
    _write(json.dumps(doc) + "\n", args.out)
    log.info(
        "compiled %d gates on %d qudits (+%d ancillas)",
        len(circ.gates),
        circ.n_register,
        circ.n_ancillas,
    )
    return 0


def _cmd_hexagon_verify(args) -> int:
    outer = tuple(_parse_ints(args.outer, 6)) if args.outer else (0,) * 6
    err = circuit_mod.plaquette_exponential_error(args.k, args.tau, args.g2, outer)
    print(f"{err:.15g}")
    return 0 if err <= args.tol else 1


def _cmd_gate_count(args) -> int:
    data = json.loads(Path(args.circuit).read_text())
    rep = circuit_mod.gate_count(circuit_mod.circuit_from_json(data))
    doc = {
        "schema": "snaq-gatecount/1",
        "k": rep.k,
        "lattice": rep.lattice,
        "steps": rep.steps,
        "n_gates": rep.n_gates,
        "entangling_total": rep.entangling_total,
        "per_unit_cell": None if rep.per_unit_cell is None else _f15(rep.per_unit_cell),
        "bound": rep.bound,
        "within_bound": rep.within_bound,
        "inventory": {name: rep.inventory[name] for name in sorted(rep.inventory)},
        "max_move_tuples": rep.max_move_tuples,
    }
    _write(_json_text(doc), args.out)
    return 1 if rep.within_bound is False else 0


# ---------------------------------------------------------------- suite-all


def _random_outer(k: int, rng) -> tuple[int, ...]:
    while True:
        outer = tuple(int(x) for x in rng.integers(0, k + 1, size=6))
        try:
            spinnet.enumerate_basis(spinnet.hexagon_network(outer), k)
        except spinnet.EmptyBasisError:
            continue
        return outer


def _suite_identities(ctx) -> tuple[bool, str]:
    top = min(ctx["k_max"], 4)
    worst = 0.0
    for k in range(1, top + 1):
        report = qalgebra.verify_identities(k)
        if not report.passed:
            return False, f"identity residual over tolerance at k={k}"
        worst = max(worst, max(c.max_residual for c in report.checks))
    return True, f"max residual {worst:.2e} for k <= {top}"


def _suite_classical_limit(ctx) -> tuple[bool, str]:
    labels = list(itertools.product(range(5), repeat=6))
    prev = None
    for k in (50, 100, 200, 400):
        worst = 0.0
        for tup in labels:
            worst = max(
                worst, abs(qalgebra.racah_q6j(*tup, k) - qalgebra.classical_6j(*tup))
            )
        if prev is not None and worst >= prev:
            return False, f"deviation stopped decreasing at k={k}"
        prev = worst
    if prev >= 1e-3:
        return False, f"k=400 deviation {prev:.2e} not below 1e-3"
    return True, f"deviation monotone down to {prev:.2e} at k=400"


def _plaquette_distribution(g2: float, k: int, n: int, pad: int) -> np.ndarray:
    basis = spinnet.enumerate_basis(spinnet.single_plaquette_network(), k)
    ham = spinnet.build_hamiltonian(basis, g2)
    _, vecs = spinnet.diagonalize(ham, n_states=n + 1)
    out = np.zeros(pad)
    out[: k + 1] = vecs[:, n] ** 2
    return out


def _suite_truncation(ctx) -> tuple[bool, str]:
    g2 = 0.1
    oracles = [spinnet.mathieu_oracle(g2, n, 50) ** 2 for n in range(4)]
    ground = _plaquette_distribution(g2, 30, 0, 101)
    if np.max(np.abs(ground - oracles[0])) >= 1e-6:
        return False, "ground state at k=30 misses the k=100 oracle"
    thresholds = []
    for n in range(4):
        found = None
        for k in range(max(n, 1), 61):
            dist = _plaquette_distribution(g2, k, n, 101)
            if np.max(np.abs(dist - oracles[n])) < 1e-6:
                found = k
                break
        if found is None:
            return False, f"state {n} never converged below k=60"
        thresholds.append(found)
    if not all(a < b for a, b in zip(thresholds, thresholds[1:])):
        return False, f"convergence thresholds {thresholds} not strictly increasing"
    return True, f"convergence thresholds {thresholds} strictly increasing"


def _suite_plaquette_exact(ctx) -> tuple[bool, str]:
    basis = spinnet.enumerate_basis(spinnet.single_plaquette_network(), 1)
    w, _ = spinnet.diagonalize(spinnet.build_hamiltonian(basis, 1.0), n_states=2)
    if abs(w[0] + 1.0) > 1e-12 or abs(w[1] - 4.0) > 1e-12:
        return False, f"k=1 spectrum ({w[0]}, {w[1]}) is not (-1, 4)"
    g2 = 0.9
    worst = 0.0
    for k in range(1, 7):
        basis = spinnet.enumerate_basis(spinnet.single_plaquette_network(), k)
        ham = spinnet.build_hamiltonian(basis, g2).matrix.toarray()
        t = np.arange(k + 1, dtype=float)
        direct = np.diag(t * (t + 2.0))
        off = np.full(k, -2.0 / g2**2)
        direct += np.diag(off, 1) + np.diag(off, -1)
        worst = max(worst, float(np.max(np.abs(ham - direct))))
    if worst > 1e-12:
        return False, f"six-F path deviates from tridiagonal by {worst:.2e}"
    return True, f"spectrum exact; six-F vs tridiagonal {worst:.2e} for k <= 6"


def _suite_energy_oracle(ctx) -> tuple[bool, str]:
    rng = np.random.default_rng(2024)
    ks = [1] if ctx["k_max"] < 2 else [1, 2]
    worst = 0.0
    for k in ks:
        for _ in range(20):
            psi = rng.normal(size=k + 1)
            psi /= np.linalg.norm(psi)
            g2 = float(10.0 ** rng.uniform(-1, 1))
            delta = abs(
                variational.mean_energy(psi, g2, k)
                - variational.brute_force_energy(psi, g2, k)
            )
            worst = max(worst, delta)
    if worst >= 1e-10:
        return False, f"analytic vs brute-force energy gap {worst:.2e}"
    return True, f"max |analytic - brute force| = {worst:.2e} for k in {ks}"


def _suite_critical_law(ctx) -> tuple[bool, str]:
    full = ctx["k_max"] >= 4
    ks = list(range(1, 17)) if full else list(range(1, ctx["k_max"] + 1))
    criticals = []
    for k in ks:
        scan = variational.phase_scan(k, seed=0, threads=ctx["threads"])
        if scan.g2_critical is None:
            return False, f"no transition detected at k={k}"
        criticals.append(scan.g2_critical)
        ctx["top_scan"] = scan
    if any(b >= a for a, b in zip(criticals, criticals[1:])):
        return False, "critical couplings not strictly decreasing"
    if not full:
        return True, f"g2_c strictly decreasing for k <= {ctx['k_max']} (fit needs k_max >= 4)"
    fit = variational.fit_critical_law(ks, criticals)
    if not (3.9 <= fit.g0 <= 4.9 and 1.8 <= fit.k0 <= 3.2):
        return False, f"fit g0 = {fit.g0:.3f}, k0 = {fit.k0:.3f} outside windows"
    return True, f"fit g0 = {fit.g0:.3f} in [3.9, 4.9], k0 = {fit.k0:.3f} in [1.8, 3.2]"


def _suite_reference_comparison(ctx) -> tuple[bool, str]:
    ks = np.arange(1, 17)
    fit = variational.fit_critical_law(ks, (4.4 / (ks + 2.5)) ** 2)
    if abs(fit.g0 - 4.4) > 1e-9 or abs(fit.k0 - 2.5) > 1e-9:
        return False, "synthetic inverse-square law not recovered exactly"
    scan = ctx.get("top_scan")
    if scan is None:
        scan = variational.phase_scan(
            min(16, ctx["k_max"]), seed=0, threads=ctx["threads"]
        )
    with tempfile.TemporaryDirectory() as td:
        scan_path = Path(td) / "scan.csv"
        ref_path = Path(td) / "reference.csv"
        scan_path.write_text(_scan_csv(scan))
        lines = ["beta_or_g2,plaquette,error"]
        for g2, plaquette in zip(scan.g2_values, scan.plaquettes):
            lines.append(f"{_s15(g2)},{_s15(plaquette)},0")
        ref_path.write_text("\n".join(lines) + "\n")
        paired = _pair_rows(_read_scan_rows(scan_path), _read_reference_rows(ref_path))
    worst = max(abs(row[-1]) for row in paired)
    if worst != 0.0:
        return False, f"round-trip difference {worst:.2e} is not exactly zero"
    plaquettes = scan.plaquettes
    if np.any(np.diff(plaquettes) > 1e-10):
        return False, f"plaquette not monotone decreasing in g2 at k={scan.k}"
    return True, f"round-trip exact; plaquette non-increasing over the k={scan.k} sweep"


def _suite_circuit_exactness(ctx) -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    top = min(ctx["k_max"], 3)
    worst = 0.0
    for k in range(1, top + 1):
        for _ in range(5):
            outer = _random_outer(k, rng)
            for tau in (0.1, 1.0, 3.0):
                worst = max(
                    worst,
                    circuit_mod.plaquette_exponential_error(k, tau, 1.0, outer),
                )
    if worst >= 1e-8:
        return False, f"magnetic factor error {worst:.2e} over budget 1e-8"
    return True, f"max factor error {worst:.2e} for k <= {top} (budget 1e-8)"


def _suite_tadpole_blocks(ctx) -> tuple[bool, str]:
    rng = np.random.default_rng(23)
    top = min(ctx["k_max"], 3)
    worst = 0.0
    for k in range(1, top + 1):
        outer = _random_outer(k, rng)
        block_err, leakage = circuit_mod.tadpole_conjugation_error(k, outer)
        worst = max(worst, block_err, leakage)
    if worst >= 1e-10:
        return False, f"conjugated block deviation {worst:.2e}"
    return True, f"max block deviation {worst:.2e} for k <= {top}"


def _suite_trotter_order(ctx) -> tuple[bool, str]:
    errs = [
        circuit_mod.step_exponential_error(1, tau, 1.0, (0,) * 6)
        for tau in (0.2, 0.1, 0.05)
    ]
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    if r1 < 3.5 or r2 < 3.5:
        return False, f"error ratios {r1:.2f}, {r2:.2f} below 3.5"
    return True, f"step error shrinks {r1:.2f}x then {r2:.2f}x per tau halving"


def _suite_gate_counts(ctx) -> tuple[bool, str]:
    payload = np.eye(2)
    for n in (2, 3, 4):
        gate = circuit_mod.Gate(
            "f-move", (0,), tuple((q + 1, 0) for q in range(n)), payload, 0
        )
        expanded = circuit_mod.expand_multicontrolled(gate, ancilla=9, ancilla_dim=n + 1)
        if len(expanded) != 2 * n + 1:
            return False, f"{n}-control expansion used {len(expanded)} gates, not {2 * n + 1}"
    expected = {
        "electric-phase": 2,
        "f-move": 12,
        "f-prime": 4,
        "g": 4,
        "omega-phase": 2,
    }
    ks = range(1, 7) if ctx["k_max"] >= 4 else range(1, ctx["k_max"] + 1)
    for k in ks:
        rep = circuit_mod.gate_count(
            circuit_mod.trotter_step_second_order(0.1, 1.0, k, "2x2")
        )
        if rep.inventory != expected:
            return False, f"k={k}: step inventory {rep.inventory} unexpected"
        if not rep.within_bound:
            return False, f"k={k}: per-cell count {rep.per_unit_cell} over bound {rep.bound}"
    return True, f"expansions exactly 2n+1; per-cell counts within bound for k in {list(ks)}"


_SUITE_CHECKS = (
    ("recoupling-identities", _suite_identities),
    ("classical-limit", _suite_classical_limit),
    ("truncation-convergence", _suite_truncation),
    ("plaquette-exact-values", _suite_plaquette_exact),
    ("energy-oracle-equivalence", _suite_energy_oracle),
    ("critical-coupling-law", _suite_critical_law),
    ("reference-comparison", _suite_reference_comparison),
    ("plaquette-circuit-exactness", _suite_circuit_exactness),
    ("tadpole-block-structure", _suite_tadpole_blocks),
    ("trotter-order", _suite_trotter_order),
    ("gate-counts", _suite_gate_counts),
)


def _cmd_suite_all(args) -> int:
    ctx = {"k_max": args.k_max, "threads": _resolve_threads(args)}
    if args.k_max < 1:
        raise ValueError("k-max must be at least 1")
    print(f"suite-all: k_max = {ctx['k_max']}, threads = {ctx['threads']}")
    start = time.perf_counter()
    failures = 0
    for i, (name, fn) in enumerate(_SUITE_CHECKS, 1):
        tick = time.perf_counter()
        try:
            ok, detail = fn(ctx)
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"error: {exc}"
        if not ok:
            failures += 1
        status = "PASS" if ok else "FAIL"
        elapsed = time.perf_counter() - tick
        print(f"[{i:2d}/{len(_SUITE_CHECKS)}] {name:<28s} {status}  {detail}  ({elapsed:.1f}s)")
    total = time.perf_counter() - start
    print(
        f"suite-all: {len(_SUITE_CHECKS) - failures} passed, "
        f"{failures} failed in {total:.1f}s"
    )
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snaq",
        description="Level-k spin-network gauge theory: verification, spectra, scans, circuits.",
    )
    parser.add_argument(
        "--log-level",
        default="warning",
        choices=("debug", "info", "warning", "error"),
        help="log verbosity on standard error",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--out", default=None, help="write output to this file")
        return p

    p = add("verify", _cmd_verify, "exhaustive recoupling identity report")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tol", type=float, default=None)

    p = add("fsymbol", _cmd_fsymbol, "single recoupling coefficient")
    p.add_argument("--k", type=int, required=True)
    p.add_argument(
        "--labels",
        required=True,
        help="six twice-spin labels: upper triple then lower triple",
    )

    p = add("basis-dim", _cmd_basis_dim, "gauge-invariant basis dimension")
    p.add_argument("--k", type=int, required=True)
    p.add_argument(
        "--topology",
        required=True,
        help="single-plaquette, hexagon, or torus:LxL",
    )
    p.add_argument("--outer", default=None, help="hexagon boundary labels, six 2j values")

    p = add("plaquette-spectrum", _cmd_plaquette_spectrum, "single-plaquette eigensystem")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--g2", type=float, required=True)
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--convention", default="rescaled", choices=("raw", "rescaled"))

    p = add("groundstate", _cmd_groundstate, "variational optimum at one coupling")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--g2", type=float, required=True)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)

    p = add("phase-scan", _cmd_phase_scan, "coupling sweep with transition detection")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--g2-min", type=float, default=0.05)
    p.add_argument("--g2-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)

    p = add("fit-critical", _cmd_fit_critical, "inverse-square law fit over scans")
    p.add_argument("--input", required=True, help="scan CSV file or directory of them")

    p = add("compare-mc", _cmd_compare_mc, "pair a scan against reference values")
    p.add_argument("--scan", required=True)
    p.add_argument("--reference", required=True)

    p = add("compile", _cmd_compile, "compile a time-evolution circuit to JSON")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--g2", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--lattice", default="hexagon", help="hexagon or LxL torus, L even")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument(
        "--lower-ancilla",
        action="store_true",
        help="expand multi-controlled gates to 2n+1 basic gates",
    )

    p = add("hexagon-verify", _cmd_hexagon_verify, "compiled factor vs dense exponential")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--g2", type=float, required=True)
    p.add_argument("--outer", default=None, help="six boundary labels, default all 0")
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("gate-count", _cmd_gate_count, "complexity report for a compiled circuit")
    p.add_argument("--circuit", required=True, help="circuit JSON path")

    p = add("suite-all", _cmd_suite_all, "run every verification suite in order")
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--threads", type=int, default=1)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, args.log_level.upper()),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
