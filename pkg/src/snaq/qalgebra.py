"""Recoupling data for SU(2) at level k: q-numbers, 6j symbols, F-matrices.

All spin labels are passed as twice-spin integers (tj = 2j), so half-integer
spins never appear as floats in an index. The deformation parameter is the
root of unity q = exp(2*pi*i/(k+2)); every quantity below is real.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "Level",
    "q_number",
    "q_factorial",
    "quantum_dimension",
    "is_admissible",
    "admissible_triples",
    "racah_q6j",
    "classical_6j",
    "f_matrix",
    "FTable",
    "IdentityCheck",
    "IdentityReport",
    "verify_identities",
]


@dataclass(frozen=True)
class Level:
    """Deformation level. The associated root of unity is exp(2*pi*i/(k+2))."""

    k: int

    def __post_init__(self) -> None:
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"level must be an integer >= 1, got {self.k!r}")

    @property
    def q(self) -> complex:
        angle = 2.0 * math.pi / (self.k + 2)
        return complex(math.cos(angle), math.sin(angle))

    @property
    def n_labels(self) -> int:
        # twice-spins 0, 1, ..., k
        return self.k + 1


def _as_k(level: Level | int) -> int:
    k = level.k if isinstance(level, Level) else level
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"level must be an integer >= 1, got {level!r}")
    return int(k)


def q_number(n: int, k: int) -> float:
    """Deformed integer [n] = sin(pi n / (k+2)) / sin(pi / (k+2)).

    [0] = 0, [1] = 1, and [k+2] = 0 (the truncation zero of the theory).
    """
    k = _as_k(k)
    return math.sin(math.pi * n / (k + 2)) / math.sin(math.pi / (k + 2))


@lru_cache(maxsize=None)
def q_factorial(n: int, k: int) -> float:
    """Deformed factorial [n]! = [1][2]...[n], with [0]! = 1 by convention."""
    if n < 0:
        raise ValueError(f"q_factorial needs n >= 0, got {n}")
    out = 1.0
    for m in range(2, n + 1):
        out *= q_number(m, k)
    return out


def _check_label(tj: int, k: int) -> None:
    if not isinstance(tj, (int, np.integer)):
        raise ValueError(f"labels are twice-spin integers, got {tj!r}")
    if tj < 0 or tj > k:
        raise ValueError(f"label {tj} out of range for level k={k}")


def quantum_dimension(tj: int, k: int) -> float:
    """Quantum dimension d_j = [2j + 1] of the label with twice-spin tj."""
    k = _as_k(k)
    _check_label(tj, k)
    return q_number(tj + 1, k)


def is_admissible(tj1: int, tj2: int, tj3: int, k: int) -> bool:
    """Fusion admissibility of a triple at level k.

    Requires the triangle inequalities, integer total spin (parity), and the
    level cap j1 + j2 + j3 <= k.
    """
    k = _as_k(k)
    if tj1 < 0 or tj2 < 0 or tj3 < 0:
        return False
    if (tj1 + tj2 + tj3) % 2 != 0:
        return False
    if tj1 + tj2 < tj3 or tj2 + tj3 < tj1 or tj3 + tj1 < tj2:
        return False
    return tj1 + tj2 + tj3 <= 2 * k


def admissible_triples(k: int) -> Iterator[tuple[int, int, int]]:
    """Yield every admissible (tj1, tj2, tj3) at level k in lexicographic order."""
    k = _as_k(k)
    for a in range(k + 1):
        for b in range(k + 1):
            for c in range(k + 1):
                if is_admissible(a, b, c, k):
                    yield (a, b, c)


def _triangle_factor(ta: int, tb: int, tc: int, fact: Callable[[int], float]) -> float:
    x1 = (ta + tb - tc) // 2
    x2 = (ta - tb + tc) // 2
    x3 = (-ta + tb + tc) // 2
    x4 = (ta + tb + tc) // 2 + 1
    assert min(x1, x2, x3) >= 0 and (ta + tb + tc) % 2 == 0
    den = fact(x4)
    assert den > 0.0, "triangle denominator factorial vanished"
    return fact(x1) * fact(x2) * fact(x3) / den


def _racah_sum(
    ta: int, tb: int, tc: int, td: int, te: int, tf: int, fact: Callable[[int], float]
) -> float:
    # Tetrahedron {a b c; d e f} with triads (a,b,c), (a,e,f), (d,b,f), (d,e,c).
    triads = ((ta, tb, tc), (ta, te, tf), (td, tb, tf), (td, te, tc))
    t_sums = []
    for u, v, w in triads:
        s = u + v + w
        assert s % 2 == 0
        t_sums.append(s // 2)
    quads = (
        (ta + tb + td + te) // 2,
        (ta + td + tc + tf) // 2,
        (tb + te + tc + tf) // 2,
    )
    assert (ta + tb + td + te) % 2 == 0

    pref = 1.0
    for u, v, w in triads:
        pref *= _triangle_factor(u, v, w, fact)
    pref = math.sqrt(pref)

    total = 0.0
    for z in range(max(t_sums), min(quads) + 1):
        den = 1.0
        for qv in quads:
            arg = qv - z
            assert arg >= 0
            den *= fact(arg)
        for tv in t_sums:
            arg = z - tv
            assert arg >= 0
            den *= fact(arg)
        assert den > 0.0, "Racah denominator factorial vanished at the root of unity"
        term = fact(z + 1) / den
        total += -term if z % 2 else term
    return pref * total


def racah_q6j(
    tj1: int, tj2: int, tj3: int, tj4: int, tj5: int, tj6: int, k: int
) -> float:
    """Deformed Racah 6j symbol {j1 j2 j3; j4 j5 j6} at level k.

    Arguments are twice-spin integers in the usual top-row bottom-row layout;
    the four tetrahedral triads are (j1,j2,j3), (j1,j5,j6), (j4,j2,j6),
    (j4,j5,j3). Returns 0 unless all four are admissible at level k.
    """
    k = _as_k(k)
    for tj in (tj1, tj2, tj3, tj4, tj5, tj6):
        _check_label(tj, k)
    if not (
        is_admissible(tj1, tj2, tj3, k)
        and is_admissible(tj1, tj5, tj6, k)
        and is_admissible(tj4, tj2, tj6, k)
        and is_admissible(tj4, tj5, tj3, k)
    ):
        return 0.0
    return _racah_sum(tj1, tj2, tj3, tj4, tj5, tj6, lambda n: q_factorial(n, k))


def _int_factorial(n: int) -> float:
    return float(math.factorial(n))


def _classical_triangle_ok(ta: int, tb: int, tc: int) -> bool:
    if (ta + tb + tc) % 2 != 0:
        return False
    return ta + tb >= tc and tb + tc >= ta and tc + ta >= tb


def classical_6j(tj1: int, tj2: int, tj3: int, tj4: int, tj5: int, tj6: int) -> float:
    """Undeformed SU(2) 6j symbol, same layout as racah_q6j, no level cap."""
    for tj in (tj1, tj2, tj3, tj4, tj5, tj6):
        if not isinstance(tj, (int, np.integer)) or tj < 0:
            raise ValueError(f"labels are non-negative twice-spin integers, got {tj!r}")
    if not (
        _classical_triangle_ok(tj1, tj2, tj3)
        and _classical_triangle_ok(tj1, tj5, tj6)
        and _classical_triangle_ok(tj4, tj2, tj6)
        and _classical_triangle_ok(tj4, tj5, tj3)
    ):
        return 0.0
    return _racah_sum(tj1, tj2, tj3, tj4, tj5, tj6, _int_factorial)


def f_matrix(
    tj1: int, tj2: int, tj5: int, tj3: int, tj4: int, tj6: int, k: int
) -> float:
    """F-symbol F^{j1 j2 j5}_{j3 j4 j6} at level k.

    Value: (-1)^(j1+j2+j3+j4) sqrt(d_{j5} d_{j6}) {j1 j2 j5; j3 j4 j6}.
    Zero unless the four vertex triads (j1,j2,j5), (j1,j4,j6), (j3,j2,j6),
    (j3,j4,j5) are admissible.
    """
    k = _as_k(k)
    core = racah_q6j(tj1, tj2, tj5, tj3, tj4, tj6, k)
    if core == 0.0:
        return 0.0
    texp = tj1 + tj2 + tj3 + tj4
    # the two triads sharing j5 force an integer exponent
    assert texp % 2 == 0, f"sign exponent is not an integer for {(tj1, tj2, tj5, tj3, tj4, tj6)}"
    sign = -1.0 if (texp // 2) % 2 else 1.0
    dim5 = quantum_dimension(tj5, k)
    dim6 = quantum_dimension(tj6, k)
    return sign * math.sqrt(dim5 * dim6) * core


class FTable:
    """Memoized F-symbols at a fixed level.

    Lazy lookups are thread-safe and bit-identical on repeat; `eager_build`
    precomputes every nonzero element so later reads never take the lock.
    """

    def __init__(self, level: Level | int):
        self.level = level if isinstance(level, Level) else Level(int(level))
        self._cache: dict[tuple[int, int, int, int, int, int], float] = {}
        self._lock = threading.Lock()
        self._eager = False
        self._tensor: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.level.k

    def element(
        self, tj1: int, tj2: int, tj5: int, tj3: int, tj4: int, tj6: int
    ) -> float:
        key = (tj1, tj2, tj5, tj3, tj4, tj6)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self._eager:
            # everything nonzero is already present
            for tj in key:
                _check_label(tj, self.k)
            return 0.0
        value = f_matrix(tj1, tj2, tj5, tj3, tj4, tj6, self.k)
        with self._lock:
            return self._cache.setdefault(key, value)

    def eager_build(self) -> int:
        """Fill the cache with every admissible tetrahedron. Returns the count."""
        if self._eager:
            return len(self._cache)
        k = self.k
        with self._lock:
            for a, b, e in admissible_triples(k):
                for c in range(k + 1):
                    for d in range(k + 1):
                        if not is_admissible(c, d, e, k):
                            continue
                        for f in range(k + 1):
                            if is_admissible(a, d, f, k) and is_admissible(c, b, f, k):
                                key = (a, b, e, c, d, f)
                                if key not in self._cache:
                                    self._cache[key] = f_matrix(a, b, e, c, d, f, k)
            self._eager = True
        return len(self._cache)

    def tensor(self) -> np.ndarray:
        """Dense (k+1)^6 array T[a, b, e, c, d, f] = F^{a b e}_{c d f}."""
        if self._tensor is None:
            n = self.k + 1
            out = np.zeros((n,) * 6)
            self.eager_build()
            for (a, b, e, c, d, f), val in self._cache.items():
                out[a, b, e, c, d, f] = val
            self._tensor = out
        return self._tensor


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    max_residual: float
    num_checked: int


@dataclass(frozen=True)
class IdentityReport:
    k: int
    tol: float
    checks: tuple[IdentityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.max_residual <= self.tol for c in self.checks)

    def as_rows(self) -> list[dict]:
        return [
            {
                "identity": c.name,
                "max_residual": c.max_residual,
                "num_checked": c.num_checked,
            }
            for c in self.checks
        ]


def default_identity_tol(k: int) -> float:
    return 1e-10 if k <= 4 else 1e-8


def _admissibility_tensor(k: int) -> np.ndarray:
    n = k + 1
    adm = np.zeros((n, n, n))
    for a, b, c in admissible_triples(k):
        adm[a, b, c] = 1.0
    return adm


def _pentagon_residual(table: FTable, sink: Callable[[str], None] | None) -> tuple[float, int]:
    # sum_J F^{ab e}_{cd J} F^{fg d}_{J a h} F^{hg J}_{cb i}
    #     = F^{ab e}_{if h} F^{fg d}_{ce i}, checked over all nine free labels.
    T = table.tensor()
    n = table.k + 1
    worst = 0.0
    for a in range(n):
        lhs = np.einsum("becdJ,fgdJh,hgJcbi->becdfghi", T[a], T[:, :, :, :, a, :], T, optimize=True)
        rhs = np.einsum("beifh,fgdcei->becdfghi", T[a], T, optimize=True)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
        if sink is not None:
            sink(f"pentagon slice {a + 1}/{n}: running max residual {worst:.3e}")
    return worst, n**9


def _orthogonality_residual(table: FTable) -> tuple[float, int]:
    T = table.tensor()
    k = table.k
    gram = np.einsum("abecdJ,abfcdJ->abcdef", T, T, optimize=True)
    adm = _admissibility_tensor(k)
    n = k + 1
    eye = np.eye(n)
    expected = np.einsum("abe,cde,ef->abcdef", adm, adm, eye)
    return float(np.abs(gram - expected).max()), n**6


def _mirror_residual(table: FTable) -> tuple[float, int]:
    T = table.tensor()
    first = np.einsum("baedcf->abecdf", T)
    second = np.einsum("dcebaf->abecdf", T)
    resid = max(float(np.abs(T - first).max()), float(np.abs(T - second).max()))
    return resid, 2 * T.size


def _weighted_symmetry_residual(table: FTable) -> tuple[float, int]:
    # v-weighted symmetry: F^{abe}_{cdf} = (v_e v_f / (v_a v_c)) F^{eba}_{fdc}
    # with v_j = i^{2j} sqrt(d_j); the phase is (-1)^((e+f-a-c)/2) on even parity
    T = table.tensor()
    k = table.k
    n = k + 1
    dims = np.array([quantum_dimension(t, k) for t in range(n)])
    tvals = np.arange(n)
    expo = (
        tvals[:, None, None, None]
        + tvals[None, :, None, None]
        - tvals[None, None, :, None]
        - tvals[None, None, None, :]
    )  # indexed [e, f, a, c]
    parity_ok = expo % 2 == 0
    sign = np.where((expo // 2) % 2 == 0, 1.0, -1.0) * parity_ok
    weight = sign * np.sqrt(
        dims[:, None, None, None]
        * dims[None, :, None, None]
        / (dims[None, None, :, None] * dims[None, None, None, :])
    )
    permuted = np.einsum("ebafdc->abecdf", T)
    w6 = np.einsum("efac->aecf", weight)[:, None, :, :, None, :]
    return float(np.abs(T - permuted * w6).max()), T.size


def _normalization_residual(table: FTable) -> tuple[float, int]:
    k = table.k
    n = k + 1
    worst = 0.0
    count = 0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                got = table.element(a, a, 0, b, b, c)
                if is_admissible(a, b, c, k):
                    # v_c / (v_a v_b) with v_j = i^(2j) sqrt(d_j); parity makes it real
                    half = (c - a - b) // 2
                    sign = -1.0 if half % 2 else 1.0
                    expected = sign * math.sqrt(
                        quantum_dimension(c, k)
                        / (quantum_dimension(a, k) * quantum_dimension(b, k))
                    )
                else:
                    expected = 0.0
                worst = max(worst, abs(got - expected))
                count += 1
                # the all-trivial upper row collapses to a Kronecker delta
                got0 = table.element(0, 0, 0, a, b, c)
                expected0 = 1.0 if a == b == c else 0.0
                worst = max(worst, abs(got0 - expected0))
                count += 1
    return worst, count


def _finiteness_residual(table: FTable) -> tuple[float, int]:
    T = table.tensor()
    ok = bool(np.isfinite(T).all())
    return (0.0 if ok else math.inf), T.size


def verify_identities(
    k: int,
    tol: float | None = None,
    max_k: int = 6,
    table: FTable | None = None,
    sink: Callable[[str], None] | None = None,
) -> IdentityReport:
    """Exhaustively check the defining identities of the F-symbol table.

    Runs the pentagon identity, orthogonality, the two mirror symmetries, the
    dimension-weighted symmetry, the normalization rules, and finiteness over
    all labels at level k. `max_k` guards against accidentally exhausting a
    huge label set; raise it explicitly for larger sweeps. A custom `table`
    may be supplied (hook for corruption tests); `sink` receives progress
    lines.
    """
    k = _as_k(k)
    if k > max_k:
        raise ValueError(f"k={k} exceeds max_k={max_k}; pass max_k explicitly to allow")
    if tol is None:
        tol = default_identity_tol(k)
    if table is None:
        table = FTable(k)
    table.eager_build()

    checks: list[IdentityCheck] = []
    pent, n_pent = _pentagon_residual(table, sink)
    checks.append(IdentityCheck("pentagon", pent, n_pent))
    orth, n_orth = _orthogonality_residual(table)
    checks.append(IdentityCheck("orthogonality", orth, n_orth))
    mirror, n_mirror = _mirror_residual(table)
    checks.append(IdentityCheck("mirror-symmetry", mirror, n_mirror))
    weighted, n_weighted = _weighted_symmetry_residual(table)
    checks.append(IdentityCheck("weighted-symmetry", weighted, n_weighted))
    norm, n_norm = _normalization_residual(table)
    checks.append(IdentityCheck("normalization", norm, n_norm))
    finite, n_finite = _finiteness_residual(table)
    checks.append(IdentityCheck("finite-real", finite, n_finite))

    report = IdentityReport(k=k, tol=tol, checks=tuple(checks))
    if sink is not None:
        for c in checks:
            sink(f"{c.name}: max residual {c.max_residual:.3e} over {c.num_checked} checks")
        sink(f"identities at k={k}: {'pass' if report.passed else 'FAIL'} (tol {tol:.1e})")
    return report
