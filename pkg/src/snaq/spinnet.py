"""Spin-network Hilbert spaces on point-split lattices and their Hamiltonians.

A spin network here is a trivalent graph whose links carry twice-spin labels;
a labeling is physical when every vertex triple is fusion-admissible at the
level. Plaquette (magnetic) operators are built from closed rings of
F-symbols; electric energy lives on the physical links only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
import scipy.linalg
import scipy.sparse

from snaq.qalgebra import FTable, is_admissible

log = logging.getLogger(__name__)

__all__ = [
    "Face",
    "SpinNetwork",
    "single_plaquette_network",
    "hexagon_network",
    "torus_network",
    "SNBasis",
    "enumerate_basis",
    "electric_energy",
    "plaquette_element",
    "plaquette_operator",
    "HamiltonianMatrix",
    "build_hamiltonian",
    "diagonalize",
    "mathieu_oracle",
]

DENSE_DIM_CAP = 4096


@dataclass(frozen=True)
class Face:
    """A plaquette: the closed ring of links and the spoke at each corner.

    Corner c sits between ring[c] and ring[c+1] (cyclic) and carries spokes[c].
    """

    ring: tuple[int, ...]
    spokes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.ring) != len(self.spokes):
            raise ValueError("one spoke per ring corner")
        if len(set(self.ring)) != len(self.ring):
            raise ValueError("ring links must be distinct")


@dataclass(frozen=True)
class SpinNetwork:
    """Trivalent labeled graph with fixed boundary labels and plaquette data."""

    name: str
    n_links: int
    physical: tuple[bool, ...]
    vertices: tuple[tuple[int, int, int], ...]
    boundary: dict[int, int] = field(default_factory=dict)
    faces: tuple[Face, ...] = ()

    def __post_init__(self) -> None:
        if len(self.physical) != self.n_links:
            raise ValueError("one physical flag per link")
        degree = [0] * self.n_links
        for triple in self.vertices:
            if len(triple) != 3:
                raise ValueError(f"vertices are link triples, got {triple}")
            for link in triple:
                if not 0 <= link < self.n_links:
                    raise ValueError(f"vertex references unknown link {link}")
                degree[link] += 1
        for link, deg in enumerate(degree):
            expected = 1 if link in self.boundary else 2
            if deg != expected:
                raise ValueError(
                    f"link {link} appears in {deg} vertex triples, expected {expected}"
                )

    @property
    def physical_links(self) -> tuple[int, ...]:
        return tuple(l for l in range(self.n_links) if self.physical[l])


def single_plaquette_network() -> SpinNetwork:
    """One square plaquette with trivial spokes: four ring links, four corners."""
    ring = (0, 1, 2, 3)
    spokes = (4, 5, 6, 7)
    vertices = tuple((ring[c], ring[(c + 1) % 4], spokes[c]) for c in range(4))
    return SpinNetwork(
        name="single-plaquette",
        n_links=8,
        physical=(True,) * 4 + (False,) * 4,
        vertices=vertices,
        boundary={s: 0 for s in spokes},
        faces=(Face(ring=ring, spokes=spokes),),
    )


# ring positions of the two auxiliary (point-splitting) links on a hexagon
HEXAGON_AUX_POSITIONS = (1, 4)


def hexagon_network(outer: tuple[int, ...] | list[int]) -> SpinNetwork:
    """A single hexagonal plaquette with its six outer links frozen.

    Ring links are qudits 0..5; outer spokes are links 6..11, fixed to the
    given twice-spin labels. Ring positions 1 and 4 are the auxiliary links of
    the point splitting, so electric energy lives on positions {0, 2, 3, 5}.
    """
    outer = tuple(int(x) for x in outer)
    if len(outer) != 6:
        raise ValueError("hexagon needs six outer labels")
    ring = tuple(range(6))
    spokes = tuple(range(6, 12))
    vertices = tuple((ring[c], ring[(c + 1) % 6], spokes[c]) for c in range(6))
    physical = tuple(c not in HEXAGON_AUX_POSITIONS for c in range(6)) + (False,) * 6
    return SpinNetwork(
        name="hexagon",
        n_links=12,
        physical=physical,
        vertices=vertices,
        boundary={spokes[c]: outer[c] for c in range(6)},
        faces=(Face(ring=ring, spokes=spokes),),
    )


def torus_link_ids(L: int) -> tuple:
    """Index helpers (h, v, aux) for the point-split L x L torus."""

    def h(x: int, y: int) -> int:
        return (y % L) * L + (x % L)

    def v(x: int, y: int) -> int:
        return L * L + (y % L) * L + (x % L)

    def aux(x: int, y: int) -> int:
        return 2 * L * L + (y % L) * L + (x % L)

    return h, v, aux


def torus_network(L: int) -> SpinNetwork:
    """Point-split square torus: each 4-valent site splits into two trivalent
    vertices joined by an auxiliary link, and each square face becomes a
    hexagon whose ring picks up the two auxiliary links at opposite corners.
    """
    if L < 2:
        raise ValueError("torus needs L >= 2")
    h, v, aux = torus_link_ids(L)
    n_links = 3 * L * L
    physical = tuple(i < 2 * L * L for i in range(n_links))
    vertices = []
    for y in range(L):
        for x in range(L):
            vertices.append((v(x, y), h(x, y), aux(x, y)))
            vertices.append((v(x, y - 1), h(x - 1, y), aux(x, y)))
    faces = []
    for y in range(L):
        for x in range(L):
            ring = (h(x, y), aux(x + 1, y), v(x + 1, y), h(x, y + 1), aux(x, y + 1), v(x, y))
            spokes = (
                v(x + 1, y - 1),
                h(x + 1, y),
                aux(x + 1, y + 1),
                v(x, y + 1),
                h(x - 1, y + 1),
                aux(x, y),
            )
            faces.append(Face(ring=ring, spokes=spokes))
    return SpinNetwork(
        name=f"torus-{L}x{L}",
        n_links=n_links,
        physical=physical,
        vertices=tuple(vertices),
        boundary={},
        faces=tuple(faces),
    )


@dataclass(frozen=True)
class SNBasis:
    """Enumerated gauge-invariant labelings of a network at a fixed level."""

    network: SpinNetwork
    k: int
    states: np.ndarray  # (dim, n_links) twice-spin labels
    index: dict[tuple[int, ...], int]

    @property
    def dim(self) -> int:
        return int(self.states.shape[0])

    def state_index(self, labels) -> int | None:
        return self.index.get(tuple(int(x) for x in labels))


class EmptyBasisError(ValueError):
    """The boundary data admits no gauge-invariant labeling at this level."""


def enumerate_basis(network: SpinNetwork, k: int) -> SNBasis:
    """Deterministic lexicographic enumeration of admissible labelings.

    Backtracks over links in id order, checking each vertex as soon as all
    three of its links are assigned. Boundary links are pinned first; an
    inconsistent boundary yields EmptyBasisError (distinct from a malformed
    network, which raises ValueError at construction).
    """
    n = network.n_links
    for link, tj in network.boundary.items():
        if not 0 <= tj <= k:
            raise EmptyBasisError(f"boundary label {tj} on link {link} exceeds level {k}")

    # assign pinned boundary links first so the walk prunes as early as
    # possible; free links follow in id order, so emitted states stay
    # lexicographic in link id
    order = sorted(network.boundary) + [
        l for l in range(n) if l not in network.boundary
    ]
    rank = {link: r for r, link in enumerate(order)}
    ready: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for triple in network.vertices:
        ready[max(rank[l] for l in triple)].append(triple)

    labels = np.full(n, -1, dtype=np.int64)
    states: list[tuple[int, ...]] = []

    def options(link: int) -> range | tuple[int, ...]:
        if link in network.boundary:
            return (network.boundary[link],)
        return range(k + 1)

    def walk(pos: int) -> None:
        if pos == n:
            states.append(tuple(int(x) for x in labels))
            return
        link = order[pos]
        for tj in options(link):
            labels[link] = tj
            ok = True
            for a, b, c in ready[pos]:
                if not is_admissible(int(labels[a]), int(labels[b]), int(labels[c]), k):
                    ok = False
                    break
            if ok:
                walk(pos + 1)
        labels[link] = -1

    walk(0)
    if not states:
        raise EmptyBasisError(
            f"no admissible labeling of {network.name} at k={k} with the given boundary"
        )
    arr = np.array(states, dtype=np.int64)
    index = {tuple(int(x) for x in row): i for i, row in enumerate(arr)}
    return SNBasis(network=network, k=k, states=arr, index=index)


def electric_energy(tj: int) -> float:
    """Casimir j(j+1) of a twice-spin label."""
    return tj * (tj + 2) / 4.0


def _ring_element(
    spokes: tuple[int, ...],
    ring: tuple[int, ...],
    ring_new: tuple[int, ...],
    tJ: int,
    table: FTable,
) -> float:
    """Closed-ring product of F-symbols threading flux tJ through a face."""
    m = len(ring)
    out = 1.0
    for c in range(m):
        cn = (c + 1) % m
        out *= table.element(spokes[c], ring[c], ring[cn], tJ, ring_new[cn], ring_new[c])
        if out == 0.0:
            return 0.0
    return out


def plaquette_element(
    outer: tuple[int, ...],
    inner: tuple[int, ...],
    inner_new: tuple[int, ...],
    tJ: int,
    table: FTable,
) -> float:
    """Matrix element <inner_new | U^(J) | inner> on a hexagonal plaquette.

    `outer[c]` is the spoke between ring links inner[c] and inner[c+1].
    """
    if not (len(outer) == len(inner) == len(inner_new) == 6):
        raise ValueError("hexagon plaquette takes six outer and six inner labels")
    return _ring_element(tuple(outer), tuple(inner), tuple(inner_new), tJ, table)


def _flux_moves(tj: int, tJ: int, k: int) -> tuple[int, ...]:
    return tuple(t for t in range(abs(tj - tJ), min(tj + tJ, 2 * k - tj - tJ) + 1, 2))


def plaquette_operator(
    basis: SNBasis, face: Face, tJ: int, table: FTable | None = None
) -> scipy.sparse.csr_matrix:
    """Sparse magnetic operator U^(J) of one face in the given basis.

    Real symmetric; the identity when tJ = 0.
    """
    k = basis.k
    if table is None:
        table = FTable(k)
    if tJ == 0:
        return scipy.sparse.identity(basis.dim, format="csr")
    ring = face.ring
    spokes = face.spokes
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    element_cache: dict[tuple, float] = {}
    move_cache = {tj: _flux_moves(tj, tJ, k) for tj in range(k + 1)}
    for col in range(basis.dim):
        state = basis.states[col]
        ring_old = tuple(int(state[l]) for l in ring)
        spoke_vals = tuple(int(state[l]) for l in spokes)
        for ring_new in product(*(move_cache[tj] for tj in ring_old)):
            new_state = state.copy()
            for l, tj in zip(ring, ring_new):
                new_state[l] = tj
            row = basis.index.get(tuple(int(x) for x in new_state))
            if row is None:
                continue
            key = (spoke_vals, ring_old, ring_new)
            val = element_cache.get(key)
            if val is None:
                val = _ring_element(spoke_vals, ring_old, ring_new, tJ, table)
                element_cache[key] = val
            if val != 0.0:
                rows.append(row)
                cols.append(col)
                vals.append(val)
    mat = scipy.sparse.coo_matrix(
        (vals, (rows, cols)), shape=(basis.dim, basis.dim)
    ).tocsr()
    asym = abs(mat - mat.T).max() if mat.nnz else 0.0
    assert asym <= 1e-12, f"plaquette operator not symmetric: {asym}"
    return mat


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Assembled Hamiltonian with its convention tag.

    convention "rescaled": H' = sum_links E(j) - (1/g^4) sum_faces (U + U^T),
    i.e. 2/g^2 times the raw Kogut-Susskind form
    H = (g^2/2) sum E - (1/2 g^2) sum (U + U^T), lattice spacing 1.
    """

    matrix: scipy.sparse.csr_matrix
    basis: SNBasis
    g2: float
    convention: str

    @property
    def dim(self) -> int:
        return self.basis.dim


def electric_diagonal(basis: SNBasis) -> np.ndarray:
    phys = basis.network.physical_links
    return np.array(
        [sum(electric_energy(int(s[l])) for l in phys) for s in basis.states]
    )


def build_hamiltonian(
    basis: SNBasis,
    g2: float,
    convention: str = "rescaled",
    table: FTable | None = None,
) -> HamiltonianMatrix:
    """Electric term on physical links plus U + U^dagger on every face, J = 1/2."""
    if g2 <= 0:
        raise ValueError("coupling g2 must be positive")
    if convention not in ("rescaled", "raw"):
        raise ValueError(f"unknown convention {convention!r}")
    if table is None:
        table = FTable(basis.k)
    diag = electric_diagonal(basis)
    magnetic = scipy.sparse.csr_matrix((basis.dim, basis.dim))
    for face in basis.network.faces:
        u = plaquette_operator(basis, face, 1, table)
        magnetic = magnetic + u + u.T
    if convention == "rescaled":
        mat = scipy.sparse.diags(diag) - magnetic / (g2 * g2)
    else:
        mat = scipy.sparse.diags(diag) * (g2 / 2.0) - magnetic / (2.0 * g2)
    return HamiltonianMatrix(
        matrix=mat.tocsr(), basis=basis, g2=g2, convention=convention
    )


def _fix_eigenvector_signs(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for i in range(out.shape[1]):
        col = out[:, i]
        nz = np.nonzero(np.abs(col) > 1e-11)[0]
        if nz.size and col[nz[0]] < 0:
            out[:, i] = -col
    return out


def diagonalize(
    ham: HamiltonianMatrix, n_states: int = 1, dense_cap: int = DENSE_DIM_CAP
) -> tuple[np.ndarray, np.ndarray]:
    """Lowest eigenpairs, dense symmetric solver, deterministic vector signs."""
    dim = ham.dim
    if not 1 <= n_states <= dim:
        raise ValueError(f"need 1 <= n_states <= {dim}, got {n_states}")
    if dim > dense_cap:
        raise ValueError(f"dimension {dim} exceeds dense cap {dense_cap}")
    dense = ham.matrix.toarray()
    w, vecs = scipy.linalg.eigh(dense)
    return w[:n_states], _fix_eigenvector_signs(vecs[:, :n_states])


def mathieu_oracle(g2: float, n: int, j_cut: int) -> np.ndarray:
    """n-th eigenvector of the unbounded-level single-plaquette matrix,
    truncated at spin j_cut (dimension 2 j_cut + 1).

    Diagonal 4 j(j+1), off-diagonal -2/g^4. Raises if the requested state
    leaks into the truncation edge (tail mass above 1e-12).
    """
    if g2 <= 0:
        raise ValueError("coupling g2 must be positive")
    if j_cut < 1:
        raise ValueError("j_cut must be >= 1")
    dim = 2 * j_cut + 1
    if not 0 <= n < dim:
        raise ValueError(f"state index {n} out of range for dimension {dim}")
    diag = np.array([t * (t + 2.0) for t in range(dim)])
    off = np.full(dim - 1, -2.0 / (g2 * g2))
    w, vecs = scipy.linalg.eigh_tridiagonal(diag, off)
    vec = _fix_eigenvector_signs(vecs[:, [n]])[:, 0]
    tail = float(vec[-1] ** 2 + vec[-2] ** 2)
    if tail > 1e-12:
        raise ValueError(
            f"truncation too small: state {n} has tail mass {tail:.3e} at j_cut={j_cut}"
        )
    return vec


@lru_cache(maxsize=None)
def cached_torus_setup(L: int, k: int) -> tuple:
    """Shared basis and operators for torus brute-force energies.

    Returns (basis, electric diagonal, per-face U^(J) for tJ = 0..k, vacuum index).
    """
    table = FTable(k)
    network = torus_network(L)
    basis = enumerate_basis(network, k)
    diag = electric_diagonal(basis)
    face_ops = tuple(
        tuple(plaquette_operator(basis, face, tJ, table) for tJ in range(k + 1))
        for face in network.faces
    )
    vacuum = basis.state_index((0,) * network.n_links)
    assert vacuum is not None
    return basis, diag, face_ops, vacuum
