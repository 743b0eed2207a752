"""Exact qudit circuits for plaquette evolution at a fixed level.

The magnetic factor of a time step is compiled with no approximation: a fixed
sequence of recoupling moves funnels the plaquette flux onto a single tadpole
link, a spectral basis change diagonalizes the half-flux block there, one
two-qudit phase applies the exponential, and the moves are undone. Electric
phases are diagonal single-qudit gates. The second-order integrator
sandwiches the exact magnetic layers between two electric half-layers.

Registers hold qudits of dimension k + 1 whose computational values are
twice-spin labels; on the torus the qudit ids coincide with the link ids of
`spinnet.torus_network`, on the hexagon with its twelve links (six inner,
six outer). Payload conventions by gate kind:

- "f-move" / "f-prime": one target, concrete-valued controls, payload is the
  (k+1) x (k+1) recoupling block (orthogonal; inverse gates store the
  transpose). The block acts unitarily on the admissible labels of its
  controls and shuttles the inadmissible computational states by an
  order-preserving permutation (identity whenever the old and new admissible
  sets coincide).
- "g": targets (control qudit, moving qudit), payload[J] is the orthogonal
  eigenvector matrix of the half-flux block for tadpole label J.
- "omega-phase": targets (control qudit, moving qudit), payload[J, j] is the
  unit-modulus phase for that label pair (diagonal gate).
- "electric-phase" / "single-qudit-phase": one target, payload is the
  diagonal phase vector.
- lowered kinds ("controlled-increment", "controlled-decrement",
  "ancilla-controlled-unitary", "single-qudit-unitary") come from the
  ancilla expansion of multi-controlled gates.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import logging
import re
from dataclasses import dataclass, field

import numpy as np

from snaq.qalgebra import FTable, is_admissible
from snaq.spinnet import (
    build_hamiltonian,
    electric_energy,
    enumerate_basis,
    hexagon_network,
    plaquette_operator,
    torus_link_ids,
)

logger = logging.getLogger("snaq.circuit")

# amplitude budget for dense simulation (state length times column count)
DENSE_AMPLITUDE_CAP = 1_000_000
# every compiled block must be unitary to this accuracy
BLOCK_TOL = 1e-12

_MOVE_KINDS = ("f-move", "f-prime", "multi-controlled-unitary")
_DIAGONAL_KINDS = ("electric-phase", "single-qudit-phase", "omega-phase")


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    payload: np.ndarray | None = field(default=None, repr=False)
    layer: int = 0


@dataclass(eq=False)
class Circuit:
    """Ordered gate list on a concrete register plus compile metadata."""

    k: int
    g2: float
    tau: float
    lattice: str
    steps: int
    order: int
    dims: tuple[int, ...]
    n_register: int
    n_ancillas: int
    ancilla_dim: int
    n_faces: int
    gates: list[Gate] = field(repr=False, default_factory=list)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))


@dataclass(frozen=True, eq=False)
class SpectralTable:
    """Half-flux blocks, their eigenvector rotations, and eigenvalues.

    blocks[J][j', j] couples loop label j to j' on a tadpole with stem J;
    rotations[J] diagonalizes it (identity off the admissible support);
    omegas[J, j] holds the eigenvalue stored at computational slot j.
    """

    k: int
    blocks: np.ndarray
    rotations: np.ndarray
    omegas: np.ndarray


@dataclass(frozen=True)
class ComplexityReport:
    k: int
    lattice: str
    steps: int
    n_gates: int
    entangling_total: int
    per_unit_cell: float | None
    bound: int
    within_bound: bool | None
    inventory: dict[str, int]
    max_move_tuples: int


# the five hexagon moves: (target link | control slots c1..c4), where the
# block element is F[c1, c2, new; c3, c4, old]. Moves 1-4 retire ring links
# 5, 4, 1, 2; the fifth shares one control twice and leaves a tadpole whose
# stem is link 3 and whose loop is link 0.
HEXAGON_MOVES: tuple[tuple[int, tuple[int, int, int, int]], ...] = (
    (5, (10, 11, 0, 4)),
    (4, (9, 5, 0, 3)),
    (1, (6, 7, 2, 0)),
    (2, (1, 8, 3, 0)),
    (3, (2, 4, 0, 0)),
)
HEXAGON_TADPOLE = (3, 0)
HEXAGON_ELECTRIC = (0, 2, 3, 5)
HEXAGON_QUDITS = 12


@functools.lru_cache(maxsize=None)
def _shared_table(k: int) -> FTable:
    return FTable(k)


@functools.lru_cache(maxsize=None)
def _fmove_block(k: int, c1: int, c2: int, c3: int, c4: int) -> np.ndarray:
    """Full (k+1) x (k+1) orthogonal block of one recoupling move.

    Rows are new labels (admissible with (c1, c2) and (c3, c4)), columns old
    labels (admissible with (c1, c4) and (c3, c2)); the two admissible sets
    have equal size, and the inadmissible complements are matched by an
    order-preserving permutation.
    """
    table = _shared_table(k)
    n = k + 1
    old_set = [
        j
        for j in range(n)
        if is_admissible(c1, c4, j, k) and is_admissible(c3, c2, j, k)
    ]
    new_set = [
        j
        for j in range(n)
        if is_admissible(c1, c2, j, k) and is_admissible(c3, c4, j, k)
    ]
    if len(old_set) != len(new_set):
        raise ArithmeticError(
            f"admissible sets differ for controls {(c1, c2, c3, c4)} at level {k}: "
            f"{old_set} vs {new_set}"
        )
    block = np.zeros((n, n))
    for old in old_set:
        for new in new_set:
            block[new, old] = table.element(c1, c2, new, c3, c4, old)
    old_rest = [j for j in range(n) if j not in old_set]
    new_rest = [j for j in range(n) if j not in new_set]
    for row, col in zip(new_rest, old_rest):
        block[row, col] = 1.0
    defect = np.max(np.abs(block.T @ block - np.eye(n)))
    if defect > BLOCK_TOL:
        raise ArithmeticError(
            f"recoupling block for controls {(c1, c2, c3, c4)} at level {k} "
            f"fails unitarity by {defect:.3e}"
        )
    block.flags.writeable = False
    return block


def fmove_unitary(tc1: int, tc2: int, tc3: int, tc4: int, k: int) -> np.ndarray:
    """Recoupling block for fixed twice-spin controls, completed to a full
    orthogonal matrix on the computational labels 0..k."""
    for tc in (tc1, tc2, tc3, tc4):
        if not isinstance(tc, (int, np.integer)) or not 0 <= tc <= k:
            raise ValueError(f"control label {tc} outside 0..{k}")
    return _fmove_block(k, int(tc1), int(tc2), int(tc3), int(tc4)).copy()


@functools.lru_cache(maxsize=None)
def g_gate(k: int) -> SpectralTable:
    """Spectral data of the half-flux tadpole blocks at every stem label.

    Raises ArithmeticError if any block is asymmetric beyond 1e-12 or has a
    non-contiguous admissible support. Eigenvalues are ascending per stem
    label; eigenvector signs are fixed by the first sizable component.
    """
    table = _shared_table(k)
    n = k + 1
    blocks = np.zeros((n, n, n))
    rotations = np.stack([np.eye(n) for _ in range(n)])
    omegas = np.zeros((n, n))
    for stem in range(n):
        blk = np.zeros((n, n))
        for jp in range(n):
            for j in range(n):
                blk[jp, j] = table.element(stem, j, j, 1, jp, jp)
        asym = float(np.max(np.abs(blk - blk.T)))
        if asym > 1e-12:
            raise ArithmeticError(
                f"half-flux block for stem label {stem} at level {k} "
                f"is asymmetric by {asym:.3e}"
            )
        support = [j for j in range(n) if np.any(np.abs(blk[j]) > 0.0)]
        if support and support != list(range(support[0], support[-1] + 1)):
            raise ArithmeticError(
                f"half-flux support for stem label {stem} at level {k} "
                f"is not contiguous: {support}"
            )
        if support:
            sub = blk[np.ix_(support, support)]
            w, vecs = np.linalg.eigh(sub)
            for i in range(vecs.shape[1]):
                nz = np.nonzero(np.abs(vecs[:, i]) > 1e-11)[0]
                if nz.size and vecs[nz[0], i] < 0:
                    vecs[:, i] = -vecs[:, i]
            omegas[stem, support] = w
            rotations[stem][np.ix_(support, support)] = vecs
        blocks[stem] = blk
    for arr in (blocks, rotations, omegas):
        arr.flags.writeable = False
    return SpectralTable(k=k, blocks=blocks, rotations=rotations, omegas=omegas)


def plaquette_fmove_sequence() -> tuple[tuple[int, tuple[int, int, int, int]], ...]:
    """The five hexagon moves as (target, control slots) pairs."""
    return HEXAGON_MOVES


def _distinct_slots(slots: tuple[int, ...]) -> tuple[int, ...]:
    seen: list[int] = []
    for q in slots:
        if q not in seen:
            seen.append(q)
    return tuple(seen)


def _emit_move(
    k: int,
    target: int,
    slots: tuple[int, int, int, int],
    layer: int,
    dagger: bool = False,
) -> list[Gate]:
    """Concrete gates of one move: one per control assignment whose block is
    not the identity."""
    qudits = _distinct_slots(slots)
    if target in qudits:
        raise ValueError(f"move target {target} collides with its controls {qudits}")
    kind = "f-move" if len(qudits) == 4 else "f-prime"
    n = k + 1
    eye = np.eye(n)
    gates = []
    for vals in itertools.product(range(n), repeat=len(qudits)):
        env = dict(zip(qudits, vals))
        block = _fmove_block(
            k, env[slots[0]], env[slots[1]], env[slots[2]], env[slots[3]]
        )
        if np.max(np.abs(block - eye)) < 1e-14:
            continue
        gates.append(
            Gate(
                kind=kind,
                targets=(target,),
                controls=tuple((q, env[q]) for q in qudits),
                payload=block.T if dagger else block,
                layer=layer,
            )
        )
    return gates


def _plaquette_factor(
    k: int,
    moves: tuple[tuple[int, tuple[int, int, int, int]], ...],
    tadpole: tuple[int, int],
    coeff: float,
    first_layer: int,
) -> tuple[list[Gate], int]:
    """Gates of exp(+i coeff U_face) on one face: moves, inverse rotation,
    phase, rotation, inverse moves."""
    spect = g_gate(k)
    gates: list[Gate] = []
    layer = first_layer
    for target, slots in moves:
        gates.extend(_emit_move(k, target, slots, layer))
        layer += 1
    rot_t = np.ascontiguousarray(spect.rotations.transpose(0, 2, 1))
    gates.append(Gate("g", tadpole, (), rot_t, layer))
    layer += 1
    gates.append(
        Gate("omega-phase", tadpole, (), np.exp(1j * coeff * spect.omegas), layer)
    )
    layer += 1
    gates.append(Gate("g", tadpole, (), spect.rotations, layer))
    layer += 1
    for target, slots in reversed(moves):
        gates.extend(_emit_move(k, target, slots, layer, dagger=True))
        layer += 1
    return gates, layer


def _electric_layer(k: int, links, scale: float, layer: int) -> list[Gate]:
    phases = np.exp(
        -1j * scale * np.array([electric_energy(tj) for tj in range(k + 1)])
    )
    phases.flags.writeable = False
    return [Gate("electric-phase", (int(q),), (), phases, layer) for q in links]


def hexagon_plaquette_circuit(tau: float, g2: float, k: int) -> Circuit:
    """The standalone magnetic factor exp(+i (2 tau / g^2) U_face) on the
    twelve-qudit hexagon register (outer links are controls, never moved)."""
    gates = trotter_plaquette_step(tau, g2, k)
    return Circuit(
        k=k,
        g2=g2,
        tau=tau,
        lattice="hexagon",
        steps=1,
        order=0,
        dims=(k + 1,) * HEXAGON_QUDITS,
        n_register=HEXAGON_QUDITS,
        n_ancillas=0,
        ancilla_dim=0,
        n_faces=1,
        gates=gates,
    )


def trotter_plaquette_step(tau: float, g2: float, k: int) -> list[Gate]:
    """Gate list for exp(+i (2 tau / g^2) U_face) on the hexagon register.

    Exact for every tau: the only tau dependence is the diagonal phase pair,
    so steps compose additively and tau = 0 gives the identity.
    """
    if g2 <= 0:
        raise ValueError("coupling g2 must be positive")
    gates, _ = _plaquette_factor(
        k, HEXAGON_MOVES, HEXAGON_TADPOLE, 2.0 * tau / g2, 0
    )
    return gates


def _parse_torus(lattice: str) -> int:
    m = re.fullmatch(r"(\d+)x(\d+)", lattice)
    if not m:
        raise ValueError(
            f"unsupported lattice {lattice!r}: expected 'hexagon' or 'LxL'"
        )
    lx, ly = int(m.group(1)), int(m.group(2))
    if lx != ly:
        raise ValueError(f"only square tori are supported, got {lattice!r}")
    if lx < 2 or lx % 2:
        raise ValueError("torus side must be even and at least 2")
    return lx


def trotter_step_second_order(
    tau: float, g2: float, k: int, lattice: str = "hexagon"
) -> Circuit:
    """One symmetric step exp(-i (tau/2) H_E) exp(-i tau H_B) exp(-i (tau/2) H_E)
    in the raw coupling convention: electric phases exp(-i (tau/2)(g^2/2) E(j))
    per physical link, and one exact factor exp(+i (tau/g^2) U_face) per face.

    On the torus the faces are processed in two sublattice layers: flip moves
    re-split the vertices of one color so each of its faces becomes a 4-gon,
    which is then reduced by two merges and a shared-control move; all gates
    of one layer act on disjoint targets and commute.
    """
    if g2 <= 0:
        raise ValueError("coupling g2 must be positive")
    scale = 0.5 * tau * 0.5 * g2
    if lattice == "hexagon":
        gates: list[Gate] = []
        layer = 0
        gates += _electric_layer(k, HEXAGON_ELECTRIC, scale, layer)
        layer += 1
        face_gates, layer = _plaquette_factor(
            k, HEXAGON_MOVES, HEXAGON_TADPOLE, tau / g2, layer
        )
        gates += face_gates
        gates += _electric_layer(k, HEXAGON_ELECTRIC, scale, layer)
        return Circuit(
            k=k,
            g2=g2,
            tau=tau,
            lattice="hexagon",
            steps=1,
            order=2,
            dims=(k + 1,) * HEXAGON_QUDITS,
            n_register=HEXAGON_QUDITS,
            n_ancillas=0,
            ancilla_dim=0,
            n_faces=1,
            gates=gates,
        )

    side = _parse_torus(lattice)
    h, v, aux = torus_link_ids(side)
    n_links = 3 * side * side
    spect = g_gate(k)
    rot = spect.rotations
    rot_t = np.ascontiguousarray(rot.transpose(0, 2, 1))
    omega_payload = np.exp(1j * (tau / g2) * spect.omegas)

    gates = []
    layer = 0
    gates += _electric_layer(k, range(2 * side * side), scale, layer)
    layer += 1
    for color in (0, 1):
        # faces with (x+y) % 2 == color; their 4-gon form needs the vertices
        # of the opposite parity re-split
        flip_vertices = [
            (a, b)
            for b in range(side)
            for a in range(side)
            if (a + b) % 2 != color
        ]
        face_geo = []
        for y in range(side):
            for x in range(side):
                if (x + y) % 2 != color:
                    continue
                ring = (h(x, y), v(x + 1, y), h(x, y + 1), v(x, y))
                spokes = (
                    aux(x + 1, y),
                    aux(x + 1, y + 1),
                    aux(x, y + 1),
                    aux(x, y),
                )
                face_geo.append((ring, spokes))
        merge_specs = (
            lambda r, s: (r[1], (s[0], s[1], r[2], r[0])),
            lambda r, s: (r[2], (r[1], s[2], r[3], r[0])),
            lambda r, s: (r[3], (r[2], s[3], r[0], r[0])),
        )

        def flip_move(a: int, b: int) -> tuple[int, tuple[int, int, int, int]]:
            return aux(a, b), (v(a, b), h(a - 1, b), v(a, b - 1), h(a, b))

        for a, b in flip_vertices:
            target, slots = flip_move(a, b)
            gates += _emit_move(k, target, slots, layer)
        layer += 1
        for spec in merge_specs:
            for ring, spokes in face_geo:
                target, slots = spec(ring, spokes)
                gates += _emit_move(k, target, slots, layer)
            layer += 1
        for ring, _ in face_geo:
            gates.append(Gate("g", (ring[3], ring[0]), (), rot_t, layer))
        layer += 1
        for ring, _ in face_geo:
            gates.append(Gate("omega-phase", (ring[3], ring[0]), (), omega_payload, layer))
        layer += 1
        for ring, _ in face_geo:
            gates.append(Gate("g", (ring[3], ring[0]), (), rot, layer))
        layer += 1
        for spec in reversed(merge_specs):
            for ring, spokes in face_geo:
                target, slots = spec(ring, spokes)
                gates += _emit_move(k, target, slots, layer, dagger=True)
            layer += 1
        for a, b in flip_vertices:
            target, slots = flip_move(a, b)
            gates += _emit_move(k, target, slots, layer, dagger=True)
        layer += 1
    gates += _electric_layer(k, range(2 * side * side), scale, layer)
    logger.debug(
        "compiled %dx%d step at level %d: %d gates", side, side, k, len(gates)
    )
    return Circuit(
        k=k,
        g2=g2,
        tau=tau,
        lattice=f"{side}x{side}",
        steps=1,
        order=2,
        dims=(k + 1,) * n_links,
        n_register=n_links,
        n_ancillas=0,
        ancilla_dim=0,
        n_faces=side * side,
        gates=gates,
    )


def compile_evolution(
    tau: float, g2: float, k: int, lattice: str, steps: int = 1
) -> Circuit:
    """steps repetitions of the second-order step (each of size tau)."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    base = trotter_step_second_order(tau, g2, k, lattice)
    if steps == 1:
        return base
    span = max(g.layer for g in base.gates) + 1
    gates = [
        dataclasses.replace(g, layer=g.layer + s * span)
        for s in range(steps)
        for g in base.gates
    ]
    return dataclasses.replace(base, steps=steps, gates=gates)


def fix_qudits(circuit: Circuit, assignments: dict[int, int]) -> Circuit:
    """Substitute fixed computational values for a subset of qudits.

    Controls on fixed qudits are resolved (mismatching gates drop out);
    spectral and phase pairs lose their fixed slot; a fixed qudit must not be
    a moved target. Remaining qudits are renumbered in ascending order.
    """
    nq = len(circuit.dims)
    for q, val in assignments.items():
        if not 0 <= q < nq:
            raise ValueError(f"qudit {q} outside register")
        if not 0 <= val < circuit.dims[q]:
            raise ValueError(f"value {val} outside qudit {q} range")
    keep = [q for q in range(nq) if q not in assignments]
    remap = {q: i for i, q in enumerate(keep)}
    new_gates = []
    for g in circuit.gates:
        drop = False
        controls = []
        for q, val in g.controls:
            if q in assignments:
                if assignments[q] != val:
                    drop = True
                    break
            else:
                controls.append((remap[q], val))
        if drop:
            continue
        controls = tuple(controls)
        kind, targets, payload = g.kind, g.targets, g.payload
        if kind == "g" and targets[0] in assignments:
            payload = payload[assignments[targets[0]]]
            kind, targets = "single-qudit-unitary", (targets[1],)
        elif kind == "omega-phase" and targets[0] in assignments:
            payload = payload[assignments[targets[0]], :]
            kind, targets = "single-qudit-phase", (targets[1],)
        elif kind == "omega-phase" and targets[1] in assignments:
            payload = payload[:, assignments[targets[1]]]
            kind, targets = "single-qudit-phase", (targets[0],)
        if any(t in assignments for t in targets):
            raise ValueError(f"cannot fix moved qudit(s) {targets} of a {kind} gate")
        new_gates.append(
            Gate(kind, tuple(remap[t] for t in targets), controls, payload, g.layer)
        )
    n_anc = circuit.n_ancillas
    return dataclasses.replace(
        circuit,
        dims=tuple(circuit.dims[q] for q in keep),
        n_register=len(keep) - n_anc,
        gates=new_gates,
    )


def _apply_gate(work: np.ndarray, gate: Gate, dims: tuple[int, ...]) -> None:
    nq = len(dims)
    idx: list = [slice(None)] * (nq + 1)
    control_qudits = []
    for q, val in gate.controls:
        idx[q] = val
        control_qudits.append(q)
    sel = tuple(idx)
    sub = work[sel]
    rem = [q for q in range(nq) if q not in control_qudits]
    kind = gate.kind
    if kind in ("electric-phase", "single-qudit-phase"):
        pos = rem.index(gate.targets[0])
        shape = [1] * (len(rem) + 1)
        shape[pos] = gate.payload.shape[0]
        sub *= gate.payload.reshape(shape)
    elif kind == "omega-phase":
        qa, qb = gate.targets
        pa, pb = rem.index(qa), rem.index(qb)
        ph = gate.payload.reshape(dims[qa], dims[qb], *([1] * (len(rem) - 1)))
        sub *= np.moveaxis(ph, (0, 1), (pa, pb))
    elif kind == "g":
        qa, qb = gate.targets
        for stem in range(dims[qa]):
            idx2 = list(idx)
            idx2[qa] = stem
            sub2 = work[tuple(idx2)]
            rem2 = [q for q in rem if q != qa]
            pb = rem2.index(qb)
            moved = np.tensordot(gate.payload[stem], sub2, axes=(1, pb))
            work[tuple(idx2)] = np.moveaxis(moved, 0, pb)
    elif kind in ("controlled-increment", "controlled-decrement"):
        pos = rem.index(gate.targets[0])
        shift = 1 if kind == "controlled-increment" else -1
        work[sel] = np.roll(sub, shift, axis=pos)
    else:
        pos = rem.index(gate.targets[0])
        moved = np.tensordot(gate.payload, sub, axes=(1, pos))
        work[sel] = np.moveaxis(moved, 0, pos)


def dense_simulate(
    circuit: Circuit, state: np.ndarray, cap: int = DENSE_AMPLITUDE_CAP
) -> np.ndarray:
    """Apply the circuit to a state vector or to the columns of a matrix."""
    dims = circuit.dims
    dim = int(np.prod(dims))
    arr = np.asarray(state)
    if arr.ndim not in (1, 2) or arr.shape[0] != dim:
        raise ValueError(f"state must have leading dimension {dim}")
    vec = arr.ndim == 1
    mat = arr.reshape(dim, -1)
    if dim * mat.shape[1] > cap:
        raise ValueError(
            f"dense simulation needs {dim * mat.shape[1]} amplitudes, cap is {cap}"
        )
    work = np.array(mat, dtype=complex).reshape(*dims, mat.shape[1])
    for gate in circuit.gates:
        _apply_gate(work, gate, dims)
    out = work.reshape(dim, mat.shape[1])
    return out[:, 0] if vec else out


def circuit_unitary(circuit: Circuit, cap: int = DENSE_AMPLITUDE_CAP) -> np.ndarray:
    """Full dense unitary (apply to the identity); mind the quadratic cost."""
    dim = circuit.dim
    return dense_simulate(circuit, np.eye(dim, dtype=complex), cap=cap)


def expand_multicontrolled(
    gate: Gate, ancilla: int, ancilla_dim: int
) -> list[Gate]:
    """Exactly 2n+1 singly-controlled gates for an n-controlled block.

    n increments tally the matched controls on the ancilla, the payload fires
    when the tally reads n, and n decrements restore the ancilla to 0 along
    every computational path.
    """
    n = len(gate.controls)
    if n > 4:
        raise ValueError(f"at most four controls supported, got {n}")
    if n == 0:
        return [Gate("single-qudit-unitary", gate.targets, (), gate.payload, gate.layer)]
    if ancilla_dim < n + 1:
        raise ValueError(
            f"ancilla dimension {ancilla_dim} cannot tally {n} controls"
        )
    inc = [
        Gate("controlled-increment", (ancilla,), ((q, val),), None, gate.layer)
        for q, val in gate.controls
    ]
    mid = Gate(
        "ancilla-controlled-unitary",
        gate.targets,
        ((ancilla, n),),
        gate.payload,
        gate.layer,
    )
    dec = [
        Gate("controlled-decrement", (ancilla,), ((q, val),), None, gate.layer)
        for q, val in reversed(gate.controls)
    ]
    return inc + [mid] + dec


def lower_circuit(circuit: Circuit) -> Circuit:
    """Expand every multi-controlled move through one shared tally ancilla."""
    if circuit.n_ancillas:
        raise ValueError("circuit already carries an ancilla")
    max_controls = max(
        (len(g.controls) for g in circuit.gates if g.kind in _MOVE_KINDS),
        default=0,
    )
    anc_dim = max(max_controls + 1, 2)
    anc = len(circuit.dims)
    gates: list[Gate] = []
    for g in circuit.gates:
        if g.kind in _MOVE_KINDS and len(g.controls) >= 2:
            gates.extend(expand_multicontrolled(g, anc, anc_dim))
        else:
            gates.append(g)
    return dataclasses.replace(
        circuit,
        dims=circuit.dims + (anc_dim,),
        n_ancillas=1,
        ancilla_dim=anc_dim,
        gates=gates,
    )


def complexity_bound(k: int) -> int:
    """Worst-case entangling count per unit cell (one face of each color)."""
    n = k + 1
    return 4 + 28 * n**3 + 108 * n**4


def gate_count(circuit: Circuit) -> ComplexityReport:
    """Entangling totals under the 2n+1 expansion rule plus the per-step
    layer inventory.

    Diagonal gates cost nothing; a singly-controlled block counts 1; an
    n-controlled move counts 2n+1. Torus circuits are normalized per unit
    cell (two faces) and checked against the worst-case bound.

    Lowered circuits total identically (each expanded basic gate counts 1)
    but have no per-step layer inventory, since expansions share layers
    with the moves they came from.
    """
    lowered = circuit.n_ancillas > 0
    entangling = 0
    layer_kind: dict[int, str] = {}
    move_tuples: dict[tuple[int, tuple[int, ...]], int] = {}
    for g in circuit.gates:
        if not lowered:
            prev = layer_kind.setdefault(g.layer, g.kind)
            if prev != g.kind:
                raise RuntimeError(f"layer {g.layer} mixes kinds {prev} and {g.kind}")
        if g.kind in _DIAGONAL_KINDS or g.kind == "single-qudit-unitary":
            continue
        if g.kind == "g" or g.kind in (
            "controlled-increment",
            "controlled-decrement",
            "ancilla-controlled-unitary",
            "controlled-unitary",
        ):
            entangling += 1
            continue
        if g.kind in _MOVE_KINDS:
            n = len(g.controls)
            entangling += 1 if n <= 1 else 2 * n + 1
            key = (g.layer, g.targets)
            move_tuples[key] = move_tuples.get(key, 0) + 1
            continue
        raise RuntimeError(f"unknown gate kind {g.kind!r}")
    inventory: dict[str, int] = {}
    for kind in layer_kind.values():
        inventory[kind] = inventory.get(kind, 0) + 1
    if any(count % circuit.steps for count in inventory.values()):
        raise RuntimeError("layers do not divide evenly into steps")
    inventory = {kind: count // circuit.steps for kind, count in inventory.items()}
    unit_cells = circuit.n_faces // 2 if circuit.lattice != "hexagon" else None
    per_cell = entangling / circuit.steps / unit_cells if unit_cells else None
    bound = complexity_bound(circuit.k)
    return ComplexityReport(
        k=circuit.k,
        lattice=circuit.lattice,
        steps=circuit.steps,
        n_gates=len(circuit.gates),
        entangling_total=entangling,
        per_unit_cell=per_cell,
        bound=bound,
        within_bound=None if per_cell is None else bool(per_cell <= bound),
        inventory=inventory,
        max_move_tuples=max(move_tuples.values(), default=0),
    )


def circuit_to_json(circuit: Circuit) -> dict:
    """JSON-ready document with deduplicated payload blocks."""
    payload_refs: dict = {}
    payloads: dict[str, dict] = {}
    gates = []
    for g in circuit.gates:
        ref = None
        if g.payload is not None:
            arr = np.ascontiguousarray(g.payload)
            key = (arr.shape, arr.dtype.str, arr.tobytes())
            ref = payload_refs.get(key)
            if ref is None:
                ref = f"p{len(payload_refs)}"
                payload_refs[key] = ref
                flat = arr.astype(complex).reshape(-1)
                payloads[ref] = {
                    "shape": list(arr.shape),
                    "data": [[float(z.real), float(z.imag)] for z in flat],
                }
        gates.append(
            {
                "kind": g.kind,
                "targets": list(g.targets),
                "controls": [[int(q), int(v)] for q, v in g.controls],
                "payload_ref": ref,
                "layer": int(g.layer),
            }
        )
    return {
        "schema": "snaq-circuit/1",
        "register": {"qudits": circuit.n_register, "dim": circuit.k + 1},
        "ancillas": {"count": circuit.n_ancillas, "dim": circuit.ancilla_dim},
        "gates": gates,
        "payloads": payloads,
        "metadata": {
            "k": circuit.k,
            "g2": circuit.g2,
            "tau": circuit.tau,
            "lattice": circuit.lattice,
            "steps": circuit.steps,
            "order": circuit.order,
            "faces": circuit.n_faces,
        },
    }


def circuit_from_json(data: dict) -> Circuit:
    if data.get("schema") != "snaq-circuit/1":
        raise ValueError("not a circuit document")
    meta = data["metadata"]
    payloads: dict[str, np.ndarray] = {}
    for ref, spec in data["payloads"].items():
        flat = np.array([complex(re_, im) for re_, im in spec["data"]])
        arr = flat.reshape(spec["shape"])
        if not np.any(arr.imag):
            arr = np.ascontiguousarray(arr.real)
        arr.flags.writeable = False
        payloads[ref] = arr
    gates = [
        Gate(
            g["kind"],
            tuple(g["targets"]),
            tuple((int(q), int(v)) for q, v in g["controls"]),
            payloads.get(g["payload_ref"]),
            int(g.get("layer", 0)),
        )
        for g in data["gates"]
    ]
    reg, anc = data["register"], data["ancillas"]
    dims = (reg["dim"],) * reg["qudits"] + ((anc["dim"],) * anc["count"])
    return Circuit(
        k=int(meta["k"]),
        g2=float(meta["g2"]),
        tau=float(meta["tau"]),
        lattice=str(meta["lattice"]),
        steps=int(meta["steps"]),
        order=int(meta.get("order", 2)),
        dims=dims,
        n_register=int(reg["qudits"]),
        n_ancillas=int(anc["count"]),
        ancilla_dim=int(anc["dim"]) if anc["count"] else 0,
        n_faces=int(meta.get("faces", 0)),
        gates=gates,
    )


def _hexagon_valid_columns(k: int, outer: tuple[int, ...]):
    """Computational indices of the admissible hexagon states at fixed outer
    labels, plus the plaquette matrix on that block."""
    net = hexagon_network(outer)
    basis = enumerate_basis(net, k)
    table = _shared_table(k)
    u = plaquette_operator(basis, net.faces[0], 1, table).toarray()
    n = k + 1
    radix = (n,) * 6
    cols_idx = np.array(
        [
            int(np.ravel_multi_index(tuple(int(x) for x in s[:6]), radix))
            for s in basis.states
        ]
    )
    return basis, cols_idx, u


def plaquette_exponential_error(
    k: int, tau: float, g2: float, outer: tuple[int, ...]
) -> float:
    """Max deviation of the compiled magnetic factor from
    exp(+i (2 tau / g^2) U_face) over the admissible block at fixed outer
    labels, leakage into inadmissible states included."""
    outer = tuple(int(x) for x in outer)
    circ = hexagon_plaquette_circuit(tau, g2, k)
    inner = fix_qudits(circ, {6 + i: outer[i] for i in range(6)})
    basis, cols_idx, u = _hexagon_valid_columns(k, outer)
    w, vecs = np.linalg.eigh(u)
    block = (vecs * np.exp(1j * (2.0 * tau / g2) * w)) @ vecs.T
    dim = (k + 1) ** 6
    cols = np.zeros((dim, basis.dim), dtype=complex)
    cols[cols_idx, np.arange(basis.dim)] = 1.0
    out = dense_simulate(inner, cols, cap=max(DENSE_AMPLITUDE_CAP, dim * basis.dim))
    expected = np.zeros_like(out)
    expected[cols_idx, :] = block
    return float(np.max(np.abs(out - expected)))


def step_exponential_error(
    k: int, tau: float, g2: float, outer: tuple[int, ...]
) -> float:
    """Max deviation of one compiled second-order hexagon step from
    exp(-i tau H) in the raw convention, on the admissible block."""
    outer = tuple(int(x) for x in outer)
    circ = trotter_step_second_order(tau, g2, k, "hexagon")
    inner = fix_qudits(circ, {6 + i: outer[i] for i in range(6)})
    net = hexagon_network(outer)
    basis = enumerate_basis(net, k)
    ham = build_hamiltonian(basis, g2, "raw", _shared_table(k)).matrix.toarray()
    w, vecs = np.linalg.eigh(ham)
    block = (vecs * np.exp(-1j * tau * w)) @ vecs.T
    n = k + 1
    radix = (n,) * 6
    cols_idx = np.array(
        [
            int(np.ravel_multi_index(tuple(int(x) for x in s[:6]), radix))
            for s in basis.states
        ]
    )
    dim = n**6
    cols = np.zeros((dim, basis.dim), dtype=complex)
    cols[cols_idx, np.arange(basis.dim)] = 1.0
    out = dense_simulate(inner, cols, cap=max(DENSE_AMPLITUDE_CAP, dim * basis.dim))
    expected = np.zeros_like(out)
    expected[cols_idx, :] = block
    return float(np.max(np.abs(out - expected)))


def tadpole_conjugation_error(k: int, outer: tuple[int, ...]) -> tuple[float, float]:
    """Check that conjugating the plaquette operator by the five-move circuit
    yields the stem-controlled half-flux block form.

    Returns (block deviation on the transformed admissible sector, leakage
    outside it). The transformed sector is read off the post-move vertex
    structure; its size must match the admissible basis, else the moves lost
    or invented states and an ArithmeticError is raised.
    """
    outer = tuple(int(x) for x in outer)
    basis, cols_idx, u = _hexagon_valid_columns(k, outer)
    n = k + 1
    dim = n**6
    all_gates = trotter_plaquette_step(0.0, 1.0, k)
    moves = Circuit(
        k=k, g2=1.0, tau=0.0, lattice="hexagon", steps=1, order=0,
        dims=(n,) * 12, n_register=12, n_ancillas=0, ancilla_dim=0,
        n_faces=1, gates=[g for g in all_gates if g.layer <= 4],
    )
    inner = fix_qudits(moves, {6 + i: outer[i] for i in range(6)})
    u_emb = np.zeros((dim, dim), dtype=complex)
    u_emb[np.ix_(cols_idx, cols_idx)] = u
    # R U R^T with two sweeps: R (R U)^T = R U R^T since U is real symmetric
    half = dense_simulate(inner, u_emb, cap=dim * dim)
    conj = dense_simulate(inner, half.T.copy(), cap=dim * dim)

    o = outer
    spect = g_gate(k)
    radix = (n,) * 6
    t_states = []
    for s in range(dim):
        d = np.unravel_index(s, radix)
        if (
            is_admissible(o[4], o[5], d[5], k)
            and is_admissible(o[3], d[5], d[4], k)
            and is_admissible(o[0], o[1], d[1], k)
            and is_admissible(d[1], o[2], d[2], k)
            and is_admissible(d[2], d[4], d[3], k)
            and is_admissible(d[0], d[0], d[3], k)
        ):
            t_states.append(s)
    if len(t_states) != basis.dim:
        raise ArithmeticError(
            f"transformed sector has {len(t_states)} states, expected {basis.dim}"
        )
    expected = np.zeros((dim, dim))
    for s in t_states:
        d = np.unravel_index(s, radix)
        for new0 in range(n):
            s2 = int(np.ravel_multi_index((new0,) + d[1:], radix))
            expected[s2, s] = spect.blocks[d[3]][new0, d[0]]
    t_mask = np.zeros((dim, dim), dtype=bool)
    t_mask[np.ix_(t_states, t_states)] = True
    block_err = float(np.max(np.abs(conj[t_mask] - expected[t_mask])))
    leakage = float(np.max(np.abs(conj[~t_mask])))
    return block_err, leakage
