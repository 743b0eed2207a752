"""Spin-network bases, plaquette operators and Hamiltonians."""

from itertools import product

import numpy as np
import pytest

from snaq.qalgebra import FTable, is_admissible
from snaq.spinnet import (
    EmptyBasisError,
    Face,
    SpinNetwork,
    _ring_element,
    build_hamiltonian,
    cached_torus_setup,
    diagonalize,
    electric_diagonal,
    electric_energy,
    enumerate_basis,
    hexagon_network,
    mathieu_oracle,
    plaquette_element,
    plaquette_operator,
    single_plaquette_network,
    torus_network,
)


def corner_triples(face: Face):
    m = len(face.ring)
    return [
        (face.ring[c], face.ring[(c + 1) % m], face.spokes[c]) for c in range(m)
    ]


def hexagon_bruteforce_dim(outer, k: int) -> int:
    count = 0
    for ring in product(range(k + 1), repeat=6):
        if all(
            is_admissible(ring[c], ring[(c + 1) % 6], outer[c], k) for c in range(6)
        ):
            count += 1
    return count


def dense_u(basis, face, tJ, table):
    return plaquette_operator(basis, face, tJ, table).toarray()


# --- network construction ---


def test_face_validation():
    with pytest.raises(ValueError):
        Face(ring=(0, 1, 2), spokes=(3, 4))
    with pytest.raises(ValueError):
        Face(ring=(0, 1, 0), spokes=(2, 3, 4))


def test_network_degree_validation():
    # link 0 appears at three vertices
    with pytest.raises(ValueError):
        SpinNetwork(
            name="bad",
            n_links=4,
            physical=(True,) * 4,
            vertices=((0, 1, 2), (0, 1, 3), (0, 2, 3)),
        )
    # boundary link must have degree one, not two
    with pytest.raises(ValueError):
        SpinNetwork(
            name="bad",
            n_links=3,
            physical=(True,) * 3,
            vertices=((0, 1, 2), (0, 1, 2)),
            boundary={0: 0},
        )


def test_corner_consistency_all_topologies():
    """Every face corner (two ring links plus the spoke) is a network vertex."""
    nets = [
        single_plaquette_network(),
        hexagon_network((0, 0, 0, 0, 0, 0)),
        torus_network(2),
        torus_network(3),
    ]
    for net in nets:
        vertex_sets = {frozenset(t) for t in net.vertices}
        for face in net.faces:
            for corner in corner_triples(face):
                assert frozenset(corner) in vertex_sets, (net.name, corner)


def test_torus_structure():
    for L in (2, 3):
        net = torus_network(L)
        assert net.n_links == 3 * L * L
        assert sum(net.physical) == 2 * L * L
        assert len(net.faces) == L * L
        assert len(net.vertices) == 2 * L * L
        # every link sits on exactly two face rings
        ring_count = [0] * net.n_links
        for face in net.faces:
            for l in face.ring:
                ring_count[l] += 1
        assert all(c == 2 for c in ring_count)
    with pytest.raises(ValueError):
        torus_network(1)


# --- basis enumeration ---


def test_single_plaquette_dims():
    net = single_plaquette_network()
    for k in (1, 2, 3, 5):
        basis = enumerate_basis(net, k)
        assert basis.dim == k + 1
        # trivial spokes force all four ring labels equal
        for i, state in enumerate(basis.states):
            assert tuple(state) == (i, i, i, i, 0, 0, 0, 0)


def test_hexagon_dims_against_bruteforce():
    cases = [
        ((0, 0, 0, 0, 0, 0), 1),
        ((0, 0, 0, 0, 0, 0), 2),
        ((1, 1, 0, 0, 0, 0), 2),
        ((1, 0, 1, 2, 0, 0), 2),
        ((2, 1, 1, 0, 2, 0), 3),
    ]
    for outer, k in cases:
        basis = enumerate_basis(hexagon_network(outer), k)
        assert basis.dim == hexagon_bruteforce_dim(outer, k), (outer, k)
        for state in basis.states:
            assert tuple(state[6:]) == outer
    assert enumerate_basis(hexagon_network((0,) * 6), 1).dim == 2
    assert enumerate_basis(hexagon_network((1, 1, 0, 0, 0, 0)), 2).dim == 4


def test_empty_basis_raises():
    # single odd spoke: parity conflict around the ring
    with pytest.raises(EmptyBasisError):
        enumerate_basis(hexagon_network((1, 0, 0, 0, 0, 0)), 1)
    # boundary label above the level cap
    with pytest.raises(EmptyBasisError):
        enumerate_basis(hexagon_network((5, 0, 0, 0, 0, 0)), 1)


def test_basis_lexicographic_and_indexed():
    basis = enumerate_basis(torus_network(2), 1)
    rows = [tuple(s) for s in basis.states]
    assert rows == sorted(rows)
    assert len(set(rows)) == basis.dim
    for i, row in enumerate(rows):
        assert basis.state_index(row) == i
    assert basis.state_index((1,) * 12) is None or tuple([1] * 12) in basis.index


def test_torus_basis_matches_bruteforce_filter():
    net = torus_network(2)
    basis = enumerate_basis(net, 1)
    expected = set()
    for labels in product((0, 1), repeat=12):
        if all(
            is_admissible(labels[a], labels[b], labels[c], 1)
            for a, b, c in net.vertices
        ):
            expected.add(labels)
    assert {tuple(s) for s in basis.states} == expected
    assert basis.dim == 32


# --- electric term ---


def test_electric_energy_values():
    assert electric_energy(0) == 0.0
    assert electric_energy(1) == 0.75
    assert electric_energy(2) == 2.0
    assert electric_energy(4) == 6.0


def test_electric_diagonal_physical_links_only():
    basis = enumerate_basis(single_plaquette_network(), 2)
    assert np.allclose(electric_diagonal(basis), [0.0, 3.0, 8.0])
    # hexagon auxiliaries at ring positions 1 and 4 carry no electric energy
    hexm = enumerate_basis(hexagon_network((0,) * 6), 1)
    assert np.allclose(electric_diagonal(hexm), [0.0, 3.0])


# --- plaquette operators ---


def test_trivial_flux_is_identity():
    table = FTable(2)
    net = hexagon_network((1, 1, 0, 0, 0, 0))
    basis = enumerate_basis(net, 2)
    u0 = plaquette_operator(basis, net.faces[0], 0, table)
    assert np.allclose(u0.toarray(), np.eye(basis.dim))
    # generic ring formula telescopes to one at zero flux
    for state in basis.states:
        ring = tuple(int(state[l]) for l in net.faces[0].ring)
        spokes = tuple(int(state[l]) for l in net.faces[0].spokes)
        assert _ring_element(spokes, ring, ring, 0, table) == pytest.approx(
            1.0, abs=1e-12
        )


def reversed_ring_element(spokes, ring, ring_new, tJ, table):
    """Same ring product walked with each corner's legs exchanged."""
    m = len(ring)
    out = 1.0
    for c in range(m):
        cn = (c + 1) % m
        out *= table.element(spokes[c], ring[cn], ring[c], tJ, ring_new[c], ring_new[cn])
    return out


def test_reversed_corner_walk_gives_same_operator():
    table = FTable(2)
    for net in (hexagon_network((1, 1, 0, 0, 0, 0)), torus_network(2)):
        basis = enumerate_basis(net, 2)
        face = net.faces[0]
        for tJ in (1, 2):
            u = dense_u(basis, face, tJ, table)
            rev = np.zeros_like(u)
            for col, s in enumerate(basis.states):
                ring = tuple(int(s[l]) for l in face.ring)
                spokes = tuple(int(s[l]) for l in face.spokes)
                for row, t in enumerate(basis.states):
                    if any(
                        s[l] != t[l] for l in range(net.n_links) if l not in face.ring
                    ):
                        continue
                    ring_new = tuple(int(t[l]) for l in face.ring)
                    rev[row, col] = reversed_ring_element(
                        spokes, ring, ring_new, tJ, table
                    )
            assert np.max(np.abs(u - rev)) < 1e-12, (net.name, tJ)


def test_plaquette_operator_symmetric():
    table = FTable(3)
    net = hexagon_network((2, 1, 1, 0, 2, 0))
    basis = enumerate_basis(net, 3)
    for tJ in (1, 2, 3):
        u = dense_u(basis, net.faces[0], tJ, table)
        assert np.max(np.abs(u - u.T)) < 1e-12


def test_plaquette_element_validation():
    table = FTable(1)
    with pytest.raises(ValueError):
        plaquette_element((0, 0, 0), (0, 0, 0), (0, 0, 0), 1, table)
    val = plaquette_element((0,) * 6, (0,) * 6, (1,) * 6, 1, table)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_string_net_fusion_algebra():
    """Closed flux loops multiply by the level-truncated fusion rules."""
    # k=1: half-integer loop squares to the identity
    net = single_plaquette_network()
    basis = enumerate_basis(net, 1)
    table = FTable(1)
    u1 = dense_u(basis, net.faces[0], 1, table)
    assert np.allclose(u1 @ u1, np.eye(2), atol=1e-12)

    # k=2: U1^2 = 1 + U2, U1 U2 = U1, U2^2 = 1
    for net in (single_plaquette_network(), hexagon_network((1, 1, 0, 0, 0, 0))):
        basis = enumerate_basis(net, 2)
        table = FTable(2)
        eye = np.eye(basis.dim)
        u1 = dense_u(basis, net.faces[0], 1, table)
        u2 = dense_u(basis, net.faces[0], 2, table)
        assert np.max(np.abs(u1 @ u1 - (eye + u2))) < 1e-12, net.name
        assert np.max(np.abs(u1 @ u2 - u1)) < 1e-12, net.name
        assert np.max(np.abs(u2 @ u1 - u1)) < 1e-12, net.name
        assert np.max(np.abs(u2 @ u2 - eye)) < 1e-12, net.name


# --- Hamiltonians ---


def test_single_plaquette_hamiltonian_frozen_k1():
    basis = enumerate_basis(single_plaquette_network(), 1)
    ham = build_hamiltonian(basis, g2=1.0)
    assert np.allclose(ham.matrix.toarray(), [[0.0, -2.0], [-2.0, 3.0]], atol=1e-14)
    w, vecs = diagonalize(ham, n_states=2)
    assert np.allclose(w, [-1.0, 4.0], atol=1e-12)
    # sign convention: first sizable entry of each vector is positive
    assert vecs[0, 0] > 0 and vecs[0, 1] > 0


def test_single_plaquette_hamiltonian_k2():
    basis = enumerate_basis(single_plaquette_network(), 2)
    ham = build_hamiltonian(basis, g2=1.0)
    dense = ham.matrix.toarray()
    assert np.allclose(np.diag(dense), [0.0, 3.0, 8.0])
    offdiag = dense - np.diag(np.diag(dense))
    assert np.allclose(offdiag, [[0, -2, 0], [-2, 0, -2], [0, -2, 0]])


def test_hexagon_matches_single_plaquette_at_trivial_boundary():
    """Six-corner ring with trivial spokes telescopes to the four-corner one."""
    for k, g2 in ((1, 1.0), (2, 0.7), (3, 1.3)):
        ham4 = build_hamiltonian(
            enumerate_basis(single_plaquette_network(), k), g2=g2
        )
        ham6 = build_hamiltonian(
            enumerate_basis(hexagon_network((0,) * 6), k), g2=g2
        )
        assert np.allclose(
            ham4.matrix.toarray(), ham6.matrix.toarray(), atol=1e-12
        )


def test_raw_vs_rescaled_convention():
    basis = enumerate_basis(single_plaquette_network(), 2)
    g2 = 1.7
    raw = build_hamiltonian(basis, g2=g2, convention="raw").matrix.toarray()
    rescaled = build_hamiltonian(basis, g2=g2, convention="rescaled").matrix.toarray()
    assert np.allclose(raw, (g2 / 2.0) * rescaled, atol=1e-13)
    with pytest.raises(ValueError):
        build_hamiltonian(basis, g2=g2, convention="other")
    with pytest.raises(ValueError):
        build_hamiltonian(basis, g2=0.0)


def test_torus_hamiltonian_k1():
    basis = enumerate_basis(torus_network(2), 1)
    ham = build_hamiltonian(basis, g2=10.0)
    dense = ham.matrix.toarray()
    assert np.max(np.abs(dense - dense.T)) < 1e-12
    w, vecs = diagonalize(ham, n_states=1)
    assert w[0] < 0.0
    vac = basis.state_index((0,) * 12)
    assert vecs[vac, 0] ** 2 > 0.99
    # far in the electric phase the ground energy approaches the vacuum value
    w_deep, _ = diagonalize(build_hamiltonian(basis, g2=100.0), n_states=1)
    assert -1e-3 < w_deep[0] < 0.0


def test_diagonalize_validation():
    basis = enumerate_basis(single_plaquette_network(), 1)
    ham = build_hamiltonian(basis, g2=1.0)
    with pytest.raises(ValueError):
        diagonalize(ham, n_states=0)
    with pytest.raises(ValueError):
        diagonalize(ham, n_states=5)
    with pytest.raises(ValueError):
        diagonalize(ham, n_states=1, dense_cap=1)


# --- truncated tridiagonal oracle ---


def test_mathieu_oracle_matches_level_hamiltonian():
    """At level k = 2 j_cut the level basis and the truncated tridiagonal
    matrix are the same dimension and the same matrix."""
    for g2, j_cut, n in ((2.0, 3, 0), (2.0, 4, 1), (1.0, 6, 0)):
        k = 2 * j_cut
        basis = enumerate_basis(single_plaquette_network(), k)
        ham = build_hamiltonian(basis, g2=g2)
        _, vecs = diagonalize(ham, n_states=n + 1)
        oracle = mathieu_oracle(g2, n, j_cut)
        assert np.max(np.abs(vecs[:, n] - oracle)) < 1e-12


def test_mathieu_convergence_in_level():
    g2 = 0.8
    basis = enumerate_basis(single_plaquette_network(), 12)
    ham = build_hamiltonian(basis, g2=g2)
    _, vecs = diagonalize(ham, n_states=1)
    oracle = mathieu_oracle(g2, 0, 12)
    padded = np.zeros(oracle.shape)
    padded[: vecs.shape[0]] = vecs[:, 0]
    assert np.max(np.abs(padded - oracle)) < 1e-8


def test_mathieu_oracle_validation():
    with pytest.raises(ValueError):
        mathieu_oracle(0.0, 0, 5)
    with pytest.raises(ValueError):
        mathieu_oracle(1.0, 0, 0)
    with pytest.raises(ValueError):
        mathieu_oracle(1.0, 99, 5)
    # strongly magnetic state leaks into a tiny truncation
    with pytest.raises(ValueError):
        mathieu_oracle(0.1, 0, 2)


def test_cached_torus_setup():
    basis, diag, face_ops, vacuum = cached_torus_setup(2, 1)
    assert basis.dim == 32
    assert diag.shape == (32,)
    assert len(face_ops) == 4 and len(face_ops[0]) == 2
    assert tuple(basis.states[vacuum]) == (0,) * 12
    again = cached_torus_setup(2, 1)
    assert again[0] is basis
