import itertools

import numpy as np
import pytest

from qcnn_toric.lattice import (
    StabilizerId,
    StabilizerKind,
    Sublattice,
    build_pooling_schedule,
    build_torus,
    layer_qubit_count,
    logical_operators,
    plaquette_qubits,
    vertex_qubits,
)

SIZES = [(2, 2), (3, 3), (4, 4), (3, 5), (9, 9)]


@pytest.mark.parametrize("l1,l2,n", [(3, 3, 18), (4, 4, 32), (729, 729, 1_062_882)])
def test_qubit_counts(l1, l2, n):
    geom = build_torus(l1, l2)
    assert geom.n_qubits == n
    assert geom.n_qubits == 2 * l1 * l2


def test_three_by_three_has_nine_of_each():
    geom = build_torus(3)
    assert len(geom.stabilizers("plaquette")) == 9
    assert len(geom.stabilizers("vertex")) == 9


@pytest.mark.parametrize("side", [0, 1])
def test_rejects_degenerate_torus(side):
    with pytest.raises(ValueError):
        build_torus(side, 3)
    with pytest.raises(ValueError):
        build_torus(3, side)


@pytest.mark.parametrize("l1,l2", SIZES)
def test_indexing_round_trip(l1, l2):
    geom = build_torus(l1, l2)
    seen = set()
    for sub in Sublattice:
        for r in range(l2):
            for c in range(l1):
                q = geom.qubit(sub, r, c)
                assert geom.locate(q) == (sub, r, c)
                seen.add(q)
    assert seen == set(range(geom.n_qubits))
    assert geom.h(-1, l1) == geom.h(l2 - 1, 0)


@pytest.mark.parametrize("l1,l2", SIZES)
def test_every_qubit_in_two_of_each(l1, l2):
    geom = build_torus(l1, l2)
    for kind in StabilizerKind:
        counts = geom.incidence_matrix(kind).sum(axis=0)
        assert np.all(counts == 2)
        # product of all stabilizers of one kind is the identity
        assert not np.bitwise_xor.reduce(geom.incidence_matrix(kind), axis=0).any()


@pytest.mark.parametrize("l1,l2", [(3, 3), (4, 4), (3, 5), (9, 9)])
def test_plaquettes_commute_with_vertices(l1, l2):
    geom = build_torus(l1, l2)
    shared = geom.incidence_matrix("plaquette").astype(int) @ geom.incidence_matrix("vertex").T
    assert set(np.unique(shared)) <= {0, 2}


def test_all_81_pairs_on_three_by_three():
    geom = build_torus(3)
    pairs = 0
    for p, v in itertools.product(geom.stabilizers("plaquette"), geom.stabilizers("vertex")):
        n = len(set(plaquette_qubits(geom, p)) & set(vertex_qubits(geom, v)))
        assert n in (0, 2)
        pairs += 1
    assert pairs == 81
    origin = len(
        set(plaquette_qubits(geom, StabilizerId(StabilizerKind.PLAQUETTE, 0, 0)))
        & set(vertex_qubits(geom, StabilizerId(StabilizerKind.VERTEX, 0, 0)))
    )
    assert origin == 2


def test_stabilizer_sets_have_four_distinct_qubits():
    geom = build_torus(3)
    for sid in geom.stabilizers("plaquette"):
        assert len(set(plaquette_qubits(geom, sid))) == 4
    for sid in geom.stabilizers("vertex"):
        assert len(set(vertex_qubits(geom, sid))) == 4


def test_stabilizer_coordinates_wrap():
    geom = build_torus(3)
    a = plaquette_qubits(geom, StabilizerId(StabilizerKind.PLAQUETTE, 4, -1))
    b = plaquette_qubits(geom, StabilizerId(StabilizerKind.PLAQUETTE, 1, 2))
    assert a == b


def test_kind_mismatch_rejected():
    geom = build_torus(3)
    with pytest.raises(ValueError):
        plaquette_qubits(geom, StabilizerId(StabilizerKind.VERTEX, 0, 0))
    with pytest.raises(ValueError):
        vertex_qubits(geom, StabilizerId(StabilizerKind.PLAQUETTE, 0, 0))


def _anticommute(x_support, z_support) -> bool:
    return len(set(x_support) & set(z_support)) % 2 == 1


@pytest.mark.parametrize("l1,l2", [(3, 3), (4, 4), (3, 5)])
def test_logical_loops(l1, l2):
    geom = build_torus(l1, l2)
    logic = logical_operators(geom)
    plaq = geom.plaquette_incidence
    vert = geom.vertex_incidence
    for z in (logic.z_vertical, logic.z_horizontal):
        assert all(not _anticommute(p, z) for p in plaq)
    for x in (logic.x_vertical, logic.x_horizontal):
        assert all(not _anticommute(x, v) for v in vert)
    assert _anticommute(logic.x_horizontal, logic.z_vertical)
    assert _anticommute(logic.x_vertical, logic.z_horizontal)
    assert not _anticommute(logic.x_vertical, logic.z_vertical)
    assert not _anticommute(logic.x_horizontal, logic.z_horizontal)


def test_readout_positions_are_on_the_right_sublattices():
    geom = build_torus(4)
    assert all(geom.locate(int(q))[0] is Sublattice.V for q in geom.plaquette_readout.ravel())
    assert all(geom.locate(int(q))[0] is Sublattice.H for q in geom.vertex_readout.ravel())
    assert len(set(geom.plaquette_readout.ravel())) == geom.n_cells


@pytest.mark.parametrize(
    "depth,layer,count", [(7, 0, 9_565_938), (3, 3, 2), (1, 1, 2), (2, 1, 18), (2, 0, 162)]
)
def test_layer_qubit_count(depth, layer, count):
    assert layer_qubit_count(depth, layer) == count


def test_layer_qubit_count_rejects_layer_beyond_depth():
    with pytest.raises(ValueError):
        layer_qubit_count(2, 3)


def test_schedule_depth_one():
    sched = build_pooling_schedule(1, build_torus(3))
    assert sched.targets(0).tolist() == [4]
    assert sched.controls(0).shape == (1, 4)
    assert sched.partners(0).shape == (1, 4, 3)
    assert sched.side(1) == 1
    assert layer_qubit_count(1, 1) == 2


def test_schedule_depth_two_has_nine_targets():
    sched = build_pooling_schedule(2)
    assert len(sched.targets(0)) == 9
    assert len(sched.targets(1)) == 1


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_schedule_invariants(depth):
    sched = build_pooling_schedule(depth)
    for layer in range(depth):
        side = sched.side(layer)
        targets = sched.targets(layer)
        controls = sched.controls(layer)
        partners = sched.partners(layer)
        assert len(targets) * 9 == side * side
        assert len(targets) == sched.side(layer + 1) ** 2
        rows, cols = np.divmod(targets, side)
        assert np.all(rows % 3 == 1) and np.all(cols % 3 == 1)
        if side > 3:
            # no cell neighbours two distinct targets
            assert len(np.unique(controls)) == controls.size
        assert not set(controls.ravel()) & set(targets)
        for j, t in enumerate(targets):
            for k, c in enumerate(controls[j]):
                assert t not in partners[j, k]
                assert len(set(partners[j, k])) == 3


def test_schedule_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_pooling_schedule(0)
    with pytest.raises(ValueError):
        build_pooling_schedule(2, build_torus(3))
    with pytest.raises(ValueError):
        build_pooling_schedule(1).targets(1)


def test_target_qubits_map_into_readouts():
    geom = build_torus(9)
    sched = build_pooling_schedule(2, geom)
    v = sched.target_qubits(geom, 0, "V")
    h = sched.target_qubits(geom, 0, "H")
    assert all(geom.locate(int(q))[0] is Sublattice.V for q in v)
    assert all(geom.locate(int(q))[0] is Sublattice.H for q in h)
    assert len(v) == len(h) == 9
