import numpy as np
import pytest

from qcnn_toric.circuits import (
    CNOT,
    HADAMARD,
    RESET,
    SWAP,
    CircuitOp,
    GateSequence,
    build_convolution,
    build_prep_circuit,
    cnot,
    dump_sequence,
    h,
    invert_sequence,
    parse_sequence,
    prep_representatives,
    reset,
)
from qcnn_toric.lattice import build_torus
from qcnn_toric.pauli_frame import PauliFrame, conjugate_through, measurement_flips
from qcnn_toric.stabilizer_sim import Tableau, apply_sequence, measure_all, stabilizer_frame


def test_op_validation():
    with pytest.raises(ValueError):
        CircuitOp("T", (0,))
    with pytest.raises(ValueError):
        cnot(1, 1)
    with pytest.raises(ValueError):
        CircuitOp(HADAMARD, (0, 1))
    with pytest.raises(ValueError):
        GateSequence((cnot(0, 5),), 3)
    assert str(cnot(2, 7)) == "CNOT 2 7"


def test_invert_examples():
    seq = GateSequence((cnot(0, 1), h(0)), 2)
    assert invert_sequence(seq).ops == (h(0), cnot(0, 1))
    prep = build_prep_circuit(build_torus(3))
    assert invert_sequence(invert_sequence(prep)) == prep
    with pytest.raises(ValueError):
        invert_sequence(GateSequence((reset(0),), 1))


def test_prep_then_inverse_is_identity():
    geom = build_torus(3)
    prep = build_prep_circuit(geom)
    tab = apply_sequence(Tableau(geom.n_qubits, 0), prep + invert_sequence(prep))
    outcomes, determined = measure_all(tab)
    assert determined.all() and not outcomes.any()


@pytest.mark.parametrize("side", [3, 4, 5])
def test_prep_has_no_reset_and_linear_size(side):
    geom = build_torus(side)
    prep = build_prep_circuit(geom)
    assert prep.count(RESET) == 0
    assert prep.count(HADAMARD) == side * side - 1
    assert len(prep) == 4 * (side * side - 1)


@pytest.mark.parametrize("side", [3, 4, 6])
def test_representatives_untouched_before_their_turn(side):
    geom = build_torus(side)
    reps = prep_representatives(geom)
    assert len({q for _, q in reps}) == len(reps)
    touched = set()
    prep = build_prep_circuit(geom).ops
    i = 0
    for _, rep in reps:
        assert rep not in touched
        assert prep[i] == h(rep)
        for op in prep[i : i + 4]:
            touched.update(op.qubits)
        i += 4


def test_rejects_small_geometry():
    with pytest.raises(ValueError):
        build_prep_circuit(build_torus(2, 3))
    with pytest.raises(ValueError):
        build_convolution(build_torus(3, 2))


@pytest.mark.parametrize("side", [3, 4])
def test_prep_gives_toric_ground_state(side):
    geom = build_torus(side)
    tab = apply_sequence(Tableau(geom.n_qubits, 1), build_prep_circuit(geom), check=True)
    for kind in ("plaquette", "vertex"):
        for i in range(geom.n_cells):
            assert tab.peek_pauli(stabilizer_frame(geom, kind, i)) == 1


def test_convolution_structure():
    geom = build_torus(3)
    conv = build_convolution(geom)
    assert conv.count(RESET) == 2
    assert conv.count(SWAP) == 2
    # resets only in the final stage
    first_reset = next(i for i, op in enumerate(conv) if op.gate == RESET)
    assert all(op.gate == CNOT for op in conv.ops[first_reset + 2 :])
    assert len(conv.ops) - first_reset - 2 == 2 * (geom.n_cells - 1)


@pytest.mark.parametrize("side", [3, 4, 9])
def test_stabilizers_transport_to_readouts(side):
    geom = build_torus(side)
    conv = build_convolution(geom)
    corners = {geom.v(side - 1, 0), geom.h(0, side - 1)}
    for kind, readout in (("plaquette", geom.plaquette_readout), ("vertex", geom.vertex_readout)):
        for i, ro in enumerate(readout.ravel()):
            image = conjugate_through(stabilizer_frame(geom, kind, i), conv)
            assert not image.x_mask.any()
            if ro in corners:
                # parity of the rest of the sublattice, which the fan copies onto the corner
                sub = slice(geom.n_cells, None) if kind == "plaquette" else slice(0, geom.n_cells)
                expect = np.zeros(geom.n_qubits, dtype=bool)
                expect[sub] = True
                expect[ro] = False
                assert np.array_equal(image.z_mask, expect)
            else:
                assert np.flatnonzero(image.z_mask).tolist() == [ro]


def test_translation_covariance_in_bulk():
    geom = build_torus(9)
    conv = build_convolution(geom)

    def flips(q, pauli):
        frame = PauliFrame.single(geom.n_qubits, q, pauli)
        return {geom.locate(int(f)) for f in np.flatnonzero(measurement_flips(conjugate_through(frame, conv)))}

    for pauli in "XZ":
        for sub, r, c in [("H", 4, 3), ("V", 3, 4), ("H", 2, 5)]:
            here = flips(geom.qubit(sub, r, c), pauli)
            there = flips(geom.qubit(sub, r, c + 1), pauli)
            assert len(here) == 2
            assert there == {(s, rr, (cc + 1) % 9) for s, rr, cc in here}


def test_dump_parse_round_trip():
    geom = build_torus(3)
    conv = build_convolution(geom)
    text = dump_sequence(conv)
    assert text.splitlines()[0].split()[0] in {"H", "CNOT", "SWAP", "RESET"}
    assert parse_sequence(text, geom.n_qubits) == conv
    assert parse_sequence("# comment\n\nh 0\ncnot 0 1\n", 2).ops == (h(0), cnot(0, 1))
    with pytest.raises(ValueError, match="line 1"):
        parse_sequence("CNOT 0\n", 2)
