"""Toric-code preparation circuit and the first convolution layer as gate lists."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .lattice import LatticeGeometry

__all__ = [
    "HADAMARD",
    "CNOT",
    "SWAP",
    "RESET",
    "CircuitOp",
    "GateSequence",
    "h",
    "cnot",
    "swap",
    "reset",
    "invert_sequence",
    "prep_representatives",
    "build_prep_circuit",
    "build_convolution",
    "dump_sequence",
    "parse_sequence",
]

HADAMARD = "H"
CNOT = "CNOT"
SWAP = "SWAP"
RESET = "RESET"
_ARITY = {HADAMARD: 1, CNOT: 2, SWAP: 2, RESET: 1}


@dataclass(frozen=True)
class CircuitOp:
    gate: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.gate not in _ARITY:
            raise ValueError(f"unknown gate {self.gate!r}")
        if len(self.qubits) != _ARITY[self.gate]:
            raise ValueError(f"{self.gate} takes {_ARITY[self.gate]} qubits, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.gate} on repeated qubit {self.qubits}")
        if min(self.qubits) < 0:
            raise ValueError(f"negative qubit id in {self.qubits}")

    def __str__(self) -> str:
        return " ".join([self.gate, *map(str, self.qubits)])


def h(q: int) -> CircuitOp:
    return CircuitOp(HADAMARD, (q,))


def cnot(control: int, target: int) -> CircuitOp:
    return CircuitOp(CNOT, (control, target))


def swap(a: int, b: int) -> CircuitOp:
    return CircuitOp(SWAP, (a, b))


def reset(q: int) -> CircuitOp:
    return CircuitOp(RESET, (q,))


@dataclass(frozen=True)
class GateSequence:
    """Immutable ordered gate list acting on ``n_qubits`` qubits."""

    ops: tuple[CircuitOp, ...]
    n_qubits: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if max(op.qubits) >= self.n_qubits:
                raise ValueError(f"{op} exceeds {self.n_qubits} qubits")

    def __iter__(self) -> Iterator[CircuitOp]:
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def __add__(self, other: GateSequence) -> GateSequence:
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate sequences on different qubit counts")
        return GateSequence(self.ops + other.ops, self.n_qubits)

    def count(self, gate: str) -> int:
        return sum(op.gate == gate for op in self.ops)

    def without(self, index: int) -> GateSequence:
        """Copy with the gate at ``index`` removed (mutation testing)."""
        ops = list(self.ops)
        del ops[index]
        return GateSequence(tuple(ops), self.n_qubits)


def invert_sequence(seq: GateSequence) -> GateSequence:
    """Adjoint of a reset-free sequence; every gate here is self-inverse."""
    if any(op.gate == RESET for op in seq.ops):
        raise ValueError("cannot invert a sequence containing RESET")
    return GateSequence(tuple(reversed(seq.ops)), seq.n_qubits)


def _check_geometry(geom: LatticeGeometry) -> None:
    if geom.l1 < 3 or geom.l2 < 3:
        raise ValueError(
            f"no valid representative ordering on a {geom.l2}x{geom.l1} torus; need sides >= 3"
        )


def prep_representatives(geom: LatticeGeometry) -> list[tuple[tuple[int, int], int]]:
    """Plaquettes in preparation order with their representative qubits.

    Columns go left to right, rows top to bottom. Interior columns use the
    right vertical edge; the last column uses the bottom horizontal edge
    because its right edges were already entangled by column 0. Plaquette
    ``(l2 - 1, l1 - 1)`` is implied by the product of all others and is not
    prepared.
    """
    _check_geometry(geom)
    order = []
    for c in range(geom.l1):
        for r in range(geom.l2):
            if c < geom.l1 - 1:
                rep = geom.v(r, c + 1)
            elif r < geom.l2 - 1:
                rep = geom.h(r + 1, c)
            else:
                continue
            order.append(((r, c), rep))
    return order


def _plaquette_edges_nesw(geom: LatticeGeometry, r: int, c: int) -> tuple[int, int, int, int]:
    return (geom.h(r, c), geom.v(r, c + 1), geom.h(r + 1, c), geom.v(r, c))


def build_prep_circuit(geom: LatticeGeometry) -> GateSequence:
    """``U_prep``: maps ``|0...0>`` to a toric-code ground state.

    For each plaquette: Hadamard on its representative, then CNOTs from the
    representative onto the other three edges in N, W, S, E order (skipping
    the representative itself).
    """
    ops: list[CircuitOp] = []
    for (r, c), rep in prep_representatives(geom):
        n, e, s, w = _plaquette_edges_nesw(geom, r, c)
        ops.append(h(rep))
        ops.extend(cnot(rep, q) for q in (n, w, s, e) if q != rep)
    return GateSequence(tuple(ops), geom.n_qubits)


def dump_sequence(seq: GateSequence) -> str:
    """One gate per line: ``H q``, ``CNOT c t``, ``SWAP a b``, ``RESET q``."""
    return "".join(f"{op}\n" for op in seq.ops)


def parse_sequence(text: str | Iterable[str], n_qubits: int) -> GateSequence:
    lines = text.splitlines() if isinstance(text, str) else text
    ops = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        gate, *args = line.split()
        try:
            ops.append(CircuitOp(gate.upper(), tuple(int(a) for a in args)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return GateSequence(tuple(ops), n_qubits)


def _heisenberg_z_rows(geom: LatticeGeometry, seq: GateSequence) -> np.ndarray:
    """Z-support of ``seq^dagger Z_q seq`` for every qubit (Z-type images only).

    Rows whose image has an X component are returned with that component
    dropped; callers only use rows known to be Z-type.
    """
    from .pauli_frame import PauliFrame, conjugate_through

    inverse = invert_sequence(seq)
    rows = np.zeros((geom.n_qubits, geom.n_qubits), dtype=bool)
    for q in range(geom.n_qubits):
        rows[q] = conjugate_through(PauliFrame.single(geom.n_qubits, q, "Z"), inverse).z_mask
    return rows


def _gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One solution ``X`` of ``a @ X == b`` over GF(2); free variables are 0."""
    m, n = a.shape
    aug = np.concatenate([a, b.reshape(m, -1)], axis=1).astype(bool)
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hit = np.flatnonzero(aug[row:, col])
        if hit.size == 0:
            continue
        p = row + hit[0]
        aug[[row, p]] = aug[[p, row]]
        others = np.flatnonzero(aug[:, col])
        aug[others[others != row]] ^= aug[row]
        pivots.append(col)
        row += 1
    if aug[row:, n:].any():
        raise ValueError("inconsistent GF(2) system")
    x = np.zeros((n, aug.shape[1] - n), dtype=bool)
    x[pivots] = aug[: len(pivots), n:]
    return x.reshape((n,) + b.shape[1:])


def _row_ops_for(matrix: np.ndarray) -> list[tuple[int, int]]:
    """Row additions ``(dst, src)`` which, applied in order to ``I``, give ``matrix``.

    Gaussian elimination without swaps reduces ``matrix`` to the identity;
    every elementary addition is its own inverse, so replaying the recorded
    additions in reverse rebuilds ``matrix`` from the identity.
    """
    a = matrix.astype(bool).copy()
    n = a.shape[0]
    ops: list[tuple[int, int]] = []

    def add(dst: int, src: int) -> None:
        a[dst] ^= a[src]
        ops.append((dst, src))

    for col in range(n):
        if not a[col, col]:
            below = np.flatnonzero(a[col + 1 :, col])
            if below.size == 0:
                raise ValueError("matrix is singular over GF(2)")
            add(col, col + 1 + below[0])
        for r in np.flatnonzero(a[:, col]):
            if r != col:
                add(int(r), col)
    return ops[::-1]


def _vertex_network(geom: LatticeGeometry, rows: np.ndarray) -> list[CircuitOp]:
    """CNOTs moving every vertex star onto its horizontal-edge readout qubit.

    ``rows`` are the current Z-type Heisenberg images of all qubits. The
    horizontal rows together with the vertical corner's row span every
    vertex star, but the horizontal rows alone need not; a few CNOTs
    controlled on the vertical corner (reset right afterwards) fix the span
    first. The remaining CNOTs act within the horizontal sublattice. The
    horizontal corner keeps whatever completes the basis; it is reset and
    refilled later.
    """
    from .lattice import StabilizerKind

    n = geom.n_cells
    v_corner = geom.v(geom.l2 - 1, 0)
    h_corner = geom.h(0, geom.l1 - 1)
    vert = geom.incidence_matrix(StabilizerKind.VERTEX).astype(bool)
    readout = geom.vertex_readout.ravel()
    keep = readout != h_corner
    basis = np.vstack([rows[:n], rows[v_corner]])
    coeffs = _gf2_solve(basis.T, vert[keep].T).T  # (n - 1) x (n + 1)
    c_h, c_corner = coeffs[:, :n], coeffs[:, n]
    boost = _gf2_solve(c_h, c_corner)
    ops = [cnot(v_corner, int(q)) for q in np.flatnonzero(boost)]

    matrix = np.zeros((n, n), dtype=bool)
    matrix[readout[keep]] = c_h
    for k in range(n):
        matrix[h_corner] = False
        matrix[h_corner, k] = True
        try:
            row_ops = _row_ops_for(matrix)
        except ValueError:
            continue
        network = [cnot(src, dst) for dst, src in row_ops]
        # writes into the corner after its last read are dead: it is reset next
        last_read = max((i for i, op in enumerate(network) if op.qubits[0] == h_corner), default=-1)
        network = [
            op for i, op in enumerate(network) if not (i > last_read and op.qubits[1] == h_corner)
        ]
        return ops + network
    raise ValueError("vertex stars are not reachable from the horizontal sublattice")


def build_convolution(geom: LatticeGeometry) -> GateSequence:
    """``U_C^(0)``: maps stabilizer parities onto single readout qubits.

    Stages, in order:

    1. ``U_prep^dagger`` puts each prepared plaquette parity on its
       representative qubit.
    2. SWAPs across the periodic edge move the last column's horizontal
       representatives onto vertical edges ``V(r, 0)``.
    3. CNOTs onto horizontal edges turn their Z-type images into vertex
       stars on ``H(r, c - 1)``; all but a few are controlled on horizontal
       edges, the rest on the vertical corner.
    4. The corners ``V(l2 - 1, 0)`` and ``H(0, l1 - 1)``, which now hold
       logical loops, are reset and refilled with the parity of every other
       qubit of their sublattice.

    Afterwards ``V(r, c + 1)`` reads plaquette ``(r, c)`` and ``H(r, c - 1)``
    reads vertex ``(r, c)``.
    """
    _check_geometry(geom)
    l1, l2 = geom.l1, geom.l2
    ops = list(invert_sequence(build_prep_circuit(geom)).ops)
    ops.extend(swap(geom.h(r + 1, l1 - 1), geom.v(r, 0)) for r in range(l2 - 1))
    v_corner = geom.v(l2 - 1, 0)
    h_corner = geom.h(0, l1 - 1)
    rows = _heisenberg_z_rows(geom, GateSequence(tuple(ops), geom.n_qubits))
    ops.extend(_vertex_network(geom, rows))
    ops.append(reset(v_corner))
    ops.append(reset(h_corner))
    ops.extend(cnot(geom.v(r, c), v_corner) for r in range(l2) for c in range(l1) if geom.v(r, c) != v_corner)
    ops.extend(cnot(geom.h(r, c), h_corner) for r in range(l2) for c in range(l1) if geom.h(r, c) != h_corner)
    return GateSequence(tuple(ops), geom.n_qubits)
