"""Stabilizer tableau simulator (destabilizer/stabilizer rows with sign bits).

Used as an exact oracle for the convolution circuit at small sizes; every
gate costs O(n) and every measurement O(n^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import (
    CNOT,
    HADAMARD,
    RESET,
    SWAP,
    CircuitOp,
    GateSequence,
    build_convolution,
    build_prep_circuit,
)
from .lattice import LatticeGeometry, StabilizerKind, logical_operators
from .pauli_frame import PauliFrame, measurement_flips, readout_flips, syndromes_batch

__all__ = [
    "Tableau",
    "apply",
    "apply_sequence",
    "measure_all",
    "verify_convolution_identity",
    "check_syndrome_map",
    "IdentityReport",
    "predicted_flips",
    "logical_frames",
    "stabilizer_frame",
]


class Tableau:
    """``n``-qubit stabilizer state, initialised to ``|0...0>``.

    Rows ``0..n-1`` are destabilizers, ``n..2n-1`` stabilizers and row
    ``2n`` is scratch space. ``r`` holds the sign bit of each row.
    """

    def __init__(self, n: int, rng: np.random.Generator | int | None = None) -> None:
        if n < 1:
            raise ValueError(f"need at least one qubit, got {n}")
        self.n = n
        self.x = np.zeros((2 * n + 1, n), dtype=bool)
        self.z = np.zeros((2 * n + 1, n), dtype=bool)
        self.r = np.zeros(2 * n + 1, dtype=bool)
        idx = np.arange(n)
        self.x[idx, idx] = True
        self.z[n + idx, idx] = True
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def copy(self) -> Tableau:
        new = Tableau.__new__(Tableau)
        new.n = self.n
        new.x, new.z, new.r = self.x.copy(), self.z.copy(), self.r.copy()
        new.rng = self.rng
        return new

    # -- gates -------------------------------------------------------------
    def hadamard(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        self.x[:, a], self.z[:, a] = self.z[:, a].copy(), self.x[:, a].copy()

    def cnot(self, a: int, b: int) -> None:
        x, z = self.x, self.z
        self.r ^= x[:, a] & z[:, b] & ~(x[:, b] ^ z[:, a])
        x[:, b] ^= x[:, a]
        z[:, a] ^= z[:, b]

    def swap(self, a: int, b: int) -> None:
        self.x[:, [a, b]] = self.x[:, [b, a]]
        self.z[:, [a, b]] = self.z[:, [b, a]]

    def pauli_x(self, a: int) -> None:
        self.r ^= self.z[:, a]

    def pauli_z(self, a: int) -> None:
        self.r ^= self.x[:, a]

    def apply_frame(self, frame: PauliFrame) -> None:
        """Apply the Pauli string ``frame`` (global phase ignored)."""
        if frame.n_qubits != self.n:
            raise ValueError(f"frame has {frame.n_qubits} qubits, tableau {self.n}")
        for q in np.flatnonzero(frame.x_mask):
            self.pauli_x(q)
        for q in np.flatnonzero(frame.z_mask):
            self.pauli_z(q)

    # -- row algebra -------------------------------------------------------
    def _rowsum(self, hs: np.ndarray, i: int) -> None:
        """Left-multiply rows ``hs`` by row ``i``, tracking signs."""
        if hs.size == 0:
            return
        x1, z1 = self.x[i].astype(np.int8), self.z[i].astype(np.int8)
        x2, z2 = self.x[hs].astype(np.int8), self.z[hs].astype(np.int8)
        # exponent of i picked up qubit-wise when multiplying (x1,z1) into (x2,z2)
        g = np.where(
            (x1 == 1) & (z1 == 1),
            z2 - x2,
            np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
        )
        total = 2 * self.r[hs].astype(np.int64) + 2 * int(self.r[i]) + g.sum(axis=1)
        self.r[hs] = (total % 4) == 2
        self.x[hs] ^= self.x[i]
        self.z[hs] ^= self.z[i]

    def check_symplectic(self) -> bool:
        """Destabilizer i anticommutes only with stabilizer i; all else commute."""
        n = self.n
        x, z = self.x[: 2 * n].astype(np.int64), self.z[: 2 * n].astype(np.int64)
        form = (x @ z.T + z @ x.T) % 2
        expected = np.zeros((2 * n, 2 * n), dtype=np.int64)
        idx = np.arange(n)
        expected[idx, n + idx] = expected[n + idx, idx] = 1
        return bool(np.array_equal(form, expected))

    # -- measurement -------------------------------------------------------
    def measure(self, a: int) -> tuple[int, bool]:
        """Measure Z on qubit ``a``; returns ``(outcome, deterministic)``."""
        n = self.n
        hits = np.flatnonzero(self.x[n : 2 * n, a])
        if hits.size:
            p = n + int(hits[0])
            others = np.flatnonzero(self.x[: 2 * n, a])
            self._rowsum(others[others != p], p)
            self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p], self.z[p], self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, a] = True
            outcome = int(self.rng.integers(2))
            self.r[p] = bool(outcome)
            return outcome, False
        s = 2 * n
        self.x[s] = False
        self.z[s] = False
        self.r[s] = False
        for i in np.flatnonzero(self.x[:n, a]):
            self._rowsum(np.array([s]), int(i) + n)
        return int(self.r[s]), True

    def reset(self, a: int) -> None:
        outcome, _ = self.measure(a)
        if outcome:
            self.pauli_x(a)

    def peek_pauli(self, frame: PauliFrame) -> int:
        """Expectation of a Pauli string: ``+1``/``-1`` if determined, else ``0``.

        Qubits with both bits set carry ``Y``. The state is not disturbed.
        """
        n = self.n
        px = frame.x_mask.astype(np.int64)
        pz = frame.z_mask.astype(np.int64)
        stab_anti = (self.x[n : 2 * n].astype(np.int64) @ pz + self.z[n : 2 * n].astype(np.int64) @ px) % 2
        if stab_anti.any():
            return 0
        destab_anti = (self.x[:n].astype(np.int64) @ pz + self.z[:n].astype(np.int64) @ px) % 2
        s = 2 * n
        saved = self.x[s].copy(), self.z[s].copy(), self.r[s]
        self.x[s] = False
        self.z[s] = False
        self.r[s] = False
        for i in np.flatnonzero(destab_anti):
            self._rowsum(np.array([s]), int(i) + n)
        assert np.array_equal(self.x[s], frame.x_mask) and np.array_equal(self.z[s], frame.z_mask)
        sign = -1 if self.r[s] else 1
        self.x[s], self.z[s], self.r[s] = saved
        return sign


def apply(tab: Tableau, op: CircuitOp) -> Tableau:
    """Apply one gate in place and return the tableau for chaining."""
    if max(op.qubits) >= tab.n:
        raise ValueError(f"{op} exceeds {tab.n} qubits")
    if op.gate == HADAMARD:
        tab.hadamard(*op.qubits)
    elif op.gate == CNOT:
        tab.cnot(*op.qubits)
    elif op.gate == SWAP:
        tab.swap(*op.qubits)
    elif op.gate == RESET:
        tab.reset(*op.qubits)
    else:  # pragma: no cover - CircuitOp validates gate names
        raise ValueError(f"unsupported gate {op.gate}")
    return tab


def apply_sequence(tab: Tableau, seq: GateSequence, *, check: bool = False) -> Tableau:
    """Apply every gate; ``check`` asserts the symplectic form after each one."""
    for op in seq.ops:
        apply(tab, op)
        if check and not tab.check_symplectic():
            raise AssertionError(f"symplectic form broken after {op}")
    return tab


def measure_all(tab: Tableau, rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Z-measure every qubit in order; returns ``(outcomes, deterministic)``."""
    if rng is not None:
        tab.rng = rng
    outcomes = np.zeros(tab.n, dtype=np.uint8)
    determined = np.zeros(tab.n, dtype=bool)
    for q in range(tab.n):
        outcomes[q], determined[q] = tab.measure(q)
    return outcomes, determined


@dataclass
class IdentityReport:
    """Outcome of running ``U_prep`` then ``U_C`` on ``|0...0>``."""

    geometry: tuple[int, int]
    ok: bool
    n_nondeterministic: int
    n_nonzero: int
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def verify_convolution_identity(
    geom: LatticeGeometry,
    convolution: GateSequence | None = None,
    *,
    logical: PauliFrame | None = None,
    seed: int = 0,
) -> IdentityReport:
    """Check that the convolution takes the prepared ground state to ``|0...0>``.

    ``logical`` optionally inserts a Pauli string between preparation and
    convolution; ``convolution`` substitutes a modified circuit.
    """
    conv = build_convolution(geom) if convolution is None else convolution
    tab = Tableau(geom.n_qubits, seed)
    apply_sequence(tab, build_prep_circuit(geom))
    if logical is not None:
        tab.apply_frame(logical)
    apply_sequence(tab, conv)
    outcomes, determined = measure_all(tab)
    n_rand = int(np.count_nonzero(~determined))
    n_one = int(np.count_nonzero(outcomes))
    return IdentityReport((geom.l2, geom.l1), n_rand == 0 and n_one == 0, n_rand, n_one)


def check_syndrome_map(
    geom: LatticeGeometry,
    qubit: int,
    pauli: str,
    convolution: GateSequence | None = None,
    *,
    seed: int = 0,
) -> np.ndarray:
    """Qubits whose measurement flips when a single Pauli precedes the convolution.

    The outcomes must all be deterministic; returned as sorted qubit ids.
    """
    conv = build_convolution(geom) if convolution is None else convolution
    tab = Tableau(geom.n_qubits, seed)
    apply_sequence(tab, build_prep_circuit(geom))
    tab.apply_frame(PauliFrame.single(geom.n_qubits, qubit, pauli))
    apply_sequence(tab, conv)
    outcomes, determined = measure_all(tab)
    if not determined.all():
        raise AssertionError(f"{pauli} on qubit {qubit}: random outcomes at {np.flatnonzero(~determined)}")
    return np.flatnonzero(outcomes)


def predicted_flips(geom: LatticeGeometry, frame: PauliFrame, convolution: GateSequence) -> dict:
    """Flip sets for one frame via the frame path and the direct parity map."""
    from .pauli_frame import conjugate_through

    plaq, vert = syndromes_batch(frame.x_mask, frame.z_mask, geom)
    return {
        "frame": np.flatnonzero(measurement_flips(conjugate_through(frame, convolution))),
        "direct": np.flatnonzero(readout_flips(plaq, vert, geom)),
    }


def logical_frames(geom: LatticeGeometry) -> dict[str, PauliFrame]:
    """The four logical strings as Pauli frames."""
    logic = logical_operators(geom)
    n = geom.n_qubits
    return {
        "z_vertical": PauliFrame.from_support(n, z=logic.z_vertical),
        "z_horizontal": PauliFrame.from_support(n, z=logic.z_horizontal),
        "x_vertical": PauliFrame.from_support(n, x=logic.x_vertical),
        "x_horizontal": PauliFrame.from_support(n, x=logic.x_horizontal),
    }


def stabilizer_frame(geom: LatticeGeometry, kind: StabilizerKind | str, index: int) -> PauliFrame:
    """Plaquette (X-type) or vertex (Z-type) stabilizer as a Pauli frame."""
    kind = StabilizerKind(kind)
    n = geom.n_qubits
    if kind is StabilizerKind.PLAQUETTE:
        return PauliFrame.from_support(n, x=geom.plaquette_incidence[index])
    return PauliFrame.from_support(n, z=geom.vertex_incidence[index])
