"""Pauli frames: bit-mask Pauli strings, i.i.d. Pauli noise, Clifford conjugation.

Phases are dropped throughout; only which qubits carry an X and/or Z
component matters for Z-basis measurement flips.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import CNOT, HADAMARD, RESET, SWAP, GateSequence
from .lattice import LatticeGeometry

__all__ = [
    "PauliFrame",
    "NoiseModel",
    "sample_noise",
    "sample_noise_batch",
    "conjugate_through",
    "syndromes_direct",
    "syndromes_batch",
    "measurement_flips",
    "readout_flips",
    "sample_rng",
]


@dataclass(frozen=True, eq=False)
class PauliFrame:
    """Pauli string as two boolean masks; ``Y`` is ``x & z``."""

    x_mask: np.ndarray
    z_mask: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x_mask, dtype=bool)
        z = np.asarray(self.z_mask, dtype=bool)
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError(f"mask shapes differ or are not 1-D: {x.shape} vs {z.shape}")
        object.__setattr__(self, "x_mask", x)
        object.__setattr__(self, "z_mask", z)

    @property
    def n_qubits(self) -> int:
        return self.x_mask.size

    @classmethod
    def identity(cls, n: int) -> PauliFrame:
        return cls(np.zeros(n, dtype=bool), np.zeros(n, dtype=bool))

    @classmethod
    def from_support(cls, n: int, *, x=(), z=()) -> PauliFrame:
        xm = np.zeros(n, dtype=bool)
        zm = np.zeros(n, dtype=bool)
        xm[list(x)] = True
        zm[list(z)] = True
        return cls(xm, zm)

    @classmethod
    def single(cls, n: int, q: int, pauli: str) -> PauliFrame:
        pauli = pauli.upper()
        if pauli not in {"X", "Y", "Z"}:
            raise ValueError(f"unknown Pauli {pauli!r}")
        return cls.from_support(
            n, x=[q] if pauli in "XY" else [], z=[q] if pauli in "YZ" else []
        )

    def __mul__(self, other: PauliFrame) -> PauliFrame:
        return PauliFrame(self.x_mask ^ other.x_mask, self.z_mask ^ other.z_mask)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliFrame):
            return NotImplemented
        return np.array_equal(self.x_mask, other.x_mask) and np.array_equal(
            self.z_mask, other.z_mask
        )

    def __repr__(self) -> str:
        return f"PauliFrame({self.label()!r})"

    def label(self) -> str:
        chars = np.array(["I", "X", "Z", "Y"])
        return "".join(chars[self.x_mask.astype(int) + 2 * self.z_mask.astype(int)])

    def commutes_with(self, other: PauliFrame) -> bool:
        overlap = np.count_nonzero(self.x_mask & other.z_mask) + np.count_nonzero(
            self.z_mask & other.x_mask
        )
        return overlap % 2 == 0


@dataclass(frozen=True)
class NoiseModel:
    """Independent X flips with probability ``p_x`` and Z flips with ``p_z`` per qubit."""

    p_x: float = 0.0
    p_z: float = 0.0

    def __post_init__(self) -> None:
        for name, p in (("p_x", self.p_x), ("p_z", self.p_z)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")

    @property
    def p_identity(self) -> float:
        return (1.0 - self.p_x) * (1.0 - self.p_z)


def sample_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based stream for one sample, keyed by ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def sample_noise(model: NoiseModel, geom: LatticeGeometry, rng: np.random.Generator) -> PauliFrame:
    n = geom.n_qubits
    # Z draws first so that a pure-Z model consumes the stream identically.
    z = rng.random(n) < model.p_z if model.p_z > 0 else np.zeros(n, dtype=bool)
    x = rng.random(n) < model.p_x if model.p_x > 0 else np.zeros(n, dtype=bool)
    return PauliFrame(x, z)


def sample_noise_batch(
    model: NoiseModel, geom: LatticeGeometry, rngs
) -> tuple[np.ndarray, np.ndarray]:
    """Noise for many samples, one generator each.

    Returns ``(x, z)`` boolean arrays of shape ``(len(rngs), n_qubits)``;
    row ``i`` equals ``sample_noise(model, geom, rngs[i])``.
    """
    frames = [sample_noise(model, geom, rng) for rng in rngs]
    n = geom.n_qubits
    x = np.stack([f.x_mask for f in frames]) if frames else np.zeros((0, n), dtype=bool)
    z = np.stack([f.z_mask for f in frames]) if frames else np.zeros((0, n), dtype=bool)
    return x, z


def conjugate_through(frame: PauliFrame, seq: GateSequence) -> PauliFrame:
    """Return ``U P U^dagger`` for the gates of ``seq`` applied in order.

    A reset discards whatever Pauli sits on its qubit.
    """
    if frame.n_qubits != seq.n_qubits:
        raise ValueError(f"frame has {frame.n_qubits} qubits, sequence {seq.n_qubits}")
    x = frame.x_mask.copy()
    z = frame.z_mask.copy()
    for op in seq.ops:
        if op.gate == HADAMARD:
            (q,) = op.qubits
            x[q], z[q] = z[q], x[q]
        elif op.gate == CNOT:
            c, t = op.qubits
            x[t] ^= x[c]
            z[c] ^= z[t]
        elif op.gate == SWAP:
            a, b = op.qubits
            x[a], x[b] = x[b], x[a]
            z[a], z[b] = z[b], z[a]
        elif op.gate == RESET:
            (q,) = op.qubits
            x[q] = z[q] = False
        else:  # pragma: no cover - CircuitOp validates gate names
            raise ValueError(f"unsupported gate {op.gate}")
    return PauliFrame(x, z)


def measurement_flips(frame: PauliFrame) -> np.ndarray:
    """Z-basis outcomes flipped by the frame (its X component)."""
    return frame.x_mask.copy()


def syndromes_batch(
    x: np.ndarray, z: np.ndarray, geom: LatticeGeometry
) -> tuple[np.ndarray, np.ndarray]:
    """Plaquette and vertex syndrome grids for stacked frames.

    ``x`` and ``z`` have shape ``(..., n_qubits)``; the result grids have
    shape ``(..., l2, l1)`` with ``True`` marking a ``-1`` stabilizer.
    """
    rows, cols = geom.shape
    lead = z.shape[:-1]
    zh = z[..., : geom.n_cells].reshape(*lead, rows, cols)
    zv = z[..., geom.n_cells :].reshape(*lead, rows, cols)
    xh = x[..., : geom.n_cells].reshape(*lead, rows, cols)
    xv = x[..., geom.n_cells :].reshape(*lead, rows, cols)
    # roll(a, -1)[r] == a[r + 1]; roll(a, 1)[r] == a[r - 1]
    plaq = zh ^ np.roll(zh, -1, axis=-2) ^ zv ^ np.roll(zv, -1, axis=-1)
    vert = xh ^ np.roll(xh, 1, axis=-1) ^ xv ^ np.roll(xv, 1, axis=-2)
    return plaq, vert


def syndromes_direct(frame: PauliFrame, geom: LatticeGeometry):
    """Plaquette (from Z bits) and vertex (from X bits) syndrome grids.

    Returns a pair of :class:`~qcnn_toric.pooling.SyndromeGrid` in the X and
    Z basis respectively.
    """
    from .pooling import SyndromeGrid

    if frame.n_qubits != geom.n_qubits:
        raise ValueError(f"frame has {frame.n_qubits} qubits, lattice {geom.n_qubits}")
    plaq, vert = syndromes_batch(frame.x_mask, frame.z_mask, geom)
    return SyndromeGrid("X", plaq.astype(np.uint8)), SyndromeGrid("Z", vert.astype(np.uint8))


def readout_flips(plaq: np.ndarray, vert: np.ndarray, geom: LatticeGeometry) -> np.ndarray:
    """Place syndrome grids on the convolution's designated readout qubits.

    The inverse view of :func:`syndromes_direct`: the measurement-flip vector
    a frame would produce after the full convolution.
    """
    out = np.zeros(geom.n_qubits, dtype=bool)
    out[geom.plaquette_readout.ravel()] = np.asarray(plaq, dtype=bool).ravel()
    out[geom.vertex_readout.ravel()] = np.asarray(vert, dtype=bool).ravel()
    return out
