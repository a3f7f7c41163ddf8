"""Classical pooling layers and per-layer QCNN readout.

Syndrome bits are stored as ``uint8`` arrays whose last two axes are the
``side x side`` cell grid; any leading axes are sample batches and are
processed in one vectorised pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeGeometry, PoolingSchedule

__all__ = [
    "BASES",
    "SyndromeGrid",
    "LayerOutputs",
    "apply_pooling_layer",
    "pool_bits",
    "layer_output",
    "layer_output_samples",
    "run_pipeline",
    "pipeline_samples",
    "snapshot_to_grid",
]

BASES = ("X", "Z")


@dataclass(frozen=True, eq=False)
class SyndromeGrid:
    """Stabilizer outcomes of one basis; bit 1 marks eigenvalue -1.

    X-basis grids hold plaquettes, Z-basis grids hold vertices.
    """

    basis: str
    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.basis not in BASES:
            raise ValueError(f"basis must be 'X' or 'Z', got {self.basis!r}")
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim < 2:
            raise ValueError(f"expected (..., rows, cols) bits, got shape {bits.shape}")
        object.__setattr__(self, "bits", bits)

    @property
    def side(self) -> int:
        rows, cols = self.bits.shape[-2:]
        if rows != cols:
            raise ValueError(f"grid is {rows}x{cols}, not square")
        return cols


def pool_bits(bits: np.ndarray, schedule: PoolingSchedule, layer: int) -> np.ndarray:
    """One pooling step on raw bits ``(..., s, s) -> (..., s/3, s/3)``.

    Each target picks up the parity of its four controls, then one Toffoli
    term ``c & n`` per control ``c`` and partner ``n``. Controls are never
    targets, so every term reads pre-layer values.
    """
    side = bits.shape[-1]
    if side % 3:
        raise ValueError(f"grid side {side} is not divisible by 3")
    expected = schedule.side(layer)
    if side != expected:
        raise ValueError(f"layer {layer} expects side {expected}, got {side}")
    flat = bits.reshape(*bits.shape[:-2], side * side)
    ctl = flat[..., schedule.controls(layer)]  # (..., T, 4)
    prt = flat[..., schedule.partners(layer)]  # (..., T, 4, 3)
    out = flat[..., schedule.targets(layer)].copy()
    out ^= np.bitwise_xor.reduce(ctl, axis=-1)
    out ^= np.bitwise_xor.reduce((ctl[..., None] & prt).reshape(*ctl.shape[:-1], 12), axis=-1)
    return out.reshape(*bits.shape[:-2], side // 3, side // 3)


def apply_pooling_layer(grid: SyndromeGrid, schedule: PoolingSchedule, layer: int) -> SyndromeGrid:
    return SyndromeGrid(grid.basis, pool_bits(grid.bits, schedule, layer))


def layer_output_samples(bits: np.ndarray) -> np.ndarray:
    """Per-sample readout ``2 * (fraction of zeros) - 1`` over the last two axes."""
    bits = np.asarray(bits)
    if bits.shape[-1] == 0 or bits.shape[-2] == 0:
        raise ValueError("empty grid")
    frac_one = bits.reshape(*bits.shape[:-2], -1).mean(axis=-1, dtype=np.float64)
    return 1.0 - 2.0 * frac_one


def layer_output(grid: SyndromeGrid | np.ndarray) -> float:
    """Readout of a single grid: ``+1`` all stabilizers satisfied, ``~0`` random."""
    bits = grid.bits if isinstance(grid, SyndromeGrid) else np.asarray(grid)
    if bits.ndim != 2:
        raise ValueError(f"expected one (side, side) grid, got shape {bits.shape}")
    return float(layer_output_samples(bits))


def pipeline_samples(bits: np.ndarray, schedule: PoolingSchedule) -> np.ndarray:
    """Per-sample readout at every layer: ``(..., depth + 1)``."""
    outs = [layer_output_samples(bits)]
    for layer in range(schedule.depth):
        bits = pool_bits(bits, schedule, layer)
        outs.append(layer_output_samples(bits))
    return np.stack(outs, axis=-1)


@dataclass
class LayerOutputs:
    """Sample means of the readout per basis and layer.

    ``mean[b][l]``, ``stderr[b][l]`` for ``b`` in ``"X"``, ``"Z"`` and the
    combined product ``"XZ"``; ``n`` is the number of samples.
    """

    depth: int
    n: int
    mean: dict[str, np.ndarray] = field(default_factory=dict)
    stderr: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_samples(cls, per_basis: dict[str, np.ndarray]) -> LayerOutputs:
        """Aggregate ``(n_samples, depth + 1)`` readout arrays per basis.

        The combined entry is the per-layer product of the X and Z means.
        """
        n, width = next(iter(per_basis.values())).shape
        out = cls(depth=width - 1, n=n)
        for basis, samples in per_basis.items():
            out.mean[basis] = samples.mean(axis=0)
            out.stderr[basis] = (
                samples.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(width)
            )
        if "X" in per_basis and "Z" in per_basis:
            mx, mz = out.mean["X"], out.mean["Z"]
            out.mean["XZ"] = mx * mz
            # first-order propagation of the two independent errors
            out.stderr["XZ"] = np.hypot(mz * out.stderr["X"], mx * out.stderr["Z"])
        return out


def run_pipeline(grids: dict[str, SyndromeGrid], schedule: PoolingSchedule) -> LayerOutputs:
    """Pool both bases through every layer and record the readouts.

    Grids may carry a leading sample axis; a single grid counts as one sample.
    """
    per_basis = {}
    for basis, grid in grids.items():
        side = 3**schedule.depth
        if grid.side != side:
            raise ValueError(f"{basis} grid side {grid.side} != 3**{schedule.depth}")
        bits = grid.bits if grid.bits.ndim > 2 else grid.bits[None]
        per_basis[basis] = pipeline_samples(bits.reshape(-1, side, side), schedule)
    return LayerOutputs.from_samples(per_basis)


def snapshot_to_grid(bits: np.ndarray, basis: str, geom: LatticeGeometry) -> SyndromeGrid:
    """Stabilizer values from measurement snapshots in one basis.

    A Z-basis snapshot fixes every vertex parity, an X-basis snapshot every
    plaquette parity. ``bits`` may be ``(n_qubits,)`` or ``(n_samples, n_qubits)``.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[-1] != geom.n_qubits:
        raise ValueError(f"snapshot length {bits.shape[-1]} != {geom.n_qubits} qubits")
    if basis == "Z":
        support = geom.vertex_incidence
    elif basis == "X":
        support = geom.plaquette_incidence
    else:
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    parity = np.bitwise_xor.reduce(bits[..., support], axis=-1)
    return SyndromeGrid(basis, parity.reshape(*bits.shape[:-1], *geom.shape))
