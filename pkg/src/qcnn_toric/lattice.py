"""Periodic toric-code lattice, stabilizer supports and pooling combinatorics.

Conventions
-----------
The torus has ``l1`` cells horizontally (columns) and ``l2`` cells vertically
(rows). Site ``(r, c)`` is the top-left corner of cell ``(r, c)``.

* ``H(r, c)``: horizontal edge from site ``(r, c)`` to site ``(r, c + 1)``.
* ``V(r, c)``: vertical edge from site ``(r, c)`` to site ``(r + 1, c)``.

Flat qubit ids are sublattice-major, then row-major::

    H(r, c) -> r * l1 + c
    V(r, c) -> l1 * l2 + r * l1 + c

Plaquette ``(r, c)`` (X-type, ``A``) is the cell bounded by ``H(r, c)``,
``H(r + 1, c)``, ``V(r, c)`` and ``V(r, c + 1)``. Vertex ``(r, c)`` (Z-type,
``B``) is the star of site ``(r, c)``: ``H(r, c)``, ``H(r, c - 1)``,
``V(r, c)`` and ``V(r - 1, c)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "Sublattice",
    "StabilizerKind",
    "StabilizerId",
    "LatticeGeometry",
    "LogicalOperators",
    "PoolingSchedule",
    "build_torus",
    "plaquette_qubits",
    "vertex_qubits",
    "logical_operators",
    "build_pooling_schedule",
    "layer_qubit_count",
    "NEIGHBOR_OFFSETS",
]

# N, S, W, E on a cell grid (row offset, column offset).
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = ((-1, 0), (1, 0), (0, -1), (0, 1))


class Sublattice(str, enum.Enum):
    H = "H"
    V = "V"


class StabilizerKind(str, enum.Enum):
    PLAQUETTE = "plaquette"
    VERTEX = "vertex"


@dataclass(frozen=True)
class StabilizerId:
    kind: StabilizerKind
    row: int
    col: int


@dataclass(frozen=True)
class LatticeGeometry:
    """Edge-qubit torus of ``l2`` rows by ``l1`` columns of cells."""

    l1: int
    l2: int

    def __post_init__(self) -> None:
        if self.l1 < 2 or self.l2 < 2:
            raise ValueError(f"torus needs l1, l2 >= 2, got ({self.l1}, {self.l2})")

    @property
    def n_qubits(self) -> int:
        return 2 * self.l1 * self.l2

    @property
    def n_cells(self) -> int:
        return self.l1 * self.l2

    @property
    def shape(self) -> tuple[int, int]:
        """Cell-grid shape ``(rows, cols)``."""
        return (self.l2, self.l1)

    def qubit(self, sub: Sublattice | str, row: int, col: int) -> int:
        row %= self.l2
        col %= self.l1
        base = 0 if Sublattice(sub) is Sublattice.H else self.n_cells
        return base + row * self.l1 + col

    def h(self, row: int, col: int) -> int:
        return self.qubit(Sublattice.H, row, col)

    def v(self, row: int, col: int) -> int:
        return self.qubit(Sublattice.V, row, col)

    def locate(self, q: int) -> tuple[Sublattice, int, int]:
        """Inverse of :meth:`qubit`."""
        if not 0 <= q < self.n_qubits:
            raise IndexError(f"qubit {q} out of range for {self.n_qubits} qubits")
        sub = Sublattice.H if q < self.n_cells else Sublattice.V
        r, c = divmod(q % self.n_cells, self.l1)
        return sub, r, c

    def stabilizers(self, kind: StabilizerKind | str) -> list[StabilizerId]:
        kind = StabilizerKind(kind)
        return [StabilizerId(kind, r, c) for r in range(self.l2) for c in range(self.l1)]

    @cached_property
    def plaquette_incidence(self) -> np.ndarray:
        """``(n_cells, 4)`` qubit ids of every plaquette, row-major over cells."""
        return np.array(
            [plaquette_qubits(self, s) for s in self.stabilizers(StabilizerKind.PLAQUETTE)],
            dtype=np.int64,
        )

    @cached_property
    def vertex_incidence(self) -> np.ndarray:
        """``(n_cells, 4)`` qubit ids of every vertex, row-major over sites."""
        return np.array(
            [vertex_qubits(self, s) for s in self.stabilizers(StabilizerKind.VERTEX)],
            dtype=np.int64,
        )

    def incidence_matrix(self, kind: StabilizerKind | str) -> np.ndarray:
        """Dense ``(n_cells, n_qubits)`` 0/1 matrix of stabilizer supports."""
        sets = (
            self.plaquette_incidence
            if StabilizerKind(kind) is StabilizerKind.PLAQUETTE
            else self.vertex_incidence
        )
        mat = np.zeros((self.n_cells, self.n_qubits), dtype=np.uint8)
        np.put_along_axis(mat, sets, 1, axis=1)
        return mat

    # Designated post-convolution measurement positions.
    def plaquette_readout_qubit(self, row: int, col: int) -> int:
        """Vertical-edge qubit carrying plaquette ``(row, col)`` after convolution."""
        return self.v(row, col + 1)

    def vertex_readout_qubit(self, row: int, col: int) -> int:
        """Horizontal-edge qubit carrying vertex ``(row, col)`` after convolution."""
        return self.h(row, col - 1)

    @cached_property
    def plaquette_readout(self) -> np.ndarray:
        """Readout qubit for each plaquette, as an ``(l2, l1)`` array."""
        return np.array(
            [[self.plaquette_readout_qubit(r, c) for c in range(self.l1)] for r in range(self.l2)],
            dtype=np.int64,
        )

    @cached_property
    def vertex_readout(self) -> np.ndarray:
        return np.array(
            [[self.vertex_readout_qubit(r, c) for c in range(self.l1)] for r in range(self.l2)],
            dtype=np.int64,
        )


def build_torus(l1: int, l2: int | None = None) -> LatticeGeometry:
    """Construct an ``l2 x l1`` periodic lattice (square when ``l2`` is omitted)."""
    return LatticeGeometry(l1, l1 if l2 is None else l2)


def plaquette_qubits(geom: LatticeGeometry, sid: StabilizerId) -> tuple[int, int, int, int]:
    """Edges of a plaquette in (N, E, S, W) order."""
    if sid.kind is not StabilizerKind.PLAQUETTE:
        raise ValueError(f"expected a plaquette id, got {sid.kind}")
    r, c = sid.row, sid.col
    return (geom.h(r, c), geom.v(r, c + 1), geom.h(r + 1, c), geom.v(r, c))


def vertex_qubits(geom: LatticeGeometry, sid: StabilizerId) -> tuple[int, int, int, int]:
    """Edges of a star in (N, E, S, W) order."""
    if sid.kind is not StabilizerKind.VERTEX:
        raise ValueError(f"expected a vertex id, got {sid.kind}")
    r, c = sid.row, sid.col
    return (geom.v(r - 1, c), geom.h(r, c), geom.v(r, c), geom.h(r, c - 1))


@dataclass(frozen=True)
class LogicalOperators:
    """Supports of the non-contractible Z-strings (Wilson) and X-strings ('t Hooft).

    ``z_vertical`` and ``x_horizontal`` anticommute, as do ``z_horizontal``
    and ``x_vertical``; the two vertical loops commute with each other.
    """

    z_vertical: tuple[int, ...]
    z_horizontal: tuple[int, ...]
    x_vertical: tuple[int, ...]
    x_horizontal: tuple[int, ...]

    def as_dict(self) -> dict[str, tuple[int, ...]]:
        return {
            "z_vertical": self.z_vertical,
            "z_horizontal": self.z_horizontal,
            "x_vertical": self.x_vertical,
            "x_horizontal": self.x_horizontal,
        }


def logical_operators(geom: LatticeGeometry) -> LogicalOperators:
    """Minimal loops through the origin row and column."""
    return LogicalOperators(
        # dual loop crossing the horizontal edges of column 0
        z_vertical=tuple(geom.h(r, 0) for r in range(geom.l2)),
        # dual loop crossing the vertical edges of row 0
        z_horizontal=tuple(geom.v(0, c) for c in range(geom.l1)),
        # primal loop along column 0
        x_vertical=tuple(geom.v(r, 0) for r in range(geom.l2)),
        # primal loop along row 0
        x_horizontal=tuple(geom.h(0, c) for c in range(geom.l1)),
    )


def layer_qubit_count(depth: int, layer: int) -> int:
    """Qubits alive at pooling layer ``layer`` of a depth-``depth`` QCNN."""
    if depth < 0 or not 0 <= layer <= depth:
        raise ValueError(f"need 0 <= layer <= depth, got layer={layer}, depth={depth}")
    return 2 * 3 ** (2 * (depth - layer))


@dataclass(frozen=True)
class PoolingSchedule:
    """Targets, controls and Toffoli partners of every pooling layer.

    Indices are flat row-major cell indices into the layer's ``side x side``
    syndrome grid; the same schedule serves both sublattices. Targets sit at
    cell ``(1, 1)`` of every 3x3 block.

    ``controls(l)[j]`` are the four nearest neighbours of target ``j`` in
    (N, S, W, E) order and ``partners(l)[j, k]`` the three neighbours of
    control ``k`` other than the target.
    """

    depth: int
    _tables: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...] = field(repr=False)

    def side(self, layer: int) -> int:
        if not 0 <= layer <= self.depth:
            raise ValueError(f"layer {layer} outside 0..{self.depth}")
        return 3 ** (self.depth - layer)

    def _table(self, layer: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not 0 <= layer < self.depth:
            raise ValueError(f"no pooling step from layer {layer} at depth {self.depth}")
        return self._tables[layer]

    def targets(self, layer: int) -> np.ndarray:
        return self._table(layer)[0]

    def controls(self, layer: int) -> np.ndarray:
        return self._table(layer)[1]

    def partners(self, layer: int) -> np.ndarray:
        return self._table(layer)[2]

    def target_qubits(self, geom: LatticeGeometry, layer: int, sub: Sublattice | str) -> np.ndarray:
        """Target ids translated to flat qubit ids of a layer-``layer`` lattice.

        ``geom`` must be the torus of that layer (side ``3**(depth - layer)``).
        """
        s = self.side(layer)
        if geom.shape != (s, s):
            raise ValueError(f"geometry {geom.shape} does not match layer side {s}")
        readout = (
            geom.plaquette_readout if Sublattice(sub) is Sublattice.V else geom.vertex_readout
        )
        return readout.ravel()[self.targets(layer)]


def _layer_table(side: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    def idx(r: int, c: int) -> int:
        return (r % side) * side + (c % side)

    targets, controls, partners = [], [], []
    for tr in range(1, side, 3):
        for tc in range(1, side, 3):
            targets.append(idx(tr, tc))
            ctl, prt = [], []
            for dr, dc in NEIGHBOR_OFFSETS:
                cr, cc = tr + dr, tc + dc
                ctl.append(idx(cr, cc))
                prt.append(
                    [idx(cr + er, cc + ec) for er, ec in NEIGHBOR_OFFSETS if (er, ec) != (-dr, -dc)]
                )
            controls.append(ctl)
            partners.append(prt)
    return (
        np.array(targets, dtype=np.int64),
        np.array(controls, dtype=np.int64),
        np.array(partners, dtype=np.int64),
    )


def build_pooling_schedule(depth: int, geom: LatticeGeometry | None = None) -> PoolingSchedule:
    """Pooling schedule for a ``3**depth`` square torus.

    Passing ``geom`` checks that the lattice really has that side.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    side = 3**depth
    if geom is not None and geom.shape != (side, side):
        raise ValueError(f"lattice {geom.l2}x{geom.l1} is not 3**{depth} = {side} per side")
    tables = tuple(_layer_table(3 ** (depth - layer)) for layer in range(depth))
    return PoolingSchedule(depth, tables)
