"""Exact ground states of the toric code in longitudinal/transverse fields.

State vectors index basis states by integers whose bit ``q`` is the
Z-eigenvalue bit of qubit ``q`` (0 for ``+1``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .lattice import LatticeGeometry, logical_operators

__all__ = [
    "FieldParams",
    "SparseHamiltonian",
    "GroundState",
    "SolverError",
    "MAX_QUBITS",
    "build_hamiltonian",
    "toric_reference_state",
    "ground_state",
    "solve_ground_state",
    "sample_snapshots",
    "hadamard_all",
    "multicritical_init",
    "expectation_diagonal",
    "exact_layer_outputs",
    "flip_bits",
]

log = logging.getLogger(__name__)

MAX_QUBITS = 24


@dataclass(frozen=True)
class FieldParams:
    h_x: float = 0.0
    h_z: float = 0.0
    penalty: float = 1.0

    def __post_init__(self) -> None:
        for name in ("h_x", "h_z", "penalty"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.penalty < 0:
            raise ValueError(f"penalty must be >= 0, got {self.penalty}")


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")) -> None:
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _mask(qubits) -> int:
    m = 0
    for q in qubits:
        m |= 1 << int(q)
    return m


def _parity_table(dim: int, mask: int) -> np.ndarray:
    """``(-1)**popcount(i & mask)`` for every basis index ``i``."""
    idx = np.arange(dim, dtype=np.int64) & mask
    par = np.zeros(dim, dtype=np.int64)
    while mask:
        low = mask & -mask
        par ^= (idx & low) != 0
        mask ^= low
    return 1.0 - 2.0 * par


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    """Matrix-free ``-sum A - sum B - h_z sum Z - h_x sum X - penalty (W_Z + W_X)``.

    ``W_Z`` and ``W_X`` are the commuting vertical Wilson and 't Hooft loops.
    """

    geom: LatticeGeometry
    params: FieldParams

    @property
    def n_qubits(self) -> int:
        return self.geom.n_qubits

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @cached_property
    def loop_masks(self) -> tuple[int, int]:
        logic = logical_operators(self.geom)
        return _mask(logic.z_vertical), _mask(logic.x_vertical)

    @cached_property
    def plaquette_masks(self) -> list[int]:
        return [_mask(q) for q in self.geom.plaquette_incidence]

    @cached_property
    def diagonal(self) -> np.ndarray:
        dim, n = self.dim, self.n_qubits
        diag = np.zeros(dim)
        for qs in self.geom.vertex_incidence:
            diag -= _parity_table(dim, _mask(qs))
        if self.params.h_z:
            idx = np.arange(dim, dtype=np.int64)
            n_up = np.zeros(dim)
            for q in range(n):
                n_up += (idx >> q) & 1
            # sum_q Z_q = n - 2 * (number of 1 bits)
            diag -= self.params.h_z * (n - 2 * n_up)
        if self.params.penalty:
            diag -= self.params.penalty * _parity_table(dim, self.loop_masks[0])
        return diag

    def with_params(self, **changes) -> SparseHamiltonian:
        return SparseHamiltonian(self.geom, replace(self.params, **changes))

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi).reshape(-1)
        out = self.diagonal * psi
        for m in self.plaquette_masks:
            out -= flip_bits(psi, m, self.n_qubits)
        if self.params.h_x:
            for q in range(self.n_qubits):
                out -= self.params.h_x * flip_bits(psi, 1 << q, self.n_qubits)
        if self.params.penalty:
            out -= self.params.penalty * flip_bits(psi, self.loop_masks[1], self.n_qubits)
        return out

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.matvec, dtype=np.float64)

    def energy(self, psi: np.ndarray) -> float:
        return float(np.vdot(psi, self.matvec(psi)).real / np.vdot(psi, psi).real)

    def residual(self, psi: np.ndarray) -> float:
        psi = psi / np.linalg.norm(psi)
        hpsi = self.matvec(psi)
        return float(np.linalg.norm(hpsi - np.vdot(psi, hpsi).real * psi))


def flip_bits(psi: np.ndarray, mask: int, n_qubits: int) -> np.ndarray:
    """``psi[i ^ mask]`` for all ``i`` (X on every qubit in ``mask``)."""
    axes = tuple(n_qubits - 1 - q for q in range(n_qubits) if mask >> q & 1)
    return np.flip(psi.reshape((2,) * n_qubits), axis=axes).reshape(-1)


def build_hamiltonian(
    geom: LatticeGeometry, params: FieldParams, *, max_qubits: int = MAX_QUBITS
) -> SparseHamiltonian:
    if geom.n_qubits > max_qubits:
        raise ValueError(
            f"{geom.n_qubits} qubits exceed the cap of {max_qubits} (2**n amplitudes)"
        )
    return SparseHamiltonian(geom, params)


def toric_reference_state(geom: LatticeGeometry) -> np.ndarray:
    """Toric-code ground state with both vertical loops at ``+1``.

    Built by projecting ``|0...0>`` onto every plaquette and the 't Hooft
    loop; the Z-loops are already ``+1`` on ``|0...0>``.
    """
    n = geom.n_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceed the cap of {MAX_QUBITS}")
    psi = np.zeros(1 << n)
    psi[0] = 1.0
    logic = logical_operators(geom)
    for m in [*(_mask(q) for q in geom.plaquette_incidence), _mask(logic.x_vertical)]:
        psi = 0.5 * (psi + flip_bits(psi, m, n))
    return psi / np.linalg.norm(psi)


@dataclass
class GroundState:
    psi: np.ndarray
    energy: float
    residual: float
    params: FieldParams
    stages: int = 1


def ground_state(
    ham: SparseHamiltonian,
    tol: float = 1e-10,
    v0: np.ndarray | None = None,
    *,
    maxiter: int | None = None,
) -> GroundState:
    """Lowest eigenvector of ``ham`` by implicitly restarted Lanczos.

    A start vector that is already an eigenvector within ``tol`` is
    returned as is (Lanczos breaks down on exact eigenvectors).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if v0 is not None:
        v0 = np.asarray(v0, dtype=np.float64) / np.linalg.norm(v0)
        res = ham.residual(v0)
        if res < tol:
            return GroundState(v0, ham.energy(v0), res, ham.params)
    try:
        vals, vecs = eigsh(
            ham.as_linear_operator(), k=1, which="SA", v0=v0, tol=tol * 1e-2, maxiter=maxiter
        )
    except ArpackNoConvergence as exc:
        vecs = np.asarray(exc.eigenvectors)
        res = ham.residual(vecs[:, 0]) if vecs.ndim == 2 and vecs.shape[1] else float("nan")
        raise SolverError("Lanczos did not converge", res) from None
    psi = vecs[:, 0]
    # fix the arbitrary sign so repeated solves agree bit for bit
    k = int(np.argmax(np.abs(psi)))
    psi = psi * np.sign(psi[k]) / np.linalg.norm(psi)
    res = ham.residual(psi)
    if res > tol:
        raise SolverError("Lanczos residual above tolerance", res)
    return GroundState(psi, float(vals[0]), res, ham.params)


def solve_ground_state(
    geom: LatticeGeometry,
    params: FieldParams,
    tol: float = 1e-10,
    *,
    v0: np.ndarray | None = None,
    max_qubits: int = MAX_QUBITS,
) -> GroundState:
    """Two-stage solve: with the loop penalty, then without it, warm-started.

    The penalised stage picks the ``+1`` eigenstate of both vertical loops
    out of the degenerate manifold; the second stage relaxes it to the
    ground state of the bare Hamiltonian.
    """
    ham = build_hamiltonian(geom, params, max_qubits=max_qubits)
    start = toric_reference_state(geom) if v0 is None else v0
    if params.penalty == 0:
        return ground_state(ham, tol, start)
    first = ground_state(ham, tol, start)
    second = ground_state(ham.with_params(penalty=0.0), tol, first.psi)
    second.stages = 2
    log.debug("ground state %s: E=%.12f res=%.2e", params, second.energy, second.residual)
    return second


def hadamard_all(psi: np.ndarray, n_qubits: int) -> np.ndarray:
    """Apply a Hadamard to every qubit (Walsh-Hadamard transform)."""
    out = np.array(psi, dtype=np.float64, copy=True)
    for q in range(n_qubits):
        view = out.reshape(-1, 2, 1 << q)
        a, b = view[:, 0, :].copy(), view[:, 1, :].copy()
        view[:, 0, :] = a + b
        view[:, 1, :] = a - b
    return out / np.sqrt(2.0) ** n_qubits


def sample_snapshots(
    psi: np.ndarray, basis: str, n: int, rng: np.random.Generator, n_qubits: int | None = None
) -> np.ndarray:
    """Draw ``n`` measurement snapshots of every qubit in one basis.

    Returns ``(n, n_qubits)`` uint8; in the X basis bit 1 means ``X = -1``.
    """
    psi = np.asarray(psi)
    if n_qubits is None:
        n_qubits = int(psi.size).bit_length() - 1
    if psi.size != 1 << n_qubits:
        raise ValueError(f"state of length {psi.size} is not 2**{n_qubits}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalised (norm {norm})")
    if basis == "X":
        psi = hadamard_all(psi, n_qubits)
    elif basis != "Z":
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    cdf = np.cumsum(np.abs(psi) ** 2)
    draws = rng.random(n) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, draws, side="right"), cdf.size - 1)
    return ((idx[:, None] >> np.arange(n_qubits)) & 1).astype(np.uint8)


def expectation_diagonal(psi: np.ndarray, qubits, n_qubits: int, basis: str = "Z") -> float:
    """``<psi| P |psi>`` for ``P`` a product of Z (or X) over ``qubits``."""
    if basis == "X":
        psi = hadamard_all(psi, n_qubits)
    return float(np.sum(np.abs(psi) ** 2 * _parity_table(psi.size, _mask(qubits))))


def exact_layer_outputs(psi: np.ndarray, basis: str, geom: LatticeGeometry, schedule) -> np.ndarray:
    """Sampling-free expectation of every layer readout in one basis.

    Pools the stabilizer grid of every basis state and weights it by its
    probability; memory is ``2**n * n`` bytes, so only for small tori.
    """
    from .pooling import pipeline_samples, snapshot_to_grid

    n = geom.n_qubits
    if basis == "X":
        psi = hadamard_all(psi, n)
    elif basis != "Z":
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    probs = np.abs(psi) ** 2
    idx = np.arange(probs.size, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    outs = pipeline_samples(snapshot_to_grid(bits, basis, geom).bits, schedule)
    return probs @ outs


def multicritical_init(h: float, delta: float = 0.05, penalty: float = 1.0):
    """Field parameters for the two-stage solve on the ``h_x = h_z`` line.

    Stage one tilts the fields to ``(h - delta, h + delta)`` to pick one
    branch; stage two sits on the self-dual line and is warm-started from
    stage one.
    """
    if h < 0:
        raise ValueError(f"h must be >= 0, got {h}")
    if delta == 0:
        raise ValueError("delta = 0 leaves the degenerate branch choice undefined")
    return (
        FieldParams(h_x=h - delta, h_z=h + delta, penalty=penalty),
        FieldParams(h_x=h, h_z=h, penalty=0.0),
    )
