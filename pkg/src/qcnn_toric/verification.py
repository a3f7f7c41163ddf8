"""Self-checks behind ``qcnn-toric verify``.

Each check yields ``(name, ok, detail)``; nothing here raises on a failed
check so that every result gets reported.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .circuits import build_convolution
from .lattice import build_pooling_schedule, build_torus
from .pauli_frame import PauliFrame, conjugate_through, measurement_flips, readout_flips, syndromes_batch
from .pooling import pipeline_samples
from .stabilizer_sim import check_syndrome_map, logical_frames, verify_convolution_identity

__all__ = ["run_checks", "single_error_outputs"]


def _sides(max_side: int) -> list[int]:
    return [s for s in (3, 4, 9) if s <= max_side] or [3]


def single_error_outputs(depth: int) -> dict[str, np.ndarray]:
    """Per basis, readouts ``(n_qubits, depth + 1)`` for every single-qubit error."""
    geom = build_torus(3**depth)
    schedule = build_pooling_schedule(depth)
    eye = np.eye(geom.n_qubits, dtype=bool)
    zero = np.zeros_like(eye)
    plaq, _ = syndromes_batch(zero, eye, geom)
    _, vert = syndromes_batch(eye, zero, geom)
    return {
        "X": pipeline_samples(plaq.view(np.uint8), schedule),
        "Z": pipeline_samples(vert.view(np.uint8), schedule),
    }


def run_checks(max_side: int = 9) -> Iterator[tuple[str, bool, str]]:
    for side in _sides(max_side):
        geom = build_torus(side)
        conv = build_convolution(geom)
        rep = verify_convolution_identity(geom, conv)
        yield (
            f"identity {side}x{side}",
            rep.ok,
            f"{len(conv)} gates, {rep.n_nonzero} ones, {rep.n_nondeterministic} random",
        )

        frames = logical_frames(geom)
        bad = [name for name, f in frames.items() if not verify_convolution_identity(geom, conv, logical=f)]
        yield f"logical erasure {side}x{side}", not bad, "all four loops erased" if not bad else f"fails: {bad}"

        mismatches = 0
        for q in range(geom.n_qubits):
            for pauli in "XZ":
                frame = PauliFrame.single(geom.n_qubits, q, pauli)
                plaq, vert = syndromes_batch(frame.x_mask, frame.z_mask, geom)
                direct = np.flatnonzero(readout_flips(plaq, vert, geom))
                via_frame = np.flatnonzero(measurement_flips(conjugate_through(frame, conv)))
                via_tab = check_syndrome_map(geom, q, pauli, conv)
                mismatches += not (np.array_equal(direct, via_frame) and np.array_equal(direct, via_tab))
        yield (
            f"syndrome map {side}x{side}",
            mismatches == 0,
            f"{2 * geom.n_qubits} single errors, {mismatches} mismatches",
        )

    for depth in (1, 2):
        if 3**depth > max_side:
            continue
        outs = single_error_outputs(depth)
        worst = min(float(v[:, 1:].min()) for v in outs.values())
        yield f"single-error correction depth {depth}", worst == 1.0, f"min readout over layers >= 1: {worst:g}"
