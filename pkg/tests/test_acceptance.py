"""End-to-end acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion.
"""

import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.sparse.linalg import eigsh
from scipy.stats import ks_2samp

from qcnn_toric.circuits import build_convolution
from qcnn_toric.groundstate import FieldParams, build_hamiltonian, expectation_diagonal, solve_ground_state
from qcnn_toric.harness import (
    ExperimentConfig,
    NoCrossingError,
    estimate_threshold,
    final_layer_curves,
    noise_point_samples,
    run_field_sweep,
    run_noise_sweep,
)
from qcnn_toric.lattice import build_pooling_schedule, build_torus, logical_operators
from qcnn_toric.pauli_frame import NoiseModel, PauliFrame, conjugate_through, measurement_flips, readout_flips, syndromes_batch
from qcnn_toric.pooling import pipeline_samples
from qcnn_toric.stabilizer_sim import check_syndrome_map, logical_frames, verify_convolution_identity
from qcnn_toric.verification import single_error_outputs

pytestmark = pytest.mark.slow

SEED = 2024
THRESHOLD_GRID = [round(0.015 + 0.0015 * i, 6) for i in range(11)]
FIELD_GRID = [round(0.1 * i, 6) for i in range(11)] + [2.0]


def test_criterion_1_circuit_identity(criterion):
    start = time.perf_counter()
    reports = {side: verify_convolution_identity(build_torus(side)) for side in (3, 9)}
    elapsed = time.perf_counter() - start
    ok = all(reports.values()) and elapsed < 60
    detail = ", ".join(
        f"{s}x{s} ones={r.n_nonzero} random={r.n_nondeterministic}" for s, r in reports.items()
    )
    criterion("criterion 1", ok, f"{detail}, {elapsed:.1f}s")


def test_criterion_2_syndrome_map(criterion):
    geom = build_torus(9)
    conv = build_convolution(geom)
    mismatches = 0
    for q in range(geom.n_qubits):
        for pauli in "XZ":
            frame = PauliFrame.single(geom.n_qubits, q, pauli)
            plaq, vert = syndromes_batch(frame.x_mask, frame.z_mask, geom)
            direct = np.flatnonzero(readout_flips(plaq, vert, geom))
            via_frame = np.flatnonzero(measurement_flips(conjugate_through(frame, conv)))
            via_tableau = check_syndrome_map(geom, q, pauli, conv)
            if not (np.array_equal(direct, via_frame) and np.array_equal(direct, via_tableau)):
                mismatches += 1
    criterion("criterion 2", mismatches == 0, f"{2 * geom.n_qubits} cases, {mismatches} mismatches")


def test_criterion_3_logical_erasure(criterion):
    mismatches = []
    for side in (3, 9):
        geom = build_torus(side)
        conv = build_convolution(geom)
        for name, frame in logical_frames(geom).items():
            if not verify_convolution_identity(geom, conv, logical=frame):
                mismatches.append(f"{name}@{side}")
    criterion("criterion 3", not mismatches, f"8 cases, mismatches: {mismatches or 0}")


def test_criterion_4_single_error_correction(criterion):
    outs = single_error_outputs(2)
    worst = min(float(v[:, 1:].min()) for v in outs.values())
    cases = sum(len(v) for v in outs.values())
    criterion("criterion 4", worst == 1.0, f"{cases} single errors, min M over layers >= 1 = {worst:g}")


def test_criterion_5_noise_threshold(criterion):
    runs = {}
    for depth in (3, 4, 5):
        cfg = ExperimentConfig(
            mode="noise-sweep", depth=depth, grid=THRESHOLD_GRID, samples=2000, seed=SEED
        )
        runs[depth] = run_noise_sweep(cfg)
    curves = final_layer_curves(runs)
    finals = {d: np.round(curves.curve(d, "X")[1], 3).tolist() for d in runs}
    try:
        est = estimate_threshold(curves, basis="X")
    except NoCrossingError as exc:
        criterion("criterion 5", False, f"{exc}; final-layer X outputs by depth: {finals}")
        return
    ok = all(abs(c - 0.0228) <= 0.004 for c in est.pairwise.values())
    criterion("criterion 5", ok, f"crossings {est.pairwise}, mean {est.crossing:.4f}")


def test_criterion_6_endpoints(criterion):
    clean = run_noise_sweep(
        ExperimentConfig(mode="noise-sweep", depth=3, grid=[0.0], samples=2000, seed=SEED)
    )
    exact_one = all(r.mean == 1.0 for r in clean.rows)
    rng = np.random.default_rng(SEED)
    n = 2000
    sched = build_pooling_schedule(3)
    worst = 0.0
    for _ in ("X", "Z"):
        bits = (rng.random((n, 27, 27)) < 0.5).astype(np.uint8)
        outs = pipeline_samples(bits, sched).mean(axis=0)
        for layer, m in enumerate(outs):
            bound = 4 / np.sqrt(sched.side(layer) ** 2 * n)
            worst = max(worst, abs(m) / bound)
    criterion("criterion 6", exact_one and worst < 1, f"p=0 exact: {exact_one}; max |M|/bound = {worst:.2f}")


def test_criterion_7_xz_decoupling(criterion):
    cfg = ExperimentConfig(mode="noise-sweep", depth=3, grid=[0.01, 0.02, 0.03], samples=2000, seed=SEED)
    p_x_rows = [0.0, 0.02, 0.04]
    samples = {
        (row, col): noise_point_samples(cfg, NoiseModel(p_x, p_z), (row, col))["X"]
        for row, p_x in enumerate(p_x_rows)
        for col, p_z in enumerate(cfg.grid)
    }
    worst = 1.0
    for col in range(len(cfg.grid)):
        for row in range(1, len(p_x_rows)):
            for layer in range(cfg.depth + 1):
                p = ks_2samp(samples[(0, col)][:, layer], samples[(row, col)][:, layer], method="asymp").pvalue
                worst = min(worst, p)
    criterion("criterion 7", worst > 0.01, f"min KS p-value over rows/columns/layers = {worst:.3f}")


@pytest.fixture(scope="module")
def field_sweep():
    cfg = ExperimentConfig(mode="field-sweep", depth=1, grid=FIELD_GRID, samples=2000, seed=SEED)
    return run_field_sweep(cfg)


def test_criterion_8a_z_conservation(criterion, field_sweep):
    z = [r.mean for r in field_sweep.rows if r.basis == "Z"]
    criterion("criterion 8a", all(m == 1.0 for m in z), f"Z outputs in [{min(z)}, {max(z)}]")


def test_criterion_8b_x_output(criterion, field_sweep):
    values, means, errs = field_sweep.curve(1, "X")
    at_zero = means[values == 0.0][0] == 1.0
    mono = all(
        means[i + 1] <= means[i] + 2 * np.hypot(errs[i], errs[i + 1]) for i in range(len(means) - 1)
    )
    at_two = means[values == 2.0][0]
    detail = (
        f"M(0)=1: {at_zero}; non-increasing within 2 sigma: {mono}; "
        f"M(2.0) = {at_two:.3f} +/- {errs[values == 2.0][0]:.3f} (needs < 0.1); "
        f"curve {np.round(means, 3).tolist()}"
    )
    criterion("criterion 8b", at_zero and mono and at_two < 0.1, detail)


def test_criterion_9_ground_state(criterion):
    geom = build_torus(3)
    bare = build_hamiltonian(geom, FieldParams(penalty=0.0))
    v0 = np.random.default_rng(SEED).normal(size=bare.dim)
    vals = np.sort(eigsh(bare.as_linear_operator(), k=6, which="SA", tol=1e-12, ncv=40, v0=v0)[0])
    fourfold = np.allclose(vals[:4], -18.0, atol=1e-9) and vals[4] > -17.0
    pen = build_hamiltonian(geom, FieldParams(penalty=1.0))
    pvals = np.sort(eigsh(pen.as_linear_operator(), k=2, which="SA", tol=1e-12)[0])
    unique = pvals[1] - pvals[0] > 1e-3
    gs = solve_ground_state(geom, FieldParams())
    logic = logical_operators(geom)
    loops = (
        expectation_diagonal(gs.psi, logic.z_vertical, 18),
        expectation_diagonal(gs.psi, logic.x_vertical, 18, basis="X"),
    )
    ok = (
        abs(gs.energy + 18.0) < 1e-10
        and fourfold
        and unique
        and np.allclose(loops, 1.0, atol=1e-10)
        and gs.residual < 1e-8
    )
    detail = (
        f"E={gs.energy:.12f}, lowest {np.round(vals[:5], 9).tolist()}, penalised gap {pvals[1] - pvals[0]:.3f}, "
        f"loops {np.round(loops, 10).tolist()}, residual {gs.residual:.1e}"
    )
    criterion("criterion 9", ok, detail)


def test_criterion_10_determinism(criterion, tmp_path):
    outputs = []
    for run in range(2):
        for cmd in (
            ["noise-sweep", "--depth", "3", "--grid", "0:0.04:0.01", "--samples", "2000"],
            ["field-sweep", "--grid", "0:0.6:0.3", "--samples", "2000", "--pz", "0.02"],
        ):
            out = tmp_path / f"{cmd[0]}-{run}.csv"
            subprocess.run(
                [sys.executable, "-m", "qcnn_toric", *cmd, "--seed", str(SEED), "--out", str(out)],
                check=True,
            )
            outputs.append(out.read_bytes())
    same = outputs[0] == outputs[2] and outputs[1] == outputs[3]
    criterion("criterion 10", same, f"noise and field CSVs identical across runs: {same}")
