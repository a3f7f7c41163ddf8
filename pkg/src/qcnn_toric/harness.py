"""Noise and field sweeps, threshold read-off and result files."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .groundstate import (
    FieldParams,
    MAX_QUBITS,
    SolverError,
    multicritical_init,
    sample_snapshots,
    solve_ground_state,
)
from .lattice import build_pooling_schedule, build_torus, layer_qubit_count
from .pauli_frame import NoiseModel, sample_noise, sample_rng, syndromes_batch
from .pooling import BASES, LayerOutputs, pipeline_samples, snapshot_to_grid

__all__ = [
    "MODES",
    "COLUMNS",
    "ExperimentConfig",
    "Row",
    "SweepResult",
    "ResourceError",
    "NoCrossingError",
    "ThresholdEstimate",
    "parse_grid",
    "noise_point_samples",
    "run_noise_sweep",
    "run_noise_grid",
    "run_field_sweep",
    "final_layer_curves",
    "estimate_threshold",
    "emit_results",
    "load_results",
]

log = logging.getLogger(__name__)

MODES = ("noise-sweep", "field-sweep", "multicritical", "verify")
COLUMNS = ("sweep_value", "layer", "basis", "mean", "stderr", "n")
OUTPUT_BASES = ("X", "Z", "XZ")
DEFAULT_SAMPLES = 2000
DEEP_SAMPLES = 200
DEFAULT_MEMORY_CAP = 4 << 30
# bytes per qubit per in-flight sample: noise masks, syndromes, pooling temporaries
BYTES_PER_QUBIT = 8


class ResourceError(RuntimeError):
    pass


class NoCrossingError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Everything that determines a run; identical configs give identical files.

    ``sweep`` names the swept parameter: ``p_z`` or ``p_x`` for noise
    sweeps, ``h_z`` or ``h_x`` for field sweeps and ``h`` for the
    multicritical line. ``samples=None`` picks 2000, or 200 at depth >= 6.
    """

    mode: str = "noise-sweep"
    depth: int = 3
    grid: list[float] = field(default_factory=lambda: [0.0])
    samples: int | None = None
    sweep: str | None = None
    p_x: float = 0.0
    p_z: float = 0.0
    h_x: float = 0.0
    h_z: float = 0.0
    penalty: float = 1.0
    delta: float = 0.05
    seed: int = 0
    tol: float = 1e-10
    chunk: int = 250
    memory_cap: int = DEFAULT_MEMORY_CAP
    max_qubits: int = MAX_QUBITS

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        self.grid = [float(v) for v in self.grid]
        if not self.grid:
            raise ValueError("sweep grid is empty")
        if any(b < a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("sweep grid must be sorted")
        if self.samples is None:
            self.samples = DEFAULT_SAMPLES
            if self.depth >= 6 and self.mode == "noise-sweep":
                log.warning("depth %d: reducing default samples to %d", self.depth, DEEP_SAMPLES)
                self.samples = DEEP_SAMPLES
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.sweep is None:
            self.sweep = {"noise-sweep": "p_z", "multicritical": "h"}.get(self.mode, "h_z")
        allowed = {
            "noise-sweep": ("p_z", "p_x"),
            "field-sweep": ("h_z", "h_x"),
            "multicritical": ("h",),
            "verify": (self.sweep,),
        }[self.mode]
        if self.sweep not in allowed:
            raise ValueError(f"{self.mode} sweeps one of {allowed}, got {self.sweep!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Row:
    sweep_value: float
    layer: int
    basis: str
    mean: float
    stderr: float
    n: int


@dataclass
class SweepResult:
    rows: list[Row] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def values(self) -> list[float]:
        return sorted({r.sweep_value for r in self.rows})

    def layers(self) -> list[int]:
        return sorted({r.layer for r in self.rows})

    def curve(self, layer: int, basis: str = "XZ") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(values, means, stderrs)`` of one layer and basis, sorted by value."""
        picked = sorted(
            (r for r in self.rows if r.layer == layer and r.basis == basis),
            key=lambda r: r.sweep_value,
        )
        return (
            np.array([r.sweep_value for r in picked]),
            np.array([r.mean for r in picked]),
            np.array([r.stderr for r in picked]),
        )

    def add_point(self, value: float, outputs: LayerOutputs) -> None:
        for basis in OUTPUT_BASES:
            if basis not in outputs.mean:
                continue
            for layer in range(outputs.depth + 1):
                self.rows.append(
                    Row(
                        float(value),
                        layer,
                        basis,
                        float(outputs.mean[basis][layer]),
                        float(outputs.stderr[basis][layer]),
                        int(outputs.n),
                    )
                )

    def add_failed_point(self, value: float, depth: int) -> None:
        for basis in OUTPUT_BASES:
            for layer in range(depth + 1):
                self.rows.append(Row(float(value), layer, basis, math.nan, math.nan, 0))


def parse_grid(text: str | Sequence[float]) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    if not isinstance(text, str):
        return [float(v) for v in text]
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = map(float, parts)
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ValueError(f"empty grid {text!r}")
        return [round(start + i * step, 12) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


# -- noise sweeps ------------------------------------------------------------


def _check_memory(cfg: ExperimentConfig) -> None:
    qubits = layer_qubit_count(cfg.depth, 0)
    need = qubits * BYTES_PER_QUBIT * min(cfg.chunk, cfg.samples)
    if need > cfg.memory_cap:
        raise ResourceError(
            f"depth {cfg.depth} needs ~{need / 2**30:.1f} GiB per chunk of "
            f"{min(cfg.chunk, cfg.samples)} samples on {qubits} qubits; cap is "
            f"{cfg.memory_cap / 2**30:.1f} GiB"
        )


def _noise_model(cfg: ExperimentConfig, value: float, sweep: str | None = None) -> NoiseModel:
    sweep = sweep or cfg.sweep
    p_x = value if sweep == "p_x" else cfg.p_x
    p_z = value if sweep == "p_z" else cfg.p_z
    return NoiseModel(p_x=p_x, p_z=p_z)


def _noise_chunk(args) -> dict[str, np.ndarray]:
    depth, model, seed, key, start, stop = args
    geom = build_torus(3**depth)
    schedule = build_pooling_schedule(depth)
    frames = [sample_noise(model, geom, sample_rng(seed, *key, i)) for i in range(start, stop)]
    x = np.stack([f.x_mask for f in frames])
    z = np.stack([f.z_mask for f in frames])
    plaq, vert = syndromes_batch(x, z, geom)
    return {
        "X": pipeline_samples(plaq.view(np.uint8), schedule),
        "Z": pipeline_samples(vert.view(np.uint8), schedule),
    }


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def noise_point_samples(
    cfg: ExperimentConfig, model: NoiseModel, key: Sequence[int], *, workers: int = 1
) -> dict[str, np.ndarray]:
    """Per-sample readouts ``(samples, depth + 1)`` per basis for one noise point.

    Sample ``i`` draws its noise from the stream ``(seed, *key, i)``, so the
    result does not depend on chunking or worker count.
    """
    _check_memory(cfg)
    bounds = list(range(0, cfg.samples, cfg.chunk)) + [cfg.samples]
    jobs = [(cfg.depth, model, cfg.seed, tuple(key), a, b) for a, b in zip(bounds, bounds[1:])]
    parts = _map(_noise_chunk, jobs, workers)
    return {b: np.concatenate([p[b] for p in parts]) for b in BASES}


def _metadata(cfg: ExperimentConfig, **extra) -> dict:
    return {"package_version": __version__, "config": cfg.to_dict(), **extra}


def run_noise_sweep(cfg: ExperimentConfig, *, workers: int = 1) -> SweepResult:
    """Ideal toric syndromes plus sampled Pauli noise, pooled in both bases."""
    if cfg.mode != "noise-sweep":
        raise ValueError(f"run_noise_sweep needs mode 'noise-sweep', got {cfg.mode!r}")
    result = SweepResult(metadata=_metadata(cfg))
    for i, value in enumerate(cfg.grid):
        samples = noise_point_samples(cfg, _noise_model(cfg, value), (i,), workers=workers)
        result.add_point(value, LayerOutputs.from_samples(samples))
        log.info("noise %s=%g done", cfg.sweep, value)
    return result


def run_noise_grid(
    cfg: ExperimentConfig, p_x_values: Sequence[float], *, workers: int = 1
) -> dict[float, SweepResult]:
    """2-D noise scan: one ``p_z`` sweep (``cfg.grid``) per ``p_x`` row.

    Streams are keyed by ``(row, column, sample)`` so rows are independent.
    """
    out = {}
    for row, p_x in enumerate(p_x_values):
        row_cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "p_x": float(p_x), "sweep": "p_z"})
        result = SweepResult(metadata=_metadata(row_cfg, row=row))
        for col, p_z in enumerate(row_cfg.grid):
            model = NoiseModel(p_x=float(p_x), p_z=p_z)
            samples = noise_point_samples(row_cfg, model, (row, col), workers=workers)
            result.add_point(p_z, LayerOutputs.from_samples(samples))
        out[float(p_x)] = result
    return out


# -- field sweeps ------------------------------------------------------------


def _field_params(cfg: ExperimentConfig, value: float) -> list[FieldParams]:
    if cfg.mode == "multicritical":
        return list(multicritical_init(value, cfg.delta, cfg.penalty))
    h_x = value if cfg.sweep == "h_x" else cfg.h_x
    h_z = value if cfg.sweep == "h_z" else cfg.h_z
    return [FieldParams(h_x=h_x, h_z=h_z, penalty=cfg.penalty)]


def _field_point(args):
    cfg_dict, index, value = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    geom = build_torus(3**cfg.depth)
    schedule = build_pooling_schedule(cfg.depth)
    try:
        state = None
        for params in _field_params(cfg, value):
            state = solve_ground_state(
                geom,
                params,
                cfg.tol,
                v0=None if state is None else state.psi,
                max_qubits=cfg.max_qubits,
            )
    except SolverError as exc:
        return index, value, None, str(exc)
    noise = NoiseModel(cfg.p_x, cfg.p_z)
    per_basis = {}
    for b, basis in enumerate(BASES):
        rng = sample_rng(cfg.seed, index, b)
        snaps = sample_snapshots(state.psi, basis, cfg.samples, rng, geom.n_qubits)
        bits = snapshot_to_grid(snaps, basis, geom).bits
        if noise.p_x or noise.p_z:
            x = rng.random(snaps.shape) < noise.p_x
            z = rng.random(snaps.shape) < noise.p_z
            plaq, vert = syndromes_batch(x, z, geom)
            bits = bits ^ (plaq if basis == "X" else vert)
        per_basis[basis] = pipeline_samples(bits, schedule)
    return index, value, per_basis, None


def run_field_sweep(cfg: ExperimentConfig, *, workers: int = 1) -> SweepResult:
    """Exact ground states along the sweep, sampled in both bases and pooled.

    With ``p_x``/``p_z`` set, each snapshot's syndrome grid is further
    corrupted by sampled Pauli noise. Solver failures are recorded per
    point (NaN rows, listed under ``metadata['failures']``).
    """
    if cfg.mode not in ("field-sweep", "multicritical"):
        raise ValueError(f"run_field_sweep needs a field mode, got {cfg.mode!r}")
    n_qubits = layer_qubit_count(cfg.depth, 0)
    if n_qubits > cfg.max_qubits:
        raise ResourceError(
            f"depth {cfg.depth} has {n_qubits} qubits; exact states are capped at {cfg.max_qubits}"
        )
    jobs = [(cfg.to_dict(), i, v) for i, v in enumerate(cfg.grid)]
    result = SweepResult(metadata=_metadata(cfg, failures=[]))
    for index, value, per_basis, error in sorted(_map(_field_point, jobs, workers)):
        if error is not None:
            log.warning("field point %g failed: %s", value, error)
            result.metadata["failures"].append({"sweep_value": value, "error": error})
            result.add_failed_point(value, cfg.depth)
        else:
            result.add_point(value, LayerOutputs.from_samples(per_basis))
    return result


# -- threshold ---------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdEstimate:
    crossing: float
    spread: float
    pairwise: dict[tuple[int, int], float]


def final_layer_curves(results: dict[int, SweepResult]) -> SweepResult:
    """Merge runs of different depths, keeping each run's last layer.

    The merged rows use the depth as their ``layer`` label.
    """
    merged = SweepResult(metadata={"depths": sorted(results)})
    for depth, res in sorted(results.items()):
        last = max(res.layers())
        if last != depth:
            raise ValueError(f"run labelled depth {depth} ends at layer {last}")
        merged.rows.extend(
            Row(r.sweep_value, depth, r.basis, r.mean, r.stderr, r.n) for r in res.rows if r.layer == last
        )
    return merged


def _first_crossing(x: np.ndarray, diff: np.ndarray) -> float | None:
    """First sign change of ``diff``; exact ties (e.g. both curves at 1) are not crossings."""
    nz = np.flatnonzero((diff != 0) & np.isfinite(diff))
    for i, j in zip(nz, nz[1:]):
        a, b = diff[i], diff[j]
        if a * b > 0:
            continue
        if j == i + 1:
            return float(x[i] + (x[j] - x[i]) * a / (a - b))
        # curves touch over a run of ties between opposite signs
        return float(x[i + 1 : j].mean())
    return None


def estimate_threshold(
    result: SweepResult, basis: str = "XZ", layers: Iterable[int] | None = None
) -> ThresholdEstimate:
    """Crossing of successive-layer curves, by linear interpolation.

    Each distinct ``layer`` is treated as one QCNN depth. The estimate is the
    mean of the pairwise crossings and the spread their half range.
    """
    chosen = sorted(layers) if layers is not None else result.layers()
    if len(chosen) < 2:
        raise ValueError("threshold needs curves of at least two depths")
    curves = {layer: result.curve(layer, basis) for layer in chosen}
    grid = curves[chosen[0]][0]
    for layer in chosen:
        if not np.array_equal(curves[layer][0], grid):
            raise ValueError(f"layer {layer} is not on the common grid")
    pairwise = {}
    for lo, hi in zip(chosen, chosen[1:]):
        cross = _first_crossing(grid, curves[hi][1] - curves[lo][1])
        if cross is None:
            raise NoCrossingError(
                f"no crossing in range [{grid[0]}, {grid[-1]}] between depths {lo} and {hi}"
            )
        pairwise[(lo, hi)] = cross
    vals = np.array(list(pairwise.values()))
    return ThresholdEstimate(float(vals.mean()), float((vals.max() - vals.min()) / 2), pairwise)


# -- files -------------------------------------------------------------------


def _fmt(value: float) -> str:
    return "nan" if math.isnan(value) else repr(float(value))


def emit_results(result: SweepResult, fmt: str, path: str | Path | None = None) -> str:
    """Serialise ``result`` as CSV or JSON; writes ``path`` when given.

    Columns are always ``sweep_value, layer, basis, mean, stderr, n``. The
    metadata (config and seed) goes in a ``#`` header line for CSV and a
    ``metadata`` object for JSON.
    """
    meta = json.dumps(result.metadata, sort_keys=True, default=str)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# {meta}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in result.rows:
            writer.writerow([_fmt(r.sweep_value), r.layer, r.basis, _fmt(r.mean), _fmt(r.stderr), r.n])
        text = buf.getvalue()
    elif fmt == "json":
        rows = [
            [r.sweep_value, r.layer, r.basis, None if math.isnan(r.mean) else r.mean,
             None if math.isnan(r.stderr) else r.stderr, r.n]
            for r in result.rows
        ]
        text = json.dumps(
            {"metadata": json.loads(meta), "columns": list(COLUMNS), "rows": rows},
            indent=1,
            sort_keys=True,
        ) + "\n"
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write results to {path}: {exc}") from exc
    return text


def load_results(path: str | Path) -> SweepResult:
    """Inverse of :func:`emit_results`; the format follows the file content."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        rows = [
            Row(float(v), int(l), str(b), math.nan if m is None else float(m),
                math.nan if s is None else float(s), int(n))
            for v, l, b, m, s, n in data["rows"]
        ]
        return SweepResult(rows, data["metadata"])
    lines = text.splitlines()
    meta = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
    body = lines[1:] if meta or (lines and lines[0].startswith("#")) else lines
    reader = csv.reader(body)
    header = next(reader, None)
    if header is not None and tuple(header) != COLUMNS:
        raise ValueError(f"unexpected columns {header}")
    rows = [Row(float(v), int(l), b, float(m), float(s), int(n)) for v, l, b, m, s, n in reader]
    return SweepResult(rows, meta)
