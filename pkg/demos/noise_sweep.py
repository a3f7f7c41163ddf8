"""
Pooling noisy syndromes
=======================

Sample independent Z errors, pool the plaquette syndromes layer by layer
and watch how the averaged readout behaves as the error rate grows.
"""

import numpy as np

from qcnn_toric import ExperimentConfig, run_noise_sweep
from qcnn_toric.harness import NoCrossingError, estimate_threshold, final_layer_curves

grid = [0.0, 0.02, 0.04, 0.06, 0.08, 0.10]

# depth 2 means a 9x9 torus pooled twice, down to a single cell
runs = {}
for depth in (1, 2):
    cfg = ExperimentConfig(mode="noise-sweep", depth=depth, grid=grid, samples=500, seed=7)
    runs[depth] = run_noise_sweep(cfg)
    _, means, errs = runs[depth].curve(depth, "X")
    print(f"depth {depth} final layer:", np.round(means, 3).tolist())

# the Z outputs never move: Z errors only touch plaquettes
print("Z basis at depth 2:", np.round(runs[2].curve(2, "Z")[1], 3).tolist())

# where do successive depths cross?
try:
    est = estimate_threshold(final_layer_curves(runs), basis="X")
    print(f"crossing near p = {est.crossing:.4f}")
except NoCrossingError as exc:
    print("no crossing:", exc)
