"""
From stabilizers to single-qubit readouts
=========================================

The convolution circuit maps every toric-code stabilizer onto one qubit,
so a noiseless code state turns into the all-zero string.
"""

import numpy as np

from qcnn_toric import PauliFrame, build_convolution, build_torus, conjugate_through, verify_convolution_identity
from qcnn_toric.pauli_frame import measurement_flips, readout_flips, syndromes_batch

# a 3x3 torus has 18 edge qubits, 9 plaquettes and 9 vertices
geom = build_torus(3)
conv = build_convolution(geom)
print(f"{geom.n_qubits} qubits, {len(conv)} gates in the convolution")

# prepare the code state, run the convolution and measure: all zeros
report = verify_convolution_identity(geom)
print("noiseless identity holds:", bool(report))

# a single Z error on qubit 4 lights up two plaquette readouts
frame = PauliFrame.single(geom.n_qubits, 4, "Z")
after = np.flatnonzero(measurement_flips(conjugate_through(frame, conv)))
plaq, vert = syndromes_batch(frame.x_mask, frame.z_mask, geom)
print("flipped readouts:", after.tolist())
print("direct syndrome: ", np.flatnonzero(readout_flips(plaq, vert, geom)).tolist())
