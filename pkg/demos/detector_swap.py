"""
Swapping a field mode into a detector
=====================================

An ideal probe exchanges its own state with one collective mode of the field.
After the swap the detector holds exactly the reduced state of that mode, so
its entropy tells us how much entanglement the mode carried.
"""

import numpy as np

from fieldprobe import LatticeSpec, Region, ground_state, normal_modes
from fieldprobe import gaussian as gq
from fieldprobe.probes import DetectorBank, SwapAssignment, run_swap
from fieldprobe.regions import entanglement_captured, mode_covariance

lattice = LatticeSpec.near_critical(1, 41)
sigma = ground_state(lattice)
region = Region.hypercube(lattice, side_fraction=1 / 3)
modes = normal_modes(sigma, region)

# Detector 0 takes the most mixed mode, detector 1 the second one.
assignment = SwapAssignment([(0, modes[0]), (1, modes[1])])
result = run_swap(sigma, assignment, DetectorBank(2))

expected = mode_covariance(sigma, modes[:2])
print("detector covariance matches the modes:", np.allclose(result.detectors, expected, atol=1e-12))
print("detector entropy   ", gq.von_neumann_entropy(result.detectors))
print("captured by 2 modes", entanglement_captured(sigma, region, 2))

# The field is left with vacuum in the swapped modes, so they are now pure.
left_behind = mode_covariance(result.field, modes[:2])
print("swapped field modes now have nu =", gq.symplectic_spectrum(left_behind))

# A mode that is not canonical is rejected before anything runs.
try:
    SwapAssignment([(0, modes[0]), (1, modes[0])])
except Exception as exc:
    print("rejected:", type(exc).__name__)
