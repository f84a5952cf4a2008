"""
One macronode as a two-mode gate
================================

Two inputs sit on the West and South slots of the centre macronode of a 3x3
lattice.  Measuring its four modes teleports a two-mode Gaussian gate onto
the neighbouring slots.  We compare three things: the brute-force lattice
calculation, the closed-form finite-squeezing channel and the ideal gate.
"""

import numpy as np

from quadrail.gaussian import apply_unitary
from quadrail.macronode import predicted_gate_ideal, predicted_gate_noisy
from quadrail.verify import modest_state, oracle_gate, random_valid_angles

rng = np.random.default_rng(7)
inputs = modest_state(2, rng)
theta = random_valid_angles(rng)
m = rng.normal(size=4)
print("angles:", np.round(theta, 3))

for r in (1.0, 2.0, 3.0, 5.0):
    lattice = oracle_gate(inputs, theta, r, m)
    closed = predicted_gate_noisy(theta, m, r).apply(inputs)
    gap = np.abs(lattice.cov - closed.cov).max()
    # the ideal gate ignores D(m), so compare covariances only
    ideal = apply_unitary(inputs, predicted_gate_ideal(theta))
    err = np.abs(lattice.cov - ideal.cov).max()
    print(f"r={r}: closed form vs lattice {gap:.1e}, ideal vs lattice {err:.1e}, sech(2r)={1/np.cosh(2*r):.1e}")
