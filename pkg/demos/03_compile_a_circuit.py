"""
Compiling a circuit
===================

A two-wire program is routed onto a 5x5 lattice, simulated with every
outcome at zero, and compared against the target unitary.
"""

import numpy as np

from quadrail.compiler import CircuitProgram, SingleModeGate, VariableBeamsplitter, compile, routing_map
from quadrail.gaussian import apply_unitary
from quadrail.noise import estimate_noise
from quadrail.symplectic import rotation, squeezer
from quadrail.verify import modest_state, run_program

program = CircuitProgram(
    2,
    [
        SingleModeGate(0, matrix=(rotation(0.4) @ squeezer(1.2)).matrix),
        VariableBeamsplitter((0, 1), 0.3, 1.1),
    ],
)

r = 5.0
grid, schedule, route = compile(program, (5, 5), r)
print(routing_map(grid, route))
print(len(schedule), "macronode measurements")

inputs = modest_state(2, np.random.default_rng(1))
out = run_program(program, inputs, r=r)
target = apply_unitary(inputs, program.unitary())
print("max deviation from target:", f"{np.abs(out.cov - target.cov).max():.1e}")

noise = estimate_noise(schedule, r, route)
for w, n in noise.wires.items():
    print(f"wire {w}: {n.steps} steps, added-noise trace {n.trace:.2e}")
