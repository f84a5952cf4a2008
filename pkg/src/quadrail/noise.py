"""Finite-squeezing noise estimates for schedules and transport routes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianState, apply_unitary, homodyne_condition, tensor
from .lattice import MacronodeGrid, attach_input, build_qrl, project_to_square_lattice, qrl_state
from .macronode import (
    CANONICAL,
    MeasurementRecord,
    MeasurementSchedule,
    extract_distributed,
    predicted_gate_noisy,
    run_schedule,
)
from .symplectic import SymplecticTransform


@dataclass
class WireNoise:
    steps: int
    cov: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.cov))


@dataclass
class NoiseSummary:
    """Linearised added noise per wire plus the joint noise covariance."""

    wires: dict
    total: np.ndarray

    def to_json(self) -> dict:
        return {
            "wires": {str(w): {"steps": n.steps, "cov": n.cov.tolist(), "trace": n.trace} for w, n in self.wires.items()},
            "total": self.total.tolist(),
        }


def estimate_noise(schedule: MeasurementSchedule, r: float, route=None, n_wires: int | None = None) -> NoiseSummary:
    """Propagate the first-order noise of every gate step along the wires.

    Each step contributes ``diag(eps / (2 t^2), eps / 2)`` per mode after its
    ``S(1/t)``, which later steps transform like any covariance.  Without a
    route every gate record is taken to act on a single wire 0.

    Args:
        schedule: measurement schedule.
        r: squeezing parameter of the lattice.
        route: optional :class:`~quadrail.compiler.WireRoute` naming the wires
            hosted by each record.
        n_wires: wire count; inferred from ``route`` when omitted.
    """
    if route is not None:
        record_wires = route.record_wires
        n_wires = len(route.starts) if n_wires is None else n_wires
    else:
        record_wires = [(0,)] * len(schedule)
        n_wires = 1 if n_wires is None else n_wires
    n2 = 2 * n_wires
    total = np.zeros((n2, n2))
    steps = {w: 0 for w in range(n_wires)}
    for rec, wires in zip(schedule, record_wires):
        if rec.intent != "gate":
            continue
        x, _, y = predicted_gate_noisy(rec.theta, np.zeros(4), r).linearized()
        idx = [w for w in wires]
        if len(idx) == 1:
            # single-mode steps do not mix the wire with the idle slot
            keep = [0, 2]
            x, y = x[np.ix_(keep, keep)], y[np.ix_(keep, keep)]
        big = np.eye(n2)
        qp = idx + [w + n_wires for w in idx]
        big[np.ix_(qp, qp)] = x
        total = big @ total @ big.T
        yb = np.zeros((n2, n2))
        yb[np.ix_(qp, qp)] = y
        total = total + yb
        for w in idx:
            steps[w] += 1
    wires = {}
    for w in range(n_wires):
        qp = [w, w + n_wires]
        wires[w] = WireNoise(steps[w], total[np.ix_(qp, qp)])
    return NoiseSummary(wires, total)


def _zero_input():
    return GaussianState(np.zeros(2), np.zeros((2, 2)))


def qrl_route_noise(r: float, steps: int = 3) -> np.ndarray:
    """Added noise of ``steps`` identity steps on the QRL, by direct conditioning.

    A noiseless point-like input (zero covariance) is carried along the
    middle row of a ``3 x (steps + 1)`` lattice; the output covariance is
    the added noise.
    """
    grid = attach_input(MacronodeGrid(3, steps + 1, r), (1, 0), "a", _zero_input())
    identity_angles = (np.pi / 4, np.pi / 4, -np.pi / 4, -np.pi / 4)
    sched = MeasurementSchedule(
        tuple(MeasurementRecord((1, j), identity_angles, "gate", CANONICAL) for j in range(steps))
    )
    state, _ = run_schedule(qrl_state(grid), grid, sched, outcomes=np.zeros(4))
    return extract_distributed(state, grid, [((1, steps), "a")]).cov


def projected_line(r: float, n_sites: int):
    """``1 x n_sites`` QRL projected onto its C = 1/4 line graph."""
    state, grid = build_qrl(1, n_sites, r)
    return project_to_square_lattice(state, grid)


def projected_route_noise(r: float, steps: int = 3) -> np.ndarray:
    """Added noise of identity transport over ``steps`` projected-lattice edges.

    The input is coupled to the first site by ``CZ(g)`` with ``g = t/4`` and
    every teleportation step measures ``p(theta)`` with ``tan(theta) = -g``;
    three such steps compose to the identity in the infinite-squeezing limit.
    """
    line, report = projected_line(r, steps)
    g = report.expected_weight
    full = tensor(_zero_input().relabel(("in",)), line)
    n = full.n_modes
    cz = np.eye(2 * n)
    cz[n, 1] = g
    cz[n + 1, 0] = g
    full = apply_unitary(full, SymplecticTransform(cz))
    theta = np.arctan(-g)
    for lab in ("in",) + tuple(line.labels[: steps - 1]):
        full, _ = homodyne_condition(full, full.index_of(lab), theta, 0.0)
    return full.cov


def projected_step_matrix(g: float, theta: float) -> np.ndarray:
    """Ideal transfer matrix ``S(1/g) [[tan theta, -1], [1, 0]]`` of one step."""
    return np.diag([1 / g, g]) @ np.array([[np.tan(theta), -1.0], [1.0, 0.0]])
