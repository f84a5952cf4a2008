"""Macronode measurements on the QRL and their closed-form gate predictions.

Angle convention.  A macronode angle ``theta_i`` here is a *protocol*
angle: physical mode ``i`` is measured in ``p cos(theta_i) + q sin(theta_i)``,
i.e. :func:`quadrail.gaussian.homodyne_condition` at ``-theta_i``.  With this
choice and ``+t`` cluster pairs the measured channel equals

    G = B_kj [N D V(theta_1, theta_3)]_j [N D V(theta_2, theta_4)]_k B_jk

exactly at finite squeezing, where ``j`` and ``k`` are the two inputs.
Readout macronodes use the plain homodyne angle ``p(theta)`` instead, since no
gate formula is involved there.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gaussian import (
    SAMPLE,
    GaussianChannel,
    GaussianState,
    SqueezingParams,
    homodyne_condition,
)
from .lattice import (
    SLOTS,
    LatticeError,
    MacronodeGrid,
    _macronode_positions,
    qrl_state,
    slot_index,
)
from .symplectic import (
    FOURSPLITTER_BLOCK,
    SymplecticTransform,
    beamsplitter,
    complex_to_phase_space,
    direct_sum,
    displacement,
    rotation,
    squeezer,
)

DIVERGENCE_TOL = 1e-9


class DivergentGateError(ValueError):
    """Raised for angle pairs with ``sin(theta_j - theta_k) = 0``."""


# ---------------------------------------------------------------- closed forms


def _check_pair(x: float, y: float, what: str):
    if abs(np.sin(x - y)) < DIVERGENCE_TOL:
        raise DivergentGateError(
            f"{what}: sin({x:.6g} - {y:.6g}) = 0 cannot represent a physical unitary operation"
        )


def check_gate_angles(angles) -> np.ndarray:
    theta = np.asarray(angles, dtype=float)
    if theta.shape != (4,) or not np.all(np.isfinite(theta)):
        raise ValueError(f"expected four finite angles, got {angles!r}")
    _check_pair(theta[0], theta[2], "theta_1, theta_3")
    _check_pair(theta[1], theta[3], "theta_2, theta_4")
    return theta


def v_gate(x: float, y: float) -> SymplecticTransform:
    """``V(x, y) = R((x+y)/2) S(tan((x-y)/2)) R((x+y)/2)``."""
    _check_pair(x, y, "V")
    half = rotation((x + y) / 2)
    return half @ squeezer(np.tan((x - y) / 2)) @ half


def predicted_gate_ideal(angles) -> SymplecticTransform:
    """Infinite-squeezing two-mode gate ``B^dag_jk V_j(t1, t3) V_k(t2, t4) B_jk``.

    Raises:
        DivergentGateError: if ``theta_1 = theta_3`` or ``theta_2 = theta_4`` mod pi.
    """
    th = check_gate_angles(angles)
    vv = direct_sum(v_gate(th[0], th[2]), v_gate(th[1], th[3]))
    return beamsplitter(1, 0) @ vv @ beamsplitter(0, 1)


def d_shift(mj: float, mk: float, tj: float, tk: float) -> np.ndarray:
    """Phase-space shift ``(dq, dp)`` of the outcome-dependent displacement."""
    _check_pair(tj, tk, "D")
    alpha = (-1j * np.exp(1j * tk) * mj - 1j * np.exp(1j * tj) * mk) / np.sin(tj - tk)
    return complex_to_phase_space(alpha)


def add_noise_ops(channel: GaussianChannel, mode: int, r: float) -> GaussianChannel:
    """Append ``N(r) = exp(-eps q^2/2) exp(-eps p^2/(2 t^2)) S(1/t)`` on ``mode``."""
    sp = SqueezingParams(r)
    channel.unitary(squeezer(1.0 / sp.t), [mode])
    channel.filter(mode, "p", sp.epsilon / sp.t**2)
    channel.filter(mode, "q", sp.epsilon)
    return channel


def predicted_gate_noisy(angles, outcomes, r: float) -> GaussianChannel:
    """Finite-squeezing channel for a macronode measured with ``outcomes``."""
    th = check_gate_angles(angles)
    m = np.asarray(outcomes, dtype=float)
    if m.shape != (4,):
        raise ValueError("expected four outcomes")
    ch = GaussianChannel(2).unitary(beamsplitter(0, 1))
    for mode, (a, b) in enumerate(((0, 2), (1, 3))):
        ch.unitary(v_gate(th[a], th[b]), [mode])
        ch.unitary(displacement(d_shift(m[a], m[b], th[a], th[b])), [mode])
        add_noise_ops(ch, mode, r)
    return ch.unitary(beamsplitter(1, 0))


# ---------------------------------------------------------------- restrictions


def single_mode_angles(x: float, y: float) -> np.ndarray:
    """Angles giving ``V(x, y)`` on both wires."""
    return np.array([x, x, y, y], dtype=float)


def rotation_pair_angles(phi: float) -> np.ndarray:
    """Angles giving ``R(2 phi) (x) R(2 phi)``."""
    return single_mode_angles(phi + np.pi / 4, phi - np.pi / 4)


def squeezer_pair_angles(theta1: float) -> np.ndarray:
    """Angles giving ``S(tan theta1) (x) S(tan theta1)``."""
    return single_mode_angles(theta1, -theta1)


def two_mode_squeeze_angles(theta1: float, theta2: float) -> np.ndarray:
    return np.array([theta1, theta2, -theta1, -theta2], dtype=float)


def variable_beamsplitter_angles(theta1: float, theta2: float) -> np.ndarray:
    return np.array([theta1, theta2, theta1 - np.pi / 2, theta2 - np.pi / 2], dtype=float)


def two_mode_squeeze_gate(theta1: float, theta2: float) -> SymplecticTransform:
    """``B^dag (S(tan theta1) (x) S(tan theta2)) B``."""
    ss = direct_sum(squeezer(np.tan(theta1)), squeezer(np.tan(theta2)))
    return beamsplitter(1, 0) @ ss @ beamsplitter(0, 1)


def variable_beamsplitter_gate(theta1: float, theta2: float) -> SymplecticTransform:
    """``B^dag (R(2 theta1 - pi/2) (x) R(2 theta2 - pi/2)) B``, a passive two-mode gate."""
    rr = direct_sum(rotation(2 * theta1 - np.pi / 2), rotation(2 * theta2 - np.pi / 2))
    return beamsplitter(1, 0) @ rr @ beamsplitter(0, 1)


# ---------------------------------------------------------------- configurations


@dataclass(frozen=True)
class IOConfig:
    """Input slots ``(alpha, beta)`` and output-pair slots ``(gamma, delta)``.

    Gate mode ``j`` enters at ``alpha`` and leaves through the pair on
    ``gamma``; mode ``k`` enters at ``beta`` and leaves through ``delta``.
    """

    alpha: str = "a"
    beta: str = "b"
    gamma: str = "c"
    delta: str = "d"

    def __post_init__(self):
        slots = (self.alpha, self.beta, self.gamma, self.delta)
        for s in slots:
            slot_index(s)
        if sorted(slots) != list(SLOTS):
            raise ValueError(f"configuration {slots} must use each of a, b, c, d once")

    @property
    def roles(self) -> tuple:
        return (self.alpha, self.beta, self.gamma, self.delta)

    @property
    def label(self) -> str:
        return "".join(self.roles)

    @classmethod
    def from_label(cls, label: str) -> "IOConfig":
        if len(label) != 4:
            raise ValueError(f"configuration label must have four letters, got {label!r}")
        return cls(*label)

    def role_matrix(self) -> np.ndarray:
        """``Pi`` with ``x_D = Pi x_canonical``."""
        p = np.zeros((4, 4))
        for role, slot in enumerate(self.roles):
            p[slot_index(slot), role] = 1.0
        return p


CANONICAL = IOConfig()


def all_configs() -> list:
    """The 24 input/output assignments, canonical first."""
    return [IOConfig(*p) for p in itertools.permutations(SLOTS)]


def config_permutation(config: IOConfig):
    """Signed permutation ``Q = A~ Pi A~^T`` relating physical modes.

    Physical mode ``i`` of the actual configuration carries
    ``signs[i]`` times canonical physical mode ``perm[i]``.
    """
    q = FOURSPLITTER_BLOCK @ config.role_matrix() @ FOURSPLITTER_BLOCK.T
    perm = np.argmax(np.abs(q), axis=1)
    signs = np.sign(q[np.arange(4), perm])
    rebuilt = np.zeros((4, 4))
    rebuilt[np.arange(4), perm] = signs
    if sorted(perm) != [0, 1, 2, 3] or np.max(np.abs(q - rebuilt)) > 1e-12:
        raise ValueError(f"configuration {config.label} is not a signed permutation of the canonical one")
    return tuple(int(s) for s in signs), tuple(int(p) for p in perm)


def angles_for_config(config: IOConfig, base_angles) -> np.ndarray:
    """Physical angles that realise canonical ``base_angles`` in ``config``.

    Angles are permuted along with the modes and a pi phase delay is added
    wherever the relabelling flips a sign, so outcomes need no sign change.
    """
    base = np.asarray(base_angles, dtype=float)
    signs, perm = config_permutation(config)
    return np.array([base[perm[i]] + (np.pi if signs[i] < 0 else 0.0) for i in range(4)])


def canonical_outcomes(config: IOConfig, physical) -> np.ndarray:
    """``m_canonical[perm[i]] = m_physical[i]``."""
    _, perm = config_permutation(config)
    out = np.zeros(4)
    for i, p in enumerate(perm):
        out[p] = physical[i]
    return out


def physical_outcomes(config: IOConfig, canonical) -> np.ndarray:
    _, perm = config_permutation(config)
    return np.array([canonical[perm[i]] for i in range(4)], dtype=float)


def output_slots(grid: MacronodeGrid, macronode, config: IOConfig = CANONICAL) -> tuple:
    """Distributed slots receiving gate modes ``j`` and ``k``."""
    outs = []
    for s in (config.gamma, config.delta):
        p = grid.partner(macronode, s)
        if p is None:
            raise LatticeError(f"slot {s} of macronode {tuple(macronode)} has no neighbour to carry an output")
        outs.append(p)
    return tuple(outs)


# ---------------------------------------------------------------- oracle path


def _resolve_outcomes(outcomes):
    if isinstance(outcomes, str):
        if outcomes != SAMPLE:
            raise ValueError(f"unknown outcome policy {outcomes!r}")
        return [SAMPLE] * 4
    m = np.asarray(outcomes, dtype=float)
    if m.shape != (4,) or not np.all(np.isfinite(m)):
        raise ValueError(f"expected four finite outcomes, got {outcomes!r}")
    return list(m)


def _measure_four(state, grid, macronode, gaussian_angles, outcomes, rng):
    pos = _macronode_positions(state, macronode)
    labels = [state.labels[p] for p in pos]
    forced = _resolve_outcomes(outcomes)
    m = np.zeros(4)
    for i, lab in enumerate(labels):
        state, m[i] = homodyne_condition(state, state.index_of(lab), gaussian_angles[i], forced[i], rng)
    return state, m


def measure_macronode(state: GaussianState, grid: MacronodeGrid, macronode, angles, outcomes=SAMPLE, rng=None):
    """Homodyne-measure the four physical modes of ``macronode``.

    Args:
        state: physical-picture state containing the macronode.
        grid: lattice description.
        macronode: ``(row, col)``.
        angles: four protocol angles, one per physical mode.
        outcomes: four forced values or ``SAMPLE``.
        rng: generator for sampling.

    Returns:
        ``(state', m)`` with the macronode's modes removed.
    """
    grid.check_macronode(macronode)
    theta = np.asarray(angles, dtype=float)
    if theta.shape != (4,):
        raise ValueError("expected four angles")
    return _measure_four(state, grid, macronode, -theta, outcomes, rng)


def readout_macronode(state: GaussianState, grid: MacronodeGrid, macronode, theta, outcomes=SAMPLE, rng=None):
    """Measure all four physical modes in ``p(theta)`` and undo the foursplitter.

    ``theta`` is a scalar or four equal angles.  The returned values are
    ``A~^T m``, the ``p(theta)`` outcomes of the distributed modes a..d.

    Raises:
        ValueError: for unequal angles; use :func:`measure_macronode` for gates.
    """
    th = np.broadcast_to(np.asarray(theta, dtype=float), (4,))
    if np.max(np.abs(th - th[0])) > 0:
        raise ValueError("readout needs four equal angles; unequal angles implement a gate, use measure_macronode")
    state, m = _measure_four(state, grid, macronode, np.full(4, th[0]), outcomes, rng)
    return state, FOURSPLITTER_BLOCK.T @ m


# ---------------------------------------------------------------- schedules


@dataclass(frozen=True)
class MeasurementRecord:
    """One macronode measurement.

    For gates ``theta`` holds canonical angles that are mapped through
    ``config``; for readouts all four entries are equal.
    """

    macronode: tuple
    theta: tuple
    intent: str = "gate"
    config: IOConfig = CANONICAL
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "macronode", tuple(int(x) for x in self.macronode))
        th = tuple(float(x) for x in self.theta)
        if len(th) != 4:
            raise ValueError("theta must have four entries")
        object.__setattr__(self, "theta", th)
        if self.intent == "gate":
            check_gate_angles(th)
        elif self.intent == "readout":
            if max(th) != min(th):
                raise ValueError("readout records need four equal angles")
        else:
            raise ValueError(f"intent must be 'gate' or 'readout', got {self.intent!r}")
        if isinstance(self.config, str):
            object.__setattr__(self, "config", IOConfig.from_label(self.config))

    def physical_angles(self) -> np.ndarray:
        if self.intent == "readout":
            return np.array(self.theta)
        return angles_for_config(self.config, self.theta)

    def to_json(self) -> dict:
        out = {"macronode": list(self.macronode), "theta": list(self.theta), "intent": self.intent}
        out["config"] = self.config.label
        if self.note:
            out["note"] = self.note
        return out

    @classmethod
    def from_json(cls, data: dict) -> "MeasurementRecord":
        return cls(
            tuple(data["macronode"]),
            tuple(data["theta"]),
            data.get("intent", "gate"),
            IOConfig.from_label(data.get("config", "abcd")),
            data.get("note", ""),
        )


@dataclass(frozen=True)
class MeasurementSchedule:
    records: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            if rec.macronode in seen:
                raise ValueError(f"macronode {rec.macronode} measured twice")
            seen.add(rec.macronode)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_json(self) -> dict:
        return {"records": [rec.to_json() for rec in self.records]}

    @classmethod
    def from_json(cls, data: dict) -> "MeasurementSchedule":
        return cls(tuple(MeasurementRecord.from_json(d) for d in data["records"]))


@dataclass
class TraceStep:
    macronode: tuple
    intent: str
    physical_angles: list
    outcomes: list
    canonical_outcomes: list = None
    output_slots: list = None
    displacement: list = None
    readout: list = None

    def to_json(self) -> dict:
        out = {
            "macronode": list(self.macronode),
            "intent": self.intent,
            "physical_angles": list(self.physical_angles),
            "outcomes": list(self.outcomes),
        }
        if self.intent == "gate":
            out["canonical_outcomes"] = list(self.canonical_outcomes)
            out["output_slots"] = [{"macronode": list(mn), "slot": SLOTS[k]} for mn, k in self.output_slots]
            out["displacement"] = list(self.displacement)
        else:
            out["readout"] = list(self.readout)
        return out


@dataclass
class Trace:
    seed: object = None
    steps: list = field(default_factory=list)
    displacements_corrected: bool = False

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "displacements_corrected": self.displacements_corrected,
            "steps": [s.to_json() for s in self.steps],
        }


def displace_distributed(state: GaussianState, grid: MacronodeGrid, macronode, slot, shift) -> GaussianState:
    """Displace distributed mode ``slot`` of an unmeasured macronode."""
    pos = _macronode_positions(state, macronode)
    k = slot_index(slot)
    n = state.n_modes
    mean = np.array(state.mean)
    col = FOURSPLITTER_BLOCK[:, k]
    mean[pos] += col * shift[0]
    mean[[p + n for p in pos]] += col * shift[1]
    return GaussianState(mean, state.cov, state.labels)


def gate_displacement(angles, canonical_m, r: float) -> np.ndarray:
    """First-order output shift (qqpp over the two outputs) caused by ``m``."""
    _, d, _ = predicted_gate_noisy(angles, canonical_m, r).linearized()
    return d


def run_schedule(state, grid, schedule, outcomes=SAMPLE, rng=None, correct_displacements=False, seed=None):
    """Measure every record of ``schedule`` in order.

    Args:
        state: physical-picture lattice state.
        grid: lattice description.
        schedule: :class:`MeasurementSchedule`.
        outcomes: ``SAMPLE``, a single 4-vector used for every step, or a
            list with one 4-vector (physical outcomes) per record.
        rng: generator used for sampling.
        correct_displacements: undo the first-order outcome-dependent shift
            on gate outputs immediately after each step.

    Returns:
        ``(state, Trace)``.
    """
    rng = np.random.default_rng(seed) if rng is None else rng
    trace = Trace(seed=seed, displacements_corrected=correct_displacements)
    per_step = _per_step_outcomes(outcomes, len(schedule))
    for rec, forced in zip(schedule, per_step):
        phys = rec.physical_angles()
        if rec.intent == "readout":
            state, dist = readout_macronode(state, grid, rec.macronode, phys, forced, rng)
            m = FOURSPLITTER_BLOCK @ dist
            trace.steps.append(TraceStep(rec.macronode, "readout", phys.tolist(), m.tolist(), readout=dist.tolist()))
            continue
        outs = output_slots(grid, rec.macronode, rec.config)
        state, m = measure_macronode(state, grid, rec.macronode, phys, forced, rng)
        mc = canonical_outcomes(rec.config, m)
        shift = gate_displacement(rec.theta, mc, grid.r)
        if correct_displacements:
            for idx, (mn, slot) in enumerate(outs):
                state = displace_distributed(state, grid, mn, slot, -shift[[idx, idx + 2]])
        trace.steps.append(
            TraceStep(rec.macronode, "gate", phys.tolist(), m.tolist(), mc.tolist(), list(outs), shift.tolist())
        )
    return state, trace


def _per_step_outcomes(outcomes, n):
    if isinstance(outcomes, str):
        return [outcomes] * n
    arr = np.asarray(outcomes, dtype=float)
    if arr.shape == (4,):
        return [arr] * n
    if arr.shape == (n, 4):
        return list(arr)
    raise ValueError(f"forced outcomes must be a 4-vector or an ({n}, 4) array, got shape {arr.shape}")


def simulate(grid: MacronodeGrid, schedule: MeasurementSchedule, seed=None, outcomes=SAMPLE, correct_displacements=False):
    """Build the lattice for ``grid`` (inputs included) and run ``schedule``."""
    return run_schedule(
        qrl_state(grid), grid, schedule, outcomes, np.random.default_rng(seed), correct_displacements, seed
    )


def extract_distributed(state: GaussianState, grid: MacronodeGrid, slots: Sequence) -> GaussianState:
    """Reduced state of distributed ``(macronode, slot)`` modes, in order.

    Every macronode named in ``slots`` must still be fully unmeasured.
    """
    keys = [(tuple(mn), slot_index(s)) for mn, s in slots]
    sites = sorted({mn for mn, _ in keys})
    pos = [p for mn in sites for p in _macronode_positions(state, mn)]
    sub = state.reduce(pos)
    n = sub.n_modes
    big = np.kron(np.eye(len(sites)), FOURSPLITTER_BLOCK.T)
    zero = np.zeros((n, n))
    u = np.block([[big, zero], [zero, big]])
    dist = GaussianState(u @ sub.mean, u @ sub.cov @ u.T, sub.labels)
    return dist.reduce([dist.index_of((mn[0], mn[1], k)) for mn, k in keys])


def gate_test_grid(r: float, inputs: GaussianState, config: IOConfig = CANONICAL):
    """3x3 grid with a two-mode input on the centre macronode's ``alpha, beta``."""
    from .lattice import attach_inputs

    grid = MacronodeGrid(3, 3, r)
    centre = (1, 1)
    grid = attach_inputs(grid, [(centre, config.alpha), (centre, config.beta)], inputs)
    return grid, centre
