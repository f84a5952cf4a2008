"""Compile Gaussian circuits into routed macronode measurement schedules.

A wire is a distributed slot that hosts one encoded mode.  Measuring the
macronode holding it teleports the mode through one of the macronode's
lattice edges to the neighbouring macronode.  Single-mode gates use the
restricted angles ``(x, x, y, y)``, which apply ``V(x, y)`` to the wire and to
whatever occupies the second input slot, so every macronode hosts one wire
except at two-mode junctions.  Consecutive single-mode gates on a wire are
fused and re-expressed with at most two ``V`` steps.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import SLOTS, MacronodeGrid, attach_inputs, slot_index
from .macronode import (
    IOConfig,
    MeasurementRecord,
    MeasurementSchedule,
    predicted_gate_ideal,
    single_mode_angles,
    two_mode_squeeze_angles,
    two_mode_squeeze_gate,
    v_gate,
    variable_beamsplitter_angles,
    variable_beamsplitter_gate,
)
from .symplectic import SymplecticTransform, embed, identity

IDENTITY_PAIR = (np.pi / 4, -np.pi / 4)
_OPPOSITE = {0: 2, 1: 3, 2: 0, 3: 1}


class CompileError(ValueError):
    pass


class RoutingError(CompileError):
    pass


# ---------------------------------------------------------------- program


@dataclass(frozen=True)
class SingleModeGate:
    """Single-mode gate given either as ``V`` angle pairs or as a 2x2 matrix.

    ``pairs`` apply in order, so ``[(x1, y1), (x2, y2)]`` is ``V2 V1``.
    """

    wire: int
    pairs: tuple = None
    matrix: tuple = None

    def __post_init__(self):
        if (self.pairs is None) == (self.matrix is None):
            raise CompileError("SingleModeGate needs exactly one of pairs or matrix")
        if self.pairs is not None:
            object.__setattr__(self, "pairs", tuple((float(x), float(y)) for x, y in self.pairs))
        else:
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (2, 2):
                raise CompileError(f"single-mode matrix must be 2x2, got {m.shape}")
            if abs(np.linalg.det(m) - 1) > 1e-9:
                raise CompileError(f"single-mode matrix is not symplectic (det = {np.linalg.det(m):.6g})")
            object.__setattr__(self, "matrix", tuple(map(tuple, m.tolist())))

    @property
    def wires(self) -> tuple:
        return (self.wire,)

    def symplectic(self) -> SymplecticTransform:
        if self.matrix is not None:
            return SymplecticTransform(np.array(self.matrix))
        out = identity(1)
        for x, y in self.pairs:
            out = v_gate(x, y) @ out
        return out


@dataclass(frozen=True)
class TwoModeSqueeze:
    wires: tuple
    theta1: float
    theta2: float

    def angles(self):
        return two_mode_squeeze_angles(self.theta1, self.theta2)

    def symplectic(self) -> SymplecticTransform:
        return two_mode_squeeze_gate(self.theta1, self.theta2)


@dataclass(frozen=True)
class VariableBeamsplitter:
    wires: tuple
    theta1: float
    theta2: float

    def angles(self):
        return variable_beamsplitter_angles(self.theta1, self.theta2)

    def symplectic(self) -> SymplecticTransform:
        return variable_beamsplitter_gate(self.theta1, self.theta2)


@dataclass(frozen=True)
class TwoModeGate:
    """General junction gate with canonical macronode angles."""

    wires: tuple
    theta: tuple

    def angles(self):
        return np.asarray(self.theta, dtype=float)

    def symplectic(self) -> SymplecticTransform:
        return predicted_gate_ideal(self.theta)


@dataclass(frozen=True)
class Readout:
    wires: tuple
    theta: float = 0.0


GATE_TYPES = {
    "single": SingleModeGate,
    "two_mode_squeeze": TwoModeSqueeze,
    "variable_beamsplitter": VariableBeamsplitter,
    "two_mode": TwoModeGate,
    "readout": Readout,
}
_TYPE_NAMES = {v: k for k, v in GATE_TYPES.items()}


@dataclass(frozen=True)
class CircuitProgram:
    """Wires, optional start positions, and an ordered gate list.

    Args:
        n_wires: number of encoded inputs.
        gates: sequence of gate objects.
        starts: optional ``(macronode, slot)`` per wire; defaults to the West
            slot of evenly spaced macronodes in column 0.
    """

    n_wires: int
    gates: tuple = ()
    starts: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_wires < 1:
            raise CompileError("program needs at least one wire")
        done = set()
        for g in self.gates:
            wires = tuple(g.wires)
            if len(set(wires)) != len(wires):
                raise CompileError(f"{type(g).__name__} acts on a repeated wire")
            for w in wires:
                if not 0 <= w < self.n_wires:
                    raise CompileError(f"gate references wire {w}, program has {self.n_wires}")
                if w in done:
                    raise CompileError(f"wire {w} is used after its readout")
            if isinstance(g, Readout):
                done.update(wires)
            elif not isinstance(g, SingleModeGate) and len(wires) != 2:
                raise CompileError(f"{type(g).__name__} needs two wires")
        if self.starts is not None:
            starts = tuple((tuple(mn), slot_index(s)) for mn, s in self.starts)
            if len(starts) != self.n_wires:
                raise CompileError("one start position per wire is required")
            object.__setattr__(self, "starts", starts)

    def unitary(self) -> SymplecticTransform:
        """Target Gaussian unitary on all wires (readouts excluded)."""
        out = identity(self.n_wires)
        for g in self.gates:
            if isinstance(g, Readout):
                continue
            out = embed(g.symplectic(), list(g.wires), self.n_wires) @ out
        return out

    def to_json(self) -> dict:
        gates = []
        for g in self.gates:
            kind = _TYPE_NAMES[type(g)]
            item = {"type": kind}
            if isinstance(g, SingleModeGate):
                item["wire"] = g.wire
                if g.pairs is not None:
                    item["pairs"] = [list(p) for p in g.pairs]
                else:
                    item["matrix"] = [list(row) for row in g.matrix]
            elif isinstance(g, Readout):
                item["wires"] = list(g.wires)
                item["theta"] = g.theta
            elif isinstance(g, TwoModeGate):
                item["wires"] = list(g.wires)
                item["theta"] = list(g.theta)
            else:
                item["wires"] = list(g.wires)
                item["theta1"] = g.theta1
                item["theta2"] = g.theta2
            gates.append(item)
        out = {"n_wires": self.n_wires, "gates": gates}
        if self.starts is not None:
            out["starts"] = [{"macronode": list(mn), "slot": SLOTS[k]} for mn, k in self.starts]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "CircuitProgram":
        gates = []
        for item in data.get("gates", []):
            kind = item["type"]
            if kind == "single":
                gates.append(
                    SingleModeGate(
                        item["wire"],
                        pairs=None if "pairs" not in item else [tuple(p) for p in item["pairs"]],
                        matrix=item.get("matrix"),
                    )
                )
            elif kind == "readout":
                gates.append(Readout(tuple(item["wires"]), float(item.get("theta", 0.0))))
            elif kind == "two_mode":
                gates.append(TwoModeGate(tuple(item["wires"]), tuple(item["theta"])))
            elif kind in GATE_TYPES:
                gates.append(GATE_TYPES[kind](tuple(item["wires"]), float(item["theta1"]), float(item["theta2"])))
            else:
                raise CompileError(f"unknown gate type {kind!r}")
        starts = data.get("starts")
        if starts is not None:
            starts = [(tuple(s["macronode"]), s["slot"]) for s in starts]
        return cls(int(data["n_wires"]), tuple(gates), starts)


# ---------------------------------------------------------------- decomposition


def _one_v(m: np.ndarray):
    """Angles ``(x, y)`` with ``V(x, y) = m`` for a symmetric-sandwich ``m``."""
    a, b, d = m[0, 0], m[0, 1], m[1, 1]
    k = np.hypot(a + d, 2 * b)
    tau = (k + a - d) / 2
    phi = np.arctan2(-2 * b, a + d) / 2
    return (phi + np.arctan(tau), phi - np.arctan(tau))


def decompose_single_mode(target, tol: float = 1e-9) -> list:
    """Write a 2x2 symplectic matrix as at most two ``V`` steps.

    ``V(x, y)`` is exactly the set of symplectic matrices with ``m21 = -m12``.
    Otherwise a rotation ``R(phi)`` with ``tan(phi) = -(m12 + m21)/(m11 - m22)``
    is split off first, which leaves a matrix of that form.

    Returns:
        ``[(x1, y1)]`` or ``[(x1, y1), (x2, y2)]`` with ``V2 V1 = target``.

    Raises:
        CompileError: if ``target`` is not symplectic or the residual exceeds ``tol``.
    """
    m = target.matrix if isinstance(target, SymplecticTransform) else np.asarray(target, dtype=float)
    if m.shape != (2, 2) or abs(np.linalg.det(m) - 1) > 1e-9:
        raise CompileError("target must be a 2x2 symplectic matrix")
    scale = max(1.0, np.max(np.abs(m)))
    if abs(m[1, 0] + m[0, 1]) <= 1e-12 * scale:
        pairs = [_one_v(m)]
    else:
        phi = np.arctan2(-(m[0, 1] + m[1, 0]), m[0, 0] - m[1, 1])
        c, s = np.cos(phi), np.sin(phi)
        rest = m @ np.array([[c, s], [-s, c]])
        pairs = [(phi / 2 + np.pi / 4, phi / 2 - np.pi / 4), _one_v(rest)]
    prod = np.eye(2)
    for x, y in pairs:
        prod = v_gate(x, y).matrix @ prod
    residual = float(np.max(np.abs(prod - m)))
    if residual > tol * scale:
        raise CompileError(f"decomposition residual {residual:.3e} exceeds tolerance")
    return pairs


# ---------------------------------------------------------------- routing


@dataclass
class WireRoute:
    """Where each wire goes and how each measured macronode is partitioned.

    Attributes:
        starts: initial ``(macronode, slot)`` of every wire.
        paths: measured macronodes per wire, in order.
        partitions: macronode -> configuration label (``alpha beta gamma delta``).
        record_wires: wires hosted by each schedule record, in schedule order.
        intersections: junction macronodes.
        finals: final ``(macronode, slot)`` of wires that are not read out.
        readouts: wire -> ``(macronode, slot, record index)``.
    """

    starts: list
    paths: list
    partitions: dict = field(default_factory=dict)
    record_wires: list = field(default_factory=list)
    intersections: list = field(default_factory=list)
    finals: dict = field(default_factory=dict)
    readouts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "starts": [{"macronode": list(mn), "slot": SLOTS[k]} for mn, k in self.starts],
            "paths": [[list(mn) for mn in p] for p in self.paths],
            "partitions": [{"macronode": list(mn), "config": c} for mn, c in sorted(self.partitions.items())],
            "record_wires": [list(w) for w in self.record_wires],
            "intersections": [list(mn) for mn in self.intersections],
            "finals": {str(w): {"macronode": list(mn), "slot": SLOTS[k]} for w, (mn, k) in sorted(self.finals.items())},
            "readouts": {
                str(w): {"macronode": list(mn), "slot": SLOTS[k], "record": i}
                for w, (mn, k, i) in sorted(self.readouts.items())
            },
        }

    def final_slots(self, wires: Sequence[int] | None = None) -> list:
        wires = sorted(self.finals) if wires is None else wires
        return [self.finals[w] for w in wires]


class _Planner:
    def __init__(self, grid: MacronodeGrid, starts):
        self.grid = grid
        self.measured = set()
        self.used = set()
        self.pos = {w: s for w, s in enumerate(starts)}
        self.records = []
        self.record_wires = []
        self.paths = [[] for _ in starts]
        self.partitions = {}
        self.intersections = []
        for mn, k in starts:
            if self.grid.partner(mn, k) is not None:
                self.used.add(self._edge(mn, k))

    def copy(self) -> "_Planner":
        other = _Planner.__new__(_Planner)
        other.grid = self.grid
        other.measured = set(self.measured)
        other.used = set(self.used)
        other.pos = dict(self.pos)
        other.records = list(self.records)
        other.record_wires = list(self.record_wires)
        other.paths = [list(p) for p in self.paths]
        other.partitions = dict(self.partitions)
        other.intersections = list(self.intersections)
        return other

    def _edge(self, mn, k):
        p = self.grid.partner(mn, k)
        return frozenset([(tuple(mn), k), p]) if p is not None else None

    def hosts(self, exclude=()):
        return {self.pos[w][0] for w in self.pos if w not in exclude}

    def fresh(self, mn, k) -> bool:
        p = self.grid.partner(mn, k)
        if p is None or mn in self.measured or p[0] in self.measured:
            return False
        if p[0] == tuple(mn):
            return False
        return self._edge(mn, k) not in self.used

    def exits(self, mn, entry):
        return [k for k in range(4) if k != entry and self.fresh(mn, k)]

    def _measure(self, mn, config: IOConfig, theta, wires, note):
        for k in (slot_index(config.gamma), slot_index(config.delta)):
            self.used.add(self._edge(mn, k))
        self.measured.add(mn)
        self.records.append(MeasurementRecord(mn, tuple(theta), "gate", config, note))
        self.record_wires.append(tuple(wires))
        self.partitions[mn] = config.label

    def step(self, w, pair, gamma, note="single"):
        """One ``V`` step of wire ``w`` leaving through ``gamma``."""
        mn, entry = self.pos[w]
        avoid = self.hosts(exclude=(w,))
        deltas = [k for k in self.exits(mn, entry) if k != gamma]
        if not deltas:
            raise RoutingError(f"no free edge for the idle output of macronode {mn}")
        # keep idle outputs away from macronodes that still host wires
        deltas.sort(key=lambda k: (self.grid.partner(mn, k)[0] in avoid, k))
        delta = deltas[0]
        beta = ({0, 1, 2, 3} - {entry, gamma, delta}).pop()
        config = IOConfig(SLOTS[entry], SLOTS[beta], SLOTS[gamma], SLOTS[delta])
        self._measure(mn, config, single_mode_angles(*pair), (w,), note)
        self.paths[w].append(mn)
        self.pos[w] = self.grid.partner(mn, gamma)

    def can_step(self, w, gamma) -> bool:
        mn, entry = self.pos[w]
        if gamma == entry or not self.fresh(mn, gamma):
            return False
        if self.grid.partner(mn, gamma)[0] in self.hosts(exclude=(w,)):
            return False
        return len(self.exits(mn, entry)) >= 2

    def walk(self, w, pairs):
        """Apply ``pairs`` as consecutive steps, preferring straight moves with room ahead."""
        for pair in pairs:
            mn, entry = self.pos[w]
            options = [g for g in range(4) if self.can_step(w, g)]
            if not options:
                raise RoutingError(f"wire {w} is stuck at macronode {mn}")

            def score(g):
                nxt, arrive = self.grid.partner(mn, g)
                trial = self.copy()
                trial.measured.add(mn)
                trial.used.add(self._edge(mn, g))
                room = len(trial.exits(nxt, arrive))
                return (room < 2, g != _OPPOSITE[entry], g)

            self.step(w, pair, min(options, key=score))

    def candidate_paths(self, w, target, min_steps=0, extra_avoid=(), limit=4, slack=4):
        """Up to ``limit`` shortest simple paths of at least ``min_steps`` steps."""
        start, entry = self.pos[w]
        avoid = self.hosts(exclude=(w,)) | set(extra_avoid)
        avoid.discard(target)
        dist = _distances(self, w)
        if target not in dist:
            return []
        max_steps = max(min_steps, dist[target]) + slack
        found = []
        queue = deque([[start]])
        while queue and len(found) < limit:
            path = queue.popleft()
            cur = path[-1]
            if cur == target and len(path) - 1 >= min_steps:
                found.append(path)
                continue
            if len(path) - 1 >= max_steps:
                continue
            for k in range(4):
                if cur == start and k == entry:
                    continue
                if not self.fresh(cur, k):
                    continue
                nxt = self.grid.partner(cur, k)[0]
                if nxt in path or nxt in avoid:
                    continue
                queue.append(path + [nxt])
        return found

    def junction(self, w1, w2, theta, note, pending1=(), pending2=()):
        """Bring ``w1`` and ``w2`` together and measure the junction macronode.

        Pending single-mode steps are applied on the way; candidate
        junctions are scored by total steps and by whether both outputs
        keep two free exits.
        """
        d1 = _distances(self, w1)
        d2 = _distances(self, w2)
        cands = sorted(
            (d1[j] + d2[j], j) for j in d1 if j in d2 and j not in self.hosts(exclude=(w1, w2))
        )
        best = None
        legs = ((w1, pending1), (w2, pending2))
        for _, j in cands:
            # either wire may move first
            for (wa, pa), (wb, pb) in (legs, legs[::-1]):
                for p1 in self.candidate_paths(wa, j, len(pa)):
                    first = self.copy()
                    try:
                        first._follow_into(wa, p1, j, pa)
                    except RoutingError:
                        continue
                    for p2 in first.candidate_paths(wb, j, len(pb), extra_avoid=p1[:-1]):
                        second = first.copy()
                        try:
                            second._follow_into(wb, p2, j, pb)
                        except RoutingError:
                            continue
                        for swap in (False, True):
                            trial = second.copy()
                            try:
                                trial._emit_junction(w1, w2, j, theta, note, swap)
                            except RoutingError:
                                continue
                            key = (len(p1) + len(p2) + trial._crowding((w1, w2)), j, wa, swap)
                            if best is None or key < best[0]:
                                best = (key, trial)
        if best is None:
            raise RoutingError(f"no junction macronode found for wires {w1} and {w2}")
        self.__dict__.update(best[1].__dict__)
        return self.intersections[-1]

    def _follow_into(self, w, path, j, pending=()):
        pairs = list(pending) + [IDENTITY_PAIR] * (len(path) - 1 - len(pending))
        for nxt, pair in zip(path[1:], pairs):
            mn, entry = self.pos[w]
            gamma = next(k for k in range(4) if self.grid.neighbor(mn, k) == nxt and self.fresh(mn, k))
            if len(self.exits(mn, entry)) < 2:
                raise RoutingError(f"macronode {mn} has no idle exit")
            if nxt != j and nxt in self.hosts(exclude=(w,)):
                raise RoutingError("path crosses another wire")
            self.step(w, pair, gamma, note="single" if pair is not IDENTITY_PAIR else "transport")

    def _crowding(self, wires) -> int:
        """Penalty for wires left with little room to move on."""
        score = 0
        for w in wires:
            mn, entry = self.pos[w]
            if len(self.exits(mn, entry)) < 2:
                score += 3
            if mn[0] in (0, self.grid.rows - 1) or mn[1] in (0, self.grid.cols - 1):
                score += 2
        return score

    def _emit_junction(self, w1, w2, j, theta, note, swap=False):
        (m1, s1), (m2, s2) = self.pos[w1], self.pos[w2]
        if m1 != j or m2 != j or s1 == s2:
            raise RoutingError("wires did not meet")
        outs = [k for k in range(4) if k not in (s1, s2)]
        if not all(self.fresh(j, k) for k in outs):
            raise RoutingError(f"junction {j} lacks two free exits")
        if any(self.grid.partner(j, k)[0] in self.hosts(exclude=(w1, w2)) for k in outs):
            raise RoutingError(f"junction {j} would send an output onto another wire")
        gamma = _OPPOSITE[s1] if _OPPOSITE[s1] in outs else outs[0]
        delta = next(k for k in outs if k != gamma)
        if swap:
            gamma, delta = delta, gamma
        config = IOConfig(SLOTS[s1], SLOTS[s2], SLOTS[gamma], SLOTS[delta])
        self._measure(j, config, theta, (w1, w2), note)
        self.intersections.append(j)
        self.paths[w1].append(j)
        self.paths[w2].append(j)
        self.pos[w1] = self.grid.partner(j, gamma)
        self.pos[w2] = self.grid.partner(j, delta)


def _distances(planner: _Planner, w) -> dict:
    start, entry = planner.pos[w]
    avoid = planner.hosts(exclude=(w,))
    dist = {start: 0}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for k in range(4):
            if cur == start and k == entry:
                continue
            if not planner.fresh(cur, k):
                continue
            nxt = planner.grid.partner(cur, k)[0]
            if nxt in dist:
                continue
            dist[nxt] = dist[cur] + 1
            if nxt not in avoid:
                queue.append(nxt)
    return dist


def default_starts(n_wires: int, grid_dims) -> list:
    rows, _ = grid_dims
    if n_wires > rows:
        raise CompileError(f"{n_wires} wires need at least {n_wires} rows")
    return [((int((w + 0.5) * rows / n_wires), 0), 0) for w in range(n_wires)]


def _plan(program: CircuitProgram, grid: MacronodeGrid, fuse: bool):
    starts = list(program.starts) if program.starts is not None else default_starts(program.n_wires, (grid.rows, grid.cols))
    for mn, _ in starts:
        grid.check_macronode(mn)
    if len(set(starts)) != len(starts):
        raise CompileError("two wires start on the same slot")
    for key in starts:
        if grid.partner(*key) in starts:
            raise RoutingError(f"wires starting at {key} and {grid.partner(*key)} would share a lattice edge")
    planner = _Planner(grid, starts)
    pending = {w: [] for w in range(program.n_wires)}
    readouts = {}
    schedule_tail = []

    def take(w):
        total = identity(1)
        for mat in pending[w]:
            total = mat @ total
        pending[w] = []
        if np.allclose(total.matrix, np.eye(2), atol=1e-12):
            return []
        return decompose_single_mode(total)

    def flush(w):
        pairs = take(w)
        if pairs:
            planner.walk(w, pairs)

    for g in program.gates:
        if isinstance(g, SingleModeGate):
            pending[g.wire].append(g.symplectic())
            if not fuse:
                flush(g.wire)
        elif isinstance(g, Readout):
            for w in g.wires:
                flush(w)
                mn, k = planner.pos[w]
                readouts[w] = (mn, k)
                schedule_tail.append((w, mn, k, g.theta))
        else:
            w1, w2 = g.wires
            planner.junction(w1, w2, g.angles(), _TYPE_NAMES[type(g)], take(w1), take(w2))
    for w in range(program.n_wires):
        if w not in readouts:
            flush(w)
    return planner, readouts, schedule_tail, starts


def route_wires(program: CircuitProgram, grid_dims, r: float = 5.0, fuse: bool = True) -> WireRoute:
    """Plan deterministic edge-disjoint wire paths for ``program``."""
    return compile(program, grid_dims, r, fuse)[2]


def compile(program: CircuitProgram, grid_dims, r: float, fuse: bool = True):
    """Compile ``program`` onto a ``rows x cols`` lattice.

    Returns:
        ``(grid, schedule, route)``.  ``grid`` carries no input states yet;
        use :func:`attach_program_inputs` before simulating.

    Raises:
        RoutingError: if the lattice is too small or a wire gets stuck.
    """
    rows, cols = grid_dims
    grid = MacronodeGrid(int(rows), int(cols), r)
    planner, readouts, tail, starts = _plan(program, grid, fuse)
    records = list(planner.records)
    record_wires = list(planner.record_wires)
    route = WireRoute(starts, planner.paths, planner.partitions, [], planner.intersections)
    readout_sites = set()
    for w, mn, k, theta in tail:
        if mn in planner.measured:
            raise RoutingError(f"readout macronode {mn} was already measured")
        if mn in readout_sites:
            raise RoutingError(f"two readouts share macronode {mn}")
        readout_sites.add(mn)
        route.readouts[w] = (mn, k, len(records))
        records.append(MeasurementRecord(mn, (theta,) * 4, "readout", IOConfig(), "readout"))
        record_wires.append((w,))
        route.paths[w].append(mn)
    for w in range(program.n_wires):
        if w not in readouts:
            route.finals[w] = planner.pos[w]
    finals_sites = {mn for mn, _ in route.finals.values()}
    if finals_sites & (planner.measured | readout_sites):
        raise RoutingError("a wire ends on a measured macronode")
    route.record_wires = record_wires
    grid = MacronodeGrid(grid.rows, grid.cols, grid.r, readout=frozenset(readout_sites))
    return grid, MeasurementSchedule(tuple(records)), route


def attach_program_inputs(grid: MacronodeGrid, route: WireRoute, state) -> MacronodeGrid:
    """Place an ``n_wires``-mode input state on the wires' start slots."""
    return attach_inputs(grid, [(mn, k) for mn, k in route.starts], state, name="program")


def routing_map(grid: MacronodeGrid, route: WireRoute) -> str:
    """ASCII picture of the routed lattice, north at the top.

    ``>w`` start of wire ``w``, ``w`` a single-mode step, ``X`` a junction,
    ``Rw`` a readout, ``*w`` a final position and ``.`` an idle macronode.
    """
    cells = {mn: " . " for mn in grid.macronodes()}
    for w, path in enumerate(route.paths):
        for mn in path:
            if cells[mn] == " . ":
                cells[mn] = f" {w} "
    for mn in route.intersections:
        cells[mn] = " X "
    for w, (mn, _, _) in route.readouts.items():
        cells[mn] = f"R{w} "
    for w, (mn, _) in route.finals.items():
        cells[mn] = f"*{w} "
    for w, (mn, _) in enumerate(route.starts):
        if cells[mn].strip() in (str(w), "."):
            cells[mn] = f">{w} "
    lines = ["".join(cells[(i, j)] for j in range(grid.cols)).rstrip() for i in range(grid.rows)]
    return "\n".join(lines) + "\n"
