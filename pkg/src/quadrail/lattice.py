"""Quad-rail lattice construction, mode maps, inputs and projection.

Macronode ``(row, col)`` owns global modes ``4 * (row * cols + col) + k``.
In the distributed picture slot ``k`` is one of ``a, b, c, d`` and points
West, South, East, North respectively (north is ``row - 1``).  Every
lattice edge carries one two-mode cluster pair: the East slot ``c`` of a
macronode pairs with the West slot ``a`` of its eastern neighbour, and the
North slot ``d`` pairs with the South slot ``b`` of its northern neighbour.
Physical modes are obtained by applying the foursplitter to each macronode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .gaussian import (
    SAMPLE,
    GaussianState,
    GraphZ,
    graph_from_state,
    graph_to_dot,
    homodyne_condition,
    squeezed_vacuum,
    two_mode_cluster,
)
from .symplectic import FOURSPLITTER_BLOCK, SymplecticTransform

SLOTS = "abcd"
DIRECTIONS = {"a": "W", "b": "S", "c": "E", "d": "N"}
BOUNDARIES = ("open", "toroidal")
DEFAULT_MAX_MODES = 400

# slot -> (row offset, col offset, partner slot)
_PARTNER = {0: (0, -1, 2), 1: (1, 0, 3), 2: (0, 1, 0), 3: (-1, 0, 1)}


class LatticeError(ValueError):
    pass


class OccupancyError(LatticeError):
    pass


def slot_index(slot) -> int:
    if isinstance(slot, str):
        if slot not in SLOTS or len(slot) != 1:
            raise LatticeError(f"unknown slot {slot!r}; expected one of a, b, c, d")
        return SLOTS.index(slot)
    slot = int(slot)
    if not 0 <= slot < 4:
        raise LatticeError(f"slot index {slot} out of range")
    return slot


@dataclass(frozen=True)
class InputSpec:
    """An input state occupying one or more distributed slots."""

    slots: tuple
    state: GaussianState
    name: str = ""

    def __post_init__(self):
        slots = tuple((tuple(mn), slot_index(s)) for mn, s in self.slots)
        if len(slots) != self.state.n_modes:
            raise LatticeError(f"{self.state.n_modes}-mode input given {len(slots)} slots")
        object.__setattr__(self, "slots", slots)


@dataclass(frozen=True)
class MacronodeGrid:
    """Lattice geometry, squeezing, boundary policy and attached inputs.

    ``readout`` lists macronodes allowed up to four inputs; all others
    accept at most two.
    """

    rows: int
    cols: int
    r: float
    boundary: str = "open"
    inputs: tuple = ()
    readout: frozenset = field(default_factory=frozenset)
    max_modes: int = DEFAULT_MAX_MODES

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise LatticeError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if not self.r > 0:
            raise LatticeError(f"squeezing parameter must be positive, got {self.r}")
        if self.boundary not in BOUNDARIES:
            raise LatticeError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if 4 * self.rows * self.cols > self.max_modes:
            raise LatticeError(
                f"{self.rows}x{self.cols} grid needs {4 * self.rows * self.cols} modes, limit is {self.max_modes}"
            )
        object.__setattr__(self, "readout", frozenset(tuple(m) for m in self.readout))

    @property
    def n_macronodes(self) -> int:
        return self.rows * self.cols

    @property
    def n_modes(self) -> int:
        return 4 * self.n_macronodes

    def macronodes(self) -> list:
        return [(i, j) for i in range(self.rows) for j in range(self.cols)]

    def check_macronode(self, mn) -> tuple:
        mn = tuple(mn)
        if len(mn) != 2 or not (0 <= mn[0] < self.rows and 0 <= mn[1] < self.cols):
            raise LatticeError(f"macronode {mn} outside {self.rows}x{self.cols} grid")
        return mn

    def mode_index(self, mn, k) -> int:
        row, col = self.check_macronode(mn)
        return 4 * (row * self.cols + col) + slot_index(k)

    def mode_label(self, index: int) -> tuple:
        index = int(index)
        if not 0 <= index < self.n_modes:
            raise IndexError(f"mode {index} out of range for {self.n_modes} modes")
        site, k = divmod(index, 4)
        return (site // self.cols, site % self.cols, k)

    def labels(self) -> tuple:
        return tuple(self.mode_label(i) for i in range(self.n_modes))

    def neighbor(self, mn, slot):
        """Macronode reached through ``slot``'s edge, or ``None`` at an open boundary."""
        row, col = self.check_macronode(mn)
        dr, dc, _ = _PARTNER[slot_index(slot)]
        row, col = row + dr, col + dc
        if self.boundary == "toroidal":
            return (row % self.rows, col % self.cols)
        if 0 <= row < self.rows and 0 <= col < self.cols:
            return (row, col)
        return None

    def partner(self, mn, slot):
        """``(macronode, slot)`` holding the other half of ``slot``'s pair."""
        nb = self.neighbor(mn, slot)
        if nb is None:
            return None
        return (nb, _PARTNER[slot_index(slot)][2])

    def edges(self) -> list:
        """Lattice edges as ``((mn, slot), (mn', slot'))`` from East and North slots."""
        out = []
        for mn in self.macronodes():
            for k in (2, 3):
                p = self.partner(mn, k)
                if p is not None:
                    out.append(((mn, k), p))
        return out

    def input_slots(self) -> dict:
        """Map ``(mn, slot) -> (input number, position within that input)``."""
        table = {}
        for n, entry in enumerate(self.inputs):
            for pos, key in enumerate(entry.slots):
                table[key] = (n, pos)
        return table

    def occupancy(self, mn) -> int:
        mn = tuple(mn)
        return sum(1 for (m, _) in self.input_slots() if m == mn)

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "r": self.r,
            "boundary": self.boundary,
            "readout": sorted([list(m) for m in self.readout]),
            "inputs": [
                {
                    "name": entry.name,
                    "slots": [{"macronode": list(mn), "slot": SLOTS[k]} for mn, k in entry.slots],
                    "state": entry.state.to_json(),
                }
                for entry in self.inputs
            ],
        }

    @classmethod
    def from_json(cls, data: dict, max_modes: int = DEFAULT_MAX_MODES) -> "MacronodeGrid":
        grid = cls(
            int(data["rows"]),
            int(data["cols"]),
            float(data["r"]),
            data.get("boundary", "open"),
            readout=frozenset(tuple(m) for m in data.get("readout", [])),
            max_modes=max_modes,
        )
        for item in data.get("inputs", []):
            slots = [(tuple(s["macronode"]), s["slot"]) for s in item["slots"]]
            grid = attach_inputs(grid, slots, GaussianState.from_json(item["state"]), name=item.get("name", ""))
        return grid


@dataclass(frozen=True)
class ModeMap:
    """Index tables relating physical and distributed modes of a grid."""

    grid: MacronodeGrid

    def physical(self, mn, k: int) -> int:
        return self.grid.mode_index(mn, k)

    def distributed(self, mn, slot) -> int:
        return self.grid.mode_index(mn, slot)

    def macronode_modes(self, mn) -> list:
        return [self.grid.mode_index(mn, k) for k in range(4)]

    def physical_to_distributed(self) -> SymplecticTransform:
        """Global ``x_D = A^-1 x_P``, one ``A~^T`` block per macronode."""
        return _blockwise(self.grid.n_macronodes, FOURSPLITTER_BLOCK.T)

    def distributed_to_physical(self) -> SymplecticTransform:
        return _blockwise(self.grid.n_macronodes, FOURSPLITTER_BLOCK)


def _blockwise(n_sites: int, block: np.ndarray) -> SymplecticTransform:
    n = 4 * n_sites
    big = np.kron(np.eye(n_sites), block)
    zero = np.zeros((n, n))
    return SymplecticTransform(np.block([[big, zero], [zero, big]]))


def attach_inputs(grid: MacronodeGrid, slots: Sequence, state: GaussianState, name: str = "", readout: bool = False) -> MacronodeGrid:
    """Place a (possibly multi-mode) input on distributed ``slots``.

    Args:
        grid: lattice to extend.
        slots: one ``(macronode, slot)`` per mode of ``state``.
        state: input state, mode ``i`` goes to ``slots[i]``.
        name: optional label kept in the grid description.
        readout: mark the touched macronodes as readout sites (limit 4).

    Raises:
        OccupancyError: on a slot collision, on two inputs at the ends of one
            lattice edge, or if a gate macronode would hold more than two inputs.
    """
    entry = InputSpec(tuple((grid.check_macronode(mn), s) for mn, s in slots), state, name)
    taken = grid.input_slots()
    if len(set(entry.slots)) != len(entry.slots):
        raise OccupancyError("input uses the same slot twice")
    used = set(taken) | set(entry.slots)
    for key in entry.slots:
        if key in taken:
            raise OccupancyError(f"slot {SLOTS[key[1]]} of macronode {key[0]} is already occupied")
        other = grid.partner(*key)
        if other is not None and other in used:
            raise OccupancyError(
                f"slots {SLOTS[key[1]]} of {key[0]} and {SLOTS[other[1]]} of {other[0]} share a lattice edge"
            )
    readout_set = set(grid.readout)
    if readout:
        readout_set.update(mn for mn, _ in entry.slots)
    new = MacronodeGrid(
        grid.rows, grid.cols, grid.r, grid.boundary, grid.inputs + (entry,), frozenset(readout_set), grid.max_modes
    )
    for mn in {mn for mn, _ in entry.slots}:
        limit = 4 if mn in new.readout else 2
        if new.occupancy(mn) > limit:
            raise OccupancyError(f"macronode {mn} would hold {new.occupancy(mn)} inputs (limit {limit})")
    return new


def attach_input(grid: MacronodeGrid, macronode, slot, input_state: GaussianState, name: str = "", readout: bool = False) -> MacronodeGrid:
    """Single-mode convenience wrapper around :func:`attach_inputs`."""
    return attach_inputs(grid, [(macronode, slot)], input_state, name=name, readout=readout)


def distributed_state(grid: MacronodeGrid) -> GaussianState:
    """The lattice before foursplitters: pairs, inputs and boundary padding."""
    n = grid.n_modes
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))

    def place(sub: GaussianState, modes):
        idx = list(modes) + [m + n for m in modes]
        mean[idx] = sub.mean
        cov[np.ix_(idx, idx)] = sub.cov

    filled = set()
    inputs = grid.input_slots()
    for entry in grid.inputs:
        modes = [grid.mode_index(mn, k) for mn, k in entry.slots]
        place(entry.state, modes)
        filled.update(modes)
    pair = two_mode_cluster(grid.r)
    for (m1, k1), (m2, k2) in grid.edges():
        if (m1, k1) in inputs or (m2, k2) in inputs:
            continue
        i, j = grid.mode_index(m1, k1), grid.mode_index(m2, k2)
        place(pair, [i, j])
        filled.update((i, j))
    pad = squeezed_vacuum(grid.r)
    for i in range(n):
        if i not in filled:
            place(pad, [i])
    return GaussianState(mean, cov, grid.labels())


def qrl_state(grid: MacronodeGrid) -> GaussianState:
    """Physical-picture QRL state for ``grid`` including its inputs."""
    d = distributed_state(grid)
    u = ModeMap(grid).distributed_to_physical().matrix
    return GaussianState(u @ d.mean, u @ d.cov @ u.T, d.labels)


def build_qrl(rows: int, cols: int, r: float, boundary: str = "open", max_modes: int = DEFAULT_MAX_MODES):
    """Build the input-free QRL.

    Returns:
        ``(state, grid)`` with the state in the physical picture.
    """
    grid = MacronodeGrid(rows, cols, r, boundary, max_modes=max_modes)
    return qrl_state(grid), grid


def _macronode_positions(state: GaussianState, mn) -> list:
    mn = tuple(mn)
    pos = []
    for k in range(4):
        try:
            pos.append(state.index_of((mn[0], mn[1], k)))
        except KeyError:
            raise LatticeError(f"macronode {mn} is not fully present in the state (mode {k} missing)") from None
    return pos


def _apply_blocks(state: GaussianState, macronodes: Iterable, block: np.ndarray) -> GaussianState:
    n = state.n_modes
    big = np.eye(n)
    for mn in macronodes:
        pos = _macronode_positions(state, mn)
        big[np.ix_(pos, pos)] = block
    zero = np.zeros((n, n))
    m = np.block([[big, zero], [zero, big]])
    return GaussianState(m @ state.mean, m @ state.cov @ m.T, state.labels)


def physical_to_distributed_state(state: GaussianState, grid: MacronodeGrid, macronodes=None) -> GaussianState:
    """Change mode decomposition ``x_D = A^-1 x_P`` on complete macronodes.

    Works on partially measured states: by default every macronode whose
    four modes are all still present is converted.
    """
    if macronodes is None:
        macronodes = present_macronodes(state, grid)
    return _apply_blocks(state, macronodes, FOURSPLITTER_BLOCK.T)


def distributed_to_physical_state(state: GaussianState, grid: MacronodeGrid, macronodes=None) -> GaussianState:
    if macronodes is None:
        macronodes = present_macronodes(state, grid)
    return _apply_blocks(state, macronodes, FOURSPLITTER_BLOCK)


def present_macronodes(state: GaussianState, grid: MacronodeGrid) -> list:
    labels = set(state.labels)
    out = []
    for mn in grid.macronodes():
        if all((mn[0], mn[1], k) in labels for k in range(4)):
            out.append(mn)
    if state.n_modes != len(labels & set(grid.labels())):
        raise LatticeError("state has modes that do not belong to the grid")
    return out


@dataclass(frozen=True)
class ProjectionReport:
    """Graph of a projected lattice and how well it matches a square lattice."""

    graph: GraphZ
    sites: tuple
    lattice_edges: dict
    max_off_lattice: float
    expected_weight: float

    @property
    def max_weight_error(self) -> float:
        if not self.lattice_edges:
            return 0.0
        return max(abs(abs(w) - self.expected_weight) for w in self.lattice_edges.values())


def project_to_square_lattice(state: GaussianState, grid: MacronodeGrid, outcomes=0.0, rng=None, kept_mode: int = 3):
    """Measure three physical modes per macronode in ``q``.

    Args:
        state: physical-picture QRL state without inputs.
        grid: its grid.
        outcomes: ``0.0`` (or any float) to force every outcome, or ``SAMPLE``.
        rng: generator used when sampling.
        kept_mode: physical mode left unmeasured in every macronode.

    Returns:
        ``(projected_state, ProjectionReport)``.
    """
    if grid.inputs:
        raise LatticeError("projection is defined for the input-free lattice")
    measured = [(mn[0], mn[1], k) for mn in grid.macronodes() for k in range(4) if k != kept_mode]
    for lab in measured:
        value = SAMPLE if outcomes == SAMPLE else float(outcomes)
        state, _ = homodyne_condition(state, state.index_of(lab), -np.pi / 2, value, rng)
    graph = graph_from_state(state)
    sites = tuple((lab[0], lab[1]) for lab in state.labels)
    expected = {}
    for (m1, _), (m2, _) in grid.edges():
        if m1 != m2:
            expected[tuple(sorted((m1, m2)))] = None
    lattice_edges = {}
    off = 0.0
    for i in range(len(sites)):
        for j in range(i + 1, len(sites)):
            key = tuple(sorted((sites[i], sites[j])))
            w = graph.Z[i, j]
            if key in expected:
                lattice_edges[key] = complex(w)
            else:
                off = max(off, abs(w))
    nonreal = [abs(w.imag) for w in lattice_edges.values()]
    lattice_edges = {k: float(w.real) for k, w in lattice_edges.items()}
    if nonreal:
        off = max(off, max(nonreal))
    report = ProjectionReport(graph, sites, lattice_edges, off, float(np.tanh(2 * grid.r) / 4))
    return state, report


def grid_to_dot(grid: MacronodeGrid, picture: str = "physical", tol: float = 1e-9) -> str:
    """DOT rendering of the lattice graph in the physical or distributed picture."""
    if picture not in ("physical", "distributed"):
        raise LatticeError(f"picture must be 'physical' or 'distributed', got {picture!r}")
    st = qrl_state(grid) if picture == "physical" else distributed_state(grid)
    inputs = [grid.mode_index(mn, k) for entry in grid.inputs for mn, k in entry.slots]
    labels = [
        f"{lab[0]},{lab[1]}:{lab[2] + 1 if picture == 'physical' else SLOTS[lab[2]]}" for lab in st.labels
    ]
    # inputs are localised to a single node only in the distributed picture
    g = graph_from_state(st)
    layers = [f"mode{lab[2] + 1}" if picture == "physical" else f"slot_{SLOTS[lab[2]]}" for lab in st.labels]
    return graph_to_dot(
        g, labels, inputs if picture == "distributed" else (), tol=tol, name=f"qrl_{picture}", layers=layers
    )
