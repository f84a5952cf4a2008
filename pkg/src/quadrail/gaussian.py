"""Gaussian states, the graphical calculus and homodyne conditioning.

States are stored as (mean, covariance) in qqpp ordering with vacuum
covariance ``I/2``.  This module is the brute-force reference that every
closed-form prediction elsewhere in the package is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .symplectic import SymplecticTransform, embed, omega, rotation

SAMPLE = "sample"

SYMMETRY_TOL = 1e-12
PHYSICAL_TOL = 1e-9
PURITY_TOL = 1e-6
VARIANCE_FLOOR = 1e-14


class GaussianStateError(ValueError):
    pass


class MixedStateError(GaussianStateError):
    """Raised when a pure-state operation receives a mixed state."""

    def __init__(self, defect: float):
        super().__init__(f"state is not pure: det(2 cov) - 1 = {defect:.3e}")
        self.defect = defect


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Gaussian state over ``N`` modes.

    Attributes:
        mean: length ``2N`` vector of quadrature means.
        cov: ``2N x 2N`` symmetric covariance, vacuum = ``I/2``.
        labels: one hashable label per mode; defaults to ``0..N-1``.

    Symmetry is enforced on construction; the uncertainty relation is only
    reported by :meth:`is_physical`, so that classical reference inputs
    (zero covariance) can still be propagated.
    """

    mean: np.ndarray
    cov: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        cov = _frozen(self.cov)
        mean = _frozen(self.mean)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise GaussianStateError(f"covariance must be 2N x 2N, got {cov.shape}")
        if mean.shape != (cov.shape[0],):
            raise GaussianStateError(f"mean must have length {cov.shape[0]}, got {mean.shape}")
        asym = np.max(np.abs(cov - cov.T)) if cov.size else 0.0
        if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(cov))):
            raise GaussianStateError(f"covariance not symmetric (max asymmetry {asym:.2e})")
        labels = tuple(range(cov.shape[0] // 2)) if self.labels is None else tuple(self.labels)
        if len(labels) != cov.shape[0] // 2:
            raise GaussianStateError(f"{len(labels)} labels for {cov.shape[0] // 2} modes")
        if len(set(labels)) != len(labels):
            raise GaussianStateError("mode labels must be unique")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "labels", labels)

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def index_of(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no mode labelled {label!r}") from None

    def quadrature_indices(self, modes: Sequence[int]) -> list:
        return list(modes) + [m + self.n_modes for m in modes]

    def reduce(self, modes: Sequence[int]) -> "GaussianState":
        """Marginal state on ``modes`` (positional indices), in the given order."""
        idx = self.quadrature_indices(modes)
        return GaussianState(
            self.mean[idx], self.cov[np.ix_(idx, idx)], tuple(self.labels[m] for m in modes)
        )

    def reduce_labels(self, labels: Sequence[Hashable]) -> "GaussianState":
        return self.reduce([self.index_of(lab) for lab in labels])

    def relabel(self, labels: Sequence[Hashable]) -> "GaussianState":
        return GaussianState(self.mean, self.cov, tuple(labels))

    def purity_defect(self) -> float:
        """``det(2 cov) - 1``; zero for pure states."""
        sign, logdet = np.linalg.slogdet(2.0 * self.cov)
        return float(sign * np.exp(logdet) - 1.0)

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        return abs(self.purity_defect()) <= tol

    def min_uncertainty_eigenvalue(self) -> float:
        """Smallest eigenvalue of ``cov + i Omega / 2`` (>= 0 for physical states)."""
        herm = self.cov + 0.5j * omega(self.n_modes)
        return float(np.min(np.linalg.eigvalsh(herm)))

    def is_physical(self, tol: float = PHYSICAL_TOL) -> bool:
        return self.min_uncertainty_eigenvalue() >= -tol

    def allclose(self, other: "GaussianState", atol: float = 1e-9) -> bool:
        return bool(
            self.n_modes == other.n_modes
            and np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
        )

    def to_json(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "labels": [_label_to_json(lab) for lab in self.labels],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GaussianState":
        labels = data.get("labels")
        if labels is not None:
            labels = tuple(_label_from_json(lab) for lab in labels)
        return cls(np.array(data["mean"]), np.array(data["cov"]), labels)


def _label_to_json(label):
    return list(label) if isinstance(label, tuple) else label


def _label_from_json(label):
    return tuple(label) if isinstance(label, list) else label


@dataclass(frozen=True, eq=False)
class GraphZ:
    """Complex adjacency matrix ``Z = U + iV`` of a Gaussian pure state."""

    Z: np.ndarray

    def __post_init__(self):
        z = _frozen(self.Z, dtype=complex)
        if z.ndim != 2 or z.shape[0] != z.shape[1]:
            raise GaussianStateError(f"Z must be square, got {z.shape}")
        if z.size and np.max(np.abs(z - z.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(z))):
            raise GaussianStateError("Z must be symmetric")
        if z.size:
            lam = np.linalg.eigvalsh((z.imag + z.imag.T) / 2)
            if lam[0] <= 0:
                raise GaussianStateError(f"Im Z must be positive definite (min eigenvalue {lam[0]:.3e})")
        object.__setattr__(self, "Z", z)

    @property
    def n_modes(self) -> int:
        return self.Z.shape[0]

    def to_json(self) -> dict:
        return {"n_modes": self.n_modes, "re": self.Z.real.tolist(), "im": self.Z.imag.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "GraphZ":
        return cls(np.array(data["re"]) + 1j * np.array(data["im"]))


@dataclass(frozen=True)
class SqueezingParams:
    """Graph weights of a two-mode cluster state made with squeezing ``r``."""

    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"squeezing parameter must be positive, got {self.r}")

    @property
    def epsilon(self) -> float:
        return 1.0 / np.cosh(2 * self.r)

    @property
    def t(self) -> float:
        return float(np.tanh(2 * self.r))


def vacuum(n_modes: int = 1, labels=None) -> GaussianState:
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes) / 2, labels)


def squeezed_vacuum(r: float, labels=None) -> GaussianState:
    """Single-mode vacuum squeezed in ``p`` by ``e^{-r}`` (``q`` anti-squeezed)."""
    return GaussianState(np.zeros(2), np.diag([np.exp(2 * r), np.exp(-2 * r)]) / 2, labels)


def coherent(q: float, p: float) -> GaussianState:
    return GaussianState(np.array([q, p], dtype=float), np.eye(2) / 2)


def state_from_graph(g: GraphZ, mean=None, labels=None) -> GaussianState:
    """Covariance of the pure state ``psi_Z``.

    With ``Z = U + iV`` the nullifiers ``p - Z q`` give
    ``cov = (1/2) [[V^-1, V^-1 U], [U V^-1, V + U V^-1 U]]``.
    """
    u, v = g.Z.real, g.Z.imag
    vinv = np.linalg.inv(v)
    cov = 0.5 * np.block([[vinv, vinv @ u], [u @ vinv, v + u @ vinv @ u]])
    cov = (cov + cov.T) / 2
    mean = np.zeros(2 * g.n_modes) if mean is None else mean
    return GaussianState(mean, cov, labels)


def graph_from_state(s: GaussianState, tol: float = PURITY_TOL) -> GraphZ:
    """Inverse of :func:`state_from_graph`; displacements are discarded.

    Raises:
        MixedStateError: if ``det(2 cov)`` deviates from 1 by more than ``tol``.
    """
    defect = s.purity_defect()
    if abs(defect) > tol:
        raise MixedStateError(defect)
    n = s.n_modes
    cqq = s.cov[:n, :n]
    cqp = s.cov[:n, n:]
    v = 0.5 * np.linalg.inv(cqq)
    u = np.linalg.solve(cqq, cqp)
    u = (u + u.T) / 2
    return GraphZ(u + 1j * (v + v.T) / 2)


def nullifier_residual(g: GraphZ, s: GaussianState) -> float:
    """Max variance of the nullifiers ``p - Z q`` in state ``s``.

    For each row ``k`` the nullifier is ``n_k = c_k . x`` with complex ``c_k``;
    the state is annihilated exactly when ``<n_k^dag n_k> = 0``.
    """
    n = g.n_modes
    coeff = np.hstack([-g.Z, np.eye(n)])
    sym = np.array(s.cov, dtype=complex) + 0.5j * omega(n)
    # <x_a x_b> = cov_ab + (i/2) Omega_ab for zero-mean states
    vals = np.einsum("ka,ab,kb->k", coeff.conj(), sym, coeff)
    return float(np.max(np.abs(vals)))


def wavefunction_amplitude(g: GraphZ, q) -> complex:
    """Position-space amplitude ``psi_Z(q)``."""
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size != g.n_modes:
        raise ValueError(f"expected {g.n_modes} coordinates, got {q.size}")
    norm = np.linalg.det(g.Z.imag) ** 0.25 / np.pi ** (g.n_modes / 4)
    return complex(norm * np.exp(0.5j * q @ g.Z @ q))


def apply_unitary(s: GaussianState, u: SymplecticTransform) -> GaussianState:
    if u.n_modes != s.n_modes:
        raise ValueError(f"{u.n_modes}-mode transform on {s.n_modes}-mode state")
    m = u.matrix
    return GaussianState(m @ s.mean + u.displacement, m @ s.cov @ m.T, s.labels)


def apply_on(s: GaussianState, u: SymplecticTransform, modes: Sequence[int]) -> GaussianState:
    """Apply a k-mode transform to positional ``modes`` of ``s``."""
    return apply_unitary(s, embed(u, modes, s.n_modes))


def displace(s: GaussianState, vector) -> GaussianState:
    return GaussianState(s.mean + np.asarray(vector, dtype=float), s.cov, s.labels)


class SingularGraphUpdate(np.linalg.LinAlgError):
    pass


def graph_update(g: GraphZ, u: SymplecticTransform, name: str = "gate", max_cond: float = 1e12) -> GraphZ:
    """Schrodinger-picture graph update ``Z' = (C + D Z)(A + B Z)^-1``."""
    if u.n_modes != g.n_modes:
        raise ValueError(f"{u.n_modes}-mode transform on {g.n_modes}-mode graph")
    a, b, c, d = u.blocks()
    lhs = a + b @ g.Z
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > max_cond:
        raise SingularGraphUpdate(f"A + BZ is singular for {name} (condition number {cond:.3e}); Z = {g.Z}")
    zp = (c + d @ g.Z) @ np.linalg.inv(lhs)
    return GraphZ((zp + zp.T) / 2)


def homodyne_vector(n_modes: int, mode: int, theta: float) -> np.ndarray:
    """Coefficients of ``p(theta) = p cos(theta) - q sin(theta)`` on ``mode``."""
    c = np.zeros(2 * n_modes)
    c[mode] = -np.sin(theta)
    c[mode + n_modes] = np.cos(theta)
    return c


def homodyne_condition(s: GaussianState, mode: int, theta: float, outcome=SAMPLE, rng=None):
    """Measure ``p(theta) = p cos(theta) - q sin(theta)`` on ``mode``.

    ``theta = 0`` measures ``p``; ``theta = -pi/2`` measures ``+q``.

    Args:
        s: state to condition.
        mode: positional index of the measured mode.
        theta: homodyne angle in radians.
        outcome: measured value, or ``SAMPLE`` to draw it from the marginal.
        rng: ``numpy.random.Generator`` used when sampling.

    Returns:
        ``(state, outcome)`` where ``state`` lives on the other ``N - 1`` modes.
    """
    n = s.n_modes
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n} modes")
    # rotate so the measured quadrature becomes p_mode
    rot = embed(rotation(-theta), [mode], n).matrix
    mean = rot @ s.mean
    cov = rot @ s.cov @ rot.T
    pk = mode + n
    var = cov[pk, pk]
    if var < -PHYSICAL_TOL:
        raise GaussianStateError(f"negative marginal variance {var:.3e} for mode {mode}")
    var = max(var, VARIANCE_FLOOR)
    if isinstance(outcome, str):
        if outcome != SAMPLE:
            raise ValueError(f"unknown outcome policy {outcome!r}")
        rng = np.random.default_rng() if rng is None else rng
        outcome = float(rng.normal(mean[pk], np.sqrt(var)))
    keep_modes = [i for i in range(n) if i != mode]
    keep = keep_modes + [i + n for i in keep_modes]
    cross = cov[keep, pk]
    new_mean = mean[keep] + cross * (outcome - mean[pk]) / var
    new_cov = cov[np.ix_(keep, keep)] - np.outer(cross, cross) / var
    new_cov = (new_cov + new_cov.T) / 2
    labels = tuple(s.labels[i] for i in keep_modes)
    return GaussianState(new_mean, new_cov, labels), float(outcome)


def quadrature_filter(s: GaussianState, mode: int, quadrature: str, kappa: float) -> GaussianState:
    """Apply the (renormalised) operator ``exp(-kappa x^2 / 2)`` to ``mode``.

    ``x`` is ``q`` or ``p``.  On the Wigner function this multiplies by
    ``exp(-kappa x^2)`` and convolves the conjugate quadrature with a
    Gaussian of variance ``kappa / 2``; both are exact Gaussian updates.
    """
    if kappa < 0:
        raise ValueError("filter strength must be non-negative")
    n = s.n_modes
    if quadrature == "q":
        x_idx, conj_idx = mode, mode + n
    elif quadrature == "p":
        x_idx, conj_idx = mode + n, mode
    else:
        raise ValueError(f"quadrature must be 'q' or 'p', got {quadrature!r}")
    cov = np.array(s.cov)
    cov[conj_idx, conj_idx] += kappa / 2
    if kappa == 0:
        return GaussianState(s.mean, cov, s.labels)
    # Bayesian update with a zero-valued observation of variance 1/(2 kappa)
    col = cov[:, x_idx].copy()
    denom = col[x_idx] + 1.0 / (2 * kappa)
    mean = s.mean - col * s.mean[x_idx] / denom
    cov = cov - np.outer(col, col) / denom
    return GaussianState(mean, (cov + cov.T) / 2, s.labels)


def tensor(*states: GaussianState) -> GaussianState:
    """Product state; modes are concatenated in argument order."""
    n = sum(s.n_modes for s in states)
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))
    labels = []
    start = 0
    for s in states:
        idx = list(range(start, start + s.n_modes))
        idx = idx + [i + n for i in idx]
        mean[idx] = s.mean
        cov[np.ix_(idx, idx)] = s.cov
        labels.extend(s.labels)
        start += s.n_modes
    if len(set(labels)) != len(labels):
        labels = None
    return GaussianState(mean, cov, labels)


def two_mode_cluster(r: float, labels=None) -> GaussianState:
    """Two-mode cluster state: self-loops ``i sech 2r``, edge ``tanh 2r``."""
    p = SqueezingParams(r)
    z = np.array([[1j * p.epsilon, p.t], [p.t, 1j * p.epsilon]])
    return state_from_graph(GraphZ(z), labels=labels)


def tmss(r: float, labels=None) -> GaussianState:
    """Two-mode squeezed state: a pi/4 phase delay away from :func:`two_mode_cluster`.

    Correlations are ``<q1 q2> = sinh(2r)/2`` and ``<p1 p2> = -sinh(2r)/2``.
    """
    local = embed(rotation(-np.pi / 4), [0], 2) @ embed(rotation(-np.pi / 4), [1], 2)
    return apply_unitary(two_mode_cluster(r, labels), local)


def random_pure_state(n_modes: int, rng, squeeze_scale: float = 1.0, mean_scale: float = 1.0) -> GaussianState:
    """Random pure Gaussian state built from a random well-conditioned graph."""
    x = rng.normal(size=(n_modes, n_modes)) * squeeze_scale
    u = (x + x.T) / 4
    y = rng.normal(size=(n_modes, n_modes)) * squeeze_scale / 2
    v = y @ y.T / n_modes + np.eye(n_modes) * 0.5 + np.diag(rng.uniform(0, 1, n_modes))
    return state_from_graph(GraphZ(u + 1j * v), mean=rng.normal(size=2 * n_modes) * mean_scale)


class GaussianChannel:
    """Ordered sequence of exact Gaussian operations on ``n_modes`` modes.

    Operations are ``("unitary", SymplecticTransform)`` or
    ``("filter", mode, quadrature, kappa)``; a filter is the renormalised
    non-unitary ``exp(-kappa x^2 / 2)``.
    """

    def __init__(self, n_modes: int, ops=()):
        self.n_modes = n_modes
        self.ops = list(ops)

    def unitary(self, u: SymplecticTransform, modes: Sequence[int] | None = None) -> "GaussianChannel":
        if modes is not None:
            u = embed(u, modes, self.n_modes)
        if u.n_modes != self.n_modes:
            raise ValueError("transform size does not match channel")
        self.ops.append(("unitary", u))
        return self

    def filter(self, mode: int, quadrature: str, kappa: float) -> "GaussianChannel":
        self.ops.append(("filter", mode, quadrature, kappa))
        return self

    def then(self, other: "GaussianChannel") -> "GaussianChannel":
        if other.n_modes != self.n_modes:
            raise ValueError("channel sizes differ")
        return GaussianChannel(self.n_modes, self.ops + other.ops)

    def apply(self, s: GaussianState) -> GaussianState:
        if s.n_modes != self.n_modes:
            raise ValueError(f"{self.n_modes}-mode channel on {s.n_modes}-mode state")
        for op in self.ops:
            if op[0] == "unitary":
                s = apply_unitary(s, op[1])
            else:
                s = quadrature_filter(s, op[1], op[2], op[3])
        return s

    def linearized(self):
        """First-order additive-noise form ``x -> X x + d`` plus noise ``Y``.

        Each filter contributes its convolution noise ``kappa/2`` on the
        conjugate quadrature; the state-dependent shrinkage is dropped.
        """
        n2 = 2 * self.n_modes
        x = np.eye(n2)
        d = np.zeros(n2)
        y = np.zeros((n2, n2))
        for op in self.ops:
            if op[0] == "unitary":
                m = op[1].matrix
                x = m @ x
                d = m @ d + op[1].displacement
                y = m @ y @ m.T
            else:
                _, mode, quad, kappa = op
                conj = mode + self.n_modes if quad == "q" else mode
                y[conj, conj] += kappa / 2
        return x, d, y


def graph_to_dot(g: GraphZ, labels=None, inputs=(), tol: float = 1e-9, name: str = "G", layers=None) -> str:
    """Render a graph with the simplified-calculus conventions.

    Self-loops are dropped, edges are blue for positive and yellow for
    negative real weight (grey when purely imaginary), and ``inputs``
    (positional indices) are green.  Complex edge weights are drawn dashed.

    Args:
        layers: optional per-node layer names; nodes sharing a name are
            grouped in one ``cluster_<name>`` subgraph.
    """
    labels = list(range(g.n_modes)) if labels is None else list(labels)
    inputs = set(inputs)
    lines = [f"graph {name} {{", "  node [shape=circle, style=filled, fillcolor=black, fontcolor=white];"]

    def node(i, indent="  "):
        colour = "green" if i in inputs else "black"
        return f'{indent}n{i} [label="{_dot_label(labels[i])}", fillcolor={colour}];'

    if layers is None:
        lines += [node(i) for i in range(g.n_modes)]
    else:
        for layer in dict.fromkeys(layers):
            lines.append(f'  subgraph cluster_{layer} {{ label="{layer}";')
            lines += [node(i, "    ") for i, lay in enumerate(layers) if lay == layer]
            lines.append("  }")
    for i in range(g.n_modes):
        for j in range(i + 1, g.n_modes):
            w = g.Z[i, j]
            if abs(w) <= tol:
                continue
            if abs(w.real) <= tol:
                colour = "gray"
            else:
                colour = "blue" if w.real > 0 else "gold"
            if abs(w.imag) > tol:
                text, style = f"{w.real:.4g}{w.imag:+.4g}i", ", style=dashed"
            else:
                text, style = f"{w.real:.4g}", ""
            lines.append(f'  n{i} -- n{j} [color={colour}, label="{text}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_label(label) -> str:
    if isinstance(label, tuple):
        return ",".join(str(x) for x in label)
    return str(label)
