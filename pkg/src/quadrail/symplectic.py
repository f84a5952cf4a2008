"""Gaussian unitaries as symplectic matrices plus displacements.

All matrices act on the quadrature vector in qqpp ordering,
``x = (q_1, ..., q_N, p_1, ..., p_N)``, with hbar = 1.  A transform ``T``
maps Heisenberg-picture quadratures as ``x -> T.matrix @ x + T.displacement``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

SYMPLECTIC_TOL = 1e-12
# looser, scale-relative bound used when constructing from arbitrary input
_CONSTRUCT_TOL = 1e-9

#: The 4x4 block of the foursplitter gate.
FOURSPLITTER_BLOCK = 0.5 * np.array(
    [
        [1.0, -1.0, -1.0, 1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, 1.0, 1.0],
    ]
)


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form ``(0 I; -I 0)`` for ``n_modes`` modes."""
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    """A Gaussian unitary in Heisenberg form.

    Attributes:
        matrix: ``2N x 2N`` real symplectic matrix, blocks ``(A B; C D)``.
        displacement: length ``2N`` phase-space shift applied after ``matrix``.
    """

    matrix: np.ndarray
    displacement: np.ndarray = None

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"matrix must be 2N x 2N, got shape {m.shape}")
        d = np.zeros(m.shape[0]) if self.displacement is None else self.displacement
        d = _frozen(d)
        if d.shape != (m.shape[0],):
            raise ValueError(f"displacement must have length {m.shape[0]}, got {d.shape}")
        n = m.shape[0] // 2
        om = omega(n)
        residual = np.max(np.abs(m.T @ om @ m - om)) if n else 0.0
        if residual > _CONSTRUCT_TOL * max(1.0, np.max(np.abs(m))) ** 2:
            raise ValueError(f"matrix is not symplectic (residual {residual:.3e})")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "displacement", d)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def blocks(self):
        """Return the ``(A, B, C, D)`` blocks of the matrix."""
        n = self.n_modes
        m = self.matrix
        return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]

    def inverse(self) -> "SymplecticTransform":
        # S^-1 = Omega^T S^T Omega for symplectic S
        om = omega(self.n_modes)
        inv = om.T @ self.matrix.T @ om
        return SymplecticTransform(inv, -inv @ self.displacement)

    def __matmul__(self, other: "SymplecticTransform") -> "SymplecticTransform":
        return compose(self, other)

    def allclose(self, other: "SymplecticTransform", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.matrix, other.matrix, rtol=0, atol=atol)
            and np.allclose(self.displacement, other.displacement, rtol=0, atol=atol)
        )

    def to_json(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "matrix": self.matrix.tolist(),
            "displacement": self.displacement.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SymplecticTransform":
        disp = data.get("displacement")
        return cls(np.array(data["matrix"]), None if disp is None else np.array(disp))


def identity(n_modes: int) -> SymplecticTransform:
    return SymplecticTransform(np.eye(2 * n_modes))


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite parameter: {v!r}")


def rotation(theta: float) -> SymplecticTransform:
    """Single-mode phase delay ``R(theta)``; rotates ``(q, p)`` counter-clockwise."""
    _check_finite(theta)
    c, s = np.cos(theta), np.sin(theta)
    return SymplecticTransform(np.array([[c, -s], [s, c]]))


def squeezer(s: float) -> SymplecticTransform:
    """Single-mode squeezer by factor ``s``: ``q -> s q``, ``p -> p / s``.

    Negative ``s`` is allowed and equals squeezing by ``|s|`` followed by ``R(pi)``.
    """
    _check_finite(s)
    if s == 0:
        raise ZeroDivisionError("squeezing factor s = 0 is divergent")
    return SymplecticTransform(np.diag([s, 1.0 / s]))


def _check_modes(modes: Sequence[int], n_modes: int):
    if len(set(modes)) != len(modes):
        raise ValueError(f"mode indices must be distinct, got {tuple(modes)}")
    for m in modes:
        if not 0 <= m < n_modes:
            raise IndexError(f"mode {m} out of range for {n_modes} modes")


def embed(t: SymplecticTransform, modes: Sequence[int], n_modes: int) -> SymplecticTransform:
    """Place a k-mode transform on ``modes`` of an ``n_modes`` identity."""
    modes = list(modes)
    if len(modes) != t.n_modes:
        raise ValueError(f"transform acts on {t.n_modes} modes, got {len(modes)} targets")
    _check_modes(modes, n_modes)
    idx = modes + [m + n_modes for m in modes]
    big = np.eye(2 * n_modes)
    big[np.ix_(idx, idx)] = t.matrix
    disp = np.zeros(2 * n_modes)
    disp[idx] = t.displacement
    return SymplecticTransform(big, disp)


def compose(a: SymplecticTransform, b: SymplecticTransform) -> SymplecticTransform:
    """Apply ``b`` then ``a``."""
    if a.n_modes != b.n_modes:
        raise ValueError(f"cannot compose {a.n_modes}-mode and {b.n_modes}-mode transforms")
    return SymplecticTransform(a.matrix @ b.matrix, a.matrix @ b.displacement + a.displacement)


def beamsplitter(i: int, j: int, theta: float = np.pi / 4, n_modes: int = 2) -> SymplecticTransform:
    """Beamsplitter ``B_ij(theta)`` with reflectivity ``sin(theta)``.

    ``beamsplitter(i, j)`` is the 50:50 gate ``B_ij``; its inverse is
    ``beamsplitter(j, i)``.
    """
    _check_finite(theta)
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    _check_modes([i, j], n_modes)
    c, s = np.cos(theta), np.sin(theta)
    m = np.eye(2 * n_modes)
    for off in (0, n_modes):
        m[i + off, i + off] = c
        m[i + off, j + off] = -s
        m[j + off, i + off] = s
        m[j + off, j + off] = c
    return SymplecticTransform(m)


def foursplitter(j: int = 0, k: int = 1, l: int = 2, m: int = 3, n_modes: int = 4) -> SymplecticTransform:
    """Foursplitter ``A_jklm``, block-diagonal ``(A~ 0; 0 A~)`` on the given modes."""
    modes = [j, k, l, m]
    _check_modes(modes, n_modes)
    core = np.zeros((8, 8))
    core[:4, :4] = FOURSPLITTER_BLOCK
    core[4:, 4:] = FOURSPLITTER_BLOCK
    return embed(SymplecticTransform(core), modes, n_modes)


def permutation(perm: Sequence[int], n_modes: int | None = None) -> SymplecticTransform:
    """Mode permutation sending mode ``i`` to position ``perm[i]``."""
    perm = list(perm)
    n_modes = len(perm) if n_modes is None else n_modes
    if sorted(perm) != list(range(n_modes)):
        raise ValueError(f"{perm} is not a bijection on {n_modes} modes")
    p = np.zeros((n_modes, n_modes))
    for i, target in enumerate(perm):
        p[target, i] = 1.0
    zero = np.zeros_like(p)
    return SymplecticTransform(np.block([[p, zero], [zero, p]]))


def swap(i: int, k: int, n_modes: int) -> SymplecticTransform:
    """Transposition of modes ``i`` and ``k``."""
    perm = list(range(n_modes))
    perm[i], perm[k] = perm[k], perm[i]
    return permutation(perm, n_modes)


def conjugate_by_foursplitter(t: SymplecticTransform) -> SymplecticTransform:
    """Return ``A^-1 t A`` for a 4-mode transform ``t``."""
    if t.n_modes != 4:
        raise ValueError(f"expected a 4-mode transform, got {t.n_modes} modes")
    a = foursplitter()
    return a.inverse() @ t @ a


def is_symplectic(t: SymplecticTransform, tol: float = SYMPLECTIC_TOL):
    """Check ``S^T Omega S = Omega``.

    Returns:
        ``(ok, residual)`` with the residual measured as the max-abs entry.
    """
    om = omega(t.n_modes)
    residual = float(np.max(np.abs(t.matrix.T @ om @ t.matrix - om)))
    return residual <= tol, residual


def direct_sum(*transforms: SymplecticTransform) -> SymplecticTransform:
    """Block-diagonal combination acting on consecutive mode groups."""
    n = sum(t.n_modes for t in transforms)
    out = identity(n)
    start = 0
    for t in transforms:
        out = embed(t, range(start, start + t.n_modes), n) @ out
        start += t.n_modes
    return out


def displacement(vector) -> SymplecticTransform:
    """Pure phase-space displacement by ``vector`` (qqpp)."""
    vector = np.asarray(vector, dtype=float)
    return SymplecticTransform(np.eye(vector.size), vector)


def complex_to_phase_space(alpha: complex) -> np.ndarray:
    """Shift ``(dq, dp)`` produced by ``D(alpha) = exp(alpha a^dag - alpha^* a)``."""
    return np.sqrt(2.0) * np.array([np.real(alpha), np.imag(alpha)])
