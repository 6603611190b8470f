"""Time discretization of the two-component (position, momentum) function space.

Functions over the ambient window [0, t_ambient] are piecewise constant on n
uniform cells and sampled at cell midpoints.  A function is a pair of complex
vectors (x-component, p-component); the dual pairing is bilinear (no complex
conjugation) with the cell width dt as quadrature weight:

    <f, g> = sum_i (f.x_i g.x_i + f.p_i g.p_i) * dt.

Internally many routines work with the "coefficient vector" of a function,
its coordinates in the orthonormal cell basis e_i = 1_cell / sqrt(dt): a
single complex vector of length 2n (x cells first, then p cells).  In these
coordinates the pairing is the plain bilinear dot product and operators keep
the same matrix as in value coordinates (the basis scaling is uniform).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import GridMismatchError


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Uniform midpoint grid with n cells on the window [0, t_ambient]."""

    t_ambient: float
    n: int
    dt: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.t_ambient > 0:
            raise ValueError(f"t_ambient must be > 0, got {self.t_ambient}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        dt = self.t_ambient / self.n
        nodes = (np.arange(self.n) + 0.5) * dt
        nodes.setflags(write=False)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "nodes", nodes)

    def window_mask(self, a: float, b: float) -> np.ndarray:
        """Boolean mask of cells whose midpoint lies in [a, b)."""
        return (self.nodes >= a) & (self.nodes < b)

    def check_time(self, t: float) -> None:
        if not 0 < t <= self.t_ambient:
            raise ValueError(f"t={t} outside the ambient window (0, {self.t_ambient}]")

    def __eq__(self, other):
        return (
            isinstance(other, TimeGrid)
            and self.t_ambient == other.t_ambient
            and self.n == other.n
        )

    def __hash__(self):
        return hash((self.t_ambient, self.n))


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(
            f"grids differ: ({a.grid.t_ambient}, {a.grid.n}) vs ({b.grid.t_ambient}, {b.grid.n})"
        )


@dataclass(frozen=True, eq=False)
class PhaseFunction:
    """Discretized element of L2([0, t_ambient]; C^2).

    x_part and p_part hold the cell values of the position and momentum
    components.  Instances are immutable; arithmetic returns new objects.
    """

    grid: TimeGrid
    x_part: np.ndarray
    p_part: np.ndarray

    def __post_init__(self):
        x = np.array(self.x_part, dtype=complex).reshape(self.grid.n)
        p = np.array(self.p_part, dtype=complex).reshape(self.grid.n)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError("PhaseFunction entries must be finite")
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "x_part", x)
        object.__setattr__(self, "p_part", p)

    @classmethod
    def zero(cls, grid: TimeGrid) -> "PhaseFunction":
        z = np.zeros(grid.n)
        return cls(grid, z, z)

    @classmethod
    def from_values(cls, grid, x_part, p_part) -> "PhaseFunction":
        return cls(grid, x_part, p_part)

    @classmethod
    def from_coeffs(cls, grid: TimeGrid, coeffs: np.ndarray) -> "PhaseFunction":
        """Inverse of :attr:`coeffs`."""
        c = np.asarray(coeffs, dtype=complex).reshape(2 * grid.n)
        s = np.sqrt(grid.dt)
        return cls(grid, c[: grid.n] / s, c[grid.n :] / s)

    @property
    def coeffs(self) -> np.ndarray:
        """Coordinates in the orthonormal cell basis, length 2n."""
        return np.concatenate([self.x_part, self.p_part]) * np.sqrt(self.grid.dt)

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.x_part.imag == 0) and np.all(self.p_part.imag == 0))

    def norm2(self) -> float:
        """Hermitian squared norm |f|^2 = sum |f_i|^2 dt (both components)."""
        return float(
            (np.sum(np.abs(self.x_part) ** 2) + np.sum(np.abs(self.p_part) ** 2))
            * self.grid.dt
        )

    def __add__(self, other: "PhaseFunction") -> "PhaseFunction":
        _require_same_grid(self, other)
        return PhaseFunction(self.grid, self.x_part + other.x_part, self.p_part + other.p_part)

    def __sub__(self, other: "PhaseFunction") -> "PhaseFunction":
        _require_same_grid(self, other)
        return PhaseFunction(self.grid, self.x_part - other.x_part, self.p_part - other.p_part)

    def __mul__(self, scalar) -> "PhaseFunction":
        return PhaseFunction(self.grid, scalar * self.x_part, scalar * self.p_part)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


def make_grid(t_ambient: float, n: int) -> TimeGrid:
    """Create a uniform midpoint grid; rejects non-positive inputs."""
    return TimeGrid(t_ambient, n)


def indicator(grid: TimeGrid, a: float, b: float, component: Literal["x", "p"]) -> PhaseFunction:
    """Indicator of [a, b) in one component, snapped by cell midpoint."""
    if not (0 <= a <= b <= grid.t_ambient):
        raise ValueError(f"need 0 <= a <= b <= t_ambient, got a={a}, b={b}")
    if component not in ("x", "p"):
        raise ValueError(f"component must be 'x' or 'p', got {component!r}")
    vals = grid.window_mask(a, b).astype(float)
    zero = np.zeros(grid.n)
    if component == "x":
        return PhaseFunction(grid, vals, zero)
    return PhaseFunction(grid, zero, vals)


def pair_bilinear(f: PhaseFunction, g: PhaseFunction) -> complex:
    """Bilinear dual pairing <f, g>; no complex conjugation."""
    _require_same_grid(f, g)
    return complex(
        (np.dot(f.x_part, g.x_part) + np.dot(f.p_part, g.p_part)) * f.grid.dt
    )


def volterra_A(grid: TimeGrid, t: float) -> np.ndarray:
    """Matrix of the double Volterra integral on [0, t), midpoint quadrature.

    Realizes A f(s) = 1_[0,t)(s) * int_s^t int_0^tau f(r) dr dtau through its
    symmetric kernel (t - max(s, r)) on [0, t)^2, so the discrete matrix is
    exactly symmetric.  Rows and columns of cells at or beyond t are zero.
    The matrix acts on value vectors and coefficient vectors alike.
    """
    grid.check_time(t)
    A = np.zeros((grid.n, grid.n))
    idx = np.where(grid.window_mask(0.0, t))[0]
    if idx.size:
        s = grid.nodes[idx]
        A[np.ix_(idx, idx)] = grid.dt * (t - np.maximum.outer(s, s))
    return A
