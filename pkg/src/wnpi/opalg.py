"""Block operator algebra over the grid.

Operators act on two-component functions and are stored either as a dense
2n x 2n complex matrix or, for pointwise multiplication operators, as one
2 x 2 "symbol" per grid node.  The bilinear transpose (the adjoint with
respect to the unconjugated pairing) is the plain matrix transpose.

Determinant powers ``det(A)**p`` are taken via the principal logarithm of
each eigenvalue.  Along the damping family A + eps*Id the eigenvalues shift
to the right without rotating, so this convention coincides with analytic
continuation from damped (absolutely convergent) instances.  Eigenvalues
with a relatively tiny imaginary part are snapped onto the real axis first;
negative real eigenvalues then deterministically use arg = +pi.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve
import scipy.linalg.lapack as _lapack

from .errors import GridMismatchError, SingularOperatorError
from .grid import PhaseFunction, TimeGrid

#: reciprocal-condition threshold below which inversion is refused
RCOND_MIN = 1e-12

_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


class BlockOperator:
    """2 x 2 block complex operator over one grid.

    Blocks are ordered (xx, xp; px, pp) inside the dense 2n x 2n matrix,
    with x cells occupying indices [0, n) and p cells [n, 2n).  Instances
    are immutable; all arrays are stored read-only.
    """

    def __init__(self, grid: TimeGrid, *, symbols=None, matrix=None):
        if (symbols is None) == (matrix is None):
            raise ValueError("exactly one of symbols/matrix is required")
        self.grid = grid
        if symbols is not None:
            sym = np.array(symbols, dtype=complex).reshape(grid.n, 2, 2)
            sym.setflags(write=False)
            self._symbols = sym
            self._matrix = None
            self.kind = "diagonal-symbol"
        else:
            m = np.array(matrix, dtype=complex).reshape(2 * grid.n, 2 * grid.n)
            m.setflags(write=False)
            self._symbols = None
            self._matrix = m
            self.kind = "dense"

    @classmethod
    def from_symbols(cls, grid, symbols) -> "BlockOperator":
        return cls(grid, symbols=symbols)

    @classmethod
    def from_dense(cls, grid, matrix) -> "BlockOperator":
        return cls(grid, matrix=matrix)

    @classmethod
    def from_blocks(cls, grid, xx, xp, px, pp) -> "BlockOperator":
        n = grid.n
        m = np.zeros((2 * n, 2 * n), dtype=complex)
        m[:n, :n] = xx
        m[:n, n:] = xp
        m[n:, :n] = px
        m[n:, n:] = pp
        return cls(grid, matrix=m)

    @classmethod
    def identity(cls, grid) -> "BlockOperator":
        return cls(grid, symbols=np.broadcast_to(np.eye(2, dtype=complex), (grid.n, 2, 2)))

    @classmethod
    def zero(cls, grid) -> "BlockOperator":
        return cls(grid, symbols=np.zeros((grid.n, 2, 2), dtype=complex))

    @property
    def symbols(self) -> np.ndarray:
        if self._symbols is None:
            raise ValueError("dense operator has no symbol representation; use to_symbols()")
        return self._symbols

    @property
    def matrix(self) -> np.ndarray:
        """Dense 2n x 2n matrix (expanded from symbols on first use)."""
        if self._matrix is None:
            n = self.grid.n
            m = np.zeros((2 * n, 2 * n), dtype=complex)
            i = np.arange(n)
            sym = self._symbols
            m[i, i] = sym[:, 0, 0]
            m[i, n + i] = sym[:, 0, 1]
            m[n + i, i] = sym[:, 1, 0]
            m[n + i, n + i] = sym[:, 1, 1]
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def to_symbols(self, tol: float = 0.0) -> np.ndarray:
        """Contract a dense matrix back to per-node symbols.

        Fails unless every entry off the block diagonals is within tol of
        zero, so expansion followed by contraction is exactly the identity.
        """
        if self._symbols is not None:
            return self._symbols
        n = self.grid.n
        m = self._matrix
        i = np.arange(n)
        sym = np.empty((n, 2, 2), dtype=complex)
        sym[:, 0, 0] = m[i, i]
        sym[:, 0, 1] = m[i, n + i]
        sym[:, 1, 0] = m[n + i, i]
        sym[:, 1, 1] = m[n + i, n + i]
        recon = BlockOperator(self.grid, symbols=sym).matrix
        if np.abs(m - recon).max() > tol:
            raise ValueError("matrix is not a diagonal-symbol operator")
        return sym

    def apply(self, f: PhaseFunction) -> PhaseFunction:
        if f.grid != self.grid:
            raise GridMismatchError("operator and function live on different grids")
        return PhaseFunction.from_coeffs(self.grid, self.matrix @ f.coeffs)

    def transpose_bilinear(self) -> "BlockOperator":
        """Adjoint w.r.t. the bilinear pairing (matrix transpose)."""
        if self._symbols is not None:
            return BlockOperator(self.grid, symbols=np.swapaxes(self._symbols, 1, 2))
        return BlockOperator(self.grid, matrix=self._matrix.T)

    def is_bilinear_symmetric(self, tol: float = 1e-12) -> bool:
        m = self.matrix
        return bool(np.abs(m - m.T).max() <= tol)

    def symmetry_defect(self) -> float:
        m = self.matrix
        return float(np.abs(m - m.T).max())

    def _binary(self, other, op):
        if isinstance(other, BlockOperator):
            if other.grid != self.grid:
                raise GridMismatchError("operators live on different grids")
            if self._symbols is not None and other._symbols is not None:
                return BlockOperator(self.grid, symbols=op(self._symbols, other._symbols))
            return BlockOperator(self.grid, matrix=op(self.matrix, other.matrix))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __matmul__(self, other):
        if isinstance(other, BlockOperator):
            if other.grid != self.grid:
                raise GridMismatchError("operators live on different grids")
            if self._symbols is not None and other._symbols is not None:
                return BlockOperator(self.grid, symbols=self._symbols @ other._symbols)
            return BlockOperator(self.grid, matrix=self.matrix @ other.matrix)
        if isinstance(other, PhaseFunction):
            return self.apply(other)
        return NotImplemented

    def __mul__(self, scalar):
        if self._symbols is not None:
            return BlockOperator(self.grid, symbols=scalar * self._symbols)
        return BlockOperator(self.grid, matrix=scalar * self._matrix)

    __rmul__ = __mul__

    def __repr__(self):
        return f"BlockOperator(kind={self.kind!r}, n={self.grid.n})"


# ---------------------------------------------------------------------------
# constructors for the operators of the free phase-space action
# ---------------------------------------------------------------------------

#: per-node symbol of the free-action kinetic operator on [0, t)
KINETIC_SYMBOL = np.array([[-1.0, -1.0j], [-1.0j, -1.0 + 1.0j]])

#: per-node symbol of the free covariance N^-1 = (Id + K)^-1 on [0, t)
FREE_NINV_SYMBOL = 1.0j * np.array([[1.0, 1.0], [1.0, 0.0]])


def _windowed_symbols(grid: TimeGrid, t: float, inside, outside) -> np.ndarray:
    sym = np.empty((grid.n, 2, 2), dtype=complex)
    mask = grid.window_mask(0.0, t)
    sym[mask] = inside
    sym[~mask] = outside
    return sym


def kinetic_K(grid: TimeGrid, t: float) -> BlockOperator:
    """Kinetic matrix of the free phase-space action on [0, t), zero outside."""
    grid.check_time(t)
    return BlockOperator(grid, symbols=_windowed_symbols(grid, t, KINETIC_SYMBOL, np.zeros((2, 2))))


def free_N_inv(grid: TimeGrid, t: float) -> BlockOperator:
    """Covariance (Id + K)^-1 of the free integrand: i[[1,1],[1,0]] inside [0, t), identity outside."""
    grid.check_time(t)
    return BlockOperator(grid, symbols=_windowed_symbols(grid, t, FREE_NINV_SYMBOL, np.eye(2)))


def _sqrt_free_symbol() -> np.ndarray:
    # principal square root of i*[[1,1],[1,0]] through the spectral
    # decomposition of the real symmetric part; eigenvalues (1 +- sqrt5)/2
    M = np.array([[1.0, 1.0], [1.0, 0.0]])
    lam, P = np.linalg.eigh(M)
    return (P * np.sqrt(1j * lam)) @ P.T


def sqrt_R(grid: TimeGrid, t: float) -> BlockOperator:
    """Symmetric square root R of the free covariance: R @ R = free_N_inv.

    Inside [0, t) the symbol is the principal square root of i[[1,1],[1,0]],
    built spectrally; outside it is the identity.  Symmetry and R^2 = N^-1
    hold at the symbol level, so the defect is grid-size independent.
    """
    grid.check_time(t)
    return BlockOperator(grid, symbols=_windowed_symbols(grid, t, _sqrt_free_symbol(), np.eye(2)))


# ---------------------------------------------------------------------------
# inversion and determinants
# ---------------------------------------------------------------------------

def _invert_2x2(sym: np.ndarray) -> np.ndarray:
    det = sym[..., 0, 0] * sym[..., 1, 1] - sym[..., 0, 1] * sym[..., 1, 0]
    scale = np.abs(sym).max(axis=(-2, -1))
    bad = np.abs(det) <= RCOND_MIN * scale**2
    if np.any(bad):
        raise SingularOperatorError(
            f"singular 2x2 symbol at node(s) {np.where(bad)[0].tolist()}",
            rcond=float((np.abs(det) / scale**2).min()),
        )
    inv = np.empty_like(sym)
    inv[..., 0, 0] = sym[..., 1, 1]
    inv[..., 1, 1] = sym[..., 0, 0]
    inv[..., 0, 1] = -sym[..., 0, 1]
    inv[..., 1, 0] = -sym[..., 1, 0]
    return inv / det[..., None, None]


class _LUSolver:
    """LU factorization with a 1-norm reciprocal-condition guard."""

    def __init__(self, matrix: np.ndarray, what: str = "operator"):
        a = np.ascontiguousarray(matrix, dtype=complex)
        anorm = np.linalg.norm(a, 1)
        self.lu = lu_factor(a)
        if anorm == 0:
            raise SingularOperatorError(f"{what} is zero", rcond=0.0)
        rcond, info = _lapack.zgecon(self.lu[0], anorm, norm="1")
        if info != 0 or not np.isfinite(rcond) or rcond < RCOND_MIN:
            raise SingularOperatorError(
                f"{what} is singular or ill-conditioned (rcond={rcond:.3e})", rcond=float(rcond)
            )
        self.rcond = float(rcond)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self.lu, rhs)


def invert(op: BlockOperator) -> BlockOperator:
    """Two-sided inverse; rejects operators with rcond below 1e-12."""
    if op.kind == "diagonal-symbol":
        return BlockOperator(op.grid, symbols=_invert_2x2(op.symbols))
    solver = _LUSolver(op.matrix, "block operator")
    return BlockOperator(op.grid, matrix=solver.solve(np.eye(2 * op.grid.n, dtype=complex)))


def _snap_eigs(mu: np.ndarray, snap_tol: float = 1e-10) -> np.ndarray:
    im = mu.imag.copy()
    im[np.abs(im) <= snap_tol * (1.0 + np.abs(mu))] = 0.0
    return mu.real + 1j * im


def det_power(matrix: np.ndarray, power: float, what: str = "determinant") -> complex:
    """det(matrix)**power via summed principal eigenvalue logarithms.

    Near-real eigenvalues are snapped onto the axis; negative reals then use
    arg = +pi, the deterministic continuation convention documented in the
    module docstring.  (Near-)zero eigenvalues raise.
    """
    mu = _snap_eigs(np.linalg.eigvals(matrix))
    scale = max(1.0, float(np.abs(mu).max()))
    if np.any(np.abs(mu) <= 1e-14 * scale):
        raise SingularOperatorError(f"{what}: eigenvalue at zero, determinant power undefined")
    log_det = np.sum(np.log(np.abs(mu)) + 1j * np.angle(mu))
    return complex(np.exp(power * log_det))


def det_rel(K: BlockOperator, L: BlockOperator) -> complex:
    """Relative determinant det(Id + L (Id + K)^-1).

    For a pair of diagonal-symbol operators this is the product over nodes of
    2 x 2 determinants; otherwise it is a dense determinant.  Raises when
    Id + K is singular or when the result underflows.
    """
    if K.grid != L.grid:
        raise GridMismatchError("K and L live on different grids")
    eye2 = np.eye(2, dtype=complex)
    if K.kind == "diagonal-symbol" and L.kind == "diagonal-symbol":
        inv = _invert_2x2(eye2 + K.symbols)
        m = eye2 + L.symbols @ inv
        dets = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
        out = complex(np.prod(dets))
    else:
        m = 2 * K.grid.n
        solver = _LUSolver(np.eye(m, dtype=complex) + K.matrix, "Id + K")
        X = np.eye(m, dtype=complex) + L.matrix @ solver.solve(np.eye(m, dtype=complex))
        out = complex(np.linalg.det(X))
    if abs(out) < 1e-300:
        raise SingularOperatorError("relative determinant underflows (|det| < 1e-300)")
    return out


def det_rel_power(K: BlockOperator, L: BlockOperator, power: float = -0.5) -> complex:
    """det(Id + L (Id + K)^-1)**power with the det_power branch convention."""
    if K.grid != L.grid:
        raise GridMismatchError("K and L live on different grids")
    m = 2 * K.grid.n
    solver = _LUSolver(np.eye(m, dtype=complex) + K.matrix, "Id + K")
    X = np.eye(m, dtype=complex) + L.matrix @ solver.solve(np.eye(m, dtype=complex))
    return det_power(X, power, what="relative determinant")
