"""Generalized scaling of chaos expansions and the Wick-formula identities.

A bounded operator B acts on a test function phi = sum_n <phi_n, :w^n:> by
substitution, phi -> phi(B w).  On dense chaos kernels this is

    phi_B^(n) = sum_k (n+2k)!/(k! n!) (-1/2)^k (B^T)^(x n) [ tr^k_{Id-BB^T} phi^(n+2k) ],

where B^T is the transpose w.r.t. the bilinear pairing and tr_A denotes the
order-2 kernel with components A_ij.  On coherent states the action is exact:

    :exp<xi, .>:  ->  exp(1/2 (<B^T xi, B^T xi> - <xi, xi>)) :exp<B^T xi, .>:.

The dual scaling never materializes on kernels; it exists through the
S-functional factorization S(sigma_B' Phi)(xi) = exp(-1/2 <xi, (Id-BB^T) xi>)
S(Phi)(B^T xi).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial

import numpy as np

from .errors import GridMismatchError, ResourceGuardError
from .grid import PhaseFunction, pair_bilinear
from .opalg import BlockOperator

#: dense-representation resource limits
MAX_ORDER = 4
MAX_DIM = 12


def _as_matrix(B, dim=None) -> np.ndarray:
    if isinstance(B, BlockOperator):
        mat = B.matrix
    else:
        mat = np.asarray(B, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("operator must be a square matrix")
    if dim is not None and mat.shape[0] != dim:
        raise ValueError(f"operator dimension {mat.shape[0]} != chaos dimension {dim}")
    return mat


def _as_coeffs(xi) -> np.ndarray:
    if isinstance(xi, PhaseFunction):
        return xi.coeffs
    return np.asarray(xi, dtype=complex).ravel()


@dataclass(frozen=True)
class TraceKernel:
    """Order-2 kernel representing the bilinear form (xi, eta) -> <xi, B eta>."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def pair(self, xi, eta) -> complex:
        """Evaluate tr_B(xi (x) eta) = <xi, B eta>."""
        return complex(_as_coeffs(xi) @ self.matrix @ _as_coeffs(eta))

    @property
    def frobenius_sq(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))


def trace_kernel(B) -> TraceKernel:
    """Generalized trace kernel tr_B = sum_i B e_i (x) e_i; components B_ij."""
    return TraceKernel(_as_matrix(B))


class ChaosVector:
    """Truncated chaos expansion, dense kernels or a coherent-state sum.

    Dense: symmetric complex tensors phi^(n), orders 0..n_max over dimension
    dim, guarded by n_max <= 4 and dim <= 12.  Coherent: a list of weighted
    Wick exponentials sum_j w_j :exp<xi_j, .>: with xi_j phase functions.
    """

    def __init__(self, *, kernels=None, terms=None):
        if (kernels is None) == (terms is None):
            raise ValueError("exactly one of kernels/terms is required")
        if kernels is not None:
            self.repr_tag = "dense"
            kers = []
            dim = None
            for n, ker in enumerate(kernels):
                arr = np.array(ker, dtype=complex)
                if n == 0:
                    arr = arr.reshape(())
                else:
                    if dim is None:
                        dim = arr.shape[0] if arr.ndim else 1
                    if arr.shape != (dim,) * n:
                        raise ValueError(f"kernel of order {n} must have shape {(dim,)*n}")
                arr.setflags(write=False)
                kers.append(arr)
            if dim is None:
                dim = 1
            if len(kers) - 1 > MAX_ORDER:
                raise ResourceGuardError(f"dense chaos order > {MAX_ORDER}")
            if dim > MAX_DIM:
                raise ResourceGuardError(f"dense chaos dimension > {MAX_DIM}")
            for n, arr in enumerate(kers):
                if n >= 2 and _symmetry_defect(arr) > 1e-12:
                    raise ValueError(f"kernel of order {n} is not symmetric")
            self.kernels = tuple(kers)
            self.dim = dim
            self.terms = None
        else:
            self.repr_tag = "coherent"
            tlist = []
            grid = None
            for w, xi in terms:
                if not isinstance(xi, PhaseFunction):
                    raise ValueError("coherent terms must hold PhaseFunction states")
                if grid is None:
                    grid = xi.grid
                elif xi.grid != grid:
                    raise GridMismatchError("coherent terms live on different grids")
                tlist.append((complex(w), xi))
            self.terms = tuple(tlist)
            self.dim = None if grid is None else 2 * grid.n
            self.kernels = None

    @classmethod
    def dense(cls, kernels) -> "ChaosVector":
        return cls(kernels=kernels)

    @classmethod
    def coherent(cls, terms) -> "ChaosVector":
        return cls(terms=terms)

    @classmethod
    def vacuum_dense(cls, dim: int, n_max: int = 0) -> "ChaosVector":
        kers = [np.zeros((dim,) * n) for n in range(n_max + 1)]
        kers[0] = np.array(1.0 + 0.0j)
        return cls(kernels=kers)

    @property
    def n_max(self) -> int:
        if self.kernels is None:
            raise ValueError("coherent vector has no dense order")
        return len(self.kernels) - 1

    def __repr__(self):
        if self.repr_tag == "dense":
            return f"ChaosVector(dense, n_max={self.n_max}, dim={self.dim})"
        return f"ChaosVector(coherent, terms={len(self.terms)})"


def _symmetry_defect(arr: np.ndarray) -> float:
    worst = 0.0
    for axis in range(arr.ndim - 1):
        perm = list(range(arr.ndim))
        perm[axis], perm[axis + 1] = perm[axis + 1], perm[axis]
        worst = max(worst, float(np.abs(arr - np.transpose(arr, perm)).max()))
    return worst


def _symmetrize(arr: np.ndarray) -> np.ndarray:
    if arr.ndim <= 1:
        return arr
    acc = np.zeros_like(arr)
    perms = list(permutations(range(arr.ndim)))
    for perm in perms:
        acc += np.transpose(arr, perm)
    return acc / len(perms)


def _apply_each_slot(mat: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    for axis in range(tensor.ndim):
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=(1, axis)), 0, axis)
    return tensor


def sigma_dense(B, phi: ChaosVector) -> ChaosVector:
    """Generalized scaling on dense kernels via trace contractions."""
    if phi.repr_tag != "dense":
        raise ValueError("sigma_dense needs a dense chaos vector")
    Bm = _as_matrix(B, phi.dim)
    Bt = Bm.T
    G = np.eye(phi.dim, dtype=complex) - Bm @ Bt      # trace kernel of Id - BB^T
    n_max = phi.n_max
    out = []
    for n in range(n_max + 1):
        acc = np.zeros((phi.dim,) * n, dtype=complex)
        k = 0
        while n + 2 * k <= n_max:
            src = np.asarray(phi.kernels[n + 2 * k], dtype=complex)
            for _ in range(k):
                src = np.tensordot(G, src, axes=([0, 1], [0, 1]))
            coef = factorial(n + 2 * k) / (factorial(k) * factorial(n)) * (-0.5) ** k
            term = coef * src
            if n:
                term = _apply_each_slot(Bt, term)
            acc = acc + term
            k += 1
        out.append(_symmetrize(acc))
    return ChaosVector.dense(out)


def sigma_coherent(B, phi: ChaosVector) -> ChaosVector:
    """Generalized scaling on coherent states (exact closed form)."""
    if phi.repr_tag != "coherent":
        raise ValueError("sigma_coherent needs a coherent chaos vector")
    out = []
    for w, xi in phi.terms:
        Bt = _as_matrix(B, 2 * xi.grid.n).T
        c = xi.coeffs
        nc = Bt @ c
        weight = w * np.exp(0.5 * (nc @ nc - c @ c))
        out.append((weight, PhaseFunction.from_coeffs(xi.grid, nc)))
    return ChaosVector.coherent(out)


def sigma(B, phi: ChaosVector) -> ChaosVector:
    """Dispatch generalized scaling by representation."""
    if phi.repr_tag == "dense":
        return sigma_dense(B, phi)
    return sigma_coherent(B, phi)


def coherent_product(phi: ChaosVector, psi: ChaosVector) -> ChaosVector:
    """Pointwise product of coherent vectors:
    :e^<a,.>: * :e^<b,.>: = e^<a,b> :e^<a+b,.>:."""
    if phi.repr_tag != "coherent" or psi.repr_tag != "coherent":
        raise ValueError("coherent_product needs coherent vectors")
    out = []
    for w1, x1 in phi.terms:
        for w2, x2 in psi.terms:
            out.append((w1 * w2 * np.exp(pair_bilinear(x1, x2)), x1 + x2))
    return ChaosVector.coherent(out)


def coherent_eval(phi: ChaosVector, omega) -> complex:
    """Pointwise value of a coherent vector at omega (coefficient coordinates)."""
    if phi.repr_tag != "coherent":
        raise ValueError("coherent_eval needs a coherent vector")
    om = np.asarray(omega, dtype=complex).ravel()
    total = 0.0 + 0.0j
    for w, xi in phi.terms:
        c = xi.coeffs
        total += w * np.exp(-0.5 * (c @ c) + c @ om)
    return complex(total)


def s_transform(obj, xi) -> complex:
    """S-transform probe S(Phi)(xi).

    Dense chaos: sum_n <phi_n, xi^(x n)>.  Coherent: sum_j w_j e^<xi_j, xi>.
    Gauss-kernel specs: S(Phi)(xi) = T(Phi)(-i xi) exp(-1/2 <xi, xi>), the
    bilinear-pairing form of the Wick-exponential definition.
    """
    from .gausskernel import GaussKernelSpec, t_transform_gauss

    c = _as_coeffs(xi)
    if isinstance(obj, ChaosVector):
        if obj.repr_tag == "dense":
            total = 0.0 + 0.0j
            for n, ker in enumerate(obj.kernels):
                v = np.asarray(ker, dtype=complex)
                for _ in range(n):
                    v = v @ c
                total += complex(v)
            return total
        total = 0.0 + 0.0j
        for w, Xi in obj.terms:
            total += w * np.exp(Xi.coeffs @ c)
        return complex(total)
    if isinstance(obj, GaussKernelSpec):
        probe = PhaseFunction.from_coeffs(obj.grid, -1j * c)
        return complex(t_transform_gauss(obj, probe) * np.exp(-0.5 * (c @ c)))
    raise ValueError(f"cannot take the S-transform of {type(obj).__name__}")


def sigma_dual_S(B, Phi, xi) -> complex:
    """S-transform of the dual scaling:
    S(sigma_B' Phi)(xi) = exp(-1/2 <xi, (Id-BB^T) xi>) S(Phi)(B^T xi)."""
    c = _as_coeffs(xi)
    Bm = _as_matrix(B, len(c))
    Btxi = Bm.T @ c
    gauss = np.exp(-0.5 * (c @ c - Btxi @ Btxi))
    if callable(Phi) and not isinstance(Phi, ChaosVector):
        s_val = Phi(Btxi)
    else:
        s_val = s_transform(Phi, Btxi)
    return complex(gauss * s_val)
