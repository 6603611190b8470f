"""JSON schemas for phase functions, operators, kernel specs and chaos vectors.

Complex numbers are encoded as two-element arrays [re, im] of IEEE-754
binary64 values; dense operator blocks are row-major.  All loaders raise
SpecFormatError with a locating message on malformed input.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import SpecFormatError
from .gausskernel import GaussKernelSpec, PinningSpec
from .grid import PhaseFunction, TimeGrid, make_grid, volterra_A
from .opalg import BlockOperator, free_N_inv, kinetic_K, sqrt_R
from .scaling import ChaosVector

OPERATOR_KINDS = ("kinetic", "free_n_inv", "sqrt_r", "volterra_ho", "dense")


def _fail(where: str, msg: str):
    raise SpecFormatError(f"{where}: {msg}")


def _require(obj, key, where):
    if not isinstance(obj, dict):
        _fail(where, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        _fail(where, f"missing key {key!r}")
    return obj[key]


def complex_to_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(obj, where="complex") -> complex:
    if (not isinstance(obj, (list, tuple)) or len(obj) != 2
            or not all(isinstance(v, (int, float)) for v in obj)):
        _fail(where, f"expected [re, im], got {obj!r}")
    return complex(obj[0], obj[1])


def _vector_to_pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _pairs_to_vector(obj, where) -> np.ndarray:
    if not isinstance(obj, list):
        _fail(where, "expected an array of [re, im] pairs")
    return np.array([pair_to_complex(p, where) for p in obj], dtype=complex)


# -- grids and functions ----------------------------------------------------

def grid_to_obj(grid: TimeGrid) -> dict:
    return {"t_ambient": grid.t_ambient, "n": grid.n}


def grid_from_obj(obj, where="grid") -> TimeGrid:
    t_amb = _require(obj, "t_ambient", where)
    n = _require(obj, "n", where)
    if not isinstance(t_amb, (int, float)) or not isinstance(n, int):
        _fail(where, "t_ambient must be a number and n an integer")
    try:
        return make_grid(float(t_amb), n)
    except ValueError as exc:
        _fail(where, str(exc))


def phase_function_to_obj(f: PhaseFunction) -> dict:
    return {
        "grid": grid_to_obj(f.grid),
        "x_part": _vector_to_pairs(f.x_part),
        "p_part": _vector_to_pairs(f.p_part),
    }


def phase_function_from_obj(obj, where="function") -> PhaseFunction:
    grid = grid_from_obj(_require(obj, "grid", where), where + ".grid")
    x = _pairs_to_vector(_require(obj, "x_part", where), where + ".x_part")
    p = _pairs_to_vector(_require(obj, "p_part", where), where + ".p_part")
    if len(x) != grid.n or len(p) != grid.n:
        _fail(where, f"component length must equal n={grid.n}")
    return PhaseFunction(grid, x, p)


# -- operators ----------------------------------------------------------------

def operator_to_obj(op: BlockOperator) -> dict:
    rows = [_vector_to_pairs(row) for row in op.matrix]
    return {"kind": "dense", "matrix": rows}


def operator_from_obj(grid: TimeGrid, obj, where="operator") -> BlockOperator:
    kind = _require(obj, "kind", where)
    if kind not in OPERATOR_KINDS:
        _fail(where, f"unknown operator kind {kind!r}; expected one of {OPERATOR_KINDS}")
    if kind in ("kinetic", "free_n_inv", "sqrt_r"):
        t = _require(obj, "t", where)
        builder = {"kinetic": kinetic_K, "free_n_inv": free_N_inv, "sqrt_r": sqrt_R}[kind]
        try:
            return builder(grid, float(t))
        except ValueError as exc:
            _fail(where, str(exc))
    if kind == "volterra_ho":
        t = float(_require(obj, "t", where))
        k = float(_require(obj, "k", where))
        n = grid.n
        try:
            A = volterra_A(grid, t)
        except ValueError as exc:
            _fail(where, str(exc))
        zero = np.zeros((n, n))
        return BlockOperator.from_blocks(grid, 1j * k * A, zero, zero, zero)
    rows = _require(obj, "matrix", where)
    if not isinstance(rows, list) or len(rows) != 2 * grid.n:
        _fail(where, f"dense matrix must have {2*grid.n} rows")
    mat = np.stack([_pairs_to_vector(r, f"{where}.matrix[{i}]") for i, r in enumerate(rows)])
    if mat.shape != (2 * grid.n, 2 * grid.n):
        _fail(where, f"dense matrix must be {2*grid.n} x {2*grid.n}")
    return BlockOperator.from_dense(grid, mat)


# -- Gauss-kernel specs -------------------------------------------------------

def gauss_spec_to_obj(spec: GaussKernelSpec) -> dict:
    return {
        "grid": grid_to_obj(spec.grid),
        "K": operator_to_obj(spec.K),
        "L": operator_to_obj(spec.L),
        "g": phase_function_to_obj(spec.g),
        "pinnings": [
            {"eta": phase_function_to_obj(p.eta), "y": p.y} for p in spec.pinnings
        ],
    }


def gauss_spec_from_obj(obj, where="spec") -> GaussKernelSpec:
    grid = grid_from_obj(_require(obj, "grid", where), where + ".grid")
    K = operator_from_obj(grid, _require(obj, "K", where), where + ".K")
    L = obj.get("L")
    L_op = None if L is None else operator_from_obj(grid, L, where + ".L")
    g = obj.get("g")
    g_fn = None if g is None else phase_function_from_obj(g, where + ".g")
    if g_fn is not None and g_fn.grid != grid:
        _fail(where + ".g", "drift must live on the spec grid")
    pins = []
    for i, p in enumerate(obj.get("pinnings", [])):
        pwhere = f"{where}.pinnings[{i}]"
        eta = phase_function_from_obj(_require(p, "eta", pwhere), pwhere + ".eta")
        if eta.grid != grid:
            _fail(pwhere, "pinning function must live on the spec grid")
        y = _require(p, "y", pwhere)
        if not isinstance(y, (int, float)):
            _fail(pwhere, "y must be a real number")
        try:
            pins.append(PinningSpec(eta, float(y)))
        except ValueError as exc:
            _fail(pwhere, str(exc))
    return GaussKernelSpec(grid, K, L_op, g_fn, tuple(pins))


# -- chaos vectors --------------------------------------------------------------

def _kernel_to_nested(arr: np.ndarray):
    if arr.ndim == 0:
        return complex_to_pair(complex(arr))
    return [_kernel_to_nested(sub) for sub in arr]


def _nested_to_kernel(obj, order, dim, where) -> np.ndarray:
    if order == 0:
        return np.array(pair_to_complex(obj, where))
    if not isinstance(obj, list) or len(obj) != dim:
        _fail(where, f"expected an array of length {dim}")
    return np.stack([_nested_to_kernel(sub, order - 1, dim, where) for sub in obj])


def chaos_to_obj(phi: ChaosVector) -> dict:
    if phi.repr_tag == "dense":
        return {
            "repr": "dense",
            "n_max": phi.n_max,
            "dim": phi.dim,
            "kernels": [_kernel_to_nested(k) for k in phi.kernels],
        }
    return {
        "repr": "coherent",
        "terms": [
            {"w": complex_to_pair(w), "xi": phase_function_to_obj(xi)}
            for w, xi in phi.terms
        ],
    }


def chaos_from_obj(obj, where="chaos") -> ChaosVector:
    tag = _require(obj, "repr", where)
    if tag == "dense":
        n_max = _require(obj, "n_max", where)
        dim = _require(obj, "dim", where)
        kernels = _require(obj, "kernels", where)
        if not isinstance(kernels, list) or len(kernels) != n_max + 1:
            _fail(where, f"expected {n_max + 1} kernels")
        kers = [
            _nested_to_kernel(k, order, dim, f"{where}.kernels[{order}]")
            for order, k in enumerate(kernels)
        ]
        return ChaosVector.dense(kers)
    if tag == "coherent":
        terms = _require(obj, "terms", where)
        if not isinstance(terms, list):
            _fail(where, "terms must be an array")
        out = []
        for i, term in enumerate(terms):
            twhere = f"{where}.terms[{i}]"
            w = pair_to_complex(_require(term, "w", twhere), twhere + ".w")
            xi = phase_function_from_obj(_require(term, "xi", twhere), twhere + ".xi")
            out.append((w, xi))
        return ChaosVector.coherent(out)
    _fail(where, f"unknown repr {tag!r}")


# -- file helpers -----------------------------------------------------------------

def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SpecFormatError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path}: invalid JSON ({exc})")


def load_gauss_spec(path: str) -> GaussKernelSpec:
    return gauss_spec_from_obj(load_json(path), where=path)


def load_phase_function(path: str) -> PhaseFunction:
    return phase_function_from_obj(load_json(path), where=path)


def dump_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
