"""Application layer: free integrand, scaled quadratic kernels, oscillator propagator.

The free integrand is evaluated along two independent routes, the direct
pinned-Gauss-kernel formula and the scaling route through the symmetric
square root R of the free covariance.  For a quadratic perturbation L the
scaled route evaluates

    (2 pi)^(-1/2) det(Id + RLR)^(-1/2) M'^(-1/2)
        exp(-1/2 <Rf, (Id+RLR)^-1 Rf>) exp(+1/2 u'^2 / M'),

with M' = <R eta, (Id+RLR)^-1 R eta> and u' = i y + <R eta, (Id+RLR)^-1 Rf>,
and must agree with the direct route because Id + RLR = R (Id+K+L) R.

The harmonic oscillator with strength k uses L = [[i k A, 0], [0, 0]] built
from the double Volterra integral A; the closed-form comparator for the
propagator is sqrt(sqrt(k) / (2 pi i sin(sqrt(k) t))) *
exp(i sqrt(k) y^2 / (2 tan(sqrt(k) t))).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import CausticError, PreconditionError, RouteDisagreementError
from .gausskernel import (
    GaussKernelSpec,
    PinningSpec,
    _donsker_core,
    compiled,
    t_transform_gauss,
)
from .grid import PhaseFunction, TimeGrid, indicator, make_grid, volterra_A
from .opalg import BlockOperator, _LUSolver, det_power, kinetic_K, sqrt_R

#: tolerance of the caustic guard on sqrt(k) * t
CAUSTIC_TOL = 1e-9

#: maximal allowed disagreement between equivalent evaluation routes
ROUTE_TOL = 1e-8


def caustic_guard(k: float, t: float) -> None:
    """Reject sqrt(k)*t within CAUSTIC_TOL of a positive multiple of pi."""
    if k < 0:
        raise PreconditionError(f"oscillator strength must be >= 0, got {k}")
    if t <= 0:
        raise PreconditionError(f"propagation time must be > 0, got {t}")
    theta = np.sqrt(k) * t
    mult = round(theta / np.pi)
    if mult >= 1 and abs(theta - mult * np.pi) < CAUSTIC_TOL:
        raise CausticError(
            f"caustic: sqrt(k)*t = {theta!r} is within {CAUSTIC_TOL} of {mult}*pi"
        )


@dataclass(frozen=True)
class PropagatorQuery:
    """Propagator request: strength k, time t, endpoint y, resolution n."""

    k: float
    t: float
    y: float
    n: int = 256
    f: Optional[PhaseFunction] = None

    def __post_init__(self):
        caustic_guard(self.k, self.t)
        if self.n < 1:
            raise PreconditionError(f"resolution must be >= 1, got {self.n}")


def _pinned_free_spec(grid: TimeGrid, t: float, y: float) -> GaussKernelSpec:
    eta = indicator(grid, 0.0, t, "x")
    return GaussKernelSpec(grid, kinetic_K(grid, t), pinnings=(PinningSpec(eta, y),))


def free_integrand_T(grid: TimeGrid, t: float, y: float,
                     f: Optional[PhaseFunction] = None) -> complex:
    """T-transform of the free integrand, checked along two routes.

    Route (a) is the direct pinned-Gauss-kernel evaluation with the kinetic
    operator; route (b) scales the endpoint delta by R and evaluates the
    complex-pinning Donsker form at R f.  Disagreement beyond ROUTE_TOL
    raises, since the two are algebraically identical.
    """
    grid.check_time(t)
    if f is None:
        f = PhaseFunction.zero(grid)
    direct = t_transform_gauss(_pinned_free_spec(grid, t, y), f)

    R = sqrt_R(grid, t).matrix
    eta_c = indicator(grid, 0.0, t, "x").coeffs
    r_eta = R @ eta_c
    r_f = R @ f.coeffs
    scaled = _donsker_core(r_eta @ r_eta, r_eta @ r_f, r_f @ r_f, y)

    # relative tolerance: the exponential factors can be arbitrarily large
    if abs(direct - scaled) > ROUTE_TOL * max(1.0, abs(direct)):
        raise RouteDisagreementError(
            f"free integrand routes disagree by {abs(direct - scaled):.3e}"
        )
    return direct


def ho_spec(grid: TimeGrid, t: float, k: float, y: float = 0.0) -> GaussKernelSpec:
    """Pinned Gauss-kernel description of the oscillator integrand.

    K is the kinetic operator, L = [[i k A, 0], [0, 0]] with A the double
    Volterra integral on [0, t), the pinning is the endpoint of the position
    path at y.
    """
    caustic_guard(k, t)
    grid.check_time(t)
    n = grid.n
    A = volterra_A(grid, t)
    L = BlockOperator.from_blocks(grid, 1j * k * A, np.zeros((n, n)),
                                  np.zeros((n, n)), np.zeros((n, n)))
    eta = indicator(grid, 0.0, t, "x")
    return GaussKernelSpec(grid, kinetic_K(grid, t), L, None, (PinningSpec(eta, y),))


def _free_closed(t: float, y: float) -> complex:
    return complex((2j * np.pi * t) ** -0.5 * np.exp(1j * y * y / (2 * t)))


def ho_T_closed(k: float, t: float, y: float,
                f_on_grid: Optional[PhaseFunction] = None) -> complex:
    """Closed-form oscillator T-transform.

    The y-dependent factor and prefactor are fully analytic; the probe-
    dependent covariance block uses W = (k A - 1)^-1 computed by dense solve
    on the [0, t) sub-grid, with the window covariance (1/i) [[W, W], [W, kAW]]
    and the identity on the complement.  For k = 0 the free closed form is
    used (the k -> 0 limit).
    """
    caustic_guard(k, t)
    if f_on_grid is None:
        if k == 0:
            return _free_closed(t, y)
        sk = np.sqrt(k)
        theta = sk * t
        pref = (sk / (2j * np.pi * np.sin(theta))) ** 0.5
        return complex(pref * np.exp(1j * sk * y * y * np.cos(theta) / (2 * np.sin(theta))))

    f = f_on_grid
    grid = f.grid
    grid.check_time(t)
    sk = np.sqrt(k)
    theta = sk * t
    window = grid.window_mask(0.0, t)
    dt = grid.dt
    fx = f.x_part[window]
    fp = f.p_part[window]
    nw = int(window.sum())
    A = volterra_A(grid, t)[np.ix_(window, window)]
    kA_minus = k * A - np.eye(nw)
    solver = _LUSolver(kA_minus.astype(complex), "k A - 1 on the window")
    Wfx = solver.solve(fx)
    Wfp = solver.solve(fp)
    ninv_x = (Wfx + Wfp) / 1j
    ninv_p = (Wfx + k * (A @ Wfp)) / 1j
    quad_window = dt * (fx @ ninv_x + fp @ ninv_p)
    w_eta = dt * np.sum(ninv_x)
    comp_x = f.x_part[~window]
    comp_p = f.p_part[~window]
    quad_comp = dt * (comp_x @ comp_x + comp_p @ comp_p)

    if k == 0:
        pref = (2j * np.pi * t) ** -0.5
        pin = np.exp((1j * y + w_eta) ** 2 / (2j * t))
    else:
        pref = (sk / (2j * np.pi * np.sin(theta))) ** 0.5
        pin = np.exp(0.5 * (sk * np.cos(theta) / (1j * np.sin(theta))) * (1j * y + w_eta) ** 2)
    return complex(pref * pin * np.exp(-0.5 * (quad_window + quad_comp)))


@lru_cache(maxsize=128)
def _ho_compiled(k: float, t: float, n: int, t_ambient: float):
    grid = make_grid(t_ambient, n)
    return compiled(ho_spec(grid, t, k, 0.0))


@dataclass(frozen=True)
class PropagatorValue:
    """Oscillator propagator through both routes, with their deviation."""

    grid_value: complex
    closed_value: complex
    deviation: float
    n: int

    @property
    def relative_deviation(self) -> float:
        return self.deviation / abs(self.closed_value)


def ho_propagator(k: float, t: float, y: float, n: int = 256,
                  t_ambient: Optional[float] = None) -> PropagatorValue:
    """Oscillator propagator: grid-route generalized expectation vs closed form."""
    caustic_guard(k, t)
    t_ambient = t if t_ambient is None else t_ambient
    comp = _ho_compiled(k, t, n, t_ambient)
    zero = PhaseFunction.zero(comp.spec.grid)
    grid_value = comp.evaluate(zero, y_override=y)
    closed_value = ho_T_closed(k, t, y)
    return PropagatorValue(
        grid_value=grid_value,
        closed_value=closed_value,
        deviation=abs(grid_value - closed_value),
        n=n,
    )


def scaled_quadratic_T(grid: TimeGrid, t: float, L: BlockOperator,
                       eta: PhaseFunction, y: float,
                       f: Optional[PhaseFunction] = None) -> complex:
    """Quadratic-kernel T-transform through the scaling route.

    Computes the R-scaled expression (module docstring) and asserts equality
    with the direct pinned-Gauss-kernel route; returns the scaled value.
    """
    grid.check_time(t)
    if f is None:
        f = PhaseFunction.zero(grid)
    direct = t_transform_gauss(
        GaussKernelSpec(grid, kinetic_K(grid, t), L, None, (PinningSpec(eta, y),)), f
    )

    m = 2 * grid.n
    R = sqrt_R(grid, t).matrix
    RLR = R @ L.matrix @ R
    big = np.eye(m, dtype=complex) + RLR
    solver = _LUSolver(big, "Id + R L R")
    r_eta = R @ eta.coeffs
    r_f = R @ f.coeffs
    sol_eta = solver.solve(r_eta)
    M = r_eta @ sol_eta
    u = 1j * y + sol_eta @ r_f
    if np.abs(RLR).max() == 0.0:
        det_pow = 1.0 + 0.0j
    else:
        det_pow = det_power(big, -0.5, what="scaled determinant")
    scaled = complex(
        (2 * np.pi) ** -0.5 * M ** -0.5 * det_pow
        * np.exp(-0.5 * (r_f @ solver.solve(r_f)))
        * np.exp(0.5 * u * u / M)
    )
    if abs(direct - scaled) > ROUTE_TOL * max(1.0, abs(direct)):
        raise RouteDisagreementError(
            f"scaled and direct quadratic routes disagree by {abs(direct - scaled):.3e}"
        )
    return scaled
