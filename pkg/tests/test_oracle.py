import math

import numpy as np
import pytest

from wnpi.errors import PreconditionError
from wnpi.gausskernel import GaussKernelSpec, PinningSpec
from wnpi.grid import PhaseFunction, indicator, make_grid
from wnpi.opalg import BlockOperator, kinetic_K
from wnpi.oracle import (
    OracleProblem,
    gauss_integral_analytic,
    gauss_integral_mc,
    gauss_integral_quadrature,
    is_absolutely_integrable,
    verify_magicformula,
    wick_eval,
    wick_eval_batch,
    wick_tensors_batch,
)

INV_SQRT_2PI = 1.0 / math.sqrt(2 * math.pi)  # standard normal density at 0


def test_analytic_standard_normal_density():
    p = OracleProblem(dim=1, Q=[[0.0]], b=[0.0], pinnings=(([1.0], 0.0),))
    assert gauss_integral_analytic(p) == pytest.approx(INV_SQRT_2PI, abs=1e-15)


def test_analytic_negative_quadratic_form():
    # int exp(0.25 w^2) dN(0,1) = (1 - 0.5)^(-1/2) = sqrt(2)
    p = OracleProblem(dim=1, Q=[[-0.5]], b=[0.0])
    assert gauss_integral_analytic(p) == pytest.approx(math.sqrt(2), abs=1e-14)


def test_analytic_gaussian_density_at_general_point():
    # density of <v, w> at y for |v| = 1: N(0,1) density
    y = 0.8
    p = OracleProblem(dim=2, Q=np.zeros((2, 2)), b=np.zeros(2),
                      pinnings=((np.array([1.0, 0.0]), y),))
    want = INV_SQRT_2PI * math.exp(-y * y / 2)
    assert gauss_integral_analytic(p) == pytest.approx(want, abs=1e-15)


def test_analytic_vs_quadrature_damped():
    rng = np.random.default_rng(0)
    m = 3
    q = np.linalg.qr(rng.standard_normal((m, m)))[0]
    Q = q @ np.diag([0.4, -0.2, 0.1]) @ q.T + 0.05j * np.eye(m)
    b = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    p = OracleProblem(dim=m, Q=Q, b=b, levels=80)
    assert gauss_integral_quadrature(p) == pytest.approx(gauss_integral_analytic(p), abs=1e-10)


def test_analytic_vs_quadrature_with_pinning():
    p = OracleProblem(dim=2, Q=0.3 * np.eye(2), b=np.array([0.2j, -0.1]),
                      pinnings=((np.array([1.0, 1.0]), 0.4),), levels=80)
    assert gauss_integral_quadrature(p) == pytest.approx(gauss_integral_analytic(p), abs=1e-10)


def test_quadrature_rejects_oscillatory():
    g = make_grid(1.0, 1)
    K = kinetic_K(g, 1.0)
    p = OracleProblem(dim=2, Q=K.matrix, b=np.zeros(2))
    assert not is_absolutely_integrable(p)
    with pytest.raises(PreconditionError):
        gauss_integral_quadrature(p)


def test_dependent_pinnings_rejected():
    p = OracleProblem(dim=2, Q=np.zeros((2, 2)), b=np.zeros(2),
                      pinnings=(([1.0, 0.0], 0.0), ([2.0, 0.0], 1.0)))
    with pytest.raises(PreconditionError):
        gauss_integral_analytic(p)


def test_fully_pinned_integral():
    # J = m: no Gaussian freedom remains; value is the joint density times
    # the integrand at the conditional point
    p = OracleProblem(dim=1, Q=[[0.0]], b=[2.0], pinnings=(([1.0], 0.5),))
    want = INV_SQRT_2PI * math.exp(-0.125) * math.exp(2.0 * 0.5)
    assert gauss_integral_analytic(p) == pytest.approx(want, abs=1e-14)


def test_mc_vacuum_and_determinism():
    p = OracleProblem(dim=3, Q=np.zeros((3, 3)), b=np.zeros(3), seed=4, samples=20_000)
    v1, s1 = gauss_integral_mc(p)
    v2, s2 = gauss_integral_mc(p)
    assert v1 == v2 and s1 == s2
    assert v1 == pytest.approx(1.0, abs=1e-12)
    assert s1 == pytest.approx(0.0, abs=1e-12)


def test_mc_matches_analytic_damped():
    p = OracleProblem(dim=2, Q=0.2 * np.eye(2), b=np.array([0.3, -0.1]),
                      seed=1, samples=400_000)
    got, stderr = gauss_integral_mc(p)
    want = gauss_integral_analytic(p)
    assert abs(got - want) <= 3 * stderr


def test_mc_mollified_pinning():
    p = OracleProblem(dim=1, Q=[[0.0]], b=[0.0], pinnings=(([1.0], 0.0),),
                      seed=2, samples=10**6)
    got, stderr = gauss_integral_mc(p, bandwidth=0.02)
    # bias is O(bandwidth^2); 3 stderr at 1e6 samples dominates it
    assert abs(got - INV_SQRT_2PI) <= 3 * stderr + 1e-4


def test_mc_rejects_tiny_sample_count():
    p = OracleProblem(dim=1, Q=[[0.0]], b=[0.0], samples=100)
    with pytest.raises(PreconditionError):
        gauss_integral_mc(p)


def test_analytic_continuous_in_damping():
    # oscillatory instance evaluated by continuation equals the damped limit
    g = make_grid(1.0, 1)
    spec_q = kinetic_K(g, 1.0).matrix
    pin = (np.array([1.0, 0.0]) * math.sqrt(g.dt), 0.3)
    base = gauss_integral_analytic(OracleProblem(dim=2, Q=spec_q, b=np.zeros(2), pinnings=(pin,)))
    prev = None
    for eps in (1e-1, 1e-3, 1e-5):
        val = gauss_integral_analytic(
            OracleProblem(dim=2, Q=spec_q + eps * np.eye(2), b=np.zeros(2), pinnings=(pin,)))
        dev = abs(val - base)
        if prev is not None:
            assert dev < prev
        prev = dev
    assert prev < 1e-4


# --- Wick tensors ---------------------------------------------------------

def test_wick_order_one():
    h = np.array([2.0, -1.0, 0.5])
    om = np.array([0.3, 1.2, -0.7])
    assert wick_eval([np.array(0.0), h], om) == pytest.approx(h @ om)


def test_wick_second_order_is_hermite():
    # <e1 (x) e1, :w^2:> = w1^2 - 1
    ker = np.zeros((2, 2))
    ker[0, 0] = 1.0
    for w1 in (-1.3, 0.0, 2.4):
        om = np.array([w1, 0.8])
        got = wick_eval([np.array(0.0), np.zeros(2), ker], om)
        assert got == pytest.approx(w1**2 - 1, abs=1e-13)


def test_wick_third_and_fourth_order_1d():
    # 1-dim Wick powers are the probabilists' Hermite polynomials
    om = np.array([0.9])
    t = wick_tensors_batch(om[None, :], 4)
    w = om[0]
    assert t[3][0].ravel()[0] == pytest.approx(w**3 - 3 * w, abs=1e-13)
    assert t[4][0].ravel()[0] == pytest.approx(w**4 - 6 * w**2 + 3, abs=1e-13)


def test_wick_batch_matches_single():
    rng = np.random.default_rng(8)
    kernels = [np.array(0.7), rng.standard_normal(3)]
    sym2 = rng.standard_normal((3, 3))
    kernels.append((sym2 + sym2.T) / 2)
    oms = rng.standard_normal((10, 3))
    batch = wick_eval_batch(kernels, oms)
    for i, om in enumerate(oms):
        assert batch[i] == pytest.approx(wick_eval(kernels, om), abs=1e-12)


def test_wick_expectation_is_constant_term():
    rng = np.random.default_rng(21)
    sym2 = rng.standard_normal((2, 2))
    kernels = [np.array(1.4), rng.standard_normal(2), (sym2 + sym2.T) / 2]
    zs = rng.standard_normal((10**6, 2))
    vals = wick_eval_batch(kernels, zs)
    est = vals.mean()
    stderr = math.sqrt(max((np.abs(vals) ** 2).mean() - abs(est) ** 2, 0.0) / len(zs))
    assert abs(est - 1.4) <= 3 * stderr


# --- adjudication ----------------------------------------------------------

def _vacuum_spec(n=1):
    g = make_grid(1.0, n)
    return GaussKernelSpec(g, BlockOperator.zero(g))


def test_verify_vacuum_deviation_zero():
    rep = verify_magicformula(_vacuum_spec())
    assert rep.deviation == 0.0
    assert rep.oracle_value == 1.0


def test_verify_donsker_tight():
    g = make_grid(1.0, 2)
    spec = GaussKernelSpec(g, BlockOperator.zero(g),
                           pinnings=(PinningSpec(indicator(g, 0, 1, "x"), 0.3),))
    f = PhaseFunction(g, [0.2, -0.4], [0.1, 0.5])
    rep = verify_magicformula(spec, f)
    assert rep.deviation <= 1e-10
    assert rep.resolved_sign == +1


def test_verify_kinetic_by_continuation():
    g = make_grid(1.0, 1)
    spec = GaussKernelSpec(g, kinetic_K(g, 1.0),
                           pinnings=(PinningSpec(indicator(g, 0, 1, "x"), 0.4),))
    rep = verify_magicformula(spec)
    assert rep.deviation <= 1e-9
    assert not rep.absolutely_integrable
    assert rep.resolved_sign == +1


def test_verify_rejects_large_dimension():
    g = make_grid(1.0, 4)
    spec = GaussKernelSpec(g, BlockOperator.zero(g))
    with pytest.raises(PreconditionError):
        verify_magicformula(spec)
