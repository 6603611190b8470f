import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wnpi.errors import GridMismatchError
from wnpi.grid import PhaseFunction, indicator, make_grid, pair_bilinear, volterra_A


def test_make_grid_basic():
    g = make_grid(1.0, 4)
    assert g.dt == 0.25
    np.testing.assert_allclose(g.nodes, [0.125, 0.375, 0.625, 0.875])


def test_make_grid_single_cell():
    g = make_grid(2.0, 1)
    assert g.dt == 2.0
    np.testing.assert_allclose(g.nodes, [1.0])


@pytest.mark.parametrize("t_amb,n", [(1.0, 0), (0.0, 4), (-1.0, 4), (1.0, -2)])
def test_make_grid_rejects_bad_inputs(t_amb, n):
    with pytest.raises(ValueError):
        make_grid(t_amb, n)


def test_nodes_strictly_increasing_and_immutable():
    g = make_grid(3.0, 17)
    assert np.all(np.diff(g.nodes) > 0)
    with pytest.raises(ValueError):
        g.nodes[0] = 99.0


def test_indicator_half_window():
    g = make_grid(1.0, 4)
    f = indicator(g, 0.0, 0.5, "x")
    np.testing.assert_array_equal(f.x_part, [1, 1, 0, 0])
    np.testing.assert_array_equal(f.p_part, [0, 0, 0, 0])


def test_indicator_empty_and_full():
    g = make_grid(1.0, 4)
    empty = indicator(g, 0.0, 0.0, "x")
    assert np.all(empty.x_part == 0) and np.all(empty.p_part == 0)
    full = indicator(g, 0.0, 1.0, "p")
    np.testing.assert_array_equal(full.p_part, [1, 1, 1, 1])
    assert np.all(full.x_part == 0)


def test_indicator_out_of_window():
    g = make_grid(1.0, 4)
    with pytest.raises(ValueError):
        indicator(g, -0.1, 0.5, "x")
    with pytest.raises(ValueError):
        indicator(g, 0.0, 1.5, "x")
    with pytest.raises(ValueError):
        indicator(g, 0.0, 0.5, "q")


def test_pairing_indicator_gives_window_length():
    g = make_grid(1.0, 8)
    t = 0.5  # cell-aligned, so exact
    f = indicator(g, 0.0, t, "x")
    assert pair_bilinear(f, f) == pytest.approx(t, abs=1e-15)


def test_pairing_no_conjugation():
    g = make_grid(1.0, 4)
    f = indicator(g, 0.0, 1.0, "x")
    assert pair_bilinear(1j * f, f) == pytest.approx(1j * pair_bilinear(f, f))


def test_pairing_disjoint_components():
    g = make_grid(1.0, 4)
    fx = indicator(g, 0.0, 1.0, "x")
    fp = indicator(g, 0.0, 1.0, "p")
    assert pair_bilinear(fx, fp) == 0


def test_pairing_grid_mismatch():
    f = indicator(make_grid(1.0, 4), 0, 1, "x")
    g = indicator(make_grid(1.0, 8), 0, 1, "x")
    with pytest.raises(GridMismatchError):
        pair_bilinear(f, g)


@st.composite
def phase_pair(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    grid = make_grid(1.0, n)
    vals = st.floats(min_value=-10, max_value=10, allow_nan=False)
    def one():
        x = np.array(draw(st.lists(vals, min_size=n, max_size=n)))
        p = np.array(draw(st.lists(vals, min_size=n, max_size=n)))
        return PhaseFunction(grid, x, p)
    return one(), one(), one()


@given(phase_pair(), st.floats(min_value=-5, max_value=5, allow_nan=False))
@settings(max_examples=50, deadline=None)
def test_pairing_symmetric_and_bilinear(funcs, alpha):
    f, g, h = funcs
    assert abs(pair_bilinear(f, g) - pair_bilinear(g, f)) < 1e-12
    lhs = pair_bilinear(alpha * f + h, g)
    rhs = alpha * pair_bilinear(f, g) + pair_bilinear(h, g)
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(rhs))


def test_pairing_self_real_iff_parts_real():
    g = make_grid(1.0, 3)
    real_f = PhaseFunction(g, [1.0, -2.0, 0.5], [0.0, 1.0, 3.0])
    assert pair_bilinear(real_f, real_f).imag == 0
    complex_f = PhaseFunction(g, [1.0 + 1.0j, 0, 0], [0.0, 0.0, 0.0])
    assert pair_bilinear(complex_f, complex_f).imag != 0


def test_phase_function_rejects_nonfinite():
    g = make_grid(1.0, 2)
    with pytest.raises(ValueError):
        PhaseFunction(g, [np.nan, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        PhaseFunction(g, [0.0, 0.0], [np.inf, 0.0])


def test_coeffs_roundtrip_and_pairing_equivalence():
    g = make_grid(2.0, 5)
    rng = np.random.default_rng(7)
    f = PhaseFunction(g, rng.standard_normal(5) + 1j * rng.standard_normal(5),
                      rng.standard_normal(5))
    h = PhaseFunction(g, rng.standard_normal(5), rng.standard_normal(5))
    back = PhaseFunction.from_coeffs(g, f.coeffs)
    np.testing.assert_allclose(back.x_part, f.x_part, atol=1e-15)
    np.testing.assert_allclose(back.p_part, f.p_part, atol=1e-15)
    # the coefficient dot product realizes the bilinear pairing
    assert pair_bilinear(f, h) == pytest.approx(complex(f.coeffs @ h.coeffs), abs=1e-14)


# Oracle for the double Volterra integral applied to f == 1 on [0, t):
# (A 1)(s) = int_s^t int_0^tau dr dtau = int_s^t tau dtau = (t^2 - s^2) / 2.
def test_volterra_constant_function():
    g = make_grid(1.0, 64)
    t = 0.75
    A = volterra_A(g, t)
    got = A @ np.ones(g.n)
    inside = g.window_mask(0, t)
    want = np.where(inside, (t**2 - g.nodes**2) / 2, 0.0)
    assert np.abs(got - want).max() < g.dt


def test_volterra_linearity_zero():
    g = make_grid(1.0, 16)
    A = volterra_A(g, 0.5)
    assert np.all(A @ np.zeros(g.n) == 0)


def test_volterra_rows_beyond_t_vanish():
    g = make_grid(1.0, 8)
    t = 0.5
    A = volterra_A(g, t)
    outside = ~g.window_mask(0, t)
    assert np.all(A[outside, :] == 0)
    assert np.all(A[:, outside] == 0)


def test_volterra_symmetric_and_refines():
    # symmetry is exact by construction; quadrature error shrinks like O(dt)
    t = 0.8
    devs = []
    for n in (16, 32, 64):
        g = make_grid(1.0, n)
        A = volterra_A(g, t)
        assert np.abs(A - A.T).max() == 0
        got = A @ np.ones(n)
        want = np.where(g.window_mask(0, t), (t**2 - g.nodes**2) / 2, 0.0)
        devs.append(np.abs(got - want).max())
    assert devs[2] < devs[1] < devs[0]


def test_volterra_out_of_window():
    g = make_grid(1.0, 8)
    with pytest.raises(ValueError):
        volterra_A(g, 1.5)
    with pytest.raises(ValueError):
        volterra_A(g, 0.0)
