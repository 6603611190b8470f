import math

import numpy as np
import pytest

from wnpi.errors import SingularOperatorError
from wnpi.grid import PhaseFunction, make_grid, pair_bilinear
from wnpi.opalg import (
    BlockOperator,
    det_power,
    det_rel,
    det_rel_power,
    free_N_inv,
    invert,
    kinetic_K,
    sqrt_R,
)

GOLDEN = (1 + math.sqrt(5)) / 2


def test_kinetic_symbol_inside_window():
    g = make_grid(1.0, 4)
    K = kinetic_K(g, 0.5)
    want = np.array([[-1, -1j], [-1j, -1 + 1j]])
    np.testing.assert_allclose(K.symbols[0], want)
    np.testing.assert_allclose(K.symbols[1], want)


def test_kinetic_symbol_outside_window_is_zero():
    g = make_grid(1.0, 4)
    K = kinetic_K(g, 0.5)
    assert np.all(K.symbols[2] == 0)
    assert np.all(K.symbols[3] == 0)


def test_identity_plus_kinetic_symbol():
    g = make_grid(1.0, 2)
    s = (BlockOperator.identity(g) + kinetic_K(g, 1.0)).symbols[0]
    np.testing.assert_allclose(s, [[0, -1j], [-1j, 1j]])


def test_free_cov_symbols():
    g = make_grid(1.0, 4)
    N = free_N_inv(g, 0.5)
    np.testing.assert_allclose(N.symbols[0], 1j * np.array([[1, 1], [1, 0]]))
    np.testing.assert_allclose(N.symbols[3], np.eye(2))


def test_free_cov_inverts_identity_plus_kinetic():
    # N^-1 (Id + K) = Id per node, verified by direct 2x2 multiplication
    g = make_grid(1.0, 8)
    N = free_N_inv(g, 0.7)
    IK = BlockOperator.identity(g) + kinetic_K(g, 0.7)
    prod = N.symbols @ IK.symbols
    np.testing.assert_allclose(prod, np.broadcast_to(np.eye(2), prod.shape), atol=1e-13)


def test_free_cov_equals_invert():
    g = make_grid(1.0, 16)
    inv = invert(BlockOperator.identity(g) + kinetic_K(g, 0.7))
    assert np.abs(inv.symbols - free_N_inv(g, 0.7).symbols).max() <= 1e-13


def test_sqrt_eigenvalue_structure():
    # the window symbol is built from eigenvalues (1 +- sqrt(5)) / 2
    lam = np.linalg.eigvalsh(np.array([[1.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(sorted(lam), sorted([GOLDEN, 1 - GOLDEN]), atol=1e-14)


def test_sqrt_principal_roots():
    # independent polar-form oracle: sqrt(i*lam) = sqrt(|lam|) e^{i arg(i lam)/2}
    lam1, lam2 = GOLDEN, 1 - GOLDEN
    root1 = math.sqrt(lam1) * np.exp(1j * np.pi / 4)       # arg(i lam1) = +pi/2
    root2 = math.sqrt(-lam2) * np.exp(-1j * np.pi / 4)     # arg(i lam2) = -pi/2
    assert root1 == pytest.approx(0.8994537199739336 + 0.8994537199739336j, abs=1e-12)
    assert root2 == pytest.approx(0.5558929702514211 - 0.5558929702514211j, abs=1e-12)
    g = make_grid(1.0, 1)
    R = sqrt_R(g, 1.0).symbols[0]
    got = sorted(np.linalg.eigvals(R), key=lambda z: z.real)
    np.testing.assert_allclose(got, [root2, root1], atol=1e-12)


def test_sqrt_squares_to_free_cov():
    for n in (1, 16, 256):
        g = make_grid(1.0, n)
        R = sqrt_R(g, 0.8)
        assert np.abs((R @ R).symbols - free_N_inv(g, 0.8).symbols).max() <= 1e-14


def test_sqrt_bilinear_symmetry():
    g = make_grid(1.0, 16)
    R = sqrt_R(g, 0.6)
    assert R.symmetry_defect() <= 1e-12
    rng = np.random.default_rng(3)
    f = PhaseFunction(g, rng.standard_normal(16), rng.standard_normal(16))
    h = PhaseFunction(g, rng.standard_normal(16), rng.standard_normal(16))
    assert abs(pair_bilinear(R @ f, h) - pair_bilinear(f, R @ h)) < 1e-12


def test_invert_identity():
    g = make_grid(1.0, 3)
    inv = invert(BlockOperator.identity(g))
    np.testing.assert_allclose(inv.matrix, np.eye(6), atol=1e-15)


def test_invert_free_cov_window_symbol():
    # 2x2 oracle: (i [[1,1],[1,0]])^-1 = -i [[0,1],[1,-1]]
    g = make_grid(1.0, 2)
    inv = invert(free_N_inv(g, 1.0))
    np.testing.assert_allclose(inv.symbols[0], -1j * np.array([[0, 1], [1, -1]]), atol=1e-14)


def test_invert_singular_dense_rejected():
    g = make_grid(1.0, 2)
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 0] = 1.0
    with pytest.raises(SingularOperatorError):
        invert(BlockOperator.from_dense(g, mat))


def test_invert_two_sided_within_condition():
    g = make_grid(1.0, 4)
    rng = np.random.default_rng(11)
    m = np.eye(8) + 0.5 * (rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
    op = BlockOperator.from_dense(g, m)
    inv = invert(op)
    cond = np.linalg.cond(m)
    assert np.abs((op @ inv).matrix - np.eye(8)).max() <= 1e-10 * cond
    assert np.abs((inv @ op).matrix - np.eye(8)).max() <= 1e-10 * cond


def test_det_rel_trivial():
    g = make_grid(1.0, 4)
    assert det_rel(kinetic_K(g, 0.5), BlockOperator.zero(g)) == pytest.approx(1.0)


def test_det_rel_symbol_product_matches_dense_oracle():
    g = make_grid(1.0, 3)
    rng = np.random.default_rng(5)
    K = BlockOperator.from_symbols(g, 0.3 * (rng.standard_normal((3, 2, 2))
                                             + 1j * rng.standard_normal((3, 2, 2))))
    L = BlockOperator.from_symbols(g, 0.3 * (rng.standard_normal((3, 2, 2))
                                             + 1j * rng.standard_normal((3, 2, 2))))
    got = det_rel(K, L)
    # dense oracle
    m = np.eye(6) + L.matrix @ np.linalg.inv(np.eye(6) + K.matrix)
    assert got == pytest.approx(complex(np.linalg.det(m)), rel=1e-12)


def test_det_rel_multiplicative_identity_random_dense():
    g = make_grid(1.0, 3)
    rng = np.random.default_rng(17)
    for _ in range(8):
        K = BlockOperator.from_dense(g, 0.3 * (rng.standard_normal((6, 6))
                                               + 1j * rng.standard_normal((6, 6))))
        L = BlockOperator.from_dense(g, 0.3 * (rng.standard_normal((6, 6))
                                               + 1j * rng.standard_normal((6, 6))))
        lhs = np.linalg.det(np.eye(6) + K.matrix + L.matrix)
        rhs = np.linalg.det(np.eye(6) + K.matrix) * det_rel(K, L)
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_det_power_negative_real_convention():
    # one eigenvalue at -4: principal log uses arg = +pi, so
    # det^(-1/2) = exp(-(ln 4 + i pi)/2) = -i / 2
    got = det_power(np.array([[-4.0 + 0j]]), -0.5)
    assert got == pytest.approx(-0.5j, abs=1e-14)


def test_det_power_zero_eigenvalue_rejected():
    with pytest.raises(SingularOperatorError):
        det_power(np.diag([1.0, 0.0]).astype(complex), -0.5)


def test_det_rel_power_matches_det_rel_on_positive_case():
    g = make_grid(1.0, 6)
    rng = np.random.default_rng(23)
    K = BlockOperator.from_dense(g, 0.2 * rng.standard_normal((12, 12)))
    L = BlockOperator.from_dense(g, 0.2 * rng.standard_normal((12, 12)))
    val = det_rel(K, L)
    pow_ = det_rel_power(K, L, -0.5)
    assert pow_ == pytest.approx(complex(val) ** -0.5, rel=1e-10)


def test_symbol_dense_roundtrip():
    g = make_grid(1.0, 5)
    K = kinetic_K(g, 0.6)
    dense = BlockOperator.from_dense(g, K.matrix)
    np.testing.assert_array_equal(dense.to_symbols(), K.symbols)
    with pytest.raises(ValueError):
        BlockOperator.from_dense(g, np.ones((10, 10))).to_symbols()


def test_apply_matches_matrix_action():
    g = make_grid(1.0, 4)
    K = kinetic_K(g, 1.0)
    rng = np.random.default_rng(2)
    f = PhaseFunction(g, rng.standard_normal(4), rng.standard_normal(4))
    out = K @ f
    np.testing.assert_allclose(out.coeffs, K.matrix @ f.coeffs, atol=1e-14)


def test_transpose_bilinear_is_pairing_adjoint():
    g = make_grid(1.0, 3)
    rng = np.random.default_rng(9)
    B = BlockOperator.from_dense(g, rng.standard_normal((6, 6))
                                 + 1j * rng.standard_normal((6, 6)))
    f = PhaseFunction(g, rng.standard_normal(3), rng.standard_normal(3))
    h = PhaseFunction(g, rng.standard_normal(3), rng.standard_normal(3))
    assert pair_bilinear(B @ f, h) == pytest.approx(
        pair_bilinear(f, B.transpose_bilinear() @ h), abs=1e-13)
