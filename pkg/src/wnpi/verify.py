"""Verification suites: module invariants wired into RunReports.

Each suite runs a list of named checks at documented tolerances and returns
a RunReport.  All randomness flows through counter-based streams keyed by
(seed, per-check salt), so a fixed seed reproduces the report exactly.
"""

from __future__ import annotations

import time
from typing import Callable, Optional

import numpy as np

from . import __version__
from . import gausskernel as gk
from . import oracle as orc
from . import pathint as pi
from . import scaling as sc
from .errors import CausticError
from .grid import PhaseFunction, indicator, make_grid, pair_bilinear, volterra_A
from .opalg import (
    BlockOperator,
    det_rel,
    det_rel_power,
    free_N_inv,
    invert,
    kinetic_K,
    sqrt_R,
)
from .report import CheckRecord, RunReport

SUITE_NAMES = ("opalg", "gauss", "scaling", "oracle", "pathint")

#: corpus randomness is fixed, independent of the user seed
_CORPUS_KEY = 12345


def _rng(seed: int, salt: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64(salt)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _run_check(check_id: str, fn: Callable[[], tuple], tol_scale: float) -> CheckRecord:
    """Execute one check returning (deviation, tolerance, note); time and grade it."""
    t0 = time.perf_counter()
    try:
        deviation, tol, note = fn()
    except Exception as exc:  # a crashed check is a failed check
        ms = 1000 * (time.perf_counter() - t0)
        return CheckRecord(check_id, "fail", None, None, ms,
                           note=f"{type(exc).__name__}: {exc}")
    ms = 1000 * (time.perf_counter() - t0)
    tol = tol * tol_scale
    status = "pass" if deviation <= tol else "fail"
    return CheckRecord(check_id, status, float(deviation), float(tol), ms, note=note)


def _skipped(check_id: str, note: str) -> CheckRecord:
    return CheckRecord(check_id, "skipped", None, None, None, note=note)


def _random_phase(grid, rng, *, real=True, norm=None) -> PhaseFunction:
    x = rng.standard_normal(grid.n)
    p = rng.standard_normal(grid.n)
    if not real:
        x = x + 1j * rng.standard_normal(grid.n)
        p = p + 1j * rng.standard_normal(grid.n)
    f = PhaseFunction(grid, x, p)
    if norm is not None:
        f = f * (norm / np.sqrt(f.norm2()))
    return f


# ---------------------------------------------------------------------------
# fixed adjudication corpus: pinned Gauss kernels with 2n <= 6
# ---------------------------------------------------------------------------

def oracle_corpus(n_min: int = 1, n_max: int = 3) -> list:
    """Twelve (name, spec, probe) cases adjudicated against the oracle."""
    rng = _rng(_CORPUS_KEY, 0)
    cases = []

    def grid_for(n, t_amb=1.0):
        return make_grid(t_amb, n)

    # 1: vacuum, no pinnings, zero probe
    g1 = grid_for(1)
    cases.append(("vacuum-n1",
                  gk.GaussKernelSpec(g1, BlockOperator.zero(g1)),
                  PhaseFunction.zero(g1)))
    # 2: vacuum with a probe
    g2 = grid_for(2)
    cases.append(("vacuum-probe-n2",
                  gk.GaussKernelSpec(g2, BlockOperator.zero(g2)),
                  _random_phase(g2, rng)))
    # 3: single pinning at the origin
    cases.append(("donsker-origin-n1",
                  gk.GaussKernelSpec(g1, BlockOperator.zero(g1), pinnings=(
                      gk.PinningSpec(indicator(g1, 0, 1, "x"), 0.0),)),
                  PhaseFunction.zero(g1)))
    # 4: single pinning, probe
    cases.append(("donsker-probe-n2",
                  gk.GaussKernelSpec(g2, BlockOperator.zero(g2), pinnings=(
                      gk.PinningSpec(indicator(g2, 0, 1, "x"), 0.7),)),
                  _random_phase(g2, rng)))
    # 5: pinning with complex drift
    cases.append(("donsker-drift-n2",
                  gk.GaussKernelSpec(g2, BlockOperator.zero(g2),
                                     g=_random_phase(g2, rng, real=False, norm=0.8),
                                     pinnings=(gk.PinningSpec(indicator(g2, 0, 1, "p"), -0.4),)),
                  _random_phase(g2, rng)))
    # 6: kinetic operator, endpoint pinning
    cases.append(("kinetic-n1",
                  gk.GaussKernelSpec(g1, kinetic_K(g1, 1.0), pinnings=(
                      gk.PinningSpec(indicator(g1, 0, 1, "x"), 0.4),)),
                  PhaseFunction.zero(g1)))
    # 7: kinetic with probe
    cases.append(("kinetic-probe-n2",
                  gk.GaussKernelSpec(g2, kinetic_K(g2, 1.0), pinnings=(
                      gk.PinningSpec(indicator(g2, 0, 1, "x"), -0.3),)),
                  _random_phase(g2, rng, norm=0.7)))
    # 8: kinetic plus quadratic block, n = 3
    g3 = grid_for(3, 0.75)
    cases.append(("kinetic-quadratic-n3",
                  pi.ho_spec(g3, 0.75, 0.8, 0.2),
                  PhaseFunction.zero(g3)))
    # 9: kinetic plus quadratic block with probe
    cases.append(("kinetic-quadratic-probe-n2",
                  pi.ho_spec(g2, 1.0, 0.6, 0.1),
                  _random_phase(g2, rng, norm=0.5)))
    # 10: damped dense quadratic form (absolutely integrable, MC friendly)
    q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    kd = q @ np.diag(rng.uniform(-0.3, 0.4, size=4)) @ q.T
    eta10 = PhaseFunction.from_coeffs(g2, rng.standard_normal(4))
    cases.append(("damped-dense-n2",
                  gk.GaussKernelSpec(g2, BlockOperator.from_dense(g2, kd), pinnings=(
                      gk.PinningSpec(eta10, 0.5),)),
                  _random_phase(g2, rng)))
    # 11: two pinnings over the vacuum
    cases.append(("multipin-vacuum-n2",
                  gk.GaussKernelSpec(g2, BlockOperator.zero(g2), pinnings=(
                      gk.PinningSpec(indicator(g2, 0, 1, "x"), 0.2),
                      gk.PinningSpec(indicator(g2, 0, 1, "p"), -0.5),)),
                  _random_phase(g2, rng, norm=0.6)))
    # 12: two pinnings over the kinetic operator
    cases.append(("multipin-kinetic-n2",
                  gk.GaussKernelSpec(g2, kinetic_K(g2, 1.0), pinnings=(
                      gk.PinningSpec(indicator(g2, 0, 1, "x"), 0.3),
                      gk.PinningSpec(indicator(g2, 0, 1, "p"), -0.2),)),
                  PhaseFunction.zero(g2)))

    return [(name, spec, f) for name, spec, f in cases
            if n_min <= spec.grid.n <= n_max]


def exported_t_transforms(seed: int = 0) -> list:
    """Named (evaluator, grid) pairs covering every exported T-transform."""
    grid = make_grid(1.0, 4)
    t = 1.0
    eta = indicator(grid, 0, t, "x")
    kin = kinetic_K(grid, t)
    free_spec = gk.GaussKernelSpec(grid, kin, pinnings=(gk.PinningSpec(eta, 0.5),))
    ho = pi.ho_spec(grid, t, 1.0, 0.5)
    entries = [
        ("donsker", lambda f: gk.t_transform_donsker(eta, 0.5, f)),
        ("pinned-kinetic", lambda f: gk.t_transform_gauss(free_spec, f)),
        ("normalized-exp", lambda f: gk.normalized_exp_T(kin, f)),
        ("quadratic-kernel", lambda f: gk.t_transform_gauss(ho, f)),
        ("free-integrand", lambda f: pi.free_integrand_T(grid, t, 0.5, f)),
        ("oscillator-closed", lambda f: pi.ho_T_closed(1.0, t, 0.5, f)),
        ("scaled-quadratic", lambda f: pi.scaled_quadratic_T(grid, t, ho.L, eta, 0.5, f)),
    ]
    return [(name, fn, grid) for name, fn in entries]


# ---------------------------------------------------------------------------
# opalg suite (includes the grid-module invariants)
# ---------------------------------------------------------------------------

def suite_opalg(seed=0, tol_scale=1.0, samples=None, dims=None) -> list:
    checks = []
    grid = make_grid(1.0, 64)

    def pairing_symmetry():
        rng = _rng(seed, 101)
        worst = 0.0
        for _ in range(10):
            f = _random_phase(grid, rng, real=False)
            g = _random_phase(grid, rng, real=False)
            worst = max(worst, abs(pair_bilinear(f, g) - pair_bilinear(g, f)))
        return worst, 1e-12, ""
    checks.append(_run_check("grid.pairing.symmetry", pairing_symmetry, tol_scale))

    def pairing_bilinearity():
        rng = _rng(seed, 102)
        worst = 0.0
        for _ in range(10):
            f = _random_phase(grid, rng, real=False)
            g = _random_phase(grid, rng, real=False)
            h = _random_phase(grid, rng, real=False)
            a = complex(*rng.standard_normal(2))
            lhs = pair_bilinear(a * f + h, g)
            rhs = a * pair_bilinear(f, g) + pair_bilinear(h, g)
            worst = max(worst, abs(lhs - rhs))
        return worst, 1e-12, ""
    checks.append(_run_check("grid.pairing.bilinearity", pairing_bilinearity, tol_scale))

    def indicator_norm():
        t = 0.437
        ind = indicator(grid, 0, t, "x")
        return abs(pair_bilinear(ind, ind) - t), grid.dt, "norm vs window length"
    checks.append(_run_check("grid.indicator.norm", indicator_norm, tol_scale))

    def volterra_symmetry():
        A = volterra_A(grid, 0.8)
        return float(np.abs(A - A.T).max()), 1e-14, ""
    checks.append(_run_check("grid.volterra.symmetry", volterra_symmetry, tol_scale))

    def volterra_constant():
        t = 0.8
        A = volterra_A(grid, t)
        ones = np.ones(grid.n)
        got = A @ ones
        inside = grid.window_mask(0, t)
        expected = np.where(inside, (t**2 - grid.nodes**2) / 2, 0.0)
        return float(np.abs(got - expected).max()), grid.dt, "double integral of 1"
    checks.append(_run_check("grid.volterra.constant_integrand", volterra_constant, tol_scale))

    def sqrt_squared():
        worst = 0.0
        for n in (1, 16, 256):
            g = make_grid(1.0, n)
            R = sqrt_R(g, 1.0)
            target = free_N_inv(g, 1.0)
            worst = max(worst, float(np.abs((R @ R).symbols - target.symbols).max()))
        return worst, 1e-12, "n in {1,16,256}"
    checks.append(_run_check("opalg.sqrt.squared", sqrt_squared, tol_scale))

    def sqrt_symmetry():
        worst = 0.0
        for n in (1, 16, 256):
            g = make_grid(1.0, n)
            worst = max(worst, sqrt_R(g, 1.0).symmetry_defect())
        return worst, 1e-12, ""
    checks.append(_run_check("opalg.sqrt.symmetry", sqrt_symmetry, tol_scale))

    def free_cov_consistency():
        g = make_grid(1.0, 16)
        K = kinetic_K(g, 0.7)
        inv = invert(BlockOperator.identity(g) + K)
        return float(np.abs(inv.symbols - free_N_inv(g, 0.7).symbols).max()), 1e-13, ""
    checks.append(_run_check("opalg.free_cov.consistency", free_cov_consistency, tol_scale))

    def invert_two_sided():
        rng = _rng(seed, 103)
        g = make_grid(1.0, 6)
        m = 2 * g.n
        mat = np.eye(m) + 0.4 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
        op = BlockOperator.from_dense(g, mat)
        inv = invert(op)
        cond = np.linalg.cond(mat)
        dev = float(np.abs((op @ inv).matrix - np.eye(m)).max())
        dev = max(dev, float(np.abs((inv @ op).matrix - np.eye(m)).max()))
        return dev, 1e-10 * cond, f"cond={cond:.2e}"
    checks.append(_run_check("opalg.invert.two_sided", invert_two_sided, tol_scale))

    def detrel_multiplicative():
        rng = _rng(seed, 104)
        g = make_grid(1.0, 3)
        m = 2 * g.n
        worst = 0.0
        for _ in range(5):
            K = BlockOperator.from_dense(g, 0.3 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))))
            L = BlockOperator.from_dense(g, 0.3 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))))
            lhs = np.linalg.det(np.eye(m) + K.matrix + L.matrix)
            rhs = np.linalg.det(np.eye(m) + K.matrix) * det_rel(K, L)
            worst = max(worst, abs(lhs - rhs) / abs(lhs))
        return worst, 1e-10, "det(Id+K+L) = det(Id+K) det_rel(K,L)"
    checks.append(_run_check("opalg.detrel.multiplicative", detrel_multiplicative, tol_scale))

    def detrel_symbol_vs_dense():
        rng = _rng(seed, 105)
        g = make_grid(1.0, 5)
        K = BlockOperator.from_symbols(g, 0.3 * (rng.standard_normal((g.n, 2, 2)) + 1j * rng.standard_normal((g.n, 2, 2))))
        L = BlockOperator.from_symbols(g, 0.3 * (rng.standard_normal((g.n, 2, 2)) + 1j * rng.standard_normal((g.n, 2, 2))))
        a = det_rel(K, L)
        b = det_rel(BlockOperator.from_dense(g, K.matrix), BlockOperator.from_dense(g, L.matrix))
        return abs(a - b) / abs(b), 1e-10, "per-node product vs dense determinant"
    checks.append(_run_check("opalg.detrel.symbol_vs_dense", detrel_symbol_vs_dense, tol_scale))

    return checks


# ---------------------------------------------------------------------------
# gauss suite
# ---------------------------------------------------------------------------

def suite_gauss(seed=0, tol_scale=1.0, samples=None, dims=None) -> list:
    checks = []
    grid = make_grid(1.0, 8)

    def vacuum_unit():
        spec = gk.GaussKernelSpec(grid, BlockOperator.zero(grid))
        return abs(gk.generalized_expectation(spec) - 1.0), 1e-14, ""
    checks.append(_run_check("gauss.vacuum.unit", vacuum_unit, tol_scale))

    def donsker_agreement():
        rng = _rng(seed, 201)
        eta = indicator(grid, 0, 1, "x")
        worst = 0.0
        for _ in range(10):
            x = float(rng.uniform(-2, 2))
            f = _random_phase(grid, rng)
            spec = gk.GaussKernelSpec(grid, BlockOperator.zero(grid),
                                      pinnings=(gk.PinningSpec(eta, x),))
            worst = max(worst, abs(gk.t_transform_gauss(spec, f)
                                   - gk.t_transform_donsker(eta, x, f)))
        return worst, 1e-10, "pinned vacuum kernel vs Donsker formula"
    checks.append(_run_check("gauss.donsker.agreement", donsker_agreement, tol_scale))

    def donsker_normalization():
        eta = indicator(grid, 0, 1, "x")
        s = pair_bilinear(eta, eta).real
        xs = np.linspace(-10, 10, 2001)
        zero = PhaseFunction.zero(grid)
        vals = np.array([gk.t_transform_donsker(eta, x, zero).real for x in xs])
        total = np.trapezoid(vals, xs)
        return abs(total - 1.0), 1e-6, f"density integrates to 1 (variance {s:.3f})"
    checks.append(_run_check("gauss.donsker.normalization", donsker_normalization, tol_scale))

    def nexp_values():
        zero = PhaseFunction.zero(grid)
        dev = abs(gk.normalized_exp_T(BlockOperator.zero(grid), zero) - 1.0)
        t = 1.0
        f = indicator(grid, 0, t, "x")
        got = gk.normalized_exp_T(kinetic_K(grid, t), f)
        dev = max(dev, abs(got - np.exp(-1j * t / 2)))
        return dev, 1e-12, "normalized exponential at kinetic operator"
    checks.append(_run_check("gauss.nexp.values", nexp_values, tol_scale))

    def grotex_dims():
        rng = _rng(seed, 202)
        worst = 0.0
        for m in (1, 2, 3, 4):
            q = np.linalg.qr(rng.standard_normal((m, m)))[0]
            K = q @ np.diag(rng.uniform(-0.45, 0.0, size=m)) @ q.T
            rep = gk.grotex_check(K, seed=seed)
            worst = max(worst, rep.deviation, rep.tg_deviation)
        return worst, 1e-10, "dims 1..4"
    checks.append(_run_check("gauss.grotex.identity", grotex_dims, tol_scale))

    def growth_exported():
        rng = _rng(seed, 203)
        worst_res = 0.0
        for name, fn, g in exported_t_transforms(seed):
            for _ in range(3):
                f = _random_phase(g, rng, norm=float(rng.uniform(0.3, 2.0)))
                rep = gk.check_u_functional(fn, f)
                if not rep.finite:
                    return np.inf, 1e-6, f"non-finite growth fit for {name}"
                worst_res = max(worst_res, rep.cr_residual_max)
        return worst_res, 1e-6, "growth finite; max analyticity residual"
    checks.append(_run_check("gauss.growth.exported", growth_exported, tol_scale))

    def branch_continuity():
        g = make_grid(1.0, 24)
        K = kinetic_K(g, 1.0)
        L = pi.ho_spec(g, 1.0, 1.0, 0.0).L
        taus = np.linspace(0.0, 1.0, 64)
        vals = [det_rel_power(K, float(tau) * L, -0.5) for tau in taus]
        jumps = [abs(vals[j + 1] / vals[j] - 1.0) for j in range(len(vals) - 1)]
        return float(max(jumps)), 0.10, "64-step homotopy in the quadratic block"
    checks.append(_run_check("gauss.detrel.branch_continuity", branch_continuity, tol_scale))

    return checks


# ---------------------------------------------------------------------------
# scaling suite
# ---------------------------------------------------------------------------

def _random_dense_chaos(rng, dim, n_max) -> sc.ChaosVector:
    kers = [np.array(rng.standard_normal())]
    for n in range(1, n_max + 1):
        raw = rng.standard_normal((dim,) * n)
        kers.append(sc._symmetrize(raw))
    return sc.ChaosVector.dense(kers)


def suite_scaling(seed=0, tol_scale=1.0, samples=None, dims=None) -> list:
    checks = []
    grid = make_grid(1.0, 2)  # dim 4 chaos space

    def trace_defining():
        B = np.array([[0.0, 1.0], [0.0, 0.0]])
        tr = sc.trace_kernel(B)
        e1 = np.array([1.0, 0.0])
        e2 = np.array([0.0, 1.0])
        dev = abs(tr.pair(e1, e2) - 1.0) + abs(tr.pair(e2, e1) - 0.0)
        dev += float(np.abs(sc.trace_kernel(np.eye(2)).matrix - np.eye(2)).max())
        return dev, 1e-15, "defining property and asymmetry witness"
    checks.append(_run_check("scaling.trace.defining", trace_defining, tol_scale))

    def trace_hs():
        rng = _rng(seed, 301)
        B = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        dev = abs(sc.trace_kernel(B).frobenius_sq - np.sum(np.abs(B) ** 2))
        return dev, 1e-12, "Frobenius norm equals Hilbert-Schmidt norm"
    checks.append(_run_check("scaling.trace.hs_identity", trace_hs, tol_scale))

    def sigma_identity():
        rng = _rng(seed, 302)
        phi = _random_dense_chaos(rng, 4, 3)
        out = sc.sigma_dense(np.eye(4), phi)
        dev = max(float(np.abs(a - b).max()) for a, b in zip(out.kernels, phi.kernels))
        coh = sc.ChaosVector.coherent([(1.5, _random_phase(grid, rng))])
        out2 = sc.sigma_coherent(np.eye(4), coh)
        dev = max(dev, abs(out2.terms[0][0] - coh.terms[0][0]),
                  float(np.abs(out2.terms[0][1].coeffs - coh.terms[0][1].coeffs).max()))
        return dev, 1e-12, "identity scaling on both representations"
    checks.append(_run_check("scaling.sigma.identity", sigma_identity, tol_scale))

    def scalar_reduction():
        rng = _rng(seed, 303)
        phi = _random_dense_chaos(rng, 2, 2)
        from math import factorial
        worst = 0.0
        for z in (0.5, 1.7j, 0.8 - 0.6j):
            out = sc.sigma_dense(z * np.eye(2), phi)
            for n in range(phi.n_max + 1):
                acc = np.zeros((2,) * n, dtype=complex)
                k = 0
                while n + 2 * k <= phi.n_max:
                    src = np.asarray(phi.kernels[n + 2 * k], dtype=complex)
                    for _ in range(k):
                        src = np.trace(src, axis1=0, axis2=1)
                    coef = (z ** n * factorial(n + 2 * k) / (factorial(k) * factorial(n))
                            * ((z ** 2 - 1) / 2) ** k)
                    acc = acc + coef * src
                    k += 1
                worst = max(worst, float(np.abs(out.kernels[n] - acc).max()))
        return worst, 1e-12, "operator scaling reduces to scalar scaling at B = z Id"
    checks.append(_run_check("scaling.sigma.scalar_reduction", scalar_reduction, tol_scale))

    def sigma_pointwise():
        rng = _rng(seed, 304)
        worst = 0.0
        for dim, n_max in ((2, 3), (4, 3), (6, 2)):
            phi = _random_dense_chaos(rng, dim, n_max)
            B = 0.8 * rng.standard_normal((dim, dim))
            out = sc.sigma_dense(B, phi)
            omegas = rng.standard_normal((50, dim))
            lhs = orc.wick_eval_batch(out.kernels, omegas)
            rhs = orc.wick_eval_batch(phi.kernels, omegas @ B.T)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst, 1e-8, "eval(sigma_B phi)(w) = eval(phi)(B w), 50 points"
    checks.append(_run_check("scaling.sigma.pointwise", sigma_pointwise, tol_scale))

    def sigma_multiplicative():
        rng = _rng(seed, 305)
        B = 0.7 * rng.standard_normal((4, 4)) + 0.2j * rng.standard_normal((4, 4))
        phi = sc.ChaosVector.coherent([(1.0, _random_phase(grid, rng)),
                                       (0.5 - 0.2j, _random_phase(grid, rng))])
        psi = sc.ChaosVector.coherent([(0.8j, _random_phase(grid, rng))])
        lhs = sc.sigma_coherent(B, sc.coherent_product(phi, psi))
        rhs = sc.coherent_product(sc.sigma_coherent(B, phi), sc.sigma_coherent(B, psi))
        worst = 0.0
        for _ in range(10):
            xi = 0.5 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
            a, b = sc.s_transform(lhs, xi), sc.s_transform(rhs, xi)
            worst = max(worst, abs(a - b) / max(1.0, abs(a)))
        return worst, 1e-10, "sigma_B(phi psi) = sigma_B(phi) sigma_B(psi), S-probes"
    checks.append(_run_check("scaling.sigma.multiplicative", sigma_multiplicative, tol_scale))

    def wick_dual_vacuum():
        rng = _rng(seed, 306)
        B = np.eye(4) + 0.3 * rng.standard_normal((4, 4))
        vac = sc.ChaosVector.vacuum_dense(4)
        worst = 0.0
        for _ in range(10):
            xi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            got = sc.sigma_dual_S(B, vac, xi)
            want = np.exp(-0.5 * (xi @ (np.eye(4) - B @ B.T) @ xi))
            worst = max(worst, abs(got - want))
        return worst, 1e-12, "dual scaling of the vacuum is the Gauss kernel of BB*"
    checks.append(_run_check("scaling.wick.dual_vacuum", wick_dual_vacuum, tol_scale))

    def wick_identity_two():
        rng = _rng(seed, 307)
        B = np.eye(4) + 0.25 * rng.standard_normal((4, 4))
        Sigma = B @ B.T
        Sinv = np.linalg.inv(Sigma)
        dsig = float(np.linalg.det(Sigma))
        phi = sc.ChaosVector.coherent([(1.0, _random_phase(grid, rng)),
                                       (0.4 + 0.1j, _random_phase(grid, rng))])
        worst = 0.0
        for _ in range(20):
            xi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            # left side through the oracle: <<Phi_BB* phi, :e^<xi,.>:>>
            lhs = 0.0 + 0.0j
            for w, Xi in phi.terms:
                cj = Xi.coeffs
                pref = w * np.exp(-0.5 * (cj @ cj)) * np.exp(-0.5 * (xi @ xi)) / np.sqrt(dsig)
                p = orc.OracleProblem(dim=4, Q=Sinv - np.eye(4), b=cj + xi)
                lhs += pref * orc.gauss_integral_analytic(p)
            rhs = sc.sigma_dual_S(B, sc.sigma_coherent(B, phi), xi)
            worst = max(worst, abs(lhs - rhs))
        return worst, 1e-8, "multiplication by the BB* kernel = dual-scaled scaling"
    checks.append(_run_check("scaling.wick.mult_identity", wick_identity_two, tol_scale))

    def wick_identity_three():
        rng = _rng(seed, 308)
        B = np.eye(4) + 0.25 * rng.standard_normal((4, 4))
        phi = sc.ChaosVector.coherent([(0.9, _random_phase(grid, rng))])
        scaled = sc.sigma_coherent(B, phi)
        worst = 0.0
        for _ in range(20):
            xi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            lhs = sc.sigma_dual_S(B, scaled, xi)
            gauss = np.exp(-0.5 * (xi @ (np.eye(4) - B @ B.T) @ xi))
            rhs = gauss * sc.s_transform(scaled, B.T @ xi)
            worst = max(worst, abs(lhs - rhs))
        return worst, 1e-8, "Wick-product factorization of the dual-scaled vector"
    checks.append(_run_check("scaling.wick.factorization", wick_identity_three, tol_scale))

    def measure_pushforward():
        rng = _rng(seed, 309)
        B = np.eye(4) + 0.3 * rng.standard_normal((4, 4))
        xi = rng.standard_normal(4)
        n_samp = int(samples or 200_000)
        zs = rng.standard_normal((n_samp, 4))
        vals = np.exp(1j * (zs @ (B.T @ xi)))
        est = vals.mean()
        stderr = float(np.sqrt(max(np.mean(np.abs(vals) ** 2) - abs(est) ** 2, 0.0) / n_samp))
        want = np.exp(-0.5 * ((B.T @ xi) @ (B.T @ xi)))
        return abs(est - want), 3 * stderr, f"characteristic function, {n_samp} samples"
    checks.append(_run_check("scaling.measure.pushforward", measure_pushforward, tol_scale))

    return checks


# ---------------------------------------------------------------------------
# oracle suite
# ---------------------------------------------------------------------------

def suite_oracle(seed=0, tol_scale=1.0, samples=None, dims=None) -> list:
    checks = []
    n_min, n_max = dims if dims else (1, 3)
    corpus = oracle_corpus(n_min, n_max)
    n_samples = int(samples or 200_000)

    def corpus_analytic():
        worst = 0.0
        worst_name = ""
        for name, spec, f in corpus:
            rep = orc.verify_magicformula(spec, f, mode="analytic")
            if rep.deviation > worst:
                worst, worst_name = rep.deviation, name
        return worst, 1e-9, f"{len(corpus)} cases; worst: {worst_name}"
    checks.append(_run_check("oracle.corpus.analytic", corpus_analytic, tol_scale))

    def corpus_sign():
        bad = [name for name, spec, f in corpus
               if spec.pinnings and orc.verify_magicformula(spec, f).resolved_sign != +1]
        return float(len(bad)), 0.0, "oracle resolves the positive pinning exponent"
    checks.append(_run_check("oracle.corpus.sign", corpus_sign, tol_scale))

    def corpus_mc():
        worst = 0.0
        n_run = 0
        for name, spec, f in corpus:
            probe = orc.problem_from_spec(spec, f)
            if not (orc.is_absolutely_integrable(probe) and orc.mc_variance_finite(probe, 0.02)):
                continue
            rep = orc.verify_magicformula(spec, f, mode="monte-carlo",
                                          seed=seed, samples=n_samples)
            worst = max(worst, rep.deviation / (3 * rep.stderr + 1e-300))
            n_run += 1
        return worst, 1.0, f"{n_run} integrable cases at {n_samples} samples; dev / 3 stderr"
    checks.append(_run_check("oracle.corpus.mc", corpus_mc, tol_scale))

    def quadrature_crosscheck():
        rng = _rng(seed, 401)
        m = 3
        q = np.linalg.qr(rng.standard_normal((m, m)))[0]
        Q = q @ np.diag(rng.uniform(-0.2, 0.5, size=m)) @ q.T + 0.1j * np.eye(m)
        b = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        p = orc.OracleProblem(dim=m, Q=Q, b=b, pinnings=((np.array([1.0, 0.5, 0.0]), 0.3),),
                              levels=60)
        a = orc.gauss_integral_analytic(p)
        qd = orc.gauss_integral_quadrature(p)
        return abs(a - qd), 1e-8, "conditioned Gauss-Hermite vs closed form"
    checks.append(_run_check("oracle.quadrature.crosscheck", quadrature_crosscheck, tol_scale))

    def damping_continuity():
        g = make_grid(1.0, 1)
        spec = gk.GaussKernelSpec(g, kinetic_K(g, 1.0), pinnings=(
            gk.PinningSpec(indicator(g, 0, 1, "x"), 0.4),))
        p0 = orc.problem_from_spec(spec, PhaseFunction.zero(g))
        base = orc.gauss_integral_analytic(p0)
        devs = []
        for eps in (1e-2, 1e-4):
            pe = orc.OracleProblem(dim=p0.dim, Q=p0.Q + eps * np.eye(p0.dim),
                                   b=p0.b, pinnings=p0.pinnings)
            devs.append(abs(orc.gauss_integral_analytic(pe) - base))
        decreasing = devs[1] < devs[0]
        return devs[1] if decreasing else np.inf, 1e-3, "value continuous as damping -> 0"
    checks.append(_run_check("oracle.damping.continuity", damping_continuity, tol_scale))

    def wick_mean_zero():
        rng = _rng(seed, 402)
        m = 3
        worst = 0.0
        for order in (1, 2, 3):
            ker = sc._symmetrize(rng.standard_normal((m,) * order))
            kernels = [np.array(0.0)] + [np.zeros((m,) * j) for j in range(1, order)] + [ker]
            zs = rng.standard_normal((n_samples, m))
            vals = orc.wick_eval_batch(kernels, zs)
            est = vals.mean()
            stderr = float(np.sqrt(max(np.mean(np.abs(vals) ** 2) - abs(est) ** 2, 0.0) / n_samples))
            worst = max(worst, abs(est) / (3 * stderr + 1e-300))
        return worst, 1.0, "centered Wick powers, dev / 3 stderr"
    checks.append(_run_check("oracle.wick.mean_zero", wick_mean_zero, tol_scale))

    def wick_reproducing():
        rng = _rng(seed, 403)
        m = 3
        xi = 0.6 * rng.standard_normal(m)
        eta = 0.6 * rng.standard_normal(m)
        zs = rng.standard_normal((n_samples, m))
        vals = np.exp(-0.5 * xi @ xi + zs @ xi) * np.exp(zs @ eta)
        est = vals.mean()
        stderr = float(np.sqrt(max(np.mean(np.abs(vals) ** 2) - abs(est) ** 2, 0.0) / n_samples))
        want = np.exp(xi @ eta + 0.5 * eta @ eta)
        return abs(est - want), 3 * stderr, "Wick exponential pairing"
    checks.append(_run_check("oracle.wick.reproducing", wick_reproducing, tol_scale))

    def rng_reproducible():
        p = orc.OracleProblem(dim=2, Q=0.1 * np.eye(2), b=np.zeros(2), seed=seed,
                              samples=max(10**4, n_samples // 10))
        a1, s1 = orc.gauss_integral_mc(p)
        a2, s2 = orc.gauss_integral_mc(p)
        return abs(a1 - a2) + abs(s1 - s2), 0.0, "identical estimate for identical seed"
    checks.append(_run_check("oracle.rng.reproducible", rng_reproducible, tol_scale))

    return checks


# ---------------------------------------------------------------------------
# pathint suite
# ---------------------------------------------------------------------------

def suite_pathint(seed=0, tol_scale=1.0, samples=None, dims=None) -> list:
    checks = []

    def free_value():
        g = make_grid(1.0, 16)
        got = pi.free_integrand_T(g, 1.0, 0.0)
        want = (2j * np.pi) ** -0.5
        return abs(got - want), 1e-12, "free expectation at t = 1"
    checks.append(_run_check("pathint.free.value", free_value, tol_scale))

    def free_routes():
        rng = _rng(seed, 501)
        g = make_grid(1.0, 8)
        worst = 0.0
        for _ in range(5):
            f = _random_phase(g, rng, real=False, norm=1.0)
            y = float(rng.uniform(-1.5, 1.5))
            pi.free_integrand_T(g, 1.0, y, f)  # raises on route disagreement
            spec = pi._pinned_free_spec(g, 1.0, y)
            R = sqrt_R(g, 1.0).matrix
            eta_c = indicator(g, 0, 1, "x").coeffs
            scaled = gk._donsker_core((R @ eta_c) @ (R @ eta_c),
                                      (R @ eta_c) @ (R @ f.coeffs),
                                      (R @ f.coeffs) @ (R @ f.coeffs), y)
            worst = max(worst, abs(gk.t_transform_gauss(spec, f) - scaled))
        return worst, 1e-10, "direct vs scaling route, random probes"
    checks.append(_run_check("pathint.free.routes", free_routes, tol_scale))

    def route_equality():
        g = make_grid(1.0, 64)
        eta = indicator(g, 0, 1, "x")
        worst = 0.0
        for k in (0.0, 1.0):
            spec = pi.ho_spec(g, 1.0, k, 0.5)
            scaled = pi.scaled_quadratic_T(g, 1.0, spec.L, eta, 0.5)
            direct = gk.t_transform_gauss(spec, PhaseFunction.zero(g))
            worst = max(worst, abs(scaled - direct))
        return worst, 1e-8, "scaled vs direct quadratic route, n = 64"
    checks.append(_run_check("pathint.route.equality", route_equality, tol_scale))

    def det_identity():
        g = make_grid(1.0, 24)
        spec = pi.ho_spec(g, 1.0, 1.0, 0.0)
        R = sqrt_R(g, 1.0).matrix
        m = 2 * g.n
        lhs = np.linalg.det(np.eye(m) + R @ spec.L.matrix @ R)
        rhs = det_rel(spec.K, spec.L)
        return abs(lhs - rhs) / abs(rhs), 1e-10, "det(Id+RLR) = det_rel(K, L)"
    checks.append(_run_check("pathint.det.identity", det_identity, tol_scale))

    def closed_form():
        worst = 0.0
        for k in (0.5, 1.0, 2.0):
            for t in (0.3, 1.0, 2.0):
                for y in (0.0, 1.0):
                    r = pi.ho_propagator(k, t, y, n=64)
                    worst = max(worst, r.relative_deviation)
        return worst, 5e-3, "18 (k, t, y) points at n = 64"
    checks.append(_run_check("pathint.ho.closed_form", closed_form, tol_scale))

    def refinement():
        devs = [pi.ho_propagator(1.0, 1.0, 1.0, n=n).deviation for n in (16, 32, 64)]
        monotone = all(devs[j + 1] < devs[j] for j in range(len(devs) - 1))
        return (devs[-1] if monotone else np.inf), 1e-3, f"deviations {['%.1e' % d for d in devs]}"
    checks.append(_run_check("pathint.ho.refinement", refinement, tol_scale))

    def free_limit():
        worst = 0.0
        for t in (0.5, 1.0, 2.0):
            for y in (0.0, 1.0):
                got = pi.ho_propagator(1e-12, t, y, n=32).closed_value
                want = (2j * np.pi * t) ** -0.5 * np.exp(1j * y * y / (2 * t))
                worst = max(worst, abs(got - want))
        return worst, 1e-5, "k -> 0 limit"
    checks.append(_run_check("pathint.free.limit", free_limit, tol_scale))

    def caustic_guard_check():
        try:
            pi.ho_propagator(1.0, float(np.pi), 0.0, n=8)
        except CausticError:
            return 0.0, 0.0, "caustic rejected"
        return 1.0, 0.0, "caustic not rejected"
    checks.append(_run_check("pathint.caustic.guard", caustic_guard_check, tol_scale))

    def modulus_identity():
        worst = 0.0
        for k in (0.5, 1.0, 2.0):
            for t in (0.4, 1.0, 2.0):
                got = abs(pi.ho_T_closed(k, t, 0.0))
                want = (2 * np.pi * abs(np.sin(np.sqrt(k) * t)) / np.sqrt(k)) ** -0.5
                worst = max(worst, abs(got - want))
        return worst, 1e-12, "|T(0)| independent of branch"
    checks.append(_run_check("pathint.modulus.identity", modulus_identity, tol_scale))

    return checks


SUITES = {
    "opalg": suite_opalg,
    "gauss": suite_gauss,
    "scaling": suite_scaling,
    "oracle": suite_oracle,
    "pathint": suite_pathint,
}


def run_suite(suite: str, seed: int = 0, tol_scale: float = 1.0,
              samples: Optional[int] = None, dims: Optional[tuple] = None) -> RunReport:
    """Run one suite (or 'all') and assemble the report."""
    if suite == "all":
        names = SUITE_NAMES
    elif suite in SUITES:
        names = (suite,)
    else:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITE_NAMES + ('all',)}")
    checks = []
    for name in names:
        checks.extend(SUITES[name](seed=seed, tol_scale=tol_scale,
                                   samples=samples, dims=dims))
    return RunReport(
        suite=suite,
        seed=seed,
        tool_version=__version__,
        grid_params={"dims": list(dims) if dims else [1, 3],
                     "samples": int(samples or 200_000),
                     "tol_scale": tol_scale},
        checks=tuple(checks),
    )
