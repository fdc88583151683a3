import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_roots, naive_f, oracle_count_eq9, oracle_h_star, oracle_ti_roots
from sostree import (
    BranchPattern,
    ContractError,
    DomainError,
    ModelParams,
    RootFindConfig,
    bracketed_roots,
    g_derivative,
    g_of,
    kernel_bounds,
    kernel_f,
    kernel_f_derivative,
    operator_W,
    phi_of,
    psi_derivative,
    psi_of,
    scan_roots,
    solve_b_nonzero,
    solve_b_zero,
    solve_nonTI_23,
    solve_periodic,
    solve_reduced_system,
    solve_ti,
    system_residual,
    zeta_of,
)
from sostree.errors import ScanWindowError
from sostree.solvers import choose_h_star, stability_tag


def small_cfg(lo, hi, points=2001):
    return RootFindConfig(scan_lo=lo, scan_hi=hi, scan_points=points)


# ---- config and generic root finding ----

def test_config_validation_and_parse():
    with pytest.raises(DomainError):
        RootFindConfig(scan_lo=1, scan_hi=0)
    with pytest.raises(DomainError):
        RootFindConfig(scan_points=10)
    with pytest.raises(DomainError):
        RootFindConfig(tol_x=0)
    cfg = RootFindConfig.parse_scan("-5:5:1001")
    assert (cfg.scan_lo, cfg.scan_hi, cfg.scan_points) == (-5.0, 5.0, 1001)
    with pytest.raises(DomainError):
        RootFindConfig.parse_scan("1:2")


def test_covering_keeps_spacing():
    cfg = small_cfg(-1, 1, 201)
    wide = cfg.covering(10)
    assert wide.scan_lo <= -11 and wide.scan_hi >= 11
    step = (wide.scan_hi - wide.scan_lo) / (wide.scan_points - 1)
    assert step <= 0.01 + 1e-12
    assert RootFindConfig().covering(3) == RootFindConfig()


def test_bracketed_roots_examples():
    assert bracketed_roots(lambda x: x, small_cfg(-1, 1)) == [0.0]
    roots = bracketed_roots(lambda x: x**3 - x, small_cfg(-2, 2))
    np.testing.assert_allclose(roots, [-1, 0, 1], atol=1e-12)
    assert bracketed_roots(lambda x: x * x + 1, small_cfg(-2, 2)) == []


def test_bracketed_roots_tangency_and_close_pair():
    roots = scan_roots(lambda x: (x - 0.3) ** 2, small_cfg(-1, 1, 1000))
    assert len(roots) == 1 and roots[0][1]
    assert roots[0][0] == pytest.approx(0.3, abs=1e-6)
    # two roots inside one grid cell, no sign change on the grid
    pair = bracketed_roots(lambda x: (x - 0.5001) * (x - 0.5003), small_cfg(-1, 1, 101))
    np.testing.assert_allclose(pair, [0.5001, 0.5003], atol=1e-12)


def test_bracketed_roots_non_vectorised_residual():
    roots = bracketed_roots(lambda x: math.sin(x), small_cfg(-4, 4))
    np.testing.assert_allclose(roots, [-math.pi, 0, math.pi], atol=1e-12)


def test_stability_tag():
    assert stability_tag(0.5) == "stable"
    assert stability_tag(-1.5) == "unstable"
    assert stability_tag(1.0 + 1e-12) == "marginal"


# ---- phi, psi ----

def test_phi_examples():
    p = BranchPattern(2, 2, 2, 2)
    params = ModelParams(3.0, 4)
    assert phi_of(0.7, p, params) == pytest.approx(0.7)
    q = BranchPattern(1, 2, 3, 0)
    assert phi_of(1.1, q, ModelParams(1.0, 3)) == pytest.approx(0.0)
    with pytest.raises(ContractError):
        phi_of(0.1, BranchPattern(2, 0, 1, 1), ModelParams(2.0, 2))


def test_psi_degenerate_and_bounded(rng):
    p = BranchPattern(1, 2, 2, 1)
    assert psi_of(2.3, p, ModelParams(1.0, 3)) == 0.0
    assert psi_derivative(2.3, p, ModelParams(1.0, 3)) == 0.0
    for t in (0.05, 0.4, 2.0, 15.0):
        params = ModelParams(t, 3)
        lo, hi = kernel_bounds(t)
        h = rng.uniform(-200, 200, 10**4)
        assert np.max(np.abs(psi_of(h, p, params))) <= 3 * max(abs(lo), abs(hi)) + 1e-9


@settings(max_examples=200, deadline=None)
@given(
    a=st.integers(0, 4), b=st.integers(1, 4), c=st.integers(0, 4),
    theta=st.floats(0.1, 8.0), h=st.floats(-8, 8),
)
def test_psi_derivative_matches_difference(a, b, c, theta, h):
    k = a + b
    if c > k:
        c = k
    p = BranchPattern(a, b, c, k - c)
    params = ModelParams(theta, k)
    step = 1e-6
    fd = (psi_of(h + step, p, params) - psi_of(h - step, p, params)) / (2 * step)
    assert psi_derivative(h, p, params) == pytest.approx(fd, rel=1e-6, abs=1e-8)


# ---- g ----

def test_g_examples():
    assert g_of(0.0, 3.0, 4) == pytest.approx(3.0**-4)
    assert g_of(1e9, 3.0, 4) == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_array_equal(g_of(np.array([0.0, 1.0, 5.0]), 1.0, 3), 1.0)
    np.testing.assert_array_equal(g_derivative(np.array([0.0, 1.0, 5.0]), 1.0, 3), 0.0)
    with pytest.raises(DomainError):
        g_of(-1.0, 2.0, 2)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(0.01, 50), zeta=st.floats(1.0, 100), d=st.integers(2, 20))
def test_g_derivative_matches_difference(x, zeta, d):
    step = 1e-6 * max(1.0, x)
    fd = (g_of(x + step, zeta, d) - g_of(x - step, zeta, d)) / (2 * step)
    assert g_derivative(x, zeta, d) == pytest.approx(fd, rel=1e-6, abs=1e-12)


def test_tangency_roots_are_quadratic_roots():
    from sostree import quadratic_roots

    for d, t in ((2, 0.1), (4, 0.2), (9, 0.4)):
        z = zeta_of(t)
        x1, x2 = quadratic_roots(z, d)
        # scan in log x to resolve both roots
        roots = dense_roots(
            lambda u: np.exp(u) * g_derivative(np.exp(u), z, d) - g_of(np.exp(u), z, d), -10, 12, 200_001
        )
        np.testing.assert_allclose(np.exp(roots), [x1, x2], rtol=1e-8)


# ---- translation-invariant ----

def test_ti_examples():
    rep = solve_ti(ModelParams(1.0, 3))
    assert rep.roots == [0.0] or (len(rep.roots) == 1 and abs(rep.roots[0]) < 1e-13)
    for t in (1.5, 4.0, 30.0):
        assert len(solve_ti(ModelParams(t, 5))) == 1


def test_ti_three_roots_dense_oracle():
    params = ModelParams(0.1, 2)
    rep = solve_ti(params)
    oracle = oracle_ti_roots(0.1, 2)
    assert len(rep.roots) == len(oracle) == 3
    np.testing.assert_allclose(rep.roots, oracle, atol=1e-10)
    assert rep.stability[1] == "unstable"
    assert 2 * kernel_f_derivative(rep.roots[1], 0.1) > 1


# ---- periodic ----

@pytest.mark.parametrize("theta,k", [(0.1, 2), (0.3, 4), (0.05, 3)])
def test_periodic_below_one_is_translation_invariant(theta, k):
    rep = solve_periodic(ModelParams(theta, k))
    assert all(abs(r.h2 - r.l2) < 1e-9 for r in rep.roots)
    assert all(tag == "translation-invariant" for tag in rep.tags)


def test_periodic_degenerate():
    rep = solve_periodic(ModelParams(1.0, 4))
    assert len(rep) == 1 and rep.roots[0].h2 == pytest.approx(0, abs=1e-13)


def test_periodic_condition_gives_three_roots():
    rep = solve_periodic(ModelParams(1.07, 200))
    assert rep.info["g_prime_below_minus_one"]
    assert len(rep) >= 3
    assert rep.tags.count("periodic") == 2
    assert max(rep.residuals) < 1e-10
    # the periodic pair swaps roles
    per = [r for r, tag in zip(rep.roots, rep.tags) if tag == "periodic"]
    assert per[0].h2 == pytest.approx(per[1].l2, abs=1e-9)


def test_periodic_condition_fails_at_moderate_k():
    rep = solve_periodic(ModelParams(3.0, 5))
    assert not rep.info["g_prime_below_minus_one"]
    assert len(rep) == 1


# ---- b != 0 ----

def test_b_nonzero_degenerate():
    rep = solve_b_nonzero(BranchPattern(1, 2, 2, 1), ModelParams(1.0, 3))
    assert len(rep) == 1
    assert rep.roots[0].h2 == pytest.approx(0, abs=1e-13) and rep.roots[0].l2 == pytest.approx(0, abs=1e-13)


def test_b_nonzero_contract():
    with pytest.raises(ContractError):
        solve_b_nonzero(BranchPattern(2, 0, 0, 2), ModelParams(0.5, 2))
    with pytest.raises(ContractError):
        solve_b_nonzero(BranchPattern(1, 1, 1, 1), ModelParams(0.5, 3))


def test_b_nonzero_witness_three_roots():
    p, params = BranchPattern(1, 1, 1, 1), ModelParams(0.1, 2)
    rep = solve_b_nonzero(p, params)
    assert "unstable" in rep.stability
    assert len(rep) >= 3
    assert max(rep.residuals) < 1e-10


@pytest.mark.parametrize("pattern", ["2,1,2,1", "1,3,1,3", "2,2,2,2"])
@pytest.mark.parametrize("theta", [0.08, 0.5, 2.0])
def test_symmetric_pattern_matches_ti(pattern, theta):
    p = BranchPattern.parse(pattern)
    params = ModelParams(theta, p.k)
    rep = solve_b_nonzero(p, params)
    ti = solve_ti(params)
    np.testing.assert_allclose([r.h2 for r in rep.roots], ti.roots, atol=1e-10)
    assert all(abs(r.h2 - r.l2) < 1e-10 for r in rep.roots)
    for r, slope in zip(rep.roots, rep.derivatives):
        assert slope == pytest.approx(p.k * kernel_f_derivative(r.h2, theta), rel=1e-9, abs=1e-12)


def test_fixed_point_chain_to_operator_W():
    for pat, t in (("1,1,1,1", 0.1), ("2,1,0,3", 0.05), ("0,3,2,1", 4.0), ("1,2,3,0", 0.3)):
        p = BranchPattern.parse(pat)
        params = ModelParams(t, p.k)
        rep = solve_b_nonzero(p, params)
        for r in rep.roots:
            assert system_residual(r, p, params) < 1e-10
            v = r.lift()
            w = operator_W(v, p, params)
            assert np.max(np.abs(w.as_array() - v.as_array())) < 1e-10


# ---- b = 0 ----

def test_b_zero_degenerate():
    rep = solve_b_zero(ModelParams(1.0, 3), 1)
    assert len(rep) == 1
    assert rep.info["h_star"] == pytest.approx(0, abs=1e-13)
    assert rep.roots[0].l2 == pytest.approx(0, abs=1e-13)


def test_b_zero_c_zero_is_d_fold_equation():
    params = ModelParams(0.1, 3)
    rep = solve_b_zero(params, 0)
    oracle = dense_roots(lambda l: l - 3 * naive_f(l, 0.1), -20, 20)
    np.testing.assert_allclose([r.l2 for r in rep.roots], oracle, atol=1e-10)


def test_b_zero_contract():
    with pytest.raises(ContractError):
        solve_b_zero(ModelParams(0.3, 3), 4)
    with pytest.raises(ContractError):
        solve_b_zero(ModelParams(0.1, 2), 1, h_star_index=5)


@pytest.mark.parametrize(
    "theta,k,c", [(0.2, 3, 1), (0.1, 5, 2), (0.05, 7, 3), (0.3, 9, 1), (0.6, 12, 4), (0.02, 4, 2)]
)
def test_b_zero_counts_match_dense_scan(theta, k, c):
    params = ModelParams(theta, k)
    rep = solve_b_zero(params, c)
    assert rep.info["h_star"] == pytest.approx(oracle_h_star(theta, k), abs=1e-8)
    assert len(rep) == oracle_count_eq9(theta, c, k, rep.info["h_star"]) == rep.info["transformed_count"]
    assert max(rep.residuals) < 1e-10
    assert rep.info["n_positive_l2"] == sum(1 for r in rep.roots if r.l2 > 0)


def test_h_star_choice():
    assert choose_h_star([1.0, 2.0, 3.0]) == 2.0
    assert choose_h_star([1.0, 2.0]) == 1.0
    assert choose_h_star([1.0, 2.0, 3.0], -1) == 3.0
    with pytest.raises(ScanWindowError):
        choose_h_star([])


def test_reduced_system_b_zero_enumerates_all_h_star():
    p, params = BranchPattern(2, 0, 0, 2), ModelParams(0.1, 2)
    rep = solve_reduced_system(p, params)
    # three h* choices times three l2 roots of the same equation
    assert len(rep) == 9
    assert max(rep.residuals) < 1e-10


# ---- pattern (c+2, b, c, b+2) ----

def test_nonTI_23_contract():
    with pytest.raises(ContractError):
        solve_nonTI_23(BranchPattern(1, 1, 1, 1), ModelParams(0.2, 2))


def test_nonTI_23_degenerate():
    rep = solve_nonTI_23(BranchPattern(3, 1, 1, 3), ModelParams(1.0, 4))
    assert len(rep) == 1 and rep.tags == ["known-subcase"]


def test_nonTI_23_new_solutions():
    p, params = BranchPattern(3, 1, 1, 3), ModelParams(0.05, 4)
    rep = solve_nonTI_23(p, params)
    assert max(rep.residuals) < 1e-10
    for r, tag in zip(rep.roots, rep.tags):
        sub = abs(r.h2 - 2 * kernel_f(r.h2, 0.05)) < 1e-9 and abs(r.l2 - 2 * kernel_f(r.l2, 0.05)) < 1e-9
        assert (tag == "known-subcase") == sub
    assert "new" in rep.tags
