import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from choquard import morawetz as mw
from choquard.grid import SpatialGrid
from choquard.harness import Lcg64, random_smooth_field
from choquard.nonlinearity import Choquard


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 50.0), st.floats(0.1, 10.0))
def test_weight_profile_convex_and_monotone(r, R):
    a1, a2 = mw.weight_profile(r, R)
    assert a2 >= 0
    assert a1 >= 0
    assert a1 <= 3 * R + 1e-12


@pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
def test_weight_profile_regions_and_continuity(R):
    a1, a2 = mw.weight_profile([0.3 * R, 3 * R], R)
    assert a1[0] == pytest.approx(0.6 * R) and a2[0] == 2.0  # a = |x|² inside
    assert a1[1] == pytest.approx(3 * R) and a2[1] == 0.0  # a' constant outside
    for r0 in (R, 2 * R):
        lo, hi = mw.weight_profile([r0 - 1e-9, r0 + 1e-9], R)
        assert lo[0] == pytest.approx(lo[1], abs=1e-7)
        assert hi[0] == pytest.approx(hi[1], abs=1e-7)


def test_weight_hessian_nonnegative_and_box_check():
    g = SpatialGrid(3, 10.0, 16)
    w = mw.build_weight(2.0, g)
    assert w.min_hessian_eigenvalue() >= 0
    assert set(np.unique(w.region)) == {mw.INNER, mw.BRIDGE, mw.OUTER}
    with pytest.raises(ValueError):
        mw.build_weight(3.0, g)


def test_smooth_step_and_cutoff():
    s = np.linspace(-0.5, 1.5, 401)
    f = mw.smooth_step(s)
    assert f[0] == 0 and f[-1] == 1
    assert np.all(np.diff(f) >= 0)
    g = SpatialGrid(3, 16.0, 32)
    chi = mw.cutoff(4.0, g)
    r = np.sqrt(g.r_squared)
    assert np.all(chi[r <= 2.0] == 1) and np.all(chi[r >= 4.0] == 0)


def test_action_of_boosted_gaussian():
    # M_a = 2 Im∫ū∇u·∇a = 2∫|u|² k·∇a for u = e^{ik·x} φ with φ real
    g = SpatialGrid(3, 16.0, 64)
    w = mw.build_weight(3.0, g)
    x = g.coords()
    phi = np.exp(-((x[0] - 1) ** 2 + x[1] ** 2 + x[2] ** 2))
    assert mw.morawetz_action(g, phi, w) == pytest.approx(0, abs=1e-12)
    u = phi * np.exp(0.5j * x[0])
    expected = 2 * g.integrate(phi**2 * 0.5 * w.gradient[0]).real
    assert mw.morawetz_action(g, u, w) == pytest.approx(expected, rel=1e-10)


def test_lattice_zeta_values():
    assert mw.lattice_zeta(1.0, 3) == pytest.approx(-2.8372974794806, rel=1e-11)
    assert mw.lattice_zeta(0.5, 1) == pytest.approx(2 * float(mpmath.zeta(0.5)), rel=1e-11)
    # continuation of Σ' |n|^{-s}; in 1D this is 2ζ(s)
    assert mw.lattice_zeta(0.6, 1) == pytest.approx(2 * float(mpmath.zeta(0.6)), rel=1e-11)
    # sums of two squares: Σ' (m² + n²)^{-s/2} = 4 ζ(s/2) β(s/2) with the Dirichlet beta function
    beta = float(mpmath.dirichlet(0.5, [0, 1, 0, -1]))
    assert mw.lattice_zeta(1.0, 2) == pytest.approx(4 * float(mpmath.zeta(0.5)) * beta, rel=1e-11)


@pytest.fixture(scope="module")
def test_field():
    g = SpatialGrid(3, 7.0, 16)
    return g, random_smooth_field(g, Lcg64(20240601))


def test_pure_virial_pairwise_matches_fft(params, test_field):
    g, u = test_field
    ctx = Choquard(params, g, boundary="free")
    w = mw.build_weight(1.4, g, pure_virial=True)
    rho = ctx.density(u)
    pair = mw.pairwise_double_sum(g, rho, w, params.alpha)
    fft = mw.fft_double_sum(g, rho, w, params.alpha)
    assert abs(pair - fft) / abs(fft) < 1e-6


def test_expanded_matches_direct(params, test_field):
    g, u = test_field
    ctx = Choquard(params, g, boundary="free")
    w = mw.build_weight(1.4, g)
    direct = mw.rhs_direct(ctx, u, w)
    expanded = mw.rhs_expanded(ctx, u, w)
    assert abs(expanded - direct) / abs(direct) < 1e-3


def test_localization_identity():
    g = SpatialGrid(3, 16.0, 64)
    u = random_smooth_field(g, Lcg64(5), spread=1.5)
    assert mw.localization_check(g, u, 8.0) < 1e-10


def test_virial_coercivity_limits(ctx, field):
    chi = mw.cutoff(4.0, ctx.grid)
    assert mw.virial_coercivity(ctx, np.zeros_like(field), chi) == 1.0
    assert mw.virial_coercivity(ctx, 1e-3 * field, chi) == pytest.approx(1.0, abs=1e-6)


def test_spacetime_average_windows():
    t = np.linspace(0, 16, 1601)
    avg = mw.spacetime_average(t, np.full_like(t, 2.5), windows=4)
    assert [(a, b) for a, b, _ in avg] == [(1.0, 2.0), (2.0, 4.0), (4.0, 8.0), (8.0, 16.0)]
    assert all(v == pytest.approx(2.5) for *_, v in avg)
    avg = mw.spacetime_average(t, 1 / (1 + t**2))
    assert avg[-1][2] < 0.1 * avg[0][2]
