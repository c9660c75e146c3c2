import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from choquard import operators as ops
from choquard.grid import SpatialGrid


@pytest.fixture(scope="module")
def g():
    return SpatialGrid(3, 2 * np.pi, 16)


def test_periodic_riesz_of_plane_wave(g):
    x, y, z = np.broadcast_arrays(*g.coords())
    f = np.cos(2 * x + y)
    V = ops.riesz_convolve(g, f, 1.3, "periodic")
    assert np.allclose(V, 5 ** (-1.3 / 2) * f, atol=1e-13)


def test_periodic_riesz_semigroup(g, rng):
    f = rng.standard_normal(g.shape)
    f -= f.mean()
    lhs = ops.riesz_convolve(g, ops.riesz_convolve(g, f, 0.7, "periodic"), 1.1, "periodic")
    rhs = ops.riesz_convolve(g, f, 1.8, "periodic")
    assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("boundary", ["periodic", "free"])
@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_riesz_symmetric_and_positive(boundary, alpha):
    g = SpatialGrid(3, 10.0, 16)
    r2 = g.r_squared
    f = np.exp(-r2)
    h = np.exp(-((g.coords()[0] - 1) ** 2 + g.coords()[1] ** 2 + g.coords()[2] ** 2))
    fIh = g.integrate(f * ops.riesz_convolve(g, h, alpha, boundary))
    hIf = g.integrate(h * ops.riesz_convolve(g, f, alpha, boundary))
    assert fIh == pytest.approx(hIf, rel=1e-12)
    assert g.integrate(f * ops.riesz_convolve(g, f, alpha, boundary)) > 0


def test_free_riesz_matches_erf_oracle():
    g = SpatialGrid(3, 16.0, 48)
    r = np.sqrt(g.r_squared)
    rho = np.exp(-g.r_squared / 2) / (2 * np.pi) ** 1.5
    V = ops.riesz_convolve(g, rho, 2.0, "free")
    sel = (r >= g.spacing) & (r <= 4.0)
    exact = erf(r[sel] / math.sqrt(2)) / (4 * np.pi * r[sel])
    assert np.max(np.abs(V[sel] - exact) / exact) < 1e-4


def test_riesz_rejects_bad_order(g):
    with pytest.raises(ValueError):
        ops.riesz_convolve(g, np.zeros(g.shape), 3.0)
    with pytest.raises(ValueError):
        ops.riesz_convolve(g, np.zeros(g.shape), 1.0, "dirichlet")


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_free_propagator_group_and_unitary(s, t):
    g = SpatialGrid(3, 8.0, 8)
    u = np.exp(-g.r_squared + 1j * g.coords()[0])
    a = ops.free_propagate(g, ops.free_propagate(g, u, s), t)
    b = ops.free_propagate(g, u, s + t)
    assert np.allclose(a, b, atol=1e-12)
    assert g.l2_norm(a) == pytest.approx(g.l2_norm(u), rel=1e-13)


def test_laplacian_and_seminorms(g, rng):
    x, y, z = np.broadcast_arrays(*g.coords())
    f = np.sin(3 * x) * np.cos(z)
    assert np.allclose(ops.laplacian(g, f), -10 * f, atol=1e-12)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    assert ops.sobolev_seminorm(g, u, 1.0) ** 2 == pytest.approx(ops.kinetic(g, u), rel=1e-12)
    assert ops.h1_norm(g, u) ** 2 == pytest.approx(g.l2_norm(u) ** 2 + ops.kinetic(g, u), rel=1e-12)
    grad = ops.gradient(g, u)
    assert sum(g.l2_norm(c) ** 2 for c in grad) == pytest.approx(ops.kinetic(g, u), rel=1e-10)
