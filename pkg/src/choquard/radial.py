"""Radial discretization in three dimensions.

Radial profiles f(r) live on the interior nodes ``r_j = j Δ``, ``j = 1..n-1``,
of ``[0, R]`` with ``f(R) = 0``.  Writing ``g = r f`` turns the 3D Laplacian
into ``g''``, so the sine transform (DST-I of ``g``) diagonalizes it with
symbols ``k_m^2``, ``k_m = π m / R``.  The inhomogeneous weight is evaluated
exactly at the nodes; none of them sits at the origin, so no regularization
is needed (``eps = 0``).

The Riesz potential of a radial density uses the one-dimensional reduction

    r V(r) = C ∫_R |r - s|^{α-1} σ(s) ds,   σ(s) = s ρ(|s|)  (odd extension),

with ``C = -2πK/(α-1)`` (for α = 1 the kernel is ``-2πK log|r - s|``),
discretized by product integration against piecewise-linear interpolants of
σ.  That gives a Toeplitz matrix applied by FFT convolution.

The grid exposes the same interface the Petviashvili solver and the
functionals use on :class:`~choquard.grid.SpatialGrid`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft
from scipy import signal

from .model import riesz_constant


@dataclass(frozen=True)
class RadialGrid:
    box_length: float  # outer radius R
    points: int  # number of intervals n

    dim = 3
    default_eps = 0.0

    def __post_init__(self):
        if not self.box_length > 0:
            raise ValueError("outer radius must be positive")
        if self.points < 4:
            raise ValueError("need at least 4 radial intervals")

    @property
    def spacing(self) -> float:
        return self.box_length / self.points

    @property
    def shape(self) -> tuple[int]:
        return (self.points - 1,)

    @cached_property
    def r(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.points)

    @cached_property
    def r_squared(self) -> np.ndarray:
        return self.r**2

    def radius(self) -> np.ndarray:
        return self.r

    def coords(self) -> list[np.ndarray]:
        return [self.r]

    @cached_property
    def k_squared(self) -> np.ndarray:
        return (np.pi * np.arange(1, self.points) / self.box_length) ** 2

    def weight_field(self, b: float, eps: float | None = None) -> np.ndarray:
        eps = 0.0 if eps is None else eps
        return (self.r_squared + eps**2) ** (b / 2)

    def check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise ValueError(f"profile shape {f.shape} does not match radial grid {self.shape}")
        return f

    def fft(self, f: np.ndarray) -> np.ndarray:
        g = self.r * self.check(f)
        if np.iscomplexobj(g):
            return sfft.dst(g.real, type=1, norm="ortho") + 1j * sfft.dst(g.imag, type=1, norm="ortho")
        return sfft.dst(g, type=1, norm="ortho")

    def ifft(self, coeffs: np.ndarray) -> np.ndarray:
        c = self.check(coeffs)
        if np.iscomplexobj(c):
            g = sfft.idst(c.real, type=1, norm="ortho") + 1j * sfft.idst(c.imag, type=1, norm="ortho")
        else:
            g = sfft.idst(c, type=1, norm="ortho")
        return g / self.r

    def integrate(self, f: np.ndarray):
        """∫_{R^3} f = 4π Σ r_j^2 f_j Δ (trapezoid; the endpoints contribute nothing)."""
        return 4 * np.pi * self.spacing * np.sum(self.r_squared * self.check(f))

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        return self.integrate(np.conj(f) * g)

    def l2_norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.integrate(np.abs(f) ** 2).real))

    def spectral_sq(self, coeffs: np.ndarray, weight=None) -> float:
        a = np.abs(coeffs) ** 2
        total = np.sum(a) if weight is None else np.sum(weight * a)
        return float(4 * np.pi * self.spacing * total)

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.box_length, self.points * factor)

    def riesz(self, rho: np.ndarray, alpha: float) -> np.ndarray:
        """Riesz potential ``I_α * ρ`` of a radial density in R^3, sampled at the nodes."""
        if not 0 < alpha < 3:
            raise ValueError(f"Riesz order must satisfy 0 < alpha < 3, got {alpha!r}")
        rho = self.check(rho)
        if np.iscomplexobj(rho):
            return self.riesz(rho.real, alpha) + 1j * self.riesz(rho.imag, alpha)
        n = self.points
        sigma = self.r * rho
        odd = np.concatenate([-sigma[::-1], [0.0], sigma])  # s = jΔ, j = -(n-1)..(n-1)
        w = _toeplitz_weights(n, self.spacing, float(alpha))  # d = -(2n-2)..(2n-2)
        conv = signal.fftconvolve(w, odd)
        # conv[a + b] pairs d = a-(2n-2) with j = b-(n-1), so node i sits at i + 3n - 3
        rV = conv[3 * n - 2: 4 * n - 3]
        return rV / self.r


def _antiderivative2(t: np.ndarray, alpha: float) -> np.ndarray:
    """Second antiderivative Φ of the kernel φ with Φ(0) = 0, including the constant C."""
    a = np.abs(t)
    K = riesz_constant(3, alpha)
    if alpha == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            phi2 = np.where(a > 0, 0.5 * t**2 * np.log(np.where(a > 0, a, 1.0)) - 0.75 * t**2, 0.0)
        return -2 * math.pi * K * phi2
    return -2 * math.pi * K / (alpha - 1) * a ** (alpha + 1) / (alpha * (alpha + 1))


@lru_cache(maxsize=8)
def _toeplitz_weights(n: int, h: float, alpha: float) -> np.ndarray:
    # ∫ φ(dh - s) hat_0(s) ds = [Φ((d+1)h) - 2Φ(dh) + Φ((d-1)h)] / h
    d = np.arange(-(2 * n - 2), 2 * n - 1, dtype=float)
    return (_antiderivative2((d + 1) * h, alpha) - 2 * _antiderivative2(d * h, alpha)
            + _antiderivative2((d - 1) * h, alpha)) / h


def embed(grid, radial: RadialGrid, profile: np.ndarray) -> np.ndarray:
    """Sample a radial profile onto a Cartesian grid by cubic interpolation in r."""
    from scipy.interpolate import CubicSpline

    r = np.concatenate([[0.0], radial.r, [radial.box_length]])
    # even extension at r = 0 through the symmetric node
    f0 = profile[0] + (profile[0] - profile[1]) / 3.0  # f(0) from f(Δ), f(2Δ) with f'(0)=0
    f = np.concatenate([[f0], profile, [0.0]])
    spline = CubicSpline(r, f, bc_type=((1, 0.0), "natural"))
    rr = np.sqrt(grid.r_squared)
    out = np.where(rr < radial.box_length, spline(np.minimum(rr, radial.box_length)), 0.0)
    return out
