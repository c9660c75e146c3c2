"""Morawetz weight, action and the two forms of its time derivative.

For a radial weight ``a`` the action is ``M_a(t) = 2 Im ∫ ū ∇u·∇a``.  Along the
flow ``i u_t + Δu = -F(u)`` with ``F(u) = W u``, ``W = V w_b |u|^{p-2}``,

    dM_a/dt = -∫ΔΔa |u|^2 + 4∫a_jk Re(∂_j ū ∂_k u) + 2∫∇a·{G, u}_P,

where ``G = -F(u)`` and ``{f, g}_P = Re(f̄∇g - ḡ∇f)``.  Because ``G`` is a real
multiple of ``u``, ``{G, u}_P = |u|^2 ∇W``, and expanding ``∇W`` gives

    2∫∇a·{G,u}_P = -(2 - 4/p)∫Δa Vρ + (4b/p)∫(∇a·x/(|x|^2+ε^2)) Vρ
                   - (2K(N-α)/p) ∬ (∇a(x)-∇a(y))·(x-y) |x-y|^{α-N-2} ρ(x)ρ(y),

with ``ρ = w_b |u|^p`` and ``V = I_α * ρ``.  The derivative of the regularized
weight is ``∇w_b = b x w_b / (|x|^2 + ε^2)``.  The bi-Laplacian term is always
moved onto ``|u|^2`` by parts, ``-∫Δa Δ|u|^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from scipy import special

from . import operators as ops
from .grid import SpatialGrid
from .model import riesz_constant
from .nonlinearity import Choquard

INNER, BRIDGE, OUTER = 0, 1, 2


def weight_profile(r, R: float) -> tuple[np.ndarray, np.ndarray]:
    """(a'(r), a''(r)) for the three-piece radial weight with cutoff radius R."""
    r = np.asarray(r, dtype=float)
    s = np.clip(r - R, 0.0, R)
    a1 = np.where(r <= R, 2 * r, np.where(r <= 2 * R, 2 * R + 2 * s - s**2 / R, 3 * R))
    a2 = np.where(r <= R, 2.0, np.where(r <= 2 * R, 2 * (1 - s / R), 0.0))
    return a1, a2


@dataclass
class MorawetzWeight:
    """Derivatives of the weight on a grid.

    The Hessian is kept in the form ``a_jk = c1 x_j x_k + c0 δ_jk`` with
    ``c0 = a'/r`` and ``c1 = (a'' - a'/r)/r^2``; its eigenvalues are ``a''``
    (radial) and ``a'/r`` (tangential).
    """

    R: float
    grid: SpatialGrid
    eps: float
    r: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    laplacian: np.ndarray
    region: np.ndarray

    @property
    def gradient(self) -> list[np.ndarray]:
        return [self.c0 * x for x in self.grid.coords()]

    def hessian(self, j: int, k: int) -> np.ndarray:
        x = self.grid.coords()
        return self.c1 * x[j] * x[k] + (self.c0 if j == k else 0.0)

    def min_hessian_eigenvalue(self) -> float:
        return float(min(self.a2.min(), self.c0.min()))


def build_weight(R: float, grid: SpatialGrid, eps: float | None = None, pure_virial: bool = False) -> MorawetzWeight:
    """Weight fields for cutoff radius R; ``pure_virial`` gives a = |x|^2 everywhere (test weight)."""
    if not R > 0:
        raise ValueError(f"weight radius must be positive, got {R!r}")
    if not pure_virial and not 2 * R < 0.45 * grid.box_length:
        raise ValueError(f"2R = {2 * R} does not fit the box: need 2R < 0.45 L = {0.45 * grid.box_length}")
    eps = grid.default_eps if eps is None else eps
    r = np.sqrt(grid.r_squared + eps**2)
    if pure_virial:
        a1, a2 = 2 * r, np.full_like(r, 2.0)
        region = np.zeros(r.shape, dtype=np.int8)
    else:
        a1, a2 = weight_profile(r, R)
        region = np.where(r <= R, INNER, np.where(r <= 2 * R, BRIDGE, OUTER)).astype(np.int8)
    c0 = a1 / r
    c1 = (a2 - c0) / r**2
    lap = a2 + (grid.dim - 1) * c0
    return MorawetzWeight(R, grid, eps, r, a1, a2, c0, c1, lap, region)


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        g = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1 - s, 1.0)), 0.0)
    return f / (f + g)


def cutoff(R: float, grid: SpatialGrid) -> np.ndarray:
    """Radial χ_R: 1 on |x| <= R/2, 0 on |x| >= R."""
    r = np.sqrt(grid.r_squared)
    return smooth_step(2.0 - 2.0 * r / R)


def morawetz_action(grid: SpatialGrid, u: np.ndarray, weight: MorawetzWeight) -> float:
    gu = ops.gradient(grid, u)
    integrand = sum(ga * g for ga, g in zip(weight.gradient, gu))
    return float(2 * grid.integrate(np.conj(u) * integrand).imag)


def _hessian_term(grid, u, weight):
    gu = ops.gradient(grid, u)
    radial = sum(x * g for x, g in zip(grid.coords(), gu))
    dens = weight.c0 * sum(np.abs(g) ** 2 for g in gu) + weight.c1 * np.abs(radial) ** 2
    return 4 * float(grid.integrate(dens).real)


def _bilaplacian_term(grid, u, weight):
    return -float(grid.integrate(weight.laplacian * ops.laplacian(grid, np.abs(u) ** 2)).real)


def rhs_direct(ctx: Choquard, u: np.ndarray, weight: MorawetzWeight) -> float:
    """dM_a/dt from the bracket form, with the nonlinear flux differentiated spectrally."""
    g = ctx.grid
    G = -ctx.apply_F(u)
    gu = ops.gradient(g, u)
    gG = ops.gradient(g, G)
    flux = sum(ga * (np.conj(G) * du - np.conj(u) * dG).real
               for ga, du, dG in zip(weight.gradient, gu, gG))
    return _bilaplacian_term(g, u, weight) + _hessian_term(g, u, weight) + 2 * float(g.integrate(flux))


@dataclass
class ExpandedTerms:
    bilaplacian: float
    hessian: float
    laplacian_potential: float
    weight_derivative: float
    double_integral: float

    @property
    def total(self) -> float:
        return (self.bilaplacian + self.hessian + self.laplacian_potential
                + self.weight_derivative + self.double_integral)


def lattice_zeta(s: float, dim: int = 3, cutoff: int = 6) -> float:
    """Epstein zeta Σ_{n∈Z^N, n≠0} |n|^{-s}, analytically continued to 0 < s < N.

    Theta-function splitting at t = 1:
    π^{-s/2}Γ(s/2) Z(s) = Σ_{n≠0} [E_{s/2}(π|n|^2) + E_{(N-s)/2}(π|n|^2)] + 2/(s-N) - 2/s,
    with E_a(x) = Γ(a, x) x^{-a}.
    """
    if not 0 < s < dim:
        raise ValueError(f"need 0 < s < N, got s={s!r}")
    m = np.arange(-cutoff, cutoff + 1)
    n2 = sum(np.meshgrid(*([m**2] * dim), indexing="ij")).ravel().astype(float)
    n2 = n2[n2 > 0]
    x = np.pi * n2

    def E(a):
        return special.gammaincc(a, x) * special.gamma(a) * x ** (-a)

    total = float(np.sum(E(s / 2) + E((dim - s) / 2))) + 2 / (s - dim) - 2 / s
    return total * np.pi ** (s / 2) / special.gamma(s / 2)


def _self_correction(grid, rho, weight, alpha):
    # corrected trapezoid rule for the |z|^{α-N} diagonal singularity: near y = x the
    # summand is (z·H z/|z|^2)|z|^{α-N}ρ(y), and by cubic symmetry of the lattice the
    # missing self-cell contribution is -Z(N-α) h^α (Δa/N) ρ(x)
    N, h = grid.dim, grid.spacing
    z = lattice_zeta(N - alpha, N)
    return -z * h**alpha * float(np.sum(rho**2 * weight.laplacian / N)) * grid.cell_volume


def pairwise_double_sum(grid: SpatialGrid, rho: np.ndarray, weight: MorawetzWeight, alpha: float,
                        delta: float | None = None, budget: float = 2e8, chunk: int = 512) -> float:
    """K ∬ (∇a(x)-∇a(y))·(x-y) |x-y|^{α-N-2} ρ(x)ρ(y), by direct summation over grid pairs.

    With ``delta=None`` the exact kernel is summed off the diagonal and the
    diagonal is replaced by the lattice self-correction (error O(h^{α+2}) for
    smooth ρ).  A positive ``delta`` instead sums the regularized kernel
    ``(|x-y|^2 + δ^2)^{-(N-α+2)/2}`` over all pairs with no correction.
    """
    n = rho.size
    if float(n) * n > budget:
        raise ValueError(f"pairwise sum needs {n}^2 = {float(n) ** 2:.3g} pairs, budget is {budget:.3g}")
    N = grid.dim
    expo = -(N - alpha + 2) / 2
    X = np.stack([np.broadcast_to(x, grid.shape).ravel() for x in grid.coords()], axis=1)
    Ga = np.stack([np.broadcast_to(c, grid.shape).ravel() for c in weight.gradient], axis=1)
    rv = np.asarray(rho, dtype=float).ravel()
    d2 = 0.0 if delta is None else delta**2
    total = 0.0
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        dx = X[s:e, None, :] - X[None, :, :]
        dg = Ga[s:e, None, :] - Ga[None, :, :]
        num = np.einsum("ijk,ijk->ij", dg, dx)
        r2 = np.einsum("ijk,ijk->ij", dx, dx) + d2
        with np.errstate(divide="ignore"):
            ker = np.where(r2 > 0, r2, 1.0) ** expo
        ker[r2 == 0] = 0.0
        total += float(rv[s:e] @ (num * ker) @ rv)
    total *= grid.cell_volume**2
    if delta is None:
        total += _self_correction(grid, np.asarray(rho, dtype=float), weight, alpha)
    return riesz_constant(N, alpha) * total


def fft_double_sum(grid: SpatialGrid, rho: np.ndarray, weight: MorawetzWeight, alpha: float,
                   delta: float | None = None) -> float:
    """Same discrete double sum through a zero-padded (aperiodic) FFT convolution.

    By symmetry the sum equals ``2K Σ_x ρ(x) ∇a(x)·[(z k(z)) * ρ](x)``.
    """
    N, M, h = grid.dim, grid.points, grid.spacing
    expo = -(N - alpha + 2) / 2
    idx = np.arange(2 * M)
    idx = np.where(idx < M, idx, idx - 2 * M) * h  # signed lags on the padded circle
    zs = [idx.reshape([-1 if j == a else 1 for a in range(N)]) for j in range(N)]
    z2 = sum(z**2 for z in zs) + (0.0 if delta is None else delta**2)
    with np.errstate(divide="ignore"):
        ker = np.where(z2 > 0, z2, 1.0) ** expo
    ker[z2 == 0] = 0.0
    shape = (2 * M,) * N
    crop = (slice(0, M),) * N
    rho = np.asarray(rho, dtype=float)
    rho_hat = sfft.rfftn(rho, s=shape)
    acc = 0.0
    for ga, z in zip(weight.gradient, zs):
        conv = sfft.irfftn(sfft.rfftn(z * ker) * rho_hat, s=shape)[crop]
        acc += float(np.sum(rho * np.broadcast_to(ga, grid.shape) * conv))
    total = 2 * acc * grid.cell_volume**2
    if delta is None:
        total += _self_correction(grid, rho, weight, alpha)
    return riesz_constant(N, alpha) * total


def rhs_expanded_terms(ctx: Choquard, u: np.ndarray, weight: MorawetzWeight, pairwise_budget: float = 2e8,
                       double: str = "pairwise") -> ExpandedTerms:
    g, prm = ctx.grid, ctx.params
    p, N, alpha, b = prm.p, prm.dim, prm.alpha, prm.b
    rho = ctx.density(u)
    Vrho = ctx.potential_of(rho) * rho
    radial = sum(ga * x for ga, x in zip(weight.gradient, g.coords())) / (g.r_squared + ctx.eps**2)
    if double == "pairwise":
        D = pairwise_double_sum(g, rho, weight, alpha, budget=pairwise_budget)
    elif double == "fft":
        D = fft_double_sum(g, rho, weight, alpha)
    else:
        raise ValueError(f"double must be 'pairwise' or 'fft', got {double!r}")
    return ExpandedTerms(
        bilaplacian=_bilaplacian_term(g, u, weight),
        hessian=_hessian_term(g, u, weight),
        laplacian_potential=-(2 - 4 / p) * float(g.integrate(weight.laplacian * Vrho)),
        weight_derivative=(4 * b / p) * float(g.integrate(radial * Vrho)),
        double_integral=-(2 * (N - alpha) / p) * D,
    )


def rhs_expanded(ctx: Choquard, u: np.ndarray, weight: MorawetzWeight, pairwise_budget: float = 2e8) -> float:
    """dM_a/dt from the expanded nonlocal form, double integral summed pairwise."""
    return rhs_expanded_terms(ctx, u, weight, pairwise_budget).total


def localization_check(grid: SpatialGrid, u: np.ndarray, R: float) -> float:
    """Relative residual of ∫χ²|∇u|² = ∫|∇(χu)|² + ∫χΔχ|u|²."""
    chi = cutoff(R, grid)
    lhs = grid.integrate(chi**2 * sum(np.abs(d) ** 2 for d in ops.gradient(grid, u))).real
    rhs = ops.kinetic(grid, chi * u) + grid.integrate(chi * ops.laplacian(grid, chi) * np.abs(u) ** 2).real
    return float(abs(lhs - rhs) / ops.kinetic(grid, u))


def virial_coercivity(ctx: Choquard, u: np.ndarray, chi: np.ndarray) -> float:
    """[∫|∇(χu)|² - (B/2p)P(χu)] / ∫|∇(χu)|²; 1 by convention when χu = 0."""
    v = chi * u
    kin = ops.kinetic(ctx.grid, v)
    if kin == 0:
        return 1.0
    return float((kin - ctx.exps.B / (2 * ctx.p) * ctx.potential_functional(v)) / kin)


def ball_integral(grid: SpatialGrid, u: np.ndarray, R: float, q: float) -> float:
    """∫_{|x|<R} |u|^q."""
    return float(grid.integrate(np.where(grid.r_squared < R * R, np.abs(u) ** q, 0.0)).real)


def spacetime_average(times, ball_values, windows: int = 4) -> list[tuple[float, float, float]]:
    """Averages of the recorded ``∫_{|x|<R}|u|^q`` over dyadic windows ``[T_k/2, T_k]``.

    ``T_k = T / 2^k`` for k = windows-1..0, returned in increasing time order as
    (start, end, average) triples; trapezoid rule on the recorded samples.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(ball_values, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two recorded times")
    T = t[-1]
    out = []
    for k in range(windows - 1, -1, -1):
        hi = T / 2**k
        lo = hi / 2
        grid_t = np.union1d(t[(t > lo) & (t < hi)], [lo, hi])
        vals = np.interp(grid_t, t, v)
        out.append((lo, hi, float(np.trapezoid(vals, grid_t) / (hi - lo))))
    return out


def pure_virial_reference(ctx: Choquard, u: np.ndarray) -> float:
    """2∫Vρ: the continuum value of the bare double sum for a = |x|^2."""
    rho = ctx.density(u)
    return 2 * float(ctx.grid.integrate(ctx.potential_of(rho) * rho))


__all__ = [
    "MorawetzWeight", "ExpandedTerms", "build_weight", "weight_profile", "cutoff", "smooth_step",
    "morawetz_action", "rhs_direct", "rhs_expanded", "rhs_expanded_terms", "pairwise_double_sum",
    "fft_double_sum", "lattice_zeta", "localization_check", "virial_coercivity", "ball_integral", "spacetime_average",
    "pure_virial_reference",
]
