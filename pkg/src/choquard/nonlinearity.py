"""Choquard nonlinearity, potential functional and conserved quantities."""
from __future__ import annotations

import numpy as np

from . import operators as ops
from .grid import SpatialGrid
from .model import DerivedExponents, ModelParams, derive_exponents


class Choquard:
    """Nonlinearity context for one parameter set on one grid.

    ``F(u) = V · w_b · |u|^{p-2} u`` with ``ρ = w_b |u|^p`` and ``V = I_α * ρ``,
    where ``w_b = (|x|^2 + eps^2)^{b/2}`` is the regularized inhomogeneous
    weight.  The equation reads ``i u_t + Δu = -F(u)``.

    ``energy_coefficient`` is the factor in front of ``P(u)`` in the energy and
    defaults to ``1/(2p)``, the value conserved by the flow.  Passing ``1/p``
    reproduces the printed formula and exists so that its non-conservation can
    be demonstrated.
    """

    def __init__(self, params: ModelParams, grid: SpatialGrid, eps: float | None = None,
                 boundary: str = "free", energy_coefficient: float | None = None,
                 filter_order: int | None = None):
        if params.dim != grid.dim:
            raise ValueError(f"params.dim={params.dim} does not match grid.dim={grid.dim}")
        self.params = params
        self.exps: DerivedExponents = derive_exponents(params)
        self.grid = grid
        self.eps = grid.default_eps if eps is None else float(eps)
        self.boundary = boundary
        self.weight = grid.weight_field(params.b, self.eps)
        p = params.p
        self.energy_coefficient = 1 / (2 * p) if energy_coefficient is None else energy_coefficient
        self.filter = None
        if filter_order:
            # isotropic exponential filter exp(-36 (|k|/k_max)^order)
            kmax = np.pi / grid.spacing
            self.filter = np.exp(-36.0 * (np.sqrt(grid.k_squared) / kmax) ** filter_order)

    @property
    def p(self) -> float:
        return self.params.p

    def density(self, u: np.ndarray) -> np.ndarray:
        return self.weight * np.abs(u) ** self.p

    def hartree_potential(self, u: np.ndarray) -> np.ndarray:
        return self.potential_of(self.density(u))

    def potential_of(self, rho: np.ndarray) -> np.ndarray:
        if hasattr(self.grid, "riesz"):
            return self.grid.riesz(rho, self.params.alpha)
        return ops.riesz_convolve(self.grid, rho, self.params.alpha, self.boundary)

    def phase_field(self, u: np.ndarray) -> np.ndarray:
        """Real W with F(u) = W u; W = V w_b |u|^{p-2}."""
        a = np.abs(u)
        V = self.potential_of(self.weight * a**self.p)
        return V * self.weight * a ** (self.p - 2)

    def apply_F(self, u: np.ndarray) -> np.ndarray:
        return self.phase_field(u) * u

    def potential_functional(self, u: np.ndarray) -> float:
        rho = self.density(u)
        return float(self.grid.integrate(self.potential_of(rho) * rho))

    def mass(self, u: np.ndarray) -> float:
        return float(self.grid.integrate(np.abs(u) ** 2))

    def energy(self, u: np.ndarray, coefficient: float | None = None) -> float:
        c = self.energy_coefficient if coefficient is None else coefficient
        return 0.5 * ops.kinetic(self.grid, u) - c * self.potential_functional(u)

    def energy_paper(self, u: np.ndarray) -> float:
        """Energy with the 1/p coefficient (not conserved; kept for comparison)."""
        return self.energy(u, 1 / self.p)

    def with_energy_coefficient(self, coefficient: float) -> "Choquard":
        other = object.__new__(Choquard)
        other.__dict__.update(self.__dict__)
        other.energy_coefficient = coefficient
        return other
