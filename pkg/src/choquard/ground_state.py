"""Ground state Q, sharp Gagliardo–Nirenberg constant and scattering thresholds.

Q solves ``-ΔQ + ωQ = F(Q)`` (ω = 1 is the ground state proper) and is computed
by Petviashvili iteration

    Q_{n+1} = γ_n^s (ω - Δ)^{-1} F(Q_n),   γ_n = <(ω-Δ)Q_n, Q_n> / <F(Q_n), Q_n>,

with ``s = (2p-1)/(2p-2)``.  The stabilizing factor kills the growth of the
amplitude mode, and γ_n -> 1 at a true fixed point.

Other frequencies are rescalings, ``Q_ω(x) = ω^{γ/2} Q(√ω x)`` with
``γ = (2+2b+α)/(2(p-1))``.  The threshold quantities ``M^{1-s_c}E^{s_c}`` and
``‖Q‖^{1-s_c}‖∇Q‖^{s_c}`` do not depend on ω, so ω < 1 is a way to get a
wider profile that a coarse grid resolves.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .model import DerivedExponents
from .nonlinearity import Choquard

log = logging.getLogger(__name__)

THRESHOLD_COLUMNS = (
    "N", "alpha", "b", "p", "s_c", "A", "B", "massQ", "gradQ_sq", "energyQ",
    "C0", "ME_threshold", "K_threshold", "residual", "grid_M", "box_L", "seed_id",
)


class ConvergenceError(RuntimeError):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


@dataclass
class GroundState:
    Q: np.ndarray
    mass: float
    grad_sq: float
    potential: float
    energy: float
    C0: float
    ME_threshold: float
    K_threshold: float
    residual: float
    gamma: float
    iterations: int
    seed_id: str = "gaussian"
    frequency: float = 1.0
    trace: list = field(default_factory=list, repr=False)

    def pohozaev_ratios(self, exps: DerivedExponents, p: float) -> tuple[float, float]:
        """(‖∇Q‖² A / (ωB ‖Q‖²), P(Q) B / (2p ‖∇Q‖²)); both equal 1 for a true ground state."""
        return (
            self.grad_sq * exps.A / (self.frequency * exps.B * self.mass),
            self.potential * exps.B / (2 * p * self.grad_sq),
        )


def gaussian_seed(grid, width: float = 1.0, center=None) -> np.ndarray:
    r2 = grid.r_squared if center is None else sum(
        (x - c) ** 2 for x, c in zip(grid.coords(), center)
    )
    return np.exp(-r2 / width**2)


def equation_residual(ctx: Choquard, Q: np.ndarray, frequency: float = 1.0) -> float:
    """‖ΔQ − ωQ + F(Q)‖_{L²} / ‖Q‖_{H¹}."""
    g = ctx.grid
    res = ops.laplacian(g, Q) - frequency * Q + ctx.apply_F(Q)
    return g.l2_norm(res) / ops.h1_norm(g, Q)


def petviashvili_solve(ctx: Choquard, seed: np.ndarray | None = None, tol: float = 1e-11,
                       max_iter: int = 500, seed_id: str = "gaussian", frequency: float = 1.0) -> GroundState:
    if not frequency > 0:
        raise ValueError(f"frequency must be positive, got {frequency!r}")
    g = ctx.grid
    p = ctx.p
    Q = gaussian_seed(g, 1 / np.sqrt(frequency)) if seed is None else np.abs(np.asarray(seed, dtype=complex)).real
    Q = g.check(Q).astype(float)
    helmholtz = frequency + g.k_squared
    expo = (2 * p - 1) / (2 * p - 2)
    trace = []
    gamma = np.nan
    for n in range(1, max_iter + 1):
        Qh = g.fft(Q)
        N_Q = ctx.apply_F(Q)
        Nh = g.fft(N_Q)
        lin = float(np.sum(helmholtz * np.abs(Qh) ** 2).real)
        non = float(np.sum(np.conj(Nh) * Qh).real)
        if not non > 0:
            raise ConvergenceError(f"stabilizing factor degenerate at iteration {n} (<N(Q),Q> = {non:g})", trace)
        gamma = lin / non
        Qh_new = gamma**expo * Nh / helmholtz
        dQh = Qh_new - Qh
        change = np.sqrt(np.sum(helmholtz * np.abs(dQh) ** 2) / lin)
        # real projection: remove the global phase, keep the real part
        Qc = g.ifft(Qh_new)
        phase = np.sum(Qc)
        Q = (Qc * np.conj(phase) / abs(phase)).real
        trace.append((n, gamma, float(change)))
        log.debug("petviashvili %d gamma=%.15f change=%.3e", n, gamma, change)
        if change < tol and abs(gamma - 1) < tol:
            break
    else:
        raise ConvergenceError(
            f"no convergence in {max_iter} iterations (gamma={gamma:.12f}, change={trace[-1][2]:.3e})", trace
        )
    return _assemble(ctx, Q, gamma, n, seed_id, trace, frequency)


def _assemble(ctx: Choquard, Q, gamma, iterations, seed_id, trace, frequency=1.0) -> GroundState:
    g, exps, p = ctx.grid, ctx.exps, ctx.p
    mass = ctx.mass(Q)
    grad_sq = ops.kinetic(g, Q)
    P = ctx.potential_functional(Q)
    energy = 0.5 * grad_sq - P / (2 * p)
    C0 = P / (mass ** (exps.A / 2) * grad_sq ** (exps.B / 2))
    me, kin = threshold_values(mass, grad_sq, energy, exps.s_c)
    return GroundState(
        Q=Q, mass=mass, grad_sq=grad_sq, potential=P, energy=energy, C0=C0,
        ME_threshold=me, K_threshold=kin, residual=equation_residual(ctx, Q, frequency),
        gamma=gamma, iterations=iterations, seed_id=seed_id, frequency=frequency, trace=trace,
    )


def ground_state_from_profile(ctx: Choquard, Q: np.ndarray, seed_id: str = "file") -> GroundState:
    """Rebuild the summary of a stored profile; the frequency comes from ωM = P - ‖∇Q‖²."""
    Q = np.asarray(ctx.grid.check(Q))
    Q = Q.real if np.iscomplexobj(Q) else Q
    frequency = (ctx.potential_functional(Q) - ops.kinetic(ctx.grid, Q)) / ctx.mass(Q)
    if not frequency > 0:
        raise ValueError(f"profile does not look like a ground state (implied frequency {frequency:g})")
    return _assemble(ctx, Q, 1.0, 0, seed_id, [], frequency)


def linear_growth_rate(ctx: Choquard, gs: GroundState, max_unknowns: int = 4096) -> float:
    """Largest real growth rate of perturbations of ``e^{iωt}Q`` (0 if linearly stable).

    Writing ``u = e^{iωt}(Q + a + ib)`` and linearizing gives ``a_t = L_- b``,
    ``b_t = -L_+ a`` with

        L_- = -Δ + ω - W,
        L_+ = -Δ + ω - (p-1)W - p w_b Q^{p-1} I_α(w_b Q^{p-1} ·),

    so growth rates are ``sqrt(-μ)`` over the negative eigenvalues μ of
    ``L_- L_+``.  The operators are assembled densely, which limits this to
    small (typically radial) grids.
    """
    g = ctx.grid
    n = int(np.prod(g.shape))
    if n > max_unknowns:
        raise ValueError(f"{n} unknowns exceed the dense limit {max_unknowns}; use a radial grid")
    Q = np.asarray(gs.Q, dtype=float)
    p, omega = ctx.p, gs.frequency
    W = ctx.phase_field(Q)
    q = ctx.weight * Q ** (p - 1)
    basis = np.eye(n).reshape((n,) + g.shape)
    minus_lap = np.array([g.ifft(g.k_squared * g.fft(e)).real.ravel() for e in basis]).T
    riesz = np.array([ctx.potential_of(q * e).real.ravel() for e in basis]).T
    L_minus = minus_lap + np.diag((omega - W).ravel())
    L_plus = minus_lap + np.diag((omega - (p - 1) * W).ravel()) - p * q.ravel()[:, None] * riesz
    mu = np.linalg.eigvals(L_minus @ L_plus)
    neg = -mu.real[mu.real < 0]
    return float(np.sqrt(neg.max())) if neg.size else 0.0


def threshold_values(mass: float, grad_sq: float, energy: float, s_c: float) -> tuple[float, float]:
    """(M^{1-s_c} E^{s_c}, ‖·‖^{1-s_c} ‖∇·‖^{s_c}) for the given norms."""
    me = mass ** (1 - s_c) * energy**s_c if energy > 0 else np.nan
    kin = mass ** ((1 - s_c) / 2) * grad_sq ** (s_c / 2)
    return me, kin


def sharp_constant(ctx: Choquard, Q: np.ndarray) -> float:
    return gn_quotient(ctx, Q)


def gn_quotient(ctx: Choquard, f: np.ndarray) -> float:
    """P(f) / (‖f‖^A ‖∇f‖^B); maximal (= C0) at the ground state."""
    exps = ctx.exps
    mass = ctx.mass(f)
    grad_sq = ops.kinetic(ctx.grid, f)
    return ctx.potential_functional(f) / (mass ** (exps.A / 2) * grad_sq ** (exps.B / 2))


def thresholds(gs: GroundState, exps: DerivedExponents) -> tuple[float, float]:
    if not exps.B > 2:
        raise ValueError(f"thresholds need B > 2, got B={exps.B}")
    return gs.ME_threshold, gs.K_threshold


def energy_identity_ratio(gs: GroundState, exps: DerivedExponents) -> float:
    """E(Q) / ((1/2 − 1/B)‖∇Q‖²)."""
    return gs.energy / ((0.5 - 1 / exps.B) * gs.grad_sq)


def threshold_row(ctx: Choquard, gs: GroundState) -> dict:
    prm, exps, g = ctx.params, ctx.exps, ctx.grid
    return {
        "N": prm.dim, "alpha": prm.alpha, "b": prm.b, "p": prm.p,
        "s_c": exps.s_c, "A": exps.A, "B": exps.B,
        "massQ": gs.mass, "gradQ_sq": gs.grad_sq, "energyQ": gs.energy, "C0": gs.C0,
        "ME_threshold": gs.ME_threshold, "K_threshold": gs.K_threshold,
        "residual": gs.residual, "grid_M": g.points, "box_L": g.box_length, "seed_id": gs.seed_id,
    }


def threshold_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=THRESHOLD_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
    return buf.getvalue()
