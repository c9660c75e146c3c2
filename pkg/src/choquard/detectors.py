"""Scattering and blow-up proxies built on recorded trajectories.

None of these prove anything about the continuum flow.  A ``scattering-proxy``
verdict means the local mass left the detector ball, the free pullback
``e^{-itΔ}u(t)`` stopped moving and the kinetic monitor stayed below
threshold; ``blowup-suspected`` means a blow-up flag fired in the primary run
and again in at least one rerun at a smaller step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import morawetz as mw
from . import operators as ops
from .ground_state import GroundState, threshold_values
from .integrator import STOP_BLOWUP, STOP_TRUNCATION, STOP_UNRESOLVED, TrajectoryReport
from .nonlinearity import Choquard

SUB_THRESHOLD = "sub-threshold"
ABOVE_KINETIC = "above-kinetic"
ABOVE_ENERGY = "above-energy"
OUTSIDE = "outside-hypotheses"

SCATTERING = "scattering-proxy"
BLOWUP = "blowup-suspected"
UNDECIDED = "undecided"
TRUNCATED = "domain-truncation"


@dataclass(frozen=True)
class ThresholdClass:
    label: str
    me_ratio: float
    kinetic_ratio: float
    explanation: str = ""


def threshold_classify(ctx: Choquard, u0: np.ndarray, gs: GroundState, boundary_tol: float = 1e-6) -> ThresholdClass:
    """Position of ``u0`` relative to the mass-energy and kinetic thresholds.

    Data within ``boundary_tol`` of either threshold is on the boundary, where
    the scattering statement gives nothing, and is reported as outside the
    hypotheses together with nonpositive energy.
    """
    s_c = ctx.exps.s_c
    mass = ctx.mass(u0)
    grad_sq = ops.kinetic(ctx.grid, u0)
    energy = ctx.energy(u0)
    _, kin = threshold_values(mass, grad_sq, energy, s_c)
    k_ratio = kin / gs.K_threshold
    if mass == 0:
        return ThresholdClass(SUB_THRESHOLD, 0.0, 0.0, "zero data")
    if not energy > 0:
        return ThresholdClass(OUTSIDE, math.nan, k_ratio,
                              f"E(u0) = {energy:.6g} <= 0, so M^(1-s_c) E^(s_c) is undefined")
    me_ratio = mass ** (1 - s_c) * energy**s_c / gs.ME_threshold
    if abs(me_ratio - 1) < boundary_tol or abs(k_ratio - 1) < boundary_tol:
        return ThresholdClass(OUTSIDE, me_ratio, k_ratio, "on the threshold boundary")
    if me_ratio < 1 and k_ratio < 1:
        return ThresholdClass(SUB_THRESHOLD, me_ratio, k_ratio)
    if me_ratio >= 1:
        return ThresholdClass(ABOVE_ENERGY, me_ratio, k_ratio)
    return ThresholdClass(ABOVE_KINETIC, me_ratio, k_ratio)


def local_mass(grid, u: np.ndarray, R: float) -> float:
    """∫_{|x|<=R} |u|^2."""
    if not R < grid.box_length / 2:
        raise ValueError(f"detector radius {R} must be below L/2 = {grid.box_length / 2}")
    return float(grid.integrate(np.where(grid.r_squared <= R * R, np.abs(u) ** 2, 0.0)))


def pullback_cauchy(grid, snapshots) -> np.ndarray:
    """H¹ increments ``‖v(t_{n+1}) - v(t_n)‖`` of ``v(t) = e^{-itΔ}u(t)``."""
    if len(snapshots) < 3:
        raise ValueError(f"need at least 3 snapshots, got {len(snapshots)}")
    times = [t for t, _ in snapshots]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("snapshot times must increase")
    pulled = [ops.free_propagate(grid, u, -t) for t, u in snapshots]
    return np.array([ops.h1_norm(grid, b - a) for a, b in zip(pulled, pulled[1:])])


def coercivity_monitor(ctx: Choquard, u: np.ndarray, gs: GroundState, R: float) -> tuple[float, float]:
    """(‖u‖^{1-s_c}‖∇u‖^{s_c} / K_threshold, localized virial ratio with cutoff χ_R)."""
    s_c = ctx.exps.s_c
    mass = ctx.mass(u)
    grad_sq = ops.kinetic(ctx.grid, u)
    kin = mass ** ((1 - s_c) / 2) * grad_sq ** (s_c / 2) / gs.K_threshold
    return float(kin), mw.virial_coercivity(ctx, u, mw.cutoff(R, ctx.grid))


@dataclass
class Verdict:
    label: str
    evidence: list = field(default_factory=list)  # (criterion, value, threshold, passed)
    refinement_consistent: bool = False

    def __post_init__(self):
        if self.label == BLOWUP and not self.refinement_consistent:
            raise ValueError("blowup-suspected needs a consistent refined rerun")

    def to_text(self) -> str:
        lines = [f"verdict = {self.label}", f"refinement_consistent = {str(self.refinement_consistent).lower()}"]
        for name, value, thr, ok in self.evidence:
            lines.append(f"{name}: value={value!r} threshold={thr!r} pass={str(bool(ok)).lower()}")
        return "\n".join(lines) + "\n"


def classify(grid, report: TrajectoryReport, reruns=(), local_fraction: float = 1e-3,
             scat_fraction: float = 1e-3, windows: int = 4) -> Verdict:
    """Aggregate the monitors of a finished run (and optional dt-halved reruns)."""
    rec = report.records
    mass0 = float(rec["mass"][0])
    evidence = []
    if report.stop_reason == STOP_BLOWUP:
        consistent = any(r.stop_reason == STOP_BLOWUP for r in reruns)
        evidence.append(("primary_blowup_flag", report.stop_detail, "", True))
        for r in reruns:
            evidence.append(("rerun_dt", r.config.dt if r.config else math.nan, "", r.stop_reason == STOP_BLOWUP))
        if consistent:
            return Verdict(BLOWUP, evidence, True)
        return Verdict(UNDECIDED, evidence, False)
    if report.stop_reason == STOP_UNRESOLVED:
        evidence.append(("spectral_tail_initial", float(rec["spectral_tail"][0]), "", False))
        return Verdict(UNDECIDED, evidence, False)
    if report.stop_reason == STOP_TRUNCATION:
        evidence.append(("boundary_mass", float(rec["boundary_mass"][-1]), "", False))
        return Verdict(TRUNCATED, evidence, False)

    eps2 = local_fraction * mass0
    final_local = float(rec["local_mass"][-1])
    local_ok = final_local < eps2
    evidence.append(("local_mass_final", final_local, eps2, local_ok))

    eps_scat = scat_fraction * mass0
    pull_ok = False
    if len(report.snapshots) >= 3:
        d = pullback_cauchy(grid, report.snapshots)
        pull_ok = bool(d[-1] < eps_scat and d[-1] <= d[0])
        evidence.append(("pullback_increment_final", float(d[-1]), eps_scat, pull_ok))
        evidence.append(("pullback_increment_max", float(d.max()), "", True))
    else:
        evidence.append(("pullback_increment_final", math.nan, eps_scat, False))

    kin = rec["kinetic_threshold_ratio"]
    kin_ok = bool(np.all(np.isfinite(kin)) and np.all(kin < 1))
    evidence.append(("kinetic_ratio_max", float(np.nanmax(kin)) if np.any(np.isfinite(kin)) else math.nan, 1.0, kin_ok))

    if len(rec["t"]) >= 2 and rec["t"][-1] > 0:
        avg = mw.spacetime_average(rec["t"], rec["ball_lq"], windows)
        first, last = avg[0][2], avg[-1][2]
        evidence.append(("spacetime_window_ratio", last / first if first > 0 else 0.0, 0.1,
                         first == 0 or last < 0.1 * first))
    if report.boundary_trip_time is not None:
        evidence.append(("boundary_guard_trip_time", report.boundary_trip_time, "", True))

    if local_ok and pull_ok and kin_ok:
        return Verdict(SCATTERING, evidence, False)
    return Verdict(UNDECIDED, evidence, False)
