"""Strang split-step time evolution with scheduled diagnostics.

One step is ``K_{dt/2} ∘ N_dt ∘ K_{dt/2}``: ``K_τ`` multiplies each Fourier
mode by ``e^{-i|k|²τ}`` and ``N_τ`` is the exact nonlinear flow
``u ↦ e^{iτW}u`` with ``W = V w_b |u|^{p-2}``.  The nonlinear substep is exact
because ``∂_t|u|² = 2 Re(ū · iWu) = 0`` for real ``W``, so ``W`` is frozen
along it.  Both substeps are unitary, hence mass is conserved to roundoff.

Between diagnostic records adjacent half kinetic steps are fused into one
full step; the result is identical up to roundoff.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import morawetz as mw
from . import operators as ops
from .grid import write_snapshot
from .nonlinearity import Choquard

log = logging.getLogger(__name__)

DIAGNOSTIC_COLUMNS = (
    "t", "mass", "energy_2p", "energy_p", "grad_l2", "hsc_norm", "potential_P", "local_mass",
    "morawetz_action", "kinetic_threshold_ratio", "boundary_mass",
    # additions beyond the base schema
    "ball_ratio", "ball_lq", "spectral_tail",
)
DIAGNOSTIC_SCHEMA_VERSION = 2

STOP_BLOWUP = "blowup-suspected"
STOP_TRUNCATION = "domain-truncation"
STOP_UNRESOLVED = "under-resolved"


@dataclass(frozen=True)
class EvolveConfig:
    """Step size, horizon and monitoring settings for one run.

    ``growth_factor`` and ``tail_limit`` are the blow-up flags: the run stops
    when ``‖∇u‖`` exceeds ``growth_factor`` times its initial value or when the
    fraction of ``‖∇u‖²`` carried by the outer third of the spectrum exceeds
    ``tail_limit`` (loss of resolution; ``None`` disables it).  Data that
    already exceeds ``tail_limit`` at t = 0 stops the run as under-resolved.  The boundary
    guard measures the mass outside ``|x| > boundary_fraction·L`` relative to
    the initial mass; ``boundary_action`` is ``"stop"`` or ``"record"``.
    """

    dt: float
    T: float
    diag_stride: int = 10
    snapshot_times: tuple[float, ...] = ()
    filter_on: bool = False
    detector_radius: float = 1.0
    weight_radius: float | None = None
    cutoff_radius: float | None = None
    lq_exponent: float | None = None
    growth_factor: float = 1e3
    tail_limit: float | None = 1e-2
    boundary_fraction: float = 0.4
    boundary_tol: float = 1e-6
    boundary_action: str = "stop"
    nonlinear: bool = True

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive, got {self.T!r}")
        if int(self.diag_stride) != self.diag_stride or self.diag_stride < 1:
            raise ValueError(f"diag_stride must be a positive integer, got {self.diag_stride!r}")
        if self.boundary_action not in ("stop", "record"):
            raise ValueError(f"boundary_action must be 'stop' or 'record', got {self.boundary_action!r}")
        if any(not 0 <= t <= self.T for t in self.snapshot_times):
            raise ValueError("snapshot times must lie in [0, T]")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class TrajectoryReport:
    records: dict[str, np.ndarray]
    snapshots: list[tuple[float, np.ndarray]]
    final: np.ndarray
    final_time: float
    steps_taken: int
    stop_reason: str | None = None
    stop_detail: str = ""
    boundary_trip_time: float | None = None
    verdict: object = None
    config: EvolveConfig | None = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return self.records["t"]

    def csv_text(self) -> str:
        return diagnostics_csv(self.records)


def kinetic_step(ctx: Choquard, u: np.ndarray, tau: float) -> np.ndarray:
    return ops.free_propagate(ctx.grid, u, tau)


def nonlinear_step(ctx: Choquard, u: np.ndarray, tau: float) -> np.ndarray:
    """Exact flow of ``i u_t = -W u`` with frozen modulus: ``u e^{iτW}``."""
    return u * np.exp(1j * tau * ctx.phase_field(u))


def strang_step(ctx: Choquard, u: np.ndarray, dt: float, nonlinear: bool = True) -> np.ndarray:
    g = ctx.grid
    kin = np.exp(-0.5j * dt * g.k_squared)
    v = g.ifft(kin * g.fft(u))
    if nonlinear:
        v = nonlinear_step(ctx, v, dt)
    return g.ifft(kin * g.fft(v))


class Diagnostics:
    """Evaluates one row of the diagnostics table."""

    def __init__(self, ctx: Choquard, config: EvolveConfig, K_threshold: float | None = None):
        g = ctx.grid
        self.ctx = ctx
        self.config = config
        self.K_threshold = K_threshold
        L = g.box_length
        self.detector_mask = g.r_squared <= config.detector_radius**2
        self.boundary_mask = g.r_squared > (config.boundary_fraction * L) ** 2
        wr = config.weight_radius if config.weight_radius is not None else 0.2 * L
        self.weight = mw.build_weight(wr, g)
        cr = config.cutoff_radius if config.cutoff_radius is not None else 0.4 * L
        self.chi = mw.cutoff(cr, g)
        N = g.dim
        self.q = config.lq_exponent if config.lq_exponent is not None else (2 * N / (N - 2) if N > 2 else 6.0)
        kmax = math.pi / g.spacing
        self.tail_mask = g.k_squared > (2 * kmax / 3) ** 2
        self.s_c = ctx.exps.s_c
        self.mass0 = None

    def row(self, t: float, u: np.ndarray) -> dict:
        ctx, g = self.ctx, self.ctx.grid
        p = ctx.p
        uh = g.fft(u)
        mass = g.spectral_sq(uh)
        k2 = g.k_squared
        grad_sq = g.spectral_sq(uh, k2)
        tail = g.spectral_sq(uh, k2 * self.tail_mask)
        hsc = math.sqrt(g.spectral_sq(uh, np.where(k2 > 0, k2, 1.0) ** self.s_c * (k2 > 0)))
        P = ctx.potential_functional(u)
        a2 = np.abs(u) ** 2
        local = float(g.integrate(np.where(self.detector_mask, a2, 0.0)))
        boundary = float(g.integrate(np.where(self.boundary_mask, a2, 0.0)))
        if self.mass0 is None:
            self.mass0 = mass
        kin_ratio = math.nan
        if self.K_threshold:
            kin_ratio = mass ** ((1 - self.s_c) / 2) * grad_sq ** (self.s_c / 2) / self.K_threshold
        return {
            "t": t,
            "mass": mass,
            "energy_2p": 0.5 * grad_sq - P / (2 * p),
            "energy_p": 0.5 * grad_sq - P / p,
            "grad_l2": math.sqrt(grad_sq),
            "hsc_norm": hsc,
            "potential_P": P,
            "local_mass": local,
            "morawetz_action": mw.morawetz_action(g, u, self.weight),
            "kinetic_threshold_ratio": kin_ratio,
            "boundary_mass": boundary / self.mass0 if self.mass0 else 0.0,
            "ball_ratio": mw.virial_coercivity(ctx, u, self.chi),
            "ball_lq": float(g.integrate(np.where(self.detector_mask, np.abs(u) ** self.q, 0.0))),
            "spectral_tail": tail / grad_sq if grad_sq > 0 else 0.0,
        }


def evolve(ctx: Choquard, u0: np.ndarray, config: EvolveConfig, K_threshold: float | None = None,
           snapshot_dir=None, keep_snapshots: bool = True) -> TrajectoryReport:
    """Run the split-step scheme from ``u0`` to ``config.T``.

    Records a diagnostics row every ``diag_stride`` steps (and at t = 0),
    stores snapshots at the requested times (rounded to the nearest step) and
    stops early on a blow-up flag or, if configured, on the boundary guard.
    """
    g = ctx.grid
    u = np.array(g.check(u0), dtype=complex)
    dt, nsteps, stride = config.dt, config.steps, int(config.diag_stride)
    diag = Diagnostics(ctx, config, K_threshold)
    snap_steps = {}
    for ts in config.snapshot_times:
        snap_steps.setdefault(int(round(ts / dt)), ts)
    rows = []
    snapshots = []
    stop, detail, trip = None, "", None
    half = np.exp(-0.5j * dt * g.k_squared)
    full = half * half
    filt = ctx.filter if (config.filter_on and ctx.filter is not None) else None

    def record(step, u):
        nonlocal stop, detail, trip
        t = step * dt
        row = diag.row(t, u)
        rows.append(row)
        if step in snap_steps:
            _snapshot(step, u)
        if not all(math.isfinite(v) for v in (row["mass"], row["grad_l2"], row["potential_P"])):
            stop, detail = STOP_BLOWUP, f"non-finite values at t={t:.6g}"
        elif row["grad_l2"] > config.growth_factor * rows[0]["grad_l2"]:
            stop, detail = STOP_BLOWUP, f"gradient norm grew by more than {config.growth_factor:g} at t={t:.6g}"
        elif config.tail_limit is not None and row["spectral_tail"] > config.tail_limit and step == 0:
            stop, detail = STOP_UNRESOLVED, (f"initial data under-resolved: spectral tail "
                                             f"{row['spectral_tail']:.3g} > {config.tail_limit:g}")
        elif config.tail_limit is not None and row["spectral_tail"] > config.tail_limit:
            stop, detail = STOP_BLOWUP, (f"resolution lost at t={t:.6g}: spectral tail "
                                         f"{row['spectral_tail']:.3g} > {config.tail_limit:g}")
        elif row["boundary_mass"] > config.boundary_tol and trip is None:
            trip = t
            if config.boundary_action == "stop":
                stop, detail = STOP_TRUNCATION, f"boundary mass {row['boundary_mass']:.3g} at t={t:.6g}"

    def _snapshot(step, u):
        t = step * dt
        if keep_snapshots:
            snapshots.append((t, u.copy()))
        if snapshot_dir is not None:
            prm = ctx.params
            write_snapshot(Path(snapshot_dir) / f"snap_{step:08d}.bin", g, u, t, prm.alpha, prm.b, prm.p)

    record(0, u)
    step = 0
    while step < nsteps and stop is None:
        block = min(stride, nsteps - step)
        uh = half * g.fft(u)
        for j in range(block):
            v = g.ifft(uh)
            if config.nonlinear:
                v = nonlinear_step(ctx, v, dt)
            uh = g.fft(v)
            uh *= half if j == block - 1 else full
            if filt is not None:
                uh *= filt
            step += 1
            if step in snap_steps and j < block - 1:
                _snapshot(step, g.ifft(half.conj() * uh))
        u = g.ifft(uh)
        if not np.all(np.isfinite(u)):
            stop, detail = STOP_BLOWUP, f"non-finite field at t={step * dt:.6g}"
            break
        record(step, u)
        log.debug("t=%.4f mass=%.12g grad=%.6g", step * dt, rows[-1]["mass"], rows[-1]["grad_l2"])
    records = {k: np.array([r[k] for r in rows]) for k in DIAGNOSTIC_COLUMNS}
    return TrajectoryReport(records, snapshots, u, step * dt, step, stop, detail, trip, config=config)


def diagnostics_csv(records: dict) -> str:
    """CSV text with a schema comment line; floats written with repr for exact round trips."""
    buf = io.StringIO()
    buf.write(f"# diagnostics schema {DIAGNOSTIC_SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DIAGNOSTIC_COLUMNS)
    n = len(records["t"])
    for i in range(n):
        w.writerow([repr(float(records[c][i])) for c in DIAGNOSTIC_COLUMNS])
    return buf.getvalue()


def read_diagnostics_csv(text: str) -> dict[str, np.ndarray]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}
