import numpy as np
import pytest

from choquard import detectors as det
from choquard.grid import SpatialGrid
from choquard.ground_state import petviashvili_solve
from choquard.integrator import EvolveConfig, evolve
from choquard.model import REFERENCE
from choquard.nonlinearity import Choquard
from choquard.radial import RadialGrid


@pytest.fixture(scope="module")
def radial_gs():
    ctx = Choquard(REFERENCE, RadialGrid(30.0, 4096))
    return ctx, petviashvili_solve(ctx)


@pytest.mark.parametrize("c, label", [
    (0.5, det.SUB_THRESHOLD), (0.9, det.SUB_THRESHOLD), (1.05, det.ABOVE_KINETIC),
    (1.0, det.OUTSIDE), (1.3, det.OUTSIDE),
])
def test_threshold_classes_along_ground_state_ray(radial_gs, c, label):
    ctx, gs = radial_gs
    cls = det.threshold_classify(ctx, c * gs.Q, gs)
    assert cls.label == label
    if c < 1:
        assert cls.kinetic_ratio == pytest.approx(c, rel=1e-9)


def test_energy_above_threshold(radial_gs):
    ctx, gs = radial_gs
    boosted = 0.5 * gs.Q * np.cos(8 * ctx.grid.r) * 4
    assert det.threshold_classify(ctx, boosted, gs).label == det.ABOVE_ENERGY


def test_local_mass_radius_limit():
    g = SpatialGrid(3, 8.0, 8)
    with pytest.raises(ValueError):
        det.local_mass(g, np.ones(g.shape), 4.0)
    assert det.local_mass(g, np.ones(g.shape), 0.1) == pytest.approx(g.cell_volume)


def test_pullback_is_constant_for_free_flow():
    g = SpatialGrid(3, 12.0, 24)
    ctx = Choquard(REFERENCE, g, boundary="periodic")
    u0 = np.exp(-g.r_squared / 2.25).astype(complex)
    rep = evolve(ctx, u0, EvolveConfig(dt=0.05, T=1.0, nonlinear=False, snapshot_times=(0, 0.5, 1.0),
                                       boundary_action="record"))
    d = det.pullback_cauchy(g, rep.snapshots)
    assert np.max(d) < 1e-12
    with pytest.raises(ValueError):
        det.pullback_cauchy(g, rep.snapshots[:2])


def test_dispersing_free_wave_is_scattering_proxy():
    g = SpatialGrid(3, 24.0, 48)
    ctx = Choquard(REFERENCE, g, boundary="periodic")
    u0 = np.exp(-g.r_squared / 2.25).astype(complex)
    # the torus refocuses free waves (revivals), so stop before the first one
    cfg = EvolveConfig(dt=0.05, T=6.0, nonlinear=False, snapshot_times=tuple(np.arange(0, 6.5, 1.0)),
                       boundary_action="record")
    rep = evolve(ctx, u0, cfg, K_threshold=1e6)
    v = det.classify(g, rep)
    assert v.label == det.SCATTERING, v.to_text()


def test_blowup_needs_refinement():
    with pytest.raises(ValueError):
        det.Verdict(det.BLOWUP, [], refinement_consistent=False)
    assert "verdict = blowup-suspected" in det.Verdict(det.BLOWUP, [], True).to_text()


def test_unconfirmed_blowup_is_undecided(small_grid):
    ctx = Choquard(REFERENCE, small_grid, boundary="periodic")
    u0 = 2.0 * np.exp(-small_grid.r_squared / 2).astype(complex)
    rep = evolve(ctx, u0, EvolveConfig(dt=0.01, T=0.5, boundary_action="record", growth_factor=1.2, tail_limit=None))
    assert rep.stop_reason == "blowup-suspected"
    assert det.classify(small_grid, rep).label == det.UNDECIDED
    assert det.classify(small_grid, rep, [rep]).label == det.BLOWUP


def test_underresolved_data_is_undecided(small_grid):
    ctx = Choquard(REFERENCE, small_grid, boundary="periodic")
    x = small_grid.coords()[0]
    rough = np.exp(-small_grid.r_squared) * np.exp(1j * 0.9 * np.pi / small_grid.spacing * x)
    rep = evolve(ctx, rough, EvolveConfig(dt=0.01, T=0.1, boundary_action="record"))
    assert det.classify(small_grid, rep, [rep]).label == det.UNDECIDED
