"""Ground states, their identities and their instability.

The radial discretization solves -ΔQ + ωQ = (I_α * |x|^b Q^p)|x|^b Q^{p-1}
with the weight evaluated exactly at the nodes.  Printed per parameter set:
equation residual, the two Pohozaev ratios, the energy identity, the
thresholds M^{1-s_c}E^{s_c} and ‖Q‖^{1-s_c}‖∇Q‖^{s_c} (unchanged when ω
changes) and the growth rate of the unstable mode of the linearization.
"""
from choquard.ground_state import energy_identity_ratio, linear_growth_rate, petviashvili_solve
from choquard.model import NEAR_MASS_CRITICAL, REFERENCE
from choquard.nonlinearity import Choquard
from choquard.radial import RadialGrid

for name, prm in (("reference", REFERENCE), ("near mass-critical", NEAR_MASS_CRITICAL)):
    print(f"--- {name}")
    for n in (4096, 16384, 65536):
        ctx = Choquard(prm, RadialGrid(30.0, n))
        gs = petviashvili_solve(ctx, tol=1e-12, max_iter=800)
        r1, r2 = gs.pohozaev_ratios(ctx.exps, prm.p)
        print(f"n={n:6d}  iterations={gs.iterations:3d}  residual={gs.residual:.1e}  "
              f"pohozaev-1 = {r1 - 1:+.1e}, {r2 - 1:+.1e}  energy identity-1 = "
              f"{energy_identity_ratio(gs, ctx.exps) - 1:+.1e}")
    for omega in (1.0, 0.25):
        ctx = Choquard(prm, RadialGrid(30.0, 16384))
        gs = petviashvili_solve(ctx, frequency=omega, max_iter=800)
        print(f"omega={omega:<4g}  ME threshold={gs.ME_threshold:.8f}  K threshold={gs.K_threshold:.8f}")
    ctx = Choquard(prm, RadialGrid(20.0, 1024))
    gs = petviashvili_solve(ctx, max_iter=800)
    print(f"unstable growth rate of e^(it)Q: {linear_growth_rate(ctx, gs):.3f}")
