"""Below and above the ground state: a small dichotomy run.

Evolves c·Q for c = 0.9 and 1.3 on a 64^3 periodic box of side 16 with the
ω = 0.25 ground state, prints the threshold classification, a few diagnostic
rows and the verdict.  The 96^3 runs used for acceptance live in
configs/ and can be run with the command-line tool:

    choquard ground-state --config demos/configs/dichotomy.cfg --out runs/q09
    choquard evolve --config demos/configs/dichotomy.cfg --out runs/q09
"""
import sys

from choquard import harness

T = float(sys.argv[1]) if len(sys.argv) > 1 else 4.0
base = f"""
grid.M = 64
grid.L = 16
ground_state.frequency = 0.25
evolve.dt = 0.01
evolve.T = {T}
evolve.snapshot_every = 0.5
evolve.boundary_action = record
evolve.write_snapshots = false
"""
cfg = harness.parse_config(base)
ctx = cfg.choquard()
gs = harness.solve_ground_state(cfg, ctx)
print(f"ground state: residual {gs.residual:.1e}, ME threshold {gs.ME_threshold:.4f}, K threshold {gs.K_threshold:.4f}")
for c in (0.9, 1.3):
    run_cfg = harness.parse_config(base + f"initial.c = {c}\n")
    res = harness.run_evolution(run_cfg, ctx, gs, harness.initial_data(run_cfg, ctx, gs))
    rec = res.report.records
    print(f"\nc = {c}: {res.classification.label} (ME ratio {res.classification.me_ratio:.3f}, "
          f"kinetic ratio {res.classification.kinetic_ratio:.3f})")
    for i in range(0, len(rec["t"]), max(1, len(rec["t"]) // 6)):
        print(f"  t={rec['t'][i]:5.2f}  grad={rec['grad_l2'][i]:8.4f}  local mass={rec['local_mass'][i]:.3e}  "
              f"kinetic ratio={rec['kinetic_threshold_ratio'][i]:.3f}  tail={rec['spectral_tail'][i]:.1e}")
    print(res.verdict.to_text().rstrip())
