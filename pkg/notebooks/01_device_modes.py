"""Modes of the packaged Bragg-reflection stack at the pump and the fundamental."""
from pairforge import layerstack, materials, modesolver

table = materials.default_table()
stack = layerstack.load_device(table=table)
print(f"{len(stack.layers)} layers, {stack.total_thickness_nm:.1f} nm total")

for lam, pols in ((785.0, ("TE",)), (1570.0, ("TE", "TM"))):
    for pol in pols:
        print(f"\n-- {pol} modes at {lam:.0f} nm --")
        print(f"{'family':>6} {'order':>5} {'n_eff':>10} {'n_g':>8} {'conf':>6} {'peak z [nm]':>11}")
        for m in modesolver.find_modes(stack, lam, pol, table):
            print(f"{m.family:>6} {m.order:5d} {m.n_eff.real:10.5f} {m.n_g:8.4f} "
                  f"{m.confinement:6.3f} {m.peak_depth:11.1f}")

# %% doping losses seen by each mode
print("\n-- modal losses with doping (cm^-1) --")
for lam, pol, fam in ((785.0, "TE", "bragg"), (1570.0, "TE", "tir"), (1570.0, "TM", "tir")):
    m = modesolver.select_mode(modesolver.find_modes(stack, lam, pol, table, lossy=True, group_index=False), fam, 0)
    print(f"{pol}-{fam}0 at {lam:.0f} nm: alpha = {m.alpha:.3f}")

