"""Type-II tuning curves, degeneracy vs. temperature, and the laser operating window."""
import numpy as np

from pairforge import lasermodel, layerstack, materials
from pairforge.nonlinear import mode_curves, pm_center_vs_temperature, tuning_curves

table = materials.default_table()
stack = layerstack.load_device(table=table)
doc = layerstack.read_device_doc()

curves = mode_curves(stack, 298.15, pump_range=(775.0, 795.0), fundamental_range=(1350.0, 1850.0), table=table)
tc = tuning_curves(curves, np.linspace(781.5, 784.5, 13))
print(f"degenerate pump at 25 C: {tc.degeneracy_pump:.3f} nm")
print(f"{'pump':>9} {'signal':>10} {'idler':>10}  branch")
for p in tc.points:
    print(f"{p.lambda_p:9.3f} {p.lambda_s:10.2f} {p.lambda_i:10.2f}  {p.branch}")

# %% degeneracy drifts with temperature much more slowly than the gain peak
line = pm_center_vs_temperature(stack, np.arange(288.15, 313.16, 5.0), table=table)
print(f"\nphase-matching slope {line.slope:.4f} nm/K on the pump axis")
for T, c in zip(line.temperatures, line.centers):
    print(f"  {T - 273.15:5.1f} C: pump {c:.3f} nm, pairs at {2 * c:.2f} nm")

diode = lasermodel.DiodeParams.from_dict(doc["diode"])
T0 = line.temperatures[0]
win = lasermodel.operating_window(diode, line.slope, line.center_at(T0), T0, 0.35)
print(f"\nlaser slope {diode.wavelength_slope_nm_per_K} nm/K; lines cross at {win.crossing_K - 273.15:.2f} C, "
      f"window {win.low_K - 273.15:.2f}..{win.high_K - 273.15:.2f} C")
for T in np.arange(win.low_K - 1.0, win.high_K + 1.01, 0.5):
    op = lasermodel.operating_point(diode, T, 0.7, line.slope, line.center_at(T0), T0, 0.35)
    print(f"  {T - 273.15:6.2f} C: laser {op.laser_nm:.3f} nm, detuning {op.detuning_nm:+.3f} nm, "
          f"{'in' if op.in_window else 'out'}")
