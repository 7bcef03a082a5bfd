"""Radiative shocks at Mach 1.2 and Mach 2. At dx = 1/400 the shock covers two
cells, so the Zel'dovich overshoot at Mach 2 is only a few 1e-3 above the
downstream temperature. Pass a larger nx to see it grow."""
import sys
import numpy as np

from rmhd_ap.driver import run
from rmhd_ap.scenarios import preset

for name in ("radshock-m1.2", "radshock-m2"):
    spec = preset(name)
    nx = int(sys.argv[1]) if len(sys.argv) > 1 else round((spec.b - spec.a) * 400)
    f = run(spec, nx=nx).final
    T_down = spec.right[6] / (spec.R_ideal * spec.right[0])
    print(f"{name}: nx={nx} max T - downstream T = {f['T'].max() - T_down:+.2e}")
    print("  T  :", np.round(f["T"], 4))
    print("  T_r:", np.round(f["T_r"], 4))
