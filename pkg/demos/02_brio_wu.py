"""Brio-Wu MHD shock tube with radiation switched off (P0 = 0): the coupled
solver must reproduce the pure Roe/MUSCL fluid answer."""
import sys
from pathlib import Path

import numpy as np

from rmhd_ap.driver import run, write_csv
from rmhd_ap.scenarios import preset

nx = int(sys.argv[1]) if len(sys.argv) > 1 else 400
res = run(preset("brio-wu"), nx=nx)
f = res.final
print(f"{res.steps} steps to t = {f.time}")
x = f["x"]
for name, lo, hi in (("between compound wave and contact", 0.0, 0.08),
                     ("between contact and slow shock", 0.15, 0.24),
                     ("behind the slow shock", 0.3, 0.5)):
    m = (x > lo) & (x < hi)
    print(f"{name:36s} rho={f['rho'][m].mean():.3f} vx={f['vx'][m].mean():.3f} "
          f"By={f['By'][m].mean():.3f} p={f['p'][m].mean():.3f}")
out = Path("brio_wu.csv")
write_csv(f, out)
print("profile written to", out.resolve())
