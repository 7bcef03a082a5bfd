"""Scenarios are plain key=value files. Start from a preset, override a few keys,
and run the result through the command-line front end."""
import subprocess
import sys
from pathlib import Path

from rmhd_ap.scenarios import dumps, loads, preset

text = "preset = brio-wu\nnx = 200\nt_end = 0.1\n"
spec = loads(text)
print("override file:\n" + text)
print("expanded scenario (first lines):")
print("\n".join(dumps(spec).splitlines()[:8]))
Path("my_case.cfg").write_text(text)
cmd = [sys.executable, "-m", "rmhd_ap", "run", "--scenario", "my_case.cfg", "--out", "my_case.csv"]
print("\n$", " ".join(cmd[1:]))
p = subprocess.run(cmd, capture_output=True, text=True)
print(p.stdout or p.stderr, f"exit code {p.returncode}")
