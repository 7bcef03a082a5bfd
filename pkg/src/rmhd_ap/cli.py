"""Command-line front end: `rmhd run`, `rmhd converge`, `rmhd presets`."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .core import RmhdError, SolverError
from .driver import convergence_study, run, write_csv
from .scenarios import MODES, PRESETS, load, preset


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def resolve_scenario(name: str):
    '''A preset name, or a path to a key=value scenario file.'''
    if name in PRESETS:
        return preset(name)
    if os.path.exists(name):
        return load(name)
    return preset(name)  # raises KeyError listing the valid names


def frame_path(out: Path, k: int, time: float) -> Path:
    return out.with_name(f"{out.stem}.frame{k:03d}_t{time:.6g}{out.suffix or '.csv'}")


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmhd", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="advance one scenario and write CSV output")
    r.add_argument("--scenario", required=True, help="preset name or scenario file")
    r.add_argument("--nx", type=int)
    g = r.add_mutually_exclusive_group()
    g.add_argument("--cfl", type=float, help="dt = cfl * dx")
    g.add_argument("--dt", type=float)
    r.add_argument("--eps", type=float)
    r.add_argument("--mode", choices=MODES)
    r.add_argument("--t-end", type=float)
    r.add_argument("--out", required=True, type=Path)
    r.add_argument("--frames", type=_floats, default=[],
                   help="extra output times, e.g. 0.05,0.1")

    c = sub.add_parser("converge", help="self-convergence study over several resolutions")
    c.add_argument("--scenario", required=True)
    c.add_argument("--nx-list", required=True, type=_ints)
    c.add_argument("--cfl", type=float)
    c.add_argument("--mode", choices=MODES)
    c.add_argument("--out", required=True, type=Path)

    sub.add_parser("presets", help="list built-in scenarios")
    return p


def cmd_run(a) -> int:
    spec = resolve_scenario(a.scenario)
    res = run(spec, nx=a.nx, dt=a.dt, dt_factor=a.cfl, mode=a.mode, t_end=a.t_end,
              frames=a.frames, eps=a.eps)
    a.out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(res.final, a.out)
    for k, fr in enumerate(res.frames[:-1]):
        write_csv(fr, frame_path(a.out, k, fr.time))
    its = res.iterations
    summary = f"steps={res.steps} t={res.final.time:.10g}"
    if its:
        summary += f" macro_iterations(max)={max(its)} q_mean(max)={max(res.q_mean):.3e}"
    print(summary)
    return 0


def cmd_converge(a) -> int:
    spec = resolve_scenario(a.scenario)
    rule = (lambda dx: a.cfl * dx) if a.cfl else None
    a.out.parent.mkdir(parents=True, exist_ok=True)
    rows = convergence_study(spec, a.nx_list, dt_rule=rule, mode=a.mode, out=a.out)
    for row in rows:
        orders = " ".join(f"{k}={v:.3f}" for k, v in row.items() if k.startswith("order_"))
        print(f"{row['nx']}->{row['nx_fine']} err_rho={row['err_rho']:.4e} {orders}".rstrip())
    return 0


def cmd_presets(_a) -> int:
    for name in PRESETS:
        s = preset(name)
        print(f"{name}\tmode={s.mode} regime={s.regime} nx={s.nx} t_end={s.t_end:g}")
    return 0


def main(argv=None) -> int:
    a = parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "converge": cmd_converge, "presets": cmd_presets}[a.command]
    try:
        return handler(a)
    except SolverError as exc:
        print(f"error: kind=SolverError step={exc.step} t={exc.time:.10g} "
              f"detail={exc.args[0]!r}", file=sys.stderr)
        return 3
    except (RmhdError, KeyError, OSError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"error: kind={type(exc).__name__} detail={msg!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
