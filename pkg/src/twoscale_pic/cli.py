"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 numerical instability, 4 I/O
failure (1 is left for a failed ``--assert-speedup``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import plotting, studies
from .analysis import moments_dict, write_moments_csv, write_snapshot_csv
from .core import (
    ConfigError,
    InstabilityError,
    format_config,
    load_config,
    parse_config,
    save_config,
)
from .scenarios import PRESETS, preset
from .simulate import RunResult, compare, noise_floor, run_reference, run_two_scale

EXIT_OK, EXIT_SPEEDUP, EXIT_CONFIG, EXIT_INSTABILITY, EXIT_IO = 0, 1, 2, 3, 4

log = logging.getLogger("twoscale_pic")


def _resolve_config(args):
    if args.config and args.preset:
        raise ConfigError("give either --preset or --config, not both")
    if args.config:
        config = load_config(args.config)
        name = Path(args.config).stem
    elif args.preset:
        try:
            config = preset(args.preset).config
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        name = args.preset
    else:
        raise ConfigError("a scenario is required: --preset NAME or --config FILE")
    if args.set:
        lines = dict(line.split(" = ", 1) for line in format_config(config).splitlines())
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            key, value = (s.strip() for s in item.split("=", 1))
            if key not in lines:
                raise ConfigError(f"unknown key {key!r}")
            lines[key] = value
        config = parse_config("\n".join(f"{k} = {v}" for k, v in lines.items()))
    return config, name


def _tag(t: float) -> str:
    return f"{t:.6g}"


def _write_run(run: RunResult, out: Path) -> list:
    written = []
    for t in sorted(run.snapshots):
        beam = run.physical_snapshot(t)
        path = out / f"snapshot_{run.solver}_t{_tag(t)}.csv"
        write_snapshot_csv(beam, path, t, t / run.config.epsilon)
        written.append(path)
    path = out / f"moments_{run.solver}.csv"
    write_moments_csv(run.moments, path)
    written.append(path)
    return written


def _summary(run: RunResult, scenario: str) -> dict:
    return {
        "scenario": scenario,
        "solver": run.solver,
        "steps": run.steps,
        "wall_s": run.wall_s,
        "final_moments": moments_dict(run.moments[-1][1]),
        "overflow": run.overflow,
    }


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def cmd_run(args) -> int:
    config, name = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "two-scale":
        run = run_two_scale(config, threads=args.threads)
    else:
        run = run_reference(config)
    _write_run(run, out)
    if args.figures and run.snapshots:
        snaps = {t: run.physical_snapshot(t) for t in run.snapshots}
        plotting.plot_snapshots(snaps, out / f"snapshots_{run.solver}.png", run.solver)
        plotting.plot_moments({run.solver: run.moments}, out / f"moments_{run.solver}.png")
    if args.plot_script:
        plotting.write_plot_script(out)
    _emit(_summary(run, name))
    return EXIT_OK


def cmd_compare(args) -> int:
    config, name = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = compare(config, threads=args.threads)
    _write_run(result.two_scale, out)
    _write_run(result.reference, out)
    floor = noise_floor(config, tau=config.t_end / config.epsilon)
    with (out / "comparison.csv").open("w") as fh:
        keys = list(result.moment_diff[0]) if result.moment_diff else []
        fh.write(",".join(["t", "discrepancy"] + keys) + "\n")
        for t, d, md in zip(result.times, result.discrepancy, result.moment_diff):
            fh.write(",".join(repr(float(x)) for x in [t, d] + [md[k] for k in keys]) + "\n")
    if args.figures:
        ref = {t: result.reference.snapshots[t] for t in result.times}
        two = {t: result.two_scale.physical_snapshot(t) for t in result.times}
        plotting.plot_comparison(ref, two, out / "comparison.png")
        plotting.plot_moments({"reference": result.reference.moments,
                               "two-scale": result.two_scale.moments}, out / "moments.png")
    if args.plot_script:
        plotting.write_plot_script(out)
    speedup = result.reference.wall_s / max(result.two_scale.wall_s, 1e-12)
    payload = {
        "scenario": name,
        "solver": "compare",
        "steps": {"two-scale": result.two_scale.steps, "reference": result.reference.steps},
        "wall_s": {"two-scale": result.two_scale.wall_s, "reference": result.reference.wall_s},
        "speedup": speedup,
        "final_moments": {
            "two-scale": moments_dict(result.two_scale.moments[-1][1]),
            "reference": moments_dict(result.reference.moments[-1][1]),
        },
        "overflow": max(result.two_scale.overflow, result.reference.overflow),
        "max_discrepancy": result.max_discrepancy,
        "noise_floor": floor,
    }
    _emit(payload)
    if args.assert_speedup is not None and speedup < args.assert_speedup:
        print(f"speedup {speedup:.2f} below requested {args.assert_speedup}", file=sys.stderr)
        return EXIT_SPEEDUP
    return EXIT_OK


def cmd_convergence(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = preset("linear-resonant-n2").config.replace(n_particles=args.particles)
    dts = [args.dt0 / 2**k for k in range(args.levels)]
    t_err = studies.resonant_time_errors(config, dts)
    t_order = studies.fit_order(dts, t_err)
    spacings, g_err = studies.field_grid_errors()
    g_order = studies.fit_order(spacings, g_err)
    with (out / "convergence.csv").open("w") as fh:
        fh.write("study,h,error\n")
        for h, e in zip(dts, t_err):
            fh.write(f"time,{h!r},{e!r}\n")
        for h, e in zip(spacings, g_err):
            fh.write(f"grid,{h!r},{e!r}\n")
    if args.figures:
        plotting.plot_convergence(dts, t_err, out / "convergence_time.png", "dt", t_order)
        plotting.plot_convergence(spacings, g_err, out / "convergence_grid.png", "grid spacing", g_order)
    _emit({"time_order": t_order, "time_errors": dict(zip(map(repr, dts), t_err)),
           "grid_order": g_order, "grid_errors": dict(zip(map(repr, spacings), g_err))})
    return EXIT_OK


def cmd_quadrature_check(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {}
    rows = []
    for n in args.n:
        p0, errors = studies.min_exact_nodes(n, args.p_max)
        report[f"n={n}"] = {"min_exact_p": p0}
        rows += [(n, p, e) for p, e in enumerate(errors, 1)]
    with (out / "quadrature_check.csv").open("w") as fh:
        fh.write("n,p,error\n")
        for n, p, e in rows:
            fh.write(f"{n},{p},{e!r}\n")
    _emit(report)
    return EXIT_OK


def cmd_emit_preset(args) -> int:
    try:
        config = preset(args.name).config
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    if args.output in (None, "-"):
        sys.stdout.write(format_config(config))
    else:
        save_config(config, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoscale-pic", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--config", help="flat key = value scenario file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--figures", action="store_true", help="render PNG figures with matplotlib")
        p.add_argument("--plot-script", action="store_true", help="write a standalone plotting script")

    for name, helptext in (("two-scale", "run the two-scale solver"),
                           ("reference", "run the fine-step reference solver")):
        p = sub.add_parser(name, help=helptext)
        scenario_args(p)
        p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run both solvers and compare the beams")
    scenario_args(p)
    p.add_argument("--assert-speedup", type=float, default=None, metavar="FACTOR")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("convergence", help="time-step and grid refinement studies")
    p.add_argument("--out", default="out")
    p.add_argument("--particles", type=int, default=1000)
    p.add_argument("--dt0", type=float, default=0.4)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("quadrature-check", help="minimal node count for exact resonant drifts")
    p.add_argument("--out", default="out")
    p.add_argument("--n", type=int, nargs="+", default=[2, 7])
    p.add_argument("--p-max", type=int, default=64)
    p.set_defaults(func=cmd_quadrature_check)

    p = sub.add_parser("emit-preset", help="write a preset as an editable config file")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_emit_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print(f"instability: {exc} (solver={exc.solver}, step={exc.step}, stage={exc.stage})",
              file=sys.stderr)
        return EXIT_INSTABILITY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
