"""Command-line front end: ``vimpde {verify,restore,surface,synth,rerun}``.

Every command that writes files also writes a line-oriented ``key=value``
manifest; ``vimpde rerun MANIFEST`` replays it and reproduces the outputs
byte for byte. Exit codes: 0 success, 1 failed check or diverged solver,
2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import imaging
from .diffusion import SpatialOperator
from .errors import DivergenceError, PgmParseError, VimPdeError
from .fd import fd_config_for, fd_solve
from .field import GridField, GridGeometry
from .verify import Tolerances, report_json, run_checks
from .vim import VimConfig, radial_vim_iterate, vim_march, vim_solve

log = logging.getLogger("vimpde")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    params: dict
    seed: int | None = None
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    def dumps(self):
        lines = [f"command={self.command}"]
        lines += [f"param.{k}={json.dumps(v)}" for k, v in self.params.items()]
        if self.seed is not None:
            lines.append(f"seed={self.seed}")
        lines += [f"input.{i}={p}" for i, p in enumerate(self.inputs)]
        lines += [f"output.{i}={p}" for i, p in enumerate(self.outputs)]
        lines += [f"residuals.{k}={','.join(_fmt(float(x)) for x in v)}" for k, v in self.residuals.items()]
        lines += [f"metric.{k}={_fmt(v)}" for k, v in self.metrics.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        command, params, seed = None, {}, None
        inputs, outputs, residuals, metrics = {}, {}, {}, {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"manifest line {lineno} is not key=value: {line!r}")
            head, _, name = key.partition(".")
            try:
                if key == "command":
                    command = value
                elif key == "seed":
                    seed = int(value)
                elif head == "param":
                    params[name] = json.loads(value)
                elif head == "input":
                    inputs[int(name)] = value
                elif head == "output":
                    outputs[int(name)] = value
                elif head == "residuals":
                    residuals[name] = [float(v) for v in value.split(",")] if value else []
                elif head == "metric":
                    metrics[name] = _parse_number(value)
                else:
                    raise UsageError(f"manifest line {lineno} has unknown key {key!r}")
            except ValueError as exc:
                raise UsageError(f"manifest line {lineno}: {exc}") from exc
        if command is None:
            raise UsageError("manifest has no command")
        return cls(command, params, seed, [inputs[i] for i in sorted(inputs)],
                   [outputs[i] for i in sorted(outputs)], residuals, metrics)

    def save(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.dumps())


def _parse_number(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _fmt(x):
    if isinstance(x, float):
        return "inf" if math.isinf(x) else "%.17g" % x
    return str(x)


def _build_operator(p):
    if p["op"] == "pm":
        return SpatialOperator.perona_malik(p["k"], p["diffusivity"], p["eps"])
    if p["op"] == "catte":
        return SpatialOperator.catte(p["k"], p["sigma"], p["diffusivity"], p["eps"])
    return SpatialOperator.curvature(p["eps"])


def _time_tag(t):
    return ("%g" % t).replace(".", "p")


# ---------------------------------------------------------------- commands

def cmd_verify(p):
    tol = Tolerances(p["tol_closed_form"], p["tol_scalar_picard"], p["tol_grid"], p["tol_order_ratio"],
                     p["tol_slope"], p["tol_residual"], p["h"], p["time_nodes"], p["horizon"])
    checks = run_checks(tol)
    ok = all(c.passed for c in checks)
    if p["json"]:
        print(json.dumps({"passed": ok, "checks": report_json(checks)}, indent=2))
    else:
        for c in checks:
            print(c.line())
        print("verification " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_restore(p):
    img = imaging.load_pgm(p["input"])
    u0 = imaging.to_unit(img)
    prefix = p["out_prefix"]
    manifest = RunManifest("restore", p, seed=p["seed"], inputs=[p["input"]])
    if p["noise"] > 0:
        noisy = imaging.from_unit(imaging.add_gaussian_noise(u0, p["noise"], p["seed"]))
        path = f"{prefix}_noisy.pgm"
        imaging.save_pgm(path, noisy)
        manifest.outputs.append(path)
        u0 = imaging.to_unit(noisy)
    if p["reference"]:
        reference = imaging.to_unit(imaging.load_pgm(p["reference"]))
        manifest.inputs.append(p["reference"])
    else:
        reference = imaging.to_unit(img)

    op = _build_operator(p)
    times = sorted(p["times"])
    if p["method"] == "vim":
        cfg = VimConfig(p["iterations"], p["time_nodes"], p["stage_length"])
        stages = vim_march(u0, op, cfg, times)
    else:
        stages = _fd_march(u0, op, times, p["dt"])

    rows = ["t,mse,psnr_db,min,max,mean"]
    for t, u, results in stages:
        out = imaging.from_unit(u)
        path = f"{prefix}_t{_time_tag(t)}.pgm"
        imaging.save_pgm(path, out)
        manifest.outputs.append(path)
        q = imaging.psnr(imaging.to_unit(out), reference)
        rows.append(",".join(_fmt(float(v)) for v in (t, q.mse, q.psnr_db, q.min, q.max, q.mean)))
        tag = _time_tag(t)
        manifest.metrics[f"t{tag}.psnr_db"] = q.psnr_db
        manifest.metrics[f"t{tag}.mse"] = q.mse
        if results:
            manifest.residuals[f"t{tag}"] = results[-1].residuals
            manifest.metrics[f"t{tag}.diverging_windows"] = sum(r.diverging for r in results)
    metrics_path = f"{prefix}_metrics.csv"
    with open(metrics_path, "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    manifest.outputs.append(metrics_path)
    manifest.save(f"{prefix}_manifest.txt")
    for path in manifest.outputs:
        print(path)
    return EXIT_OK


def _fd_march(u0, op, times, dt):
    t_now, u = 0.0, u0
    for t in times:
        if t > t_now:
            u = fd_solve(u, op, fd_config_for(op, u.geometry, t - t_now, dt))
        t_now = t
        yield t, u, []


def cmd_surface(p):
    x0, x1, y0, y1 = p["extent"]
    n = p["grid"]
    geom = GridGeometry(n, n, (x1 - x0) / (n - 1), (y1 - y0) / (n - 1), (x0, y0))
    X, Y = geom.mesh()
    manifest = RunManifest("surface", p, outputs=[p["output"]])
    t = p["t"]
    if p["method"] == "series" or t == 0:
        u = radial_vim_iterate(p["iterations"], X, Y, t)
    else:
        u0 = GridField(geom, np.hypot(X, Y) - 1.0)
        res = vim_solve(u0, SpatialOperator.curvature(), VimConfig(p["iterations"], p["time_nodes"], t))
        manifest.residuals["grid"] = res.residuals
        u = res.solution.data[-1]
    lines = ["x,y,u"]
    for xv, yv, uv in zip(X.ravel(), Y.ravel(), u.ravel()):
        lines.append("%.17g,%.17g,%.17g" % (xv, yv, uv))
    with open(p["output"], "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    manifest.save(_manifest_path(p["output"]))
    print(p["output"])
    return EXIT_OK


def _manifest_path(output):
    stem, _ = os.path.splitext(output)
    return f"{stem}_manifest.txt"


def cmd_synth(p):
    prefix = p["out_prefix"]
    clean = imaging.shapes_image(p["size"])
    outputs = [f"{prefix}_clean.pgm", f"{prefix}_noisy.pgm"]
    imaging.save_pgm(outputs[0], imaging.from_unit(clean))
    imaging.save_pgm(outputs[1], imaging.from_unit(imaging.add_gaussian_noise(clean, p["noise"], p["seed"])))
    RunManifest("synth", p, seed=p["seed"], outputs=outputs).save(f"{prefix}_manifest.txt")
    for path in outputs:
        print(path)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "restore": cmd_restore, "surface": cmd_surface, "synth": cmd_synth}

# params excluded from the manifest; they only steer console output
_VOLATILE = {"command", "verbose", "func"}


def cmd_rerun(args):
    try:
        with open(args.manifest) as fh:
            manifest = RunManifest.loads(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read manifest: {exc}") from exc
    if manifest.command not in COMMANDS:
        raise UsageError(f"manifest names unknown command {manifest.command!r}")
    params = dict(manifest.params)
    if args.out_prefix:
        if "out_prefix" in params:
            params["out_prefix"] = args.out_prefix
        elif "output" in params:
            params["output"] = args.out_prefix + os.path.splitext(params["output"])[1]
    return COMMANDS[manifest.command](params)


# ---------------------------------------------------------------- parsing

def build_parser():
    parser = argparse.ArgumentParser(prog="vimpde", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the curvature-flow verification suite")
    d = Tolerances()
    v.add_argument("--json", action="store_true", help="machine-readable report")
    v.add_argument("--tol-closed-form", type=float, default=d.closed_form)
    v.add_argument("--tol-scalar-picard", type=float, default=d.scalar_picard)
    v.add_argument("--tol-grid", type=float, default=d.grid)
    v.add_argument("--tol-order-ratio", type=float, default=d.order_ratio)
    v.add_argument("--tol-slope", type=float, default=d.slope)
    v.add_argument("--tol-residual", type=float, default=d.residual)
    v.add_argument("--h", type=float, default=d.h, help="grid spacing of the benchmark (default %(default)s)")
    v.add_argument("--time-nodes", type=int, default=d.time_nodes)
    v.add_argument("--horizon", type=float, default=d.horizon)

    r = sub.add_parser("restore", help="restore a PGM image by nonlinear diffusion")
    r.add_argument("input", help="input PGM (P2 or P5, maxval 255)")
    r.add_argument("out_prefix", help="prefix for the output files")
    r.add_argument("--op", choices=["pm", "catte", "curvature"], default="pm")
    r.add_argument("--diffusivity", choices=["rational", "exponential"], default="rational")
    r.add_argument("--k", type=float, default=0.05, help="contrast parameter on [0,1] intensities")
    r.add_argument("--sigma", type=float, default=1.0, help="pre-smoothing width in pixels (catte)")
    r.add_argument("--eps", type=float, default=1e-8, help="gradient regularization")
    r.add_argument("--t", dest="times", type=float, nargs="+", default=[1.0, 10.0, 50.0],
                   help="output times (default: 1 10 50)")
    r.add_argument("--method", choices=["vim", "fd"], default="vim")
    r.add_argument("--iterations", type=int, default=13, help="VIM iterations per window")
    r.add_argument("--time-nodes", type=int, default=16, help="time intervals per VIM window")
    r.add_argument("--stage-length", type=float, default=1.0, help="maximum VIM window length")
    r.add_argument("--dt", type=float, default=None, help="forward-Euler step (default: CFL bound)")
    r.add_argument("--noise", type=float, default=0.0, help="add seeded Gaussian noise first")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--reference", default=None, help="clean PGM for PSNR (default: the input)")

    s = sub.add_parser("surface", help="write the VIM solution of the curvature benchmark as CSV")
    s.add_argument("output", help="output CSV path")
    s.add_argument("--t", type=float, default=10.0)
    s.add_argument("--grid", type=int, default=101, help="points per side")
    s.add_argument("--extent", type=float, nargs=4, default=[2.0, 4.0, 2.0, 4.0],
                   metavar=("X0", "X1", "Y0", "Y1"))
    s.add_argument("--iterations", type=int, default=13)
    s.add_argument("--method", choices=["series", "grid"], default="series",
                   help="mesh-free radial iteration, or the grid solver")
    s.add_argument("--time-nodes", type=int, default=64, help="time intervals (grid method)")

    y = sub.add_parser("synth", help="write the synthetic shapes image and a noisy copy")
    y.add_argument("out_prefix")
    y.add_argument("--size", type=int, default=128)
    y.add_argument("--noise", type=float, default=0.05)
    y.add_argument("--seed", type=int, default=0)

    m = sub.add_parser("rerun", help="replay a manifest")
    m.add_argument("manifest")
    m.add_argument("--out-prefix", default=None, help="redirect outputs")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "rerun":
            return cmd_rerun(args)
        params = {k: v for k, v in vars(args).items() if k not in _VOLATILE}
        return COMMANDS[args.command](params)
    except DivergenceError as exc:
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, PgmParseError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VimPdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
