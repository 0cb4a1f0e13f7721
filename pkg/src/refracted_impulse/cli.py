"""Command-line interface.

Every subcommand reads a JSON problem file (``--config``) and writes CSV or
JSON.  CSV files start with one ``#``-prefixed JSON line holding the run
manifest; JSON outputs carry it under the ``"manifest"`` key.  Numbers are
written with 17 significant digits, so outputs are byte-identical for a
given configuration and seed.  ``replay FILE`` re-runs the command recorded
in an output's manifest.

Exit status: 0 on success, 1 for usage or validation errors, 2 when a
numerical procedure fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, NonConvergenceError, ValidationError
from .models import ProblemSpec, load_problem, validate
from .optimizer import optimize, sweep, verify_optimality
from .parisian import breakpoints, segment_of, theta, theta_basis, theta_deriv, theta_jumps, theta_second
from .scale import W_q, W_q_deriv, W_q_deriv_0plus, w_refracted, w_refracted_deriv
from .simulator import SimConfig, estimate_exit_laplace, estimate_value
from .valuation import Policy, exit_laplace, hjb_residual, value_curve, value_optimal

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NONCONVERGENCE = 2

# curves drawn per sensitivity panel; the source figures do not list them
PANEL_VALUES = {
    "brownian": {"m": (0.01, 0.05, 0.2), "delta": (0.0, 0.03, 0.1), "b": (1.0, 3.0, 5.0), "l": (2.0, 4.0, 6.0)},
    "cramer_lundberg": {"m": (0.1, 0.5, 2.0), "delta": (0.0, 0.15, 0.25), "b": (3.0, 6.0, 8.0),
                        "l": (2.0, 4.0, 6.0)},
}
# swept ranges of the optimal-pair panels (beta and l start above 0, where they are defined)
SWEEP_RANGES = {
    "brownian": {"beta": (0.05, 2.0), "delta": (0.0, 0.2), "b": (0.0, 6.0), "l": (0.5, 6.0)},
    "cramer_lundberg": {"beta": (0.05, 2.0), "delta": (0.0, 0.25), "b": (0.0, 7.0), "l": (0.5, 7.0)},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as exit status 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# formatting helpers


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render_csv(manifest: dict, header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_jsonable(manifest), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def render_json(manifest: dict, payload: dict) -> str:
    return json.dumps(_jsonable({"manifest": manifest, **payload}), indent=2, sort_keys=True) + "\n"


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(text)


def read_manifest(path: str | Path) -> dict:
    """Manifest embedded in a CSV header line or a JSON output."""
    text = Path(path).read_text()
    if text.startswith("# "):
        return json.loads(text.split("\n", 1)[0][2:])
    return json.loads(text)["manifest"]


# ---------------------------------------------------------------------------
# argument parsing


def parse_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise UsageError(f"grid must look like a:b:n, got {text!r}") from exc
    if n < 1 or not (math.isfinite(a) and math.isfinite(b)):
        raise UsageError(f"grid needs finite ends and n >= 1, got {text!r}")
    return np.linspace(a, b, n)


def parse_policy(text: str):
    if text == "optimal":
        return "optimal"
    try:
        c1, c2 = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise UsageError(f"policy must be 'c1,c2' or 'optimal', got {text!r}") from exc
    return (c1, c2)


def _common(p: argparse.ArgumentParser, out_help: str = "output file (default: stdout)") -> None:
    p.add_argument("--config", required=True, help="JSON problem file")
    p.add_argument("--out", help=out_help)
    p.add_argument("--quiet", action="store_true", help="suppress the summary on stderr")


def _sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="64-bit seed")
    p.add_argument("--paths", type=int, default=100_000, help="number of paths")
    p.add_argument("--estimator", choices=("clock", "killing"), default="clock")
    p.add_argument("--dt", type=float, default=2.5e-3, help="Euler step (Brownian only)")
    p.add_argument("--no-correction", action="store_true",
                   help="monitor the raw levels in the Euler scheme")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="refracted-impulse", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a problem file")
    _common(p)

    p = sub.add_parser("scale-eval", help="scale functions on a grid")
    _common(p)
    p.add_argument("--q", type=float, help="rate (default: the problem's q)")
    p.add_argument("--process", choices=("X", "Y"), default="X")
    p.add_argument("--a", type=float, help="lower level of the refracted scale function (default: -l)")
    p.add_argument("--grid", type=parse_grid, default="0:12:121")

    p = sub.add_parser("theta-eval", help="theta and its derivatives on a grid")
    _common(p)
    p.add_argument("--grid", type=parse_grid)

    p = sub.add_parser("value", help="value of a policy on a grid")
    _common(p)
    p.add_argument("--policy", type=parse_policy, default="optimal")
    p.add_argument("--grid", type=parse_grid)

    p = sub.add_parser("optimize", help="optimal impulse policy")
    _common(p)
    p.add_argument("--verify", action="store_true", help="also run the optimality checks")

    p = sub.add_parser("hjb-check", help="HJB residual of a policy value on a grid")
    _common(p)
    p.add_argument("--policy", type=parse_policy, default="optimal")
    p.add_argument("--grid", type=parse_grid)

    p = sub.add_parser("simulate", help="one Monte Carlo estimate")
    _common(p)
    _sim_flags(p)
    p.add_argument("--what", choices=("value", "exit"), default="value")
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--policy", type=parse_policy, default="optimal")
    p.add_argument("--c", type=float, help="exit level (with --what exit)")

    p = sub.add_parser("compare", help="Monte Carlo vs closed form at several starting points")
    _common(p)
    _sim_flags(p)
    p.add_argument("--what", choices=("value", "exit"), default="value")
    p.add_argument("--policy", type=parse_policy, default="optimal")
    p.add_argument("--c", type=float, help="exit level (default: optimal c2)")
    p.add_argument("--grid", type=parse_grid, help="starting points (default: 6 points in [-l/2, c])")

    p = sub.add_parser("sweep", help="optimal policy across a parameter range")
    _common(p)
    p.add_argument("--param", required=True, choices=("beta", "delta", "b", "l", "m", "q"))
    p.add_argument("--range", dest="range_", type=parse_grid, required=True, metavar="a:b:n")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("figure-data", help="CSV bundle for the sensitivity and optimal-pair figures")
    _common(p, out_help="output directory")
    p.add_argument("--points", type=int, default=13, help="values per optimal-pair sweep")
    p.add_argument("--grid", type=parse_grid, help="x grid of the theta panels")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("replay", help="re-run the command recorded in an output file")
    p.add_argument("source", help="CSV or JSON output carrying a manifest")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--quiet", action="store_true")
    return parser


# ---------------------------------------------------------------------------
# manifest


_RECORDED = ("q", "process", "a", "grid", "policy", "verify", "seed", "paths", "estimator", "dt",
             "no_correction", "what", "x0", "c", "param", "range_", "points")


def _arg_record(args) -> dict:
    rec = {}
    for k in _RECORDED:
        if hasattr(args, k):
            v = getattr(args, k)
            if isinstance(v, np.ndarray):
                v = f"{fmt(v[0])}:{fmt(v[-1])}:{v.size}"
            elif isinstance(v, tuple):
                v = ",".join(fmt(t) for t in v)
            rec[k] = v
    return rec


def manifest(args, spec: ProblemSpec, outputs: list[str] | None = None) -> dict:
    """Run manifest.  Wall-clock duration is reported on stderr only, so the
    files themselves stay byte-identical across runs."""
    seed = getattr(args, "seed", None)
    if outputs is None:
        outputs = getattr(args, "recorded_outputs", None) or ([args.out] if args.out else ["-"])
    return {
        "command": args.command,
        "args": _arg_record(args),
        "problem": spec.to_dict(),
        "version": __version__,
        "seeds": [] if seed is None else [seed],
        "outputs": outputs,
    }


def _resolve_policy(tb, policy):
    if policy == "optimal":
        return optimize(tb).policy
    return Policy(*policy)


def _default_grid(spec: ProblemSpec, hi: float, n: int = 301) -> np.ndarray:
    return np.linspace(-spec.l, hi, n)


def _sim_config(args) -> SimConfig:
    return SimConfig(n_paths=args.paths, seed=args.seed, dt=args.dt, estimator=args.estimator,
                     continuity_correction=not args.no_correction)


# ---------------------------------------------------------------------------
# subcommands; each returns (text, summary)


def cmd_validate(args, spec):
    report = validate(spec)
    payload = {"ok": report.ok, "violations": [{"rule": v.rule, "message": v.message} for v in report.violations]}
    return render_json(manifest(args, spec), payload), payload


def cmd_scale_eval(args, spec):
    q = spec.q if args.q is None else args.q
    a = -spec.l if args.a is None else args.a
    x = args.grid
    W = np.asarray(W_q(spec, q, x, args.process), dtype=float)
    dW = np.zeros_like(x)
    pos = x > 0
    if np.any(pos):
        dW[pos] = W_q_deriv(spec, q, x[pos], args.process)
    dW[x == 0] = W_q_deriv_0plus(spec, q, args.process)
    wr = np.asarray(w_refracted(spec, q, x, a), dtype=float)
    above = x > a
    dwr = np.zeros_like(x)
    if np.any(above):
        dwr[above] = w_refracted_deriv(spec, q, x[above], a, side="right")
    dwr[x == a] = np.nan
    rows = zip(x, W, dW, wr, dwr)
    text = render_csv(manifest(args, spec), ["x", "W", "Wprime", "wrefr", "wrefr_prime"], rows)
    return text, {"rows": x.size, "q": q, "a": a}


def cmd_theta_eval(args, spec):
    tb = theta_basis(spec)
    x = args.grid if args.grid is not None else _default_grid(spec, spec.b + 3 * spec.l)
    if np.any(x < -spec.l):
        raise DomainError(f"grid must start at or above -l = {-spec.l}")
    th = np.asarray(theta(tb, x))
    d1 = np.asarray(theta_deriv(tb, x, side="right"))
    d2 = np.asarray(theta_second(tb, x, side="right"))
    seg = segment_of(tb, x)
    rows = zip(x, th, d1, d2, seg)
    text = render_csv(manifest(args, spec), ["x", "theta", "theta_prime", "theta_second", "segment"], rows)
    return text, {"rows": x.size}


def cmd_value(args, spec):
    tb = theta_basis(spec)
    pol = _resolve_policy(tb, args.policy)
    x = args.grid if args.grid is not None else _default_grid(spec, pol.c2 + spec.l)
    curve = value_curve(tb, pol)
    V = np.asarray(curve.value(x))
    dV = np.asarray(curve.deriv(x, side="right"))
    rows = [(xi, pol.c1, pol.c2, v, d) for xi, v, d in zip(x, V, dV)]
    text = render_csv(manifest(args, spec), ["x", "c1", "c2", "V", "V_prime"], rows)
    return text, {"c1": pol.c1, "c2": pol.c2, "rows": x.size}


def cmd_optimize(args, spec):
    tb = theta_basis(spec)
    res = optimize(tb)
    payload = {"result": res.to_dict()}
    if args.verify:
        rep = verify_optimality(tb, res)
        payload["verification"] = {
            "ok": rep.ok, "monotone_ok": rep.monotone_ok, "hjb_ok": rep.hjb_ok, "random_ok": rep.random_ok,
            "max_hjb_inside": rep.max_hjb_inside, "max_hjb_outside": rep.max_hjb_outside,
            "min_random_gap": rep.min_random_gap,
        }
    return render_json(manifest(args, spec), payload), payload["result"]


def cmd_hjb_check(args, spec):
    tb = theta_basis(spec)
    pol = _resolve_policy(tb, args.policy)
    curve = value_curve(tb, pol)
    x = args.grid if args.grid is not None else np.linspace(-spec.l, pol.c2 + 3 * spec.l, 241)
    kinks = (0.0, spec.b, pol.c2)
    rows = []
    worst_in = worst_out = -math.inf
    for xi in x:
        if xi <= -spec.l or any(abs(xi - k) < 1e-3 for k in kinks):
            continue
        r = hjb_residual(tb, curve, xi)
        V = float(curve.value(xi))
        if xi < pol.c2:
            region = "continuation"
            ok = abs(r) < 1e-6 * (spec.q * V + 1.0)
            worst_in = max(worst_in, abs(r))
        else:
            region = "intervention"
            ok = r <= 1e-6
            worst_out = max(worst_out, r)
        rows.append((xi, V, r, region, ok))
    text = render_csv(manifest(args, spec), ["x", "V", "residual", "region", "ok"], rows)
    return text, {"c1": pol.c1, "c2": pol.c2, "max_abs_inside": worst_in, "max_outside": worst_out,
                  "all_ok": all(r[-1] for r in rows)}


def _estimate(spec, tb, what, x0, pol, c, config):
    if what == "value":
        est = estimate_value(spec, pol, x0, config)
        exact = float(value_curve(tb, pol).value(x0))
    else:
        est = estimate_exit_laplace(spec, x0, c, config)
        exact = float(exit_laplace(tb, x0, c))
    return est, exact


_SIM_HEADER = ["x0", "c1", "c2", "c", "mean", "stderr", "exact", "z_score", "n_paths", "truncation_fraction",
               "estimator", "seed"]


def _sim_row(x0, pol, c, est, exact):
    c1, c2 = (pol.c1, pol.c2) if pol is not None else (math.nan, math.nan)
    return (x0, c1, c2, c if c is not None else math.nan, est.mean, est.stderr, exact, est.z_score(exact),
            est.n_effective, est.truncation_fraction, est.estimator, est.seed)


def _sim_target(args, tb, spec):
    if args.what == "value":
        return _resolve_policy(tb, args.policy), None
    c = args.c if args.c is not None else optimize(tb).policy.c2
    return None, c


def cmd_simulate(args, spec):
    tb = theta_basis(spec)
    pol, c = _sim_target(args, tb, spec)
    est, exact = _estimate(spec, tb, args.what, args.x0, pol, c, _sim_config(args))
    rows = [_sim_row(args.x0, pol, c, est, exact)]
    return render_csv(manifest(args, spec), _SIM_HEADER, rows), {"mean": est.mean, "stderr": est.stderr,
                                                                  "z_score": est.z_score(exact)}


def cmd_compare(args, spec):
    tb = theta_basis(spec)
    pol, c = _sim_target(args, tb, spec)
    top = pol.c2 if pol is not None else c
    x0s = args.grid if args.grid is not None else np.linspace(-spec.l / 2, top, 6)
    base = _sim_config(args)
    rows = []
    for i, x0 in enumerate(x0s):
        # distinct streams per point, reproducible from the base seed
        config = SimConfig(n_paths=base.n_paths, seed=(base.seed + i) % 2**64, dt=base.dt,
                           estimator=base.estimator, continuity_correction=base.continuity_correction)
        est, exact = _estimate(spec, tb, args.what, float(x0), pol, c, config)
        rows.append(_sim_row(float(x0), pol, c, est, exact))
    zs = [abs(r[7]) for r in rows]
    return render_csv(manifest(args, spec), _SIM_HEADER, rows), {"points": len(rows), "max_abs_z": max(zs)}


_SWEEP_HEADER = ["param", "value", "c1", "c2", "H", "case", "eps2", "error"]


def _sweep_chunk(spec_dict: dict, param: str, values: list[float]):
    return sweep(ProblemSpec.from_dict(spec_dict), param, values)


def _parallel_sweep(spec: ProblemSpec, param: str, values, jobs: int):
    values = [float(v) for v in values]
    if jobs <= 1 or len(values) < 2:
        return sweep(spec, param, values)
    chunks = [values[i::jobs] for i in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        parts = list(ex.map(_sweep_chunk, [spec.to_dict()] * jobs, [param] * jobs, chunks))
    rows = {r.value: r for part in parts for r in part}
    return [rows[v] for v in values]


def _sweep_rows(rows):
    return [(r.param, r.value, r.c1, r.c2, r.H, r.case, r.eps2, r.error) for r in rows]


def cmd_sweep(args, spec):
    rows = _parallel_sweep(spec, args.param, args.range_, args.jobs)
    text = render_csv(manifest(args, spec), _SWEEP_HEADER, _sweep_rows(rows))
    return text, {"rows": len(rows), "failed": sum(r.case == "failed" for r in rows)}


def _theta_panel(spec: ProblemSpec, param: str, values, x: np.ndarray):
    rows = []
    for v in values:
        s = spec.with_params(**{param: v})
        validate(s).raise_if_invalid()
        tb = theta_basis(s)
        xs = x[x >= -s.l]
        th = np.asarray(theta(tb, xs))
        d1 = np.asarray(theta_deriv(tb, xs, side="right"))
        rows.extend((param, v, xi, t, d) for xi, t, d in zip(xs, th, d1))
    return rows


def figure_data(spec: ProblemSpec, out_dir: str | Path, args, points: int = 13, grid=None, jobs: int = 1):
    """Write the CSV bundle; returns ``(written, failures)``.

    Files: ``theta_<param>.csv`` (theta and theta' curves per panel value),
    ``breakpoints.csv``, ``jumps.csv`` (theta' discontinuities) and
    ``optimal_<param>.csv`` (optimal pairs across the swept range).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = spec.model.kind
    x = grid if grid is not None else np.linspace(-spec.l, spec.b + 2 * spec.l, 301)
    written, failures = [], {}

    def write(name, header, rows):
        path = out_dir / name
        # recorded relative to the bundle directory so a replayed bundle is identical
        path.write_text(render_csv(manifest(args, spec, outputs=[name]), header, rows))
        written.append(str(path))

    for param, values in PANEL_VALUES[kind].items():
        try:
            write(f"theta_{param}.csv", ["param", "value", "x", "theta", "theta_prime"],
                  _theta_panel(spec, param, values, x))
        except Exception as exc:  # noqa: BLE001 - panels fail independently
            failures[f"theta_{param}"] = str(exc)

    try:
        bp_rows, jump_rows = [], []
        for param, values in PANEL_VALUES[kind].items():
            for v in values:
                s = spec.with_params(**{param: v})
                tb = theta_basis(s)
                bp = breakpoints(tb)
                bp_rows.append((param, v, bp.eps1, bp.eps2, bp.zeta1, bp.zeta2,
                                math.nan if bp.zeta3 is None else bp.zeta3, bp.used_fallback))
                for at, size in theta_jumps(tb).items():
                    jump_rows.append((param, v, at, float(theta_deriv(tb, at, side="left")),
                                      float(theta_deriv(tb, at, side="right")), size))
        write("breakpoints.csv", ["param", "value", "eps1", "eps2", "zeta1", "zeta2", "zeta3", "fallback"], bp_rows)
        write("jumps.csv", ["param", "value", "x", "left", "right", "jump"], jump_rows)
    except Exception as exc:  # noqa: BLE001
        failures["breakpoints"] = str(exc)

    for param, (lo, hi) in SWEEP_RANGES[kind].items():
        try:
            rows = _parallel_sweep(spec, param, np.linspace(lo, hi, points), jobs)
            write(f"optimal_{param}.csv", _SWEEP_HEADER, _sweep_rows(rows))
        except Exception as exc:  # noqa: BLE001
            failures[f"optimal_{param}"] = str(exc)
    return written, failures


def cmd_figure_data(args, spec):
    if not args.out:
        raise UsageError("figure-data needs --out DIR")
    written, failures = figure_data(spec, args.out, args, points=args.points, grid=args.grid, jobs=args.jobs)
    for name, msg in failures.items():
        log.error("panel %s failed: %s", name, msg)
    summary = {"written": len(written), "failed": sorted(failures)}
    if failures:
        raise NonConvergenceError(f"{len(failures)} panel(s) failed: {sorted(failures)}")
    return None, summary


COMMANDS = {
    "validate": cmd_validate,
    "scale-eval": cmd_scale_eval,
    "theta-eval": cmd_theta_eval,
    "value": cmd_value,
    "optimize": cmd_optimize,
    "hjb-check": cmd_hjb_check,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "figure-data": cmd_figure_data,
}


# ---------------------------------------------------------------------------
# entry point


def _replay_argv(source: str, out: str | None) -> tuple[list[str], ProblemSpec, list]:
    m = read_manifest(source)
    argv = [m["command"]]
    for k, v in m["args"].items():
        if v is None or v is False:
            continue
        flag = "--" + k.rstrip("_").replace("_", "-")
        if v is True:
            argv.append(flag)
        else:
            argv.append(f"{flag}={v}")
    if out:
        argv.append(f"--out={out}")
    return argv, ProblemSpec.from_dict(m["problem"]), m["outputs"]


def _run(args, spec: ProblemSpec) -> int:
    t0 = time.perf_counter()
    report = validate(spec)
    if args.command == "validate":
        text, summary = cmd_validate(args, spec)
        emit(text, args.out)
        for v in report.violations:
            print(f"invalid: rule {v.rule}: {v.message}", file=sys.stderr)
        return EXIT_OK if report.ok else EXIT_INVALID
    report.raise_if_invalid()
    text, summary = COMMANDS[args.command](args, spec)
    if text is not None:
        emit(text, args.out)
    if not args.quiet:
        summary = dict(summary, seconds=round(time.perf_counter() - t0, 3))
        print(json.dumps(_jsonable(summary), sort_keys=True), file=sys.stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            rargv, spec, recorded = _replay_argv(args.source, args.out)
            # the recorded problem replaces --config; the manifest keeps the
            # recorded output names so the replayed file is identical
            args = parser.parse_args(rargv[:1] + ["--config", "-"] + rargv[1:] + (["--quiet"] if args.quiet else []))
            args.recorded_outputs = recorded
        else:
            try:
                spec = load_problem(args.config)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read problem file {args.config}: {exc}") from exc
        return _run(args, spec)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValidationError as exc:
        for v in exc.violations:
            print(f"invalid: rule {v.rule}: {v.message}", file=sys.stderr)
        return EXIT_INVALID
    except NonConvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
