"""Batch command-line front end.

Every verb computes a table from one validated parameter bundle; ``--sweep``
repeats it over a range of one parameter and concatenates the rows in sweep
order.  Output is CSV (``#`` comment header with tool version and a
parameter echo, then a header row) or JSON (an array of row objects).

Exit status: 0 on success, 1 on a runtime error, 2 on a usage or
configuration error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (
    ConfigParse,
    DegenerateDensity,
    ScatterError,
    TooFewFringes,
    ValidationError,
)
from .kinematics1d import (
    Kinematics1D,
    fold_1d,
    visibility_1d_analytic,
    visibility_1d_numeric,
)
from .kinematics2d import (
    angular_distribution,
    dpstar_dp_in,
    folded_components,
    theta_grid_deg,
    transfer_condition,
    transfer_final_momenta,
    visibility_2d,
    visibility_envelope_2d,
)
from .params import (
    ValidatedParams,
    format_echo,
    params_from_settings,
    parse_assignment,
    read_param_file,
)
from .target import momentum_density

VERBS = (
    "density-dump",
    "scan-1d",
    "visibility-1d",
    "angular",
    "visibility-2d",
    "transfer-condition",
    "oracle",
)
SWEEP_KEYS = ("mass_ratio", "dp_over_p", "alpha", "theta_in_deg")
ORACLES = ("elastic-1d", "pstar", "density-dft", "transfer", "conservation", "mc-angular")
DEFAULT_SEED = 1234


@dataclass(frozen=True)
class Sweep:
    key: str
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    verb: str
    params: ValidatedParams
    sweep: Sweep | None = None
    output: str | None = None
    fmt: str = "csv"
    seed: int | None = None
    options: dict = field(default_factory=dict)


def parse_sweep(text: str) -> Sweep:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigParse(f"sweep must be key:from:to:steps, got {text!r}")
    key, lo, hi, steps = parts
    if key not in SWEEP_KEYS:
        raise ConfigParse(f"sweep key must be one of {', '.join(SWEEP_KEYS)}, got {key!r}")
    try:
        lo_f, hi_f, n = float(lo), float(hi), int(steps)
    except ValueError:
        raise ConfigParse(f"malformed sweep range in {text!r}") from None
    if n < 2:
        raise ConfigParse(f"sweep needs at least 2 steps, got {n}")
    return Sweep(key, lo_f, hi_f, n)


def apply_sweep_value(params: ValidatedParams, key: str, value: float) -> ValidatedParams:
    settings = params.as_settings()
    if key == "mass_ratio":
        settings["mass_target"] = value * settings["mass_probe"]
    else:
        settings[key] = float(value)
    return params_from_settings(settings)


# ---------------------------------------------------------------------------
# verbs: each returns (columns, rows) for one parameter bundle


def _nan_on(errors, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except errors:
        return math.nan


def verb_density_dump(p: ValidatedParams, opts):
    t = p.target
    P = np.linspace(-opts["half_widths"] / t.w, opts["half_widths"] / t.w, opts["points"])
    rho = momentum_density(t, P, opts["cosine_approx"])
    return ("P", "density"), list(zip(P, rho))


def verb_scan_1d(p: ValidatedParams, opts):
    dist = fold_1d(Kinematics1D(p.masses), p.target, p.beam, cosine_approx=opts["cosine_approx"],
                   epsilon=p.coupling.epsilon)
    return ("p_fin", "density"), list(zip(dist.grid, dist.density))


def verb_visibility_1d(p: ValidatedParams, opts):
    k = Kinematics1D(p.masses)
    analytic = visibility_1d_analytic(k, p.target, p.beam).visibility

    def numeric():
        dist = fold_1d(k, p.target, p.beam, cosine_approx=opts["cosine_approx"])
        return visibility_1d_numeric(dist).visibility

    return ("dp_over_p", "analytic", "numeric"), [
        (p.beam.dp_in / p.beam.p_in, analytic, _nan_on(TooFewFringes, numeric))
    ]


def verb_angular(p: ValidatedParams, opts):
    degs = theta_grid_deg(p.beam.theta_in, opts["theta_start"], opts["theta_stop"],
                          opts["theta_step"], opts["forward_cut_deg"])
    thetas = np.radians(degs)
    comps = folded_components(p.masses, p.target, p.beam, thetas, p.coupling.epsilon)
    curves = [
        angular_distribution(p.masses, p.target.with_alpha(a), p.beam, thetas,
                             p.coupling.epsilon, components=comps).density
        for a in (0.0, math.pi)
    ]
    return ("theta_fin_deg", "density_alpha0", "density_alphapi"), list(zip(degs, *curves))


def verb_visibility_2d(p: ValidatedParams, opts):
    th = math.radians(opts["theta_fin"])
    vis = visibility_2d(p.masses, p.target, p.beam, th, p.coupling.epsilon)
    env = _nan_on(DegenerateDensity, lambda: visibility_envelope_2d(p.masses, p.target, p.beam, th).visibility)
    return ("mass_ratio", "dp_over_p", "theta_fin_deg", "visibility", "best_alpha", "envelope"), [
        (p.masses.ratio(), p.beam.dp_in / p.beam.p_in, opts["theta_fin"], vis.visibility, vis.best_alpha, env)
    ]


def verb_transfer_condition(p: ValidatedParams, opts):
    th = math.radians(opts["theta_fin"])
    P_transfer = transfer_condition(p.masses, p.beam)
    rows = []
    roots = transfer_final_momenta(p.masses, p.beam, th)
    for pf in roots or [math.nan]:
        if math.isnan(pf):
            rows.append((P_transfer, opts["theta_fin"], math.nan, math.nan))
            continue
        pfv = (pf * math.cos(th), pf * math.sin(th))
        slope = dpstar_dp_in(p.masses, p.beam.p_in, p.beam.theta_in, pfv)
        rows.append((P_transfer, opts["theta_fin"], pf, slope))
    return ("P_fin_transfer", "theta_fin_deg", "p_fin", "dpstar_dp_in"), rows


def verb_oracle(p: ValidatedParams, opts):
    from . import oracles

    names = ORACLES if opts["oracle"] == "all" else (opts["oracle"],)
    reports = [oracles.run_named(n, p, opts["seed"], opts["events"]) for n in names]
    return ("name", "value", "reference", "rel_err", "samples", "seed"), [
        (r.name, r.value, r.reference, r.rel_err, r.samples, "" if r.seed is None else r.seed)
        for r in reports
    ]


VERB_FUNCS = {
    "density-dump": verb_density_dump,
    "scan-1d": verb_scan_1d,
    "visibility-1d": verb_visibility_1d,
    "angular": verb_angular,
    "visibility-2d": verb_visibility_2d,
    "transfer-condition": verb_transfer_condition,
    "oracle": verb_oracle,
}


def _run_point(verb, settings, opts):
    return VERB_FUNCS[verb](params_from_settings(settings), opts)


def compute_table(config: RunConfig, jobs: int = 1):
    """Columns and rows for the whole run, in deterministic sweep order."""
    opts = dict(config.options, seed=DEFAULT_SEED if config.seed is None else config.seed)
    if config.sweep is None:
        return VERB_FUNCS[config.verb](config.params, opts)
    values = config.sweep.values()
    settings = [apply_sweep_value(config.params, config.sweep.key, v).as_settings() for v in values]
    args = [(config.verb, s, opts) for s in settings]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point, *zip(*args)))
    else:
        results = [_run_point(*a) for a in args]
    columns = results[0][0]
    prepend = config.sweep.key not in columns
    rows = []
    for v, (_, part) in zip(values, results):
        rows.extend(((v,) + tuple(r)) if prepend else tuple(r) for r in part)
    return ((config.sweep.key,) + tuple(columns)) if prepend else columns, rows


# ---------------------------------------------------------------------------
# output


def _cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _json_cell(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def render(config: RunConfig, columns, rows) -> str:
    if config.fmt == "json":
        table = [{c: _json_cell(v) for c, v in zip(columns, r)} for r in rows]
        return json.dumps(table, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# superscatter {__version__} verb={config.verb}\n")
    buf.write(f"# params: {format_echo(config.params)}\n")
    if config.sweep is not None:
        s = config.sweep
        buf.write(f"# sweep: {s.key}:{s.start!r}:{s.stop!r}:{s.steps}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_cell(x) for x in r) + "\n")
    return buf.getvalue()


def data_section(text: str) -> str:
    """CSV text without its ``#`` comment lines."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigParse(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="superscatter", description=__doc__.splitlines()[0])
    parser.add_argument("verb", help="one of: " + ", ".join(VERBS))
    parser.add_argument("--config", help="key = value parameter file")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter (repeatable)")
    parser.add_argument("--output", help="output file (default: stdout)")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, help=f"RNG seed for oracle runs (default {DEFAULT_SEED})")
    parser.add_argument("--sweep", help="key:from:to:steps with key in " + ", ".join(SWEEP_KEYS))
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--cosine-approx", action="store_true",
                        help="use the bare 1 + cos fringe factor instead of the full density")
    parser.add_argument("--theta-fin", type=float, default=60.0, help="final angle in degrees")
    parser.add_argument("--theta-start", type=float, default=10.0)
    parser.add_argument("--theta-stop", type=float, default=170.0)
    parser.add_argument("--theta-step", type=float, default=0.5)
    parser.add_argument("--forward-cut-deg", type=float, default=1.0,
                        help="half-width of the excluded window around the incidence angle")
    parser.add_argument("--points", type=int, default=2001, help="density-dump sample count")
    parser.add_argument("--half-widths", type=float, default=6.0,
                        help="density-dump range in envelope widths")
    parser.add_argument("--oracle", choices=ORACLES + ("all",), default="all")
    parser.add_argument("--events", type=int, default=100_000, help="Monte-Carlo events per oracle")
    return parser


def parse_config(argv) -> tuple[RunConfig, int]:
    args = build_parser().parse_args(argv)
    if args.verb not in VERBS:
        raise ConfigParse(f"unknown verb {args.verb!r}; expected one of {', '.join(VERBS)}")
    settings = read_param_file(args.config) if args.config else {}
    for item in args.overrides:
        key, value = parse_assignment(item)
        settings[key] = value
    params = params_from_settings(settings)
    sweep = parse_sweep(args.sweep) if args.sweep else None
    if sweep is not None:
        for v in sweep.values():
            apply_sweep_value(params, sweep.key, v)
    if args.events < 1 or args.points < 2 or args.jobs < 1:
        raise ConfigParse("--events, --points and --jobs must be positive (--points >= 2)")
    options = {
        "cosine_approx": args.cosine_approx,
        "theta_fin": args.theta_fin,
        "theta_start": args.theta_start,
        "theta_stop": args.theta_stop,
        "theta_step": args.theta_step,
        "forward_cut_deg": args.forward_cut_deg,
        "points": args.points,
        "half_widths": args.half_widths,
        "oracle": args.oracle,
        "events": args.events,
    }
    return RunConfig(args.verb, params, sweep, args.output, args.fmt, args.seed, options), args.jobs


def run(config: RunConfig, jobs: int = 1) -> str:
    columns, rows = compute_table(config, jobs)
    text = render(config, columns, rows)
    if config.output:
        with open(config.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def main(argv=None) -> int:
    try:
        config, jobs = parse_config(sys.argv[1:] if argv is None else argv)
    except (ConfigParse, ValidationError) as exc:
        print(f"superscatter: error: {exc}", file=sys.stderr)
        return 2
    try:
        run(config, jobs)
    except ValidationError as exc:
        print(f"superscatter: error: {exc}", file=sys.stderr)
        return 2
    except (ScatterError, ArithmeticError, OSError, ValueError) as exc:
        print(f"superscatter: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
