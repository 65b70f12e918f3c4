"""Command-line front end.

Subcommands: ``eval``, ``report``, ``rulings``, ``rigidity``, ``verify`` and
``corpus``.  Structured output goes to stdout and diagnostics to stderr.
Exit codes: 0 success or consistent verdict, 1 hypothesis failure, 2 usage
or parse error, 3 numerical evaluation error.

Floats are printed with ``repr``, the shortest string that round-trips, so
identical argv gives byte-identical output.
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field as dc_field, fields

import numpy as np

from . import corpus as built_in
from .affinity import RulingError, hessian_kernel, lemma_report, trace_ruling
from .curvature import QUANTITIES, SIGNATURES, curvature_report
from .expr import ParseError
from .field import (
    DomainError,
    EvaluationError,
    directional_jet,
    grid_field,
    jet2_at,
    parse_field,
    read_grid_csv,
)
from .rigidity import DEFAULT_RADII, rigidity_verdict
from .tolerances import DEFAULT, Tolerances
from .verify import SUITES, run_suite

OK, HYPOTHESIS, USAGE, EVALUATION = 0, 1, 2, 3
FORMATS = ("json", "csv", "polyline")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a run depends on; ``--config`` files use the same keys."""

    field: str = None
    grid: str = None
    corpus: str = None
    dim: int = None
    box: list = None
    tolerances: dict = dc_field(default_factory=dict)
    radii: list = None
    center: list = None
    samples: int = 4096
    sphere_samples: int = 512
    seed: int = None
    format: str = "json"

    def validate(self, sampled=False):
        sources = [s for s in (self.field, self.grid, self.corpus) if s is not None]
        if len(sources) != 1:
            raise UsageError("give exactly one of --field, --grid or --corpus")
        if self.field is not None and self.dim is None:
            raise UsageError("--field needs --dim")
        if self.format not in FORMATS:
            raise UsageError(f"--format must be one of {FORMATS}")
        if self.radii is not None:
            r = [float(v) for v in self.radii]
            if not r or r[0] <= 0 or any(b <= a for a, b in zip(r, r[1:])):
                raise UsageError("radius schedule must be positive and strictly increasing")
        if sampled and self.seed is None:
            raise UsageError("--seed is required for sampled computations")
        try:
            self.tol()
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def tol(self):
        return DEFAULT.override(**self.tolerances) if self.tolerances else Tolerances()

    def build_field(self):
        if self.corpus is not None:
            try:
                f = built_in.corpus_by_name(self.corpus)
            except KeyError as exc:
                raise UsageError(exc.args[0]) from None
        elif self.grid is not None:
            f = grid_field(read_grid_csv(self.grid), name=self.grid)
        else:
            f = parse_field(self.field, self.dim)
        if self.box is not None:
            f = f.restrict(*self.box)
        return f


# -- parsing helpers ------------------------------------------------------------


def _vector(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _box(text):
    """``lo,hi`` for a cube or ``lo1,..,lon:hi1,..,hin``."""
    if ":" in text:
        lo, hi = text.split(":", 1)
        return [_vector(lo), _vector(hi)]
    v = _vector(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError("--box takes 'lo,hi' or 'lo1,..:hi1,..'")
    return v


def _tol_pair(text):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"--tol expects name=value, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value in {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    src = common.add_argument_group("field source")
    src.add_argument("--field", help="expression in x1..xn, e.g. '0.5*sqrt(x1^2+1)'")
    src.add_argument("--grid", help="grid CSV file")
    src.add_argument("--corpus", help="name of a built-in field")
    common.add_argument("--dim", type=int)
    common.add_argument("--box", type=_box, help="'lo,hi' or 'lo1,..:hi1,..'")
    common.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--config", help="JSON run configuration; its keys override flags")

    parser = _Parser(prog="gaussflat", description="Geometry of graphs of degenerate convex fields.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="value, gradient, Hessian, or a directional jet")
    p.add_argument("--point", type=_vector, required=True)
    p.add_argument("--direction", type=_vector)
    p.add_argument("--degree", type=int, default=4)

    p = sub.add_parser("report", parents=[common], help="curvature report at a point")
    p.add_argument("--point", type=_vector, required=True)
    p.add_argument("--signature", choices=SIGNATURES, default="euclidean")

    p = sub.add_parser("rulings", parents=[common], help="trace rulings through points")
    p.add_argument("--point", type=_vector, action="append", required=True)
    p.add_argument("--direction", type=_vector, help="default: every Hessian-kernel direction")
    p.add_argument("--eta", type=_vector, help="also evaluate the ruling-point residuals")

    p = sub.add_parser("rigidity", parents=[common], help="decay profile and rigidity verdict")
    p.add_argument("--quantity", choices=QUANTITIES, required=True)
    p.add_argument("--radii", type=_vector)
    p.add_argument("--center", type=_vector)
    p.add_argument("--samples", type=int)
    p.add_argument("--sphere-samples", type=int)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--trials", type=int)

    sub.add_parser("corpus", parents=[common], help="list built-in fields")
    return parser


def _config(args):
    cfg = RunConfig(
        field=args.field,
        grid=args.grid,
        corpus=args.corpus,
        dim=args.dim,
        box=args.box,
        tolerances=dict(args.tol),
        seed=args.seed,
        format=args.format or "json",
    )
    for name in ("radii", "center", "samples", "sphere_samples"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key, value in doc.items():
            setattr(cfg, key, value)
    return cfg


# -- output -----------------------------------------------------------------------


def _clean(obj):
    """Make an object JSON-safe: numpy to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def _emit_json(doc, out):
    out.write(json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n")


def _emit_csv(rows, out):
    writer = csv.writer(out, lineterminator="\n")
    for row in rows:
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])


def _flatten(doc, prefix=""):
    """Flatten nested dict/list JSON into ``(key, scalar)`` pairs."""
    items = []
    if isinstance(doc, dict):
        for k, v in doc.items():
            items += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            items += _flatten(v, f"{prefix}[{i}]")
    else:
        items.append((prefix, doc))
    return items


def _emit_flat(doc, out):
    pairs = _flatten(_clean(doc))
    _emit_csv([[k for k, _ in pairs], [v for _, v in pairs]], out)


# -- subcommands ------------------------------------------------------------------


def _cmd_eval(args, cfg, out):
    f = cfg.build_field()
    x = np.array(args.point)
    if args.direction is not None:
        doc = directional_jet(f, x, np.array(args.direction), args.degree).to_dict()
    else:
        value, grad, hess = jet2_at(f, x)
        doc = {"point": x, "value": value, "gradient": grad, "hessian": hess}
    if cfg.format == "json":
        _emit_json(doc, out)
    else:
        _emit_flat(doc, out)
    return OK


def _cmd_report(args, cfg, out):
    f = cfg.build_field()
    report = curvature_report(f, np.array(args.point), args.signature, cfg.tol().tau_light)
    if cfg.format == "json":
        _emit_json(report.to_dict(), out)
    else:
        header, values = report.csv_row()
        _emit_csv([header, [_clean(v) for v in values]], out)
    return OK


def _cmd_rulings(args, cfg, out):
    f = cfg.build_field()
    tol = cfg.tol()
    docs, lines = [], []
    for point in args.point:
        x = np.array(point)
        dirs = [np.array(args.direction)] if args.direction else hessian_kernel(f, x, tol.tau_ker)
        if not dirs:
            raise RulingError(f"Hessian at {point} has no kernel direction; no ruling passes through it")
        for g in dirs:
            seg = trace_ruling(f, x, g, tol=tol)
            doc = seg.to_dict()
            if args.eta is not None:
                doc["residuals"] = lemma_report(f, x, g, np.array(args.eta), ruling=seg, tol=tol).to_dict()
                doc["residuals"].pop("ruling")
            docs.append(doc)
            lines.append(seg.polyline())
    if cfg.format == "polyline":
        out.write("".join(line + "\n" for line in lines))
    elif cfg.format == "csv":
        keys = ["start", "end", "affinity_residual", "kernel_residual", "stop_minus", "stop_plus"]
        rows = [["x0", "gamma"] + keys]
        for d in docs:
            rows.append([" ".join(repr(v) for v in d["base"]), " ".join(repr(v) for v in d["direction"])]
                        + [" ".join(repr(v) for v in d[k]) if isinstance(d[k], list) else d[k] for k in keys])
        _emit_csv(rows, out)
    else:
        _emit_json({"field": f.describe(), "rulings": docs}, out)
    return OK


def _cmd_rigidity(args, cfg, out):
    f = cfg.build_field()
    radii = cfg.radii or DEFAULT_RADII
    center = None if cfg.center is None else np.array(cfg.center)
    v = rigidity_verdict(f, args.quantity, center=center, radii=radii, tol=cfg.tol(), seed=cfg.seed,
                         samples=cfg.samples, sphere_samples=cfg.sphere_samples)
    if cfg.format == "csv":
        if v.profile is None:
            raise UsageError(f"no decay profile to print: verdict is {v.outcome}")
        _emit_csv(v.profile.csv_rows(), out)
    else:
        _emit_json({"field": f.describe(), **v.to_dict()}, out)
    return OK if v.outcome == "hyperplane-consistent" else HYPOTHESIS


def _cmd_verify(args, cfg, out):
    result = run_suite(args.suite, trials=args.trials, seed=cfg.seed, tol=cfg.tol())
    if cfg.format == "csv":
        keys = sorted({k for r in result.rows for k in r})
        _emit_csv([keys] + [[_clean(r.get(k)) if not isinstance(r.get(k), list) else
                              " ".join(repr(v) for v in r[k]) for k in keys] for r in result.rows], out)
    else:
        _emit_json(result.to_dict(), out)
    return OK if result.passed else HYPOTHESIS


def _cmd_corpus(args, cfg, out):
    docs = [f.describe() | {"source": getattr(f, "source", None)} for f in built_in.corpus()]
    if cfg.format == "csv":
        _emit_csv([["name", "dim", "tags", "source"]]
                  + [[d["name"], d["dim"], " ".join(d["tags"]), d["source"]] for d in docs], out)
    else:
        _emit_json({"fields": docs}, out)
    return OK


_COMMANDS = {
    "eval": (_cmd_eval, False),
    "report": (_cmd_report, False),
    "rulings": (_cmd_rulings, False),
    "rigidity": (_cmd_rigidity, True),
    "verify": (_cmd_verify, True),
    "corpus": (_cmd_corpus, False),
}


def run(argv=None, stdout=None, stderr=None):
    """Execute one command line; returns the exit code."""
    out = sys.stdout if stdout is None else stdout
    err = sys.stderr if stderr is None else stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        err.write(f"gaussflat: error: {exc}\n")
        return USAGE
    except SystemExit as exc:  # --help
        return OK if exc.code in (0, None) else USAGE
    func, sampled = _COMMANDS[args.command]
    try:
        cfg = _config(args)
        if args.command not in ("verify", "corpus"):
            cfg.validate(sampled)
        elif sampled and cfg.seed is None:
            raise UsageError("--seed is required for sampled computations")
        if args.command != "rulings" and cfg.format == "polyline":
            raise UsageError("--format polyline only applies to 'rulings'")
        return func(args, cfg, out)
    except UsageError as exc:
        err.write(f"gaussflat: error: {exc}\n")
        return USAGE
    except ParseError as exc:
        err.write(f"gaussflat: parse error: {exc}\n")
        return USAGE
    except RulingError as exc:
        err.write(f"gaussflat: no ruling: {exc}\n")
        return HYPOTHESIS
    except (DomainError, EvaluationError, np.linalg.LinAlgError) as exc:
        err.write(f"gaussflat: evaluation error: {exc}\n")
        return EVALUATION
    except ValueError as exc:
        err.write(f"gaussflat: error: {exc}\n")
        return USAGE


def main():
    sys.exit(run())


def config_template():
    """A complete :class:`RunConfig` document with default values."""
    return asdict(RunConfig())
