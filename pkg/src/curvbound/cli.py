"""Command-line front-end: ``curvbound <subcommand> ...``.

Exit status: 0 when every check passes, 1 when a comparison fails (witnesses
are in the report), 2 for invalid input or an infeasible configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .comparison import Strategy, hinge_angle, make_hinge, max_lower_bound, scan_quadruples
from .constructions import UNMET, VERIFIED, cats_cradle, cradle_domain_containment, key_lemma_check
from .geometry import NoGeodesic
from .globalization import globalization_experiment
from .metric_space import InvalidSpace, generate_space, load_distance_matrix, parse_number, parse_space_spec, to_csv

EXIT_PASS, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
_VOLATILE = {"workers", "out", "func"}


@dataclass
class RunConfig:
    subcommand: str
    options: dict = field(default_factory=dict)

    @property
    def workers(self) -> int:
        return self.options.get("workers") or 1

    def to_dict(self) -> dict:
        """The reproducible part of the configuration (worker count and paths excluded)."""
        return {"subcommand": self.subcommand, **{k: v for k, v in sorted(self.options.items()) if k not in _VOLATILE}}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _load_space(opts: dict):
    if opts.get("matrix"):
        return load_distance_matrix(opts["matrix"], epsilon=opts.get("epsilon_graph"))
    return generate_space(opts["space"])


def _point(text: str):
    if text.startswith("@"):
        return np.array([parse_number(v) for v in text[1:].split(",")], float)
    return text


def _write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _sidecar(out: str | None, suffix: str) -> Path | None:
    if not out:
        return None
    p = Path(out)
    return p.with_name(p.stem + suffix + ".csv")


def _histogram_rows(hist: dict):
    edges, counts = hist["edges"], hist["counts"]
    return [[f"{edges[i]:.12g}", f"{edges[i + 1]:.12g}", c] for i, c in enumerate(counts)]


# --------------------------------------------------------------------------
# subcommands; each returns (exit status, report dict)


def cmd_gen(cfg: RunConfig):
    space = generate_space(cfg.options["space"])
    text = to_csv(space)
    return EXIT_PASS, {"n": len(space), "backend": space.backend, "ids": list(space.ids)}, text


def cmd_check(cfg: RunConfig):
    o = cfg.options
    space = _load_space(o)
    rep = scan_quadruples(space, o["kappa"], o["strategy"], cfg.workers, o.get("tol")).to_dict()
    plots = {"histogram": (["excess_lo", "excess_hi", "count"], _histogram_rows(rep["histogram"]))}
    return (EXIT_PASS if rep["counts"]["fails"] == 0 else EXIT_FAIL), rep, plots


def cmd_kappa_max(cfg: RunConfig):
    o = cfg.options
    space = _load_space(o)
    lo, hi = o["bracket"]
    k = max_lower_bound(space, lo, hi, o["tol"], o["strategy"], cfg.workers)
    return EXIT_PASS, {"kappa_max": k, "bracket": [lo, hi], "tol": o["tol"]}, {}


def cmd_hinge(cfg: RunConfig):
    o = cfg.options
    space = _load_space(o)
    p, x, y = (_point(v) for v in o["points"])
    est = hinge_angle(space, make_hinge(space, p, x, y, levels=o["levels"]), o["kappa"])
    rep = {"angle": est.angle, "extrapolated": est.extrapolated, "monotonicity_excess": est.monotonicity_excess,
           "budget": est.budget, "flagged": est.flagged, "grid": est.grid}
    return (EXIT_FAIL if est.flagged or est.angle is None else EXIT_PASS), rep, {}


def cmd_cradle(cfg: RunConfig):
    o = cfg.options
    space = _load_space(o)
    p, q, w = (_point(v) for v in o["points"])
    trace = cats_cradle(space, p, q, w, o["epsilon"], o["steps"], o.get("radius"))
    rep = {"trace": trace.to_dict()}
    status = EXIT_PASS
    if o.get("radius"):
        c = cradle_domain_containment(trace, space.resolve(w), o["radius"])
        rep["containment"] = {"passed": c.passed, "checked_up_to": c.checked_up_to, "offending": c.offending}
        status = EXIT_PASS if c.passed else EXIT_FAIL
    rows = []
    for k, v in enumerate(rep["trace"]["vertices"]):
        coords = v if isinstance(v, list) else [v]
        rows.append([k, *coords])
    width = max(len(r) for r in rows) - 1
    header = ["k"] + (["vertex"] if width == 1 and not space.analytic else [f"x{i}" for i in range(width)])
    return status, rep, {"cradle": (header, rows)}


def cmd_keylemma(cfg: RunConfig):
    o = cfg.options
    space = _load_space(o)
    p, q, w = (_point(v) for v in o["points"])
    res = key_lemma_check(space, p, q, w, o["kappa"], delta=o.get("delta"), mode=o["mode"], seed=o["seed"])
    rep = res.to_dict()
    status = {VERIFIED: EXIT_PASS, UNMET: EXIT_INVALID}.get(res.verdict, EXIT_FAIL)
    plots = {}
    radial = res.replay.get("radial") if res.replay else None
    if radial:
        plots["radial"] = (["t", "model_angle"], [[t, a] for t, a in zip(radial["params"], radial["angles"])])
    return status, rep, plots


def cmd_globalize(cfg: RunConfig):
    o = cfg.options
    rep = globalization_experiment(o["space"], o["kappa"], o["local_radius"], o.get("strategy"), cfg.workers,
                                   halvings=o["halvings"]).to_dict()
    plots = {"histogram": (["excess_lo", "excess_hi", "count"], _histogram_rows(rep["global_scan"]["histogram"]))}
    return (EXIT_PASS if rep["verdict"] == "pass" else EXIT_FAIL), rep, plots


COMMANDS = {
    "gen": cmd_gen, "check": cmd_check, "kappa-max": cmd_kappa_max, "hinge": cmd_hinge,
    "cradle": cmd_cradle, "keylemma": cmd_keylemma, "globalize": cmd_globalize,
}


# --------------------------------------------------------------------------
# argument parsing


def _number(text):
    try:
        return parse_number(text)
    except (InvalidSpace, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _strategy(text):
    try:
        return Strategy.parse(text).to_dict()
    except (InvalidSpace, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curvbound", description="Empirical curvature-bound checks on sampled metric spaces.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(p, source=True, kappa=True, strategy=False):
        if source:
            src = p.add_mutually_exclusive_group(required=True)
            src.add_argument("--space", help="space spec, e.g. sphere:r=1,n=20,seed=7, or a JSON file")
            src.add_argument("--matrix", help="CSV distance matrix with a header row of point ids")
            p.add_argument("--epsilon-graph", dest="epsilon_graph", type=_number,
                           help="neighbourhood-graph radius for --matrix inputs")
        if kappa:
            p.add_argument("--kappa", type=_number, required=True)
        if strategy:
            p.add_argument("--strategy", type=_strategy, default="exhaustive",
                           help="exhaustive | random:count=N,seed=S")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--out", help="report path (JSON); plot series are written next to it")

    p = sub.add_parser("gen", help="generate a space and write its distance matrix")
    p.add_argument("--space", required=True)
    p.add_argument("--out", help="CSV path (stdout if omitted)")

    p = sub.add_parser("check", help="scan quadruples for the comparison inequality")
    common(p, strategy=True)
    p.add_argument("--tol", type=_number, help="override the comparison tolerance")

    p = sub.add_parser("kappa-max", help="largest curvature bound the sample satisfies")
    common(p, kappa=False, strategy=True)
    p.add_argument("--bracket", type=_number, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--tol", type=_number, default=1e-3)

    p = sub.add_parser("hinge", help="estimate the angle of the hinge at P toward X and Y")
    common(p)
    p.add_argument("points", nargs=3, metavar="POINT", help="P X Y: point ids or @x,y,... coordinates")
    p.add_argument("--levels", type=int, default=9)

    p = sub.add_parser("cradle", help="run the cat's cradle walk toward P and Q from W")
    common(p, kappa=False)
    p.add_argument("points", nargs=3, metavar="POINT", help="P Q W: point ids or @x,y,... coordinates")
    p.add_argument("--epsilon", type=_number, required=True)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--radius", type=_number, help="check containment in the ball B(W, radius)")

    p = sub.add_parser("keylemma", help="compare |PQ| with the model side of the hinge at W")
    common(p)
    p.add_argument("points", nargs=3, metavar="POINT", help="P Q W: point ids or @x,y,... coordinates")
    p.add_argument("--delta", type=_number)
    p.add_argument("--mode", choices=["radius", "bisector"], default="radius")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("globalize", help="local certificates, completion, global scan")
    common(p, source=False)
    p.add_argument("--space", required=True)
    p.add_argument("--local-radius", dest="local_radius", type=_number, required=True)
    p.add_argument("--strategy", type=_strategy, default=None)
    p.add_argument("--halvings", type=int, default=4)
    return parser


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Dispatch, write the report and plot series; return (status, report)."""
    o = cfg.options
    if cfg.workers < 1:
        raise InvalidSpace("--workers must be at least 1")
    if o.get("space") is not None:
        o["space"] = parse_space_spec(o["space"]).to_dict()
    if cfg.subcommand == "gen":
        status, meta, text = cmd_gen(cfg)
        if o.get("out"):
            Path(o["out"]).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return status, meta
    status, report, plots = COMMANDS[cfg.subcommand](cfg)
    document = {"config": cfg.to_dict(), "status": status, "report": report}
    text = dump_report(document)
    if o.get("out"):
        Path(o["out"]).write_text(text, encoding="utf-8")
        for name, (header, rows) in plots.items():
            _write_csv(_sidecar(o["out"], "." + name), header, rows)
    else:
        sys.stdout.write(text)
    return status, document


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if k != "subcommand"}
    cfg = RunConfig(args.subcommand, opts)
    try:
        status, _ = run(cfg)
    except (InvalidSpace, NoGeodesic, FileNotFoundError, ValueError) as exc:
        sys.stderr.write(f"curvbound {args.subcommand}: {exc}\n")
        return EXIT_INVALID
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
