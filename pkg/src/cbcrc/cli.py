"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 infeasible construction,
4 regression failure (``reproduce-table`` only).
"""

import argparse
import csv
from dataclasses import asdict, dataclass, field, fields
import io
import json
import math
import sys
import time

import numpy as np

from . import tables
from .bounds import (bound_report, chebyshev_probability, combined_bound, empirical_coverage,
                     polytope_bound, robustness_bound)
from .constructor import STRATEGIES, ConstraintSpec, construct
from .errors import DomainError, InfeasibleError
from .numtheory import Modulus
from .wce import GeneratingVector, squared_wce, wce_expectation, wce_std, wce_variance
from .weights import SAMPLING_FAMILIES, RandomWeightModel, WeightAssignment

SCHEMA_VERSION = 1
COMMANDS = ("construct", "evaluate", "bounds", "robustness", "reproduce-table")
EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_REGRESSION = 0, 2, 3, 4
MAX_EXTRA_WEIGHTS = 4


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: list = field(default_factory=list)
    s: int = None
    weights: list = field(default_factory=list)
    presets: list = field(default_factory=list)
    c: list = field(default_factory=list)
    table: int = None
    format: str = "json"
    out: str = None
    seed: int = 0
    strategy: str = "first-constraint-min"
    vector: str = None
    std_weights: str = None
    lambdas: list = field(default_factory=list)
    cheb_c: float = 1.0
    tau: list = field(default_factory=lambda: [1.0, 1.25, 1.5, 1.75])
    samples: int = 10000
    sampling: str = "uniform"

    def to_json(self):
        doc = asdict(self)
        doc["c"] = [_fmt_c(x) for x in self.c]
        return doc

    @classmethod
    def from_json(cls, doc):
        names = {f.name for f in fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        doc["c"] = [float(x) for x in doc.get("c", [])]
        return cls(**doc)

    @classmethod
    def from_args(cls, ns):
        weights = list(ns.weights or [])
        for k in range(2, MAX_EXTRA_WEIGHTS + 1):
            extra = getattr(ns, f"weights{k}")
            if extra:
                weights.append(extra)
        return cls(
            command=ns.command, n=list(ns.n or []), s=ns.s, weights=weights,
            presets=list(ns.preset or []), c=list(ns.c or []), table=ns.table,
            format=ns.format, out=ns.out, seed=ns.seed, strategy=ns.strategy,
            vector=ns.vector, std_weights=ns.std_weights, lambdas=list(ns.lambdas or []),
            cheb_c=ns.cheb_c, tau=list(ns.tau), samples=ns.samples, sampling=ns.sampling,
        )


def _fmt_c(x):
    return "inf" if math.isinf(x) else x


def _parse_c(text):
    out = []
    for tok in str(text).replace(",", " ").split():
        try:
            out.append(float(tok))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad budget factor {tok!r}") from None
    return out


class _ExtendC(argparse.Action):
    """Accumulate budget factors given as ``2 2``, ``2,2`` or repeated flags."""

    def __call__(self, parser, namespace, values, option_string=None):
        items = list(getattr(namespace, self.dest) or [])
        for v in values:
            items.extend(v)
        setattr(namespace, self.dest, items)


def build_parser():
    p = argparse.ArgumentParser(prog="cbcrc", description="Rank-1 lattice rules built by constrained cbc.")
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--n", type=int, nargs="+", help="number of points (several for reproduce-table)")
    p.add_argument("--s", type=int, help="dimension, used with --preset")
    p.add_argument("--weights", action="append", metavar="FILE", help="weight file; repeat for more constraints")
    for k in range(2, MAX_EXTRA_WEIGHTS + 1):
        p.add_argument(f"--weights{k}", metavar="FILE", help=argparse.SUPPRESS if k > 2 else "second weight file")
    p.add_argument("--preset", action="append",
                   help="inline weight family: const:V, geom:B (B^-j), pow:P (j^-P), revpow:P, "
                        "or table1..table4 for the two deterministic table families with c = 2 2")
    p.add_argument("--c", type=_parse_c, nargs="+", action=_ExtendC, help="budget factors, e.g. --c 2 2 or --c 2,2")
    p.add_argument("--table", type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=STRATEGIES, default="first-constraint-min")
    p.add_argument("--vector", metavar="FILE", help='generating vector {"n", "s", "g"}')
    p.add_argument("--std-weights", metavar="FILE", help="deviations of random weights (means come from --weights)")
    p.add_argument("--lambdas", type=float, nargs="+", help="coefficients for the polytope bound")
    p.add_argument("--cheb-c", type=float, default=1.0)
    p.add_argument("--tau", type=float, nargs="+", default=[1.0, 1.25, 1.5, 1.75])
    p.add_argument("--samples", type=int, default=10000, help="weight draws for the empirical robustness check")
    p.add_argument("--sampling", choices=SAMPLING_FAMILIES, default="uniform")
    return p


# -- inputs ------------------------------------------------------------------

def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _preset_families(name, s):
    if name.startswith("table"):
        tid = name[5:]
        doc = tables.load_tables()
        fams = doc["tables"][tid]["weights"][:2] if tid in doc["tables"] else None
        if fams is None:
            raise InputError(f"unknown preset {name!r}")
        return [WeightAssignment.product(tables.family_gamma_hat(d, s)) for d in fams], list(doc["c"])
    kind, _, arg = name.partition(":")
    keys = {"const": ("constant", "value"), "geom": ("geometric", "base"),
            "pow": ("power", "p"), "revpow": ("reverse_power", "p")}
    if kind not in keys or not arg:
        raise InputError(f"unknown preset {name!r}")
    try:
        val = float(arg)
    except ValueError:
        raise InputError(f"bad preset parameter in {name!r}") from None
    desc = {"kind": keys[kind][0], keys[kind][1]: val}
    return [WeightAssignment.product(tables.family_gamma_hat(desc, s))], []


def load_weights(cfg):
    """Weight families and any budget factors implied by table presets."""
    fams, implied_c = [], []
    for path in cfg.weights:
        fams.append(WeightAssignment.from_json(_read_json(path)))
    if cfg.presets:
        s = cfg.s if cfg.s is not None else (fams[0].dimension if fams else None)
        if s is None or s < 1:
            raise InputError("--preset needs --s")
        for name in cfg.presets:
            f, c = _preset_families(name, s)
            fams.extend(f)
            implied_c.extend(c)
    if not fams:
        raise InputError("no weights given: use --weights FILE or --preset")
    return fams, implied_c


def load_spec(cfg):
    fams, implied_c = load_weights(cfg)
    c = list(cfg.c) or implied_c or ([1.0] if len(fams) == 1 else [])
    if len(c) != len(fams):
        raise InputError(f"{len(fams)} weight families but {len(c)} budget factors")
    return ConstraintSpec(tuple(fams), tuple(c))


def load_vector(cfg):
    if not cfg.vector:
        raise InputError("--vector FILE is required")
    return GeneratingVector.from_json(_read_json(cfg.vector))


def load_model(cfg, mean):
    if not cfg.std_weights:
        return None
    return RandomWeightModel(mean, WeightAssignment.from_json(_read_json(cfg.std_weights)))


def _single_n(cfg):
    if len(cfg.n) != 1:
        raise InputError("give exactly one --n")
    return cfg.n[0]


# -- commands ----------------------------------------------------------------

def cmd_construct(cfg):
    spec = load_spec(cfg)
    n = _single_n(cfg)
    g, trace = construct(n, spec, strategy=cfg.strategy)
    inv = {k: spec.order[k] for k in range(spec.r)}
    errors = [None] * spec.r
    for k, e2 in enumerate(trace.final_errors()):
        errors[inv[k]] = e2
    steps = []
    for st in trace.steps:
        row = {"j": st.j, "g": st.g, "intersection_size": st.intersection_size}
        for k in range(spec.r):
            w = inv[k]
            row[f"K{w + 1}"] = st.thresholds[k] if st.thresholds else None
            row[f"e2_{w + 1}"] = st.errors[k]
        steps.append(row)
    doc = {
        "command": "construct", "n": g.N, "s": g.s, "g": list(g.components),
        "c": [_fmt_c(spec.c[spec.order.index(w)]) for w in range(spec.r)],
        "strategy": cfg.strategy, "fast_path": trace.fast_path,
        "e2": errors, "e": [math.sqrt(x) for x in errors],
        "wall_time": trace.wall_time, "trace": steps,
    }
    return doc, steps, EXIT_OK


def cmd_evaluate(cfg):
    g = load_vector(cfg)
    fams, _ = load_weights(cfg)
    out = []
    for k, w in enumerate(fams, start=1):
        e2 = squared_wce(g, w)
        row = {"family": k, "e2": e2, "e": math.sqrt(e2)}
        model = load_model(cfg, w) if k == 1 else None
        if model is not None:
            row.update(expectation=wce_expectation(g, model), variance=wce_variance(g, model),
                       std=wce_std(g, model))
        out.append(row)
    doc = {"command": "evaluate", "n": g.N, "s": g.s, "g": list(g.components), "results": out}
    return doc, out, EXIT_OK


def cmd_bounds(cfg):
    spec = load_spec(cfg)
    modulus = Modulus.of(_single_n(cfg))
    report = bound_report(spec, modulus, taus=cfg.tau, chebyshev_c=cfg.cheb_c)
    body = report.to_json()
    # back to the caller's constraint order
    stored = body["constraints"]
    body["constraints"] = [stored[spec.order.index(w)] for w in range(spec.r)]
    rows = [{"constraint": w + 1, **{k: v for k, v in row.items() if k != "bound_at_tau"},
             **{f"bound_tau_{t}": v for t, v in row["bound_at_tau"].items()}}
            for w, row in enumerate(body["constraints"])]
    doc = {"command": "bounds", "n": modulus.N, "kappa": modulus.kappa, **body}
    if cfg.lambdas:
        xs = [row["x_value"] for row in body["constraints"]]
        if len(cfg.lambdas) != len(xs):
            raise InputError("need one lambda per constraint")
        doc["lambdas"] = list(cfg.lambdas)
        doc["polytope_bound"] = polytope_bound(xs, cfg.lambdas)
    return doc, rows, EXIT_OK


def cmd_robustness(cfg):
    g = load_vector(cfg)
    fams, _ = load_weights(cfg)
    model = load_model(cfg, fams[0])
    if model is None:
        raise InputError("robustness needs --std-weights")
    c = cfg.cheb_c
    doc = {
        "command": "robustness", "n": g.N, "s": g.s, "c": c,
        "expectation": wce_expectation(g, model), "std": wce_std(g, model),
        "probability": chebyshev_probability(c),
        "robustness_bound": robustness_bound(model, g, c),
    }
    if len(cfg.c) == 2:
        taus = cfg.tau if len(cfg.tau) == 2 else [1.0, 1.0]
        doc["combined_bound"] = combined_bound(model, c, cfg.c[0], cfg.c[1], g.N, taus[0], taus[1])
    if cfg.samples > 0:
        rng = np.random.default_rng(cfg.seed)
        frac, threshold, _ = empirical_coverage(g, model, c, cfg.samples, cfg.sampling, rng)
        doc.update(threshold=threshold, sampling=cfg.sampling, samples=cfg.samples,
                   empirical_fraction=frac, seed=cfg.seed)
    return doc, [{k: v for k, v in doc.items() if k != "command"}], EXIT_OK


def cmd_reproduce_table(cfg):
    if cfg.table is None:
        raise InputError("--table is required")
    try:
        cells = tables.reproduce(cfg.table, cfg.n or None, seed=cfg.seed)
    except DomainError as exc:
        raise InputError(str(exc)) from exc
    rows = [c.to_json() for c in cells]
    failed = [r for r in rows if r["role"] == "gate" and r["passed"] is False]
    doc = {
        "command": "reproduce-table", "table": cfg.table, "seed": cfg.seed,
        "n": sorted({c.n for c in cells}), "cells": rows,
        "gate_failures": len(failed),
        "loose_failures": sum(1 for r in rows if r["role"] == "loose" and r["passed"] is False),
        "qualitative": tables.qualitative_checks(cells, cfg.table),
    }
    return doc, rows, EXIT_REGRESSION if failed else EXIT_OK


HANDLERS = {
    "construct": cmd_construct, "evaluate": cmd_evaluate, "bounds": cmd_bounds,
    "robustness": cmd_robustness, "reproduce-table": cmd_reproduce_table,
}


# -- output ------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def render(doc, rows, fmt):
    if fmt == "json":
        return json.dumps(_jsonable({"schema_version": SCHEMA_VERSION, **doc}), indent=2) + "\n"
    buf = io.StringIO()
    keys = ["schema_version"]
    for r in rows:
        keys += [k for k in r if k not in keys and not isinstance(r[k], (list, dict))]
    writer = csv.DictWriter(buf, fieldnames=keys, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({"schema_version": SCHEMA_VERSION, **_jsonable(r)})
    return buf.getvalue()


def run(cfg):
    """Execute ``cfg``; returns ``(exit_code, text)`` without touching the filesystem."""
    try:
        doc, rows, code = HANDLERS[cfg.command](cfg)
    except InfeasibleError as exc:
        return EXIT_INFEASIBLE, f"error: {exc}\n"
    except (InputError, DomainError) as exc:
        return EXIT_INPUT, f"error: {exc}\n"
    return code, render(doc, rows, cfg.format)


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    cfg = RunConfig.from_args(ns)
    t0 = time.perf_counter()
    code, text = run(cfg)
    if code in (EXIT_INPUT, EXIT_INFEASIBLE):
        sys.stderr.write(text)
        return code
    if cfg.out:
        try:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stderr.write(f"error: cannot write {cfg.out}: {exc.strerror}\n")
            return EXIT_INPUT
    else:
        sys.stdout.write(text)
    if code == EXIT_REGRESSION:
        sys.stderr.write(f"regression: table cells outside tolerance ({time.perf_counter() - t0:.1f} s)\n")
    return code
