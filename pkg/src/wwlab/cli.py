"""Command line runner: one verb per experiment, JSON config in, CSV + metadata out.

    wwlab list
    wwlab vdc --config vdc.json --out results/ --seed 3 --workers 2

Exit status: 0 on success, 1 on a bad config or usage error, 2 when a
checking experiment (vdc, identity) finds a violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import __version__
from .engine import AverageSpec, ScanTooLargeError, sup_trace, trace, ww_average, ww_sequence
from .identities import ReductionSetup, alpha_for_target, top_coefficient, verify_reduction
from .observable import Observable
from .polyphase import PolyReal
from .seminorm import PairBoundRow, estimate_pair_bound, ghk_estimate
from .torus import (
    Point,
    Rotation,
    Skew,
    dimension,
    iterate_closed_form,
    orbit,
    system_from_json,
)
from .vdc import vdc_check

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# ---------------------------------------------------------------- schemas

_NUM = {"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}
_SYSTEM = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["rotation", "skew", "product"]},
        "alpha": _NUM,
        "m": {"type": "integer", "minimum": 1},
        "form": {"enum": ["generic", "paper-exact"]},
        "left": {"$ref": "#/$defs/system"},
        "right": {"$ref": "#/$defs/system"},
    },
    "additionalProperties": False,
}
_OBS = {
    "anyOf": [
        {"type": "number"},
        {
            "type": "object",
            "required": ["terms"],
            "additionalProperties": False,
            "properties": {
                "terms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["freq"],
                        "additionalProperties": False,
                        "properties": {
                            "freq": {"type": "array", "items": {"type": "integer"}},
                            "re": {"type": "number"},
                            "im": {"type": "number"},
                        },
                    },
                }
            },
        },
    ]
}
_POLY = {"type": "array", "items": _NUM}
_POINT = {"type": "array", "items": _NUM, "minItems": 1}
_INT = {"type": "integer"}
_POS = {"type": "integer", "minimum": 1}
_CPS = {"type": "array", "items": _POS, "minItems": 1}
_COMMON = {
    "experiment": {"type": "string"},
    "seed": _INT,
    "workers": _POS,
    "output": {"type": "string"},
}


def _schema(required, **props) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$defs": {"system": _SYSTEM},
        "type": "object",
        "required": list(required),
        "properties": {**_COMMON, **props},
        "additionalProperties": False,
    }


_SYS = {"$ref": "#/$defs/system"}
_AVG = dict(system=_SYS, f1=_OBS, f2=_OBS, a=_INT, b=_INT, poly=_POLY, point=_POINT)
_AVG_REQ = ("system", "f1", "f2", "a", "b", "poly", "point")


class ConfigError(Exception):
    pass


@dataclass
class Table:
    header: list[str]
    rows: list[list]
    violations: int = 0


# ---------------------------------------------------------------- parsing


def _system(cfg, default=None):
    data = cfg.get("system", default)
    return system_from_json(data)


def _observable(data, dim: int) -> Observable:
    return Observable.from_json(data, dim)


def _avg_spec(cfg) -> AverageSpec:
    sys_ = _system(cfg)
    d = dimension(sys_)
    point = cfg["point"]
    if len(point) != d:
        raise ConfigError(f"'point' has {len(point)} coordinates, system needs {d}")
    try:
        return AverageSpec(
            sys_,
            _observable(cfg["f1"], d),
            _observable(cfg["f2"], d),
            cfg["a"],
            cfg["b"],
            PolyReal(cfg["poly"]),
            Point.of(*point),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _avg_row(r, method: str, err=None) -> list:
    return [r.N, r.t, r.value.real, r.value.imag, abs(r.value), method, err]


AVG_HEADER = ["N", "t", "re", "im", "abs", "method", "guaranteed_error"]

# ---------------------------------------------------------------- runners


def run_orbit(cfg, workers) -> Table:
    sys_ = _system(cfg)
    pt = Point.of(*cfg["point"])
    if len(pt) != dimension(sys_):
        raise ConfigError(f"'point' has {len(pt)} coordinates, system needs {dimension(sys_)}")
    d = dimension(sys_)
    rows = []
    for n, q in enumerate(orbit(sys_, pt, cfg["N"])):
        row = [n, *q.coords]
        if cfg.get("closed_form", False):
            c = iterate_closed_form(sys_, pt, n)
            row.append(max(min(abs(u - v), 1 - abs(u - v)) for u, v in zip(q.coords, c.coords)))
        rows.append(row)
    header = ["n"] + [f"x{i}" for i in range(d)]
    if cfg.get("closed_form", False):
        header.append("closed_form_gap")
    return Table(header, rows)


def run_wwavg(cfg, workers) -> Table:
    spec = _avg_spec(cfg)
    r = ww_average(ww_sequence(spec, cfg["N"]), spec.p, cfg["t"], workers)
    return Table(AVG_HEADER, [_avg_row(r, "direct")])


def run_trace(cfg, workers) -> Table:
    spec = _avg_spec(cfg)
    res = trace(spec, cfg["t"], cfg["checkpoints"], workers)
    return Table(AVG_HEADER, [_avg_row(r, "direct") for r in res])


def run_sup_trace(cfg, workers) -> Table:
    spec = _avg_spec(cfg)
    if not spec.p.is_integral():
        raise ConfigError("'poly' must have integer coefficients for sup-trace")
    try:
        res = sup_trace(spec, cfg["checkpoints"], cfg.get("oversample", 4), workers)
    except ScanTooLargeError as e:
        raise ConfigError(f"'checkpoints': {e.args[0].split(';')[0]}; lower the largest checkpoint or the degree of 'poly'") from None
    seq = ww_sequence(spec, cfg["checkpoints"][-1])
    rows = []
    for s in res:
        w = ww_average(seq[: s.N], spec.p, s.t_star).value
        rows.append([s.N, s.t_star, w.real, w.imag, s.sup_value, s.method, s.guaranteed_error])
    return Table(AVG_HEADER, rows)


def run_weyl(cfg, workers) -> Table:
    p = PolyReal(cfg.get("poly", [0, 0, 1]))
    t = cfg.get("t", math.sqrt(2.0))
    sys_ = _system(cfg, {"type": "rotation", "alpha": GOLDEN})
    d = dimension(sys_)
    spec = AverageSpec(
        sys_, Observable.constant(1, d), Observable.constant(1, d),
        cfg.get("a", 1), cfg.get("b", 2), p, Point.of(*([0.0] * d)),
    )
    cps = cfg.get("checkpoints", [10**3, 10**4, 10**5, 10**6])
    res = trace(spec, t, cps, workers)
    oracle = _weyl_oracle(p, t, cps)
    rows = [_avg_row(r, "direct")[:5] + [o] for r, o in zip(res, oracle)]
    return Table(["N", "t", "re", "im", "abs", "oracle_abs"], rows)


def _weyl_oracle(p: PolyReal, t, cps) -> list[float]:
    """Direct summation with exact integer phases."""
    from fractions import Fraction

    scaled = [c * Fraction(t) for c in p.exact]
    den = math.lcm(1, *(c.denominator for c in scaled))
    coeffs = [int(c * den) for c in scaled]
    out, acc_re, acc_im, cps_left = [], [], [], list(cps)
    for n in range(cps[-1]):
        v = 0
        for c in reversed(coeffs):
            v = v * n + c
        ang = 2 * math.pi * ((v % den) / den)
        acc_re.append(math.cos(ang))
        acc_im.append(math.sin(ang))
        if n + 1 == cps_left[0]:
            out.append(abs(complex(math.fsum(acc_re), math.fsum(acc_im))) / (n + 1))
            cps_left.pop(0)
    return out


def run_vdc(cfg, workers) -> Table:
    rng = np.random.default_rng(cfg.get("seed", 0))
    cases, N = cfg.get("cases", 1000), cfg.get("N", 256)
    hs = cfg.get("H_values", [1, 8, 64])
    if any(not 0 <= h <= N - 1 for h in hs):
        raise ConfigError(f"'H_values' must lie in [0, {N - 1}]")
    seqs = []
    for _ in range(cases):
        scale = 10.0 ** rng.uniform(-3, 3)
        seqs.append(scale * (rng.normal(size=N) + 1j * rng.normal(size=N)))

    def one(seq):
        return [vdc_check(seq, h) for h in hs]

    with ThreadPoolExecutor(workers) as ex:
        reports = [r for rs in ex.map(one, seqs) for r in rs]
    rows = [[r.N, r.H, r.lhs, r.rhs, r.slack, r.holds] for r in reports]
    return Table(["N", "H", "lhs", "rhs", "slack", "holds"], rows, sum(not r.holds for r in reports))


def run_ghk(cfg, workers) -> Table:
    sys_ = _system(cfg)
    f = _observable(cfg["f"], dimension(sys_))
    N, H, samples = cfg.get("N", 10**5), cfg.get("H", 10**3), cfg.get("samples", 8)
    rows = []
    for k in cfg.get("k_values", [1, 2]):
        try:
            e = ghk_estimate(sys_, f, k, N, H, samples, cfg.get("seed", 0))
        except ValueError as err:
            raise ConfigError(str(err)) from None
        rows.append([e.k, e.N, e.H, e.samples, e.value])
    return Table(["k", "N", "H", "samples", "value"], rows)


def run_identity(cfg, workers) -> Table:
    m, form = cfg["m"], cfg.get("form", "generic")
    a, b, k = cfg.get("a", 1), cfg.get("b", 2), cfg.get("k_freq", 1)
    N, draws = cfg.get("N", 10**4), cfg.get("draws", 1)
    base = _system(cfg, {"type": "rotation", "alpha": GOLDEN})
    d = dimension(base)
    f1 = _observable(cfg.get("f1", {"terms": [{"freq": [1] * d, "re": 1.0}]}), d)
    f2 = _observable(cfg.get("f2", {"terms": [{"freq": [1] * d, "re": 1.0}]}), d)
    rng = np.random.default_rng(cfg.get("seed", 0))
    try:
        c_top = top_coefficient(a, b, m, k, form)
        Skew(m, 0, form)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if c_top == 0:
        raise ConfigError(f"degenerate setup: c_top = 0 for a={a}, b={b}, m={m}; change 'a', 'b' or 'm'")
    jobs = []
    for _ in range(draws):
        t = cfg["t_target"] if "t_target" in cfg else float(rng.random())
        start = cfg["point"] if "point" in cfg else list(rng.random(d + 2))
        if len(start) != d + 2:
            raise ConfigError(f"'point' needs {d + 2} coordinates (base, y, z)")
        alpha = alpha_for_target(c_top, m, t)
        setup = ReductionSetup(a, b, m, k, alpha, base, f1, f2, Point.of(*start), form, cfg.get("p_freq", 0))
        jobs.append((setup, t))

    with ThreadPoolExecutor(workers) as ex:
        reports = list(ex.map(lambda j: verify_reduction(j[0], N, j[1]), jobs))
    rows = [
        [m, a, b, k, float(s.alpha), N, r.c_top, r.max_abs_gap, r.passed]
        for (s, _), r in zip(jobs, reports)
    ]
    header = ["m", "a", "b", "k_freq", "alpha", "N", "c_top", "max_abs_gap", "passed"]
    return Table(header, rows, sum(not r.passed for r in reports))


def pair_bound_battery(seed: int = 0, **kw) -> list[PairBoundRow]:
    """Fixed battery of pair-bound rows (report only)."""
    rot = Rotation(GOLDEN)
    one1, chi = Observable.constant(1, 1), Observable.character((1,))
    skew = Skew(1, GOLDEN, "paper-exact")
    one2, fib = Observable.constant(1, 2), Observable.character((0, 1))
    x1, x2 = Point.of(0.0), Point.of(0.0, 0.0)
    cases = [
        ("constant-f1 p=n", AverageSpec(rot, one1, chi, 1, 2, PolyReal([0, 1]), x1), 1),
        ("kronecker-character p=n", AverageSpec(rot, chi, chi, 1, 2, PolyReal([0, 1]), x1), 1),
        ("constants p=n^2", AverageSpec(rot, one1, one1, 1, 2, PolyReal([0, 0, 1]), x1), 2),
        ("skew-fibre-character p=n", AverageSpec(skew, fib, fib, 1, 2, PolyReal([0, 1]), x2), 1),
        ("skew-fibre-character p=n^2", AverageSpec(skew, fib, fib, 1, 2, PolyReal([0, 0, 1]), x2), 2),
    ]
    out = []
    for label, spec, kp in cases:
        params = dict(kw)
        if kp == 2:
            params.setdefault("ghk_N", 1000)
            params.setdefault("ghk_H", 8)
            params.setdefault("N", 1024)
        out.append(estimate_pair_bound(spec, kp, seed=seed, label=label, **params))
    return out


def run_estimate_bound(cfg, workers) -> Table:
    params = {k: cfg[k] for k in ("N", "x_samples", "ghk_N", "ghk_H", "ghk_samples", "oversample") if k in cfg}
    seed = cfg.get("seed", 0)
    try:
        if "system" in cfg:
            spec = _avg_spec(cfg)
            rows = [estimate_pair_bound(spec, cfg.get("k_poly", spec.p.degree), seed=seed, label="config", **params)]
        else:
            rows = pair_bound_battery(seed, **params)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return Table(["label", "k_poly", "lhs", "rhs", "ratio"], [[r.label, r.k_poly, r.lhs, r.rhs, r.ratio] for r in rows])


@dataclass(frozen=True)
class Experiment:
    name: str
    summary: str
    schema: dict
    run: Callable


EXPERIMENTS = {
    e.name: e
    for e in [
        Experiment("orbit", "orbit of a rotation/skew/product system, optionally against the closed form",
                   _schema(["system", "point", "N"], system=_SYS, point=_POINT, N=_POS,
                           closed_form={"type": "boolean"}), run_orbit),
        Experiment("wwavg", "one weighted double recurrence average W_N(t)",
                   _schema(_AVG_REQ + ("N", "t"), **_AVG, N=_POS, t=_NUM), run_wwavg),
        Experiment("trace", "W_N(t) at fixed t across N checkpoints (convergence trace)",
                   _schema(_AVG_REQ + ("t", "checkpoints"), **_AVG, t=_NUM, checkpoints=_CPS), run_trace),
        Experiment("sup-trace", "sup over t of |W_N(t)| across N checkpoints (uniformity in t)",
                   _schema(_AVG_REQ + ("checkpoints",), **_AVG, checkpoints=_CPS,
                           oversample={"type": "integer", "minimum": 2}), run_sup_trace),
        Experiment("vdc", "van der Corput inequality on seeded random complex sequences",
                   _schema([], cases=_POS, N={"type": "integer", "minimum": 2},
                           H_values={"type": "array", "items": {"type": "integer", "minimum": 0}}), run_vdc),
        Experiment("ghk", "truncated Gowers-Host-Kra seminorm estimates of one observable",
                   _schema(["system", "f"], system=_SYS, f=_OBS, N=_POS, H=_POS, samples=_POS,
                           k_values={"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 4}}),
                   run_ghk),
        Experiment("identity", "skew-product phase reduction: corrected product average vs reduced average",
                   _schema(["m"], m={"type": "integer", "minimum": 1, "maximum": 11},
                           form={"enum": ["generic", "paper-exact"]}, a=_INT, b=_INT, k_freq=_INT, p_freq=_INT,
                           N=_POS, draws=_POS, t_target={"type": "number"}, point=_POINT, system=_SYS,
                           f1=_OBS, f2=_OBS), run_identity),
        Experiment("estimate-bound", "mean sup_t |W_N|^2 against squared seminorm estimates (report only)",
                   _schema([], **_AVG, k_poly=_POS, N=_POS, x_samples=_POS, ghk_N=_POS, ghk_H=_POS,
                           ghk_samples=_POS, oversample={"type": "integer", "minimum": 2}), run_estimate_bound),
        Experiment("weyl", "Weyl sum decay with constant observables, against direct summation",
                   _schema([], system=_SYS, poly=_POLY, t=_NUM, a=_INT, b=_INT, checkpoints=_CPS), run_weyl),
    ]
}


# ---------------------------------------------------------------- plumbing


def _line_of(text: str, key) -> int:
    if key is None:
        return 1
    m = re.search(r'"%s"\s*:' % re.escape(str(key)), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def load_config(name: str, text: str, source: str = "<config>") -> dict:
    try:
        cfg = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}: invalid JSON: {e.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{source}:1: config must be a JSON object")
    exp = EXPERIMENTS[name]
    errors = sorted(jsonschema.Draft202012Validator(exp.schema).iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        if e.validator == "additionalProperties":
            extra = sorted(set(cfg) - set(exp.schema["properties"])) if not e.path else []
            key = extra[0] if extra else (e.path[-1] if e.path else None)
            raise ConfigError(f"{source}:{_line_of(text, key)}: unknown key(s) {extra or e.message}")
        key = e.path[0] if e.path else None
        where = "/".join(str(p) for p in e.path) or "config"
        raise ConfigError(f"{source}:{_line_of(text, key)}: {where}: {e.message}")
    if cfg.get("experiment", name) != name:
        raise ConfigError(f"{source}:{_line_of(text, 'experiment')}: config is for {cfg['experiment']!r}, not {name!r}")
    return cfg


def write_table(table: Table, path: Path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def run(name: str, cfg: dict, out_dir: Path, workers: int = 1) -> int:
    exp = EXPERIMENTS[name]
    t0 = time.perf_counter()
    table = exp.run(cfg, workers)
    wall = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    write_table(table, csv_path)
    meta = {
        "experiment": name,
        "config": cfg,
        "tool": "wwlab",
        "version": __version__,
        "wall_time_s": wall,
        "seed": cfg.get("seed", 0),
        "workers": workers,
        "rows": len(table.rows),
        "violations": table.violations,
        "csv": csv_path.name,
    }
    (out_dir / f"{name}.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 2 if table.violations else 0


def catalogue() -> str:
    width = max(len(n) for n in EXPERIMENTS)
    return "\n".join(f"{n:<{width}}  {e.summary}" for n, e in EXPERIMENTS.items())


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wwlab", description="Wiener-Wintner double recurrence laboratory.")
    parser.add_argument("--version", action="version", version=f"wwlab {__version__}")
    sub = parser.add_subparsers(dest="verb", parser_class=_Parser)
    sub.add_parser("list", help="print the experiment catalogue")
    for name, exp in EXPERIMENTS.items():
        p = sub.add_parser(
            name,
            help=exp.summary,
            description=exp.summary,
            epilog="config schema:\n" + json.dumps(exp.schema["properties"], indent=1),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", type=Path, help="output directory (default: config 'output' or ./out)")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # --help, --version and usage errors
        return e.code if isinstance(e.code, int) else 1
    if args.verb in (None, "list"):
        print(catalogue())
        return 0
    source = str(args.config) if args.config else "<defaults>"
    try:
        text = args.config.read_text() if args.config else ""
    except OSError as e:
        print(f"{source}:1: cannot read config: {e.strerror}", file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.verb, text, source)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be positive")
            cfg["workers"] = args.workers
        out = args.out or Path(cfg.get("output", "out"))
        return run(args.verb, cfg, out, cfg.get("workers", 1))
    except ConfigError as e:
        print(f"{args.verb}: {e}", file=sys.stderr)
        return 1
    except (KeyError, ValueError, TypeError) as e:
        print(f"{args.verb}: {source}:1: invalid config: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
