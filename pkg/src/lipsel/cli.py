"""Command-line interface: JSON in, JSON or CSV out.

Exit codes: 0 success, 1 malformed input or I/O failure, 2 a mathematical
hypothesis fails (the offending subset is named in the JSON output).
"""

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .config import use_tolerances
from .errors import HypothesisError, InputError, LipselError
from .geometry import AffineSubspace
from .metricspace import Modulus, PseudometricSpace, WeightedGraph, full_graph

SCHEMA_VERSION = "1.0"
CSV_COLUMNS = [
    "id",
    "n",
    "k",
    "n_vertices",
    "oracle_lambda",
    "engine_seminorm",
    "ratio",
    "stage_C",
    "subset_max",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- formatting


def format_number(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def to_json(obj):
    """Deterministic JSON: sorted keys, 17 significant digits, infinities as strings."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {to_json(v)}" for k, v in items) + "}"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def csv_cell(x):
    if isinstance(x, str):
        return x
    return format_number(x).strip('"')


# ------------------------------------------------------------------- parsing


def _num(x, what):
    if isinstance(x, str):
        low = x.strip().lower()
        if low in ("inf", "+inf", "infinity"):
            return math.inf
        if low in ("-inf", "-infinity"):
            return -math.inf
        raise InputError(f"{what}: expected a number, got {x!r}")
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{what}: expected a number, got {x!r}")
    return float(x)


def _array(x, what, ndim=None):
    def conv(v):
        if isinstance(v, list):
            return [conv(u) for u in v]
        return _num(v, what)

    if x is None:
        raise InputError(f"missing field {what!r}")
    try:
        arr = np.array(conv(x), dtype=float)
    except ValueError as exc:
        raise InputError(f"{what}: ragged array") from exc
    if ndim is not None and arr.ndim != ndim:
        if not (arr.size == 0 and ndim > 1):
            raise InputError(f"{what}: expected a {ndim}-d array")
    return arr


def _require(d, key):
    if not isinstance(d, dict) or key not in d:
        raise InputError(f"missing field {key!r}")
    return d[key]


def parse_modulus(d):
    if d is None:
        return Modulus.power(1.0)
    return Modulus.from_dict(d)


def parse_space(d):
    return PseudometricSpace(_array(_require(d, "dist"), "dist", 2))


def parse_graph(d):
    rho = _array(_require(d, "rho"), "rho", 2)
    edges = [tuple(int(v) for v in e) for e in _require(d, "edges")]
    weights = [_num(w, "weights") for w in _require(d, "weights")]
    n = int(d.get("n_vertices", rho.shape[0]))
    return WeightedGraph(n, tuple(edges), tuple(weights), PseudometricSpace(rho), float(d.get("A", 1.0)))


def parse_flats(items, n=None):
    flats = []
    for i, fd in enumerate(items):
        base = _array(_require(fd, "base"), f"flats[{i}].base", 1)
        basis = _array(fd.get("basis", []), f"flats[{i}].basis")
        basis = basis.reshape(-1, base.size)
        try:
            flats.append(AffineSubspace(base, basis))
        except InputError:
            # accept any spanning set and orthonormalise it
            flats.append(AffineSubspace.from_spanning(base, basis))
    if not flats:
        raise InputError("need at least one flat")
    return flats


def parse_affine_map(data):
    from .selection import AffineMap

    if "graph" in data:
        graph = parse_graph(data["graph"])
    else:
        graph = full_graph(parse_space(_require(data, "space")))
    flats = parse_flats(_require(data, "flats"))
    k = int(data.get("k", max(F.dim for F in flats)))
    return AffineMap(graph, flats, k)


def load_json(path):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


# ------------------------------------------------------------------ commands


def cmd_select(data, args):
    from .selection import select_affine, validate_selection

    am = parse_affine_map(data)
    sel = select_affine(am)
    report = validate_selection(am, sel)
    report.pop("edge_radius", None)
    return {
        "points": sel.points,
        "seminorm": sel.seminorm,
        "validation": report,
        "stages": sel.diagnostics["stages"],
        "stage_C": sel.diagnostics.get("C", 1.0),
    }


def cmd_select_cube(data, args):
    from .selection import CubeMap, select_cube

    space = parse_space(_require(data, "space"))
    centers = _array(_require(data, "centers"), "centers", 2)
    radii = _array(_require(data, "radii"), "radii", 1)
    sel = select_cube(CubeMap(space, centers, radii))
    return {"points": sel.points, "seminorm": sel.seminorm}


def cmd_whitney(data, args):
    from .whitney import SampledFunction, whitney_select

    sf = SampledFunction(
        _array(_require(data, "X"), "X", 2),
        _array(_require(data, "f"), "f", 1),
        parse_modulus(data.get("omega")),
    )
    jet, report = whitney_select(sf, scale=args.scale)
    report.pop("stages", None)
    return {"g": jet.g, "omega": jet.omega.to_dict(), "report": report}


def _parse_jet(data):
    from .whitney import Jet1

    return Jet1(
        _array(_require(data, "X"), "X", 2),
        _array(_require(data, "f"), "f", 1),
        _array(_require(data, "g"), "g", 2),
        Modulus.power(1.0),
    )


def cmd_extend_c11(data, args):
    from .envelope import extend_c11, jet_c11_seminorm

    jet = _parse_jet(data)
    if "M" in data:
        M = _num(data["M"], "M")
    elif args.auto_M:
        M = jet_c11_seminorm(jet)
    else:
        raise InputError("missing field 'M' (pass --auto-M to use the jet seminorm)")
    queries = _array(_require(data, "queries"), "queries", 2)
    values, grads = extend_c11(jet, M, queries)
    return {"M": M, "values": values, "gradients": grads}


def cmd_kirszbraun(data, args):
    from .envelope import kirszbraun_extend, lipschitz_constant

    X = _array(_require(data, "X"), "X", 2)
    f = _array(_require(data, "f"), "f")
    f = f.reshape(X.shape[0], -1)
    if "M" in data:
        M = _num(data["M"], "M")
    elif args.auto_M:
        M = lipschitz_constant(X, f)
    else:
        raise InputError("missing field 'M' (pass --auto-M to use the Lipschitz constant of the data)")
    queries = _array(_require(data, "queries"), "queries", 2)
    return {"M": M, "values": kirszbraun_extend(X, f, M, queries)}


def cmd_linsys(data, args):
    from .linsys import SampledSystem, solve_holder_system

    system = SampledSystem(
        _array(_require(data, "X"), "X", 2),
        _array(_require(data, "A"), "A", 3),
        _array(_require(data, "b"), "b", 2),
        parse_modulus(data.get("omega")),
    )
    g, sem, sel = solve_holder_system(system)
    resid = np.abs(np.einsum("pij,pj->pi", system.A, g) - system.b).max(initial=0.0)
    return {"g": g, "seminorm": sem, "residual": float(resid), "stages": sel.diagnostics["stages"]}


def cmd_oracle(data, args):
    from .oracle import finiteness_check, jet_finiteness_check, optimal_selection_lp
    from .whitney import SampledFunction

    if "flats" in data:
        am = parse_affine_map(data)
        glob = optimal_selection_lp(am.graph.rho, am.flats)
        fin = finiteness_check(am, max_size=data.get("max_size"))
        return {
            "lambda_star": glob.lambda_star,
            "witness": glob.witness,
            "subset_max": fin.lambda_star,
            "subset_argmax": fin.argmax,
            "n_subsets_solved": fin.n_solved,
            "n_subsets_skipped": fin.n_skipped,
        }
    sf = SampledFunction(
        _array(_require(data, "X"), "X", 2),
        _array(_require(data, "f"), "f", 1),
        parse_modulus(data.get("omega")),
    )
    rep = jet_finiteness_check(sf, max_card=data.get("max_card"))
    return {
        "jet_subset_max": rep.lambda_star,
        "subset_argmax": rep.argmax,
        "n_subsets_solved": rep.n_solved,
        "n_subsets_skipped": rep.n_skipped,
    }


COMMANDS = {
    "select": cmd_select,
    "select-cube": cmd_select_cube,
    "whitney": cmd_whitney,
    "extend-c11": cmd_extend_c11,
    "kirszbraun": cmd_kirszbraun,
    "linsys": cmd_linsys,
    "oracle": cmd_oracle,
}


# --------------------------------------------------------------------- bench


def bench_row(suite, seed, idx, N):
    """One benchmark instance; everything is drawn from ``(seed, idx)``."""
    from .instances import random_selection_instance, rescale_instance
    from .oracle import ZERO_LAMBDA, finiteness_check, optimal_selection_lp
    from .selection import select_affine

    rng = np.random.default_rng([seed, idx])
    am = random_selection_instance(rng, N=N if N >= 2 else None)
    fin = finiteness_check(am)
    if suite == "selection-ratio" and ZERO_LAMBDA < fin.lambda_star < math.inf:
        am = rescale_instance(am, fin.lambda_star)
        fin = finiteness_check(am)
    glob = optimal_selection_lp(am.graph.rho, am.flats).lambda_star
    t0 = time.perf_counter()
    try:
        sel = select_affine(am)
        sem, C = sel.seminorm, sel.diagnostics.get("C", 1.0)
    except HypothesisError:
        sem, C = math.inf, math.nan
    wall = time.perf_counter() - t0
    if glob > ZERO_LAMBDA:
        ratio = sem / glob
    else:
        ratio = math.nan  # undefined when the optimum vanishes
    return {
        "id": f"{suite}-{idx:04d}",
        "n": am.ambient,
        "k": am.k,
        "n_vertices": len(am.flats),
        "oracle_lambda": glob,
        "engine_seminorm": sem,
        "ratio": ratio,
        "stage_C": C,
        "subset_max": fin.lambda_star,
        "wall_time": wall,
    }


def run_bench(suite, seed, sizes, count, timing):
    cols = CSV_COLUMNS + (["wall_time"] if timing else [])
    rows = [bench_row(suite, seed, i, sizes[i % len(sizes)]) for i in range(count)]
    ratios = [r["ratio"] for r in rows if math.isfinite(r["ratio"])]
    summary = {c: "" for c in cols}
    summary["id"] = "summary"
    summary["ratio"] = max(ratios) if ratios else math.nan
    fails = [r for r in rows if math.isinf(r["engine_seminorm"])]
    summary["engine_seminorm"] = f"failures={len(fails)}"
    summary["subset_max"] = max(r["subset_max"] for r in rows) if rows else math.nan
    if timing:
        summary["wall_time"] = sum(r["wall_time"] for r in rows)
    lines = [",".join(cols)]
    for r in rows + [summary]:
        lines.append(",".join(csv_cell(r[c]) for c in cols))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------- main


def build_parser():
    p = _Parser(prog="lipsel", description="Lipschitz selections and explicit extensions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--output", "-o", default="-", help="output path ('-' for stdout)")
        sp.add_argument("--tol-feas", type=float, default=None)
        sp.add_argument("--tol-kkt", type=float, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are sequential")

    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("input", help="JSON input path ('-' for stdin)")
        if name == "whitney":
            sp.add_argument("--scale", type=float, default=None, help="fixed scale (default: automatic)")
        if name in ("extend-c11", "kirszbraun"):
            sp.add_argument("--auto-M", action="store_true", help="default M from the data when absent")
        common(sp)
    sp = sub.add_parser("bench")
    sp.add_argument("suite", help="selection-ratio or finiteness")
    sp.add_argument("--sizes", default="2,3,4,5,6", help="comma-separated vertex counts")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--timing", action="store_true", help="add a wall_time column")
    common(sp)
    return p


def _write(text, path):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from exc


def _parse_sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad --sizes {text!r}") from exc
    if not sizes:
        raise InputError("--sizes must list at least one vertex count")
    if any(s < 2 for s in sizes):
        raise InputError("vertex counts must be >= 2")
    return sizes


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"lipsel: {exc}", file=sys.stderr)
        return 1
    overrides = {}
    if args.tol_feas is not None:
        overrides["feas"] = args.tol_feas
    if args.tol_kkt is not None:
        overrides["kkt"] = args.tol_kkt
    try:
        if args.threads < 1:
            raise InputError("--threads must be >= 1")
        with use_tolerances(**overrides):
            if args.command == "bench":
                if args.suite not in ("selection-ratio", "finiteness"):
                    raise InputError(f"unknown suite {args.suite!r}")
                if args.count < 1:
                    raise InputError("--count must be >= 1")
                text = run_bench(args.suite, args.seed, _parse_sizes(args.sizes), args.count, args.timing)
                _write(text, args.output)
                return 0
            data = load_json(args.input)
            if not isinstance(data, dict):
                raise InputError("top-level JSON value must be an object")
            try:
                result = COMMANDS[args.command](data, args)
                code = 0
            except HypothesisError as exc:
                result = exc.to_dict()
                code = 2
            result["schema_version"] = SCHEMA_VERSION
            result["command"] = args.command
            _write(to_json(result) + "\n", args.output)
            return code
    except (InputError, LipselError) as exc:
        print(f"lipsel: error: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    sys.exit(run(argv))
