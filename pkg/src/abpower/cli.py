"""Command-line interface: ``abpower <command> [flags]``.

Commands
    power        closed-form power for a given n_S - n_D
    estimate     plug-in power estimate for labels on an interference graph
    surface      grid sweep of estimated power, written as CSV (or JSON)
    simulate     Monte Carlo oracle: power, type1, expected, clt
    degree-dist  degree distribution of an edge-list graph
    generate     write a synthetic graph as an edge list

Exit codes: 0 success, 1 I/O or parse failure, 2 validation or usage failure.
Every run with ``--out`` also writes ``<out>.config.json`` echoing the resolved
flags and seed.  ``--seed`` falls back to $ABPOWER_SEED, then 0.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .graph import GraphParseError, degree_distribution, generate_graph, read_edge_list, write_edge_list
from .labeling import ClassLabels, assign_labels, neighborhood_switch_probs, read_labels, write_switch_probs
from .oracle import clt_diagnostics, empirical_expected_power, empirical_power, empirical_type_one, misspecify
from .power import (
    BernoulliModel,
    NormalModel,
    TestConfig,
    estimate_from_probs,
    power_bernoulli,
    power_normal,
)
from .streams import default_seed, derive_seed, substream
from .surface import FixedGap, GraphSource, UniformP, power_surface


class UsageError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _round12(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round12(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_round12(obj), indent=2) + "\n"


def parse_grid(text: str) -> list[float]:
    """``"0.1,0.2,0.5"`` or inclusive ``"start:stop:step"``."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(v) for v in parts)
        if step <= 0:
            raise UsageError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [float(fmt(start + i * step)) for i in range(max(count, 0))]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_generator(text: str) -> tuple[str, dict]:
    """``"pa:n=500,m=3"`` or ``"er:n=1000,edge_prob=0.01"``."""
    model, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, _, value = item.partition("=")
        params[key.strip()] = value.strip()
    return model.strip(), params


# argument groups -----------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of flag defaults; explicit flags win")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("normal", "bernoulli"), default="normal")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--delta", type=float, help="mu_A - mu_B (normal model)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mu-a", dest="mu_a", type=float)
    p.add_argument("--mu-b", dest="mu_b", type=float)
    p.add_argument("--literal", action="store_true", help="use the uncorrected proportions formula")


def _add_graph(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--graph", required=required, help="edge-list file")
    p.add_argument("--directed", action="store_true", default=None)
    p.add_argument("--n-nodes", dest="n_nodes", type=int, help="explicit node count (keeps ids verbatim)")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="abpower", description="Power of A/B tests under interference.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("power", help="closed-form power for a given gap")
    _add_common(p)
    _add_model(p)
    p.add_argument("--n", type=int, required=False)
    p.add_argument("--gap", type=float, required=False)
    p.add_argument("--na", type=float, help="realized class A size (bernoulli; default n/2)")
    p.add_argument("--nb", type=float, help="realized class B size (bernoulli; default n/2)")
    subs["power"] = p

    p = sub.add_parser("estimate", help="plug-in power on an interference graph")
    _add_common(p)
    _add_model(p)
    _add_graph(p)
    p.add_argument("--p-a", dest="p_a", type=float, default=0.5)
    p.add_argument("--labels", help="fixed labels, e.g. A,B,B or @file")
    p.add_argument("--labels-out", dest="labels_out")
    p.add_argument("--probs-out", dest="probs_out")
    subs["estimate"] = p

    p = sub.add_parser("surface", help="grid sweep of estimated power")
    _add_common(p)
    _add_model(p)
    _add_graph(p)
    p.add_argument("--generate", help="synthetic graph source, e.g. pa:n=500,m=3")
    p.add_argument("--graph-seed", dest="graph_seed", type=int, default=None)
    p.add_argument("--uniform-p", dest="uniform_p", type=float)
    p.add_argument("--fixed-gap", dest="fixed_gap", type=float)
    p.add_argument("--gap-fraction", dest="gap_fraction", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--p-a", dest="p_a", type=float, default=0.5)
    p.add_argument("--draws", type=int, default=25)
    p.add_argument("--n-grid", dest="n_grid")
    p.add_argument("--delta-grid", dest="delta_grid")
    p.add_argument("--pa-grid", dest="pa_grid")
    p.add_argument("--switch-prob-grid", dest="switch_prob_grid")
    subs["surface"] = p

    p = sub.add_parser("simulate", help="Monte Carlo oracle")
    _add_common(p)
    _add_model(p)
    _add_graph(p)
    p.add_argument("--mode", choices=("power", "type1", "expected", "clt"), required=False)
    p.add_argument("--n", type=int)
    p.add_argument("--p-a", dest="p_a", type=float, default=0.5)
    p.add_argument("--labels", help="intended labels, e.g. A,B,B or @file")
    p.add_argument("--realized", help="realized labels (power/type1), e.g. @file")
    p.add_argument("--n-d", dest="n_d", type=int, default=0, help="number of flipped units (power/type1)")
    p.add_argument("--switch-prob", dest="switch_prob", help="constant p, or 'uniform' for p_i ~ U(0,1)")
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--replicates", type=int, default=10_000)
    p.add_argument("--dump-trials", dest="dump_trials", help="per-trial CSV (debugging)")
    subs["simulate"] = p

    p = sub.add_parser("degree-dist", help="degree distribution of an edge-list graph")
    _add_common(p)
    _add_graph(p, required=False)
    p.add_argument("--mode", choices=("in", "out", "undirected"))
    subs["degree-dist"] = p

    p = sub.add_parser("generate", help="write a synthetic graph")
    _add_common(p)
    p.add_argument("--kind", choices=("pa", "er"), default="pa")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--edge-prob", dest="edge_prob", type=float, default=0.01)
    subs["generate"] = p
    return parser, subs


# helpers -------------------------------------------------------------------


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise UsageError(f"missing required flag(s): {flags}")


def make_config(args, force_null: bool = False) -> TestConfig:
    if args.model == "normal":
        mu_b = 0.0 if args.mu_b is None else args.mu_b
        if force_null:
            mu_a = mu_b
        elif args.delta is not None:
            mu_a = mu_b + args.delta
        else:
            _require(args, "mu_a")
            mu_a = args.mu_a
        model = NormalModel(mu_a, mu_b, args.sigma)
    else:
        _require(args, "mu_b")
        if force_null:
            mu_a = args.mu_b
        elif args.mu_a is None and args.delta is not None:
            mu_a = args.mu_b + args.delta
        else:
            _require(args, "mu_a")
            mu_a = args.mu_a
        model = BernoulliModel(mu_a, args.mu_b)
    return TestConfig(args.alpha, model)


def _load_graph(args):
    _require(args, "graph")
    return read_edge_list(args.graph, directed=args.directed, n=args.n_nodes)


def _labels_arg(value: str) -> ClassLabels:
    if value.startswith("@"):
        return read_labels(value[1:])
    return ClassLabels.from_string(value)


def _emit(args, text: str, meta: dict | None = None) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        sidecar = {
            "command": args.command,
            "version": __version__,
            "seed": args.seed,
            "flags": {k: v for k, v in sorted(vars(args).items()) if k != "command"},
        }
        if meta:
            sidecar.update(meta)
        with open(args.out + ".config.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dump_json(sidecar))
    else:
        sys.stdout.write(text)


# commands ------------------------------------------------------------------


def cmd_power(args) -> None:
    _require(args, "n", "gap")
    cfg = make_config(args)
    if args.model == "normal":
        beta = power_normal(args.n, args.gap, cfg.delta, cfg.model.sigma, cfg.alpha)
    else:
        na = args.n / 2 if args.na is None else args.na
        nb = args.n - na if args.nb is None else args.nb
        m = cfg.model
        beta = power_bernoulli(args.n, args.gap, na, nb, m.mu_A, m.mu_B, cfg.alpha, literal=args.literal)
    if args.format == "json":
        _emit(args, dump_json({"beta": beta}))
    else:
        _emit(args, fmt(beta) + "\n")


def cmd_estimate(args) -> None:
    g = _load_graph(args)
    cfg = make_config(args)
    if args.labels:
        c = _labels_arg(args.labels)
    else:
        c = assign_labels(g.n, args.p_a, seed=args.seed)
    p = neighborhood_switch_probs(g, c)
    est = estimate_from_probs(p, c, cfg, literal=args.literal)
    if args.labels_out:
        with open(args.labels_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(c.to_lines())
    if args.probs_out:
        write_switch_probs(args.probs_out, p, g)
    out = est.to_dict()
    out["n_A"], out["n_B"] = c.n_a, c.n_b
    _emit(args, dump_json(out), {"graph_nodes": g.n, "graph_edges": g.num_edges})


def _surface_source(args):
    chosen = [
        name
        for name in ("graph", "generate", "uniform_p", "fixed_gap", "gap_fraction")
        if getattr(args, name) is not None
    ]
    if len(chosen) != 1:
        raise UsageError("choose exactly one source: --graph, --generate, --uniform-p, --fixed-gap, --gap-fraction")
    if args.graph is not None:
        return GraphSource(_load_graph(args), draws=args.draws)
    if args.generate is not None:
        kind, params = parse_generator(args.generate)
        gseed = args.seed if args.graph_seed is None else args.graph_seed
        try:
            g = generate_graph(kind, seed=gseed, **params)
        except KeyError as exc:
            raise UsageError(f"generator {kind!r} is missing parameter {exc}") from None
        return GraphSource(g, draws=args.draws)
    if args.uniform_p is not None:
        return UniformP(args.uniform_p)
    if args.fixed_gap is not None:
        return FixedGap(gap=args.fixed_gap)
    return FixedGap(fraction=args.gap_fraction)


def cmd_surface(args) -> None:
    grid = {}
    for axis, flag in (("n", "n_grid"), ("p_A", "pa_grid"), ("switch_prob", "switch_prob_grid"), ("delta", "delta_grid")):
        raw = getattr(args, flag)
        if raw is not None:
            grid[axis] = parse_grid(raw)
    if not grid or any(not v for v in grid.values()):
        raise UsageError("empty grid: give at least one nonempty --*-grid flag")
    if "n" in grid:
        grid["n"] = [int(v) for v in grid["n"]]
    swept_only = "delta" in grid and args.delta is None and args.mu_a is None
    base = _grid_base(args, grid["delta"][0]) if swept_only else make_config(args)
    source = _surface_source(args)
    rows = power_surface(grid, base, source, seed=args.seed, n=args.n, p_a=args.p_a,
                         threads=args.threads, literal=args.literal)
    axes = list(grid)
    if args.format == "json":
        text = dump_json([{**r.point, "beta": r.beta, "assumption_flags": list(r.assumption_flags)} for r in rows])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*axes, "beta", "assumption_flags"])
        for r in rows:
            w.writerow([*(_cell(r.point[a]) for a in axes), fmt(r.beta), ";".join(r.assumption_flags)])
        text = buf.getvalue()
    meta = {"grid": grid, "config": base.to_dict()}
    if isinstance(source, GraphSource):
        meta["graph_nodes"] = source.graph.n
        meta["graph_edges"] = source.graph.num_edges
    _emit(args, text, meta)


def _grid_base(args, first_delta: float) -> TestConfig:
    # every point overrides delta; the base only needs mu_B and a valid mu_A
    if args.model == "bernoulli":
        _require(args, "mu_b")
        return TestConfig(args.alpha, BernoulliModel(args.mu_b + first_delta, args.mu_b))
    mu_b = 0.0 if args.mu_b is None else args.mu_b
    return TestConfig(args.alpha, NormalModel(mu_b + first_delta, mu_b, args.sigma))


def _cell(v) -> str:
    return str(v) if isinstance(v, int) else fmt(float(v))


def _switch_probs(args, c: ClassLabels, graph=None) -> np.ndarray:
    if args.switch_prob is None:
        if graph is None:
            raise UsageError("give --switch-prob or --graph")
        return neighborhood_switch_probs(graph, c)
    if args.switch_prob == "uniform":
        return substream(args.seed, 30).random(len(c))
    try:
        q = float(args.switch_prob)
    except ValueError:
        raise UsageError("--switch-prob must be a number or 'uniform'") from None
    return np.full(len(c), q)


def cmd_simulate(args) -> None:
    _require(args, "mode")
    graph = _load_graph(args) if args.graph else None
    if args.labels:
        c = _labels_arg(args.labels)
    else:
        n = graph.n if graph is not None else args.n
        if n is None:
            raise UsageError("give --n, --labels or --graph")
        c = assign_labels(n, args.p_a, seed=derive_seed(args.seed, 31))
    if args.mode == "clt":
        p = _switch_probs(args, c, graph)
        result = clt_diagnostics(p, c, replicates=args.replicates, seed=args.seed, threads=args.threads)
        _emit(args, dump_json(result.to_dict()))
        return
    if args.mode == "expected":
        cfg = make_config(args)
        p = _switch_probs(args, c, graph)
        est = empirical_expected_power(p, c, cfg, trials=args.trials, seed=args.seed,
                                       threads=args.threads, dump=args.dump_trials)
        _emit(args, dump_json({**est.to_dict(), "config": cfg.to_dict()}))
        return
    d = _labels_arg(args.realized) if args.realized else misspecify(c, args.n_d, seed=derive_seed(args.seed, 32))
    if args.mode == "type1":
        cfg = make_config(args, force_null=True)
        est = empirical_type_one(c, d, cfg, trials=args.trials, seed=args.seed,
                                 threads=args.threads, dump=args.dump_trials)
    else:
        cfg = make_config(args)
        est = empirical_power(c, d, cfg, trials=args.trials, seed=args.seed,
                              threads=args.threads, dump=args.dump_trials)
    n_d = int(np.sum(c.is_a != d.is_a))
    _emit(args, dump_json({**est.to_dict(), "n": len(c), "n_D": n_d, "config": cfg.to_dict()}))


def cmd_degree_dist(args) -> None:
    g = _load_graph(args)
    dist = degree_distribution(g, args.mode)
    if args.format == "json":
        text = dump_json([{"degree": d, "probability": p} for d, p in dist.entries])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "probability", "log_degree", "log_probability"])
        for d, p in dist.entries:
            w.writerow([d, fmt(p), fmt(math.log(d)) if d > 0 else "", fmt(math.log(p)) if p > 0 else ""])
        text = buf.getvalue()
    _emit(args, text, {"graph_nodes": g.n, "graph_edges": g.num_edges, "directed": g.directed})


def cmd_generate(args) -> None:
    _require(args, "n", "out")
    if args.kind == "pa":
        g = generate_graph("preferential_attachment", seed=args.seed, n=args.n, m=args.m)
    else:
        g = generate_graph("erdos_renyi", seed=args.seed, n=args.n, edge_prob=args.edge_prob)
    write_edge_list(g, args.out)
    with open(args.out + ".config.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_json({"command": "generate", "version": __version__, "seed": args.seed,
                            "flags": {k: v for k, v in sorted(vars(args).items()) if k != "command"},
                            "graph_nodes": g.n, "graph_edges": g.num_edges}))


COMMANDS = {
    "power": cmd_power,
    "estimate": cmd_estimate,
    "surface": cmd_surface,
    "simulate": cmd_simulate,
    "degree-dist": cmd_degree_dist,
    "generate": cmd_generate,
}


def _parse(argv: Sequence[str] | None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(overrides, dict):
            raise UsageError("config file must hold a JSON object")
        overrides = {k.replace("-", "_"): v for k, v in overrides.items()}
        subs[args.command].set_defaults(**overrides)
        args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = default_seed()
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be at least 1")
    return args


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _parse(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (GraphParseError, OSError) as exc:
        print(f"abpower: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"abpower: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
