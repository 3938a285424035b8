"""Command-line front end.

    topoplan gen      synthesize an instance directory
    topoplan exact    exact dominance fronts -> front.csv
    topoplan moea     seeded NSGA-III runs -> trace.csv, final_front.csv
    topoplan metrics  IGD+ and front coverage per generation -> metrics.csv
    topoplan oracle   brute-force equivalence check on small instances
    topoplan count    number of block-algorithm evaluations for given bounds

Exit codes: 0 success, 1 validation error, 2 infeasible or mismatch, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .dataset import GeneratorConfig, case_study_config, depth_histogram, generate_instance, load_instance, store_instance
from .errors import InfeasibleError, InitializationError, OracleLimitError, ValidationError
from .objectives import ObjectiveVector

EXIT_OK, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3

FRONT_HEADER = ["front_rank", "depth", "switches", "non_ref_steps", "lf1", "lf1_rounded",
                "strategy_count", "representative"]
TRACE_HEADER = ["generation", "lf1", "depth", "switches", "non_ref"]
N_COVERAGE = 10
METRICS_HEADER = (["generation", "igd_plus"] + [f"I_{k}" for k in range(1, N_COVERAGE + 1)]
                  + [f"Ihat_{k}" for k in range(1, N_COVERAGE + 1)])

# target generation counts per population scale
GENERATIONS = {"S": 9230, "M": 6340, "L": 4700}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else ("inf" if x > 0 else "-inf")


# -- gen ---------------------------------------------------------------------

def _parse_counts(text: str) -> dict:
    try:
        pairs = [p.split(":") for p in text.split(",") if p]
        return {int(d): int(c) for d, c in pairs}
    except ValueError:
        raise ValidationError(f"bad --depth-counts {text!r}; expected d:c[,d:c...]") from None


def _parse_range(text: str) -> tuple:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise ValidationError(f"bad range {text!r}; expected lo:hi") from None
    return lo, hi


def cmd_gen(args) -> int:
    if args.case_study:
        config = case_study_config(args.seed)
    else:
        if args.t_max is None or args.depth_counts is None:
            raise ValidationError("--t-max and --depth-counts are required unless --case-study is given")
        extra = {}
        if args.lf1_range:
            extra["lf1_base_range"] = _parse_range(args.lf1_range)
        config = GeneratorConfig(t_max=args.t_max, count_per_depth=_parse_counts(args.depth_counts),
                                 availability_drop_rate=args.drop_rate, seed=args.seed,
                                 decimals=args.decimals, **extra)
    instance = generate_instance(config)
    store_instance(instance, args.out)
    sizes = [len(a) for a in instance.available_indices]
    print(f"wrote {args.out}: {instance.n_topologies} topologies, t_max={instance.t_max}")
    print(f"depth histogram: {depth_histogram(instance)}")
    print(f"available per step: min {min(sizes)}, max {max(sizes)}")
    return EXIT_OK


# -- exact -------------------------------------------------------------------

def _front_rows(result) -> list:
    rows = []
    for e in result.entries():
        rows.append([e.front_rank, e.depth, e.switches, e.non_ref, _fmt(e.lf1), f"{e.lf1_rounded:.1f}",
                     e.strategy_count, ";".join(str(g) for g in e.representative)])
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], float(r[5])))
    return rows


def cmd_exact(args) -> int:
    from .blocks import BlockTable
    from .exact import count_evaluations, exact_fronts
    from .metrics import NormalizationBounds

    instance = load_instance(args.instance)
    start = time.perf_counter()
    table = BlockTable(instance, args.d_max) if 0 <= args.d_max <= instance.max_depth else None
    result = exact_fronts(instance, args.d_max, args.s_max, args.fronts, args.strict_adjacency, table)
    elapsed = time.perf_counter() - start
    out = Path(args.out)
    if args.count_evals:
        formula = count_evaluations(args.d_max, args.s_max, instance.t_max)
        print(f"evaluations: formula {formula}, instrumented {result.eval_count}")
        if formula != result.eval_count:
            print("evaluation counts differ", file=sys.stderr)
            return EXIT_INFEASIBLE
    _write_csv(out / "front.csv", FRONT_HEADER, _front_rows(result))
    meta = {"t_max": instance.t_max, "d_max": args.d_max, "s_max": args.s_max, "fronts": args.fronts,
            "strict_adjacency": bool(args.strict_adjacency), "eval_count": result.eval_count,
            "status": result.status, "instance": instance.name}
    _write_json(out / "meta.json", meta)
    if result.status != "ok":
        print("no feasible strategy within the bounds", file=sys.stderr)
        return EXIT_INFEASIBLE
    bounds = NormalizationBounds.from_problem(result.lf1_bounds, args.d_max, args.s_max, instance.t_max)
    _write_json(out / "bounds.json", {"ideal": list(bounds.ideal), "maximum": list(bounds.maximum)})
    sizes = [len(f) for f in result.fronts]
    print(f"fronts: {sizes} points; first-front strategies: {sum(e.strategy_count for e in result.fronts[0])}")
    print(f"runtime: {elapsed:.2f} s")
    return EXIT_OK


def read_front_csv(path) -> list:
    """Front file -> list of ``[(ObjectiveVector, count)]`` per rank."""
    fronts = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != FRONT_HEADER:
            raise ValidationError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            p = ObjectiveVector(float(row["lf1_rounded"]), int(row["depth"]), int(row["switches"]),
                                int(row["non_ref_steps"]))
            fronts.setdefault(int(row["front_rank"]), []).append((p, int(row["strategy_count"])))
    return [fronts[k] for k in sorted(fronts)]


# -- moea --------------------------------------------------------------------

def _moea_config(args, t_max):
    from .moea import MoeaConfig, named_config

    common = dict(d_max=args.d_max, s_max=args.s_max, k_crossover=args.k,
                  n_reference_directions=args.directions)
    if args.config:
        generations = args.generations
        if generations is None:
            generations = GENERATIONS.get(args.config.rsplit("-", 1)[-1])
        return named_config(args.config, generations=generations, **common)
    missing = [f for f in ("l_bar", "d_bar", "pm", "generations") if getattr(args, f) is None]
    if missing:
        raise ValidationError("either --config or all of --l-bar --d-bar --pm --generations are required")
    return MoeaConfig(l_bar=args.l_bar, d_bar=args.d_bar, p_m=args.pm, p_c=args.pc,
                      generations=args.generations, **common)


def _trace_rows(fronts) -> list:
    rows = []
    for r, pts in enumerate(fronts):
        for p in sorted(map(tuple, np.asarray(pts).reshape(-1, 4).tolist()), key=lambda q: (q[1], q[2], q[3], q[0])):
            rows.append([r, _fmt(p[0]), int(p[1]), int(p[2]), int(p[3])])
    return rows


def cmd_moea(args) -> int:
    from .moea import merge_traces, representatives, run_seeds

    instance = load_instance(args.instance)
    config = _moea_config(args, instance.t_max)
    if config.d_max > instance.max_depth:
        raise ValidationError(f"--d-max {config.d_max} exceeds instance depth {instance.max_depth}")
    if config.s_max > instance.t_max - 1:
        raise ValidationError(f"--s-max {config.s_max} exceeds t_max - 1 = {instance.t_max - 1}")
    if args.seeds < 1:
        raise ValidationError("--seeds must be >= 1")
    seeds = [args.seed_base + i for i in range(args.seeds)]
    start = time.perf_counter()
    traces = run_seeds(instance, config, seeds)
    elapsed = time.perf_counter() - start
    out = Path(args.out)
    for trace in traces:
        _write_csv(out / "seeds" / f"seed-{trace.seeds[0]}" / "trace.csv", TRACE_HEADER, _trace_rows(trace.fronts))
    merged = merge_traces(traces)
    _write_csv(out / "trace.csv", TRACE_HEADER, _trace_rows(merged.fronts))
    final = merged.fronts[-1]
    rows = []
    for row, rep in zip(_trace_rows([final]), representatives(merged, final)):
        row[0] = len(merged.fronts) - 1
        rows.append(row + [";".join(str(g) for g in instance.to_ids(rep))])
    _write_csv(out / "final_front.csv", TRACE_HEADER + ["representative"], rows)
    meta = {"t_max": instance.t_max, "seeds": seeds, "population_size": config.population_size(instance.t_max),
            "config": {k: v for k, v in asdict(config).items() if k != "seed"}, "instance": instance.name}
    _write_json(out / "meta.json", meta)
    print(f"population {meta['population_size']}, {config.generations} generations, {len(seeds)} seeds")
    print(f"final combined front: {len(final)} points; runtime {elapsed:.1f} s")
    return EXIT_OK


def read_trace_csv(path) -> dict:
    """generation -> (n, 4) array of objective points."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames[:5] != TRACE_HEADER:
            raise ValidationError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            out.setdefault(int(row["generation"]), []).append(
                (float(row["lf1"]), int(row["depth"]), int(row["switches"]), int(row["non_ref"])))
    return {g: np.asarray(v, dtype=np.float64) for g, v in out.items()}


# -- metrics -----------------------------------------------------------------

def cmd_metrics(args) -> int:
    from .metrics import NormalizationBounds, coverage_table, igd_plus

    ref_path = Path(args.reference)
    ref_dir = ref_path.parent
    fronts = read_front_csv(ref_path)[:args.fronts]
    if not fronts:
        raise ValidationError(f"{ref_path}: no reference points")
    ref_fronts = [[p for p, _ in f] for f in fronts]

    approx = Path(args.approx)
    if approx.is_dir():
        meta_a, meta_r = approx / "meta.json", ref_dir / "meta.json"
        if meta_a.exists() and meta_r.exists():
            ta, tr = _read_json(meta_a)["t_max"], _read_json(meta_r)["t_max"]
            if ta != tr:
                raise ValidationError(f"t_max mismatch: reference {tr}, approximation {ta}")
        generations = read_trace_csv(approx / "trace.csv")
        n_gen = int(_read_json(meta_a)["config"]["generations"]) + 1 if meta_a.exists() else None
    else:
        # a front file: its first front is a single-generation approximation
        approx_fronts = read_front_csv(approx)
        first = [p for p, _ in approx_fronts[0]] if approx_fronts else []
        generations = {0: np.asarray(first, dtype=np.float64).reshape(-1, 4)}
        n_gen = 1
    if n_gen is None:
        n_gen = max(generations, default=-1) + 1

    if args.bounds == "auto":
        b = _read_json(ref_dir / "bounds.json")
        bounds = NormalizationBounds(ObjectiveVector(*b["ideal"]), ObjectiveVector(*b["maximum"]))
    elif args.bounds == "case-study":
        from .metrics import CASE_STUDY_BOUNDS
        bounds = CASE_STUDY_BOUNDS
    else:
        b = _read_json(Path(args.bounds))
        bounds = NormalizationBounds(ObjectiveVector(*b["ideal"]), ObjectiveVector(*b["maximum"]))

    rows = []
    for g in range(n_gen):
        pts = generations.get(g, np.zeros((0, 4)))
        igd = igd_plus(pts, ref_fronts[0], bounds)
        cov = coverage_table(pts.tolist(), ref_fronts, N_COVERAGE)
        rows.append([g, _fmt(igd)] + [c for c, _ in cov] + [_fmt(r) for _, r in cov])
    out = Path(args.out) if args.out else (approx if approx.is_dir() else approx.parent) / "metrics.csv"
    _write_csv(out, METRICS_HEADER, rows)
    last = rows[-1]
    print(f"wrote {out}: {len(rows)} generations; final igd_plus {last[1]}, I_1 {last[2]}")
    return EXIT_OK


# -- oracle ------------------------------------------------------------------

def cmd_oracle(args) -> int:
    from .oracle import OracleLimits, check_equivalence

    instance = load_instance(args.instance)
    limits = OracleLimits(args.limit)
    candidate, strict = None, True
    if args.front:
        candidate = read_front_csv(args.front)[:args.fronts]
        meta = Path(args.front).parent / "meta.json"
        # loose counts include tuples that repeat a topology across a block
        # boundary, so only strict files can be compared against raw strategies
        strict = meta.exists() and bool(_read_json(meta).get("strict_adjacency"))
    report = check_equivalence(instance, args.d_max, args.s_max, args.fronts, limits,
                               candidate=candidate, candidate_counts=strict)
    if report.passed:
        print(f"pass: {report.message}")
        return EXIT_OK
    print(f"mismatch: {report.message}")
    return EXIT_INFEASIBLE


def cmd_count(args) -> int:
    from .exact import count_evaluations

    print(count_evaluations(args.d_max, args.s_max, args.t_max))
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="topoplan", description="Exact and evolutionary multi-objective topology planning.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="synthesize an instance")
    g.add_argument("--t-max", type=int)
    g.add_argument("--depth-counts")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--drop-rate", type=float, default=0.1)
    g.add_argument("--lf1-range")
    g.add_argument("--decimals", type=int, default=2)
    g.add_argument("--case-study", action="store_true", help="24 steps, ~39,180 topologies per step")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("exact", help="exact dominance fronts")
    e.add_argument("--instance", required=True)
    e.add_argument("--d-max", type=int, required=True)
    e.add_argument("--s-max", type=int, required=True)
    e.add_argument("--fronts", type=int, default=1)
    e.add_argument("--strict-adjacency", action="store_true")
    e.add_argument("--count-evals", action="store_true")
    e.add_argument("--out", default=".")
    e.set_defaults(func=cmd_exact)

    m = sub.add_parser("moea", help="NSGA-III runs")
    m.add_argument("--instance", required=True)
    m.add_argument("--config", help="pm{05,10,15,20}-{S,M,L}")
    m.add_argument("--l-bar", type=int)
    m.add_argument("--d-bar", type=int)
    m.add_argument("--pm", type=float)
    m.add_argument("--pc", type=float)
    m.add_argument("--generations", type=int)
    m.add_argument("--seeds", type=int, default=15)
    m.add_argument("--seed-base", type=int, required=True)
    m.add_argument("--d-max", type=int, default=3)
    m.add_argument("--s-max", type=int, default=5)
    m.add_argument("--k", type=int, default=2)
    m.add_argument("--directions", type=int, default=100)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_moea)

    q = sub.add_parser("metrics", help="IGD+ and front coverage")
    q.add_argument("--reference", required=True, help="front.csv from `topoplan exact`")
    q.add_argument("--approx", required=True, help="run directory from `topoplan moea`, or a front file")
    q.add_argument("--bounds", default="auto", help="auto | case-study | bounds.json path")
    q.add_argument("--fronts", type=int, default=N_COVERAGE)
    q.add_argument("--out")
    q.set_defaults(func=cmd_metrics)

    o = sub.add_parser("oracle", help="brute-force equivalence check")
    o.add_argument("--instance", required=True)
    o.add_argument("--d-max", type=int, required=True)
    o.add_argument("--s-max", type=int, required=True)
    o.add_argument("--fronts", type=int, default=3)
    o.add_argument("--limit", type=int, default=10_000_000)
    o.add_argument("--front", help="compare this front.csv instead of solving")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("count", help="block-algorithm evaluation count")
    c.add_argument("--d-max", type=int, required=True)
    c.add_argument("--s-max", type=int, required=True)
    c.add_argument("--t-max", type=int, required=True)
    c.set_defaults(func=cmd_count)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ValidationError, OracleLimitError, InitializationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
