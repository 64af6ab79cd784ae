"""Config-driven experiment runner.

    qtrunc <command> --config <path> [--out <dir>] [--seed <u64>] [--workers <n>] [--no-cache]
    qtrunc report <sidecar.json>... [--out <dir>]

Every command writes ``<command>.csv`` (one row per sweep point) and a JSON
sidecar ``<command>.json`` with the full certificates. Results are cached
under QTRUNC_CACHE_DIR (default ~/.cache/qtrunc) keyed by a sha256 of
command, config, seed and tool version. Exit codes: 0 success, 2 invalid
input, 3 resource or convergence failure.

CSV columns per command:
    lipnorm      element, length, lower, upper, window, method
    fejer-sweep  n, epsilon, epsilon_float, lower, gap, level, method, scope
    distq        level, kernel, upper, lower, gap, max_violation, passed
    oracle       case, value, oracle, abs_error, passed
    states       budget, deviation, success, net_size
    fusion       gamma, beta, decomposition
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
from pydantic import ValidationError

from . import __version__, groups
from .config import COMMANDS, ExperimentConfig, cache_key, load_config
from .errors import PreconditionError, QTruncError

log = logging.getLogger("qtrunc")

SCHEMA = "qtrunc.result/1"
REPORT_SCHEMA = "qtrunc.report/1"

COLUMNS = {
    "lipnorm": ["element", "length", "lower", "upper", "window", "method"],
    "fejer-sweep": ["n", "epsilon", "epsilon_float", "lower", "gap", "level", "method", "scope"],
    "distq": ["level", "kernel", "upper", "lower", "gap", "max_violation", "passed"],
    "oracle": ["case", "value", "oracle", "abs_error", "passed"],
    "states": ["budget", "deviation", "success", "net_size"],
    "fusion": ["gamma", "beta", "decomposition"],
}


@dataclass
class ResultRecord:
    command: str
    config_hash: str
    columns: list[str]
    rows: list[list]
    version: str = __version__
    timing: dict = field(default_factory=dict)
    certificates: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def sidecar(self, config: dict) -> dict:
        return {
            "schema": SCHEMA,
            "version": self.version,
            "command": self.command,
            "config_hash": self.config_hash,
            "config": config,
            "columns": self.columns,
            "rows": [[fmt(v) for v in row] for row in self.rows],
            "certificates": self.certificates,
            "extra": self.extra,
            "timing": self.timing,
        }


def fmt(v) -> str:
    """Deterministic text for CSV cells: exact rationals as p/q, floats by repr."""
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return " ".join(str(c) for c in v)
    if v is None:
        return ""
    return str(v)


def _map(fn: Callable, items: list, workers: int) -> list:
    # results are collected in input order whatever the completion order
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- commands ---------------------------------------------------------------------------


def _kernel_for(cfg: ExperimentConfig, point: int):
    from .kernels import counit_kernel, fejer_kernel, folner_ball_kernel, haar_kernel

    g = cfg.group_id
    fam = cfg.kernel.family
    if fam == "fejer":
        return fejer_kernel(g, point)
    if fam == "folner_ball":
        return folner_ball_kernel(g, point)
    if fam == "counit":
        return counit_kernel(g)
    return haar_kernel(g)


def cmd_lipnorm(cfg: ExperimentConfig, workers: int) -> ResultRecord:
    from .algebra import AlgebraElement
    from .lipnorms import lip_eval

    g = cfg.group_id
    L = cfg.lipnorm.spec()
    stop = cfg.levels.stop
    elems = groups.enumerate_ball(g, stop) if stop >= cfg.levels.start else []
    elems = [x for x in elems if groups.word_length(g, x) >= cfg.levels.start]

    def one(x):
        a = AlgebraElement.delta(g, x)
        est = lip_eval(L, a)
        return [x, groups.word_length(g, x), est.lower, est.upper, est.window, est.method]

    return ResultRecord("lipnorm", "", COLUMNS["lipnorm"], _map(one, elems, workers))


def cmd_fejer_sweep(cfg: ExperimentConfig, workers: int) -> ResultRecord:
    from .truncation import epsilon_of_kernel

    L = cfg.lipnorm.spec()

    def one(n):
        phi = _kernel_for(cfg, n)
        c = epsilon_of_kernel(phi, L, cfg.windows.search_window, seed=cfg.seed or 0)
        row = [n, c.epsilon, float(c.epsilon), c.lower, c.gap, c.level_N, c.method, c.scope]
        return row, c.to_json()

    out = _map(one, cfg.levels.values(), workers)
    return ResultRecord("fejer-sweep", "", COLUMNS["fejer-sweep"], [r for r, _ in out], certificates=[j for _, j in out])


def cmd_distq(cfg: ExperimentConfig, workers: int) -> ResultRecord:
    from .qgh import distq_certificate
    from .truncation import TruncationSystem

    g = cfg.group_id
    L = cfg.lipnorm.spec()

    def one(level):
        # the level-N truncation holds fejer[N + 1] and folner_ball[N // 2]
        point = level + 1 if cfg.kernel.family == "fejer" else level // 2
        phi = _kernel_for(cfg, point)
        c = distq_certificate(
            TruncationSystem.group_algebra(g, level),
            phi,
            L,
            samples=cfg.windows.samples,
            seed=cfg.seed,
            search_window=cfg.windows.search_window,
        )
        hc = c.hypothesis_check
        row = [level, c.kernel, c.upper, c.lower, c.upper - c.lower, hc["max_violation"], hc["passed"]]
        return row, c.to_json()

    out = _map(one, cfg.levels.values(), workers)
    return ResultRecord("distq", "", COLUMNS["distq"], [r for r, _ in out], certificates=[j for _, j in out])


def cmd_oracle(cfg: ExperimentConfig, workers: int) -> ResultRecord:
    from . import oracles
    from .algebra import AlgebraElement
    from .kernels import fejer_kernel
    from .lipnorms import LipNormSpec, lip_eval
    from .truncation import epsilon_of_kernel

    g = cfg.group_id
    name = cfg.oracle.name
    tol = cfg.oracle.tolerance

    def cmp(case, value, ref):
        err = abs(value - ref)
        return [case, value, ref, err, bool(err <= tol)]

    if name in ("fejer_closed_form", "circle_quadrature"):
        L = LipNormSpec.weighted_l1() if name == "fejer_closed_form" else LipNormSpec.dirac_circle()
        ref_fn = oracles.fejer_weighted_l1 if name == "fejer_closed_form" else oracles.circle_quadrature

        def one(n):
            c = epsilon_of_kernel(fejer_kernel(g, n), L, cfg.windows.search_window)
            return cmp(f"n={n}", c.epsilon, ref_fn(n))

        rows = _map(one, cfg.levels.values(), workers)
    elif name == "dirac_grading":
        L = cfg.lipnorm.spec() if cfg.lipnorm is not None else LipNormSpec.dirac_word_length()
        elems = groups.enumerate_ball(g, cfg.levels.stop) if cfg.levels.stop >= 0 else []

        def one(x):
            est = lip_eval(L, AlgebraElement.delta(g, x))
            ell = groups.word_length(g, x)
            # a lower bound may sit tol below the length, the upper never above it
            ok = est.lower >= ell - tol and est.upper <= ell + tol
            return [fmt(x), est.lower, ell, abs(est.lower - ell), bool(ok)]

        rows = _map(one, elems, workers)
    else:
        from .classical import FiniteGroupData
        from .qgh import StateModel, state_metric
        from .truncation import TruncationSystem

        data = FiniteGroupData.get(g)
        L = LipNormSpec.classical_lipschitz(g)
        system = TruncationSystem.group_algebra(g, None)
        pairs = [(i, j) for i in range(data.n) for j in range(data.n)]

        def one(p):
            i, j = p
            mu = StateModel.point_mass(data, data.elements[i])
            nu = StateModel.point_mass(data, data.elements[j])
            v = state_metric(mu, nu, L, system).upper
            return cmp(f"{fmt(data.elements[i])}|{fmt(data.elements[j])}", v, Fraction(data.distance[i][j]))

        rows = _map(one, pairs, workers)
    return ResultRecord("oracle", "", COLUMNS["oracle"], rows)


def cmd_states(cfg: ExperimentConfig, workers: int) -> ResultRecord:
    from .kernels import counit_kernel
    from .qgh import StateModel, approximate_state
    from .truncation import TruncationSystem

    g = cfg.group_id
    L = cfg.lipnorm.spec()
    mu = StateModel.from_kernel(counit_kernel(g))

    def one(budget):
        system = TruncationSystem.group_algebra(g, budget)
        r = approximate_state(
            mu,
            cfg.windows.epsilon_target,
            L,
            system,
            budget,
            random_directions=cfg.windows.random_directions,
            seed=cfg.seed,
        )
        return [budget, r.deviation, r.success, r.net_size], {"weights": [float(w) for w in r.weights], "candidates": list(r.candidates)}

    points = [b for b in cfg.levels.values() if b >= 1]
    out = _map(one, points, workers)
    return ResultRecord("states", "", COLUMNS["states"], [r for r, _ in out], certificates=[j for _, j in out])


def cmd_fusion(cfg: ExperimentConfig, workers: int) -> ResultRecord:
    from .classical import FiniteGroupData, IsotypicLabelSet, filtration_sets, fusion_decompose

    data = FiniteGroupData.get(cfg.group_id)
    labels = list(data.labels)
    rows = []
    for a in labels:
        for b in labels:
            dec = fusion_decompose(data, a, b)
            rows.append([a, b, "+".join(f"{m}*{l}" if m > 1 else l for l, m in sorted(dec.items()))])
    extra = {}
    fc = cfg.fusion
    if fc is not None and fc.generating:
        S = IsotypicLabelSet.of(data, fc.generating)
        _, stab = filtration_sets(S, 0)
        extra["filtration"] = {str(n): filtration_sets(S, n)[0].sorted() for n in range(fc.max_level + 1)}
        extra["stabilizes_at"] = stab
    return ResultRecord("fusion", "", COLUMNS["fusion"], rows, extra=extra)


COMMAND_FNS = {
    "lipnorm": cmd_lipnorm,
    "fejer-sweep": cmd_fejer_sweep,
    "distq": cmd_distq,
    "oracle": cmd_oracle,
    "states": cmd_states,
    "fusion": cmd_fusion,
}


# -- cache and output --------------------------------------------------------------------


def cache_dir() -> Path:
    env = os.environ.get("QTRUNC_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "qtrunc"


def run(command: str, cfg: ExperimentConfig, out: Path, workers: int = 1, use_cache: bool = True) -> ResultRecord:
    """Validate, compute (or load from cache) and write ``<out>/<command>.csv`` and ``.json``."""
    cfg.require(command)
    key = cache_key(command, cfg)
    cdir = cache_dir() / key
    out.mkdir(parents=True, exist_ok=True)
    if use_cache and (cdir / "result.csv").exists() and (cdir / "result.json").exists():
        csv_text = (cdir / "result.csv").read_text()
        side = json.loads((cdir / "result.json").read_text())
        side["timing"] = dict(side.get("timing", {}), cache="hit")
        rec = ResultRecord(command, key, side["columns"], side["rows"], side["version"], side["timing"], side["certificates"], side["extra"])
        log.info("cache hit %s", key[:12])
    else:
        t0 = time.perf_counter()
        rec = COMMAND_FNS[command](cfg, workers)
        rec.config_hash = key
        rec.timing = {"seconds": round(time.perf_counter() - t0, 6), "cache": "miss"}
        csv_text = rec.csv_text()
        side = rec.sidecar(cfg.canonical())
        if use_cache:
            cdir.mkdir(parents=True, exist_ok=True)
            (cdir / "result.csv").write_text(csv_text)
            (cdir / "result.json").write_text(json.dumps(side, indent=2, sort_keys=True))
    (out / f"{command}.csv").write_text(csv_text)
    (out / f"{command}.json").write_text(json.dumps(side, indent=2, sort_keys=True))
    return rec


# -- report ------------------------------------------------------------------------------


def _num(text: str) -> float:
    return float(Fraction(text)) if "/" in text else float(text)


def report(sidecars: list[dict]) -> dict:
    """Convergence table for every sweep: n, epsilon, gap and a strict-decrease flag."""
    versions = {s.get("version") for s in sidecars}
    if len(versions) > 1:
        raise PreconditionError(f"records come from different tool versions: {sorted(map(str, versions))}")
    tables = []
    for s in sidecars:
        cols = s["columns"]
        if "n" in cols and "epsilon" in cols:
            xk, yk = "n", "epsilon"
        elif "level" in cols and "upper" in cols:
            xk, yk = "level", "upper"
        else:
            continue
        ix, iy = cols.index(xk), cols.index(yk)
        ig = cols.index("gap") if "gap" in cols else None
        pts = [(int(r[ix]), r[iy], r[ig] if ig is not None else "") for r in s["rows"]]
        ys = [_num(p[1]) for p in pts]
        tables.append(
            {
                "command": s["command"],
                "config_hash": s["config_hash"],
                "x": xk,
                "rows": pts,
                "decreasing": all(b < a for a, b in zip(ys, ys[1:])),
                "seconds": s.get("timing", {}).get("seconds"),
            }
        )
    return {"schema": REPORT_SCHEMA, "version": versions.pop() if versions else __version__, "tables": tables}


def report_text(rep: dict) -> str:
    lines = []
    for t in rep["tables"]:
        lines.append(f"# {t['command']} {t['config_hash'][:12]}")
        lines.append(f"decreasing: {'true' if t['decreasing'] else 'false'}")
        lines.append(f"seconds: {t['seconds']}")
        lines.append(f"{t['x']},epsilon,gap")
        lines.extend(f"{x},{y},{g}" for x, y, g in t["rows"])
        lines.append("")
    return "\n".join(lines)


# -- entry point -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtrunc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qtrunc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, default=Path("results"))
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--no-cache", action="store_true")
    rp = sub.add_parser("report")
    rp.add_argument("records", nargs="*", type=Path, help="JSON sidecars written by other commands")
    rp.add_argument("--out", type=Path, default=Path("results"))
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "report":
        return _main_report(args)
    where = str(args.config)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise PreconditionError(f"seed must be an unsigned 64-bit integer, got {args.seed}")
        if args.workers < 1:
            raise PreconditionError(f"--workers must be >= 1, got {args.workers}")
        cfg = load_config(args.config, seed=args.seed)
        rec = run(args.command, cfg, args.out, workers=args.workers, use_cache=not args.no_cache)
    except (ValidationError, QTruncError, OSError, ValueError) as exc:
        code = exc.exit_code if isinstance(exc, QTruncError) else 2
        print(f"qtrunc: {where}: {exc}", file=sys.stderr)
        return code
    except MemoryError as exc:
        print(f"qtrunc: {where}: out of memory: {exc}", file=sys.stderr)
        return 3
    print(f"{args.command}: {len(rec.rows)} rows -> {args.out / (args.command + '.csv')}")
    return 0


def _main_report(args) -> int:
    try:
        sidecars = [json.loads(Path(p).read_text()) for p in args.records]
        rep = report(sidecars)
    except (QTruncError, OSError, ValueError, KeyError) as exc:
        print(f"qtrunc: report: {exc}", file=sys.stderr)
        return exc.exit_code if isinstance(exc, QTruncError) else 2
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.json").write_text(json.dumps(rep, indent=2, sort_keys=True))
    (args.out / "report.txt").write_text(report_text(rep))
    print(report_text(rep), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["ResultRecord", "run", "report", "main"]
