"""Random Kripke structures and the benchmark harness.

Every measured instance runs in a fresh interpreter (``spawn``) so that a
cell can be abandoned at its timeout and peak memory is per instance.
"""

from __future__ import annotations

import csv
import io
import multiprocessing as mp
import os
import random
import resource
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .scheduler import KripkeStructure
from .values import check_margin, format_rat

DEFAULT_TIMEOUT = 120.0
TIMEOUT_ENV = "DISCSCHED_TIMEOUT_SECS"


def gen_random_kripke(n: int, max_deg: int, seed: int, aps: Sequence[str] = ("p1", "p2")) -> KripkeStructure:
    """Random structure on states ``s0 .. s{n-1}``.

    Each state draws an out-degree uniformly from ``1..max_deg`` and that
    many targets uniformly over all states; repeated targets collapse. Each
    proposition holds at each state with probability 1/2.
    """
    if n < 1 or max_deg < 1:
        raise ValueError("need at least one state and a maximum degree of at least one")
    rng = random.Random(seed)
    states = [f"s{i}" for i in range(n)]
    edges = {}
    labels = {}
    for s in states:
        deg = rng.randint(1, max_deg)
        edges[s] = tuple(states[rng.randrange(n)] for _ in range(deg))
    for s in states:
        labels[s] = frozenset(p for p in aps if rng.random() < 0.5)
    return KripkeStructure(tuple(aps), tuple(states), labels, edges)


def env_timeout(default: Optional[float] = DEFAULT_TIMEOUT) -> Optional[float]:
    raw = os.environ.get(TIMEOUT_ENV)
    if raw is None or raw == "":
        return default
    value = float(raw)
    if value <= 0:
        raise ValueError(f"{TIMEOUT_ENV} must be positive")
    return value


@dataclass(frozen=True)
class BenchConfig:
    formulas: tuple[str, ...]
    eps: tuple[Fraction, ...]
    sizes: tuple[int, ...] = ()
    degrees: tuple[int, ...] = ()
    instances: int = 1
    seed: int = 0
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self) -> None:
        object.__setattr__(self, "formulas", tuple(self.formulas))
        object.__setattr__(self, "eps", tuple(check_margin(e) for e in self.eps))
        object.__setattr__(self, "sizes", tuple(self.sizes))
        object.__setattr__(self, "degrees", tuple(self.degrees))
        if not self.formulas or not self.eps:
            raise ValueError("a benchmark needs at least one formula and one margin")
        if any(n < 1 for n in self.sizes) or any(d < 1 for d in self.degrees):
            raise ValueError("sizes and degrees must be at least 1")
        if self.instances < 1:
            raise ValueError("instance count must be at least 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class SizeCell:
    """Automaton sizes for one formula and margin."""

    formula: str
    eps: Fraction
    alternating: Optional[int]
    nondeterministic: Optional[int]
    seconds: Optional[float]
    status: str = "ok"


@dataclass(frozen=True)
class TimingCell:
    """Mean scheduling time and peak memory over random structures."""

    formula: str
    eps: Fraction
    size: int
    degree: int
    instances: int
    mean_seconds: Optional[float]
    mean_mb: Optional[float]
    status: str = "ok"
    values: tuple = field(default=(), compare=False)


# -- workers (top level so that spawn can import them)


def _peak_mb() -> float:
    kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # ru_maxrss is bytes on macOS and KiB on Linux
    return kb / (1 << 20) if sys.platform == "darwin" else kb / 1024


def _size_worker(conn, formula: str, eps: Fraction, normalize: str) -> None:
    from .automata import dealternate
    from .formula import parse_formula
    from .translate import translate

    t0 = time.perf_counter()
    A = translate(parse_formula(formula), eps, normalize=normalize)
    N = dealternate(A)
    conn.send((A.n_states, N.n_states, time.perf_counter() - t0))
    conn.close()


def _schedule_worker(conn, formula: str, eps: Fraction, n: int, deg: int, seed: int) -> None:
    from .formula import parse_formula
    from .scheduler import schedule

    phi = parse_formula(formula)
    K = gen_random_kripke(n, deg, seed)
    t0 = time.perf_counter()
    res = schedule(K, phi, eps)
    elapsed = time.perf_counter() - t0
    conn.send((elapsed, _peak_mb(), format_rat(res.exact_value)))
    conn.close()


def run_isolated(target, args: tuple, timeout: float):
    """Run ``target(conn, *args)`` in a fresh process; ``None`` on timeout."""
    ctx = mp.get_context("spawn")
    parent, child = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=target, args=(child, *args))
    proc.start()
    child.close()
    try:
        if parent.poll(timeout):
            try:
                return parent.recv()
            except EOFError:
                raise RuntimeError("benchmark worker exited without a result") from None
        return None
    finally:
        if proc.is_alive():
            proc.kill()
        proc.join()
        parent.close()


def bench_sizes(cfg: BenchConfig, normalize: str = "merge", log=None) -> list[SizeCell]:
    out = []
    for formula in cfg.formulas:
        for eps in cfg.eps:
            res = run_isolated(_size_worker, (formula, eps, normalize), cfg.timeout)
            if res is None:
                cell = SizeCell(formula, eps, None, None, None, "timeout")
            else:
                cell = SizeCell(formula, eps, res[0], res[1], res[2])
            if log:
                log(cell)
            out.append(cell)
    return out


def bench_timing(cfg: BenchConfig, log=None) -> list[TimingCell]:
    out = []
    for formula in cfg.formulas:
        for eps in cfg.eps:
            for n in cfg.sizes:
                for deg in cfg.degrees:
                    times, mbs, values = [], [], []
                    status = "ok"
                    for i in range(cfg.instances):
                        res = run_isolated(_schedule_worker, (formula, eps, n, deg, cfg.seed + i), cfg.timeout)
                        if res is None:
                            status = "timeout"
                            break
                        times.append(res[0])
                        mbs.append(res[1])
                        values.append(res[2])
                    if status == "ok":
                        cell = TimingCell(
                            formula, eps, n, deg, cfg.instances,
                            sum(times) / len(times), sum(mbs) / len(mbs), status, tuple(values),
                        )
                    else:
                        cell = TimingCell(formula, eps, n, deg, cfg.instances, None, None, status)
                    if log:
                        log(cell)
                    out.append(cell)
    return out


# -- reports

Cell = Union[SizeCell, TimingCell]


def _size_table(results: Sequence[SizeCell]) -> tuple[list[str], list[list[str]]]:
    eps_cols = list(dict.fromkeys(c.eps for c in results))
    header = ["formula"]
    for e in eps_cols:
        header += [f"|A| eps={format_rat(e)}", f"|A^na| eps={format_rat(e)}"]
    rows = []
    for formula in dict.fromkeys(c.formula for c in results):
        row = [formula]
        by_eps = {c.eps: c for c in results if c.formula == formula}
        for e in eps_cols:
            c = by_eps.get(e)
            if c is None:
                row += ["", ""]
            elif c.status != "ok":
                row += [c.status, c.status]
            else:
                row += [str(c.alternating), str(c.nondeterministic)]
        rows.append(row)
    return header, rows


def _timing_table(results: Sequence[TimingCell]) -> tuple[list[str], list[list[str]]]:
    cols = list(dict.fromkeys((c.size, c.degree) for c in results))
    header = ["formula", "eps"]
    for n, d in cols:
        header += [f"time(s) n={n} deg={d}", f"space(MB) n={n} deg={d}"]
    rows = []
    for formula, eps in dict.fromkeys((c.formula, c.eps) for c in results):
        row = [formula, format_rat(eps)]
        by_col = {(c.size, c.degree): c for c in results if c.formula == formula and c.eps == eps}
        for col in cols:
            c = by_col.get(col)
            if c is None:
                row += ["", ""]
            elif c.status != "ok":
                row += [c.status, c.status]
            else:
                row += [f"{c.mean_seconds:.4f}", f"{c.mean_mb:.1f}"]
        rows.append(row)
    return header, rows


def report_tables(results: Sequence[Cell]) -> tuple[list[str], list[list[str]]]:
    if not results:
        return ["formula"], []
    if all(isinstance(c, SizeCell) for c in results):
        return _size_table(results)
    if all(isinstance(c, TimingCell) for c in results):
        return _timing_table(results)
    raise TypeError("cannot mix size and timing results in one report")


def to_csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def to_markdown(header: list[str], rows: list[list[str]]) -> str:
    def esc(x: str) -> str:
        return x.replace("|", "\\|")

    lines = ["| " + " | ".join(map(esc, header)) + " |", "|" + "---|" * len(header)]
    for r in rows:
        lines.append("| " + " | ".join(map(esc, r)) + " |")
    return "\n".join(lines) + "\n"


def emit_report(results: Sequence[Cell], prefix: Optional[str] = None) -> tuple[str, str]:
    """CSV and markdown renderings; written to ``prefix.csv`` / ``prefix.md`` when given."""
    header, rows = report_tables(results)
    csv_text, md_text = to_csv(header, rows), to_markdown(header, rows)
    if prefix is not None:
        with open(prefix + ".csv", "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        with open(prefix + ".md", "w", encoding="utf-8") as fh:
            fh.write(md_text)
    return csv_text, md_text


__all__ = [
    "BenchConfig",
    "SizeCell",
    "TimingCell",
    "bench_sizes",
    "bench_timing",
    "emit_report",
    "env_timeout",
    "gen_random_kripke",
    "report_tables",
    "run_isolated",
]
