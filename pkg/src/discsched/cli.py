"""Command-line front end.

Exit status: 0 on success, 1 on bad input, 2 when the time limit is hit.
The limit comes from ``--timeout`` or the ``DISCSCHED_TIMEOUT_SECS``
environment variable; without either there is none (``bench`` uses its
own per-cell limit instead).
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
from contextlib import contextmanager
from typing import Optional, Sequence

from . import bench
from .automata import (
    AcceptanceAutomaton,
    AutomatonError,
    AlternatingAutomaton,
    automaton_from_json,
    automaton_to_dict,
    automaton_to_dot,
    dealternate,
    letter_to_json,
    optimal_value,
)
from .formula import FormulaError, formula_size, parse_formula, pretty
from .scheduler import KripkeError, eval_path, load_kripke, parse_path, parse_word, schedule
from .semiring import LocalFinitenessError
from .translate import NORMALIZATIONS, translate
from .values import format_rat, parse_rat

EXIT_OK, EXIT_INPUT, EXIT_TIMEOUT = 0, 1, 2


class CliTimeout(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _rat(text: str):
    try:
        return parse_rat(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _rat_list(text: str):
    return [_rat(x) for x in text.split(",") if x.strip()]


def _int_list(text: str):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from exc


@contextmanager
def _time_limit(seconds: Optional[float]):
    if not seconds or not hasattr(signal, "SIGALRM"):
        yield
        return

    def fire(signum, frame):
        raise CliTimeout()

    old = signal.signal(signal.SIGALRM, fire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dump(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False)


# -- subcommands


def cmd_schedule(args) -> int:
    K = load_kripke(args.kripke)
    phi = parse_formula(args.formula)
    res = schedule(K, phi, args.eps)
    if args.text:
        lo, hi = res.sup_interval
        print(f"path: {res.path}")
        print(f"exact value: {format_rat(res.exact_value)}")
        print(f"certified lower bound: {format_rat(res.guaranteed_lb)}")
        print(f"best achievable value lies in [{format_rat(lo)}, {format_rat(hi)}]")
        for k, v in res.stats.items():
            print(f"{k.replace('_', ' ')}: {v}")
    else:
        data = res.to_dict()
        data["formula"] = pretty(phi)
        print(_dump(data))
    return EXIT_OK


def cmd_translate(args) -> int:
    phi = parse_formula(args.formula)
    A = translate(phi, args.eps, normalize=args.normalize)
    N = dealternate(A) if (args.stats or args.nondet) else None
    target = N if args.nondet else A
    if args.dot:
        _emit(automaton_to_dot(target), args.dot)
    if args.stats:
        print(_dump({
            "formula": pretty(phi),
            "eps": format_rat(args.eps),
            "normalize": args.normalize,
            "formula_size": formula_size(phi),
            "alternating_states": A.n_states,
            "leaf_count": A.leaf_count(),
            "nondeterministic_states": N.n_states,
        }))
    elif not args.dot or args.output:
        _emit(_dump(automaton_to_dict(target)), args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    phi = parse_formula(args.formula)
    if args.path is not None:
        if args.kripke is None:
            raise KripkeError("--path needs a Kripke structure (-k)")
        xi = parse_path(args.path)
        value = eval_path(xi, phi, load_kripke(args.kripke))
    else:
        value = eval_path(parse_word(args.word), phi)
    if args.text:
        print(format_rat(value))
    else:
        print(_dump({"formula": pretty(phi), "value": format_rat(value)}))
    return EXIT_OK


def cmd_optimum(args) -> int:
    with open(args.automaton, encoding="utf-8") as fh:
        A = automaton_from_json(fh.read())
    if isinstance(A, AlternatingAutomaton):
        A = dealternate(A)
    assert isinstance(A, AcceptanceAutomaton)
    value, run = optimal_value(A)
    word = run.word
    data = {
        "value": format_rat(value),
        "run": {"prefix": list(run.prefix), "cycle": list(run.cycle)},
        "word": {
            "prefix": [letter_to_json(a) for a in word.prefix],
            "cycle": [letter_to_json(a) for a in word.cycle],
        },
    }
    if args.text:
        print(f"optimal value: {data['value']}")
        print(f"run: {' '.join(map(str, run.prefix))} ; {' '.join(map(str, run.cycle))}")
    else:
        print(_dump(data))
    return EXIT_OK


def cmd_bench(args) -> int:
    timeout = args.timeout if args.timeout is not None else bench.env_timeout()
    for f in args.formula:
        parse_formula(f)
    cfg = bench.BenchConfig(
        tuple(args.formula),
        tuple(args.eps),
        tuple(args.sizes or ()),
        tuple(args.degrees or ()),
        args.instances,
        args.seed,
        timeout,
    )

    def log(cell) -> None:
        print(f"# {cell}", file=sys.stderr, flush=True)

    if cfg.sizes:
        if not cfg.degrees:
            raise ValueError("timing runs need --degrees as well as --sizes")
        results = bench.bench_timing(cfg, log=log if args.verbose else None)
    else:
        results = bench.bench_sizes(cfg, args.normalize, log=log if args.verbose else None)
    _, md = bench.emit_report(results, args.out)
    sys.stdout.write(md)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="discsched", description="Near-optimal scheduling for discounted LTL.")
    p.add_argument("--timeout", type=float, default=None, help="wall-clock limit in seconds")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("schedule", help="find a near-optimal path of a Kripke structure")
    s.add_argument("-f", "--formula", required=True)
    s.add_argument("-k", "--kripke", required=True, help=".kts or .json structure")
    s.add_argument("-e", "--eps", required=True, type=_rat)
    s.add_argument("--text", action="store_true", help="human-readable output instead of JSON")
    s.set_defaults(run=cmd_schedule)

    t = sub.add_parser("translate", help="build the automaton for a formula")
    t.add_argument("-f", "--formula", required=True)
    t.add_argument("-e", "--eps", required=True, type=_rat)
    t.add_argument("--stats", action="store_true", help="print state counts instead of the automaton")
    t.add_argument("--nondet", action="store_true", help="export the nondeterministic automaton")
    t.add_argument("--dot", metavar="FILE", help="write Graphviz output ('-' for stdout)")
    t.add_argument("-o", "--output", metavar="FILE", help="write the JSON export here")
    t.add_argument("--normalize", choices=NORMALIZATIONS, default="merge")
    t.set_defaults(run=cmd_translate)

    e = sub.add_parser("eval", help="exact value of a formula on a lasso")
    e.add_argument("-f", "--formula", required=True)
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--path", help="state lasso 'u ; v', read against -k")
    g.add_argument("--word", help="letter lasso '{p} {} ; {p,q}'")
    e.add_argument("-k", "--kripke")
    e.add_argument("--text", action="store_true")
    e.set_defaults(run=cmd_eval)

    o = sub.add_parser("optimum", help="optimal value of an automaton with a witness lasso")
    o.add_argument("-a", "--automaton", required=True, help="automaton JSON")
    o.add_argument("--text", action="store_true")
    o.set_defaults(run=cmd_optimum)

    b = sub.add_parser("bench", help="automaton sizes, or scheduling time on random structures")
    b.add_argument("-f", "--formula", action="append", required=True)
    b.add_argument("-e", "--eps", type=_rat_list, required=True, help="comma-separated margins")
    b.add_argument("--sizes", type=_int_list, help="structure sizes; switches to timing mode")
    b.add_argument("--degrees", type=_int_list, help="maximum out-degrees")
    b.add_argument("--instances", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--normalize", choices=NORMALIZATIONS, default="merge")
    b.add_argument("--out", metavar="PREFIX", help="also write PREFIX.csv and PREFIX.md")
    b.add_argument("-v", "--verbose", action="store_true")
    b.set_defaults(run=cmd_bench)
    return p


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            return args.run(args)
        limit = args.timeout if args.timeout is not None else bench.env_timeout(None)
        with _time_limit(limit):
            return args.run(args)
    except CliTimeout:
        print("error: time limit exceeded", file=sys.stderr)
        return EXIT_TIMEOUT
    except (FormulaError, KripkeError, AutomatonError, LocalFinitenessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_cli())


__all__ = ["EXIT_INPUT", "EXIT_OK", "EXIT_TIMEOUT", "build_parser", "main", "run_cli"]
