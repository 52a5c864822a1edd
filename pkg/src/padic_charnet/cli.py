"""Command-line front end.

Exit codes: 0 success (zero loss within precision), 2 positive minimum,
3 frontier overflow, 4 unsupported compilation, 64 usage error,
65 malformed input file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass

from . import __version__
from .bench import bench_characters, write_csv
from .characters import METHODS, Character, evaluate
from .errors import (
    BudgetExceededError,
    FrontierOverflowError,
    PadicError,
    SchemaError,
    UnsupportedCompilationError,
)
from .network import CharacterNetwork, Dataset, forward, residuals
from .padic import PadicContext, padic_norm
from .polysys import NetShape, compile_residual, load_system
from .solver import (
    DEFAULT_ENUMERATION_BUDGET,
    DEFAULT_FRONTIER_BUDGET,
    ddp_max_exponent,
    train,
)

EXIT_OK = 0
EXIT_POSITIVE = 2
EXIT_OVERFLOW = 3
EXIT_UNSUPPORTED = 4
EXIT_USAGE = 64
EXIT_DATA = 65

log = logging.getLogger("padic_charnet")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    p: int | None = None
    E: int | None = None
    F: int | None = None
    D: int | None = None
    norm: str = "linf"
    a: int | None = None
    exp: bool = False
    method: str = "binary"
    frontier_budget: int = DEFAULT_FRONTIER_BUDGET
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.p is not None:
            try:
                PadicContext(self.p, 1)
            except PadicError as exc:
                raise UsageError(f"--p: {exc}") from None
        if self.E is not None and self.E < 1:
            raise UsageError(f"--E: must be >= 1, got {self.E}")
        if self.F is not None and self.F < 0:
            raise UsageError(f"--F: must be >= 0, got {self.F}")
        if self.D is not None and self.D < 1:
            raise UsageError(f"--shape: D must be >= 1, got {self.D}")
        if self.norm not in ("linf", "l1"):
            raise UsageError(f"--norm: expected linf or l1, got {self.norm}")
        if self.method not in METHODS:
            raise UsageError(f"--method: expected one of {METHODS}")
        if self.a is not None and self.exp:
            raise UsageError("--a and --exp are mutually exclusive")
        if self.a is not None and self.p is not None and self.a % self.p != 1 % self.p:
            raise UsageError(f"--a: {self.a} is not 1 mod p={self.p}")
        if self.frontier_budget < 1 or self.enumeration_budget < 1:
            raise UsageError("budgets must be positive")
        return self

    def character(self, p: int, E: int) -> Character:
        ctx = PadicContext(p, E)
        if self.a is None:
            return Character.exponential(ctx)
        try:
            return Character(ctx, self.a)
        except PadicError as exc:
            raise UsageError(f"--a: {exc}") from None


def _int(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal integer: {text!r}") from None


def _shape(text: str) -> tuple:
    try:
        parts = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must be N,D,M, got {text!r}") from None
    if len(parts) != 3 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"shape must be three positive integers N,D,M, got {text!r}")
    return parts


def _int_list(text: str) -> list:
    try:
        return [int(v, 10) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None


def _write_json(obj, path: str) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _config(args) -> RunConfig:
    return RunConfig(
        p=args.p, E=args.E, F=args.F,
        D=getattr(args, "shape", None) and args.shape[1],
        norm=getattr(args, "norm", "linf"),
        a=getattr(args, "a", None),
        exp=getattr(args, "exp", False),
        method=getattr(args, "method", "binary"),
        frontier_budget=getattr(args, "frontier_budget", DEFAULT_FRONTIER_BUDGET),
        enumeration_budget=getattr(args, "enumeration_budget", DEFAULT_ENUMERATION_BUDGET),
    ).validate()


# -- commands -----------------------------------------------------------------

def cmd_char_eval(args) -> int:
    cfg = _config(args)
    if cfg.p is None or cfg.E is None:
        raise UsageError("char-eval needs --p and --E")
    if cfg.a is None and not cfg.exp:
        raise UsageError("char-eval needs --a or --exp")
    chi = cfg.character(cfg.p, cfg.E)
    if args.all_methods:
        values = {m: evaluate(chi, args.x, m).value for m in METHODS}
        for m in METHODS:
            print(f"{m}\t{values[m]}")
        agree = len(set(values.values())) == 1
        print(f"agree\t{'yes' if agree else 'no'}")
        return EXIT_OK if agree else 1
    print(evaluate(chi, args.x, cfg.method).value)
    return EXIT_OK


def _load_dataset(path: str, cfg: RunConfig) -> Dataset:
    data = Dataset.from_json(_read_json(path))
    if cfg.p is not None and cfg.p != data.ctx.p:
        raise UsageError(f"--p {cfg.p} differs from the dataset prime {data.ctx.p}")
    return data


def _shape_from_args(args, cfg: RunConfig, data: Dataset) -> NetShape:
    N, D, M = args.shape
    E = cfg.E if cfg.E is not None else data.ctx.E
    F = cfg.F if cfg.F is not None else data.F
    if (E, F) != (data.ctx.E, data.F):
        raise UsageError(f"--E/--F ({E}, {F}) differ from the dataset ({data.ctx.E}, {data.F})")
    if (N, M) != (data.N, data.M):
        raise UsageError(f"--shape N,M = {N},{M} differ from the dataset ({data.N},{data.M})")
    return NetShape(N, D, M, cfg.character(data.ctx.p, E + F), E, F)


def cmd_eval(args) -> int:
    cfg = _config(args)
    net = CharacterNetwork.from_json(_read_json(args.net))
    data = _load_dataset(args.data, cfg)
    if (net.p, net.E, net.N, net.M) != (data.ctx.p, data.ctx.E, data.N, data.M):
        raise SchemaError("network and dataset disagree on p, E, N or M")
    res = residuals(net, data)
    samples = []
    for x, row in zip(data.X, res):
        norms = [padic_norm(r) for r in row]
        samples.append({
            "output": [y.to_json() for y in forward(net, x, cfg.method)],
            "residual_valuations": [{"valuation": n.valuation, "capped": n.capped} for n in norms],
        })
    _write_json({"samples": samples}, args.out)
    return EXIT_OK


def cmd_compile(args) -> int:
    cfg = _config(args)
    data = _load_dataset(args.data, cfg)
    system = compile_residual(_shape_from_args(args, cfg, data), data)
    _write_json(system.to_json(), args.out)
    return EXIT_OK


def cmd_ddp(args) -> int:
    cfg = _config(args)
    polys, L, p_file, digits = load_system(_read_json(args.system))
    p = cfg.p if cfg.p is not None else p_file
    if p is None:
        raise UsageError("ddp needs --p (the system file has no prime)")
    if p_file is not None and p != p_file:
        raise UsageError(f"--p {p} differs from the system prime {p_file}")
    if args.cap < 0:
        raise UsageError("--cap must be >= 0")
    if not polys:
        raise SchemaError("system has no polynomials")
    report = ddp_max_exponent(polys, p, L, args.cap, cfg.frontier_budget,
                              strategy=args.strategy, digits=digits)
    _write_json(report.to_json(), args.out)
    return EXIT_OK if report.hit_cap else EXIT_POSITIVE


def cmd_fit(args) -> int:
    cfg = _config(args)
    data = _load_dataset(args.data, cfg)
    shape = _shape_from_args(args, cfg, data)
    result = train(shape, data, cfg.norm, cfg.frontier_budget, cfg.enumeration_budget)
    _write_json(result.to_json(), args.out)
    return EXIT_OK if result.loss.zero else EXIT_POSITIVE


def cmd_bench(args) -> int:
    primes, precisions = args.primes, args.precisions
    for p in primes:
        RunConfig(p=p).validate()
    if min(precisions) < 1:
        raise UsageError("--precisions must be positive")
    rows = bench_characters(primes, precisions, args.samples, args.repeat, args.seed)
    if args.out == "-":
        write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    return EXIT_OK


def _chi_flags(parser) -> None:
    g = parser.add_mutually_exclusive_group()
    g.add_argument("--a", type=_int, help="character base, 1 mod p")
    g.add_argument("--exp", action="store_true", help="use the base exp_p(q)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_int, help="prime")
    common.add_argument("--E", type=_int, help="precision exponent")
    common.add_argument("--F", type=_int, help="denominator exponent")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="padic-charnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("char-eval", parents=[common], help="evaluate a^x mod p^E")
    _chi_flags(p)
    p.add_argument("--x", type=_int, required=True)
    p.add_argument("--method", choices=METHODS, default="binary")
    p.add_argument("--all-methods", action="store_true", help="print all three and check agreement")
    p.set_defaults(func=cmd_char_eval)

    p = sub.add_parser("eval", parents=[common], help="run a network over a dataset")
    p.add_argument("--net", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=METHODS, default="binary")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compile", parents=[common], help="emit the residual polynomial system")
    p.add_argument("--data", required=True)
    p.add_argument("--shape", type=_shape, required=True, help="N,D,M")
    _chi_flags(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("ddp", parents=[common], help="maximal exponent with a common zero")
    p.add_argument("--system", required=True)
    p.add_argument("--cap", type=_int, required=True)
    p.add_argument("--strategy", choices=("lift", "enumerate"), default="lift")
    p.add_argument("--frontier-budget", type=_int, default=DEFAULT_FRONTIER_BUDGET)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_ddp)

    p = sub.add_parser("fit", parents=[common], help="train a network exactly")
    p.add_argument("--data", required=True)
    p.add_argument("--shape", type=_shape, required=True, help="N,D,M")
    p.add_argument("--norm", choices=("linf", "l1"), default="linf")
    _chi_flags(p)
    p.add_argument("--frontier-budget", type=_int, default=DEFAULT_FRONTIER_BUDGET)
    p.add_argument("--enumeration-budget", type=_int, default=DEFAULT_ENUMERATION_BUDGET)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench", parents=[common], help="time the evaluation methods")
    p.add_argument("--primes", type=_int_list, default=[2, 3, 5, 7])
    p.add_argument("--precisions", type=_int_list, default=[4, 8, 16, 32])
    p.add_argument("--samples", type=_int, default=50)
    p.add_argument("--repeat", type=_int, default=3)
    p.add_argument("--seed", type=_int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"padic-charnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FrontierOverflowError as exc:
        print(f"padic-charnet: {exc} (last completed level {exc.last_level})", file=sys.stderr)
        return EXIT_OVERFLOW
    except UnsupportedCompilationError as exc:
        print(f"padic-charnet: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except BudgetExceededError as exc:
        print(f"padic-charnet: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except SchemaError as exc:
        print(f"padic-charnet: bad input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PadicError as exc:
        print(f"padic-charnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
