"""Wall-clock timing of the character evaluation routes over a (p, E) grid."""

from __future__ import annotations

import csv
import random
import time
from dataclasses import astuple, dataclass, fields
from typing import Iterable, TextIO

from .characters import METHODS, Character, evaluate
from .padic import PadicContext


@dataclass(frozen=True)
class BenchRow:
    method: str
    p: int
    E: int
    label: str  # cost-function name, e.g. t_mahler(E)
    samples: int
    mean_seconds: float
    min_seconds: float


def bench_characters(primes: Iterable[int], precisions: Iterable[int], samples: int = 50,
                     repeat: int = 3, seed: int = 0, methods=METHODS) -> list:
    rng = random.Random(seed)
    rows = []
    for p in primes:
        for E in precisions:
            ctx = PadicContext(p, E)
            chi = Character.exponential(ctx)
            xs = [rng.randrange(p ** (E - 1)) for _ in range(samples)]
            for method in methods:
                times = []
                for _ in range(repeat):
                    start = time.perf_counter()
                    for x in xs:
                        evaluate(chi, x, method)
                    times.append((time.perf_counter() - start) / samples)
                rows.append(BenchRow(method, p, E, f"t_{method}({E})", samples,
                                     sum(times) / len(times), min(times)))
    return rows


def write_csv(rows: list, fh: TextIO) -> None:
    writer = csv.writer(fh)
    writer.writerow([f.name for f in fields(BenchRow)])
    for row in rows:
        writer.writerow([f"{v:.3e}" if isinstance(v, float) else v for v in astuple(row)])
