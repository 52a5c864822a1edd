"""Exact l-infinity training through common zeros modulo p^e.

``ddp_max_exponent`` lifts the common zeros of a polynomial system one base-p
digit at a time.  ``brute_force_minimum`` enumerates every parameter vector and
serves as the independent oracle for it.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError, FrontierOverflowError, InvalidInputError
from .network import CharacterNetwork, Dataset, residuals
from .padic import padic_norm
from .polysys import CompiledSystem, IntPolynomial, NetShape, compile_residual

log = logging.getLogger(__name__)

DEFAULT_FRONTIER_BUDGET = 10**6
DEFAULT_ENUMERATION_BUDGET = 10**6


@dataclass(frozen=True)
class DdpReport:
    e_star: int
    hit_cap: bool
    zero_count_per_level: tuple
    witness: tuple | None = None
    levels: tuple | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "e_star": self.e_star,
            "hit_cap": self.hit_cap,
            "zero_count_per_level": list(self.zero_count_per_level),
            "witness": None if self.witness is None else [str(v) for v in self.witness],
        }

    @classmethod
    def from_json(cls, obj) -> "DdpReport":
        w = obj.get("witness")
        return cls(int(obj["e_star"]), bool(obj["hit_cap"]),
                   tuple(int(v) for v in obj["zero_count_per_level"]),
                   None if w is None else tuple(int(v) for v in w))


@dataclass(frozen=True)
class LossValue:
    """Exact loss under |p| = 1/p.

    For l-infinity the loss is p^(-valuation), or zero within precision when
    ``zero`` is set.  For l1 it is the sum of p^(-v) over the residual
    valuations v below the precision.
    """

    kind: str
    value: Fraction
    zero: bool
    valuation: int | None = None
    valuations: tuple = ()
    witness: tuple | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "zero": self.zero,
            "valuation": self.valuation,
            "value": str(self.value),
            "valuations": list(self.valuations),
            "witness": None if self.witness is None else [str(v) for v in self.witness],
        }

    @classmethod
    def from_json(cls, obj) -> "LossValue":
        w = obj.get("witness")
        return cls(obj["kind"], Fraction(obj["value"]), bool(obj["zero"]), obj.get("valuation"),
                   tuple(obj.get("valuations", ())), None if w is None else tuple(int(v) for v in w))


def _capped_valuation(value: int, p: int, cap: int) -> int:
    if value == 0:
        return cap
    v = 0
    while value % p == 0 and v < cap:
        value //= p
        v += 1
    return v


def _solve_linear_mod_p(rows: list, rhs: list, p: int, L: int) -> list | None:
    """All solutions of rows . d = rhs over F_p, or None when inconsistent."""
    mat = [list(r) + [c] for r, c in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(L):
        piv = next((i for i in range(r, len(mat)) if mat[i][col] % p), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = pow(mat[r][col], -1, p)
        mat[r] = [v * inv % p for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] % p:
                factor = mat[i][col]
                mat[i] = [(vi - factor * vr) % p for vi, vr in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
    if any(row[L] % p for row in mat[r:]):
        return None
    free = [c for c in range(L) if c not in pivots]
    solutions = []
    for values in itertools.product(range(p), repeat=len(free)):
        d = [0] * L
        for c, v in zip(free, values):
            d[c] = v
        for i, col in enumerate(pivots):
            d[col] = (mat[i][L] - sum(mat[i][c] * d[c] for c in free)) % p
        solutions.append(tuple(d))
    return solutions


class _Lifter:
    """Expands level-e common zeros to level e+1."""

    def __init__(self, polys: Sequence[IntPolynomial], p: int, L: int, strategy: str,
                 digits: Sequence[int] | None):
        self.polys = list(polys)
        self.p, self.L = p, L
        self.strategy = strategy
        self.digits = digits
        self.grads = {}

    def _active(self, e: int) -> list:
        if self.digits is None:
            return list(range(self.L))
        return [v for v in range(self.L) if self.digits[v] > e]

    def _gradient(self, f_index: int, v: int) -> IntPolynomial:
        key = (f_index, v)
        g = self.grads.get(key)
        if g is None:
            g = self.grads[key] = self.polys[f_index].derivative(v)
        return g

    def _digit_vectors(self, active: list):
        for values in itertools.product(range(self.p), repeat=len(active)):
            d = [0] * self.L
            for v, x in zip(active, values):
                d[v] = x
            yield d

    def _enumerate(self, z: tuple, e: int, active: list) -> list:
        p, pe = self.p, self.p**e
        modulus = pe * p
        out = []
        for d in self._digit_vectors(active):
            w = tuple(zi + pe * di for zi, di in zip(z, d))
            if all(f.eval_mod(w, modulus) == 0 for f in self.polys):
                out.append(w)
        return out

    def _linearised(self, z: tuple, e: int, active: list) -> list:
        # f(z + p^e d) = f(z) + p^e grad f(z) . d  (mod p^(e+1)) for e >= 1
        p, pe = self.p, self.p**e
        modulus = pe * p
        rhs, rows = [], []
        for i, f in enumerate(self.polys):
            value = f.eval_mod(z, modulus)
            if value % pe:
                raise AssertionError(f"frontier point {z} is not a zero mod p^{e}")
            rhs.append(-(value // pe) % p)
            rows.append([self._gradient(i, v).eval_mod(z, p) for v in active])
        sols = _solve_linear_mod_p(rows, rhs, p, len(active))
        if not sols:
            return []
        out = []
        for sol in sols:
            w = list(z)
            for v, x in zip(active, sol):
                w[v] += pe * x
            out.append(tuple(w))
        return out

    def expand(self, z: tuple, e: int) -> list:
        active = self._active(e)
        if self.strategy == "enumerate" or e == 0:
            return self._enumerate(z, e, active)
        return self._linearised(z, e, active)


def ddp_max_exponent(system: Sequence[IntPolynomial], p: int, L: int, cap: int,
                     budget: int = DEFAULT_FRONTIER_BUDGET, strategy: str = "lift",
                     keep_levels: bool = False, digits: Sequence[int] | None = None) -> DdpReport:
    """Largest e <= cap at which the system has a common zero mod p^e.

    Starting from the zero vector mod p^0, every surviving witness z is
    extended by all digit vectors d to z + p^e d.  ``strategy="enumerate"``
    tests each of the p^L candidates directly; the default ``"lift"`` does so
    at level 0 and afterwards solves the equivalent linear system over F_p,
    which yields the same set.  The witness is the lexicographically smallest
    zero at the final level.

    ``digits`` optionally bounds variable l to [0, p^digits[l]): its digit
    at position e >= digits[l] is held at zero.  Only sound when the system
    does not depend on those digits.
    """
    polys = list(system)
    if not polys:
        raise InvalidInputError("empty polynomial system")
    if L < 1 or cap < 0:
        raise InvalidInputError(f"need L >= 1 and cap >= 0, got L={L}, cap={cap}")
    if strategy not in ("lift", "enumerate"):
        raise InvalidInputError(f"unknown strategy {strategy!r}")
    if any(f.L != L for f in polys):
        raise InvalidInputError("polynomial variable counts differ from L")
    if digits is not None and len(digits) != L:
        raise InvalidInputError(f"digit bounds have length {len(digits)}, expected L={L}")

    lifter = _Lifter(polys, p, L, strategy, digits)
    frontier = [(0,) * L]
    counts = [1]
    levels = [tuple(frontier)] if keep_levels else None
    e = 0
    while e < cap:
        nxt: list = []
        for z in frontier:
            nxt.extend(lifter.expand(z, e))
            if len(nxt) > budget:
                raise FrontierOverflowError(
                    f"frontier at level {e + 1} exceeds budget {budget}", e, len(nxt))
        if not nxt:
            break
        frontier = sorted(set(nxt))
        e += 1
        counts.append(len(frontier))
        if levels is not None:
            levels.append(tuple(frontier))
        log.debug("level %d: %d common zeros", e, len(frontier))
    return DdpReport(e, e == cap, tuple(counts), frontier[0],
                     tuple(levels) if levels is not None else None)


def linf_training_minimum(system: Sequence[IntPolynomial], p: int, L: int, E: int,
                          budget: int = DEFAULT_FRONTIER_BUDGET,
                          digits: Sequence[int] | None = None) -> LossValue:
    """Exact min over z of max_i |f_i(z) mod p^E|, i.e. p^(-e_star) or zero."""
    report = ddp_max_exponent(system, p, L, E, budget, digits=digits)
    vals = tuple(_capped_valuation(f.eval_mod(report.witness, p**E), p, E) for f in system)
    if report.hit_cap:
        return LossValue("linf", Fraction(0), True, E, vals, report.witness)
    return LossValue("linf", Fraction(1, p**report.e_star), False, report.e_star, vals,
                     report.witness)


def _grid_values(f: IntPolynomial, grid: np.ndarray, modulus: int) -> np.ndarray:
    total = np.zeros(grid.shape[0], dtype=np.int64)
    for mono, c in f.terms.items():
        t = np.full(grid.shape[0], c % modulus, dtype=np.int64)
        for v, k in mono:
            for _ in range(k):
                t = t * grid[:, v] % modulus
        total = (total + t) % modulus
    return total


def brute_force_minimum(system: Sequence[IntPolynomial], p: int, L: int, E: int,
                        norm: str = "linf",
                        budget: int = DEFAULT_ENUMERATION_BUDGET) -> tuple:
    """Exact minimum over all z in [0, p^E)^L, with every minimiser.

    Returns ``(LossValue, argmins)``; argmins are in lexicographic order and
    the LossValue witness is the first of them.
    """
    if norm not in ("linf", "l1"):
        raise InvalidInputError(f"unknown norm {norm!r}")
    modulus = p**E
    size = modulus**L
    if size > budget:
        raise BudgetExceededError(f"{modulus}^{L} = {size} points exceeds budget {budget}")
    polys = list(system)
    if modulus < 2**31:
        axes = np.indices((modulus,) * L).reshape(L, -1).T.astype(np.int64)
        values = [_grid_values(f, axes, modulus) for f in polys]
        rows = zip(map(tuple, axes.tolist()), zip(*[v.tolist() for v in values]))
    else:
        points = itertools.product(range(modulus), repeat=L)
        rows = ((z, tuple(f.eval_mod(z, modulus) for f in polys)) for z in points)

    best = None
    argmins: list = []
    best_vals: tuple = ()
    for z, vals in rows:
        vs = tuple(_capped_valuation(v, p, E) for v in vals)
        if norm == "linf":
            score = -min(vs, default=E)  # smaller is better
        else:
            score = sum((Fraction(1, p**v) for v in vs if v < E), Fraction(0))
        if best is None or score < best:
            best, argmins, best_vals = score, [z], vs
        elif score == best:
            argmins.append(z)
    if norm == "linf":
        e = -best
        loss = LossValue("linf", Fraction(0) if e >= E else Fraction(1, p**e), e >= E, e,
                         best_vals, argmins[0])
    else:
        loss = LossValue("l1", best, best == 0, None, best_vals, argmins[0])
    return loss, argmins


@dataclass(frozen=True)
class TrainResult:
    network: CharacterNetwork
    loss: LossValue
    report: DdpReport | None
    system: CompiledSystem = field(repr=False)

    def to_json(self) -> dict:
        return {
            "network": self.network.to_json(),
            "loss": self.loss.to_json(),
            "ddp": None if self.report is None else self.report.to_json(),
        }


def train(shape: NetShape, data: Dataset, norm: str = "linf",
          frontier_budget: int = DEFAULT_FRONTIER_BUDGET,
          enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET) -> TrainResult:
    """Fit (A, b, C) exactly and return the network with its loss.

    The loss is reported for y - C chi(Ax + b) itself, i.e. after undoing the
    p^F rescaling used during compilation: an l-infinity valuation e_star of
    the compiled system becomes e_star - F.
    """
    system = compile_residual(shape, data)
    p, Ee, F, L = system.p, system.E_eff, shape.F, system.L
    report = None
    if norm == "linf":
        report = ddp_max_exponent(system.polynomials, p, L, Ee, frontier_budget,
                                  digits=system.digits)
        witness = report.witness
    elif norm == "l1":
        _, argmins = brute_force_minimum(system.polynomials, p, L, Ee, "l1", enumeration_budget)
        witness = argmins[0]
    else:
        raise InvalidInputError(f"unknown norm {norm!r}")

    net = system.decode(witness)
    res = [padic_norm(r) for row in residuals(net, data) for r in row]
    vals = tuple(n.valuation for n in res)
    if norm == "linf":
        if report.hit_cap:
            loss = LossValue("linf", Fraction(0), True, shape.E, vals, witness)
        else:
            v = report.e_star - F
            loss = LossValue("linf", Fraction(p) ** (-v), False, v, vals, witness)
    else:
        total = sum((n.norm for n in res if not n.capped), Fraction(0))
        loss = LossValue("l1", total, total == 0, None, vals, witness)
    return TrainResult(net, loss, report, system)
