"""Fixed-precision p-adic integers and p-adic numbers with bounded denominators.

A p-adic integer known mod p^E is stored as its canonical representative in
[0, p^E).  Numbers of the form p^(-F) * u are stored as the numerator u,
canonical in [0, p^(E+F)).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import InvalidInputError, NonUnitError

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    if n >= 3_317_044_064_679_887_385_961_981:
        raise InvalidInputError(f"primality of {n} is outside the deterministic range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PadicContext:
    """A prime p together with a precision exponent E."""

    p: int
    E: int
    powers: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise InvalidInputError(f"p={self.p!r} is not a prime")
        if not isinstance(self.E, int) or self.E < 1:
            raise InvalidInputError(f"precision E must be a positive integer, got {self.E!r}")
        object.__setattr__(self, "powers", tuple(self.p**v for v in range(self.E + 1)))

    @property
    def modulus(self) -> int:
        return self.powers[self.E]

    def pow_p(self, v: int) -> int:
        if 0 <= v <= self.E:
            return self.powers[v]
        return self.p**v

    def with_precision(self, E: int) -> "PadicContext":
        return self if E == self.E else PadicContext(self.p, E)

    def residue(self, value: int) -> "PadicResidue":
        return PadicResidue(self, value)

    def scaled(self, numerator: int, F: int = 0) -> "ScaledPadic":
        return ScaledPadic(self, F, numerator)

    def to_json(self) -> dict:
        return {"p": self.p, "E": self.E}

    @classmethod
    def from_json(cls, obj) -> "PadicContext":
        return cls(int(obj["p"]), int(obj["E"]))


class ValuativePair(NamedTuple):
    v: int
    u: int


def valuative_decomposition(p: int, x: int) -> ValuativePair:
    """Split a positive integer x as p^v * u with u coprime to p."""
    if x <= 0:
        raise InvalidInputError(f"valuative decomposition needs x >= 1, got {x}")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return ValuativePair(v, x)


def valuation(p: int, x: int, cap: int | None = None) -> int:
    """p-adic valuation of an integer; zero maps to ``cap`` (which must be given)."""
    if x == 0:
        if cap is None:
            raise InvalidInputError("valuation of 0 needs a cap")
        return cap
    v = valuative_decomposition(p, abs(x)).v
    return v if cap is None else min(v, cap)


# -- modular inversion -------------------------------------------------------

def _inverse_euclid(x: int, modulus: int) -> int:
    r0, r1 = modulus, x % modulus
    s0, s1 = 0, 1
    while r1:
        quot = r0 // r1
        r0, r1 = r1, r0 - quot * r1
        s0, s1 = s1, s0 - quot * s1
    if r0 != 1:
        raise NonUnitError(f"{x} is not invertible mod {modulus}")
    return s0 % modulus


def _inverse_euler(x: int, p: int, e: int) -> int:
    # x^(phi(p^e) - 1) with phi(p^e) = p^(e-1) (p - 1)
    modulus = p**e
    return pow(x, p ** (e - 1) * (p - 1) - 1, modulus)


_unit_tables: dict[int, tuple] = {}
_unit_tables_lock = threading.Lock()


def _unit_table(p: int) -> tuple:
    table = _unit_tables.get(p)
    if table is None:
        with _unit_tables_lock:
            table = _unit_tables.get(p)
            if table is None:
                table = (0,) + tuple(_inverse_euclid(k, p) for k in range(1, p))
                _unit_tables[p] = table
    return table


def _inverse_series(x: int, p: int, e: int) -> int:
    # x * y0 = 1 + p t, then 1/(1 + p t) = sum_k (-p t)^k truncated at k = e
    modulus = p**e
    y0 = _unit_table(p)[x % p]
    h = (1 - x * y0) % modulus  # = -p t, divisible by p
    acc, term = 1, 1
    for _ in range(1, e):
        term = term * h % modulus
        if term == 0:
            break
        acc += term
    return acc * y0 % modulus


INVERSE_STRATEGIES = ("euclid", "euler", "series")


def inverse_mod_prime_power(x: int, p: int, e: int, strategy: str = "euclid") -> int:
    """Inverse of an integer x coprime to p, modulo p^e (e >= 0)."""
    if x % p == 0:
        raise NonUnitError(f"{x} is divisible by p={p}")
    if e == 0:
        return 0
    if strategy == "euclid":
        return _inverse_euclid(x, p**e)
    if strategy == "euler":
        return _inverse_euler(x, p, e)
    if strategy == "series":
        return _inverse_series(x, p, e)
    raise InvalidInputError(f"unknown inversion strategy {strategy!r}")


def mod_inverse(ctx: PadicContext, x: "PadicResidue | int", e: int | None = None,
                strategy: str = "euclid") -> "PadicResidue":
    """Inverse of the unit ``x`` modulo p^e, returned in the context (p, e).

    ``e`` defaults to the full precision of ``ctx`` and may not exceed it.
    """
    e = ctx.E if e is None else e
    if not 1 <= e <= ctx.E:
        raise InvalidInputError(f"target exponent {e} outside [1, {ctx.E}]")
    value = x.value if isinstance(x, PadicResidue) else int(x)
    y = inverse_mod_prime_power(value, ctx.p, e, strategy)
    return PadicResidue(ctx.with_precision(e), y)


# -- values --------------------------------------------------------------------

class PadicNorm(NamedTuple):
    """Valuation and norm |x| = p^(-valuation).

    When ``capped`` is set the value is zero at the known precision, the
    valuation is only a lower bound and ``norm`` an upper bound.
    """

    valuation: int
    capped: bool
    norm: Fraction

    def __str__(self):
        return f">= {self.valuation}" if self.capped else str(self.valuation)


@dataclass(frozen=True)
class PadicResidue:
    ctx: PadicContext
    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % self.ctx.modulus)

    def _coerce(self, other) -> int:
        if isinstance(other, PadicResidue):
            if other.ctx != self.ctx:
                raise InvalidInputError(f"context mismatch: {self.ctx} vs {other.ctx}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return o if o is NotImplemented else PadicResidue(self.ctx, self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return o if o is NotImplemented else PadicResidue(self.ctx, self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return o if o is NotImplemented else PadicResidue(self.ctx, o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return o if o is NotImplemented else PadicResidue(self.ctx, self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return PadicResidue(self.ctx, -self.value)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return PadicResidue(self.ctx, pow(self.value, n, self.ctx.modulus))

    def __int__(self):
        return self.value

    def is_unit(self) -> bool:
        return self.value % self.ctx.p != 0

    def inverse(self, strategy: str = "euclid") -> "PadicResidue":
        return mod_inverse(self.ctx, self, strategy=strategy)

    def reduce(self, E: int) -> "PadicResidue":
        """Image in Z/p^E for E <= current precision."""
        if E > self.ctx.E:
            raise InvalidInputError(f"cannot raise precision {self.ctx.E} -> {E}")
        return PadicResidue(self.ctx.with_precision(E), self.value)

    def to_json(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class ScaledPadic:
    """p^(-F) * numerator, known modulo p^E (numerator known mod p^(E+F))."""

    ctx: PadicContext
    F: int
    numerator: int

    def __post_init__(self):
        if self.F < 0:
            raise InvalidInputError(f"denominator exponent F must be >= 0, got {self.F}")
        object.__setattr__(self, "numerator", int(self.numerator) % self.num_modulus)

    @property
    def num_modulus(self) -> int:
        return self.ctx.p ** (self.ctx.E + self.F)

    @classmethod
    def from_residue(cls, x: PadicResidue, F: int = 0) -> "ScaledPadic":
        return cls(x.ctx, F, x.value * x.ctx.p**F)

    def rescale(self, F: int) -> "ScaledPadic":
        """Same value written over the larger denominator p^F."""
        if F < self.F:
            raise InvalidInputError(f"cannot lower the denominator exponent {self.F} -> {F}")
        return ScaledPadic(self.ctx, F, self.numerator * self.ctx.p ** (F - self.F))

    def __add__(self, other: "ScaledPadic") -> "ScaledPadic":
        if other.ctx != self.ctx:
            raise InvalidInputError("context mismatch")
        F = max(self.F, other.F)
        return ScaledPadic(self.ctx, F, self.rescale(F).numerator + other.rescale(F).numerator)

    def __neg__(self):
        return ScaledPadic(self.ctx, self.F, -self.numerator)

    def __sub__(self, other: "ScaledPadic") -> "ScaledPadic":
        return self + (-other)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.ctx.p**self.F)

    def to_json(self) -> dict:
        return {"num": str(self.numerator), "F": self.F}

    @classmethod
    def from_json(cls, ctx: PadicContext, obj) -> "ScaledPadic":
        return cls(ctx, int(obj["F"]), int(obj["num"]))


def padic_norm(x: "ScaledPadic | PadicResidue") -> PadicNorm:
    """Valuation and p-adic norm under the normalisation |p| = 1/p."""
    if isinstance(x, PadicResidue):
        x = ScaledPadic.from_residue(x)
    ctx = x.ctx
    if x.numerator == 0:
        return PadicNorm(ctx.E, True, Fraction(1, ctx.p**ctx.E))
    v = valuative_decomposition(ctx.p, x.numerator).v - x.F
    return PadicNorm(v, False, Fraction(ctx.p) ** (-v))
