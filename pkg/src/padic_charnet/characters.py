"""p-adic characters x -> a^x on Zp evaluated modulo p^E.

Three evaluation routes are provided: the Mahler (binomial) series, the
Taylor series of exp_p(qx), and square-and-multiply on the natural-number
representative of x.  They agree modulo p^E and are selected through
``evaluate(chi, x, method=...)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError, InvalidInputError, NotInImageError
from .padic import (
    PadicContext,
    PadicResidue,
    ValuativePair,
    inverse_mod_prime_power,
    valuative_decomposition,
)

METHODS = ("binary", "mahler", "taylor")


class ExpConstants(NamedTuple):
    """m, q = p^m and the truncation degree E' of the exponential series."""

    m: int
    q: int
    degree: int


def exp_constants(p: int, E: int) -> ExpConstants:
    m = 2 if p == 2 else 1
    # E' = ceil(E / (m - 1/(p-1))) = ceil(E (p-1) / (m (p-1) - 1))
    degree = max(1, -(-E * (p - 1) // (m * (p - 1) - 1)))
    return ExpConstants(m, p**m, degree)


def legendre(p: int, n: int) -> int:
    """v_p(n!) by Legendre's formula."""
    v, pk = 0, p
    while pk <= n:
        v += n // pk
        pk *= p
    return v


def _ilog(p: int, n: int) -> int:
    k = 0
    while n >= p:
        n //= p
        k += 1
    return k


# -- factorial table -------------------------------------------------------------

FactorialTable = tuple  # of ValuativePair, entry e = (v_p(e!), unit part of e! mod p^E)

_factorial_cache: dict[tuple[int, int], list] = {}
_factorial_lock = threading.Lock()


def factorial_table(ctx: PadicContext, N: int) -> FactorialTable:
    """Valuation and p-coprime part (mod p^E) of 0!, 1!, ..., N!.

    Tables are cached per (p, E) and extended on demand.
    """
    if N < 0:
        raise InvalidInputError(f"N must be >= 0, got {N}")
    key = (ctx.p, ctx.E)
    with _factorial_lock:
        table = _factorial_cache.setdefault(key, [ValuativePair(0, 1)])
        for e in range(len(table) - 1, N):
            v, u = table[e]
            v1, u1 = valuative_decomposition(ctx.p, e + 1)
            table.append(ValuativePair(v + v1, u * u1 % ctx.modulus))
        return tuple(table[: N + 1])


# -- characters --------------------------------------------------------------

@dataclass(frozen=True)
class Character:
    """The character a^x for a base a in 1 + pZp, known mod p^E.

    ``exp`` marks the base exp_p(q), which can be recomputed at any precision.
    Other bases are taken as exact integers when precision is raised; the
    caller is responsible for that being meaningful.
    """

    ctx: PadicContext
    a: int
    exp: bool = False

    def __post_init__(self):
        a = int(self.a) % self.ctx.modulus
        if a % self.ctx.p != 1 % self.ctx.p or (self.ctx.p == 2 and a % 2 != 1):
            raise DomainError(f"base {self.a} is not in 1 + {self.ctx.p}Zp")
        object.__setattr__(self, "a", a)

    @classmethod
    def exponential(cls, ctx: PadicContext) -> "Character":
        """x -> exp_p(qx), whose base is exp_p(q)."""
        return cls(ctx, _exp_taylor(ctx.p, ctx.E, 1), exp=True)

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def E(self) -> int:
        return self.ctx.E

    @property
    def base(self) -> PadicResidue:
        return PadicResidue(self.ctx, self.a)

    def with_precision(self, E: int) -> "Character":
        if E == self.ctx.E:
            return self
        ctx = self.ctx.with_precision(E)
        if self.exp:
            return Character.exponential(ctx)
        return Character(ctx, self.a)

    def __call__(self, x, method: str = "binary") -> PadicResidue:
        return evaluate(self, x, method)

    def to_json(self) -> dict:
        if self.exp:
            return {"p": self.p, "E": self.E, "exp": True}
        return {"p": self.p, "E": self.E, "a": str(self.a)}

    @classmethod
    def from_json(cls, obj) -> "Character":
        ctx = PadicContext(int(obj["p"]), int(obj["E"]))
        if obj.get("exp"):
            return cls.exponential(ctx)
        return cls(ctx, int(obj["a"]))


def _as_int(x) -> int:
    return x.value if isinstance(x, PadicResidue) else int(x)


def _power_mahler(p: int, E: int, a: int, x: int) -> int:
    modulus = p**E
    y = 0
    v, u = 0, 1  # valuation and unit part of binom(x, e)
    b = 1  # (a - 1)^e
    for e in range(E):
        if e > 0:
            if x - e + 1 == 0:
                break  # binom(x, e) = 0 from here on
            v1, u1 = valuative_decomposition(p, x - e + 1)
            v2, u2 = valuative_decomposition(p, e)
            work = p ** (E - e)
            u2 = inverse_mod_prime_power(u2, p, E - e)
            v, u = v + v1 - v2, u * u1 * u2 % work
            b = b * (a - 1) % modulus
        if v < E:
            y = (y + p**v * u * b) % modulus
    return y


def _exp_taylor(p: int, E: int, x: int) -> int:
    m, q, degree = exp_constants(p, E)
    modulus = p**E
    y = 0
    v, u = 0, 1  # -v_p(e!) and inverse of the unit part of e!, mod p^E
    b = 1  # x^e mod p^E
    for e in range(degree):
        if e > 0:
            v1, u1 = valuative_decomposition(p, e)
            v, u = v - v1, u * inverse_mod_prime_power(u1, p, E) % modulus
            b = b * x % modulus
        shift = v + m * e
        if shift < E:
            work = p ** (E - shift)
            y = (y + p**shift * (u * b % work)) % modulus
    return y


def _power_binary(a: int, x: int, modulus: int) -> int:
    y = 1
    a %= modulus
    while x:
        if x & 1:
            y = y * a % modulus
        a = a * a % modulus
        x >>= 1
    return y % modulus


def _log(p: int, E: int, y: int) -> int:
    """Iwasawa logarithm of y in 1 + pZp, modulo p^E."""
    modulus = p**E
    t = (y - 1) % modulus
    if t == 0:
        return 0
    s = valuative_decomposition(p, t).v
    result = 0
    e = 1
    # term e has valuation >= e*s - floor(log_p e), which is nondecreasing in e
    while e * s - _ilog(p, e) < E:
        k, w = valuative_decomposition(p, e)
        te = pow(t, e, modulus * p**k) // p**k
        term = te * inverse_mod_prime_power(w, p, E)
        result = result + term if e % 2 else result - term
        e += 1
    return result % modulus


def eval_mahler(chi: Character, x) -> PadicResidue:
    """a^x mod p^E from the truncated binomial series sum_{e<E} C(x, e) (a-1)^e."""
    p, E = chi.p, chi.E
    x = _as_int(x) % p ** (E - 1)
    return PadicResidue(chi.ctx, _power_mahler(p, E, chi.a, x))


def eval_taylor_exp(ctx: PadicContext, x) -> PadicResidue:
    """exp_p(qx) mod p^E from the Taylor series truncated at degree E'."""
    m = exp_constants(ctx.p, ctx.E).m
    x = _as_int(x) % ctx.p ** max(0, ctx.E - m)
    return PadicResidue(ctx, _exp_taylor(ctx.p, ctx.E, x))


def eval_binary(chi: Character, x) -> PadicResidue:
    x = _as_int(x) % chi.p ** (chi.E - 1)
    return PadicResidue(chi.ctx, _power_binary(chi.a, x, chi.ctx.modulus))


def _eval_taylor(chi: Character, x) -> PadicResidue:
    # a^x = exp_p(log_p(a) x), with a sign split for p = 2, a = -1 mod 4
    p, E = chi.p, chi.E
    x = _as_int(x) % p ** (E - 1)
    if chi.exp:
        return eval_taylor_exp(chi.ctx, x)
    m, q, _ = exp_constants(p, E)
    a, sign = chi.a, 1
    if p == 2 and a % 4 == 3:
        a = chi.ctx.modulus - a
        sign = -1 if x % 2 else 1
    scale = _log(p, E, a) // q
    value = eval_taylor_exp(chi.ctx, scale * x)
    return value if sign == 1 else -value


def evaluate(chi: Character, x, method: str = "binary") -> PadicResidue:
    if method == "binary":
        return eval_binary(chi, x)
    if method == "mahler":
        return eval_mahler(chi, x)
    if method == "taylor":
        return _eval_taylor(chi, x)
    raise InvalidInputError(f"unknown evaluation method {method!r}; expected one of {METHODS}")


def iwasawa_log(ctx: PadicContext, y) -> PadicResidue:
    y = _as_int(y) % ctx.modulus
    if y % ctx.p != 1 % ctx.p or y % 2 == 0 and ctx.p == 2:
        raise DomainError(f"{y} is not in 1 + {ctx.p}Zp")
    if ctx.p == 2 and ctx.E >= 2 and y % 4 != 1:
        raise DomainError(f"{y} is not 1 mod 4; take the logarithm of -y instead")
    return PadicResidue(ctx, _log(ctx.p, ctx.E, y))


def is_injective(chi: Character) -> bool:
    """Injectivity test at the stored precision.

    False for a = 1 and, when p = 2, for a = -1; both mod p^E.
    """
    if chi.a == 1 % chi.ctx.modulus:
        return False
    if chi.p == 2 and chi.a == chi.ctx.modulus - 1:
        return False
    return True


def _log_valuation(p: int, E: int, value: int) -> int:
    return valuative_decomposition(p, value).v if value else E


def invert_character(chi: Character, y) -> PadicResidue:
    """Recover x from y = a^x.

    The answer is certified modulo p^(E - c) with c = v_p(log_p a); it is
    returned in that reduced context.
    """
    p, E = chi.p, chi.E
    modulus = chi.ctx.modulus
    if not is_injective(chi):
        raise DomainError("character is not injective at this precision")
    y = _as_int(y) % modulus
    a = chi.a
    if y % p != 1 % p or (p == 2 and y % 2 == 0):
        raise NotInImageError(f"{y} is not in 1 + {p}Zp")
    if p == 2 and E >= 2:
        if a % 4 == 3:
            a = modulus - a
            if y % 4 == 3:
                y = modulus - y
        elif y % 4 == 3:
            raise NotInImageError(f"{y} = -1 mod 4 but the base is 1 mod 4")
    log_a = _log(p, E, a)
    log_y = _log(p, E, y)
    c = _log_valuation(p, E, log_a)
    if log_y % p**c:
        raise NotInImageError(f"log {y} has valuation below v_p(log a) = {c}")
    reduced = E - c
    work = p**reduced
    x = (log_y // p**c) * inverse_mod_prime_power(log_a // p**c, p, reduced) % work
    return PadicResidue(chi.ctx.with_precision(reduced), x)


def character_multiply(chi1: Character, chi2: Character) -> Character:
    if chi1.ctx != chi2.ctx:
        raise InvalidInputError("characters live in different contexts")
    return Character(chi1.ctx, chi1.a * chi2.a)
