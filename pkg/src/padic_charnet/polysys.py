"""Sparse integer polynomials and compilation of network residuals into them.

The compiled variables are the entries of A, b and p^F C, so every polynomial
has integer coefficients and is meaningful modulo p^(E+F).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .characters import Character, _log, exp_constants, factorial_table, legendre
from .errors import InvalidInputError, SchemaError, ShapeError, UnsupportedCompilationError
from .network import CharacterNetwork, Dataset
from .padic import PadicContext, PadicResidue, inverse_mod_prime_power

# A monomial is a sorted tuple of (variable, exponent) pairs with exponent > 0.
Monomial = tuple


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    exps = dict(m1)
    for v, k in m2:
        exps[v] = exps.get(v, 0) + k
    return tuple(sorted(exps.items()))


class IntPolynomial:
    """Polynomial over Z in L variables, stored as {monomial: coefficient}."""

    __slots__ = ("L", "terms")

    def __init__(self, L: int, terms=None):
        self.L = L
        clean = {}
        for mono, coef in (terms or {}).items():
            mono = tuple(sorted((int(v), int(k)) for v, k in mono if k))
            for v, _ in mono:
                if not 0 <= v < L:
                    raise InvalidInputError(f"variable {v} outside [0, {L})")
            clean[mono] = clean.get(mono, 0) + int(coef)
        self.terms = {m: c for m, c in clean.items() if c}

    @classmethod
    def constant(cls, L: int, c: int) -> "IntPolynomial":
        return cls(L, {(): c})

    @classmethod
    def variable(cls, L: int, i: int) -> "IntPolynomial":
        return cls(L, {((i, 1),): 1})

    def _raw(self, terms) -> "IntPolynomial":
        out = IntPolynomial.__new__(IntPolynomial)
        out.L = self.L
        out.terms = {m: c for m, c in terms.items() if c}
        return out

    def _lift(self, other) -> "IntPolynomial":
        if isinstance(other, int):
            return IntPolynomial.constant(self.L, other)
        if other.L != self.L:
            raise ShapeError(f"variable counts differ: {self.L} vs {other.L}")
        return other

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return self._raw(terms)

    __radd__ = __add__

    def __neg__(self):
        return self._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return self._raw({m: c * other for m, c in self.terms.items()})
        other = self._lift(other)
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                terms[m] = terms.get(m, 0) + c1 * c2
        return self._raw(terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, IntPolynomial) and self.L == other.L and self.terms == other.terms

    def __hash__(self):
        return hash((self.L, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in sorted(self.terms.items()):
            vs = "*".join(f"z{v}" + (f"^{k}" if k > 1 else "") for v, k in mono)
            parts.append(f"{c}*{vs}" if vs else str(c))
        return " + ".join(parts)

    def reduce(self, modulus: int) -> "IntPolynomial":
        return self._raw({m: c % modulus for m, c in self.terms.items()})

    def degree(self) -> int:
        return max((sum(k for _, k in m) for m in self.terms), default=0)

    def derivative(self, var: int) -> "IntPolynomial":
        terms: dict = {}
        for mono, c in self.terms.items():
            exps = dict(mono)
            k = exps.get(var, 0)
            if not k:
                continue
            if k == 1:
                del exps[var]
            else:
                exps[var] = k - 1
            m = tuple(sorted(exps.items()))
            terms[m] = terms.get(m, 0) + c * k
        return self._raw(terms)

    def eval_mod(self, z: Sequence[int], modulus: int) -> int:
        """Value at the integer vector z, reduced mod ``modulus``."""
        if len(z) != self.L:
            raise ShapeError(f"point has length {len(z)}, expected L={self.L}")
        powers: dict = {}
        total = 0
        for mono, c in self.terms.items():
            t = c
            for v, k in mono:
                key = (v, k)
                pw = powers.get(key)
                if pw is None:
                    pw = powers[key] = pow(z[v], k, modulus)
                t = t * pw % modulus
            total += t
        return total % modulus

    def to_json(self) -> dict:
        return {
            "terms": [
                {"exps": {str(v): k for v, k in mono}, "coef": str(c)}
                for mono, c in sorted(self.terms.items())
            ]
        }

    @classmethod
    def from_json(cls, L: int, obj) -> "IntPolynomial":
        try:
            terms = {}
            for t in obj["terms"]:
                mono = tuple(sorted((int(v), int(k)) for v, k in t["exps"].items()))
                terms[mono] = terms.get(mono, 0) + int(t["coef"])
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(f"malformed polynomial: {exc}") from exc
        return cls(L, terms)


def poly_eval_mod(f: IntPolynomial, z: Sequence, p: int, e: int) -> PadicResidue:
    """f(z) mod p^e as a residue."""
    if e < 1:
        raise InvalidInputError(f"exponent must be >= 1, got {e}")
    zs = [v.value if isinstance(v, PadicResidue) else int(v) for v in z]
    ctx = PadicContext(p, e)
    return PadicResidue(ctx, f.eval_mod(zs, ctx.modulus))


# -- residual compilation ------------------------------------------------------

@dataclass(frozen=True)
class NetShape:
    N: int
    D: int
    M: int
    chi: Character
    E: int
    F: int = 0

    @property
    def L(self) -> int:
        return self.D * self.N + self.D + self.M * self.D


class VarSlot(NamedTuple):
    param: str  # "A", "b" or "C"
    index: tuple


def variable_layout(N: int, D: int, M: int) -> list:
    """A row-major first, then b, then p^F C row-major."""
    slots = [VarSlot("A", (j, k)) for j in range(D) for k in range(N)]
    slots += [VarSlot("b", (j,)) for j in range(D)]
    slots += [VarSlot("C", (r, j)) for r in range(M) for j in range(D)]
    return slots


def series_degree(p: int, E: int) -> int:
    """Truncation degree of exp_p(qx) at precision E."""
    return exp_constants(p, E).degree


def exp_coefficients(p: int, E: int) -> list:
    """Integers k_e with k_e = q^e / e! mod p^E, for e below the truncation degree.

    Terms whose coefficient is divisible by p^E are kept as zero.
    """
    m, _, degree = exp_constants(p, E)
    ctx = PadicContext(p, E)
    table = factorial_table(ctx, degree - 1)
    coefs = []
    for e in range(degree):
        v, u = table[e]
        shift = m * e - v
        if shift >= E:
            coefs.append(0)
        else:
            coefs.append(p**shift * inverse_mod_prime_power(u, p, E) % ctx.modulus)
    return coefs


def _log_scale(chi: Character, E: int) -> int:
    """c' with chi(x) = exp_p(q c' x), modulo p^(E - m)."""
    chi = chi.with_precision(E)
    if chi.exp:
        return 1
    p = chi.p
    if p == 2 and chi.a % 4 == 3:
        raise UnsupportedCompilationError(
            "base is -1 mod 4: a^x needs a sign that depends on the parity of x"
        )
    m, q, _ = exp_constants(p, E)
    return _log(p, E, chi.a) // q


@dataclass(frozen=True)
class CompiledSystem:
    shape: NetShape
    p: int
    E_eff: int
    polynomials: tuple
    index: tuple  # (sample, output row) per polynomial
    layout: tuple = field(repr=False)

    @property
    def L(self) -> int:
        return self.shape.L

    @property
    def digits(self) -> tuple:
        """Base-p digit count per variable: E+F-1 for A and b, E+F for p^F C."""
        return tuple(self.E_eff if s.param == "C" else self.E_eff - 1 for s in self.layout)

    def decode(self, z: Sequence[int]) -> CharacterNetwork:
        """Network whose parameters are read off the variable vector z."""
        s = self.shape
        if len(z) != s.L:
            raise ShapeError(f"witness has length {len(z)}, expected {s.L}")
        A = [[0] * s.N for _ in range(s.D)]
        b = [0] * s.D
        C = [[0] * s.D for _ in range(s.M)]
        for slot, value in zip(self.layout, z):
            if slot.param == "A":
                A[slot.index[0]][slot.index[1]] = value
            elif slot.param == "b":
                b[slot.index[0]] = value
            else:
                C[slot.index[0]][slot.index[1]] = value
        ctx = PadicContext(self.p, s.E)
        return CharacterNetwork(ctx, s.F, s.chi, A, b, C)

    def encode(self, net: CharacterNetwork) -> tuple:
        """Inverse of ``decode``."""
        out = []
        for slot in self.layout:
            if slot.param == "A":
                out.append(net.A[slot.index[0]][slot.index[1]])
            elif slot.param == "b":
                out.append(net.b[slot.index[0]])
            else:
                out.append(net.C[slot.index[0]][slot.index[1]])
        return tuple(out)

    def to_json(self) -> dict:
        s = self.shape
        return {
            "p": self.p,
            "E": self.E_eff,
            "L": s.L,
            "digits": list(self.digits),
            "shape": {"N": s.N, "D": s.D, "M": s.M, "E": s.E, "F": s.F, "chi": s.chi.to_json()},
            "layout": [
                {"var": i, "param": slot.param, "index": list(slot.index)}
                for i, slot in enumerate(self.layout)
            ],
            "index": [list(ix) for ix in self.index],
            "polynomials": [f.to_json() for f in self.polynomials],
        }

    @classmethod
    def from_json(cls, obj) -> "CompiledSystem":
        try:
            sh = obj["shape"]
            shape = NetShape(int(sh["N"]), int(sh["D"]), int(sh["M"]),
                             Character.from_json(sh["chi"]), int(sh["E"]), int(sh["F"]))
            L = int(obj["L"])
            polys = tuple(IntPolynomial.from_json(L, f) for f in obj["polynomials"])
            index = tuple(tuple(int(v) for v in ix) for ix in obj["index"])
            layout = tuple(VarSlot(d["param"], tuple(int(v) for v in d["index"])) for d in obj["layout"])
            return cls(shape, int(obj["p"]), int(obj["E"]), polys, index, layout)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed compiled system: {exc}") from exc


def load_system(obj) -> tuple:
    """(polynomials, L, p or None, digits or None) from a system document."""
    try:
        L = int(obj["L"])
        polys = [IntPolynomial.from_json(L, f) for f in obj["polynomials"]]
        p = int(obj["p"]) if "p" in obj else None
        digits = [int(v) for v in obj["digits"]] if obj.get("digits") is not None else None
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"malformed polynomial system: {exc}") from exc
    if digits is not None and len(digits) != L:
        raise SchemaError(f"digits has length {len(digits)}, expected L={L}")
    return polys, L, p, digits


def system_to_json(polys: Sequence[IntPolynomial], L: int, p: int | None = None) -> dict:
    doc: dict = {"L": L, "polynomials": [f.to_json() for f in polys]}
    if p is not None:
        doc["p"] = p
    return doc


def compile_residual(shape: NetShape, data: Dataset) -> CompiledSystem:
    """Residual polynomials p^F (y_i - C chi(A x_i + b)) in the parameter entries.

    Each value is meaningful modulo p^(E+F).  chi(w) is replaced by the
    exponential series truncated for precision E+F, with its rational
    coefficients q^e / e! cleared to integers mod p^(E+F).
    """
    p, E, F = data.ctx.p, shape.E, shape.F
    if (E, F) != (data.ctx.E, data.F):
        raise ShapeError(f"shape precision (E={E}, F={F}) differs from the dataset's "
                         f"(E={data.ctx.E}, F={data.F})")
    if shape.N != data.N or shape.M != data.M:
        raise ShapeError("shape N/M differ from the dataset")
    if shape.chi.p != p:
        raise ShapeError("character prime differs from the dataset prime")
    E_eff = E + F
    modulus = p**E_eff
    scale = _log_scale(shape.chi, E_eff)
    coefs = exp_coefficients(p, E_eff)
    layout = variable_layout(shape.N, shape.D, shape.M)
    L = shape.L
    N, D, M = shape.N, shape.D, shape.M
    var = lambda i: IntPolynomial.variable(L, i)  # noqa: E731
    a_var = [[var(j * N + k) for k in range(N)] for j in range(D)]
    b_var = [var(D * N + j) for j in range(D)]
    c_var = [[var(D * N + D + r * D + j) for j in range(D)] for r in range(M)]

    polys, index = [], []
    for i, x in enumerate(data.X):
        hidden = []
        for j in range(D):
            lin = b_var[j] * scale
            for k in range(N):
                lin = lin + a_var[j][k] * (scale * x[k] % modulus)
            lin = lin.reduce(modulus)
            series = IntPolynomial(L)
            power = IntPolynomial.constant(L, 1)
            for e, k_e in enumerate(coefs):
                if e:
                    power = (power * lin).reduce(modulus)
                if k_e:
                    series = series + power * k_e
            hidden.append(series.reduce(modulus))
        for r in range(M):
            f = IntPolynomial.constant(L, data.Y[i][r])
            for j in range(D):
                f = f - c_var[r][j] * hidden[j]
            polys.append(f.reduce(modulus))
            index.append((i, r))
    return CompiledSystem(shape, p, E_eff, tuple(polys), tuple(index), tuple(layout))


def taylor_term_valuation(p: int, e: int) -> int:
    """Exact valuation of q^e / e!."""
    m = exp_constants(p, 1).m
    return m * e - legendre(p, e)
