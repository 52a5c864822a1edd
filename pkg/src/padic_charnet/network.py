"""Single-hidden-layer character networks x -> C chi(Ax + b) and their combinators.

Parameters are stored as canonical integers: entries of A and b modulo
p^(E+F-1), and the numerators of C = p^(-F) * (integer matrix) modulo p^(E+F).
The sum, product and stacking combinators build networks whose forward map is
the pointwise sum, product or tuple of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .characters import Character, evaluate
from .errors import CharacterMismatchError, InvalidInputError, SchemaError, ShapeError
from .padic import PadicContext, PadicResidue, ScaledPadic


def _ints(row) -> tuple:
    return tuple(x.value if isinstance(x, PadicResidue) else int(x) for x in row)


@dataclass(frozen=True)
class CharacterNetwork:
    ctx: PadicContext
    F: int
    chi: Character
    A: tuple  # D x N
    b: tuple  # D
    C: tuple  # M x D numerators of p^F C
    N: int = field(init=False)
    D: int = field(init=False)
    M: int = field(init=False)

    def __post_init__(self):
        if self.F < 0:
            raise InvalidInputError(f"F must be >= 0, got {self.F}")
        if self.chi.p != self.ctx.p:
            raise CharacterMismatchError("character prime differs from the network prime")
        A = tuple(_ints(row) for row in self.A)
        b = _ints(self.b)
        C = tuple(_ints(row) for row in self.C)
        D = len(b)
        if D < 1:
            raise ShapeError("hidden dimension D must be >= 1")
        if len(A) != D:
            raise ShapeError(f"A has {len(A)} rows, expected D={D}")
        N = len(A[0])
        if any(len(row) != N for row in A):
            raise ShapeError("A rows have unequal lengths")
        if any(len(row) != D for row in C):
            raise ShapeError(f"C rows must have length D={D}")
        am, cm = self.arg_modulus, self.num_modulus
        object.__setattr__(self, "A", tuple(tuple(x % am for x in row) for row in A))
        object.__setattr__(self, "b", tuple(x % am for x in b))
        object.__setattr__(self, "C", tuple(tuple(x % cm for x in row) for row in C))
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "M", len(C))
        if self.chi.E < self.ctx.E + self.F:
            object.__setattr__(self, "chi", self.chi.with_precision(self.ctx.E + self.F))

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def E(self) -> int:
        return self.ctx.E

    @property
    def arg_modulus(self) -> int:
        return self.p ** (self.E + self.F - 1)

    @property
    def num_modulus(self) -> int:
        return self.p ** (self.E + self.F)

    def with_precision(self, E: int) -> "CharacterNetwork":
        """Reinterpret the integer parameters at another output precision."""
        return CharacterNetwork(self.ctx.with_precision(E), self.F, self.chi, self.A, self.b, self.C)

    def hidden(self, x: Sequence, method: str = "binary") -> tuple:
        """chi(Ax + b) mod p^(E+F), one entry per hidden unit."""
        if len(x) != self.N:
            raise ShapeError(f"input has length {len(x)}, expected N={self.N}")
        x = _ints(x)
        am = self.arg_modulus
        out = []
        for row, bj in zip(self.A, self.b):
            w = (sum(ajk * xk for ajk, xk in zip(row, x)) + bj) % am
            out.append(evaluate(self.chi, w, method).value)
        return tuple(out)

    def forward(self, x: Sequence, method: str = "binary") -> list:
        return forward(self, x, method)

    def to_json(self) -> dict:
        return {
            "p": self.p, "E": self.E, "F": self.F,
            "N": self.N, "D": self.D, "M": self.M,
            "chi": self.chi.to_json(),
            "A": [[str(v) for v in row] for row in self.A],
            "b": [str(v) for v in self.b],
            "C": [[{"num": str(v), "F": self.F} for v in row] for row in self.C],
        }

    @classmethod
    def from_json(cls, obj) -> "CharacterNetwork":
        try:
            ctx = PadicContext(int(obj["p"]), int(obj["E"]))
            F = int(obj["F"])
            chi = Character.from_json(obj["chi"])
            A = [[int(v) for v in row] for row in obj["A"]]
            b = [int(v) for v in obj["b"]]
            C = []
            for row in obj["C"]:
                crow = []
                for entry in row:
                    s = ScaledPadic(ctx, int(entry["F"]), int(entry["num"]))
                    crow.append(s.rescale(F).numerator)
                C.append(crow)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed network document: {exc}") from exc
        net = cls(ctx, F, chi, A, b, C)
        for key in ("N", "D", "M"):
            if key in obj and int(obj[key]) != getattr(net, key):
                raise SchemaError(f"declared {key}={obj[key]} does not match the matrices")
        return net


def forward(net: CharacterNetwork, x: Sequence, method: str = "binary") -> list:
    """Outputs p^(-F) * (p^F C) chi(Ax + b) as ScaledPadic values mod p^E."""
    h = net.hidden(x, method)
    return [
        ScaledPadic(net.ctx, net.F, sum(c * hj for c, hj in zip(row, h)))
        for row in net.C
    ]


def _common_character(nets: Sequence[CharacterNetwork]) -> Character:
    """Check shared context, N and character; return the most precise character."""
    first = nets[0]
    for other in nets[1:]:
        if other.ctx != first.ctx:
            raise InvalidInputError(f"context mismatch: {first.ctx} vs {other.ctx}")
        if other.N != first.N:
            raise ShapeError(f"input dimension mismatch: {first.N} vs {other.N}")
    prec = min(n.chi.E for n in nets)
    ref = first.chi.with_precision(prec).a
    for other in nets[1:]:
        if other.chi.with_precision(prec).a != ref:
            raise CharacterMismatchError("networks use different characters")
    return max((n.chi for n in nets), key=lambda c: c.E)


def _lift_C(net: CharacterNetwork, F: int) -> list:
    shift = net.p ** (F - net.F)
    return [[c * shift for c in row] for row in net.C]


def net_add(g0: CharacterNetwork, g1: CharacterNetwork) -> CharacterNetwork:
    """Network whose forward map is forward(g0) + forward(g1)."""
    chi = _common_character([g0, g1])
    if g0.M != g1.M:
        raise ShapeError(f"output dimension mismatch: {g0.M} vs {g1.M}")
    F = max(g0.F, g1.F)
    C0, C1 = _lift_C(g0, F), _lift_C(g1, F)
    C = [r0 + r1 for r0, r1 in zip(C0, C1)]
    return CharacterNetwork(g0.ctx, F, chi, g0.A + g1.A, g0.b + g1.b, C)


def net_multiply(g0: CharacterNetwork, g1: CharacterNetwork) -> CharacterNetwork:
    """Network whose forward map is forward(g0) * forward(g1), for M = 1.

    Hidden unit j pairs unit j mod D0 of g0 with unit j // D0 of g1.  The
    denominator exponent of the result is F0 + F1.
    """
    chi = _common_character([g0, g1])
    if g0.M != 1 or g1.M != 1:
        raise ShapeError("net_multiply needs single-output networks")
    d0, d1 = g0.D, g1.D
    A, b, C = [], [], []
    for j in range(d0 * d1):
        j0, j1 = j % d0, j // d0
        A.append([x + y for x, y in zip(g0.A[j0], g1.A[j1])])
        b.append(g0.b[j0] + g1.b[j1])
        C.append(g0.C[0][j0] * g1.C[0][j1])
    return CharacterNetwork(g0.ctx, g0.F + g1.F, chi, A, b, [C])


def net_stack(nets: Sequence[CharacterNetwork]) -> CharacterNetwork:
    """Block-diagonal assembly: output j of the result is the output of nets[j]."""
    nets = list(nets)
    if not nets:
        raise ShapeError("net_stack needs at least one network")
    chi = _common_character(nets)
    if any(n.M != 1 for n in nets):
        raise ShapeError("net_stack needs single-output networks")
    F = max(n.F for n in nets)
    D = sum(n.D for n in nets)
    A, b, C = [], [], []
    offset = 0
    for n in nets:
        A.extend(n.A)
        b.extend(n.b)
        row = [0] * D
        row[offset:offset + n.D] = _lift_C(n, F)[0]
        C.append(row)
        offset += n.D
    return CharacterNetwork(nets[0].ctx, F, chi, A, b, C)


def net_scale(net: CharacterNetwork, c: ScaledPadic) -> CharacterNetwork:
    """Multiply the forward map by c, changing only C."""
    if c.ctx.p != net.p:
        raise InvalidInputError("scalar lives over a different prime")
    C = [[c.numerator * v for v in row] for row in net.C]
    return CharacterNetwork(net.ctx, net.F + c.F, net.chi, net.A, net.b, C)


def constant_network(ctx: PadicContext, chi: Character, N: int, value: int = 1,
                     F: int = 0) -> CharacterNetwork:
    """D = M = 1 network with A = 0, b = 0, whose output is p^(-F) * value."""
    return CharacterNetwork(ctx, F, chi, [[0] * N], [0], [[value]])


def coordinate_probe(ctx: PadicContext, chi: Character, N: int, i: int) -> CharacterNetwork:
    """D = M = 1 network computing chi(x_i)."""
    if not 0 <= i < N:
        raise ShapeError(f"coordinate {i} out of range for N={N}")
    row = [0] * N
    row[i] = 1
    return CharacterNetwork(ctx, 0, chi, [row], [0], [[1]])


@dataclass(frozen=True)
class Dataset:
    """Samples x_i (mod p^(E+F-1)) with observations y_i in p^(-F)Zp mod p^E."""

    ctx: PadicContext
    F: int
    X: tuple
    Y: tuple  # tuples of ScaledPadic numerators, denominator p^F
    N: int = field(init=False)
    M: int = field(init=False)

    def __post_init__(self):
        X = tuple(_ints(x) for x in self.X)
        Y = tuple(
            tuple(y.rescale(self.F).numerator if isinstance(y, ScaledPadic) else int(y) for y in row)
            for row in self.Y
        )
        if len(X) != len(Y):
            raise ShapeError(f"{len(X)} inputs but {len(Y)} observations")
        if not X:
            raise ShapeError("dataset is empty")
        N, M = len(X[0]), len(Y[0])
        if any(len(x) != N for x in X) or any(len(y) != M for y in Y):
            raise ShapeError("samples have inconsistent dimensions")
        am = self.ctx.p ** (self.ctx.E + self.F - 1)
        ym = self.ctx.p ** (self.ctx.E + self.F)
        object.__setattr__(self, "X", tuple(tuple(v % am for v in x) for x in X))
        object.__setattr__(self, "Y", tuple(tuple(v % ym for v in y) for y in Y))
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "M", M)

    def __len__(self):
        return len(self.X)

    def y(self, i: int) -> list:
        return [ScaledPadic(self.ctx, self.F, v) for v in self.Y[i]]

    def to_json(self) -> dict:
        return {
            "p": self.ctx.p, "E": self.ctx.E, "F": self.F, "N": self.N, "M": self.M,
            "samples": [
                {"x": [str(v) for v in x], "y": [{"num": str(v), "F": self.F} for v in y]}
                for x, y in zip(self.X, self.Y)
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "Dataset":
        try:
            ctx = PadicContext(int(obj["p"]), int(obj["E"]))
            F = int(obj["F"])
            X, Y = [], []
            for s in obj["samples"]:
                X.append([int(v) for v in s["x"]])
                Y.append([ScaledPadic(ctx, int(y["F"]), int(y["num"])).rescale(F) for y in s["y"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed dataset document: {exc}") from exc
        data = cls(ctx, F, X, Y)
        for key in ("N", "M"):
            if key in obj and int(obj[key]) != getattr(data, key):
                raise SchemaError(f"declared {key}={obj[key]} does not match the samples")
        return data


def residuals(net: CharacterNetwork, data: Dataset) -> list:
    """y_i - forward(x_i) for every sample, as lists of ScaledPadic."""
    if net.ctx != data.ctx or net.N != data.N or net.M != data.M:
        raise ShapeError("network and dataset disagree on p, E, N or M")
    out = []
    for i, x in enumerate(data.X):
        out.append([y - f for y, f in zip(data.y(i), forward(net, x))])
    return out
