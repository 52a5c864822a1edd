"""End-to-end acceptance checks, one test per criterion.

Each test times itself, records a PASS/FAIL line (printed in the pytest
terminal summary) and then asserts, so a failure still leaves its line.
"""

import itertools
import math
import random
import time
from fractions import Fraction

from padic_charnet.characters import (
    Character,
    eval_binary,
    eval_mahler,
    exp_constants,
    invert_character,
    is_injective,
)
from padic_charnet.network import (
    Dataset,
    forward,
    net_add,
    net_multiply,
    net_stack,
    residuals,
)
from padic_charnet.padic import PadicContext, ScaledPadic, padic_norm
from padic_charnet.polysys import IntPolynomial, NetShape, compile_residual, poly_eval_mod
from padic_charnet.solver import brute_force_minimum, ddp_max_exponent, linf_training_minimum, train

from conftest import random_character, random_network


def v_p(p, n, cap):
    if n == 0:
        return cap
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return min(v, cap)


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


# -- 1 -----------------------------------------------------------------------------

def test_criterion_1_mahler_equals_binary(report_criterion):
    rng = random.Random(1001)

    def run():
        bad = []
        for _ in range(500):
            p = rng.choice([2, 3, 5, 7])
            E = rng.randint(1, 12)
            chi = random_character(rng, p, E)
            x = rng.randrange(p**E)
            if eval_mahler(chi, x) != eval_binary(chi, x):
                bad.append((p, E, chi.a, x))
        return bad

    bad, secs = timed(run)
    ok = report_criterion(1, "mahler == binary on 500 cases", not bad and secs < 10,
                          f"{len(bad)} mismatches, {secs:.2f}s")
    assert ok, bad[:5]


# -- 2 -----------------------------------------------------------------------------

def test_criterion_2_exp_log_round_trip(report_criterion):
    rng = random.Random(1002)

    def run():
        bad, done = [], 0
        while done < 200:
            p = rng.choice([2, 3, 5])
            E = rng.randint(2, 10)
            ctx = PadicContext(p, E)
            chi = Character.exponential(ctx) if rng.random() < 0.25 else random_character(rng, p, E)
            if not is_injective(chi):
                continue
            x = rng.randrange(p**E)
            out = invert_character(chi, eval_binary(chi, x))
            if (out.value - x) % out.ctx.modulus != 0 or out.ctx.E < 1:
                bad.append((p, E, chi.a, x, out.value, out.ctx.E))
            done += 1
        return bad

    bad, secs = timed(run)
    ok = report_criterion(2, "invert(chi, chi(x)) == x at certified precision, 200 cases",
                          not bad and secs < 10, f"{len(bad)} mismatches, {secs:.2f}s")
    assert ok, bad[:5]


# -- 3 -----------------------------------------------------------------------------

def test_criterion_3_taylor_truncation(report_criterion):
    def frac_val(p, r):
        return v_p(p, r.numerator, 10**9) - v_p(p, r.denominator, 10**9)

    def run():
        bad = []
        for p in (2, 3, 5, 7, 11, 13):
            for E in range(1, 25):
                m, q, degree = exp_constants(p, E)
                # every term q^e x^e / e! with e >= degree is dropped; x in Z_p only raises it
                for e in range(degree, degree + 6):
                    if frac_val(p, Fraction(q**e, math.factorial(e))) < E:
                        bad.append((p, E, e))
        return bad

    bad, secs = timed(run)
    ok = report_criterion(3, "dropped Taylor terms have valuation >= E", not bad and secs < 5,
                          f"{len(bad)} violations, {secs:.2f}s")
    assert ok, bad[:5]


# -- 4 -----------------------------------------------------------------------------

def _combinator_failures(rng):
    bad = []
    for p in (2, 3):
        for E, F in [(1, 0), (2, 0), (3, 0), (1, 1), (2, 1), (1, 2)]:
            ctx = PadicContext(p, E)
            chi = random_character(rng, p, E + F + 2)
            for N in (1, 2):
                points = list(itertools.product(range(p ** (E + F - 1)), repeat=N))
                for D0, D1 in itertools.product((1, 2), repeat=2):
                    F1 = rng.randint(0, F)
                    g0 = random_network(rng, ctx, F, chi, N, D0, 1)
                    g1 = random_network(rng, ctx, F1, chi, N, D1, 1)
                    s = net_add(g0, g1)
                    t = net_stack([g0, g1])
                    # product: the F values add, so keep F0 + F1 within the grid
                    h0 = random_network(rng, ctx, F1, chi, N, D0, 1)
                    h1 = random_network(rng, ctx, F - F1, chi, N, D1, 1)
                    prod = net_multiply(h0, h1)
                    for x in points:
                        y0, y1 = forward(g0, x)[0], forward(g1, x)[0]
                        if forward(s, x) != [y0 + y1]:
                            bad.append(("add", p, E, F, N, x))
                        if forward(t, x) != [y0.rescale(t.F), y1.rescale(t.F)]:
                            bad.append(("stack", p, E, F, N, x))
                        u0 = forward(h0.with_precision(E + h1.F), x)[0].numerator
                        u1 = forward(h1.with_precision(E + h0.F), x)[0].numerator
                        if forward(prod, x) != [ScaledPadic(ctx, F, u0 * u1)]:
                            bad.append(("multiply", p, E, F, N, x))
    return bad


def test_criterion_4_combinators_exhaustive(report_criterion):
    bad, secs = timed(lambda: _combinator_failures(random.Random(1004)))
    ok = report_criterion(4, "add/multiply/stack match pointwise sum/product/tuple on every input",
                          not bad and secs < 30, f"{len(bad)} mismatches, {secs:.2f}s")
    assert ok, bad[:5]


# -- 5 -----------------------------------------------------------------------------

def test_criterion_5_compilation_soundness(report_criterion):
    rng = random.Random(1005)

    def run():
        bad = []
        for _ in range(200):
            p = rng.choice([2, 3, 5])
            E, F = rng.randint(1, 3), rng.randint(0, 2)
            Ee = E + F
            ctx = PadicContext(p, E)
            chi = (Character.exponential(ctx.with_precision(Ee)) if rng.random() < 0.25
                   else random_character(rng, p, Ee, allow_negative_base=False))
            N, D, M = rng.randint(1, 2), rng.randint(1, 2), rng.randint(1, 2)
            samples = rng.randint(1, 3)
            X = [[rng.randrange(p ** (Ee - 1)) for _ in range(N)] for _ in range(samples)]
            Y = [[rng.randrange(p**Ee) for _ in range(M)] for _ in range(samples)]
            data = Dataset(ctx, F, X, Y)
            system = compile_residual(NetShape(N, D, M, chi, E, F), data)
            zv = [rng.randrange(p**Ee) for _ in range(system.L)]
            res = residuals(system.decode(zv), data)
            for f, (i, r) in zip(system.polynomials, system.index):
                if poly_eval_mod(f, zv, p, Ee).value != res[i][r].rescale(F).numerator:
                    bad.append((p, E, F, N, D, M, i, r))
        return bad

    bad, secs = timed(run)
    ok = report_criterion(5, "compiled polynomials equal p^F (y - forward) on 200 draws",
                          not bad and secs < 30, f"{len(bad)} mismatches, {secs:.2f}s")
    assert ok, bad[:5]


# -- 6 -----------------------------------------------------------------------------

def _random_instances(seed=1006, count=200):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        p = rng.choice([2, 3, 5])
        L = rng.randint(1, 3)
        E = rng.randint(1, 4)
        if p ** (E * L) > 3**8:
            continue
        polys = []
        for _ in range(rng.randint(1, 3)):
            terms = {}
            for _ in range(rng.randint(1, 4)):
                vars_ = sorted(rng.sample(range(L), rng.randint(0, L)))
                terms[tuple((v, rng.randint(1, 3)) for v in vars_)] = rng.randint(-p ** (E + 1), p ** (E + 1))
            polys.append(IntPolynomial(L, terms))
        out.append((polys, p, L, E))
    return out


def _fixed_instances():
    x = IntPolynomial.variable(1, 0)
    return [([x * x - 2], 3, 1, 3, 0), ([x * x - 3], 3, 1, 3, 1), ([x - 1], 2, 1, 4, 4)]


def test_criterion_6_ddp_matches_brute_force(report_criterion):
    def run():
        bad = []
        for polys, p, L, E in _random_instances():
            ours = ddp_max_exponent(polys, p, L, E).e_star
            oracle, _ = brute_force_minimum(polys, p, L, E, "linf")
            if ours != oracle.valuation:
                bad.append((p, L, E, ours, oracle.valuation))
        for polys, p, L, cap, expected in _fixed_instances():
            r = ddp_max_exponent(polys, p, L, cap)
            if r.e_star != expected or r.hit_cap != (expected == cap):
                bad.append(("fixed", p, cap, r.e_star, expected))
        return bad

    bad, secs = timed(run)
    ok = report_criterion(6, "DDP e_star equals brute force on 200 systems and fixed cases",
                          not bad and secs < 60, f"{len(bad)} mismatches, {secs:.2f}s")
    assert ok, bad[:5]


# -- 7 -----------------------------------------------------------------------------

def _generated_problem(rng, p, F, D, samples):
    E = 2
    ctx = PadicContext(p, E)
    chi = random_character(rng, p, E + F, allow_negative_base=False)
    truth = random_network(rng, ctx, F, chi, 1, D, 1)
    X = [[rng.randrange(p ** (E + F - 1))] for _ in range(samples)]
    return NetShape(1, D, 1, chi, E, F), Dataset(ctx, F, X, [forward(truth, x) for x in X])


def _inconsistent_problem(rng, p, F):
    E = 2
    ctx = PadicContext(p, E)
    chi = random_character(rng, p, E + F, allow_negative_base=False)
    x = rng.randrange(p ** (E + F - 1))
    y0 = rng.randrange(p ** (E + F))
    y1 = (y0 + p ** rng.randint(F, E + F - 1) * rng.randrange(1, p)) % p ** (E + F)
    return NetShape(1, 1, 1, chi, E, F), Dataset(ctx, F, [[x], [x]], [[y0], [y1]])


def test_criterion_7_training(report_criterion):
    rng = random.Random(1007)

    def run():
        bad = []
        for p, F, D in itertools.product((2, 3), (0, 1), (1, 2)):
            for samples in (1, 2, 3):
                shape, data = _generated_problem(rng, p, F, D, samples)
                result = train(shape, data)
                vals = [padic_norm(r) for row in residuals(result.network, data) for r in row]
                if not result.loss.zero or any(n.valuation < shape.E for n in vals):
                    bad.append(("fit", p, F, D, samples))
        for p, F in itertools.product((2, 3), (0, 1)):
            for _ in range(2):
                shape, data = _inconsistent_problem(rng, p, F)
                result = train(shape, data)
                oracle, _ = brute_force_minimum(result.system.polynomials, p, result.system.L,
                                                result.system.E_eff, "linf")
                if result.loss.zero or result.report.e_star != oracle.valuation:
                    bad.append(("inconsistent", p, F, result.report.e_star, oracle.valuation))
                elif result.loss.value != Fraction(p) ** (F - oracle.valuation):
                    bad.append(("loss", p, F, result.loss.value))
        return bad

    bad, secs = timed(run)
    ok = report_criterion(7, "training fits generated data exactly and matches brute force otherwise",
                          not bad and secs < 120, f"{len(bad)} failures, {secs:.2f}s")
    assert ok, bad[:5]


# -- 8 ---------------------------------------------------------------------------

def _enumerated_e_star(polys, p, L, E):
    """Plain scan of [0, p^E)^L with Python integers."""
    m = p**E
    best = 0
    for pt in itertools.product(range(m), repeat=L):
        worst = E
        for f in polys:
            val = 0
            for mono, c in f.terms.items():
                t = c
                for v, k in mono:
                    t = t * pow(pt[v], k, m) % m
                val += t
            worst = min(worst, v_p(p, val % m, E))
            if worst <= best:
                break
        best = max(best, worst)
        if best == E:
            break
    return best


def test_criterion_8_linf_loss_formula(report_criterion):
    def run():
        bad = []
        cases = [(polys, p, L, E) for polys, p, L, E in _random_instances()]
        cases += [(polys, p, L, cap) for polys, p, L, cap, _ in _fixed_instances()]
        for polys, p, L, E in cases:
            loss = linf_training_minimum(polys, p, L, E)
            e_star = _enumerated_e_star(polys, p, L, E)
            expected = Fraction(0) if e_star == E else Fraction(1, p**e_star)
            if loss.value != expected or loss.valuation != e_star:
                bad.append((p, L, E, loss.value, expected))
        return bad

    bad, secs = timed(run)
    ok = report_criterion(8, "l-infinity loss equals p^(-e_star), e_star confirmed by enumeration",
                          not bad, f"{len(bad)} mismatches, {secs:.2f}s")
    assert ok, bad[:5]
