import random

import pytest
from hypothesis import settings

from padic_charnet import Character, CharacterNetwork, PadicContext

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

_acceptance_lines = []


@pytest.fixture
def report_criterion():
    """Record a one-line pass/fail verdict for the acceptance summary."""

    def record(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        _acceptance_lines.append(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def random_character(rng, p, E, allow_negative_base=True):
    """Random character base mod p^E; for p = 2 optionally restricted to 1 mod 4."""
    ctx = PadicContext(p, E)
    if p == 2 and not allow_negative_base:
        return Character(ctx, 1 + 4 * rng.randrange(2**E))
    return Character(ctx, 1 + p * rng.randrange(p**E))


def random_network(rng, ctx, F, chi, N, D, M):
    arg = ctx.p ** (ctx.E + F - 1)
    num = ctx.p ** (ctx.E + F)
    A = [[rng.randrange(arg) for _ in range(N)] for _ in range(D)]
    b = [rng.randrange(arg) for _ in range(D)]
    C = [[rng.randrange(num) for _ in range(D)] for _ in range(M)]
    return CharacterNetwork(ctx, F, chi, A, b, C)


@pytest.fixture
def rng():
    return random.Random(20261017)
