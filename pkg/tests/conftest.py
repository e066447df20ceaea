import random

import pytest

from circsafe.corpus import standard_proofs, term_corpus


def bitlen(x: int) -> int:
    return x.bit_length()


# Independent oracles for the corpus proofs: direct transcriptions of the
# defining equational programs, kept separate from the package evaluators.


def s_program(x: int) -> int:
    if x == 0:
        return 1
    if x % 2 == 0:
        return 2 * (x // 2) + 1
    return 2 * s_program(x // 2)


def c_program(x: int, y: int, z: int) -> int:
    if x == 0 and y == 0:
        return z
    if x == 0:
        return 2 * c_program(0, y >> 1, z) + (y & 1)
    return 2 * c_program(x >> 1, y, z) + (x & 1)


def e_program(x: int, y: int) -> int:
    if x == 0:
        return 2 * y
    return e_program(x >> 1, e_program(x >> 1, y))


def p_program(x: int) -> int:
    if x == 0:
        return 0
    if x % 2 == 0:
        return 2 * p_program(x >> 1) + 1
    return 2 * (x >> 1)


def l_program(x: int, y: int) -> int:
    if x == 0:
        return y
    return 2 * l_program(x >> 1, y) + 1


def n_closed(n: int) -> int:
    return 2**n - 1


PROOF_ORACLES = {
    "S": lambda xs, ys: s_program(xs[0]),
    "C": lambda xs, ys: c_program(xs[0], xs[1], ys[0]),
    "E": lambda xs, ys: e_program(xs[0], ys[0]),
    "P": lambda xs, ys: p_program(xs[0]),
    "L": lambda xs, ys: l_program(xs[0], ys[0]),
    "N": lambda xs, ys: n_closed(xs[0]),
}


def sample_two_sorted(rng: random.Random, m: int, n: int, normal_bits: int, safe_bits: int = None):
    """Random inputs with the normal lengths jointly bounded."""
    if safe_bits is None:
        safe_bits = normal_bits
    xs = []
    budget = normal_bits
    for _ in range(m):
        b = rng.randrange(budget + 1)
        xs.append(rng.getrandbits(b) if b else 0)
        budget -= xs[-1].bit_length()
    ys = [rng.getrandbits(rng.randrange(safe_bits + 1)) for _ in range(n)]
    return xs, ys


@pytest.fixture(scope="session")
def proofs():
    return standard_proofs()


@pytest.fixture(scope="session")
def terms():
    return term_corpus()
