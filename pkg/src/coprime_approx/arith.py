"""Integer arithmetic: primality, factorization, Euler's totient."""

from __future__ import annotations

import math
import random
from functools import reduce

import numpy as np

# first 12 primes: Miller-Rabin with these bases is deterministic below 3.3e24
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)
PROBABLE_ROUNDS = 64


def _mr_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def primality(n: int) -> tuple[bool, bool]:
    """Return (is_prime, certain).

    Deterministic for n < 2**64; beyond that 64 Miller-Rabin rounds with
    bases drawn from a generator seeded by n, so results are reproducible
    and a True answer means "probable prime".
    """
    if n < 2:
        return False, True
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p, True
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        return all(_mr_round(n, d, s, a) for a in _DETERMINISTIC_BASES), True
    rng = random.Random(n)
    for _ in range(PROBABLE_ROUNDS):
        if not _mr_round(n, d, s, rng.randrange(2, n - 1)):
            return False, True
    return True, False


def is_prime(n: int) -> bool:
    return primality(n)[0]


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division, then Pollard-Brent splitting."""
    if n < 1:
        raise ValueError("n must be positive")
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 53
    while f * f <= n and f < 10_000:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        g = _pollard_brent(m)
        stack += [g, m // g]
    return dict(sorted(out.items()))


def euler_phi(q: int) -> int:
    """Euler's totient of a positive integer."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return reduce(lambda acc, pe: acc * (pe[0] - 1) * pe[0] ** (pe[1] - 1), factorize(q).items(), 1)


def totient_sieve(n: int) -> np.ndarray:
    """Array ``phi`` with ``phi[k]`` = Euler's totient of k for 0 <= k <= n (phi[0] = 0)."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return phi
