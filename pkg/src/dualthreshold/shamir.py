"""Polynomial secret sharing over Z_q.

A secret s is hidden as the constant term of a random polynomial; member i's
share is the evaluation at its public identity.  Any degree+1 shares recover
the constant term (or the whole polynomial); fewer reveal nothing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .groupmath import lagrange_coeff_zero, mod_inv


@dataclass(frozen=True)
class SecretPolynomial:
    coefficients: tuple[int, ...]  # constant term first

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def secret(self) -> int:
        return self.coefficients[0]


@dataclass(frozen=True)
class Share:
    id: int
    value: int


def sample_polynomial(secret: int, degree: int, rng: random.Random, q: int) -> SecretPolynomial:
    if degree < 0:
        raise ValueError("degree must be non-negative")
    coeffs = (secret % q,) + tuple(rng.randrange(q) for _ in range(degree))
    return SecretPolynomial(coeffs)


def eval_poly(poly: SecretPolynomial, x: int, q: int) -> int:
    acc = 0
    for c in reversed(poly.coefficients):
        acc = (acc * x + c) % q
    return acc


def _check_share_ids(shares: Sequence[Share], q: int) -> None:
    residues = [s.id % q for s in shares]
    if len(set(residues)) != len(residues):
        raise ValueError(f"duplicate share identities mod q: {sorted(s.id for s in shares)}")
    if any(r == 0 for r in residues):
        raise ValueError("share identity 0 mod q is not allowed")


def reconstruct_zero(shares: Iterable[Share], q: int) -> int:
    """Recover f(0) from shares by Lagrange interpolation at zero.

    The caller is responsible for supplying degree+1 shares; shares carry no
    degree metadata, so an undersized pool silently yields a wrong value.
    """
    pool = list(shares)
    if not pool:
        raise ValueError("need at least one share")
    _check_share_ids(pool, q)
    ids = [s.id for s in pool]
    return sum(s.value * lagrange_coeff_zero(s.id, ids, q) for s in pool) % q


def reconstruct_polynomial(shares: Iterable[Share], q: int) -> SecretPolynomial:
    """Recover the full coefficient vector from degree+1 shares."""
    pool = list(shares)
    if not pool:
        raise ValueError("need at least one share")
    _check_share_ids(pool, q)
    coeffs = [0] * len(pool)
    for i, share in enumerate(pool):
        # basis polynomial: prod over j != i of (x - x_j) / (x_i - x_j)
        basis = [1]
        denom = 1
        for j, other in enumerate(pool):
            if j == i:
                continue
            widened = [0] * (len(basis) + 1)
            for d, c in enumerate(basis):
                widened[d] = (widened[d] - c * other.id) % q
                widened[d + 1] = (widened[d + 1] + c) % q
            basis = widened
            denom = denom * (share.id - other.id) % q
        scale = share.value * mod_inv(denom, q) % q
        for d, c in enumerate(basis):
            coeffs[d] = (coeffs[d] + c * scale) % q
    return SecretPolynomial(tuple(coeffs))
