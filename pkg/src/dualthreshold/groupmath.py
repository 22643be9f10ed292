"""Prime-order-subgroup parameters and the modular arithmetic everything else runs on.

The protocol works in the order-q subgroup of Z_p* generated by g, with all
exponent arithmetic mod q.  Scalars are plain ints in [0, q-1]; group
elements are plain ints in [1, p-1].  Two size profiles exist: "paper-full"
(512-bit p, 160-bit q) and "test" (caller-supplied small primes).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Optional

from .records import dec, undec

FULL_PROFILE = "paper-full"
TEST_PROFILE = "test"

FULL_P_BITS = 512
FULL_Q_BITS = 160

# Below this bound primality is decided by exhaustive trial division; above it
# by Miller-Rabin with enough rounds for an error bound of at most 2^-80.
_TRIAL_DIVISION_LIMIT = 10**6
_MILLER_RABIN_ROUNDS = 40


class ParameterSearchError(RuntimeError):
    """Raised when the prime/generator search exhausts its attempt budget."""


@dataclass(frozen=True)
class GroupParams:
    p: int
    q: int
    g: int
    profile: str = TEST_PROFILE

    def element_width(self) -> int:
        """Byte width of the canonical fixed-width element encoding."""
        return (self.p.bit_length() + 7) // 8

    def to_record(self) -> dict:
        return {"p": dec(self.p), "q": dec(self.q), "g": dec(self.g), "profile": self.profile}

    @classmethod
    def from_record(cls, rec: dict) -> "GroupParams":
        return cls(p=undec(rec["p"]), q=undec(rec["q"]), g=undec(rec["g"]), profile=rec["profile"])


@dataclass(frozen=True)
class ParamCheck:
    name: str
    ok: bool


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ParamCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.ok)


def is_prime(n: int, rng: Optional[random.Random] = None) -> bool:
    if n < 2:
        return False
    if n < _TRIAL_DIVISION_LIMIT:
        if n % 2 == 0:
            return n == 2
        f = 3
        while f * f <= n:
            if n % f == 0:
                return False
            f += 2
        return True
    if n % 2 == 0:
        return False
    rng = rng or random.SystemRandom()
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(_MILLER_RABIN_ROUNDS):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def mod_inv(a: int, m: int) -> int:
    """Multiplicative inverse of a mod m via extended Euclid."""
    if m <= 1:
        raise ValueError(f"modulus must exceed 1, got {m}")
    a %= m
    if a == 0:
        raise ValueError("0 has no inverse")
    g, x = _egcd(a, m)
    if g != 1:
        raise ValueError(f"{a} is not invertible mod {m} (gcd {g})")
    return x % m


def _egcd(a: int, b: int) -> tuple[int, int]:
    # returns (gcd, x) with a*x = gcd mod b
    old_r, r = a, b
    old_x, x = 1, 0
    while r:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_x, x = x, old_x - quot * x
    return old_r, old_x


def mod_exp(base: int, exponent: int, modulus: int) -> int:
    """base**exponent mod modulus; negative exponents go through the inverse.

    Exponent forms like g^-K therefore need no special casing at call sites.
    """
    if exponent >= 0:
        return pow(base % modulus, exponent, modulus)
    if gcd(base % modulus, modulus) != 1:
        raise ValueError(f"base {base} not invertible mod {modulus}: negative exponent impossible")
    return pow(mod_inv(base, modulus), -exponent, modulus)


def derive_generator(seed_k: int, p: int, q: int) -> Optional[int]:
    """Candidate generator seed_k**((p-1)/q) mod p, or None when degenerate.

    A None return means the caller should advance the seed and retry; a
    result of 1 (or less) generates nothing.
    """
    if not 1 <= seed_k <= p - 1:
        raise ValueError(f"seed must lie in [1, {p - 1}], got {seed_k}")
    candidate = pow(seed_k, (p - 1) // q, p)
    return candidate if candidate > 1 else None


def validate_params(params: GroupParams) -> ValidationReport:
    """Check every structural invariant; failures are reported, not raised."""
    p, q, g = params.p, params.q, params.g
    checks = [
        ParamCheck("p_prime", is_prime(p)),
        ParamCheck("q_prime", is_prime(q)),
        ParamCheck("q_divides_p_minus_1", p > 1 and (p - 1) % q == 0 if q else False),
        ParamCheck("generator_above_1", g > 1),
        ParamCheck("generator_order_q", g > 1 and pow(g, q, p) == 1),
    ]
    if params.profile == FULL_PROFILE:
        checks.append(ParamCheck("p_size", (1 << (FULL_P_BITS - 1)) < p < (1 << FULL_P_BITS)))
        checks.append(ParamCheck("q_size", (1 << (FULL_Q_BITS - 1)) < q < (1 << FULL_Q_BITS)))
    return ValidationReport(tuple(checks))


def random_prime(bits: int, rng: random.Random, max_attempts: int = 100_000) -> int:
    if bits < 2:
        raise ValueError("need at least 2 bits")
    for _ in range(max_attempts):
        candidate = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_prime(candidate, rng):
            return candidate
    raise ParameterSearchError(f"no {bits}-bit prime found in {max_attempts} attempts")


def find_generator(p: int, q: int, start_seed: int = 2, max_attempts: int = 10_000) -> int:
    seed = start_seed
    for _ in range(max_attempts):
        g = derive_generator(seed, p, q)
        if g is not None:
            return g
        seed += 1
    raise ParameterSearchError(f"no generator found from {max_attempts} seeds")


def generate_params(
    profile: str = FULL_PROFILE,
    rng: Optional[random.Random] = None,
    *,
    p: Optional[int] = None,
    q: Optional[int] = None,
    g: Optional[int] = None,
    p_bits: Optional[int] = None,
    q_bits: Optional[int] = None,
    max_attempts: int = 100_000,
) -> GroupParams:
    """Produce a validated parameter set for the requested profile.

    "paper-full" searches a 160-bit prime q, then primes of the form
    p = 2*q*r + 1 (so q | p-1 holds by construction) until p is a 512-bit
    prime, and derives g from ascending seeds.  "test" either validates
    supplied literals or searches at caller-chosen bit sizes.
    """
    rng = rng or random.SystemRandom()
    if profile == FULL_PROFILE:
        p_bits, q_bits = FULL_P_BITS, FULL_Q_BITS
    elif profile != TEST_PROFILE:
        raise ValueError(f"unknown profile {profile!r}")

    if p is not None and q is not None:
        params = GroupParams(p, q, g if g is not None else find_generator(p, q), profile)
    else:
        if p_bits is None or q_bits is None:
            raise ValueError("profile 'test' needs either p/q literals or p_bits/q_bits")
        if p_bits <= q_bits + 1:
            raise ValueError("p_bits must exceed q_bits + 1")
        q = random_prime(q_bits, rng, max_attempts)
        p = None
        r_lo = ((1 << (p_bits - 1)) // (2 * q)) + 1
        r_hi = ((1 << p_bits) - 2) // (2 * q)
        for _ in range(max_attempts):
            candidate = 2 * q * rng.randrange(r_lo, r_hi + 1) + 1
            if candidate.bit_length() == p_bits and is_prime(candidate, rng):
                p = candidate
                break
        if p is None:
            raise ParameterSearchError(f"no {p_bits}-bit p found in {max_attempts} attempts")
        params = GroupParams(p, q, find_generator(p, q), profile)

    report = validate_params(params)
    if not report.ok:
        raise ParameterSearchError(f"generated parameters fail validation: {report.failures()}")
    return params


def lagrange_coeff_zero(own_id: int, id_set: Iterable[int], q: int) -> int:
    """Lagrange coefficient at zero for own_id over the given identity subset.

    This is the factor each shareholder multiplies into its share so the
    subset's contributions sum to the polynomial's constant term.
    """
    ids = list(id_set)
    residues = [u % q for u in ids]
    if len(set(residues)) != len(residues):
        raise ValueError(f"identity set has duplicates mod q: {sorted(ids)}")
    if any(r == 0 for r in residues):
        raise ValueError("identity 0 mod q is not allowed")
    if own_id not in ids:
        raise ValueError(f"{own_id} is not in the identity set")
    num = 1
    den = 1
    for other in ids:
        if other == own_id:
            continue
        num = num * (-other) % q
        den = den * (own_id - other) % q
    return num * mod_inv(den, q) % q
