import random

import pytest

from dualthreshold.groupmath import (
    FULL_PROFILE,
    GroupParams,
    ParameterSearchError,
    derive_generator,
    find_generator,
    generate_params,
    is_prime,
    lagrange_coeff_zero,
    mod_exp,
    mod_inv,
    random_prime,
    validate_params,
)
from dualthreshold.shamir import SecretPolynomial, eval_poly


def brute_inverse(a, m):
    for b in range(1, m):
        if a * b % m == 1:
            return b
    raise AssertionError(f"no inverse of {a} mod {m}")


class TestValidateParams:
    def test_demo_params_valid(self, params47):
        report = validate_params(params47)
        assert report.ok
        assert report.failures() == ()

    def test_generator_one_rejected(self):
        report = validate_params(GroupParams(47, 23, 1))
        assert not report.ok
        assert "generator_above_1" in report.failures()

    def test_composite_order_rejected(self):
        report = validate_params(GroupParams(47, 22, 2))
        failures = report.failures()
        assert "q_prime" in failures
        assert "q_divides_p_minus_1" in failures

    def test_full_profile_size_bounds(self):
        small = GroupParams(47, 23, 2, profile=FULL_PROFILE)
        failures = validate_params(small).failures()
        assert "p_size" in failures and "q_size" in failures


class TestModExp:
    def test_positive(self, params47):
        assert mod_exp(2, 11, 47) == 27

    def test_zero_exponent(self, params47):
        assert mod_exp(params47.g, 0, params47.p) == 1

    def test_negative(self):
        assert mod_exp(2, -8, 47) == 9

    def test_negative_non_invertible(self):
        with pytest.raises(ValueError):
            mod_exp(47, -1, 47)

    def test_exponent_addition_law(self, params47):
        rng = random.Random(5)
        p, q, g = params47.p, params47.q, params47.g
        for _ in range(50):
            a, b = rng.randrange(q), rng.randrange(q)
            assert mod_exp(g, a + b, p) == mod_exp(g, a, p) * mod_exp(g, b, p) % p

    def test_negative_matches_inverse_of_positive(self, params47):
        rng = random.Random(6)
        p = params47.p
        for _ in range(100):
            base = rng.randrange(1, p)
            exp = rng.randrange(1, 100)
            assert mod_exp(base, -exp, p) == mod_inv(mod_exp(base, exp, p), p)


class TestModInv:
    @pytest.mark.parametrize("a,m,expected", [(21, 47, 9), (12, 23, 2), (1, 47, 1), (1, 23, 1)])
    def test_known_inverses(self, a, m, expected):
        assert brute_inverse(a, m) == expected  # oracle agrees with the frozen value
        assert mod_inv(a, m) == expected

    @pytest.mark.parametrize("m", [23, 47])
    def test_exhaustive_roundtrip(self, m):
        for a in range(1, m):
            assert a * mod_inv(a, m) % m == 1

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            mod_inv(0, 23)

    def test_non_coprime_rejected(self):
        with pytest.raises(ValueError):
            mod_inv(6, 9)


class TestDeriveGenerator:
    def test_seed_two(self):
        g = derive_generator(2, 47, 23)
        assert g == 4
        assert pow(g, 23, 47) == 1

    def test_seed_one_retries(self):
        assert derive_generator(1, 47, 23) is None

    def test_minus_one_retries(self):
        # 46 = -1 mod 47 and (p-1)/q = 2, so the candidate collapses to 1
        assert derive_generator(46, 47, 23) is None

    def test_out_of_range_seed(self):
        with pytest.raises(ValueError):
            derive_generator(0, 47, 23)

    def test_find_generator_skips_degenerate_seeds(self):
        assert find_generator(47, 23, start_seed=1) == 4


class TestGenerateParams:
    def test_supplied_literals(self):
        params = generate_params("test", p=47, q=23, g=2)
        assert (params.p, params.q, params.g) == (47, 23, 2)
        assert validate_params(params).ok

    def test_invalid_literals_rejected(self):
        with pytest.raises(ParameterSearchError):
            generate_params("test", p=48, q=23, g=2)

    def test_small_search_is_self_consistent(self):
        params = generate_params("test", random.Random(7), p_bits=48, q_bits=24)
        assert params.p.bit_length() == 48
        assert params.q.bit_length() == 24
        assert (params.p - 1) % params.q == 0
        assert validate_params(params).ok

    def test_seeded_search_is_deterministic(self):
        a = generate_params("test", random.Random(9), p_bits=40, q_bits=20)
        b = generate_params("test", random.Random(9), p_bits=40, q_bits=20)
        assert a == b

    def test_missing_sizes_rejected(self):
        with pytest.raises(ValueError):
            generate_params("test")


class TestPrimality:
    @pytest.mark.parametrize("n,expected", [
        (0, False), (1, False), (2, True), (23, True), (47, True),
        (22, False), (45, False), (10**6 + 3, True), (10**6 + 1, False),
    ])
    def test_small_and_boundary(self, n, expected):
        assert is_prime(n) is expected

    def test_random_prime_has_requested_size(self):
        rng = random.Random(11)
        p = random_prime(32, rng)
        assert p.bit_length() == 32
        assert is_prime(p)


class TestLagrange:
    def test_fixture_coefficients(self):
        # anchored by the worked example's shadows: 3*17 = 5 and 4*11 = 21 mod 23
        assert lagrange_coeff_zero(9, {9, 11, 5, 4}, 23) == 17
        assert lagrange_coeff_zero(11, {9, 11, 5, 4}, 23) == 11

    def test_singleton_is_one(self):
        assert lagrange_coeff_zero(7, {7}, 23) == 1

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            lagrange_coeff_zero(2, [2, 25], 23)  # 25 = 2 mod 23

    def test_zero_identity_rejected(self):
        with pytest.raises(ValueError):
            lagrange_coeff_zero(2, [2, 23], 23)

    def test_missing_own_id_rejected(self):
        with pytest.raises(ValueError):
            lagrange_coeff_zero(3, [2, 5], 23)

    @pytest.mark.parametrize("t", [2, 3, 4])
    def test_interpolation_identity(self, t):
        # sum of f(u_i) * coeff_i recovers f(0) for every sampled polynomial
        rng = random.Random(100 + t)
        q = 23
        for _ in range(25):
            poly = SecretPolynomial(tuple(rng.randrange(q) for _ in range(t)))
            ids = rng.sample(range(1, q), t)
            total = sum(
                eval_poly(poly, u, q) * lagrange_coeff_zero(u, ids, q) for u in ids
            ) % q
            assert total == poly.coefficients[0]
