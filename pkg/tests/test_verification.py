import random
from itertools import combinations, product

import pytest

from dualthreshold import demo
from dualthreshold.ctc import SignatureBundle, setup_organization
from dualthreshold.groupmath import lagrange_coeff_zero, mod_exp
from dualthreshold.hashing import ChallengeHash
from dualthreshold.shamir import SecretPolynomial, Share, eval_poly, sample_polynomial
from dualthreshold.shares import Member, ModifiedShadow, modified_shadow
from dualthreshold.signing import aggregate_commitments, make_nonce_commitment
from dualthreshold.verification import (
    VerificationSession,
    combine_shadows,
    recover_commitment,
    verify_bundle,
)

FIXTURE_BUNDLE = SignatureBundle(15, 34, 18, b"paper-demo")
FIXTURE_HASH = ChallengeHash.scripted({(3, b"paper-demo"): 8})


class TestCombineShadows:
    def test_fixture_sum(self):
        shadows = [ModifiedShadow(uid, v) for uid, v in
                   zip((11, 8, 3, 6, 4), (19, 4, 11, 9, 10))]
        assert combine_shadows(shadows, 23) == 7

    def test_singleton(self):
        assert combine_shadows([ModifiedShadow(3, 21)], 23) == 21

    def test_random_org_recovers_constant_term(self, params47):
        rng = random.Random(16)
        poly = sample_polynomial(rng.randrange(23), 2, rng, 23)
        ids = rng.sample(range(1, 23), 6)
        subset = rng.sample(ids, 3)
        shadows = [
            modified_shadow(Share(u, eval_poly(poly, u, 23)), subset, 23) for u in subset
        ]
        assert combine_shadows(shadows, 23) == poly.secret

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            combine_shadows([ModifiedShadow(3, 1), ModifiedShadow(3, 2)], 23)

    def test_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            combine_shadows([ModifiedShadow(3, 1)], 23, expected_count=5)


class TestRecoverCommitment:
    def test_fixture(self, params47):
        assert recover_commitment(18, 34, 7, params47) == 3

    def test_zero_shadow_sum_returns_w(self, params47):
        assert recover_commitment(18, 34, 0, params47) == 18

    def test_recovers_signing_aggregate(self, params47):
        # cross-module: the recipients' exponent is exactly the discrete log
        # linking W_S and U_S back to V_S
        rng = random.Random(17)
        x_r = 7
        y_r = mod_exp(2, x_r, 47)
        for _ in range(25):
            commitments = [
                make_nonce_commitment(uid, rng.randrange(1, 23), rng.randrange(1, 23), y_r, params47)
                for uid in (1, 2, 3)
            ]
            u_total, v_total, w_total = aggregate_commitments(commitments, params47)
            assert recover_commitment(w_total, u_total, x_r, params47) == v_total


class TestVerifyBundle:
    def test_fixture_valid(self, params47):
        verdict = verify_bundle(FIXTURE_BUNDLE, 7, 27, params47, FIXTURE_HASH)
        assert verdict.valid
        assert verdict.commitment == 3
        assert verdict.challenge == 8

    def test_tampered_scalar_invalid(self, params47):
        bad = SignatureBundle(14, 34, 18, b"paper-demo")
        verdict = verify_bundle(bad, 7, 27, params47, FIXTURE_HASH)
        assert not verdict.valid  # 2^14 = 28 != 9 mod 47

    def test_verdict_record_fields(self, params47):
        record = verify_bundle(FIXTURE_BUNDLE, 7, 27, params47, FIXTURE_HASH).to_record()
        assert record == {"valid": "true", "R_R": "3", "R_S": "8"}


class TestVerificationSession:
    def make_session(self, params47):
        return VerificationSession(FIXTURE_BUNDLE, (11, 8, 3, 6, 4), 27, params47, FIXTURE_HASH)

    def test_refuses_verdict_below_threshold(self, params47):
        session = self.make_session(params47)
        for uid, value in zip((11, 8, 3, 6), (19, 4, 11, 9)):
            session.receive_shadow(ModifiedShadow(uid, value))
        assert not session.complete
        with pytest.raises(ValueError, match="missing shadows"):
            session.verdict()

    def test_complete_session_verdict(self, params47):
        session = self.make_session(params47)
        for uid, value in zip((11, 8, 3, 6, 4), (19, 4, 11, 9, 10)):
            session.receive_shadow(ModifiedShadow(uid, value))
        assert session.complete
        assert session.shadow_sum() == 7
        assert session.verdict().valid

    def test_foreign_shadow_rejected(self, params47):
        session = self.make_session(params47)
        with pytest.raises(ValueError, match="not in the subset"):
            session.receive_shadow(ModifiedShadow(5, 1))

    def test_conflicting_shadow_rejected(self, params47):
        session = self.make_session(params47)
        session.receive_shadow(ModifiedShadow(11, 19))
        with pytest.raises(ValueError, match="conflicting"):
            session.receive_shadow(ModifiedShadow(11, 18))


class TestSubsetIndependence:
    def test_every_five_subset_reaches_the_same_verdict(self, params47):
        _, recipients = demo.build_members()
        r_ids = [uid for uid, _ in demo.RECIPIENT_KEYS]
        for subset in combinations(r_ids, 5):
            shadows = [
                modified_shadow(
                    Share(uid, eval_poly(demo.RECIPIENT_POLYNOMIAL, uid, 23)), subset, 23
                )
                for uid in subset
            ]
            total = combine_shadows(shadows, 23, expected_count=5)
            assert total == 7
            assert verify_bundle(FIXTURE_BUNDLE, total, 27, params47, FIXTURE_HASH).valid


class TestThresholdNecessity:
    def test_two_of_three_shadows_leave_the_sum_undetermined(self):
        # exhaustive at q=23, k=3: whatever two shadows an observer holds,
        # every candidate shadow sum is still consistent with some polynomial
        q = 23
        subset = (5, 9, 14)
        lam = {u: lagrange_coeff_zero(u, subset, q) for u in subset}
        true_poly = SecretPolynomial((11, 7, 2))
        observed = {
            u: eval_poly(true_poly, u, q) * lam[u] % q for u in subset[:2]
        }
        candidate_sums = set()
        for coeffs in product(range(q), repeat=3):
            poly = SecretPolynomial(coeffs)
            if all(eval_poly(poly, u, q) * lam[u] % q == ms for u, ms in observed.items()):
                total = sum(eval_poly(poly, u, q) * lam[u] for u in subset) % q
                candidate_sums.add(total)
        assert candidate_sums == set(range(q))


class TestCompletenessSmall:
    def test_honest_random_verifications(self, params47):
        rng = random.Random(18)
        h = ChallengeHash.production()
        for _ in range(20):
            k = rng.randint(1, 4)
            l = rng.randint(k, 6)
            members = {
                uid: Member.create("R", uid, rng.randrange(1, 23), params47)
                for uid in rng.sample(range(1, 23), l)
            }
            setup = setup_organization(
                "R", rng.randrange(1, 23), k,
                [m.public_part() for m in members.values()],
                rng.randrange(1, 23), params47, rng,
            )
            subset = rng.sample(sorted(members), k)
            shadows = []
            from dualthreshold.shares import recover_share

            for uid in subset:
                value = recover_share(
                    setup.public.masked_share_for(uid), members[uid].secret_key, params47
                )
                shadows.append(modified_shadow(Share(uid, value), subset, 23))
            assert combine_shadows(shadows, 23) == setup.polynomial.secret
