"""End-to-end acceptance suite.

Every criterion runs at its stated tolerance and prints one PASS/FAIL line;
run with `pytest tests/test_acceptance.py -v -s` to see them.  Statistical
criteria use pinned seeds so the whole suite is deterministic.
"""

import random
import re
import statistics
import time
from contextlib import contextmanager
from itertools import combinations, product

import pytest

from dualthreshold import demo
from dualthreshold.analysis import (
    STRATEGY_PICK_BOTH_FIRST,
    STRATEGY_PICK_COMMITMENT_FIRST,
    binomial_interval,
    forgery_experiment,
    impersonation_experiment,
    random_session_config,
    tamper_experiment,
)
from dualthreshold.ctc import SignatureBundle
from dualthreshold.groupmath import generate_params, mod_exp, validate_params
from dualthreshold.hashing import ChallengeHash, hash_to_scalar
from dualthreshold.protocol import run_signing_session, run_verification_session
from dualthreshold.shamir import SecretPolynomial, Share, eval_poly
from dualthreshold.shares import modified_shadow
from dualthreshold.signing import SignerSession, schnorr_sign, schnorr_verify
from dualthreshold.verification import combine_shadows, verify_bundle

from conftest import config_with_secrets, small_random_config

PARAMS = demo.PARAMS
Q = PARAMS.q


@contextmanager
def criterion(number, title, budget_seconds):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {number} ({title}): FAIL")
        raise
    elapsed = time.monotonic() - start
    assert elapsed < budget_seconds, (
        f"criterion {number} took {elapsed:.2f}s, budget {budget_seconds}s"
    )
    print(f"\nACCEPTANCE {number} ({title}): PASS in {elapsed:.2f}s")


def test_criterion_01_setup_golden_fixture():
    with criterion(1, "setup golden fixture", 1.0):
        senders, recipients = demo.build_members()
        s_setup, r_setup = demo.build_setups(senders, recipients)
        assert s_setup.public.org_public_key == 27
        assert r_setup.public.org_public_key == 34
        assert s_setup.public.unmask_base == 9
        assert r_setup.public.unmask_base == 9
        # the sixth masked value is the one the masking formula produces for
        # member (id 5, key 3); the later recovery of share 16 and the final
        # scalar 15 both depend on it
        assert tuple(ms.v for ms in s_setup.public.masked_shares) == (34, 34, 38, 9, 6, 25, 40)
        assert tuple(ms.v for ms in r_setup.public.masked_shares) == (14, 25, 16, 20, 24, 32)


def test_criterion_02_signing_golden_fixture():
    with criterion(2, "signing golden fixture", 1.0):
        config = demo.session_config()
        sessions = {
            uid: SignerSession(
                member=config.signer_members[uid],
                masked_share=config.signer_org.masked_share_for(uid),
                subset_ids=demo.SIGNER_IDS,
                recipient_org_key=config.recipient_org.org_public_key,
                params=PARAMS,
                h=demo.SCRIPTED_HASH,
                nonces=demo.SIGNER_NONCES[uid],
            )
            for uid in demo.SIGNER_IDS
        }
        expected_commitments = {
            9: (18, 32, 21), 11: (6, 16, 4), 5: (32, 7, 1), 4: (7, 12, 17),
        }
        for uid, session in sessions.items():
            c = session.commitment
            assert (c.u, c.v, c.w) == expected_commitments[uid]
            for other in demo.SIGNER_IDS:
                if other != uid:
                    sessions[other].receive_commitment(c)
        for session in sessions.values():
            assert session.aggregates() == (34, 3, 18)
            assert session.challenge(demo.MESSAGE) == 8
        assert [sessions[uid].shadow().value for uid in demo.SIGNER_IDS] == [5, 21, 12, 19]
        partials = [sessions[uid].partial(demo.MESSAGE).s for uid in demo.SIGNER_IDS]
        assert partials == [22, 11, 16, 12]
        assert sum(partials) % Q == 15
        outcome = run_signing_session(config)
        assert (outcome.bundle.s, outcome.bundle.u, outcome.bundle.w) == (15, 34, 18)


def test_criterion_03_verification_golden_fixture():
    with criterion(3, "verification golden fixture", 1.0):
        config = demo.session_config()
        bundle = SignatureBundle(15, 34, 18, demo.MESSAGE)
        shadows = [
            modified_shadow(
                Share(uid, eval_poly(demo.RECIPIENT_POLYNOMIAL, uid, Q)), demo.VERIFIER_IDS, Q
            )
            for uid in demo.VERIFIER_IDS
        ]
        assert [s.value for s in shadows] == [19, 4, 11, 9, 10]
        total = combine_shadows(shadows, Q, expected_count=5)
        assert total == 7
        verdict = verify_bundle(bundle, total, 27, PARAMS, demo.SCRIPTED_HASH)
        assert verdict.commitment == 3
        assert verdict.challenge == 8
        lhs = mod_exp(2, 15, 47)
        rhs = 3 * mod_exp(27, 8, 47) % 47
        assert lhs == rhs == 9
        assert verdict.valid
        outcome = run_verification_session(config, bundle)
        assert outcome.verdict.valid


def test_criterion_04_completeness_200_random_sessions():
    with criterion(4, "completeness over 200 randomized sessions", 10.0):
        rng = random.Random(4040)
        valid = 0
        for _ in range(200):
            config = small_random_config(PARAMS, rng)
            signing = run_signing_session(config)
            outcome = run_verification_session(config, signing.bundle)
            valid += outcome.verdict.valid
        assert valid == 200


def test_criterion_05_subset_independence():
    with criterion(5, "subset independence across all verifier subsets", 1.0):
        bundle = SignatureBundle(15, 34, 18, demo.MESSAGE)
        roster_ids = [uid for uid, _ in demo.RECIPIENT_KEYS]
        subsets = list(combinations(roster_ids, 5))
        assert len(subsets) == 6
        for subset in subsets:
            shadows = [
                modified_shadow(
                    Share(uid, eval_poly(demo.RECIPIENT_POLYNOMIAL, uid, Q)), subset, Q
                )
                for uid in subset
            ]
            total = combine_shadows(shadows, Q, expected_count=5)
            assert total == 7
            assert verify_bundle(bundle, total, 27, PARAMS, demo.SCRIPTED_HASH).valid


def test_criterion_06_tamper_soundness():
    with criterion(6, "tamper soundness at small and full subgroup sizes", 30.0):
        desk = demo.session_config(challenge_hash=ChallengeHash.production())
        report = tamper_experiment(desk, 500, random.Random(6060))
        lo, hi = binomial_interval(500, 1 / 23)
        assert (lo, hi) == (8, 38)
        assert lo <= report.successes <= hi, f"observed {report.successes} outside [{lo},{hi}]"

        big = generate_params("test", random.Random(6161), p_bits=192, q_bits=160)
        big_config = random_session_config(big, random.Random(6262), 4, 3, 4, 2,
                                           message=b"tamper at full subgroup size")
        big_report = tamper_experiment(big_config, 500, random.Random(6363))
        assert big_report.successes == 0


def test_criterion_07_secrecy_properties(medium_params):
    with criterion(7, "collusion secrecy and transcript privacy", 5.0):
        # (a) two of three shares constrain nothing: every secret stays possible
        held = [Share(u, eval_poly(SecretPolynomial((11, 7, 2)), u, Q)) for u in (5, 9)]
        consistent = set()
        for coeffs in product(range(Q), repeat=3):
            poly = SecretPolynomial(coeffs)
            if all(eval_poly(poly, s.id, Q) == s.value for s in held):
                consistent.add(coeffs[0])
        assert consistent == set(range(Q))

        # (b) no secret value appears in any public transcript rendering
        rng = random.Random(7070)
        config, s_setup, r_setup, nonces = config_with_secrets(
            medium_params, rng, b"secrecy acceptance message"
        )
        signing = run_signing_session(config)
        verification = run_verification_session(config, signing.bundle)
        public = signing.transcript.public_text() + "\n" + verification.transcript.public_text()
        p, q, g = medium_params.p, medium_params.q, medium_params.g
        v_product = mod_exp(g, sum(k1 for k1, _ in nonces.values()) % q, p)
        secrets = [v_product, hash_to_scalar(config.challenge_hash, v_product,
                                             config.message, medium_params)]
        for setup in (s_setup, r_setup):
            secrets.extend(setup.polynomial.coefficients)
            secrets.extend(
                eval_poly(setup.polynomial, entry.public_id, q)
                for entry in setup.public.roster
            )
        secrets.extend(m.secret_key for m in config.signer_members.values())
        secrets.extend(m.secret_key for m in config.recipient_members.values())
        secrets.extend(k for pair in nonces.values() for k in pair)
        for value in secrets:
            if value < 2**24:
                continue  # a tiny value is index noise, not a leak signal
            assert not re.search(rf"\b{value}\b", public), f"secret {value} leaked"


def test_criterion_08_attack_experiments():
    with criterion(8, "impersonation and forgery experiments", 60.0):
        config = demo.session_config(challenge_hash=ChallengeHash.production())
        lo, hi = binomial_interval(1000, 1 / 23)
        assert (lo, hi) == (24, 66)

        impersonation = impersonation_experiment(config, 1000, random.Random(8080))
        assert lo <= impersonation.successes <= hi, f"impersonation: {impersonation.successes}"
        control = impersonation_experiment(config, 200, random.Random(8181), give_true_share=True)
        assert control.successes == 200

        for seed, strategy in ((8282, STRATEGY_PICK_COMMITMENT_FIRST),
                               (8383, STRATEGY_PICK_BOTH_FIRST)):
            report = forgery_experiment(config, 1000, random.Random(seed), strategy)
            assert lo <= report.successes <= hi, f"{strategy}: {report.successes}"
        backdoor = forgery_experiment(
            config, 200, random.Random(8484), STRATEGY_PICK_COMMITMENT_FIRST,
            signer_org_secret=demo.SENDER_POLYNOMIAL.secret,
        )
        assert backdoor.successes == 200


def test_criterion_09_full_profile_parameter_generation():
    with criterion(9, "full-profile parameter generation", 600.0):
        durations = []
        for seed in range(5):
            start = time.monotonic()
            params = generate_params("paper-full", random.Random(9000 + seed))
            durations.append(time.monotonic() - start)
            assert (1 << 511) < params.p < (1 << 512)
            assert (1 << 159) < params.q < (1 << 160)
            assert (params.p - 1) % params.q == 0
            assert params.g > 1 and pow(params.g, params.q, params.p) == 1
            assert validate_params(params).ok
        assert statistics.median(durations) < 120.0


def test_criterion_10_schnorr_reference_roundtrip(medium_params):
    with criterion(10, "single-signer reference scheme roundtrip and tamper", 5.0):
        h = ChallengeHash.production()
        rng = random.Random(1010)
        p, q, g = medium_params.p, medium_params.q, medium_params.g
        tamper_failures = {"r": 0, "s": 0, "message": 0}
        for i in range(100):
            x = rng.randrange(1, q)
            nonce = rng.randrange(1, q)
            y = mod_exp(g, x, p)
            message = b"acceptance-%d" % i
            r, s = schnorr_sign(x, message, nonce, medium_params, h)
            assert schnorr_verify(y, message, r, s, medium_params, h)
            bad_r = (r + rng.randrange(1, q)) % q
            bad_s = (s + rng.randrange(1, q)) % q
            body = bytearray(message)
            body[rng.randrange(len(body))] ^= rng.randrange(1, 256)
            tamper_failures["r"] += not schnorr_verify(y, message, bad_r, s, medium_params, h)
            tamper_failures["s"] += not schnorr_verify(y, message, r, bad_s, medium_params, h)
            tamper_failures["message"] += not schnorr_verify(y, bytes(body), r, s, medium_params, h)
        assert tamper_failures == {"r": 100, "s": 100, "message": 100}
