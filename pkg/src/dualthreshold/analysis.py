"""Executable security experiments: collusion, impersonation, forgery, tampering.

Each experiment plays an adversary against the honest machinery and counts
verification acceptances over many trials.  At desk-scale parameters the
schemes' guessing games have visible success rates (about 1/q), so the
reports carry an exact binomial interval to judge the observed count
against; at full-size parameters the same experiments produce zero
acceptances.  Control arms run the adversary with the missing secret
supplied and must always succeed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import exp, lgamma, log
from typing import Optional, Sequence

from .ctc import SignatureBundle, setup_organization
from .groupmath import GroupParams, mod_exp
from .hashing import PRODUCTION, ChallengeHash, hash_to_scalar
from .protocol import SessionConfig
from .records import dec
from .shamir import SecretPolynomial, Share, reconstruct_polynomial
from .shares import Member, ShareRecoveryError, modified_shadow, recover_share
from .signing import aggregate_commitments, make_nonce_commitment, partial_sign
from .verification import combine_shadows, verify_bundle

STRATEGY_PICK_COMMITMENT_FIRST = "pick-R_R-first"
STRATEGY_PICK_BOTH_FIRST = "pick-both-first"


@dataclass(frozen=True)
class ExperimentReport:
    experiment: str
    trials: int
    successes: int
    expected_rate: float
    interval: tuple[int, int]
    notes: tuple[str, ...] = ()

    @property
    def within_interval(self) -> bool:
        lo, hi = self.interval
        return lo <= self.successes <= hi

    def to_record(self) -> dict:
        return {
            "experiment": self.experiment,
            "trials": dec(self.trials),
            "successes": dec(self.successes),
            "expected_rate": f"{self.expected_rate:.8g}",
            "interval": [dec(self.interval[0]), dec(self.interval[1])],
        }


def binomial_interval(trials: int, rate: float, confidence: float = 0.999) -> tuple[int, int]:
    """Central interval [lo, hi] with at most (1-confidence)/2 mass outside each end."""
    if not 0 <= rate <= 1:
        raise ValueError("rate must be a probability")
    if rate == 0:
        return 0, 0
    if rate == 1:
        return trials, trials
    alpha = 1 - confidence
    log_rate, log_comp = log(rate), log(1 - rate)
    cdf = 0.0
    lo: Optional[int] = None
    hi = trials
    for k in range(trials + 1):
        log_pmf = (
            lgamma(trials + 1)
            - lgamma(k + 1)
            - lgamma(trials - k + 1)
            + k * log_rate
            + (trials - k) * log_comp
        )
        cdf += exp(log_pmf)
        if lo is None and cdf > alpha / 2:
            lo = k
        if cdf >= 1 - alpha / 2:
            hi = k
            break
    return (lo if lo is not None else 0), hi


def collusion_reconstruct(shares: Sequence[Share], q: int) -> SecretPolynomial:
    """What a full threshold of colluding shareholders can always do."""
    return reconstruct_polynomial(shares, q)


def random_session_config(
    params: GroupParams,
    rng: random.Random,
    n_signers: int,
    sign_threshold: int,
    n_verifiers: int,
    verify_threshold: int,
    message: bytes = b"experiment message",
    challenge_hash: Optional[ChallengeHash] = None,
    seed: Optional[int] = None,
) -> SessionConfig:
    """Build a complete random honest deployment for one session."""
    q = params.q

    def draw_ids(count: int) -> list[int]:
        if count > q - 1:
            raise ValueError(f"cannot draw {count} distinct identities mod {q}")
        ids: set[int] = set()
        while len(ids) < count:
            ids.add(rng.randrange(1, q))
        return sorted(ids)

    def build_org(org: str, count: int) -> dict[int, Member]:
        return {
            uid: Member.create(org, uid, rng.randrange(1, q), params)
            for uid in draw_ids(count)
        }

    s_members = build_org("S", n_signers)
    r_members = build_org("R", n_verifiers)
    masking_nonce = rng.randrange(1, q)
    s_setup = setup_organization(
        "S", rng.randrange(1, q), sign_threshold,
        [m.public_part() for m in s_members.values()], masking_nonce, params, rng,
    )
    r_setup = setup_organization(
        "R", rng.randrange(1, q), verify_threshold,
        [m.public_part() for m in r_members.values()], masking_nonce, params, rng,
    )
    signer_ids = tuple(rng.sample(sorted(s_members), sign_threshold))
    verifier_ids = tuple(rng.sample(sorted(r_members), verify_threshold))
    return SessionConfig(
        params=params,
        challenge_hash=challenge_hash or ChallengeHash.production(),
        signer_org=s_setup.public,
        recipient_org=r_setup.public,
        signer_members=s_members,
        recipient_members=r_members,
        signer_ids=signer_ids,
        verifier_ids=verifier_ids,
        dc_id=verifier_ids[0],
        message=message,
        seed=seed,
    )


def honest_shadow_sum(config: SessionConfig) -> int:
    """The verifier subset's combined shadows, computed honestly."""
    shadows = []
    for uid in config.verifier_ids:
        masked = config.recipient_org.masked_share_for(uid)
        value = recover_share(masked, config.recipient_members[uid].secret_key, config.params)
        shadows.append(modified_shadow(Share(uid, value), config.verifier_ids, config.params.q))
    return combine_shadows(shadows, config.params.q, expected_count=len(config.verifier_ids))


def _sign_once(config: SessionConfig, rng: random.Random, forge_id: Optional[int] = None,
               forged_partial: Optional[int] = None) -> SignatureBundle:
    """One signing round without the message-passing scaffolding.

    With forge_id set, that signer's partial is replaced by forged_partial
    (its commitments stay well formed: an impersonator can compute those
    without any secret).
    """
    params = config.params
    q = params.q
    commitments = []
    nonces = {}
    for uid in config.signer_ids:
        nonces[uid] = (rng.randrange(1, q), rng.randrange(1, q))
        commitments.append(
            make_nonce_commitment(uid, *nonces[uid], config.recipient_org.org_public_key, params)
        )
    u_total, v_total, w_total = aggregate_commitments(commitments, params)
    challenge = hash_to_scalar(config.challenge_hash, v_total, config.message, params)
    total = 0
    for uid in config.signer_ids:
        if uid == forge_id:
            total = (total + forged_partial) % q
            continue
        masked = config.signer_org.masked_share_for(uid)
        value = recover_share(masked, config.signer_members[uid].secret_key, params)
        shadow = modified_shadow(Share(uid, value), config.signer_ids, q)
        total = (total + partial_sign(nonces[uid][0], shadow, challenge, q).s) % q
    return SignatureBundle(total, u_total, w_total, config.message)


def impersonation_experiment(
    config: SessionConfig,
    trials: int,
    rng: random.Random,
    give_true_share: bool = False,
) -> ExperimentReport:
    """An outsider takes one signer's seat with well-formed commitments but no share.

    Lacking the share it can only guess its partial signature, so each trial
    succeeds with probability 1/q.  The control arm (give_true_share) hands
    the adversary the real share and must always verify.
    """
    params = config.params
    q = params.q
    shadow_sum = honest_shadow_sum(config)
    successes = 0
    notes = []
    for trial in range(trials):
        target = rng.choice(config.signer_ids)
        if give_true_share:
            bundle = _sign_once(config, rng)  # honest behavior is the control arm
        else:
            bundle = _sign_once(config, rng, forge_id=target, forged_partial=rng.randrange(q))
        verdict = verify_bundle(
            bundle, shadow_sum, config.signer_org.org_public_key, params, config.challenge_hash
        )
        if verdict.valid:
            successes += 1
            if not give_true_share and len(notes) < 10:
                notes.append(f"trial {trial}: guessed partial accepted for signer {target}")
    rate = 1.0 if give_true_share else 1 / q
    return ExperimentReport(
        experiment="impersonation-control" if give_true_share else "impersonation",
        trials=trials,
        successes=successes,
        expected_rate=rate,
        interval=binomial_interval(trials, rate),
        notes=tuple(notes),
    )


def forgery_experiment(
    config: SessionConfig,
    trials: int,
    rng: random.Random,
    strategy: str = STRATEGY_PICK_COMMITMENT_FIRST,
    signer_org_secret: Optional[int] = None,
) -> ExperimentReport:
    """Forge bundles without any shares, using one of two orderings.

    "pick-R_R-first" fixes the recovered commitment (via U_S = 1, so the
    verifiers' exponent cannot disturb it), derives the challenge, then has
    to guess the signature scalar.  "pick-both-first" fixes commitment and
    scalar and hopes a fresh message hashes to the one challenge that fits.
    Either way each trial succeeds with probability 1/q.  Supplying the
    signing organization's secret key (the discrete log of its public key)
    turns either strategy into a certain forgery: the control arm.
    """
    if strategy not in (STRATEGY_PICK_COMMITMENT_FIRST, STRATEGY_PICK_BOTH_FIRST):
        raise ValueError(f"unknown strategy {strategy!r}")
    if config.challenge_hash.mode != PRODUCTION:
        raise ValueError("forgery experiments need the production hash")
    params = config.params
    p, q, g = params.p, params.q, params.g
    org_key = config.signer_org.org_public_key
    shadow_sum = honest_shadow_sum(config)
    successes = 0
    for _ in range(trials):
        exponent = rng.randrange(1, q)
        commitment = mod_exp(g, exponent, p)
        if signer_org_secret is not None:
            challenge = hash_to_scalar(config.challenge_hash, commitment, config.message, params)
            scalar = (exponent + signer_org_secret * challenge) % q
            bundle = SignatureBundle(scalar, 1, commitment, config.message)
        elif strategy == STRATEGY_PICK_COMMITMENT_FIRST:
            bundle = SignatureBundle(rng.randrange(q), 1, commitment, config.message)
        else:
            message = bytes(rng.randrange(256) for _ in range(16))
            bundle = SignatureBundle(rng.randrange(q), 1, commitment, message)
        verdict = verify_bundle(bundle, shadow_sum, org_key, params, config.challenge_hash)
        if verdict.valid:
            successes += 1
    control = signer_org_secret is not None
    rate = 1.0 if control else 1 / q
    return ExperimentReport(
        experiment=f"forgery-{strategy}" + ("-control" if control else ""),
        trials=trials,
        successes=successes,
        expected_rate=rate,
        interval=binomial_interval(trials, rate),
    )


def tamper_experiment(config: SessionConfig, trials: int, rng: random.Random) -> ExperimentReport:
    """Mutate one component of a valid bundle per trial and re-verify.

    Every trial signs a fresh honest bundle (reusing one bundle would
    correlate the trials: the accidental acceptances for a fixed bundle are
    a fixed set of commitment values) and then mutates one component drawn
    uniformly from the signature scalar, the two group elements (replaced by
    fresh subgroup elements), and a single message byte.  A scalar mutation
    can never verify; the others are 1/q guessing games, so the expected
    rate is (3/4)/q.
    """
    if config.challenge_hash.mode != PRODUCTION:
        raise ValueError("tamper experiments need the production hash")
    if not config.message:
        raise ValueError("tamper experiments need a non-empty message")
    params = config.params
    p, q, g = params.p, params.q, params.g
    org_key = config.signer_org.org_public_key
    shadow_sum = honest_shadow_sum(config)

    def fresh_element(current: int) -> int:
        while True:
            candidate = mod_exp(g, rng.randrange(q), p)
            if candidate != current:
                return candidate

    successes = 0
    for trial in range(trials):
        honest = _sign_once(config, rng)
        if trial == 0:
            assert verify_bundle(honest, shadow_sum, org_key, params, config.challenge_hash).valid
        component = rng.choice(("scalar", "u", "w", "message"))
        if component == "scalar":
            mutated = SignatureBundle(
                (honest.s + rng.randrange(1, q)) % q, honest.u, honest.w, honest.message
            )
        elif component == "u":
            mutated = SignatureBundle(honest.s, fresh_element(honest.u), honest.w, honest.message)
        elif component == "w":
            mutated = SignatureBundle(honest.s, honest.u, fresh_element(honest.w), honest.message)
        else:
            body = bytearray(honest.message)
            body[rng.randrange(len(body))] ^= rng.randrange(1, 256)
            mutated = SignatureBundle(honest.s, honest.u, honest.w, bytes(body))
        verdict = verify_bundle(mutated, shadow_sum, org_key, params, config.challenge_hash)
        if verdict.valid:
            successes += 1
    rate = 0.75 / q
    return ExperimentReport(
        experiment="tamper",
        trials=trials,
        successes=successes,
        expected_rate=rate,
        interval=binomial_interval(trials, rate),
    )


def wrong_key_recovery_experiment(
    config: SessionConfig, trials: int, rng: random.Random
) -> ExperimentReport:
    """Try to unmask another member's share with a random wrong key.

    Most attempts either land outside the share range (detected) or yield a
    wrong share; hitting the true share is a 1/q-scale accident.  Successes
    count exact hits of the true share.
    """
    params = config.params
    q = params.q
    members = list(config.signer_members.values())
    hits = 0
    detected = 0
    wrong = 0
    for _ in range(trials):
        member = rng.choice(members)
        masked = config.signer_org.masked_share_for(member.public_id)
        true_value = recover_share(masked, member.secret_key, params)
        bad_key = rng.randrange(1, q)
        while bad_key == member.secret_key % q:
            bad_key = rng.randrange(1, q)
        try:
            value = recover_share(masked, bad_key, params)
        except ShareRecoveryError:
            detected += 1
            continue
        if value == true_value:
            hits += 1
        else:
            wrong += 1
    rate = 1 / q
    return ExperimentReport(
        experiment="wrong-key-recovery",
        trials=trials,
        successes=hits,
        expected_rate=rate,
        interval=(0, binomial_interval(trials, rate)[1]),
        notes=(f"detected={detected}", f"wrong_share={wrong}", f"true_share={hits}"),
    )
