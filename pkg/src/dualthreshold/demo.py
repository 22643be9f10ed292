"""The bundled reference walkthrough with every intermediate value pinned.

A fixed deployment (p=47, q=23, g=2, two small organizations, scripted
challenge hash) is run end to end; every derived quantity is printed and
compared against the pinned expectation.  The run is fully deterministic, so
its output is byte-identical across invocations.

Every pinned value is forced by the protocol equations: each secret key is
the discrete log of the member's public key, each masked share is exactly
f(u) * y^K mod p, and the recovery, shadow, and aggregation steps follow
from those.  Changing any one entry breaks the chain downstream (the suite's
corrupted-expectation test relies on this).
"""

from __future__ import annotations

import sys
from typing import Optional, TextIO

from .ctc import Ledger, OrgSetup, adjudicate, setup_organization
from .groupmath import GroupParams, validate_params
from .hashing import ChallengeHash
from .protocol import SessionConfig, run_signing_session, run_verification_session
from .shamir import SecretPolynomial, Share
from .shares import Member, modified_shadow, recover_share
from .signing import SignerSession

PARAMS = GroupParams(p=47, q=23, g=2, profile="test")
MESSAGE = b"paper-demo"
MASKING_NONCE = 8

SENDER_POLYNOMIAL = SecretPolynomial((11, 3, 13, 1))
RECIPIENT_POLYNOMIAL = SecretPolynomial((7, 2, 4, 3))

# (public_id, secret_key) per member, in roster order
SENDER_KEYS = ((2, 12), (9, 10), (8, 14), (11, 16), (3, 3), (5, 19), (4, 17))
RECIPIENT_KEYS = ((11, 15), (5, 9), (8, 11), (3, 18), (6, 6), (4, 13))

SIGNER_IDS = (9, 11, 5, 4)
SIGNER_NONCES = {9: (5, 7), 11: (4, 3), 5: (12, 18), 4: (21, 11)}
VERIFIER_IDS = (11, 8, 3, 6, 4)
DC_ID = 11

SCRIPTED_HASH = ChallengeHash.scripted({(3, MESSAGE): 8})

EXPECTED = {
    "params_valid": True,
    "y_S": 27,
    "y_R": 34,
    "W": 9,
    "sender_public_keys": (7, 37, 28, 18, 8, 3, 36),
    "recipient_public_keys": (9, 42, 27, 25, 17, 14),
    "sender_masked": (34, 34, 38, 9, 6, 25, 40),
    "recipient_masked": (14, 25, 16, 20, 24, 32),
    "commitment_9": (18, 32, 21),
    "commitment_11": (6, 16, 4),
    "commitment_5": (32, 7, 1),
    "commitment_4": (7, 12, 17),
    "U_S": 34,
    "V_S": 3,
    "W_S": 18,
    "challenge": 8,
    "signer_shares": (3, 4, 16, 19),
    "signer_shadows": (5, 21, 12, 19),
    "partials": (22, 11, 16, 12),
    "S_S": 15,
    "bundle": (15, 34, 18),
    "verifier_shares": (21, 21, 15, 6, 18),
    "verifier_shadows": (19, 4, 11, 9, 10),
    "shadow_sum": 7,
    "R_R": 3,
    "recovered_challenge": 8,
    "congruence_lhs": 9,
    "congruence_rhs": 9,
    "verdict_valid": True,
    "session_bundle_matches": True,
    "session_verdict_valid": True,
    "ledger_recheck_valid": True,
}


def build_members() -> tuple[dict[int, Member], dict[int, Member]]:
    senders = {uid: Member.create("S", uid, key, PARAMS) for uid, key in SENDER_KEYS}
    recipients = {uid: Member.create("R", uid, key, PARAMS) for uid, key in RECIPIENT_KEYS}
    return senders, recipients


def build_setups(senders: dict[int, Member], recipients: dict[int, Member]) -> tuple[OrgSetup, OrgSetup]:
    s_setup = setup_organization(
        "S", None, threshold=len(SIGNER_IDS),
        roster=[senders[uid].public_part() for uid, _ in SENDER_KEYS],
        masking_nonce=MASKING_NONCE, params=PARAMS, polynomial=SENDER_POLYNOMIAL,
    )
    r_setup = setup_organization(
        "R", None, threshold=len(VERIFIER_IDS),
        roster=[recipients[uid].public_part() for uid, _ in RECIPIENT_KEYS],
        masking_nonce=MASKING_NONCE, params=PARAMS, polynomial=RECIPIENT_POLYNOMIAL,
    )
    return s_setup, r_setup


def session_config(
    challenge_hash: Optional[ChallengeHash] = None,
    message: bytes = MESSAGE,
    fixed_nonces: Optional[dict] = None,
    seed: Optional[int] = None,
) -> SessionConfig:
    """The walkthrough deployment as a ready-to-run session configuration."""
    senders, recipients = build_members()
    s_setup, r_setup = build_setups(senders, recipients)
    return SessionConfig(
        params=PARAMS,
        challenge_hash=challenge_hash or SCRIPTED_HASH,
        signer_org=s_setup.public,
        recipient_org=r_setup.public,
        signer_members=senders,
        recipient_members=recipients,
        signer_ids=SIGNER_IDS,
        verifier_ids=VERIFIER_IDS,
        dc_id=DC_ID,
        message=message,
        seed=seed,
        fixed_nonces=fixed_nonces if fixed_nonces is not None else dict(SIGNER_NONCES),
    )


def write_deployment(out_dir) -> dict:
    """Persist the walkthrough deployment as the standard setup file layout.

    A signing session over these files with the pinned nonces and scripted
    hash reproduces the walkthrough bundle exactly.
    """
    from pathlib import Path

    from .ctc import save_org_state
    from .records import dec, write_json

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    senders, recipients = build_members()
    s_setup, r_setup = build_setups(senders, recipients)
    save_org_state(s_setup, out / "ctc_state_S.json")
    save_org_state(r_setup, out / "ctc_state_R.json")
    write_json(out / "members_S.json",
               {"org": "S", "members": [m.to_record() for m in senders.values()]})
    write_json(out / "members_R.json",
               {"org": "R", "members": [m.to_record() for m in recipients.values()]})
    write_json(out / "public.json", {
        "params": PARAMS.to_record(),
        "orgs": {"S": s_setup.public.to_record(), "R": r_setup.public.to_record()},
    })
    session = {
        "public": "public.json",
        "members_s": "members_S.json",
        "members_r": "members_R.json",
        "hash": SCRIPTED_HASH.to_record(),
        "signers": [dec(i) for i in SIGNER_IDS],
        "verifiers": [dec(i) for i in VERIFIER_IDS],
        "dc": dec(DC_ID),
        "fixed_nonces": {dec(k): [dec(a), dec(b)] for k, (a, b) in sorted(SIGNER_NONCES.items())},
        "seed": None,
    }
    write_json(out / "session.json", session)
    return session


def run_demo(out: TextIO = sys.stdout, expected: Optional[dict] = None) -> list[str]:
    """Execute the walkthrough, printing every value; returns mismatch descriptions."""
    expected = EXPECTED if expected is None else expected
    mismatches: list[str] = []

    def check(name: str, value):
        want = expected.get(name)
        if value == want:
            out.write(f"{name} = {value}\n")
        else:
            out.write(f"{name} = {value}  ** MISMATCH: expected {want} **\n")
            mismatches.append(f"{name}: computed {value}, expected {want}")

    check("params_valid", validate_params(PARAMS).ok)
    senders, recipients = build_members()
    check("sender_public_keys", tuple(senders[uid].public_key for uid, _ in SENDER_KEYS))
    check("recipient_public_keys", tuple(recipients[uid].public_key for uid, _ in RECIPIENT_KEYS))

    s_setup, r_setup = build_setups(senders, recipients)
    check("y_S", s_setup.public.org_public_key)
    check("y_R", r_setup.public.org_public_key)
    check("W", s_setup.public.unmask_base)
    check("sender_masked", tuple(ms.v for ms in s_setup.public.masked_shares))
    check("recipient_masked", tuple(ms.v for ms in r_setup.public.masked_shares))

    sessions = {
        uid: SignerSession(
            member=senders[uid],
            masked_share=s_setup.public.masked_share_for(uid),
            subset_ids=SIGNER_IDS,
            recipient_org_key=r_setup.public.org_public_key,
            params=PARAMS,
            h=SCRIPTED_HASH,
            nonces=SIGNER_NONCES[uid],
        )
        for uid in SIGNER_IDS
    }
    for uid in SIGNER_IDS:
        check(f"commitment_{uid}", (sessions[uid].commitment.u,
                                    sessions[uid].commitment.v,
                                    sessions[uid].commitment.w))
    for uid in SIGNER_IDS:
        for other in SIGNER_IDS:
            if other != uid:
                sessions[uid].receive_commitment(sessions[other].commitment)
    u_total, v_total, w_total = sessions[SIGNER_IDS[0]].aggregates()
    check("U_S", u_total)
    check("V_S", v_total)
    check("W_S", w_total)
    check("challenge", sessions[SIGNER_IDS[0]].challenge(MESSAGE))

    check("signer_shares", tuple(
        recover_share(s_setup.public.masked_share_for(uid), senders[uid].secret_key, PARAMS)
        for uid in SIGNER_IDS
    ))
    check("signer_shadows", tuple(sessions[uid].shadow().value for uid in SIGNER_IDS))
    partials = tuple(sessions[uid].partial(MESSAGE).s for uid in SIGNER_IDS)
    check("partials", partials)
    check("S_S", sum(partials) % PARAMS.q)

    ledger = Ledger()
    config = session_config()
    signing = run_signing_session(config, ledger)
    check("bundle", (signing.bundle.s, signing.bundle.u, signing.bundle.w))
    check("session_bundle_matches",
          (signing.bundle.s, signing.bundle.u, signing.bundle.w) == (sum(partials) % PARAMS.q, u_total, w_total))

    verifier_shares = tuple(
        recover_share(r_setup.public.masked_share_for(uid), recipients[uid].secret_key, PARAMS)
        for uid in VERIFIER_IDS
    )
    check("verifier_shares", verifier_shares)
    shadows = tuple(
        modified_shadow(Share(uid, value), VERIFIER_IDS, PARAMS.q).value
        for uid, value in zip(VERIFIER_IDS, verifier_shares)
    )
    check("verifier_shadows", shadows)
    shadow_sum = sum(shadows) % PARAMS.q
    check("shadow_sum", shadow_sum)

    verification = run_verification_session(config, signing.bundle)
    check("R_R", verification.verdict.commitment)
    check("recovered_challenge", verification.verdict.challenge)
    lhs = pow(PARAMS.g, signing.bundle.s, PARAMS.p)
    rhs = (verification.verdict.commitment
           * pow(s_setup.public.org_public_key, verification.verdict.challenge, PARAMS.p)) % PARAMS.p
    check("congruence_lhs", lhs)
    check("congruence_rhs", rhs)
    check("verdict_valid", verification.verdict.valid)
    check("session_verdict_valid", verification.verdict.valid)

    recheck = adjudicate(ledger, signing.record, shadow_sum,
                         s_setup.public.org_public_key, PARAMS, SCRIPTED_HASH)
    check("ledger_recheck_valid", recheck.valid)

    out.write("all values match\n" if not mismatches
              else f"{len(mismatches)} value(s) diverged; first: {mismatches[0]}\n")
    return mismatches
