"""Per-signer session logic, plus the single-signer reference scheme.

Each signer draws two session nonces and commits to them as the triple
(u, v, w) = (g^-k2, g^k1, g^k1 * y_R^k2).  u and w travel publicly, v only
inside the signing subset; the componentwise products therefore satisfy
W_S * U_S^x_R = V_S, which is what lets the recipients (and only a threshold
of them) re-derive the challenge commitment during verification.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .groupmath import GroupParams, mod_exp
from .hashing import ChallengeHash, hash_to_scalar
from .shamir import Share
from .shares import Member, MaskedShare, ModifiedShadow, modified_shadow, recover_share


@dataclass(frozen=True)
class NonceCommitment:
    signer_id: int
    u: int
    v: int  # secret within the signing subset
    w: int

    def public_payload(self) -> dict:
        from .records import dec

        return {"signer_id": dec(self.signer_id), "u": dec(self.u), "w": dec(self.w)}

    def private_payload(self) -> dict:
        from .records import dec

        return {"signer_id": dec(self.signer_id), "v": dec(self.v)}


@dataclass(frozen=True)
class PartialSignature:
    signer_id: int
    s: int


def make_nonce_commitment(
    signer_id: int, k1: int, k2: int, recipient_org_key: int, params: GroupParams
) -> NonceCommitment:
    p, q, g = params.p, params.q, params.g
    if k1 % q == 0 or k2 % q == 0:
        raise ValueError("session nonces must be nonzero")
    v = mod_exp(g, k1, p)
    return NonceCommitment(
        signer_id=signer_id,
        u=mod_exp(g, -k2, p),
        v=v,
        w=v * mod_exp(recipient_org_key, k2, p) % p,
    )


def aggregate_commitments(
    commitments: Sequence[NonceCommitment],
    params: GroupParams,
    expected_count: Optional[int] = None,
) -> tuple[int, int, int]:
    """Componentwise product over the subset, mod p."""
    if not commitments:
        raise ValueError("no commitments to aggregate")
    if expected_count is not None and len(commitments) != expected_count:
        raise ValueError(f"expected {expected_count} commitments, got {len(commitments)}")
    ids = [c.signer_id for c in commitments]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate signer ids in commitments: {sorted(ids)}")
    p = params.p
    u_total = v_total = w_total = 1
    for c in commitments:
        u_total = u_total * c.u % p
        v_total = v_total * c.v % p
        w_total = w_total * c.w % p
    return u_total, v_total, w_total


def compute_challenge(commitment_product: int, message: bytes, h: ChallengeHash, params: GroupParams) -> int:
    return hash_to_scalar(h, commitment_product, message, params)


def partial_sign(k1: int, shadow: ModifiedShadow, challenge: int, q: int) -> PartialSignature:
    return PartialSignature(shadow.member_id, (k1 + shadow.value * challenge) % q)


def partial_is_consistent(
    partial: PartialSignature,
    commitment_v: int,
    shadow: ModifiedShadow,
    challenge: int,
    params: GroupParams,
) -> bool:
    """Diagnostic check g^s == v * g^(shadow*challenge); needs the signer to reveal v."""
    p, q, g = params.p, params.q, params.g
    return mod_exp(g, partial.s, p) == commitment_v * mod_exp(g, shadow.value * challenge % q, p) % p


class SignerSession:
    """One signer's view of a signing round.

    Collects the subset's commitments, aggregates them, derives the shared
    challenge, and produces this signer's partial signature from its
    recovered share.  The aggregate v-product never needs to leave this
    object in honest runs.
    """

    def __init__(
        self,
        member: Member,
        masked_share: MaskedShare,
        subset_ids: Iterable[int],
        recipient_org_key: int,
        params: GroupParams,
        h: ChallengeHash,
        nonces: tuple[int, int],
    ):
        self.member = member
        self.masked_share = masked_share
        self.subset_ids = tuple(subset_ids)
        if member.public_id not in self.subset_ids:
            raise ValueError(f"signer {member.public_id} not in subset {sorted(self.subset_ids)}")
        if masked_share.member_id != member.public_id:
            raise ValueError("masked share does not belong to this signer")
        self.recipient_org_key = recipient_org_key
        self.params = params
        self.h = h
        self.k1, self.k2 = nonces
        self.commitment = make_nonce_commitment(
            member.public_id, self.k1, self.k2, recipient_org_key, params
        )
        self._received: dict[int, NonceCommitment] = {member.public_id: self.commitment}

    def receive_commitment(self, commitment: NonceCommitment) -> None:
        sid = commitment.signer_id
        if sid not in self.subset_ids:
            raise ValueError(f"commitment from {sid} who is not in the subset")
        if sid in self._received and self._received[sid] != commitment:
            raise ValueError(f"conflicting commitment from signer {sid}")
        self._received[sid] = commitment

    @property
    def complete(self) -> bool:
        return set(self._received) == set(self.subset_ids)

    def aggregates(self) -> tuple[int, int, int]:
        if not self.complete:
            missing = sorted(set(self.subset_ids) - set(self._received))
            raise ValueError(f"missing commitments from {missing}")
        ordered = [self._received[sid] for sid in self.subset_ids]
        return aggregate_commitments(ordered, self.params, expected_count=len(self.subset_ids))

    def challenge(self, message: bytes) -> int:
        _, v_total, _ = self.aggregates()
        return compute_challenge(v_total, message, self.h, self.params)

    def shadow(self) -> ModifiedShadow:
        value = recover_share(self.masked_share, self.member.secret_key, self.params)
        return modified_shadow(Share(self.member.public_id, value), self.subset_ids, self.params.q)

    def partial(self, message: bytes) -> PartialSignature:
        return partial_sign(self.k1, self.shadow(), self.challenge(message), self.params.q)


def schnorr_sign(
    secret_key: int, message: bytes, nonce: int, params: GroupParams, h: ChallengeHash
) -> tuple[int, int]:
    """Single-signer reference signature (r, s) with s = k - x*r mod q."""
    p, q, g = params.p, params.q, params.g
    if nonce % q == 0:
        raise ValueError("nonce must be nonzero")
    r = hash_to_scalar(h, mod_exp(g, nonce, p), message, params)
    return r, (nonce - secret_key * r) % q


def schnorr_verify(
    public_key: int, message: bytes, r: int, s: int, params: GroupParams, h: ChallengeHash
) -> bool:
    p = params.p
    elem = mod_exp(params.g, s, p) * mod_exp(public_key, r, p) % p
    return hash_to_scalar(h, elem, message, params) == r
