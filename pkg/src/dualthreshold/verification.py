"""Threshold verification: shadow combination and the final congruence check.

The designated combiner recovers the signing subset's challenge commitment as
R_R = W_S * U_S^(sum of shadows), recomputes the challenge from it, and
accepts iff g^S_S == R_R * y_S^challenge (mod p).  Without a threshold of
shadows the exponent is undetermined, so no smaller coalition can decide
validity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from .groupmath import GroupParams, mod_exp
from .hashing import ChallengeHash, hash_to_scalar
from .records import dec
from .shares import ModifiedShadow

if TYPE_CHECKING:
    from .ctc import SignatureBundle


@dataclass(frozen=True)
class Verdict:
    valid: bool
    commitment: int  # recovered R_R
    challenge: int  # recovered R_S

    def to_record(self) -> dict:
        return {
            "valid": "true" if self.valid else "false",
            "R_R": dec(self.commitment),
            "R_S": dec(self.challenge),
        }


def combine_shadows(
    shadows: Sequence[ModifiedShadow], q: int, expected_count: Optional[int] = None
) -> int:
    if not shadows:
        raise ValueError("no shadows to combine")
    if expected_count is not None and len(shadows) != expected_count:
        raise ValueError(f"expected {expected_count} shadows, got {len(shadows)}")
    ids = [s.member_id for s in shadows]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate verifier ids: {sorted(ids)}")
    return sum(s.value for s in shadows) % q


def recover_commitment(w_total: int, u_total: int, shadow_sum: int, params: GroupParams) -> int:
    return w_total * mod_exp(u_total, shadow_sum, params.p) % params.p


def verify_bundle(
    bundle: "SignatureBundle",
    shadow_sum: int,
    signer_org_key: int,
    params: GroupParams,
    h: ChallengeHash,
) -> Verdict:
    """Run the final check; an invalid signature is a verdict, not an error."""
    p, g = params.p, params.g
    commitment = recover_commitment(bundle.w, bundle.u, shadow_sum, params)
    challenge = hash_to_scalar(h, commitment, bundle.message, params)
    lhs = mod_exp(g, bundle.s, p)
    rhs = commitment * mod_exp(signer_org_key, challenge, p) % p
    return Verdict(valid=lhs == rhs, commitment=commitment, challenge=challenge)


class VerificationSession:
    """The designated combiner's view of one verification round.

    Shadows accumulate until the whole subset has reported; the verdict is
    refused while any are missing.
    """

    def __init__(
        self,
        bundle: "SignatureBundle",
        subset_ids: Iterable[int],
        signer_org_key: int,
        params: GroupParams,
        h: ChallengeHash,
    ):
        self.bundle = bundle
        self.subset_ids = tuple(subset_ids)
        self.signer_org_key = signer_org_key
        self.params = params
        self.h = h
        self._shadows: dict[int, ModifiedShadow] = {}

    def receive_shadow(self, shadow: ModifiedShadow) -> None:
        vid = shadow.member_id
        if vid not in self.subset_ids:
            raise ValueError(f"shadow from {vid} who is not in the subset")
        if vid in self._shadows and self._shadows[vid] != shadow:
            raise ValueError(f"conflicting shadow from verifier {vid}")
        self._shadows[vid] = shadow

    @property
    def complete(self) -> bool:
        return set(self._shadows) == set(self.subset_ids)

    def shadow_sum(self) -> int:
        if not self.complete:
            missing = sorted(set(self.subset_ids) - set(self._shadows))
            raise ValueError(f"missing shadows from {missing}")
        ordered = [self._shadows[vid] for vid in self.subset_ids]
        return combine_shadows(ordered, self.params.q, expected_count=len(self.subset_ids))

    def verdict(self) -> Verdict:
        return verify_bundle(self.bundle, self.shadow_sum(), self.signer_org_key, self.params, self.h)
