"""Masked share distribution and shadow computation.

A share f(u_i) is published multiplied by y_i^K (mod p); the matching public
unmask base W = g^-K lets exactly the key holder strip the mask, because
v_i * W^x_i = f(u_i) * g^(x_i*K) * g^(-K*x_i) = f(u_i).  A modified shadow is
the recovered share times its Lagrange coefficient for a specific authorized
subset, so the subset's shadows sum to the organization secret.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .groupmath import GroupParams, lagrange_coeff_zero, mod_exp
from .records import dec, undec
from .shamir import Share

ORG_SENDERS = "S"
ORG_RECIPIENTS = "R"


class ShareRecoveryError(ValueError):
    """Unmasking produced a value outside the share range (wrong key or corrupt data)."""


@dataclass(frozen=True)
class Member:
    org: str
    public_id: int
    secret_key: int
    public_key: int

    @classmethod
    def create(cls, org: str, public_id: int, secret_key: int, params: GroupParams) -> "Member":
        if public_id % params.q == 0:
            raise ValueError("member identity must be nonzero mod q")
        return cls(org, public_id, secret_key, mod_exp(params.g, secret_key, params.p))

    def public_part(self) -> "RosterEntry":
        return RosterEntry(self.public_id, self.public_key)

    def to_record(self) -> dict:
        return {
            "org": self.org,
            "id": dec(self.public_id),
            "x": dec(self.secret_key),
            "y": dec(self.public_key),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Member":
        return cls(rec["org"], undec(rec["id"]), undec(rec["x"]), undec(rec["y"]))


@dataclass(frozen=True)
class RosterEntry:
    public_id: int
    public_key: int

    def to_record(self) -> dict:
        return {"id": dec(self.public_id), "y": dec(self.public_key)}

    @classmethod
    def from_record(cls, rec: dict) -> "RosterEntry":
        return cls(undec(rec["id"]), undec(rec["y"]))


@dataclass(frozen=True)
class MaskedShare:
    member_id: int
    v: int
    w: int  # the shared unmask base, identical across one distribution

    def to_record(self) -> dict:
        return {"member_id": dec(self.member_id), "v": dec(self.v), "W": dec(self.w)}

    @classmethod
    def from_record(cls, rec: dict) -> "MaskedShare":
        return cls(undec(rec["member_id"]), undec(rec["v"]), undec(rec["W"]))


@dataclass(frozen=True)
class ModifiedShadow:
    member_id: int
    value: int


def mask_share(share_value: int, member_pubkey: int, masking_nonce: int, params: GroupParams) -> int:
    """Public value concealing a share under the member's key: f(u) * y^K mod p."""
    if masking_nonce % params.q == 0:
        raise ValueError("masking nonce must be nonzero")
    return share_value * mod_exp(member_pubkey, masking_nonce, params.p) % params.p


def recover_share(masked: MaskedShare, secret_key: int, params: GroupParams) -> int:
    """Strip the mask with the member's secret key: v * W^x mod p."""
    value = masked.v * mod_exp(masked.w, secret_key, params.p) % params.p
    if value >= params.q:
        raise ShareRecoveryError(
            f"unmasked value {value} is not a share (>= q); wrong key or corrupted share"
        )
    return value


def modified_shadow(share: Share, subset_ids: Iterable[int], q: int) -> ModifiedShadow:
    """Share times its Lagrange coefficient at zero for this exact subset."""
    ids = list(subset_ids)
    if share.id not in ids:
        raise ValueError(f"share identity {share.id} is not in the subset {sorted(ids)}")
    return ModifiedShadow(share.id, share.value * lagrange_coeff_zero(share.id, ids, q) % q)
