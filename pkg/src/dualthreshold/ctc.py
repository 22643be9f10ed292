"""The common trusted center: organization setup, partial aggregation, ledger.

The center samples each organization's polynomial, publishes the organization
key with one masked share per member, aggregates partial signatures into the
final scalar, and keeps an append-only record of every emitted signature so a
dispute can be settled by re-running the check from stored components.  The
masking nonce K is used during setup and then dropped; only the unmask base
W = g^-K persists.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .groupmath import GroupParams, mod_exp
from .hashing import ChallengeHash
from .records import b64decode, b64encode, dec, read_json, undec, write_json
from .shamir import SecretPolynomial, Share, eval_poly, sample_polynomial
from .shares import MaskedShare, RosterEntry, mask_share


@dataclass(frozen=True)
class OrgPublic:
    """Everything a setup publishes: safe to hand to any party."""

    org: str
    org_public_key: int
    threshold: int
    roster: tuple[RosterEntry, ...]
    masked_shares: tuple[MaskedShare, ...]
    unmask_base: int

    def roster_ids(self) -> tuple[int, ...]:
        return tuple(entry.public_id for entry in self.roster)

    def masked_share_for(self, member_id: int) -> MaskedShare:
        for share in self.masked_shares:
            if share.member_id == member_id:
                return share
        raise KeyError(f"no masked share for member {member_id}")

    def to_record(self) -> dict:
        return {
            "org": self.org,
            "y_org": dec(self.org_public_key),
            "threshold": dec(self.threshold),
            "roster": [entry.to_record() for entry in self.roster],
            "shares": [share.to_record() for share in self.masked_shares],
            "W": dec(self.unmask_base),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "OrgPublic":
        return cls(
            org=rec["org"],
            org_public_key=undec(rec["y_org"]),
            threshold=undec(rec["threshold"]),
            roster=tuple(RosterEntry.from_record(r) for r in rec["roster"]),
            masked_shares=tuple(MaskedShare.from_record(s) for s in rec["shares"]),
            unmask_base=undec(rec["W"]),
        )


@dataclass(frozen=True)
class OrgSetup:
    """Setup outcome including the center-private polynomial."""

    polynomial: SecretPolynomial
    public: OrgPublic

    @property
    def secret(self) -> int:
        return self.polynomial.secret


@dataclass(frozen=True)
class SignatureBundle:
    s: int
    u: int
    w: int
    message: bytes

    def to_record(self) -> dict:
        return {
            "S_S": dec(self.s),
            "U_S": dec(self.u),
            "W_S": dec(self.w),
            "m": b64encode(self.message),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SignatureBundle":
        return cls(undec(rec["S_S"]), undec(rec["U_S"]), undec(rec["W_S"]), b64decode(rec["m"]))


@dataclass(frozen=True)
class LedgerRecord:
    bundle: SignatureBundle
    signer_ids: tuple[int, ...]
    timestamp: int

    def to_record(self) -> dict:
        rec = self.bundle.to_record()
        rec["signers"] = [dec(i) for i in self.signer_ids]
        rec["timestamp"] = dec(self.timestamp)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "LedgerRecord":
        return cls(
            bundle=SignatureBundle.from_record(rec),
            signer_ids=tuple(undec(i) for i in rec["signers"]),
            timestamp=undec(rec["timestamp"]),
        )


class Ledger:
    """Append-only signature record store with a monotonic session counter."""

    def __init__(self, records: Iterable[LedgerRecord] = ()):
        self._records = list(records)

    @property
    def records(self) -> tuple[LedgerRecord, ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def append(self, bundle: SignatureBundle, signer_ids: Sequence[int]) -> LedgerRecord:
        record = LedgerRecord(bundle, tuple(signer_ids), len(self._records) + 1)
        self._records.append(record)
        return record

    def save(self, path: str | Path) -> Path:
        from .records import write_jsonl

        return write_jsonl(path, (r.to_record() for r in self._records))

    @classmethod
    def load(cls, path: str | Path) -> "Ledger":
        from .records import read_jsonl

        return cls(LedgerRecord.from_record(r) for r in read_jsonl(path))


def setup_organization(
    org: str,
    secret: Optional[int],
    threshold: int,
    roster: Sequence[RosterEntry],
    masking_nonce: int,
    params: GroupParams,
    rng: Optional[random.Random] = None,
    polynomial: Optional[SecretPolynomial] = None,
    max_resample: int = 1000,
) -> OrgSetup:
    """Build one organization: polynomial, public key, masked share per member.

    A sampled polynomial evaluating to zero at any roster identity would
    publish v_i = 0 and betray that member's share, so such draws are
    rejected and resampled.  A supplied fixture polynomial may have degree
    below threshold-1 (reconstruction tolerates extra shares) but is never
    resampled: a zero share there is an error.
    """
    p, q, g = params.p, params.q, params.g
    ids = [entry.public_id for entry in roster]
    if len(set(u % q for u in ids)) != len(ids):
        raise ValueError("roster identities must be distinct mod q")
    if any(u % q == 0 for u in ids):
        raise ValueError("roster identity 0 mod q is not allowed")
    if not 1 <= threshold <= len(roster):
        raise ValueError(f"threshold {threshold} outside [1, {len(roster)}]")
    if masking_nonce % q == 0:
        raise ValueError("masking nonce must be nonzero")

    if polynomial is not None:
        if polynomial.degree > threshold - 1:
            raise ValueError("polynomial degree exceeds threshold - 1")
        if any(eval_poly(polynomial, u, q) == 0 for u in ids):
            raise ValueError("supplied polynomial evaluates to zero at a roster identity")
        poly = polynomial
    else:
        rng = rng or random.SystemRandom()
        base_secret = secret if secret is not None else rng.randrange(1, q)
        for _ in range(max_resample):
            poly = sample_polynomial(base_secret, threshold - 1, rng, q)
            if all(eval_poly(poly, u, q) != 0 for u in ids):
                break
        else:
            raise ValueError("could not sample a polynomial with no zero share")

    masked = tuple(
        MaskedShare(
            member_id=entry.public_id,
            v=mask_share(eval_poly(poly, entry.public_id, q), entry.public_key, masking_nonce, params),
            w=mod_exp(g, -masking_nonce, p),
        )
        for entry in roster
    )
    public = OrgPublic(
        org=org,
        org_public_key=mod_exp(g, poly.secret, p),
        threshold=threshold,
        roster=tuple(roster),
        masked_shares=masked,
        unmask_base=mod_exp(g, -masking_nonce, p),
    )
    return OrgSetup(polynomial=poly, public=public)


def aggregate_partials(partials: Sequence[int], q: int, expected_count: Optional[int] = None) -> int:
    """Final signature scalar: sum of the partial signatures mod q."""
    values = list(partials)
    if not values:
        raise ValueError("no partial signatures to aggregate")
    if expected_count is not None and len(values) != expected_count:
        raise ValueError(f"expected {expected_count} partials, got {len(values)}")
    return sum(values) % q


def emit_bundle(
    ledger: Ledger,
    s: int,
    u: int,
    w: int,
    message: bytes,
    signer_ids: Sequence[int],
    params: GroupParams,
) -> tuple[SignatureBundle, LedgerRecord]:
    """Range-check the components, record them, and return the transmissible bundle."""
    if not 0 <= s < params.q:
        raise ValueError(f"signature scalar {s} outside [0, q)")
    for name, elem in (("U_S", u), ("W_S", w)):
        if not 1 <= elem <= params.p - 1:
            raise ValueError(f"{name}={elem} outside [1, p-1]")
    bundle = SignatureBundle(s, u, w, bytes(message))
    record = ledger.append(bundle, signer_ids)
    return bundle, record


def adjudicate(
    ledger: Ledger,
    record: LedgerRecord,
    shadow_sum: int,
    signer_org_key: int,
    params: GroupParams,
    h: ChallengeHash,
):
    """Settle a dispute by re-running verification from the stored record.

    The recipients supply their combined shadow sum; the stored bundle
    supplies everything else.
    """
    if record not in ledger.records:
        raise KeyError(f"record with timestamp {record.timestamp} is not in the ledger")
    from .verification import verify_bundle

    return verify_bundle(record.bundle, shadow_sum, signer_org_key, params, h)


def save_org_state(setup: OrgSetup, path: str | Path) -> Path:
    """Persist the center-private organization state.

    This file is the only serialization that carries the polynomial; access
    control is the operating system's problem.
    """
    pub = setup.public
    return write_json(
        path,
        {
            "org": pub.org,
            "coefficients": [dec(c) for c in setup.polynomial.coefficients],
            "threshold": dec(pub.threshold),
            "roster": [entry.to_record() for entry in pub.roster],
            "y_org": dec(pub.org_public_key),
            "W": dec(pub.unmask_base),
        },
    )


def load_org_state(path: str | Path, masked_shares: Iterable[MaskedShare] = ()) -> OrgSetup:
    """Rebuild an OrgSetup from a state file.

    Masked shares are not part of the state file (they are public-channel
    payloads); pass them in when the full setup object is needed.
    """
    rec = read_json(path)
    public = OrgPublic(
        org=rec["org"],
        org_public_key=undec(rec["y_org"]),
        threshold=undec(rec["threshold"]),
        roster=tuple(RosterEntry.from_record(r) for r in rec["roster"]),
        masked_shares=tuple(masked_shares),
        unmask_base=undec(rec["W"]),
    )
    return OrgSetup(
        polynomial=SecretPolynomial(tuple(undec(c) for c in rec["coefficients"])),
        public=public,
    )
