"""Session orchestration: parties, channels, transcripts, deterministic replay.

Parties exchange immutable messages over a simulated channel.  Broadcast
payloads are public; explicitly addressed payloads (masked shares, the secret
commitment component, partial signatures, shadows, verdicts) are redacted in
the public rendering of a transcript.  Full transcripts are hash-chained line
by line so any edit is detectable, and they embed enough of the session
configuration to re-execute the run bit-for-bit.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .ctc import Ledger, LedgerRecord, OrgPublic, SignatureBundle, aggregate_partials, emit_bundle
from .groupmath import GroupParams
from .hashing import ChallengeHash
from .records import b64decode, b64encode, canonical_json, dec, undec
from .shamir import Share
from .shares import Member, modified_shadow, recover_share
from .signing import SignerSession, partial_is_consistent
from .verification import VerificationSession, Verdict

logger = logging.getLogger(__name__)

TRANSCRIPT_VERSION = "1"

CTC_PARTY = "CTC"

KIND_SETUP_SHARE = "setup-share"
KIND_COMMITMENT_PUBLIC = "commitment-public"
KIND_COMMITMENT_PRIVATE = "commitment-private"
KIND_PARTIAL = "partial-signature"
KIND_BUNDLE = "bundle"
KIND_SHADOW = "shadow"
KIND_VERDICT = "verdict"


class ProtocolAbort(RuntimeError):
    """An honest session could not complete; carries a diagnostic."""


class TranscriptError(RuntimeError):
    """Transcript version mismatch, broken hash chain, or replay divergence."""


def party_s(member_id: int) -> str:
    return f"S:{member_id}"


def party_r(member_id: int) -> str:
    return f"R:{member_id}"


@dataclass(frozen=True)
class ChannelMessage:
    kind: str
    sender: str
    recipients: Union[str, tuple[str, ...]]  # "all" or explicit labels
    payload: dict

    @property
    def is_broadcast(self) -> bool:
        return self.recipients == "all"

    def to_record(self, seq: int) -> dict:
        recipients = self.recipients if self.is_broadcast else list(self.recipients)
        return {
            "seq": dec(seq),
            "kind": self.kind,
            "sender": self.sender,
            "recipients": recipients,
            "payload": self.payload,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ChannelMessage":
        recipients = rec["recipients"]
        if recipients != "all":
            recipients = tuple(recipients)
        return cls(rec["kind"], rec["sender"], recipients, rec["payload"])


@dataclass(frozen=True)
class SessionConfig:
    params: GroupParams
    challenge_hash: ChallengeHash
    signer_org: OrgPublic
    recipient_org: OrgPublic
    signer_members: Mapping[int, Member]
    recipient_members: Mapping[int, Member]
    signer_ids: tuple[int, ...]
    verifier_ids: tuple[int, ...]
    dc_id: int
    message: bytes
    seed: Optional[int] = None
    fixed_nonces: Optional[Mapping[int, tuple[int, int]]] = None
    diagnose_partials: bool = False

    def to_record(self) -> dict:
        return {
            "params": self.params.to_record(),
            "hash": self.challenge_hash.to_record(),
            "signer_org": self.signer_org.to_record(),
            "recipient_org": self.recipient_org.to_record(),
            "signer_members": [m.to_record() for _, m in sorted(self.signer_members.items())],
            "recipient_members": [m.to_record() for _, m in sorted(self.recipient_members.items())],
            "signer_ids": [dec(i) for i in self.signer_ids],
            "verifier_ids": [dec(i) for i in self.verifier_ids],
            "dc": dec(self.dc_id),
            "message": b64encode(self.message),
            "seed": dec(self.seed) if self.seed is not None else None,
            "fixed_nonces": (
                {dec(k): [dec(v[0]), dec(v[1])] for k, v in sorted(self.fixed_nonces.items())}
                if self.fixed_nonces is not None
                else None
            ),
            "diagnose_partials": self.diagnose_partials,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SessionConfig":
        return cls(
            params=GroupParams.from_record(rec["params"]),
            challenge_hash=ChallengeHash.from_record(rec["hash"]),
            signer_org=OrgPublic.from_record(rec["signer_org"]),
            recipient_org=OrgPublic.from_record(rec["recipient_org"]),
            signer_members={
                undec(m["id"]): Member.from_record(m) for m in rec["signer_members"]
            },
            recipient_members={
                undec(m["id"]): Member.from_record(m) for m in rec["recipient_members"]
            },
            signer_ids=tuple(undec(i) for i in rec["signer_ids"]),
            verifier_ids=tuple(undec(i) for i in rec["verifier_ids"]),
            dc_id=undec(rec["dc"]),
            message=b64decode(rec["message"]),
            seed=undec(rec["seed"]) if rec["seed"] is not None else None,
            fixed_nonces=(
                {undec(k): (undec(v[0]), undec(v[1])) for k, v in rec["fixed_nonces"].items()}
                if rec["fixed_nonces"] is not None
                else None
            ),
            diagnose_partials=rec.get("diagnose_partials", False),
        )


@dataclass
class Transcript:
    header: dict
    messages: list[ChannelMessage] = field(default_factory=list)

    def lines(self) -> list[str]:
        """Canonical hash-chained serialization, one record per line."""
        out = []
        prev = b""
        records = [self.header] + [m.to_record(i + 1) for i, m in enumerate(self.messages)]
        for rec in records:
            chained = dict(rec)
            chained["chain"] = hashlib.sha256(prev).hexdigest()
            line = canonical_json(chained)
            out.append(line)
            prev = line.encode("utf-8")
        out.append(canonical_json({"kind": "close", "chain": hashlib.sha256(prev).hexdigest()}))
        return out

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text("\n".join(self.lines()) + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: str | Path) -> "Transcript":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "Transcript":
        lines = [ln for ln in lines if ln.strip()]
        if len(lines) < 2:
            raise TranscriptError("transcript too short")
        prev = b""
        parsed = []
        for n, line in enumerate(lines, start=1):
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TranscriptError(f"line {n} is not a record: {exc}") from exc
            expected = hashlib.sha256(prev).hexdigest()
            if rec.get("chain") != expected:
                raise TranscriptError(f"hash chain broken at line {n}")
            parsed.append(rec)
            prev = line.encode("utf-8")
        if parsed[-1].get("kind") != "close":
            raise TranscriptError("transcript is not closed")
        header = parsed[0]
        if header.get("kind") != "header":
            raise TranscriptError("first record is not a header")
        if header.get("version") != TRANSCRIPT_VERSION:
            raise TranscriptError(
                f"transcript version {header.get('version')!r} != {TRANSCRIPT_VERSION!r}"
            )
        header = {k: v for k, v in header.items() if k != "chain"}
        messages = []
        for rec in parsed[1:-1]:
            messages.append(ChannelMessage.from_record(rec))
        return cls(header=header, messages=messages)

    def public_text(self) -> str:
        """Observer view: broadcast payloads only, everything else redacted."""
        out = [canonical_json({"kind": "header", "session": self.header.get("session"),
                               "version": self.header.get("version")})]
        for i, msg in enumerate(self.messages):
            rec = msg.to_record(i + 1)
            if not msg.is_broadcast:
                rec["payload"] = {"redacted": "true"}
            out.append(canonical_json(rec))
        return "\n".join(out)


@dataclass(frozen=True)
class SigningOutcome:
    bundle: SignatureBundle
    transcript: Transcript
    record: LedgerRecord


@dataclass(frozen=True)
class VerificationOutcome:
    verdict: Verdict
    transcript: Transcript


@dataclass(frozen=True)
class ReplayOutcome:
    session: str
    bundle: Optional[SignatureBundle]
    verdict: Optional[Verdict]


def ensure_consistent_views(views: Mapping[int, tuple]) -> tuple:
    """All parties must have derived identical session values."""
    distinct = set(views.values())
    if len(distinct) != 1:
        detail = ", ".join(f"{pid}:{view}" for pid, view in sorted(views.items()))
        raise ProtocolAbort(f"session views disagree: {detail}")
    return next(iter(distinct))


def _check_subset(subset: Sequence[int], roster_ids: Sequence[int], expected: int, what: str) -> None:
    if len(set(subset)) != len(subset):
        raise ProtocolAbort(f"duplicate ids in {what}: {sorted(subset)}")
    if len(subset) != expected:
        raise ProtocolAbort(f"{what} has {len(subset)} members, threshold requires {expected}")
    unknown = sorted(set(subset) - set(roster_ids))
    if unknown:
        raise ProtocolAbort(f"{what} contains non-roster ids {unknown}")


def run_signing_session(config: SessionConfig, ledger: Optional[Ledger] = None) -> SigningOutcome:
    """Execute one full signing round and return bundle plus replayable transcript."""
    params = config.params
    q = params.q
    signer_ids = config.signer_ids
    _check_subset(signer_ids, config.signer_org.roster_ids(), config.signer_org.threshold, "signer subset")
    if config.dc_id not in config.recipient_org.roster_ids():
        raise ProtocolAbort(f"designated combiner {config.dc_id} is not in the recipient roster")

    rng = random.Random(config.seed) if config.seed is not None else random.SystemRandom()
    fixed = dict(config.fixed_nonces or {})
    nonces = {}
    for uid in signer_ids:
        nonces[uid] = fixed.get(uid) or (rng.randrange(1, q), rng.randrange(1, q))
    if len(set(nonces.values())) != len(nonces):
        logger.warning("two signers drew identical nonce pairs; harmless but noteworthy")

    messages: list[ChannelMessage] = []
    sessions: dict[int, SignerSession] = {}
    for uid in signer_ids:
        masked = config.signer_org.masked_share_for(uid)
        messages.append(
            ChannelMessage(KIND_SETUP_SHARE, CTC_PARTY, (party_s(uid),), masked.to_record())
        )
        sessions[uid] = SignerSession(
            member=config.signer_members[uid],
            masked_share=masked,
            subset_ids=signer_ids,
            recipient_org_key=config.recipient_org.org_public_key,
            params=params,
            h=config.challenge_hash,
            nonces=nonces[uid],
        )

    for uid in signer_ids:
        commitment = sessions[uid].commitment
        messages.append(
            ChannelMessage(KIND_COMMITMENT_PUBLIC, party_s(uid), "all", commitment.public_payload())
        )
        others = tuple(party_s(o) for o in signer_ids if o != uid)
        messages.append(
            ChannelMessage(KIND_COMMITMENT_PRIVATE, party_s(uid), others, commitment.private_payload())
        )
        for other in signer_ids:
            if other != uid:
                sessions[other].receive_commitment(commitment)

    views = {uid: (*sessions[uid].aggregates(), sessions[uid].challenge(config.message))
             for uid in signer_ids}
    u_total, v_total, w_total, challenge = ensure_consistent_views(views)
    if 1 in (u_total, v_total, w_total):
        logger.warning("a commitment product collapsed to 1; session continues")

    partials = {}
    for uid in signer_ids:
        partial = sessions[uid].partial(config.message)
        partials[uid] = partial
        messages.append(
            ChannelMessage(
                KIND_PARTIAL,
                party_s(uid),
                (CTC_PARTY,),
                {"signer_id": dec(uid), "s": dec(partial.s)},
            )
        )

    if config.diagnose_partials:
        for uid in signer_ids:
            session = sessions[uid]
            if not partial_is_consistent(
                partials[uid], session.commitment.v, session.shadow(), challenge, params
            ):
                raise ProtocolAbort(f"partial signature from {uid} failed the diagnostic check")

    # the center derives the public products independently, from broadcasts only
    ctc_u = ctc_w = 1
    for msg in messages:
        if msg.kind == KIND_COMMITMENT_PUBLIC:
            ctc_u = ctc_u * undec(msg.payload["u"]) % params.p
            ctc_w = ctc_w * undec(msg.payload["w"]) % params.p
    if (ctc_u, ctc_w) != (u_total, w_total):
        raise ProtocolAbort("center's commitment products disagree with the signers'")

    total = aggregate_partials(
        [partials[uid].s for uid in signer_ids], q, expected_count=len(signer_ids)
    )
    ledger = ledger if ledger is not None else Ledger()
    bundle, record = emit_bundle(ledger, total, ctc_u, ctc_w, config.message, signer_ids, params)
    messages.append(
        ChannelMessage(KIND_BUNDLE, CTC_PARTY, (party_r(config.dc_id),), bundle.to_record())
    )

    header_config = config
    if config.seed is None:
        # keep unseeded sessions replayable by pinning the drawn nonces
        header_config = replace(config, fixed_nonces=dict(nonces))
    header = {
        "kind": "header",
        "version": TRANSCRIPT_VERSION,
        "session": "sign",
        "config": header_config.to_record(),
    }
    return SigningOutcome(bundle, Transcript(header, messages), record)


def run_verification_session(config: SessionConfig, bundle: SignatureBundle) -> VerificationOutcome:
    """Execute one full verification round for a received bundle."""
    params = config.params
    verifier_ids = config.verifier_ids
    _check_subset(
        verifier_ids, config.recipient_org.roster_ids(), config.recipient_org.threshold, "verifier subset"
    )
    if config.dc_id not in config.recipient_org.roster_ids():
        raise ProtocolAbort(f"designated combiner {config.dc_id} is not in the recipient roster")

    messages: list[ChannelMessage] = []
    for uid in verifier_ids:
        masked = config.recipient_org.masked_share_for(uid)
        messages.append(
            ChannelMessage(KIND_SETUP_SHARE, CTC_PARTY, (party_r(uid),), masked.to_record())
        )
    messages.append(
        ChannelMessage(KIND_BUNDLE, CTC_PARTY, (party_r(config.dc_id),), bundle.to_record())
    )

    combiner = VerificationSession(
        bundle=bundle,
        subset_ids=verifier_ids,
        signer_org_key=config.signer_org.org_public_key,
        params=params,
        h=config.challenge_hash,
    )
    for uid in verifier_ids:
        masked = config.recipient_org.masked_share_for(uid)
        value = recover_share(masked, config.recipient_members[uid].secret_key, params)
        shadow = modified_shadow(Share(uid, value), verifier_ids, params.q)
        messages.append(
            ChannelMessage(
                KIND_SHADOW,
                party_r(uid),
                (party_r(config.dc_id),),
                {"verifier_id": dec(uid), "ms": dec(shadow.value)},
            )
        )
        combiner.receive_shadow(shadow)

    verdict = combiner.verdict()
    messages.append(
        ChannelMessage(
            KIND_VERDICT,
            party_r(config.dc_id),
            tuple(party_r(uid) for uid in verifier_ids),
            verdict.to_record(),
        )
    )
    header = {
        "kind": "header",
        "version": TRANSCRIPT_VERSION,
        "session": "verify",
        "config": config.to_record(),
        "bundle": bundle.to_record(),
    }
    return VerificationOutcome(verdict, Transcript(header, messages))


def replay_transcript(source: str | Path | Sequence[str]) -> ReplayOutcome:
    """Re-execute a transcript and demand bit-for-bit identical output.

    The chain is verified first, then the embedded configuration is re-run
    and every regenerated line compared against the original.
    """
    if isinstance(source, (str, Path)):
        original = Transcript.read(source)
    else:
        original = Transcript.from_lines(list(source))
    config = SessionConfig.from_record(original.header["config"])
    session = original.header.get("session")
    if session == "sign":
        if config.seed is None and not set(config.signer_ids) <= set(config.fixed_nonces or {}):
            raise TranscriptError("signing transcript lacks both seed and pinned nonces")
        rerun = run_signing_session(config, Ledger())
        regenerated, bundle, verdict = rerun.transcript, rerun.bundle, None
    elif session == "verify":
        bundle_in = SignatureBundle.from_record(original.header["bundle"])
        rerun = run_verification_session(config, bundle_in)
        regenerated, bundle, verdict = rerun.transcript, None, rerun.verdict
    else:
        raise TranscriptError(f"unknown session kind {session!r}")

    old_lines = original.lines()
    new_lines = regenerated.lines()
    if old_lines != new_lines:
        for n, (old, new) in enumerate(zip(old_lines, new_lines), start=1):
            if old != new:
                raise TranscriptError(f"replay diverged at line {n}")
        raise TranscriptError(f"replay produced {len(new_lines)} lines, transcript has {len(old_lines)}")
    return ReplayOutcome(session, bundle, verdict)
