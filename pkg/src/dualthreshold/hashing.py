"""The challenge hash mapping (group element, message) into Z_q.

Production mode digests the length-prefixed canonical element encoding
followed by the message bytes with SHA-256 and reduces mod q.  Scripted mode
is a lookup table used to rerun walkthroughs whose hash outputs are posited
rather than computed; a lookup miss is a fixture bug and raises.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .groupmath import GroupParams
from .records import dec, read_jsonl, undec, write_jsonl

PRODUCTION = "production"
SCRIPTED = "scripted"


class ScriptLookupError(LookupError):
    """A scripted hash was asked for a pair its table does not contain."""


@dataclass(frozen=True)
class ChallengeHash:
    mode: str = PRODUCTION
    script: Optional[Mapping[tuple[int, bytes], int]] = field(default=None)

    @classmethod
    def production(cls) -> "ChallengeHash":
        return cls(mode=PRODUCTION)

    @classmethod
    def scripted(cls, entries: Mapping[tuple[int, bytes], int]) -> "ChallengeHash":
        return cls(mode=SCRIPTED, script=dict(entries))

    def to_record(self) -> dict:
        if self.mode == PRODUCTION:
            return {"mode": PRODUCTION}
        entries = [
            {"elem": dec(elem), "message": msg.decode("utf-8"), "output": dec(out)}
            for (elem, msg), out in sorted(self.script.items())
        ]
        return {"mode": SCRIPTED, "entries": entries}

    @classmethod
    def from_record(cls, rec: dict) -> "ChallengeHash":
        if rec["mode"] == PRODUCTION:
            return cls.production()
        table = {
            (undec(e["elem"]), e["message"].encode("utf-8")): undec(e["output"])
            for e in rec["entries"]
        }
        return cls.scripted(table)


def canonical_encode(elem: int, params: GroupParams) -> bytes:
    """Fixed-width big-endian encoding; injective for elements below p."""
    if not 0 <= elem < params.p:
        raise ValueError(f"element {elem} outside [0, p)")
    return elem.to_bytes(params.element_width(), "big")


def hash_to_scalar(h: ChallengeHash, elem: int, message: bytes, params: GroupParams) -> int:
    if h.mode == SCRIPTED:
        key = (elem, bytes(message))
        if h.script is None or key not in h.script:
            raise ScriptLookupError(f"scripted hash has no entry for elem={elem} message={message!r}")
        return h.script[key] % params.q
    encoded = canonical_encode(elem, params)
    # length prefix keeps (element, message) framing unambiguous
    digest = hashlib.sha256(len(encoded).to_bytes(4, "big") + encoded + message).digest()
    return int.from_bytes(digest, "big") % params.q


def save_script(path: str | Path, h: ChallengeHash) -> Path:
    if h.mode != SCRIPTED:
        raise ValueError("only scripted hashes can be saved as script files")
    return write_jsonl(path, h.to_record()["entries"])


def load_script(path: str | Path) -> ChallengeHash:
    return ChallengeHash.from_record({"mode": SCRIPTED, "entries": read_jsonl(path)})
