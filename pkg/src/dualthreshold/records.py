"""Record encoding shared by every file format in the package.

All persisted numbers are decimal strings (arbitrary precision survives any
JSON parser), byte strings are base64, and canonical JSON (sorted keys,
compact separators) gives every record a single stable serialization.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path
from typing import Any, Iterable, Mapping


def dec(value: int) -> str:
    return str(int(value))


def undec(text: str | int) -> int:
    return int(text)


def b64encode(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def b64decode(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"))


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_jsonl(path: str | Path, rows: Iterable[Mapping[str, Any]]) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fp:
        for row in rows:
            fp.write(canonical_json(row) + "\n")
    return path


def append_jsonl(path: str | Path, row: Mapping[str, Any]) -> Path:
    path = Path(path)
    with path.open("a", encoding="utf-8") as fp:
        fp.write(canonical_json(row) + "\n")
    return path


def read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rows.append(json.loads(line))
    return rows


def format_record(fields: Mapping[str, Any], style: str = "text") -> str:
    """Render one output record.

    "records" is the machine format: tab-separated key=value pairs on one
    line, keys in the given order.  "text" is the aligned human format.
    """
    if style == "records":
        return "\t".join(f"{k}={v}" for k, v in fields.items())
    width = max((len(k) for k in fields), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in fields.items())
