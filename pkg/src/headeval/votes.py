"""Pairwise vote records and the append-only line-record vote log.

The log file is the single source of truth for a study: one JSON object per
line, append-only, flushed to disk before a vote is acknowledged. Replaying
the log reproduces any in-memory tally exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

CHOICES = ("left", "right")


class VoteLogError(ValueError):
    pass


@dataclass(frozen=True)
class VoteRecord:
    """One pairwise human judgment."""

    pair_id: str
    video_id: str
    left_method: str
    right_method: str
    choice: str  # "left" | "right"
    issued_at: float
    voted_at: float
    session_id: str

    def __post_init__(self) -> None:
        if self.left_method == self.right_method:
            raise VoteLogError(f"pair {self.pair_id}: identical methods on both sides")
        if self.choice not in CHOICES:
            raise VoteLogError(f"pair {self.pair_id}: choice must be left|right, got {self.choice!r}")
        if self.voted_at < self.issued_at:
            raise VoteLogError(f"pair {self.pair_id}: voted_at precedes issued_at")

    @property
    def winner(self) -> str:
        return self.left_method if self.choice == "left" else self.right_method

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_line(cls, line: str, lineno: int | None = None) -> "VoteRecord":
        where = f"line {lineno}" if lineno is not None else "record"
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise VoteLogError(f"{where}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise VoteLogError(f"{where}: expected a JSON object")
        try:
            return cls(
                pair_id=str(raw["pair_id"]),
                video_id=str(raw["video_id"]),
                left_method=str(raw["left_method"]),
                right_method=str(raw["right_method"]),
                choice=str(raw["choice"]),
                issued_at=float(raw["issued_at"]),
                voted_at=float(raw["voted_at"]),
                session_id=str(raw.get("session_id", "")),
            )
        except KeyError as exc:
            raise VoteLogError(f"{where}: missing field {exc.args[0]!r}") from exc


def load_votes(path: str | Path) -> list[VoteRecord]:
    """Read every record of a vote log; malformed lines raise with position."""
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                records.append(VoteRecord.from_line(line, lineno))
    return records
