"""Pairwise preference study service.

Serves side-by-side stimulus pairs and collects votes over HTTP:

* ``GET /api/pair`` — issue a pair: uniformly sampled unordered method pair
  (all combinations, ground truth included), a video from the common set,
  sides assigned by an independent fair coin.
* ``POST /api/vote`` — body ``{"pair_id", "choice", "session_id"}``; the
  vote is appended to the log and flushed before the acknowledgement.
* ``GET /api/tally`` — per-method appearances, wins, win rate.
* ``GET /media/<pair_id>/<left|right>`` — stimulus bytes with single-range
  support. Media URLs are opaque per-pair tokens so raters never see which
  method produced a video.

The append-only vote log is the single source of truth; restarting the
service replays it to rebuild the tally and the set of spent pair ids.
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from itertools import combinations
from pathlib import Path

from .stats import win_rates
from .votes import VoteRecord, load_votes

DEFAULT_PAIR_TTL_S = 3600.0


class StudyConfigError(ValueError):
    pass


class UnknownPairError(KeyError):
    pass


class DuplicateVoteError(RuntimeError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    """Stimulus manifest and service parameters.

    ``balance_pairs`` switches from uniform sampling to quota balancing:
    each draw picks uniformly among the pairs issued least often so far.
    """

    methods: dict[str, dict[str, Path]]  # method -> video_id -> media path
    votes_path: Path
    seed: int = 0
    port: int = 8750
    pair_ttl_s: float = DEFAULT_PAIR_TTL_S
    balance_pairs: bool = False

    def __post_init__(self) -> None:
        if len(self.methods) < 2:
            raise StudyConfigError("need at least 2 methods to form pairs")
        common = None
        for name, stimuli in self.methods.items():
            ids = set(stimuli)
            if not ids:
                raise StudyConfigError(f"method {name!r} has no stimuli")
            common = ids if common is None else common & ids
        if not common:
            raise StudyConfigError("methods share no common video ids")
        object.__setattr__(self, "_common_ids", tuple(sorted(common)))

    @property
    def common_video_ids(self) -> tuple[str, ...]:
        return self._common_ids  # type: ignore[attr-defined]


def load_study_config(path: str | Path, votes_path: str | Path,
                      seed: int = 0, port: int = 8750,
                      balance_pairs: bool = False) -> StudyConfig:
    """Read a study manifest: ``{"methods": {name: {video_id: media_path}}}``.

    Media paths are resolved relative to the manifest's directory.
    """
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    methods_raw = raw.get("methods")
    if not isinstance(methods_raw, dict):
        raise StudyConfigError(f"{path}: 'methods' must map method ids to stimuli")
    root = path.parent
    methods = {
        str(name): {str(vid): root / rel for vid, rel in stimuli.items()}
        for name, stimuli in methods_raw.items()
    }
    return StudyConfig(methods=methods, votes_path=Path(votes_path), seed=seed,
                       port=port, balance_pairs=balance_pairs)


@dataclass(frozen=True)
class PairAssignment:
    pair_id: str
    video_id: str
    left_method: str
    right_method: str
    issued_at: float


@dataclass
class Tally:
    appearances: dict[str, int] = field(default_factory=dict)
    wins: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            method: {
                "appearances": self.appearances[method],
                "wins": self.wins[method],
                "win_rate": (self.wins[method] / self.appearances[method]
                             if self.appearances[method] else None),
            }
            for method in sorted(self.appearances)
        }


class StudyState:
    """In-memory study state over a durable vote log.

    Pair issuing is uniform over all C(k, 2) unordered method pairs and the
    common video set; side assignment is an independent fair coin, so no
    method is biased toward either screen position. All mutating paths are
    serialized by one lock; the log append is flushed (and fsynced) before
    a vote is acknowledged.
    """

    def __init__(self, config: StudyConfig):
        self.config = config
        self._rng = random.Random(config.seed)
        self._pairs = tuple(combinations(sorted(config.methods), 2))
        self._videos = config.common_video_ids
        self._lock = threading.Lock()
        self._issued: dict[str, PairAssignment] = {}
        self._spent: dict[str, PairAssignment] = {}
        self._pair_issue_counts = {pair: 0 for pair in self._pairs}
        self._counter = 0
        self._tally = Tally(
            appearances={m: 0 for m in config.methods},
            wins={m: 0 for m in config.methods},
        )
        self._log_fh = None
        self._replay()

    def _replay(self) -> None:
        if self.config.votes_path.exists():
            for record in load_votes(self.config.votes_path):
                self._spent[record.pair_id] = PairAssignment(
                    pair_id=record.pair_id,
                    video_id=record.video_id,
                    left_method=record.left_method,
                    right_method=record.right_method,
                    issued_at=record.issued_at,
                )
                self._apply(record)
        self.config.votes_path.parent.mkdir(parents=True, exist_ok=True)
        self._log_fh = self.config.votes_path.open("a", encoding="utf-8")

    def _apply(self, record: VoteRecord) -> None:
        self._tally.appearances[record.left_method] += 1
        self._tally.appearances[record.right_method] += 1
        self._tally.wins[record.winner] += 1

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    def _prune(self, now: float) -> None:
        ttl = self.config.pair_ttl_s
        stale = [pid for pid, pa in self._issued.items() if now - pa.issued_at > ttl]
        for pid in stale:
            del self._issued[pid]

    def sample_pair(self, now: float | None = None) -> PairAssignment:
        """Issue a fresh pair assignment; deterministic given the seed."""
        now = time.time() if now is None else now
        with self._lock:
            self._prune(now)
            if self.config.balance_pairs:
                floor = min(self._pair_issue_counts.values())
                pool = [p for p in self._pairs if self._pair_issue_counts[p] == floor]
            else:
                pool = self._pairs
            method_a, method_b = pool[self._rng.randrange(len(pool))]
            self._pair_issue_counts[(method_a, method_b)] += 1
            video_id = self._videos[self._rng.randrange(len(self._videos))]
            if self._rng.random() < 0.5:
                left, right = method_a, method_b
            else:
                left, right = method_b, method_a
            self._counter += 1
            pair_id = f"p{self._counter:08d}-{self._rng.getrandbits(48):012x}"
            assignment = PairAssignment(
                pair_id=pair_id,
                video_id=video_id,
                left_method=left,
                right_method=right,
                issued_at=now,
            )
            self._issued[pair_id] = assignment
            return assignment

    def record_vote(self, pair_id: str, choice: str, session_id: str,
                    now: float | None = None) -> VoteRecord:
        """Persist one vote; first vote per pair wins, replays are rejected."""
        now = time.time() if now is None else now
        with self._lock:
            if pair_id in self._spent:
                raise DuplicateVoteError(f"pair {pair_id} already voted")
            assignment = self._issued.get(pair_id)
            if assignment is None:
                raise UnknownPairError(pair_id)
            record = VoteRecord(
                pair_id=pair_id,
                video_id=assignment.video_id,
                left_method=assignment.left_method,
                right_method=assignment.right_method,
                choice=choice,
                issued_at=assignment.issued_at,
                voted_at=now,
                session_id=session_id,
            )
            self._log_fh.write(record.to_line() + "\n")
            self._log_fh.flush()
            os.fsync(self._log_fh.fileno())
            del self._issued[pair_id]
            self._spent[pair_id] = assignment
            self._apply(record)
            return record

    def tally(self) -> dict:
        with self._lock:
            return self._tally.to_dict()

    def resolve_media(self, pair_id: str, side: str) -> Path:
        with self._lock:
            assignment = self._issued.get(pair_id) or self._spent.get(pair_id)
        if assignment is None:
            raise UnknownPairError(pair_id)
        method = assignment.left_method if side == "left" else assignment.right_method
        return self.config.methods[method][assignment.video_id]

    def consistency_check(self) -> bool:
        """True iff replaying the log reproduces the in-memory tally."""
        records = load_votes(self.config.votes_path)
        methods = sorted(self.config.methods)
        replayed = win_rates(records, methods)
        with self._lock:
            return all(
                replayed[m].appearances == self._tally.appearances[m]
                and replayed[m].wins == self._tally.wins[m]
                for m in methods
            )


def _guess_content_type(path: Path) -> str:
    return {
        ".mp4": "video/mp4",
        ".webm": "video/webm",
        ".wav": "audio/wav",
        ".html": "text/html; charset=utf-8",
        ".js": "application/javascript",
        ".css": "text/css",
    }.get(path.suffix.lower(), "application/octet-stream")


class _StudyHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state: StudyState = None  # set by make_server
    static_dir: Path | None = None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        try:
            if self.path == "/api/pair":
                pair = self.state.sample_pair()
                self._send_json(200, {
                    "pair_id": pair.pair_id,
                    "video_id": pair.video_id,
                    "left_url": f"/media/{pair.pair_id}/left",
                    "right_url": f"/media/{pair.pair_id}/right",
                })
            elif self.path == "/api/tally":
                self._send_json(200, {"methods": self.state.tally()})
            elif self.path.startswith("/media/"):
                self._serve_media()
            else:
                self._serve_static()
        except BrokenPipeError:
            pass
        except Exception as exc:
            self._send_json(500, {"status": "error", "detail": str(exc)})

    def do_POST(self) -> None:
        if self.path != "/api/vote":
            self._send_json(404, {"status": "not_found"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        try:
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
            pair_id = str(payload["pair_id"])
            choice = str(payload["choice"])
            session_id = str(payload.get("session_id", ""))
        except (json.JSONDecodeError, KeyError, UnicodeDecodeError) as exc:
            self._send_json(400, {"status": "bad_request", "detail": str(exc)})
            return
        try:
            record = self.state.record_vote(pair_id, choice, session_id)
        except UnknownPairError:
            self._send_json(404, {"status": "unknown_pair", "pair_id": pair_id})
            return
        except DuplicateVoteError:
            self._send_json(409, {"status": "duplicate", "pair_id": pair_id})
            return
        except ValueError as exc:
            self._send_json(400, {"status": "bad_request", "detail": str(exc)})
            return
        self._send_json(200, {"status": "ok", "pair_id": record.pair_id})

    def _serve_media(self) -> None:
        parts = self.path.strip("/").split("/")
        if len(parts) != 3 or parts[2] not in ("left", "right"):
            self._send_json(404, {"status": "not_found"})
            return
        try:
            media_path = self.state.resolve_media(parts[1], parts[2])
        except UnknownPairError:
            self._send_json(404, {"status": "unknown_pair"})
            return
        if not media_path.is_file():
            self._send_json(404, {"status": "missing_media"})
            return
        self._send_file(media_path)

    def _serve_static(self) -> None:
        if self.static_dir is None:
            if self.path in ("/", "/index.html"):
                body = (b"headeval study service\n"
                        b"endpoints: GET /api/pair, POST /api/vote, GET /api/tally\n")
                self.send_response(200)
                self.send_header("Content-Type", "text/plain; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
            else:
                self._send_json(404, {"status": "not_found"})
            return
        rel = self.path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send_json(404, {"status": "not_found"})
            return
        self._send_file(target)

    def _send_file(self, path: Path) -> None:
        size = path.stat().st_size
        range_header = self.headers.get("Range")
        start, end = 0, size - 1
        status = 200
        if range_header and range_header.startswith("bytes="):
            spec = range_header[len("bytes="):].split(",")[0].strip()
            lo, _, hi = spec.partition("-")
            try:
                if lo:
                    start = int(lo)
                    end = int(hi) if hi else size - 1
                elif hi:  # suffix range: last N bytes
                    start = max(size - int(hi), 0)
                    end = size - 1
                else:
                    raise ValueError(spec)
            except ValueError:
                self.send_response(416)
                self.send_header("Content-Range", f"bytes */{size}")
                self.send_header("Content-Length", "0")
                self.end_headers()
                return
            if start >= size or start > end:
                self.send_response(416)
                self.send_header("Content-Range", f"bytes */{size}")
                self.send_header("Content-Length", "0")
                self.end_headers()
                return
            end = min(end, size - 1)
            status = 206
        length = end - start + 1
        self.send_response(status)
        self.send_header("Content-Type", _guess_content_type(path))
        self.send_header("Accept-Ranges", "bytes")
        self.send_header("Content-Length", str(length))
        if status == 206:
            self.send_header("Content-Range", f"bytes {start}-{end}/{size}")
        self.end_headers()
        with path.open("rb") as fh:
            fh.seek(start)
            remaining = length
            while remaining > 0:
                chunk = fh.read(min(65536, remaining))
                if not chunk:
                    break
                self.wfile.write(chunk)
                remaining -= len(chunk)


def make_server(
    state: StudyState, host: str = "127.0.0.1", port: int | None = None,
    static_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server bound to ``state``."""
    handler = type("BoundStudyHandler", (_StudyHandler,), {
        "state": state,
        "static_dir": Path(static_dir) if static_dir else None,
    })
    return ThreadingHTTPServer((host, port if port is not None else state.config.port), handler)


def serve_forever(state: StudyState, host: str = "0.0.0.0",
                  static_dir: str | Path | None = None) -> None:
    server = make_server(state, host=host, static_dir=static_dir)
    try:
        server.serve_forever()
    finally:
        server.server_close()
        state.close()
