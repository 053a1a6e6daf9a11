"""
Running a pairwise preference study
===================================

Boots the study service on a local port, plays ten rater turns against the
HTTP API (fetch a pair, watch, vote), and prints the live tally. A browser
frontend can drive the same three endpoints.
"""

import json
import tempfile
import threading
import urllib.request
from pathlib import Path

from headeval.service import StudyConfig, StudyState, make_server

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    methods = {}
    for name in ("ground_truth", "model_a", "model_b"):
        clip = root / f"{name}.mp4"
        clip.write_bytes(b"stand-in video bytes")
        methods[name] = {"clip_001": clip}

    state = StudyState(StudyConfig(
        methods=methods, votes_path=root / "votes.jsonl", seed=11))
    server = make_server(state, port=0)
    port = server.server_address[1]
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{port}"
    print(f"service on {base}, vote log at {state.config.votes_path.name}\n")

    for turn in range(10):
        with urllib.request.urlopen(f"{base}/api/pair") as resp:
            pair = json.loads(resp.read())
        # A lazy rater: always prefers the left clip.
        body = json.dumps({"pair_id": pair["pair_id"], "choice": "left",
                           "session_id": "demo"}).encode()
        req = urllib.request.Request(f"{base}/api/vote", data=body,
                                     headers={"Content-Type": "application/json"})
        with urllib.request.urlopen(req) as resp:
            ack = json.loads(resp.read())
        print(f"turn {turn}: {pair['video_id']} -> {ack['status']}")

    with urllib.request.urlopen(f"{base}/api/tally") as resp:
        tally = json.loads(resp.read())["methods"]
    print("\ntally:")
    for method, row in tally.items():
        print(f"  {method}: {row['wins']}/{row['appearances']} wins")

    server.shutdown()
    server.server_close()
    state.close()
