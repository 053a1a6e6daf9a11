"""
End-to-end pipeline on a generated corpus
=========================================

Generates a synthetic three-model corpus, evaluates it against its ground
truth, and prints the leaderboard. Everything also works from the shell:

    headeval fixtures --out corpus
    headeval evaluate --manifest corpus/manifest.json --out report.json
    headeval leaderboard --report report.json
"""

import json
import tempfile
from pathlib import Path

from headeval.cli import main

with tempfile.TemporaryDirectory() as tmp:
    corpus = Path(tmp) / "corpus"
    report = Path(tmp) / "report.json"

    assert main(["fixtures", "--out", str(corpus)]) == 0
    assert main(["evaluate", "--manifest", str(corpus / "manifest.json"),
                 "--out", str(report)]) == 0

    print()
    assert main(["leaderboard", "--report", str(report)]) == 0

    ranking = json.loads(report.read_text())["ranking"]
    print("\nranking:", " > ".join(r["model_id"] for r in ranking))
