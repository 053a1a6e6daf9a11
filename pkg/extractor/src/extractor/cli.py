"""Command-line entry point: one video in, one feature directory out."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import BackendUnavailable
from .job import ExtractionError, ExtractionJob, extract_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="headeval-extract",
        description="Extract per-frame feature files from a talking-head video.",
    )
    parser.add_argument("--input", required=True, help="source video")
    parser.add_argument("--out", required=True, help="feature directory to write")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--landmarks", default="classical",
                        help="landmark backend (classical, mediapipe)")
    parser.add_argument("--pose", default="classical")
    parser.add_argument("--iqa", default="classical",
                        help="IQA backend (classical, pyiqa)")
    parser.add_argument("--vad", default="energy",
                        help="VAD backend (energy, silero)")
    parser.add_argument("--audio", default=None,
                        help="sidecar PCM wav (default: <input stem>.wav if present)")
    parser.add_argument("--min-coverage", type=float, default=0.5)
    parser.add_argument("--crop-margin", type=float, default=0.2)
    parser.add_argument("--overwrite", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExtractionJob(
        input_video=Path(args.input),
        output_dir=Path(args.out),
        landmark_backend=args.landmarks,
        pose_backend=args.pose,
        iqa_backend=args.iqa,
        vad_backend=args.vad,
        device=args.device,
        min_coverage=args.min_coverage,
        crop_margin=args.crop_margin,
        overwrite=args.overwrite,
        audio_sidecar=Path(args.audio) if args.audio else None,
    )
    try:
        out = extract_features(job)
    except (ExtractionError, BackendUnavailable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
