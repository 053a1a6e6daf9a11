"""Corpus manifest: which feature directories belong to which model."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusManifest:
    """Per-model feature-directory mapping over a common video-id list."""

    root: Path
    gt_dir: Path
    model_dirs: dict[str, Path]
    video_ids: tuple[str, ...]
    topology_path: Path | None

    def video_dir(self, model_dir: Path, video_id: str) -> Path:
        return model_dir / video_id


def load_manifest(path: str | Path) -> CorpusManifest:
    """Load and check a manifest file.

    Paths are resolved relative to the manifest's directory. Every listed
    directory must exist, and every model must cover at least the common
    video-id list.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON: {exc}") from exc

    root = path.parent
    gt_rel = raw.get("ground_truth")
    if not isinstance(gt_rel, str):
        raise ManifestError(f"{path}: 'ground_truth' must be a directory path")
    video_ids = raw.get("video_ids")
    if not isinstance(video_ids, list) or not all(isinstance(v, str) for v in video_ids):
        raise ManifestError(f"{path}: 'video_ids' must be a list of strings")
    if not video_ids:
        raise ManifestError(f"{path}: 'video_ids' is empty")
    models_raw = raw.get("models", {})
    if not isinstance(models_raw, dict):
        raise ManifestError(f"{path}: 'models' must map model ids to directories")

    gt_dir = root / gt_rel
    model_dirs = {name: root / rel for name, rel in sorted(models_raw.items())}
    for label, directory in [("ground_truth", gt_dir)] + list(model_dirs.items()):
        if not directory.is_dir():
            raise ManifestError(f"{path}: {label} directory missing: {directory}")
        missing = [v for v in video_ids if not (directory / v).is_dir()]
        if missing:
            raise ManifestError(
                f"{path}: {label} lacks video directories: {', '.join(missing)}"
            )

    topo_rel = raw.get("topology")
    topology_path = (root / topo_rel) if isinstance(topo_rel, str) else None
    if topology_path is not None and not topology_path.is_file():
        raise ManifestError(f"{path}: topology file missing: {topology_path}")

    return CorpusManifest(
        root=root,
        gt_dir=gt_dir,
        model_dirs=model_dirs,
        video_ids=tuple(video_ids),
        topology_path=topology_path,
    )
