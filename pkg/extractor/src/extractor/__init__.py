"""Feature extraction adapter: raw videos to canonical feature files."""

from .backends import BackendUnavailable
from .crop import crop_regions, expand_and_clip
from .job import CoverageError, ExtractionError, ExtractionJob, extract_features

__all__ = [
    "BackendUnavailable",
    "CoverageError",
    "ExtractionError",
    "ExtractionJob",
    "crop_regions",
    "expand_and_clip",
    "extract_features",
]
