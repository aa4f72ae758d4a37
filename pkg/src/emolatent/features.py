"""Canonical eGeMAPS functional feature set (88 names) and feature grouping.

The feature order below is the canonical column order for corpus CSVs and
the index order of every 88-dimensional vector in this package.  The group
assignment collapses the 88 functionals into the coarse acoustic families
used for attribution summaries; it ships as an editable CSV
(``feature_groups.csv``) so a custom grouping can be swapped in.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

from .errors import DataError

FEATURE_DIM = 88

# fmt: off
FEATURE_NAMES: tuple[str, ...] = (
    "F0semitoneFrom27.5Hz_sma3nz_amean",
    "F0semitoneFrom27.5Hz_sma3nz_stddevNorm",
    "F0semitoneFrom27.5Hz_sma3nz_percentile20.0",
    "F0semitoneFrom27.5Hz_sma3nz_percentile50.0",
    "F0semitoneFrom27.5Hz_sma3nz_percentile80.0",
    "F0semitoneFrom27.5Hz_sma3nz_pctlrange0-2",
    "F0semitoneFrom27.5Hz_sma3nz_meanRisingSlope",
    "F0semitoneFrom27.5Hz_sma3nz_stddevRisingSlope",
    "F0semitoneFrom27.5Hz_sma3nz_meanFallingSlope",
    "F0semitoneFrom27.5Hz_sma3nz_stddevFallingSlope",
    "loudness_sma3_amean",
    "loudness_sma3_stddevNorm",
    "loudness_sma3_percentile20.0",
    "loudness_sma3_percentile50.0",
    "loudness_sma3_percentile80.0",
    "loudness_sma3_pctlrange0-2",
    "loudness_sma3_meanRisingSlope",
    "loudness_sma3_stddevRisingSlope",
    "loudness_sma3_meanFallingSlope",
    "loudness_sma3_stddevFallingSlope",
    "spectralFlux_sma3_amean",
    "spectralFlux_sma3_stddevNorm",
    "mfcc1_sma3_amean",
    "mfcc1_sma3_stddevNorm",
    "mfcc2_sma3_amean",
    "mfcc2_sma3_stddevNorm",
    "mfcc3_sma3_amean",
    "mfcc3_sma3_stddevNorm",
    "mfcc4_sma3_amean",
    "mfcc4_sma3_stddevNorm",
    "jitterLocal_sma3nz_amean",
    "jitterLocal_sma3nz_stddevNorm",
    "shimmerLocaldB_sma3nz_amean",
    "shimmerLocaldB_sma3nz_stddevNorm",
    "HNRdBACF_sma3nz_amean",
    "HNRdBACF_sma3nz_stddevNorm",
    "logRelF0-H1-H2_sma3nz_amean",
    "logRelF0-H1-H2_sma3nz_stddevNorm",
    "logRelF0-H1-A3_sma3nz_amean",
    "logRelF0-H1-A3_sma3nz_stddevNorm",
    "F1frequency_sma3nz_amean",
    "F1frequency_sma3nz_stddevNorm",
    "F1bandwidth_sma3nz_amean",
    "F1bandwidth_sma3nz_stddevNorm",
    "F1amplitudeLogRelF0_sma3nz_amean",
    "F1amplitudeLogRelF0_sma3nz_stddevNorm",
    "F2frequency_sma3nz_amean",
    "F2frequency_sma3nz_stddevNorm",
    "F2bandwidth_sma3nz_amean",
    "F2bandwidth_sma3nz_stddevNorm",
    "F2amplitudeLogRelF0_sma3nz_amean",
    "F2amplitudeLogRelF0_sma3nz_stddevNorm",
    "F3frequency_sma3nz_amean",
    "F3frequency_sma3nz_stddevNorm",
    "F3bandwidth_sma3nz_amean",
    "F3bandwidth_sma3nz_stddevNorm",
    "F3amplitudeLogRelF0_sma3nz_amean",
    "F3amplitudeLogRelF0_sma3nz_stddevNorm",
    "alphaRatioV_sma3nz_amean",
    "alphaRatioV_sma3nz_stddevNorm",
    "hammarbergIndexV_sma3nz_amean",
    "hammarbergIndexV_sma3nz_stddevNorm",
    "slopeV0-500_sma3nz_amean",
    "slopeV0-500_sma3nz_stddevNorm",
    "slopeV500-1500_sma3nz_amean",
    "slopeV500-1500_sma3nz_stddevNorm",
    "spectralFluxV_sma3nz_amean",
    "spectralFluxV_sma3nz_stddevNorm",
    "mfcc1V_sma3nz_amean",
    "mfcc1V_sma3nz_stddevNorm",
    "mfcc2V_sma3nz_amean",
    "mfcc2V_sma3nz_stddevNorm",
    "mfcc3V_sma3nz_amean",
    "mfcc3V_sma3nz_stddevNorm",
    "mfcc4V_sma3nz_amean",
    "mfcc4V_sma3nz_stddevNorm",
    "alphaRatioUV_sma3nz_amean",
    "hammarbergIndexUV_sma3nz_amean",
    "slopeUV0-500_sma3nz_amean",
    "slopeUV500-1500_sma3nz_amean",
    "spectralFluxUV_sma3nz_amean",
    "loudnessPeaksPerSec",
    "VoicedSegmentsPerSec",
    "MeanVoicedSegmentLengthSec",
    "StddevVoicedSegmentLengthSec",
    "MeanUnvoicedSegmentLength",
    "StddevUnvoicedSegmentLength",
    "equivalentSoundLevel_dBp",
)
# fmt: on

GROUP_LABELS: tuple[str, ...] = (
    "Pitch",
    "Loudness",
    "Spectral flux",
    "Jitter",
    "Shimmer",
    "Harmonics",
    "F1",
    "F2",
    "F3",
    "Alpha ratio",
    "Hammerberg Index",
    "Spectral slopes",
    "MFCC",
    "HNR",
    "Segment statistics",
    "Equivalent sound level",
)

# Prefix rules, first match wins; "loudnessPeaksPerSec" must be tested
# before the "loudness_" rule.
_PREFIX_GROUPS: tuple[tuple[str, str], ...] = (
    ("F0semitone", "Pitch"),
    ("loudnessPeaksPerSec", "Segment statistics"),
    ("loudness_", "Loudness"),
    ("spectralFlux", "Spectral flux"),
    ("mfcc", "MFCC"),
    ("jitter", "Jitter"),
    ("shimmer", "Shimmer"),
    ("HNR", "HNR"),
    ("logRelF0", "Harmonics"),
    ("F1", "F1"),
    ("F2", "F2"),
    ("F3", "F3"),
    ("alphaRatio", "Alpha ratio"),
    ("hammarbergIndex", "Hammerberg Index"),
    ("slope", "Spectral slopes"),
    ("VoicedSegmentsPerSec", "Segment statistics"),
    ("MeanVoicedSegmentLengthSec", "Segment statistics"),
    ("StddevVoicedSegmentLengthSec", "Segment statistics"),
    ("MeanUnvoicedSegmentLength", "Segment statistics"),
    ("StddevUnvoicedSegmentLength", "Segment statistics"),
    ("equivalentSoundLevel", "Equivalent sound level"),
)


def default_grouping() -> dict[str, str]:
    """Return the built-in mapping from each feature name to its group."""
    mapping = {}
    for name in FEATURE_NAMES:
        for prefix, group in _PREFIX_GROUPS:
            if name.startswith(prefix):
                mapping[name] = group
                break
        else:
            raise AssertionError(f"no group rule for feature {name!r}")
    return mapping


def load_grouping(path: str | Path) -> dict[str, str]:
    """Load a feature grouping from a two-column CSV (feature_name, group).

    The grouping must be total: every one of the 88 canonical features must
    be mapped exactly once.
    """
    mapping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["feature_name", "group"]:
            raise DataError(f"{path}: expected header 'feature_name,group'")
        for row in reader:
            if not row:
                continue
            if len(row) < 2:
                raise DataError(f"{path}: malformed row {row!r}")
            name, group = row[0].strip(), row[1].strip()
            if name in mapping:
                raise DataError(f"{path}: feature {name!r} mapped twice")
            mapping[name] = group
    missing = [n for n in FEATURE_NAMES if n not in mapping]
    if missing:
        raise DataError(f"{path}: grouping missing {len(missing)} features, e.g. {missing[0]!r}")
    unknown = [n for n in mapping if n not in FEATURE_NAMES]
    if unknown:
        raise DataError(f"{path}: grouping names unknown feature {unknown[0]!r}")
    return mapping


def write_grouping(mapping: dict[str, str], path: str | Path) -> None:
    """Write a grouping as the editable two-column CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_name", "group"])
        for name in FEATURE_NAMES:
            writer.writerow([name, mapping[name]])


def packaged_grouping() -> dict[str, str]:
    """Load the grouping CSV shipped with the package."""
    ref = resources.files(__package__).joinpath("feature_groups.csv")
    with resources.as_file(ref) as path:
        return load_grouping(path)
