"""Corpus ingestion, preprocessing, fold splitting and class filtering.

A corpus is a named collection of labeled samples, each carrying an
88-dimensional feature vector of eGeMAPS functionals plus a categorical
emotion label and optional valence/activation annotations.  Feature
extraction from audio is out of scope: features arrive as CSV, one row per
utterance, columns named by the canonical feature names.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError
from .features import FEATURE_DIM, FEATURE_NAMES


class EmotionLabel(Enum):
    """The four emotion categories shared by all corpora.

    The declaration order (neutral < sad < happy < angry) is the canonical
    class order used for classifier tie-breaking and report layout.
    """

    NEUTRAL = "neutral"
    SAD = "sad"
    HAPPY = "happy"
    ANGRY = "angry"

    @classmethod
    def parse(cls, text: str) -> "EmotionLabel":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DataError(f"unknown emotion label {text!r}") from None

    @property
    def short(self) -> str:
        return {"neutral": "N", "sad": "S", "happy": "H", "angry": "A"}[self.value]


CLASS_ORDER: tuple[EmotionLabel, ...] = (
    EmotionLabel.NEUTRAL,
    EmotionLabel.SAD,
    EmotionLabel.HAPPY,
    EmotionLabel.ANGRY,
)

# Non-feature columns recognized in a corpus CSV.
LABEL_COLUMN = "label"
OPTIONAL_COLUMNS = ("valence", "activation", "speaker", "id")


def validate_feature_vector(values: np.ndarray) -> np.ndarray:
    """Check the 88-dim / all-finite invariants and return a float64 copy."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (FEATURE_DIM,):
        raise DataError(f"feature vector must have {FEATURE_DIM} entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise DataError(f"feature vector has non-finite entry at index {bad}")
    return arr


@dataclass(eq=False)
class LabeledSample:
    features: np.ndarray
    label: EmotionLabel
    valence: float | None = None
    activation: float | None = None
    speaker_id: str = ""
    sample_id: str = ""

    def __post_init__(self):
        self.features = validate_feature_vector(self.features)
        for name in ("valence", "activation"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise DataError(f"sample {self.sample_id!r}: non-finite {name}")


@dataclass(eq=False)
class Corpus:
    name: str
    language: str
    samples: list[LabeledSample] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    def feature_matrix(self) -> np.ndarray:
        """All feature vectors stacked into an (n_samples, 88) array."""
        if not self.samples:
            return np.empty((0, FEATURE_DIM))
        return np.stack([s.features for s in self.samples])

    def labels(self) -> list[EmotionLabel]:
        return [s.label for s in self.samples]

    def sample_ids(self) -> list[str]:
        return [s.sample_id for s in self.samples]

    def classes_present(self) -> list[EmotionLabel]:
        present = {s.label for s in self.samples}
        return [c for c in CLASS_ORDER if c in present]


def _check_unique_ids(samples: list[LabeledSample], context: str) -> None:
    seen: set[str] = set()
    for s in samples:
        if s.sample_id in seen:
            raise DataError(f"{context}: duplicate sample id {s.sample_id!r}")
        seen.add(s.sample_id)


@dataclass
class Standardizer:
    """Per-feature location/scale; zero-variance columns get scale 1 and a flag."""

    means: np.ndarray
    stddevs: np.ndarray
    degenerate: np.ndarray  # bool mask of zero-variance columns

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=np.float64)
        self.stddevs = np.asarray(self.stddevs, dtype=np.float64)
        self.degenerate = np.asarray(self.degenerate, dtype=bool)
        if not (self.means.shape == self.stddevs.shape == self.degenerate.shape):
            raise ValueError("standardizer field shapes differ")
        if np.any(self.stddevs <= 0):
            raise ValueError("standardizer stddevs must be strictly positive")

    def to_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "stddevs": self.stddevs.tolist(),
            "degenerate": [bool(b) for b in self.degenerate],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(
            means=np.array(d["means"], dtype=np.float64),
            stddevs=np.array(d["stddevs"], dtype=np.float64),
            degenerate=np.array(d["degenerate"], dtype=bool),
        )


@dataclass
class FoldSplit:
    """Assignment of every sample id to one of k folds."""

    k: int
    assignments: dict[str, int]

    def fold_of(self, sample_id: str) -> int:
        return self.assignments[sample_id]

    def indices(self, corpus: Corpus, fold: int) -> list[int]:
        """Corpus-order indices of the samples assigned to `fold`."""
        return [i for i, s in enumerate(corpus.samples) if self.assignments[s.sample_id] == fold]

    def complement_indices(self, corpus: Corpus, fold: int) -> list[int]:
        """Corpus-order indices of the samples NOT in `fold` (the training part)."""
        return [i for i, s in enumerate(corpus.samples) if self.assignments[s.sample_id] != fold]


def _resolve_header(header: list[str], schema: dict[str, str] | None) -> list[str]:
    if schema:
        header = [schema.get(h, h) for h in header]
    return header


def parse_corpus(
    path: str | Path,
    schema: dict[str, str] | None = None,
    name: str | None = None,
    language: str = "",
) -> Corpus:
    """Read a corpus CSV into a Corpus.

    The header must name all 88 canonical feature columns plus `label`;
    `valence`, `activation`, `speaker` and `id` are optional.  `schema`
    remaps file column names to canonical ones before validation.
    Any other column is rejected.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"corpus file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        raw_header = next(reader, None)
        if raw_header is None:
            raise DataError(f"{path}: empty file (no header)")
        header = _resolve_header([h.strip() for h in raw_header], schema)
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise DataError(f"{path}: duplicate column(s) {dupes}")
        col_index = {h: i for i, h in enumerate(header)}

        missing = [f for f in FEATURE_NAMES if f not in col_index]
        if missing:
            raise DataError(
                f"{path}: missing {len(missing)} feature column(s), e.g. {missing[0]!r}"
            )
        if LABEL_COLUMN not in col_index:
            raise DataError(f"{path}: missing required column 'label'")
        known = set(FEATURE_NAMES) | {LABEL_COLUMN} | set(OPTIONAL_COLUMNS)
        extra = [h for h in header if h not in known]
        if extra:
            raise DataError(f"{path}: unexpected column(s) {extra}")

        feat_cols = [col_index[f] for f in FEATURE_NAMES]
        samples: list[LabeledSample] = []
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            values = np.empty(FEATURE_DIM)
            for j, col in enumerate(feat_cols):
                cell = row[col].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_no}, column {header[col]!r} (feature index {j}): "
                        f"unparseable numeric cell {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(
                        f"{path}: row {row_no}, column {header[col]!r} (feature index {j}): "
                        f"non-finite value {cell!r}"
                    )
                values[j] = v
            label = EmotionLabel.parse(row[col_index[LABEL_COLUMN]])

            def _opt_float(col_name: str) -> float | None:
                if col_name not in col_index:
                    return None
                cell = row[col_index[col_name]].strip()
                if cell == "":
                    return None
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_no}, column {col_name!r}: unparseable value {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: row {row_no}, column {col_name!r}: non-finite value")
                return v

            speaker = row[col_index["speaker"]].strip() if "speaker" in col_index else ""
            sample_id = row[col_index["id"]].strip() if "id" in col_index else f"row{row_no}"
            samples.append(
                LabeledSample(
                    features=values,
                    label=label,
                    valence=_opt_float("valence"),
                    activation=_opt_float("activation"),
                    speaker_id=speaker,
                    sample_id=sample_id,
                )
            )
    if not samples:
        raise DataError(f"{path}: corpus is empty (no data rows)")
    _check_unique_ids(samples, str(path))
    return Corpus(name=name if name is not None else path.stem, language=language, samples=samples)


def load_schema(path: str | Path) -> dict[str, str]:
    """Load a schema.json sidecar mapping file column names to canonical ones."""
    import json

    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read schema {path}: {exc}") from exc
    if not isinstance(raw, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in raw.items()
    ):
        raise DataError(f"{path}: schema must be a flat string-to-string mapping")
    return raw


def write_corpus_csv(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in canonical CSV form (floats at 17 significant digits)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "speaker", "label", "valence", "activation", *FEATURE_NAMES])
        for s in corpus.samples:
            writer.writerow(
                [
                    s.sample_id,
                    s.speaker_id,
                    s.label.value,
                    "" if s.valence is None else f"{s.valence:.17g}",
                    "" if s.activation is None else f"{s.activation:.17g}",
                    *(f"{v:.17g}" for v in s.features),
                ]
            )


def fit_standardizer(corpus: Corpus) -> Standardizer:
    """Per-column mean and population standard deviation of a corpus.

    Zero-variance columns are flagged degenerate and given stddev 1 so the
    pipeline keeps working on constant synthetic features.
    """
    if not corpus.samples:
        raise DataError("cannot fit standardizer on an empty corpus")
    x = corpus.feature_matrix()
    means = x.mean(axis=0)
    stds = x.std(axis=0)  # population (ddof=0)
    degenerate = stds == 0.0
    stds = np.where(degenerate, 1.0, stds)
    return Standardizer(means=means, stddevs=stds, degenerate=degenerate)


def apply_standardizer(corpus: Corpus, stats: Standardizer) -> Corpus:
    """Replace every feature x by (x - mean) / stddev; metadata unchanged."""
    out = []
    for s in corpus.samples:
        z = (s.features - stats.means) / stats.stddevs
        out.append(replace(s, features=z))
    return Corpus(name=corpus.name, language=corpus.language, samples=out)


def remove_outliers(corpus: Corpus, stats: Standardizer, threshold: float = 10.0) -> Corpus:
    """Drop samples with any per-feature |z-score| above `threshold`.

    Keeps exactly the samples whose z-scores all satisfy |z| <= threshold,
    in the original order.  An empty result signals pathological statistics
    and is an error.
    """
    if threshold <= 0:
        raise ValueError("outlier threshold must be positive")
    kept = []
    for s in corpus.samples:
        z = (s.features - stats.means) / stats.stddevs
        if np.max(np.abs(z)) <= threshold:
            kept.append(s)
    if not kept:
        raise DataError(
            f"outlier removal on corpus {corpus.name!r} removed every sample "
            f"(threshold {threshold}); statistics are pathological"
        )
    return Corpus(name=corpus.name, language=corpus.language, samples=kept)


def kfold_split(corpus: Corpus, k: int, seed: int, stratify: bool = True) -> FoldSplit:
    """Deterministic, size-balanced k-fold assignment, stratified by label.

    Fold sizes differ by at most one globally and within every class.  With
    `stratify=False` the assignment is a plain shuffled round-robin.
    """
    n = len(corpus.samples)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise DataError(f"k={k} exceeds corpus size {n}")
    rng = np.random.default_rng(seed)
    if stratify:
        groups = [
            [i for i, s in enumerate(corpus.samples) if s.label == c]
            for c in CLASS_ORDER
        ]
        groups = [g for g in groups if g]
    else:
        groups = [list(range(n))]

    assignments: dict[str, int] = {}
    next_fold = 0
    for group in groups:
        order = rng.permutation(len(group))
        for j, pos in enumerate(order):
            sample = corpus.samples[group[pos]]
            assignments[sample.sample_id] = (next_fold + j) % k
        next_fold = (next_fold + len(group)) % k
    return FoldSplit(k=k, assignments=assignments)


def filter_classes(corpus: Corpus, keep: set[EmotionLabel]) -> Corpus:
    """Keep only samples whose label is in `keep`, order preserved."""
    if not keep:
        raise ValueError("keep set must be non-empty")
    kept = [s for s in corpus.samples if s.label in keep]
    return Corpus(name=corpus.name, language=corpus.language, samples=kept)


def subset(corpus: Corpus, indices: list[int]) -> Corpus:
    """Corpus restricted to the given corpus-order indices."""
    return Corpus(
        name=corpus.name,
        language=corpus.language,
        samples=[corpus.samples[i] for i in indices],
    )
