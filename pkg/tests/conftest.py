import csv
from pathlib import Path

import numpy as np
import pytest

from emolatent.data import Corpus, EmotionLabel, LabeledSample, parse_corpus
from emolatent.features import FEATURE_NAMES

FIXTURE_CSV = Path(__file__).parent / "data" / "fixture_corpus.csv"


@pytest.fixture(scope="session")
def fixture_corpus_path() -> Path:
    return FIXTURE_CSV


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    return parse_corpus(FIXTURE_CSV, name="fixture")


def make_sample(features, label=EmotionLabel.NEUTRAL, sample_id="s0", **kw) -> LabeledSample:
    return LabeledSample(features=np.asarray(features, dtype=float), label=label, sample_id=sample_id, **kw)


def make_corpus(feature_rows, labels, name="test") -> Corpus:
    samples = [
        make_sample(row, label=lab, sample_id=f"s{i}")
        for i, (row, lab) in enumerate(zip(feature_rows, labels))
    ]
    return Corpus(name=name, language="xx", samples=samples)


def random_corpus(rng, n, labels=None, name="test") -> Corpus:
    rows = rng.standard_normal((n, 88))
    if labels is None:
        classes = list(EmotionLabel)
        labels = [classes[i % 4] for i in range(n)]
    return make_corpus(rows, labels, name=name)


def write_csv(path, rows, header=None, feature_names=None):
    """Write a minimal corpus CSV; rows are dicts of column -> string value."""
    feature_names = feature_names if feature_names is not None else list(FEATURE_NAMES)
    header = header if header is not None else ["label", *feature_names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row.get(col, "0.0") for col in header])
    return path
