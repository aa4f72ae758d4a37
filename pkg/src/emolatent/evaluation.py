"""Experiment orchestration: k-fold cross-validation, triads, metrics, export.

The protocol: the training corpus is preprocessed once, split into k
stratified folds, and for every fold each embedding method (raw features,
PCA, undercomplete AE, denoising AE) is fitted on the training folds only.
A linear SVC is then trained on the training-fold embeddings and evaluated
on the training folds, the held-out fold and every transfer corpus, which
stay fixed across folds and are never used in any fit step.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as _scipy_stats

from .attribution import AttributionResult
from .autoencoder import (
    AutoencoderConfig,
    LatentEmbedding,
    TrainedAutoencoder,
    encode,
    train as train_autoencoder,
)
from .baselines import PcaModel, SvcModel, pca_fit, pca_transform, svc_fit, svc_predict
from .data import (
    CLASS_ORDER,
    Corpus,
    EmotionLabel,
    Standardizer,
    apply_standardizer,
    filter_classes,
    fit_standardizer,
    kfold_split,
    remove_outliers,
    subset,
)
from .errors import DataError
from .features import FEATURE_NAMES
from .nn import forward

METHODS = ("raw", "pca", "uae", "dae")


# ---------------------------------------------------------------------------
# Metrics


def unweighted_accuracy(preds: list[EmotionLabel], labels: list[EmotionLabel]) -> float:
    """Mean per-class recall over the classes present in `labels`."""
    if len(preds) != len(labels):
        raise ValueError("preds/labels length mismatch")
    if not labels:
        raise ValueError("cannot score empty prediction lists")
    recalls = []
    for cls in CLASS_ORDER:
        total = sum(1 for lab in labels if lab == cls)
        if total == 0:
            continue
        correct = sum(1 for p, lab in zip(preds, labels) if lab == cls and p == cls)
        recalls.append(correct / total)
    return float(np.mean(recalls))


def sample_accuracy(preds: list[EmotionLabel], labels: list[EmotionLabel]) -> float:
    """Plain per-sample accuracy, for comparison with the unweighted score."""
    if len(preds) != len(labels):
        raise ValueError("preds/labels length mismatch")
    if not labels:
        raise ValueError("cannot score empty prediction lists")
    return float(np.mean([p == lab for p, lab in zip(preds, labels)]))


@dataclass(eq=False)
class ConfusionMatrix:
    classes: list[EmotionLabel]
    counts: np.ndarray  # (C, C) ints, row = true, column = predicted
    normalized: np.ndarray  # rows divided by the true-label totals

    @classmethod
    def from_counts(cls, classes: list[EmotionLabel], counts: np.ndarray) -> "ConfusionMatrix":
        counts = np.asarray(counts, dtype=np.int64)
        row_sums = counts.sum(axis=1, keepdims=True)
        normalized = np.divide(
            counts, row_sums, out=np.zeros(counts.shape, dtype=np.float64), where=row_sums > 0
        )
        return cls(classes=list(classes), counts=counts, normalized=normalized)


def confusion_matrix(
    preds: list[EmotionLabel], labels: list[EmotionLabel], classes: list[EmotionLabel]
) -> ConfusionMatrix:
    """counts[i][j] = #(true class i, predicted class j), rows normalized."""
    if len(preds) != len(labels):
        raise ValueError("preds/labels length mismatch")
    index = {c: i for i, c in enumerate(classes)}
    observed = set(preds) | set(labels)
    if not observed <= set(classes):
        raise ValueError("classes must cover every observed label")
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for p, lab in zip(preds, labels):
        counts[index[lab], index[p]] += 1
    return ConfusionMatrix.from_counts(classes, counts)


def mean_ci(values: list[float], confidence: float = 0.95) -> tuple[float, float, float]:
    """Mean and Student-t confidence interval over fold values."""
    arr = np.asarray(values, dtype=np.float64)
    m = float(arr.mean())
    if arr.size < 2:
        return m, m, m
    half = float(
        _scipy_stats.t.ppf(0.5 + confidence / 2.0, arr.size - 1)
        * arr.std(ddof=1)
        / np.sqrt(arr.size)
    )
    return m, m - half, m + half


# ---------------------------------------------------------------------------
# Preprocessing policy


@dataclass
class PreprocessingOptions:
    threshold: float = 10.0
    zscore_scope: str = "train"  # 'train' | 'per-corpus'
    standardize_scope: str = "per-corpus"  # 'per-corpus' | 'train-stats'

    def __post_init__(self):
        if self.zscore_scope not in ("train", "per-corpus"):
            raise ValueError(f"invalid zscore scope {self.zscore_scope!r}")
        if self.standardize_scope not in ("per-corpus", "train-stats"):
            raise ValueError(f"invalid standardize scope {self.standardize_scope!r}")

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "zscore_scope": self.zscore_scope,
            "standardize_scope": self.standardize_scope,
        }


@dataclass
class PreprocessingInfo:
    """The fitted preprocessing policy: outlier statistics and train-corpus scaler."""

    options: PreprocessingOptions
    outlier_stats: Standardizer
    train_standardizer: Standardizer

    def apply(self, corpus: Corpus) -> Corpus:
        """Outlier removal then standardization of a raw corpus, per policy."""
        z_stats = (
            self.outlier_stats
            if self.options.zscore_scope == "train"
            else fit_standardizer(corpus)
        )
        trimmed = remove_outliers(corpus, z_stats, self.options.threshold)
        scaler = (
            self.train_standardizer
            if self.options.standardize_scope == "train-stats"
            else fit_standardizer(trimmed)
        )
        return apply_standardizer(trimmed, scaler)

    def to_dict(self) -> dict:
        return {
            "options": self.options.to_dict(),
            "outlier_stats": self.outlier_stats.to_dict(),
            "train_standardizer": self.train_standardizer.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessingInfo":
        return cls(
            options=PreprocessingOptions(**d["options"]),
            outlier_stats=Standardizer.from_dict(d["outlier_stats"]),
            train_standardizer=Standardizer.from_dict(d["train_standardizer"]),
        )


def preprocess_corpora(
    train: Corpus,
    transfers: dict[str, Corpus],
    options: PreprocessingOptions | None = None,
) -> tuple[Corpus, dict[str, Corpus], PreprocessingInfo]:
    """Fit the preprocessing policy on the raw training corpus, apply everywhere."""
    options = options or PreprocessingOptions()
    outlier_stats = fit_standardizer(train)
    trimmed_train = remove_outliers(train, outlier_stats, options.threshold)
    info = PreprocessingInfo(
        options=options,
        outlier_stats=outlier_stats,
        train_standardizer=fit_standardizer(trimmed_train),
    )
    return info.apply(train), {name: info.apply(c) for name, c in transfers.items()}, info


# ---------------------------------------------------------------------------
# Triads


@dataclass(frozen=True)
class TriadSpec:
    classes: tuple[EmotionLabel, EmotionLabel, EmotionLabel]

    def __post_init__(self):
        if len(set(self.classes)) != 3:
            raise ValueError("a triad needs exactly 3 distinct classes")
        ordered = tuple(c for c in CLASS_ORDER if c in self.classes)
        object.__setattr__(self, "classes", ordered)

    @property
    def name(self) -> str:
        return "-".join(c.short for c in self.classes)

    @classmethod
    def parse(cls, text: str) -> "TriadSpec":
        by_short = {c.short: c for c in CLASS_ORDER}
        parts = [p.strip().upper() for p in text.split("-")]
        if len(parts) != 3 or any(p not in by_short for p in parts):
            raise ValueError(f"cannot parse triad {text!r} (expected e.g. 'N-S-A')")
        return cls(classes=tuple(by_short[p] for p in parts))


ALL_TRIADS: tuple[TriadSpec, ...] = (
    TriadSpec((EmotionLabel.NEUTRAL, EmotionLabel.SAD, EmotionLabel.HAPPY)),
    TriadSpec((EmotionLabel.NEUTRAL, EmotionLabel.SAD, EmotionLabel.ANGRY)),
    TriadSpec((EmotionLabel.NEUTRAL, EmotionLabel.HAPPY, EmotionLabel.ANGRY)),
    TriadSpec((EmotionLabel.SAD, EmotionLabel.HAPPY, EmotionLabel.ANGRY)),
)


# ---------------------------------------------------------------------------
# Fitted pipelines (embedding method + classifier, as trained on one fold)


@dataclass(eq=False)
class FittedPipeline:
    method: str
    classes: list[EmotionLabel]
    svc: SvcModel | None = None  # attached after the embedder is fitted
    autoencoder: TrainedAutoencoder | None = None
    pca: PcaModel | None = None
    preprocessing: PreprocessingInfo | None = None

    @property
    def has_latent(self) -> bool:
        return self.method != "raw"

    def embed(self, corpus: Corpus) -> np.ndarray:
        x = corpus.feature_matrix()
        if self.method == "raw":
            return x
        if self.method == "pca":
            return pca_transform(self.pca, x)
        return forward(self.autoencoder.encoder, x).output

    def predict(self, corpus: Corpus) -> list[EmotionLabel]:
        return svc_predict(self.svc, self.embed(corpus))

    def to_dict(self) -> dict:
        d = {
            "format": "emolatent-pipeline",
            "version": 1,
            "method": self.method,
            "classes": [c.value for c in self.classes],
            "svc": self.svc.to_dict(),
        }
        if self.autoencoder is not None:
            d["autoencoder"] = self.autoencoder.to_dict()
        if self.pca is not None:
            d["pca"] = self.pca.to_dict()
        if self.preprocessing is not None:
            d["preprocessing"] = self.preprocessing.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FittedPipeline":
        if d.get("format") != "emolatent-pipeline":
            raise DataError("not a serialized pipeline")
        return cls(
            method=d["method"],
            classes=[EmotionLabel(v) for v in d["classes"]],
            svc=SvcModel.from_dict(d["svc"]),
            autoencoder=(
                TrainedAutoencoder.from_dict(d["autoencoder"]) if "autoencoder" in d else None
            ),
            pca=PcaModel.from_dict(d["pca"]) if "pca" in d else None,
            preprocessing=(
                PreprocessingInfo.from_dict(d["preprocessing"]) if "preprocessing" in d else None
            ),
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str | Path) -> "FittedPipeline":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"model file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DataError(f"cannot load pipeline from {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Cross-validation


@dataclass(eq=False)
class ExperimentReport:
    seed: int
    k: int
    methods: list[str]
    datasets: list[str]
    classes: list[EmotionLabel]
    chance_level: float
    fold_uar: dict = field(default_factory=dict)  # method -> dataset -> [k floats]
    fold_sample_acc: dict = field(default_factory=dict)
    confusion: dict = field(default_factory=dict)  # method -> dataset -> ConfusionMatrix
    latents: dict = field(default_factory=dict)  # method -> dataset -> [LatentEmbedding]
    pipelines: dict = field(default_factory=dict)  # method -> fold-0 FittedPipeline
    attributions: dict = field(default_factory=dict)  # class -> dim -> [AttributionResult]
    grouping: dict | None = None
    config: dict = field(default_factory=dict)

    def uar_summary(self, method: str, dataset: str) -> tuple[float, float, float]:
        return mean_ci(self.fold_uar[method][dataset])


def empty_report(seed: int = 0, k: int = 0) -> ExperimentReport:
    return ExperimentReport(
        seed=seed, k=k, methods=[], datasets=[], classes=[], chance_level=0.0
    )


def _fit_method(
    method: str,
    train_fold: Corpus,
    fold_seed: int,
    ae_template: AutoencoderConfig,
) -> FittedPipeline:
    """Fit one embedding method on the training folds (classifier added later)."""
    if method == "raw":
        return FittedPipeline(method="raw", classes=[])
    if method == "pca":
        model = pca_fit(train_fold.feature_matrix(), 2)
        return FittedPipeline(method="pca", classes=[], pca=model)
    if method in ("uae", "dae"):
        cfg = AutoencoderConfig(
            encoder_widths=ae_template.encoder_widths,
            noise_std=ae_template.noise_std if method == "dae" else 0.0,
            epochs=ae_template.epochs,
            batch_size=ae_template.batch_size,
            lr=ae_template.lr,
            seed=fold_seed,
        )
        return FittedPipeline(
            method=method, classes=[], autoencoder=train_autoencoder(train_fold, cfg)
        )
    raise ValueError(f"unknown method {method!r} (expected one of {METHODS})")


def _attach_context(exc: Exception, fold: int, method: str) -> None:
    exc.args = (f"[fold {fold}, method {method}] {exc}",)


def run_cross_validation(
    train: Corpus,
    transfers: dict[str, Corpus],
    methods: list[str],
    k: int = 10,
    seed: int = 0,
    ae_template: AutoencoderConfig | None = None,
    svc_reg: float = 0.001,
    svc_iterations: int = 2000,
    stratify: bool = True,
    preprocessing: PreprocessingInfo | None = None,
    config_echo: dict | None = None,
) -> ExperimentReport:
    """k-fold cross-validation of every method over train/valid/transfer sets.

    `train` and the transfer corpora must already be preprocessed.  Per
    fold, each method's embedder is fitted on the training folds, the SVC
    on the training-fold embeddings.  Transfer corpora are evaluation-only.
    Deterministic for fixed inputs and seed: per-fold autoencoder seeds are
    derived as seed XOR fold index.
    """
    ae_template = ae_template or AutoencoderConfig(noise_std=1.0)
    for name in transfers:
        if name in ("train", "valid"):
            raise DataError(f"transfer corpus name {name!r} collides with a reserved dataset name")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; expected a subset of {METHODS}")

    classes = train.classes_present()
    datasets = ["train", "valid", *transfers.keys()]
    report = ExperimentReport(
        seed=seed,
        k=k,
        methods=list(methods),
        datasets=datasets,
        classes=classes,
        chance_level=1.0 / len(classes) if classes else 0.0,
        config=config_echo or {},
    )
    for m in methods:
        report.fold_uar[m] = {d: [] for d in datasets}
        report.fold_sample_acc[m] = {d: [] for d in datasets}

    split = kfold_split(train, k, seed, stratify=stratify)
    counts_acc = {m: {d: np.zeros((len(classes), len(classes)), dtype=np.int64) for d in datasets} for m in methods}

    for fold in range(k):
        train_fold = subset(train, split.complement_indices(train, fold))
        valid_fold = subset(train, split.indices(train, fold))
        eval_sets = {"train": train_fold, "valid": valid_fold, **transfers}
        for method in methods:
            try:
                pipeline = _fit_method(method, train_fold, seed ^ fold, ae_template)
                pipeline.classes = classes
                pipeline.preprocessing = preprocessing
                pipeline.svc = svc_fit(
                    pipeline.embed(train_fold),
                    train_fold.labels(),
                    reg=svc_reg,
                    seed=seed,
                    iterations=svc_iterations,
                )
                for ds_name, ds in eval_sets.items():
                    preds = pipeline.predict(ds)
                    report.fold_uar[method][ds_name].append(
                        unweighted_accuracy(preds, ds.labels())
                    )
                    report.fold_sample_acc[method][ds_name].append(
                        sample_accuracy(preds, ds.labels())
                    )
                    counts_acc[method][ds_name] += confusion_matrix(
                        preds, ds.labels(), classes
                    ).counts
                if fold == 0:
                    report.pipelines[method] = pipeline
                    if pipeline.has_latent and pipeline.autoencoder is not None:
                        report.latents[method] = {
                            name: encode(pipeline.autoencoder, ds)
                            for name, ds in eval_sets.items()
                        }
                    elif pipeline.has_latent:
                        report.latents[method] = {
                            name: pca_latents(pipeline.pca, ds) for name, ds in eval_sets.items()
                        }
            except Exception as exc:
                _attach_context(exc, fold, method)
                raise

    for method in methods:
        report.confusion[method] = {
            d: ConfusionMatrix.from_counts(classes, counts_acc[method][d]) for d in datasets
        }
    return report


def pca_latents(model: PcaModel, corpus: Corpus) -> list[LatentEmbedding]:
    coords = pca_transform(model, corpus.feature_matrix())
    return [
        LatentEmbedding(sample_id=s.sample_id, coords=coords[i].copy(), label=s.label)
        for i, s in enumerate(corpus.samples)
    ]


def run_triads(
    train: Corpus,
    transfers: dict[str, Corpus],
    triads: tuple[TriadSpec, ...] = ALL_TRIADS,
    methods: list[str] = ("uae", "dae"),
    k: int = 10,
    seed: int = 0,
    **kwargs,
) -> dict[str, ExperimentReport]:
    """Cross-validation restricted to three classes at a time.

    Classes are filtered from the already-preprocessed corpora before any
    autoencoder or classifier fit; each triad gets its own report with a
    1/3 chance level.
    """
    reports: dict[str, ExperimentReport] = {}
    for triad in triads:
        keep = set(triad.classes)
        reports[triad.name] = run_cross_validation(
            filter_classes(train, keep),
            {name: filter_classes(c, keep) for name, c in transfers.items()},
            methods=list(methods),
            k=k,
            seed=seed,
            **kwargs,
        )
    return reports


# ---------------------------------------------------------------------------
# Export


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _safe_name(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in name)


_CLASS_COLORS = {
    EmotionLabel.NEUTRAL: "#7f7f7f",
    EmotionLabel.SAD: "#1f77b4",
    EmotionLabel.HAPPY: "#ff7f0e",
    EmotionLabel.ANGRY: "#d62728",
}


def latent_svg(embeddings: list[LatentEmbedding], title: str = "") -> str:
    """Minimal deterministic scatter plot (no timestamps, fixed viewport)."""
    size, margin = 480, 40
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{size // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    if embeddings:
        xs = np.array([e.coords[0] for e in embeddings])
        ys = np.array([e.coords[1] for e in embeddings])
        x_lo, x_hi = float(xs.min()), float(xs.max())
        y_lo, y_hi = float(ys.min()), float(ys.max())
        x_span = (x_hi - x_lo) or 1.0
        y_span = (y_hi - y_lo) or 1.0
        inner = size - 2 * margin
        for e in embeddings:
            px = margin + (float(e.coords[0]) - x_lo) / x_span * inner
            py = size - margin - (float(e.coords[1]) - y_lo) / y_span * inner
            parts.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" '
                f'fill="{_CLASS_COLORS[e.label]}" fill-opacity="0.6"/>'
            )
        for i, cls in enumerate(CLASS_ORDER):
            parts.append(
                f'<circle cx="{margin + 8}" cy="{margin + 14 * i}" r="4" fill="{_CLASS_COLORS[cls]}"/>'
                f'<text x="{margin + 18}" y="{margin + 14 * i + 4}" font-size="11">{cls.value}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def export_report(
    report: ExperimentReport, out_dir: str | Path, write_manifest: bool = True
) -> list[str]:
    """Write the report directory; returns the relative paths written.

    Layout: accuracy.csv, confusion/<method>_<dataset>.csv,
    latent/<method>_<dataset>.csv|.svg, attribution/<class>_<dim>.csv,
    manifest.json.  All floats at 17 significant digits, no timestamps, so
    identical reports export byte-identically.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files: list[str] = []

    with open(out_dir / "accuracy.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "method",
                "dataset",
                "n_folds",
                "uar_mean",
                "uar_ci_low",
                "uar_ci_high",
                "sample_acc_mean",
                "chance_level",
                *(f"fold_{i}_uar" for i in range(report.k)),
            ]
        )
        for method in report.methods:
            for ds in report.datasets:
                uars = report.fold_uar[method][ds]
                mean, lo, hi = mean_ci(uars)
                sample_mean = float(np.mean(report.fold_sample_acc[method][ds]))
                writer.writerow(
                    [
                        method,
                        ds,
                        len(uars),
                        _fmt(mean),
                        _fmt(lo),
                        _fmt(hi),
                        _fmt(sample_mean),
                        _fmt(report.chance_level),
                        *(_fmt(u) for u in uars),
                    ]
                )
    files.append("accuracy.csv")

    if report.confusion:
        (out_dir / "confusion").mkdir(exist_ok=True)
        for method in report.methods:
            for ds in report.datasets:
                cm = report.confusion[method][ds]
                rel = f"confusion/{_safe_name(method)}_{_safe_name(ds)}.csv"
                with open(out_dir / rel, "w", newline="", encoding="utf-8") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(["true", "predicted", "count", "normalized"])
                    for i, true_cls in enumerate(cm.classes):
                        for j, pred_cls in enumerate(cm.classes):
                            writer.writerow(
                                [
                                    true_cls.value,
                                    pred_cls.value,
                                    int(cm.counts[i, j]),
                                    _fmt(cm.normalized[i, j]),
                                ]
                            )
                files.append(rel)

    if report.latents:
        (out_dir / "latent").mkdir(exist_ok=True)
        for method, per_ds in report.latents.items():
            for ds, embs in per_ds.items():
                base = f"latent/{_safe_name(method)}_{_safe_name(ds)}"
                with open(out_dir / f"{base}.csv", "w", newline="", encoding="utf-8") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(["sample_id", "dim1", "dim2", "label", "corpus"])
                    for e in embs:
                        writer.writerow(
                            [e.sample_id, _fmt(e.coords[0]), _fmt(e.coords[1]), e.label.value, ds]
                        )
                with open(out_dir / f"{base}.svg", "w", encoding="utf-8") as fh:
                    fh.write(latent_svg(embs, title=f"{method} / {ds}"))
                files.extend([f"{base}.csv", f"{base}.svg"])

    if report.attributions:
        from .features import packaged_grouping

        grouping = report.grouping or packaged_grouping()
        (out_dir / "attribution").mkdir(exist_ok=True)
        for cls_value, per_dim in report.attributions.items():
            for dim, results in per_dim.items():
                rel = f"attribution/{_safe_name(cls_value)}_{dim}.csv"
                write_attribution_csv(results, cls_value, grouping, out_dir / rel)
                files.append(rel)

    if write_manifest:
        manifest = {
            "format": "emolatent-report",
            "version": 1,
            "seed": report.seed,
            "config": report.config,
            "chance_level": report.chance_level,
            "files": sorted(files),
        }
        with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        files.append("manifest.json")
    return files


def write_attribution_csv(
    results: list[AttributionResult],
    cls_value: str,
    grouping: dict[str, str],
    path: str | Path,
) -> None:
    """Long-format attribution export: one row per (sample, feature)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["sample_id", "class", "target_dim", "feature_name", "group", "score", "delta_output"]
        )
        for res in results:
            for i, name in enumerate(FEATURE_NAMES):
                writer.writerow(
                    [
                        res.sample_id,
                        cls_value,
                        res.target_dim,
                        name,
                        grouping[name],
                        _fmt(res.scores[i]),
                        _fmt(res.delta_output),
                    ]
                )
