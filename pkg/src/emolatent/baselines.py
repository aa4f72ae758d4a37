"""Reference methods: PCA projection and a linear one-vs-rest SVC.

The SVC minimizes an L2-regularized average hinge loss per class with
deterministic full-batch subgradient descent on a fixed 1/(reg*t) step
schedule, so repeated fits are bit-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import CLASS_ORDER, EmotionLabel
from .errors import DataError


@dataclass(eq=False)
class PcaModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (out_dims, d), rows orthonormal
    explained_variance: np.ndarray  # (out_dims,), non-increasing

    def to_dict(self) -> dict:
        return {
            "format": "emolatent-pca",
            "version": 1,
            "mean": self.mean.tolist(),
            "components": [row.tolist() for row in self.components],
            "explained_variance": self.explained_variance.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaModel":
        if d.get("format") != "emolatent-pca":
            raise ValueError("not a serialized PCA model")
        return cls(
            mean=np.array(d["mean"], dtype=np.float64),
            components=np.array(d["components"], dtype=np.float64),
            explained_variance=np.array(d["explained_variance"], dtype=np.float64),
        )


def pca_fit(data: np.ndarray, out_dims: int) -> PcaModel:
    """Top principal components of the sample covariance (ddof=1).

    Components are eigenvectors sorted by decreasing eigenvalue, with the
    sign fixed so each component's largest-magnitude entry is positive.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("PCA needs at least 2 samples")
    n, d = data.shape
    if out_dims > d or out_dims < 1:
        raise ValueError(f"out_dims {out_dims} invalid for {d}-dimensional data")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = (centered.T @ centered) / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:out_dims]
    components = evecs[:, order].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    explained = np.clip(evals[order], 0.0, None)
    return PcaModel(mean=mean, components=components, explained_variance=explained)


def pca_transform(model: PcaModel, data: np.ndarray) -> np.ndarray:
    """Project (x - mean) onto the fitted components."""
    data = np.asarray(data, dtype=np.float64)
    single = data.ndim == 1
    if single:
        data = data[None, :]
    if data.shape[1] != model.mean.shape[0]:
        raise ValueError(f"data dim {data.shape[1]} does not match model dim {model.mean.shape[0]}")
    out = (data - model.mean) @ model.components.T
    return out[0] if single else out


@dataclass(eq=False)
class SvcModel:
    classes: list[EmotionLabel]  # canonical order, classes seen at fit time
    weights: np.ndarray  # (n_classes, dim)
    biases: np.ndarray  # (n_classes,)
    reg: float
    iterations: int
    seed: int
    train_accuracy: float

    def to_dict(self) -> dict:
        return {
            "format": "emolatent-svc",
            "version": 1,
            "classes": [c.value for c in self.classes],
            "weights": [row.tolist() for row in self.weights],
            "biases": self.biases.tolist(),
            "reg": self.reg,
            "iterations": self.iterations,
            "seed": self.seed,
            "train_accuracy": self.train_accuracy,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvcModel":
        if d.get("format") != "emolatent-svc":
            raise ValueError("not a serialized SVC model")
        return cls(
            classes=[EmotionLabel(v) for v in d["classes"]],
            weights=np.array(d["weights"], dtype=np.float64),
            biases=np.array(d["biases"], dtype=np.float64),
            reg=float(d["reg"]),
            iterations=int(d["iterations"]),
            seed=int(d["seed"]),
            train_accuracy=float(d["train_accuracy"]),
        )


def svc_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, reg: float) -> float:
    """Binary objective: reg/2 * ||w||^2 + mean hinge loss.  y in {-1, +1}."""
    margins = y * (x @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins)
    return float(0.5 * reg * np.dot(w, w) + hinge.mean())


def _fit_binary(x: np.ndarray, y: np.ndarray, reg: float, iterations: int) -> tuple[np.ndarray, float]:
    """Full-batch subgradient descent on reg/2*||w||^2 + mean hinge, zero init.

    The data is centered internally (the offset is folded back into the
    returned bias), which leaves the objective's optimum unchanged but
    makes training equivariant to constant shifts of the embeddings.
    Step schedule 1/(reg*(t+1)); after each step w is projected onto the
    ball of radius 1/sqrt(reg) (which provably contains the optimum), and
    the returned solution is the average over the second half of the
    iterations.  Both tricks tame the large early steps the schedule takes
    when reg is small; the whole procedure is deterministic.
    """
    center = x.mean(axis=0)
    x = x - center
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    w_acc = np.zeros(d)
    b_acc = 0.0
    radius = 1.0 / np.sqrt(reg)
    tail_start = iterations // 2
    tail = max(1, iterations - tail_start)
    for t in range(iterations):
        margins = y * (x @ w + b)
        viol = margins < 1.0
        grad_w = reg * w - (y[viol, None] * x[viol]).sum(axis=0) / n
        grad_b = -y[viol].sum() / n
        step = 1.0 / (reg * (t + 1))
        w = w - step * grad_w
        b = b - step * grad_b
        norm = np.sqrt(w @ w)
        if norm > radius:
            w *= radius / norm
        if t >= tail_start:
            w_acc += w
            b_acc += b
    if iterations == 0:
        return w, b - w @ center
    w = w_acc / tail
    return w, b_acc / tail - w @ center


def svc_fit(
    embeddings: np.ndarray,
    labels: list[EmotionLabel],
    reg: float = 1.0,
    seed: int = 0,
    iterations: int = 2000,
) -> SvcModel:
    """One-vs-rest linear SVC; deterministic for any fixed inputs.

    The seed is recorded as training metadata (the optimizer itself is
    deterministic full-batch descent from a zero start).
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != len(labels):
        raise ValueError("embeddings/labels length mismatch")
    if reg <= 0:
        raise ValueError("reg must be positive")
    present = [c for c in CLASS_ORDER if c in set(labels)]
    if len(present) < 2:
        raise DataError("SVC training needs at least 2 classes present")
    weights = np.zeros((len(present), x.shape[1]))
    biases = np.zeros(len(present))
    for i, cls in enumerate(present):
        y = np.array([1.0 if lab == cls else -1.0 for lab in labels])
        weights[i], biases[i] = _fit_binary(x, y, reg, iterations)
    model = SvcModel(
        classes=present,
        weights=weights,
        biases=biases,
        reg=reg,
        iterations=iterations,
        seed=seed,
        train_accuracy=0.0,
    )
    preds = svc_predict(model, x)
    model.train_accuracy = float(np.mean([p == lab for p, lab in zip(preds, labels)]))
    return model


def svc_predict(model: SvcModel, embeddings: np.ndarray) -> list[EmotionLabel]:
    """Argmax of per-class decision values; ties go to the earliest class."""
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.weights.shape[1]:
        raise ValueError(
            f"embedding dim {x.shape[1]} does not match model dim {model.weights.shape[1]}"
        )
    scores = x @ model.weights.T + model.biases
    return [model.classes[i] for i in np.argmax(scores, axis=1)]


def save_json(model, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)


def load_pca(path: str | Path) -> PcaModel:
    with open(path, encoding="utf-8") as fh:
        return PcaModel.from_dict(json.load(fh))


def load_svc(path: str | Path) -> SvcModel:
    with open(path, encoding="utf-8") as fh:
        return SvcModel.from_dict(json.load(fh))
