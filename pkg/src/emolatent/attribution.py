"""Per-feature contribution scores for the encoder's latent dimensions.

Contributions are computed with the rescale rule: the difference of each
unit's activation from its value under a reference input is propagated
backwards, through linear layers via the weights and through
nonlinearities via the ratio of output difference to input difference
(falling back to the derivative at the reference when the input difference
vanishes).  The resulting per-input scores sum to the output difference
f(x) - f(reference) on the chosen latent dimension.

The reference is the mean input over neutral true positives of a
validation set, which makes the scores read as "contribution relative to
typical neutral speech".
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Corpus, EmotionLabel
from .errors import DataError
from .features import FEATURE_NAMES
from .nn import NetworkModel, _act_deriv, forward

# Below this |delta| at a nonlinearity input, the output/input ratio is
# numerically 0/0; substitute the analytic derivative at the reference.
NEAR_ZERO_DELTA = 1e-7


@dataclass(eq=False)
class ReferenceInput:
    vector: np.ndarray  # (88,)
    provenance: str
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "vector": self.vector.tolist(),
            "provenance": self.provenance,
            "n_samples": self.n_samples,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReferenceInput":
        return cls(
            vector=np.array(d["vector"], dtype=np.float64),
            provenance=str(d["provenance"]),
            n_samples=int(d["n_samples"]),
        )


@dataclass(eq=False)
class AttributionResult:
    sample_id: str
    target_dim: int  # 1 or 2
    scores: np.ndarray  # (88,)
    delta_output: float  # f(x) - f(reference) on the target dim


def build_reference(validation: Corpus, predictions: list[EmotionLabel]) -> ReferenceInput:
    """Mean feature vector over neutral true positives of a validation set."""
    if len(predictions) != len(validation):
        raise ValueError("predictions are not aligned with the validation corpus")
    rows = [
        s.features
        for s, pred in zip(validation.samples, predictions)
        if s.label == EmotionLabel.NEUTRAL and pred == EmotionLabel.NEUTRAL
    ]
    if not rows:
        raise DataError(
            "no neutral true positives in the validation set; cannot build an attribution reference"
        )
    return ReferenceInput(
        vector=np.mean(np.stack(rows), axis=0),
        provenance=f"mean over {len(rows)} neutral true positives of corpus {validation.name!r}",
        n_samples=len(rows),
    )


def deeplift_attribute(
    encoder: NetworkModel,
    sample: np.ndarray,
    reference: ReferenceInput,
    target_dim: int,
    sample_id: str = "",
) -> AttributionResult:
    """Rescale-rule contribution of every input feature to one latent dim."""
    if target_dim not in (1, 2):
        raise ValueError(f"target_dim must be 1 or 2, got {target_dim}")
    x = np.asarray(sample, dtype=np.float64)
    ref = reference.vector
    if x.shape != (encoder.input_dim,) or ref.shape != (encoder.input_dim,):
        raise ValueError("sample/reference dimension does not match the encoder input")

    trace_x = forward(encoder, x)
    trace_r = forward(encoder, ref)
    target = target_dim - 1

    # Multiplier of the target output w.r.t. each unit's activation delta,
    # chained backwards layer by layer.
    mult = np.zeros(encoder.output_dim)
    mult[target] = 1.0
    for l in range(len(encoder.layers) - 1, -1, -1):
        layer = encoder.layers[l]
        z_x = trace_x.pre_activations[l][0]
        z_r = trace_r.pre_activations[l][0]
        a_x = trace_x.activations[l + 1][0]
        a_r = trace_r.activations[l + 1][0]
        dz = z_x - z_r
        near_zero = np.abs(dz) < NEAR_ZERO_DELTA
        ratio = np.where(
            near_zero,
            _act_deriv(layer.activation, z_r),
            (a_x - a_r) / np.where(near_zero, 1.0, dz),
        )
        mult = (mult * ratio) @ layer.weights

    scores = mult * (x - ref)
    delta = float(trace_x.output[0, target] - trace_r.output[0, target])
    return AttributionResult(
        sample_id=sample_id, target_dim=target_dim, scores=scores, delta_output=delta
    )


def group_scores(result: AttributionResult, grouping: dict[str, str]) -> dict[str, list[float]]:
    """Partition the 88 scores by feature group, preserving feature order."""
    out: dict[str, list[float]] = {}
    for i, name in enumerate(FEATURE_NAMES):
        if name not in grouping:
            raise DataError(f"feature {name!r} is not mapped by the grouping")
        out.setdefault(grouping[name], []).append(float(result.scores[i]))
    return out


def attribute_class(
    encoder: NetworkModel,
    corpus: Corpus,
    predictions: list[EmotionLabel],
    reference: ReferenceInput,
    cls: EmotionLabel,
    target_dim: int,
) -> list[AttributionResult]:
    """One attribution per true positive of `cls`; empty (with a warning) if none."""
    if len(predictions) != len(corpus):
        raise ValueError("predictions are not aligned with the corpus")
    results = [
        deeplift_attribute(encoder, s.features, reference, target_dim, sample_id=s.sample_id)
        for s, pred in zip(corpus.samples, predictions)
        if s.label == cls and pred == cls
    ]
    if not results:
        warnings.warn(
            f"no true positives for class {cls.value!r} in corpus {corpus.name!r}; "
            "nothing to attribute",
            stacklevel=2,
        )
    return results
