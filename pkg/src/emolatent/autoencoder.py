"""Undercomplete and denoising autoencoders with a 2-D latent space.

Both variants share one architecture; the denoising variant only differs by
additive Gaussian corruption of the input during training.  Reconstruction
is always scored against the clean input, and inference (encode /
reconstruct) is noise-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import Corpus, EmotionLabel
from .errors import DataError, NumericalError
from .features import FEATURE_DIM
from .nn import (
    NetworkModel,
    adam_step,
    AdamState,
    backward,
    forward,
    init_network,
    model_from_dict,
    model_to_dict,
    mse_loss,
)

LATENT_DIM = 2

# Optional override for the corruption draw; receives the batch shape and
# must return an array of standard-normal-like noise.  Exists so tests can
# force the noise stream to zero.
NoiseSource = Callable[[tuple[int, int]], np.ndarray]


@dataclass
class AutoencoderConfig:
    """Architecture and training hyperparameters.

    `encoder_widths` is the full encoder chain including the 88-wide input
    and the 2-wide latent; the decoder mirrors it.  `noise_std` 0 gives the
    undercomplete variant, 1 the denoising variant.
    """

    encoder_widths: tuple[int, ...] = (88, 32, 8, 2)
    noise_std: float = 0.0
    epochs: int = 50
    batch_size: int = 64
    lr: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        self.encoder_widths = tuple(int(w) for w in self.encoder_widths)
        if len(self.encoder_widths) < 2:
            raise ValueError("encoder needs at least input and latent widths")
        if self.encoder_widths[0] != FEATURE_DIM:
            raise ValueError(f"encoder input width must be {FEATURE_DIM}")
        if self.encoder_widths[-1] != LATENT_DIM:
            raise ValueError(f"latent width must be {LATENT_DIM}")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.epochs < 0 or self.batch_size < 1 or self.lr <= 0:
            raise ValueError("invalid training hyperparameters")

    def layer_spec(self) -> list[tuple[int, int, str]]:
        """Full encoder+decoder spec: tanh hidden layers, linear latent/output."""
        widths = list(self.encoder_widths) + list(reversed(self.encoder_widths))[1:]
        latent_layer = len(self.encoder_widths) - 2
        output_layer = len(widths) - 2
        return [
            (a, b, "linear" if i in (latent_layer, output_layer) else "tanh")
            for i, (a, b) in enumerate(zip(widths, widths[1:]))
        ]

    def to_dict(self) -> dict:
        return {
            "encoder_widths": list(self.encoder_widths),
            "noise_std": self.noise_std,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AutoencoderConfig":
        return cls(
            encoder_widths=tuple(d["encoder_widths"]),
            noise_std=float(d["noise_std"]),
            epochs=int(d["epochs"]),
            batch_size=int(d["batch_size"]),
            lr=float(d["lr"]),
            seed=int(d["seed"]),
        )


@dataclass(eq=False)
class TrainedAutoencoder:
    encoder: NetworkModel  # 88 -> 2
    decoder: NetworkModel  # 2 -> 88
    config: AutoencoderConfig
    loss_history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "format": "emolatent-autoencoder",
            "version": 1,
            "config": self.config.to_dict(),
            "encoder": model_to_dict(self.encoder),
            "decoder": model_to_dict(self.decoder),
            "loss_history": list(self.loss_history),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedAutoencoder":
        if d.get("format") != "emolatent-autoencoder":
            raise ValueError("not a serialized autoencoder")
        return cls(
            encoder=model_from_dict(d["encoder"]),
            decoder=model_from_dict(d["decoder"]),
            config=AutoencoderConfig.from_dict(d["config"]),
            loss_history=[float(v) for v in d["loss_history"]],
        )


@dataclass(eq=False)
class LatentEmbedding:
    sample_id: str
    coords: np.ndarray  # (2,)
    label: EmotionLabel


def corrupt(x: np.ndarray, noise_std: float, rng: np.random.Generator) -> np.ndarray:
    """Additive Gaussian corruption: x + noise_std * g, g ~ N(0, I).

    With noise_std 0 the input is returned unchanged and the stream is not
    consumed, so undercomplete runs never touch the noise generator.
    """
    if noise_std < 0:
        raise ValueError("noise_std must be >= 0")
    x = np.asarray(x, dtype=np.float64)
    if noise_std == 0:
        return x.copy()
    return x + noise_std * rng.standard_normal(x.shape)


def train(
    corpus: Corpus,
    config: AutoencoderConfig,
    noise_source: NoiseSource | None = None,
) -> TrainedAutoencoder:
    """Train encoder+decoder end to end on a standardized corpus.

    Minimizes MSE between the reconstruction and the *clean* input; when
    noise_std > 0 the forward pass sees the corrupted input.  Batches are
    reshuffled every epoch; the last partial batch is used.  Fully
    deterministic for a fixed config (init, shuffling and corruption run on
    independent seeded streams).
    """
    if len(corpus) == 0:
        raise DataError("cannot train on an empty corpus")
    x_all = corpus.feature_matrix()
    n = x_all.shape[0]

    init_seed, shuffle_seed, noise_seed = np.random.SeedSequence(config.seed).generate_state(3)
    model = init_network(config.layer_spec(), int(init_seed))
    shuffle_rng = np.random.default_rng(shuffle_seed)
    noise_rng = np.random.default_rng(noise_seed)

    state = AdamState.for_params(model.parameters(), lr=config.lr)
    history: list[float] = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n)
        sq_sum = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            clean = x_all[idx]
            if config.noise_std > 0:
                noise = (
                    noise_source(clean.shape)
                    if noise_source is not None
                    else noise_rng.standard_normal(clean.shape)
                )
                seen = clean + config.noise_std * noise
            else:
                seen = clean
            trace = forward(model, seen)
            batch_loss = mse_loss(trace.output, clean)
            if not np.isfinite(batch_loss):
                raise NumericalError(f"training diverged at epoch {epoch}")
            sq_sum += batch_loss * clean.size
            grads = backward(model, trace, clean)
            params, state = adam_step(state, model.parameters(), grads)
            model.set_parameters(params)
        history.append(sq_sum / (n * FEATURE_DIM))

    n_enc = len(config.encoder_widths) - 1
    encoder = NetworkModel(layers=model.layers[:n_enc])
    decoder = NetworkModel(layers=model.layers[n_enc:])
    return TrainedAutoencoder(encoder=encoder, decoder=decoder, config=config, loss_history=history)


def encode(model: TrainedAutoencoder, corpus: Corpus) -> list[LatentEmbedding]:
    """Noise-free 2-D embeddings, one per sample, order preserved."""
    coords = forward(model.encoder, corpus.feature_matrix()).output
    return [
        LatentEmbedding(sample_id=s.sample_id, coords=coords[i].copy(), label=s.label)
        for i, s in enumerate(corpus.samples)
    ]


@dataclass(eq=False)
class ReconstructionResult:
    reconstructions: np.ndarray  # (n, 88)
    per_sample_mse: np.ndarray  # (n,)
    mean_mse: float


def reconstruct(model: TrainedAutoencoder, corpus: Corpus) -> ReconstructionResult:
    """decoder(encoder(x)) per sample plus MSE against the corpus features."""
    x = corpus.feature_matrix()
    latent = forward(model.encoder, x).output
    recon = forward(model.decoder, latent).output
    diff = recon - x
    return ReconstructionResult(
        reconstructions=recon,
        per_sample_mse=np.mean(diff * diff, axis=1),
        mean_mse=mse_loss(recon, x),
    )
