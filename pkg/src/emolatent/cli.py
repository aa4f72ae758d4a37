"""Command-line entry point.

Commands: `synth` (generate a corpus CSV), `run` (preprocess, cross-validate,
export a report directory), `attribute` (feature attribution CSV from a
saved pipeline), `export-latent` (embeddings CSV/SVG from a saved pipeline).

Exit codes are stable for scripting: 0 success, 1 usage error, 2 data
error, 3 numerical failure.  Every command is deterministic under a fixed
seed and never mutates its input files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from . import evaluation
from .attribution import attribute_class, build_reference
from .autoencoder import AutoencoderConfig, encode
from .data import Corpus, EmotionLabel, load_schema, parse_corpus, write_corpus_csv
from .errors import DataError, EmolatentError, NumericalError, UsageError
from .evaluation import (
    ALL_TRIADS,
    FittedPipeline,
    PreprocessingOptions,
    TriadSpec,
    export_report,
    preprocess_corpora,
    run_cross_validation,
    run_triads,
    write_attribution_csv,
)
from .features import load_grouping, packaged_grouping
from .synthetic import SyntheticConfig, default_config, generate_synthetic

OUT_DIR_ENV = "EMOLATENT_OUT"

RUN_DEFAULTS: dict = {
    "transfers": [],
    "methods": "raw,pca,uae,dae",
    "k": 10,
    "epochs": 50,
    "batch_size": 64,
    "lr": 1e-3,
    "widths": "88,32,8,2",
    "noise_std": 1.0,
    "threshold": 10.0,
    "zscore_scope": "train",
    "standardize_scope": "per-corpus",
    "stratify": True,
    "svc_reg": 0.001,
    "svc_iterations": 2000,
    "triads": None,
    "train": None,
    "seed": None,
    "out": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default would sys.exit(2)
        raise UsageError(message)


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    if p.suffix == ".toml":
        try:
            import tomllib
        except ImportError:
            raise UsageError(
                "TOML config files need Python >= 3.11; use a JSON config instead"
            ) from None
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    try:
        with open(p, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse config {p}: {exc}") from exc


def _merged_run_config(args: argparse.Namespace) -> dict:
    """Precedence: CLI flags > config file > built-in defaults."""
    cfg = dict(RUN_DEFAULTS)
    if args.config:
        file_cfg = _load_config_file(args.config)
        unknown = set(file_cfg) - set(RUN_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config key(s): {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if args.no_stratify:
        cfg["stratify"] = False
    if cfg["out"] is None:
        cfg["out"] = os.environ.get(OUT_DIR_ENV)
    if cfg["train"] is None:
        raise UsageError("a training corpus is required (--train)")
    if cfg["seed"] is None:
        raise UsageError("a seed is required (--seed); runs must be reproducible")
    if cfg["out"] is None:
        raise UsageError(f"an output directory is required (--out or ${OUT_DIR_ENV})")

    coercers = {
        "seed": int, "k": int, "epochs": int, "batch_size": int, "svc_iterations": int,
        "lr": float, "threshold": float, "noise_std": float, "svc_reg": float,
        "train": str, "out": str, "methods": str, "widths": str,
        "zscore_scope": str, "standardize_scope": str,
    }
    for key, coerce in coercers.items():
        try:
            cfg[key] = coerce(cfg[key])
        except (ValueError, TypeError):
            raise UsageError(f"config value for {key!r} is invalid: {cfg[key]!r}") from None
    if not isinstance(cfg["stratify"], bool):
        raise UsageError(f"config value for 'stratify' must be a boolean, got {cfg['stratify']!r}")
    if not isinstance(cfg["transfers"], (list, tuple)):
        raise UsageError("config value for 'transfers' must be a list of 'name=path' entries")
    return cfg


def _parse_widths(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(w) for w in str(text).split(","))
    except ValueError:
        raise UsageError(f"cannot parse widths {text!r} (expected e.g. '88,32,8,2')") from None


def _parse_methods(text: str) -> list[str]:
    methods = [m.strip().lower() for m in str(text).split(",") if m.strip()]
    unknown = [m for m in methods if m not in evaluation.METHODS]
    if unknown:
        raise UsageError(f"unknown method(s) {unknown}; choose from {list(evaluation.METHODS)}")
    if not methods:
        raise UsageError("at least one method is required")
    return methods


def _parse_triads(text: str | None) -> tuple[TriadSpec, ...]:
    if text is None:
        return ()
    if str(text).strip().lower() == "all":
        return ALL_TRIADS
    try:
        return tuple(TriadSpec.parse(part) for part in str(text).split(",") if part.strip())
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_corpus(path: str, name: str | None = None, language: str = "") -> Corpus:
    """Parse a corpus CSV, honoring a `<stem>.schema.json` sidecar if present."""
    p = Path(path)
    sidecar = p.with_suffix(".schema.json")
    schema = load_schema(sidecar) if sidecar.is_file() else None
    return parse_corpus(p, schema=schema, name=name, language=language)


def _parse_transfers(entries: list[str]) -> list[tuple[str, str]]:
    out = []
    for entry in entries:
        name, sep, path = str(entry).partition("=")
        if not sep or not name.strip() or not path.strip():
            raise UsageError(f"transfer corpora are given as name=path, got {entry!r}")
        out.append((name.strip(), path.strip()))
    return out


def cmd_synth(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise UsageError("a seed is required (--seed); generation must be reproducible")
    if args.config:
        raw = _load_config_file(args.config)
        config = SyntheticConfig.from_dict(raw)
    else:
        config = default_config(count=args.count)
    if args.rotation is not None:
        config.rotation = math.radians(args.rotation)
    if args.ambient_noise_std is not None:
        config.ambient_noise_std = args.ambient_noise_std
    if args.name is not None:
        config.name = args.name
    if args.language is not None:
        config.language = args.language
    corpus = generate_synthetic(config, args.seed)
    write_corpus_csv(corpus, args.out)
    print(f"wrote {len(corpus)} samples to {args.out}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _merged_run_config(args)
    methods = _parse_methods(cfg["methods"])
    triads = _parse_triads(cfg["triads"])
    transfer_paths = _parse_transfers(list(cfg["transfers"]))
    out_dir = Path(cfg["out"])
    try:
        options = PreprocessingOptions(
            threshold=float(cfg["threshold"]),
            zscore_scope=str(cfg["zscore_scope"]),
            standardize_scope=str(cfg["standardize_scope"]),
        )
        ae_template = AutoencoderConfig(
            encoder_widths=_parse_widths(cfg["widths"]),
            noise_std=float(cfg["noise_std"]),
            epochs=int(cfg["epochs"]),
            batch_size=int(cfg["batch_size"]),
            lr=float(cfg["lr"]),
            seed=int(cfg["seed"]),
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc

    stage = "ingestion"
    try:
        train_raw = _load_corpus(cfg["train"], name="train")
        transfers_raw = {name: _load_corpus(path, name=name) for name, path in transfer_paths}

        stage = "preprocessing"
        train, transfers, prep = preprocess_corpora(train_raw, transfers_raw, options)

        stage = "cross-validation"
        echo = {key: cfg[key] for key in sorted(RUN_DEFAULTS)}
        report = run_cross_validation(
            train,
            transfers,
            methods=methods,
            k=int(cfg["k"]),
            seed=int(cfg["seed"]),
            ae_template=ae_template,
            svc_reg=float(cfg["svc_reg"]),
            svc_iterations=int(cfg["svc_iterations"]),
            stratify=bool(cfg["stratify"]),
            preprocessing=prep,
            config_echo=echo,
        )

        triad_reports = {}
        if triads:
            stage = "triads"
            triad_reports = run_triads(
                train,
                transfers,
                triads=triads,
                methods=methods,
                k=int(cfg["k"]),
                seed=int(cfg["seed"]),
                ae_template=ae_template,
                svc_reg=float(cfg["svc_reg"]),
                svc_iterations=int(cfg["svc_iterations"]),
                stratify=bool(cfg["stratify"]),
                preprocessing=prep,
            )

        stage = "export"
        files = export_report(report, out_dir, write_manifest=False)
        (out_dir / "models").mkdir(exist_ok=True)
        for method, pipeline in report.pipelines.items():
            rel = f"models/{method}_fold0.json"
            pipeline.save(out_dir / rel)
            files.append(rel)
        for name, triad_report in triad_reports.items():
            sub = f"triads/{name}"
            for rel in export_report(triad_report, out_dir / sub, write_manifest=True):
                files.append(f"{sub}/{rel}")
        manifest = {
            "format": "emolatent-run",
            "version": 1,
            "seed": int(cfg["seed"]),
            "config": echo,
            "files": sorted(files),
        }
        with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
    except EmolatentError as exc:
        raise type(exc)(f"[stage={stage}] {exc}") from exc
    except OSError as exc:
        raise DataError(f"[stage={stage}] {exc}") from exc

    print(f"report written to {out_dir} ({len(files) + 1} files)")
    return 0


def _parse_class(text: str) -> EmotionLabel:
    try:
        return EmotionLabel(text.strip().lower())
    except ValueError:
        raise UsageError(
            f"unknown emotion class {text!r}; choose from "
            f"{[c.value for c in EmotionLabel]}"
        ) from None


def _parse_dim(value: int) -> int:
    if value not in (1, 2):
        raise UsageError(f"latent dimension must be 1 or 2, got {value}")
    return value


def _load_pipeline_with_encoder(path: str) -> FittedPipeline:
    pipeline = FittedPipeline.load(path)
    if pipeline.autoencoder is None:
        raise UsageError(
            f"model {path} was fitted with method {pipeline.method!r}; "
            "attribution needs an autoencoder pipeline (uae or dae)"
        )
    if pipeline.preprocessing is None:
        raise UsageError(f"model {path} carries no preprocessing policy")
    return pipeline


def cmd_attribute(args: argparse.Namespace) -> int:
    cls = _parse_class(args.emotion_class)
    dim = _parse_dim(args.dim)
    grouping = load_grouping(args.grouping) if args.grouping else packaged_grouping()
    pipeline = _load_pipeline_with_encoder(args.model)
    corpus = pipeline.preprocessing.apply(_load_corpus(args.corpus))
    predictions = pipeline.predict(corpus)
    reference = build_reference(corpus, predictions)
    results = attribute_class(
        pipeline.autoencoder.encoder, corpus, predictions, reference, cls, dim
    )
    write_attribution_csv(results, cls.value, grouping, args.out)
    print(f"wrote {len(results)} attributions to {args.out}")
    return 0


def cmd_export_latent(args: argparse.Namespace) -> int:
    pipeline = FittedPipeline.load(args.model)
    if not pipeline.has_latent:
        raise UsageError("the raw-features pipeline has no latent space to export")
    if pipeline.preprocessing is None:
        raise UsageError(f"model {args.model} carries no preprocessing policy")
    corpus = pipeline.preprocessing.apply(_load_corpus(args.corpus))
    if pipeline.autoencoder is not None:
        embeddings = encode(pipeline.autoencoder, corpus)
    else:
        embeddings = evaluation.pca_latents(pipeline.pca, corpus)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id", "dim1", "dim2", "label", "corpus"])
        for e in embeddings:
            writer.writerow(
                [e.sample_id, f"{e.coords[0]:.17g}", f"{e.coords[1]:.17g}", e.label.value, corpus.name]
            )
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(evaluation.latent_svg(embeddings, title=f"{pipeline.method} / {corpus.name}"))
    print(f"wrote {len(embeddings)} embeddings to {args.out}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="emolatent", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, help="generation seed (required)")
    p.add_argument("--config", help="generator config file (JSON/TOML)")
    p.add_argument("--count", type=int, default=250, help="samples per class (default 250)")
    p.add_argument("--rotation", type=float, help="latent-plane rotation in degrees")
    p.add_argument("--ambient-noise-std", type=float, help="feature-space noise level")
    p.add_argument("--name", help="corpus name")
    p.add_argument("--language", help="language tag")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="cross-validation experiment; writes a report directory")
    p.add_argument("--train", help="training corpus CSV")
    p.add_argument("--transfer", dest="transfers", action="append", metavar="NAME=PATH")
    p.add_argument("--methods", help="comma list from raw,pca,uae,dae")
    p.add_argument("--out", help=f"report directory (or ${OUT_DIR_ENV})")
    p.add_argument("--seed", type=int, help="run seed (required)")
    p.add_argument("--config", help="run config file (JSON/TOML); flags override it")
    p.add_argument("--k", type=int, help="number of folds (default 10)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--widths", help="encoder widths, e.g. 88,32,8,2")
    p.add_argument("--noise-std", dest="noise_std", type=float, help="DAE corruption level")
    p.add_argument("--threshold", type=float, help="outlier z-score threshold")
    p.add_argument("--zscore-scope", dest="zscore_scope", choices=["train", "per-corpus"])
    p.add_argument(
        "--standardize-scope", dest="standardize_scope", choices=["per-corpus", "train-stats"]
    )
    p.add_argument("--no-stratify", action="store_true", help="disable stratified folds")
    p.add_argument("--svc-reg", dest="svc_reg", type=float)
    p.add_argument("--svc-iterations", dest="svc_iterations", type=int)
    p.add_argument("--triads", help="'all' or comma list like N-S-A,S-H-A")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("attribute", help="feature attribution CSV from a saved pipeline")
    p.add_argument("--model", required=True, help="models/<method>_fold0.json from a run")
    p.add_argument("--corpus", required=True, help="corpus CSV to attribute")
    p.add_argument("--class", dest="emotion_class", required=True, help="emotion class")
    p.add_argument("--dim", type=int, required=True, help="latent dimension, 1 or 2")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--grouping", help="custom grouping CSV (feature_name,group)")
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("export-latent", help="latent embedding CSV from a saved pipeline")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--svg", help="optional SVG scatter path")
    p.set_defaults(func=cmd_export_latent)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
