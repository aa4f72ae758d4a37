import csv

import numpy as np
import pytest

from emolatent.autoencoder import AutoencoderConfig
from emolatent.data import CLASS_ORDER, EmotionLabel
from emolatent.errors import DataError
from emolatent.evaluation import (
    ALL_TRIADS,
    ConfusionMatrix,
    TriadSpec,
    confusion_matrix,
    empty_report,
    export_report,
    mean_ci,
    preprocess_corpora,
    run_cross_validation,
    run_triads,
    sample_accuracy,
    unweighted_accuracy,
)
from emolatent.synthetic import ClassCluster, SyntheticConfig, default_config, generate_synthetic

N, S, H, A = EmotionLabel.NEUTRAL, EmotionLabel.SAD, EmotionLabel.HAPPY, EmotionLabel.ANGRY


def random_labels(rng, n):
    classes = list(CLASS_ORDER)
    return [classes[i] for i in rng.integers(0, 4, n)]


class TestUnweightedAccuracy:
    def test_all_correct(self):
        labels = [N, S, H, A, A]
        assert unweighted_accuracy(labels, labels) == 1.0

    def test_unweighted_ignores_class_sizes(self):
        labels = [N] * 90 + [S] * 10
        preds = [N] * 90 + [H] * 10  # recall N=1.0, S=0.0
        assert unweighted_accuracy(preds, labels) == 0.5

    def test_against_tally_oracle(self):
        rng = np.random.default_rng(0)
        labels = random_labels(rng, 500)
        preds = random_labels(rng, 500)
        got = unweighted_accuracy(preds, labels)
        recalls = []
        for cls in CLASS_ORDER:
            total = labels.count(cls)
            hit = sum(1 for p, lab in zip(preds, labels) if lab == cls and p == cls)
            recalls.append(hit / total)
        assert abs(got - sum(recalls) / len(recalls)) < 1e-12

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        labels = random_labels(rng, 200)
        preds = random_labels(rng, 200)
        mapping = {N: H, H: S, S: A, A: N}
        base = unweighted_accuracy(preds, labels)
        permuted = unweighted_accuracy([mapping[p] for p in preds], [mapping[l] for l in labels])
        assert abs(base - permuted) < 1e-15

    def test_equals_mean_confusion_diagonal(self):
        rng = np.random.default_rng(2)
        labels = random_labels(rng, 300)
        preds = random_labels(rng, 300)
        cm = confusion_matrix(preds, labels, list(CLASS_ORDER))
        assert abs(unweighted_accuracy(preds, labels) - cm.normalized.diagonal().mean()) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            unweighted_accuracy([N], [N, S])


class TestConfusionMatrix:
    def test_perfect_predictions_identity(self):
        labels = [N, S, H, A] * 3
        cm = confusion_matrix(labels, labels, list(CLASS_ORDER))
        assert np.array_equal(cm.normalized, np.eye(4))

    def test_everything_predicted_angry(self):
        labels = [N, S, H, A] * 2
        preds = [A] * 8
        cm = confusion_matrix(preds, labels, list(CLASS_ORDER))
        assert np.array_equal(cm.normalized[:, 3], np.ones(4))

    def test_counts_against_pair_tally(self):
        rng = np.random.default_rng(3)
        labels = random_labels(rng, 400)
        preds = random_labels(rng, 400)
        cm = confusion_matrix(preds, labels, list(CLASS_ORDER))
        for i, true_cls in enumerate(CLASS_ORDER):
            for j, pred_cls in enumerate(CLASS_ORDER):
                expected = sum(
                    1 for p, lab in zip(preds, labels) if lab == true_cls and p == pred_cls
                )
                assert cm.counts[i, j] == expected

    def test_counts_sum_and_row_normalization(self):
        rng = np.random.default_rng(4)
        labels = random_labels(rng, 250)
        preds = random_labels(rng, 250)
        cm = confusion_matrix(preds, labels, list(CLASS_ORDER))
        assert cm.counts.sum() == 250
        assert np.max(np.abs(cm.normalized.sum(axis=1) - 1.0)) < 1e-12

    def test_absent_class_row_stays_zero(self):
        cm = confusion_matrix([N, N], [N, N], list(CLASS_ORDER))
        assert np.all(cm.normalized[1:] == 0.0)

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            confusion_matrix([N], [S], [N])


class TestMeanCi:
    def test_mean_inside_interval(self):
        rng = np.random.default_rng(5)
        values = rng.uniform(0.4, 0.9, 10).tolist()
        mean, lo, hi = mean_ci(values)
        assert lo <= mean <= hi
        assert abs(mean - np.mean(values)) < 1e-15

    def test_constant_values_collapse(self):
        mean, lo, hi = mean_ci([0.7] * 5)
        assert mean == lo == hi == 0.7

    def test_single_value(self):
        assert mean_ci([0.5]) == (0.5, 0.5, 0.5)


class TestPreprocessingScopes:
    def _shifted_pair(self):
        rng = np.random.default_rng(0)
        from conftest import make_corpus, random_corpus

        train = random_corpus(rng, 120, name="train")
        shifted = make_corpus(train.feature_matrix() + 5.0, train.labels(), name="shifted")
        return train, shifted

    def test_per_corpus_standardization_centers_transfer(self):
        from emolatent.evaluation import PreprocessingOptions

        train, shifted = self._shifted_pair()
        _, transfers, _ = preprocess_corpora(
            train, {"t": shifted}, PreprocessingOptions(standardize_scope="per-corpus")
        )
        means = transfers["t"].feature_matrix().mean(axis=0)
        assert np.max(np.abs(means)) < 1e-9

    def test_train_stats_scope_keeps_transfer_offset(self):
        from emolatent.evaluation import PreprocessingOptions

        train, shifted = self._shifted_pair()
        _, transfers, _ = preprocess_corpora(
            train, {"t": shifted}, PreprocessingOptions(standardize_scope="train-stats")
        )
        means = transfers["t"].feature_matrix().mean(axis=0)
        assert np.min(np.abs(means)) > 1.0  # offset ~5/sigma survives

    def test_zscore_scope_controls_which_stats_flag_outliers(self):
        from emolatent.evaluation import PreprocessingOptions
        from conftest import make_corpus, random_corpus

        rng = np.random.default_rng(1)
        train = random_corpus(rng, 200, name="train")  # feature scale ~1
        # transfer: feature 0 is 30x wider, including a value extreme by TRAIN
        # statistics but unremarkable by the transfer's own statistics
        rows = rng.standard_normal((50, 88))
        rows[:, 0] *= 30.0
        rows[0, 0] = 25.0
        labels = [list(CLASS_ORDER)[i % 4] for i in range(50)]
        transfer = make_corpus(rows, labels, name="t")

        _, by_train, _ = preprocess_corpora(
            train, {"t": transfer}, PreprocessingOptions(zscore_scope="train", threshold=10.0)
        )
        _, by_self, _ = preprocess_corpora(
            train, {"t": transfer}, PreprocessingOptions(zscore_scope="per-corpus", threshold=10.0)
        )
        assert "s0" not in by_train["t"].sample_ids()  # 25 ~ 25 sigma of train
        assert "s0" in by_self["t"].sample_ids()  # but < 1 sigma of the transfer

    def test_pipeline_round_trip_preserves_predictions(self, tmp_path):
        from emolatent.evaluation import FittedPipeline

        train = tight_synthetic()
        report = run_cross_validation(
            train, {}, methods=["dae"], k=2, seed=6, ae_template=SMALL_AE
        )
        pipeline = report.pipelines["dae"]
        path = tmp_path / "p.json"
        pipeline.save(path)
        loaded = FittedPipeline.load(path)
        assert loaded.predict(train) == pipeline.predict(train)
        assert np.array_equal(loaded.embed(train), pipeline.embed(train))


def tight_synthetic(count=40, seed=3):
    """A trivially separable corpus (tiny covariance, tiny ambient noise)."""
    config = default_config(count=count, ambient_noise_std=0.02)
    for spec in config.classes.values():
        spec.cov = ((0.01, 0.0), (0.0, 0.01))
    corpus = generate_synthetic(config, seed)
    train, transfers, info = preprocess_corpora(corpus, {})
    return train


SMALL_AE = AutoencoderConfig(noise_std=1.0, epochs=8, batch_size=32)


class TestRunCrossValidation:
    def test_raw_svc_perfect_on_separable_corpus(self):
        train = tight_synthetic()
        report = run_cross_validation(train, {}, methods=["raw"], k=4, seed=0)
        mean, lo, hi = report.uar_summary("raw", "valid")
        assert mean == 1.0
        assert lo == hi == 1.0  # zero-width interval

    def test_structural_fold_counts(self):
        train = tight_synthetic()
        transfers = {"other": tight_synthetic(seed=9)}
        report = run_cross_validation(train, transfers, methods=["raw", "pca"], k=5, seed=1)
        assert report.datasets == ["train", "valid", "other"]
        for method in ("raw", "pca"):
            for ds in report.datasets:
                assert len(report.fold_uar[method][ds]) == 5
                assert len(report.fold_sample_acc[method][ds]) == 5

    def test_dae_beats_chance_on_default_synthetic(self):
        corpus = generate_synthetic(default_config(count=60), seed=42)
        train, _, _ = preprocess_corpora(corpus, {})
        report = run_cross_validation(
            train, {}, methods=["dae"], k=3, seed=42, ae_template=SMALL_AE
        )
        assert report.uar_summary("dae", "valid")[0] > report.chance_level == 0.25

    def test_deterministic_reports(self):
        train = tight_synthetic()
        a = run_cross_validation(train, {}, methods=["dae"], k=3, seed=4, ae_template=SMALL_AE)
        b = run_cross_validation(train, {}, methods=["dae"], k=3, seed=4, ae_template=SMALL_AE)
        assert a.fold_uar == b.fold_uar
        assert a.fold_sample_acc == b.fold_sample_acc
        for ds in a.datasets:
            assert np.array_equal(a.confusion["dae"][ds].counts, b.confusion["dae"][ds].counts)

    def test_transfer_corpora_never_influence_fits(self):
        train = tight_synthetic()
        transfer = tight_synthetic(count=30, seed=11)
        with_t = run_cross_validation(
            train, {"t": transfer}, methods=["dae"], k=3, seed=2, ae_template=SMALL_AE
        )
        without_t = run_cross_validation(
            train, {}, methods=["dae"], k=3, seed=2, ae_template=SMALL_AE
        )
        for key in ("train", "valid"):
            assert with_t.fold_uar["dae"][key] == without_t.fold_uar["dae"][key]
        pa = with_t.pipelines["dae"].autoencoder.encoder.parameters()
        pb = without_t.pipelines["dae"].autoencoder.encoder.parameters()
        for x, y in zip(pa, pb):
            assert np.array_equal(x, y)

    def test_reserved_dataset_name_rejected(self):
        train = tight_synthetic()
        with pytest.raises(DataError, match="reserved"):
            run_cross_validation(train, {"valid": train}, methods=["raw"], k=2, seed=0)

    def test_error_context_names_fold_and_method(self):
        train = tight_synthetic()
        bad_ae = AutoencoderConfig(noise_std=1.0, epochs=2, lr=1e200)
        with np.errstate(over="ignore"), pytest.raises(Exception, match=r"\[fold 0, method dae\]"):
            run_cross_validation(train, {}, methods=["dae"], k=2, seed=0, ae_template=bad_ae)

    def test_latents_recorded_for_latent_methods(self):
        train = tight_synthetic()
        report = run_cross_validation(
            train, {}, methods=["raw", "pca", "uae"], k=2, seed=0, ae_template=SMALL_AE
        )
        assert "raw" not in report.latents
        for method in ("pca", "uae"):
            embs = report.latents[method]["valid"]
            assert len(embs) == len(report.fold_uar[method]["valid"]) or len(embs) > 0
            assert all(e.coords.shape == (2,) for e in embs)


class TestTriads:
    def test_four_reports_with_3x3_confusions(self):
        train = tight_synthetic()
        reports = run_triads(train, {}, triads=ALL_TRIADS, methods=["raw"], k=2, seed=0)
        assert sorted(reports) == sorted(t.name for t in ALL_TRIADS)
        for report in reports.values():
            assert report.chance_level == pytest.approx(1 / 3)
            for ds in report.datasets:
                assert report.confusion["raw"][ds].counts.shape == (3, 3)

    def test_far_class_dominates_recall(self):
        # N and S overlap heavily; A sits far away: A's recall must top both
        config = SyntheticConfig(
            classes={
                N: ClassCluster((0.0, 0.0), ((0.6, 0.0), (0.0, 0.6)), 60),
                S: ClassCluster((-0.5, -0.3), ((0.6, 0.0), (0.0, 0.6)), 60),
                A: ClassCluster((5.0, -2.0), ((0.3, 0.0), (0.0, 0.3)), 60),
                H: ClassCluster((2.0, 2.5), ((0.4, 0.0), (0.0, 0.4)), 60),
            },
            ambient_noise_std=0.1,
        )
        corpus = generate_synthetic(config, seed=21)
        train, _, _ = preprocess_corpora(corpus, {})
        triad = TriadSpec((N, S, A))
        ae = AutoencoderConfig(noise_std=1.0, epochs=12, batch_size=32)
        reports = run_triads(
            train, {}, triads=(triad,), methods=["dae"], k=3, seed=5, ae_template=ae
        )
        cm = reports["N-S-A"].confusion["dae"]["valid"]
        recalls = {cls: cm.normalized[i, i] for i, cls in enumerate(cm.classes)}
        assert recalls[A] > recalls[N]
        assert recalls[A] > recalls[S]

    def test_triad_spec_parsing_and_validation(self):
        assert TriadSpec.parse("n-s-a").classes == (N, S, A)
        assert TriadSpec.parse("A-S-H").name == "S-H-A"  # canonical class order
        with pytest.raises(ValueError):
            TriadSpec.parse("N-S")
        with pytest.raises(ValueError):
            TriadSpec((N, N, S))


class TestExportReport:
    def test_empty_report_header_only(self, tmp_path):
        files = export_report(empty_report(), tmp_path)
        assert "accuracy.csv" in files and "manifest.json" in files
        lines = (tmp_path / "accuracy.csv").read_text().strip().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("method,dataset,")

    def test_two_methods_three_datasets_six_rows(self, tmp_path):
        train = tight_synthetic()
        report = run_cross_validation(
            train, {"other": tight_synthetic(count=20, seed=8)},
            methods=["raw", "pca"], k=2, seed=0,
        )
        export_report(report, tmp_path)
        with open(tmp_path / "accuracy.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 6
        assert {(r["method"], r["dataset"]) for r in rows} == {
            (m, d) for m in ("raw", "pca") for d in ("train", "valid", "other")
        }

    def test_confusion_csv_round_trips_exactly(self, tmp_path):
        train = tight_synthetic()
        report = run_cross_validation(train, {}, methods=["raw"], k=3, seed=1)
        export_report(report, tmp_path)
        cm = report.confusion["raw"]["valid"]
        index = {c.value: i for i, c in enumerate(cm.classes)}
        counts = np.zeros_like(cm.counts)
        normalized = np.zeros_like(cm.normalized)
        with open(tmp_path / "confusion" / "raw_valid.csv") as fh:
            for row in csv.DictReader(fh):
                i, j = index[row["true"]], index[row["predicted"]]
                counts[i, j] = int(row["count"])
                normalized[i, j] = float(row["normalized"])
        assert np.array_equal(counts, cm.counts)
        assert np.array_equal(normalized, cm.normalized)

    def test_latent_files_and_manifest(self, tmp_path):
        train = tight_synthetic()
        report = run_cross_validation(
            train, {}, methods=["uae"], k=2, seed=0, ae_template=SMALL_AE
        )
        files = export_report(report, tmp_path)
        assert "latent/uae_valid.csv" in files
        assert "latent/uae_valid.svg" in files
        svg = (tmp_path / "latent" / "uae_valid.svg").read_text()
        assert svg.startswith("<svg") and "circle" in svg

    def test_sample_accuracy_column_consistent(self, tmp_path):
        train = tight_synthetic()
        report = run_cross_validation(train, {}, methods=["raw"], k=2, seed=0)
        export_report(report, tmp_path)
        with open(tmp_path / "accuracy.csv") as fh:
            row = next(r for r in csv.DictReader(fh) if r["dataset"] == "valid")
        expected = np.mean(report.fold_sample_acc["raw"]["valid"])
        assert float(row["sample_acc_mean"]) == expected

    def test_attribution_distributions_exported(self, tmp_path):
        from emolatent.attribution import AttributionResult

        rng = np.random.default_rng(0)
        results = [
            AttributionResult(
                sample_id=f"s{i}", target_dim=1, scores=rng.standard_normal(88),
                delta_output=0.5,
            )
            for i in range(3)
        ]
        report = empty_report()
        report.attributions = {"angry": {1: results}}
        files = export_report(report, tmp_path)
        assert "attribution/angry_1.csv" in files
        with open(tmp_path / "attribution" / "angry_1.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3 * 88
        assert {r["sample_id"] for r in rows} == {"s0", "s1", "s2"}
        assert all(r["class"] == "angry" and r["target_dim"] == "1" for r in rows)
        recovered = [float(r["score"]) for r in rows if r["sample_id"] == "s1"]
        assert np.array_equal(np.array(recovered), results[1].scores)
