"""Interpretable speech-emotion-recognition pipeline at desk scale.

2-D latent autoencoders (undercomplete and denoising) over 88-dimensional
eGeMAPS functionals, PCA / linear-SVC baselines, k-fold and triad
evaluation with cross-corpus transfer, and rescale-rule feature
attribution against a neutral reference.
"""

__version__ = "0.1.0"

from .attribution import (
    AttributionResult,
    ReferenceInput,
    attribute_class,
    build_reference,
    deeplift_attribute,
    group_scores,
)
from .autoencoder import (
    AutoencoderConfig,
    LatentEmbedding,
    TrainedAutoencoder,
    corrupt,
    encode,
    reconstruct,
    train,
)
from .baselines import PcaModel, SvcModel, pca_fit, pca_transform, svc_fit, svc_predict
from .data import (
    CLASS_ORDER,
    Corpus,
    EmotionLabel,
    FoldSplit,
    LabeledSample,
    Standardizer,
    apply_standardizer,
    filter_classes,
    fit_standardizer,
    kfold_split,
    parse_corpus,
    remove_outliers,
    write_corpus_csv,
)
from .errors import DataError, EmolatentError, NumericalError, UsageError
from .evaluation import (
    ALL_TRIADS,
    ConfusionMatrix,
    ExperimentReport,
    FittedPipeline,
    PreprocessingOptions,
    TriadSpec,
    confusion_matrix,
    export_report,
    preprocess_corpora,
    run_cross_validation,
    run_triads,
    unweighted_accuracy,
)
from .features import FEATURE_DIM, FEATURE_NAMES, default_grouping, packaged_grouping
from .nn import (
    AdamState,
    DenseLayer,
    ForwardTrace,
    NetworkModel,
    adam_step,
    backward,
    forward,
    init_network,
    mse_loss,
)
from .synthetic import SyntheticConfig, default_config, generate_synthetic
