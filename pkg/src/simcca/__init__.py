"""Similarity-constrained canonical correlation analysis for two-view data."""

from .cca import CcaSolution, cca
from .constrained import OptimizerConfig, SimCcaSolution, simcca_identity, simcca_soft
from .covariance import CovarianceBlocks, covariance_blocks, joint_covariance
from .data import (
    FeatureMeta,
    PairedDataset,
    PairedWindow,
    ViewMatrix,
    load_view,
    match_probes,
    preprocess,
    preprocess_pair,
    window,
    write_view,
)
from .evaluation import RocCurve, roc_auc, top_k_enrichment
from .pcca import (
    IDENTITY,
    UNCONSTRAINED,
    ConstraintMode,
    EmConfig,
    EmTrace,
    LatentPosterior,
    ModelParams,
    em_fit,
    negative_log_likelihood,
    posterior_latent,
)
from .psimpca import PsimPcaParams, psimpca_fit
from .scan import DependencyProfile, MethodChoice, ScanConfig, dependency_score, read_profile, scan
from .synth import GeneratorSpec, generate, planted_probe_ids, planted_spec

__version__ = "0.1.0"
