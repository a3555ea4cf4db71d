"""Latent-variable estimation accuracy for two-component mixtures."""

from ._core import (
    AlphaGridMismatch,
    ConfigError,
    Dataset,
    DomainError,
    Error,
    ErrorEstimate,
    IdentifiabilityReport,
    LabelOrder,
    ModelSpec,
    ParamVec,
    Prior,
    RunFailed,
    StudyContext,
    coefficients,
    convergence_study,
    estimate,
    fisher_set,
    judge,
    log_evidence_complete,
    log_evidence_marginal,
    log_evidence_marginal_enumerated,
    mle,
    sample_joint,
    validate_identifiability,
)

__all__ = [name for name in dir() if not name.startswith("_")]


def reference_binomial():
    """The three-trial binomial mixture at (0.5, 0.8, 0.25) with its aligned prior."""
    model = ModelSpec.binomial_mixture(3)
    w = ParamVec(model, [0.5, 0.8, 0.25])
    return model, w, Prior.aligned(model, w)
