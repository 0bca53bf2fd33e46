"""Discrete graph diffusion for scaffold-conditioned molecule generation."""

from .denoisers import (
    Denoiser,
    DenoiserOutput,
    ExternalDenoiser,
    MarginalDenoiser,
    OneHotEchoDenoiser,
    ProtocolError,
)
from .marginals import (
    EDGE_CATEGORIES,
    EDGE_NONE,
    Marginals,
    compute_marginals,
    decode_graph,
    encode_molecule,
)
from .sampler import (
    DiffusionState,
    GeneratedEntry,
    GenerationReport,
    extend_scaffold,
    forward_sample,
    generate_scaffold_extensions,
    posterior_distributions,
    posterior_step,
    sample_prior,
)
from .schedule import CosineSchedule, mixing_matrix, transition

__all__ = [
    "CosineSchedule",
    "Denoiser",
    "DenoiserOutput",
    "DiffusionState",
    "EDGE_CATEGORIES",
    "EDGE_NONE",
    "ExternalDenoiser",
    "GeneratedEntry",
    "GenerationReport",
    "Marginals",
    "MarginalDenoiser",
    "OneHotEchoDenoiser",
    "ProtocolError",
    "compute_marginals",
    "decode_graph",
    "encode_molecule",
    "extend_scaffold",
    "forward_sample",
    "generate_scaffold_extensions",
    "mixing_matrix",
    "posterior_distributions",
    "posterior_step",
    "sample_prior",
    "transition",
]
