"""Scaffold-aware ligand-based virtual screening toolkit.

Core workflow: parse assay SMILES into molecular graphs, extract ring
scaffolds, cluster and resample them to balance rare chemotypes, grow new
molecules around sampled scaffolds with a discrete graph denoising
sampler, self-train a fingerprint classifier with confidence-gated pseudo
labels, then evaluate and diversity-rerank the ranked output.

Everything is seeded: the same inputs and seeds reproduce every artifact
byte for byte.
"""

__version__ = "0.1.0"

from .chem import (
    Atom,
    BondOrder,
    MolGraph,
    ParseError,
    check_valence,
    murcko_scaffold,
    parse_smiles,
    to_smiles,
)
from .fingerprints import Fingerprint, ecfp, tanimoto
from .metrics import RankedList, bedroc, dcg_k, ef_k, log_auc, sd_k
from .rerank import build_candidates, lambda_sweep, mmr_rerank
from .sampling import cluster_scaffolds, sample_library, sampling_weights
from .selftrain import FingerprintClassifier, SelfTrainConfig, self_train

__all__ = [
    "Atom",
    "BondOrder",
    "Fingerprint",
    "FingerprintClassifier",
    "MolGraph",
    "ParseError",
    "RankedList",
    "SelfTrainConfig",
    "__version__",
    "bedroc",
    "build_candidates",
    "check_valence",
    "cluster_scaffolds",
    "dcg_k",
    "ecfp",
    "ef_k",
    "lambda_sweep",
    "log_auc",
    "mmr_rerank",
    "murcko_scaffold",
    "parse_smiles",
    "sample_library",
    "sampling_weights",
    "sd_k",
    "self_train",
    "tanimoto",
    "to_smiles",
]
