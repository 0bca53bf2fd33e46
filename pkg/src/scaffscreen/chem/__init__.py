"""Chemistry core: molecular graphs, SMILES I/O, valence rules, scaffolds."""

from .graph import AROMATIC_CAPABLE, Atom, BondOrder, MolGraph, ORGANIC_SUBSET
from .scaffold import murcko_scaffold, scaffold_atom_indices
from .smiles import (
    ParseError,
    SerializationError,
    SmilesFeatureWarning,
    parse_smiles,
    to_smiles,
)
from .valence import (
    ALLOWED_VALENCES,
    ValenceViolation,
    ValidityReport,
    allowed_valences,
    check_valence,
    remaining_capacity,
)

__all__ = [
    "AROMATIC_CAPABLE",
    "ALLOWED_VALENCES",
    "Atom",
    "BondOrder",
    "MolGraph",
    "ORGANIC_SUBSET",
    "ParseError",
    "SerializationError",
    "SmilesFeatureWarning",
    "ValenceViolation",
    "ValidityReport",
    "allowed_valences",
    "check_valence",
    "murcko_scaffold",
    "parse_smiles",
    "remaining_capacity",
    "scaffold_atom_indices",
    "to_smiles",
]
