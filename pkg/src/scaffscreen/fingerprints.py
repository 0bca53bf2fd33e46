"""Circular (Morgan-style) binary fingerprints.

Each atom starts from an invariant hashing its element, charge, degree,
explicit hydrogen count and aromatic flag. For ``radius`` rounds the
invariant is rehashed together with the sorted (bond order, neighbor
invariant) pairs, and every identifier seen along the way is folded into a
fixed-width bit vector modulo ``nbits``. Hashing uses blake2b, so bit
positions are stable across platforms and processes. Identifiers depend
only on the labeled graph, never on atom numbering.

The empty scaffold of an acyclic molecule maps to the all-zero vector, and
two all-zero vectors count as identical (Tanimoto 1.0); a zero vector
against a nonzero one scores 0.0. This keeps acyclic molecules from being
rewarded as mutually "diverse" in scaffold-diversity metrics.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .chem.graph import MolGraph, ORGANIC_SUBSET

__all__ = [
    "DEFAULT_NBITS",
    "DEFAULT_RADIUS",
    "Fingerprint",
    "WidthMismatch",
    "ecfp",
    "fingerprint_matrix",
    "load_fingerprint_cache",
    "save_fingerprint_cache",
    "tanimoto",
]

DEFAULT_RADIUS = 2
DEFAULT_NBITS = 1024

_ELEMENT_INDEX = {symbol: k for k, symbol in enumerate(ORGANIC_SUBSET)}


class WidthMismatch(ValueError):
    """Raised when combining fingerprints of different widths."""


@dataclass(frozen=True)
class Fingerprint:
    """Folded binary fingerprint held as an int bitset."""

    bits: int
    nbits: int
    radius: int

    def __post_init__(self) -> None:
        if self.nbits < 8 or self.nbits & (self.nbits - 1):
            raise ValueError("nbits must be a power of two, at least 8")
        if self.bits < 0 or self.bits >> self.nbits:
            raise ValueError("bit pattern wider than nbits")

    @property
    def popcount(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.nbits) if (self.bits >> k) & 1)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.nbits, dtype=np.float64)
        bits = self.bits
        while bits:
            low = bits & -bits
            out[low.bit_length() - 1] = 1.0
            bits ^= low
        return out

    def to_hex(self) -> str:
        return f"{self.bits:0{self.nbits // 4}x}"

    @classmethod
    def from_hex(cls, text: str, radius: int = DEFAULT_RADIUS) -> "Fingerprint":
        return cls(bits=int(text, 16), nbits=len(text) * 4, radius=radius)


def _hash64(*values: int) -> int:
    payload = b"".join(v.to_bytes(8, "little", signed=True) for v in values)
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little", signed=True)


def _initial_invariants(mol: MolGraph) -> list[int]:
    out = []
    for i, atom in enumerate(mol.atoms):
        out.append(
            _hash64(
                0x5EED,
                _ELEMENT_INDEX[atom.element],
                atom.charge,
                mol.degree(i),
                atom.explicit_h,
                int(atom.aromatic),
            )
        )
    return out


def ecfp(
    mol: MolGraph | None,
    radius: int = DEFAULT_RADIUS,
    nbits: int = DEFAULT_NBITS,
) -> Fingerprint:
    """Fingerprint a molecule; ``None`` (empty scaffold) gives the zero vector."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if nbits < 8 or nbits & (nbits - 1):
        raise ValueError("nbits must be a power of two, at least 8")
    if mol is None:
        return Fingerprint(bits=0, nbits=nbits, radius=radius)

    invariants = _initial_invariants(mol)
    identifiers = list(invariants)
    for _ in range(radius):
        refreshed = []
        for i in range(mol.n_atoms):
            neighborhood = sorted(
                (int(mol.bond(i, j)), invariants[j]) for j in mol.neighbors(i)
            )
            flat = [invariants[i]]
            for order, inv in neighborhood:
                flat.extend((order, inv))
            refreshed.append(_hash64(0xC1AC, *flat))
        invariants = refreshed
        identifiers.extend(invariants)

    bits = 0
    for ident in identifiers:
        bits |= 1 << (ident % nbits)
    return Fingerprint(bits=bits, nbits=nbits, radius=radius)


def tanimoto(x: Fingerprint, y: Fingerprint) -> float:
    """Tanimoto similarity of two equally wide fingerprints.

    Two empty vectors score 1.0, an empty against a nonempty scores 0.0.
    """
    if x.nbits != y.nbits:
        raise WidthMismatch(f"fingerprint widths differ: {x.nbits} vs {y.nbits}")
    union = (x.bits | y.bits).bit_count()
    if union == 0:
        return 1.0
    return (x.bits & y.bits).bit_count() / union


def save_fingerprint_cache(path, entries: Iterable[tuple[str, Fingerprint]]) -> None:
    """Write ``id,hex`` lines; one fingerprint per record."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record_id, fp in entries:
            fh.write(f"{record_id},{fp.to_hex()}\n")


def load_fingerprint_cache(path, radius: int = DEFAULT_RADIUS) -> dict[str, Fingerprint]:
    out: dict[str, Fingerprint] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record_id, _, hex_part = line.rpartition(",")
            out[record_id] = Fingerprint.from_hex(hex_part, radius=radius)
    return out


def fingerprint_matrix(fps: Sequence[Fingerprint]) -> np.ndarray:
    """Stack fingerprints into an (m, nbits) 0/1 float matrix."""
    if not fps:
        raise ValueError("no fingerprints given")
    width = fps[0].nbits
    for fp in fps:
        if fp.nbits != width:
            raise WidthMismatch("mixed fingerprint widths")
    return np.stack([fp.to_array() for fp in fps])
