from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaffscreen.chem import Atom, BondOrder, MolGraph, parse_smiles
from scaffscreen.fingerprints import (
    DEFAULT_NBITS,
    DEFAULT_RADIUS,
    Fingerprint,
    WidthMismatch,
    ecfp,
    fingerprint_matrix,
    load_fingerprint_cache,
    save_fingerprint_cache,
    tanimoto,
)


@st.composite
def small_graphs(draw):
    """Random connected labeled graphs; chemical validity is irrelevant here."""
    n = draw(st.integers(min_value=1, max_value=8))
    elements = draw(st.lists(st.sampled_from(["C", "N", "O", "S"]), min_size=n, max_size=n))
    charges = draw(st.lists(st.sampled_from([0, 0, 0, 1, -1]), min_size=n, max_size=n))
    atoms = [Atom(e, charge=c if e in ("N", "O") else 0) for e, c in zip(elements, charges)]
    bonds: dict[tuple[int, int], BondOrder] = {}
    for child in range(1, n):
        parent = draw(st.integers(min_value=0, max_value=child - 1))
        bonds[(parent, child)] = draw(st.sampled_from([BondOrder.SINGLE, BondOrder.DOUBLE]))
    extra = draw(st.integers(min_value=0, max_value=2))
    for _ in range(extra):
        if n < 2:
            break
        i = draw(st.integers(min_value=0, max_value=n - 2))
        j = draw(st.integers(min_value=i + 1, max_value=n - 1))
        bonds.setdefault((i, j), BondOrder.SINGLE)
    return MolGraph(atoms, bonds)


def _relabel(mol: MolGraph, perm: list[int]) -> MolGraph:
    """Rebuild ``mol`` with atom ``i`` moved to position ``perm[i]``."""
    atoms = [None] * mol.n_atoms
    for i, atom in enumerate(mol.atoms):
        atoms[perm[i]] = atom
    bonds = {(perm[i], perm[j]): order for (i, j), order in mol.bonds.items()}
    return MolGraph(atoms, bonds)


@settings(max_examples=150, deadline=None)
@given(small_graphs(), st.randoms(use_true_random=False))
def test_fingerprint_ignores_atom_numbering(mol, rand):
    perm = list(range(mol.n_atoms))
    rand.shuffle(perm)
    assert ecfp(mol, nbits=256) == ecfp(_relabel(mol, perm), nbits=256)


@settings(max_examples=80, deadline=None)
@given(small_graphs())
def test_larger_radius_keeps_every_smaller_radius_bit(mol):
    previous = ecfp(mol, radius=0, nbits=256)
    for radius in (1, 2, 3):
        current = ecfp(mol, radius=radius, nbits=256)
        assert previous.bits & current.bits == previous.bits
        previous = current


@settings(max_examples=80, deadline=None)
@given(small_graphs())
def test_popcount_bounded_by_identifier_count(mol):
    fp = ecfp(mol, radius=2, nbits=1024)
    assert 1 <= fp.popcount <= mol.n_atoms * 3


# Frozen behavior on fixed inputs; any change here means the bit layout moved
# and every on-disk cache is invalid.
PINNED_HEX = [
    ("c1ccccc1", "00002000000040000000080000000000"),
    ("CCO", "09000080000000000002480041000200"),
    ("CC(=O)Oc1ccccc1C(=O)O", "000000080088e12120cb780021112310"),
    ("[NH3+]CC([O-])=O", "0400200001840100219000004a000200"),
    ("C1CCc2ccccc2C1", "08000000200070000000080060101029"),
]


@pytest.mark.parametrize("smiles, expected", PINNED_HEX)
def test_pinned_bit_patterns(smiles, expected):
    assert ecfp(parse_smiles(smiles), radius=2, nbits=128).to_hex() == expected


def test_benzene_collapses_to_three_identifiers():
    # All six atoms are equivalent, so each radius contributes one identifier.
    fp = ecfp(parse_smiles("c1ccccc1"), radius=2, nbits=1024)
    assert fp.popcount == 3


def test_none_molecule_gives_zero_vector():
    fp = ecfp(None, radius=2, nbits=512)
    assert fp.bits == 0
    assert fp.popcount == 0
    assert fp.nbits == 512


def test_tanimoto_conventions():
    zero = Fingerprint(bits=0, nbits=64, radius=2)
    some = Fingerprint(bits=0b1011, nbits=64, radius=2)
    assert tanimoto(zero, zero) == 1.0
    assert tanimoto(zero, some) == 0.0
    assert tanimoto(some, zero) == 0.0
    assert tanimoto(some, some) == 1.0


def test_tanimoto_hand_value():
    x = Fingerprint(bits=0b1110, nbits=16, radius=1)
    y = Fingerprint(bits=0b0111, nbits=16, radius=1)
    assert tanimoto(x, y) == pytest.approx(2 / 4)


@settings(max_examples=60, deadline=None)
@given(small_graphs(), small_graphs())
def test_tanimoto_is_symmetric_and_bounded(a, b):
    x, y = ecfp(a, nbits=256), ecfp(b, nbits=256)
    s = tanimoto(x, y)
    assert s == tanimoto(y, x)
    assert 0.0 <= s <= 1.0


def test_width_mismatch_raises():
    x = ecfp(parse_smiles("CCO"), nbits=128)
    y = ecfp(parse_smiles("CCO"), nbits=256)
    with pytest.raises(WidthMismatch):
        tanimoto(x, y)
    with pytest.raises(WidthMismatch):
        fingerprint_matrix([x, y])


def test_argument_validation():
    mol = parse_smiles("CCO")
    with pytest.raises(ValueError):
        ecfp(mol, radius=-1)
    with pytest.raises(ValueError):
        ecfp(mol, nbits=100)
    with pytest.raises(ValueError):
        ecfp(mol, nbits=4)
    with pytest.raises(ValueError):
        Fingerprint(bits=1 << 64, nbits=64, radius=2)


def test_hex_round_trip():
    fp = ecfp(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"), radius=2, nbits=1024)
    text = fp.to_hex()
    assert len(text) == 256
    back = Fingerprint.from_hex(text, radius=2)
    assert back == fp


def test_to_array_matches_on_bits():
    fp = ecfp(parse_smiles("c1ccncc1"), nbits=128)
    arr = fp.to_array()
    assert arr.shape == (128,)
    assert set(np.flatnonzero(arr)) == set(fp.on_bits())
    assert arr.sum() == fp.popcount


def test_cache_round_trip(tmp_path):
    mols = ["CCO", "c1ccccc1", "CC(C)N1CCN(c2ccccc2)CC1"]
    entries = [(f"rec{i}", ecfp(parse_smiles(s), nbits=256)) for i, s in enumerate(mols)]
    path = tmp_path / "cache.csv"
    save_fingerprint_cache(path, entries)
    loaded = load_fingerprint_cache(path)
    assert set(loaded) == {"rec0", "rec1", "rec2"}
    for record_id, fp in entries:
        assert loaded[record_id] == fp


def test_fingerprint_matrix_shape_and_content():
    fps = [ecfp(parse_smiles(s), nbits=64) for s in ["CCO", "CCN"]]
    matrix = fingerprint_matrix(fps)
    assert matrix.shape == (2, 64)
    assert matrix.dtype == np.float64
    for row, fp in zip(matrix, fps):
        assert set(np.flatnonzero(row)) == set(fp.on_bits())
    with pytest.raises(ValueError):
        fingerprint_matrix([])


def test_charge_and_element_change_the_fingerprint():
    base = ecfp(parse_smiles("CCO"), nbits=1024)
    assert ecfp(parse_smiles("CCN"), nbits=1024) != base
    assert ecfp(parse_smiles("CC[O-]"), nbits=1024) != base
