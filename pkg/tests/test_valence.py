from __future__ import annotations

import pytest

from scaffscreen.chem import (
    Atom,
    BondOrder,
    MolGraph,
    check_valence,
    parse_smiles,
    remaining_capacity,
)
from scaffscreen.chem.valence import allowed_valences


@pytest.mark.parametrize(
    "smiles",
    [
        "CCO",
        "C=O",
        "C#N",
        "CC(=O)O",
        "c1ccccc1",
        "c1ccncc1",
        "c1cc[nH]c1",
        "c1ccoc1",
        "c1ccsc1",
        "c1cnc[nH]1",
        "c1ccc2[nH]ccc2c1",
        "c1ccc2ccccc2c1",
        "C[N+](C)(C)C",
        "[O-]C(=O)C",
        "CS(=O)(=O)C",
        "CP(C)C",
        "CP(=O)(C)C",
        "FC(F)(F)F",
        "ClCBr",
        "FF",
        "B(O)(O)O",
    ],
)
def test_valid_molecules(smiles):
    report = check_valence(parse_smiles(smiles))
    assert report.valid, report.violations


@pytest.mark.parametrize(
    "smiles,bad_atom",
    [
        ("CC(C)(C)(C)C", 1),   # five substituents on one carbon
        ("C(F)(F)(F)(F)F", 0),
        ("N(C)(C)(C)C", 0),    # neutral nitrogen with four bonds
        ("O(C)(C)C", 0),
        ("F(C)C", 0),
        ("O=S(=O)(=O)(C)C", 1),
    ],
)
def test_overbonded_atoms_are_flagged(smiles, bad_atom):
    report = check_valence(parse_smiles(smiles))
    assert not report.valid
    assert any(v.atom_index == bad_atom for v in report.violations)
    assert all(v.reason for v in report.violations)


def test_charge_adjusts_nitrogen_and_oxygen():
    assert allowed_valences(Atom("N", charge=1)) == (4,)
    assert allowed_valences(Atom("N", charge=-1)) == (2,)
    assert allowed_valences(Atom("O", charge=-1)) == (1,)
    assert allowed_valences(Atom("O", charge=1)) == (3,)
    # Charge leaves other elements alone.
    assert allowed_valences(Atom("S")) == (2, 4, 6)


def test_charged_species():
    assert check_valence(parse_smiles("[NH4+]")).valid
    assert check_valence(parse_smiles("[O-]C")).valid
    assert not check_valence(parse_smiles("[O-](C)C")).valid


def test_aromatic_bond_on_plain_atom_is_flagged():
    mol = MolGraph(
        [Atom("C"), Atom("C", aromatic=True)],
        {(0, 1): BondOrder.AROMATIC},
    )
    report = check_valence(mol)
    assert not report.valid
    reasons = " ".join(v.reason for v in report.violations)
    assert "aromatic" in reasons


def test_aromatic_atom_needs_two_ring_bonds():
    # An aromatic atom dangling off a single aromatic bond is not a ring.
    mol = MolGraph(
        [Atom("C", aromatic=True), Atom("C", aromatic=True)],
        {(0, 1): BondOrder.AROMATIC},
    )
    assert not check_valence(mol).valid


def test_fused_ring_junction_carbon_is_valid():
    # Naphthalene junction atoms carry three aromatic bonds: floor(4.5) = 4.
    mol = parse_smiles("c1ccc2ccccc2c1")
    report = check_valence(mol)
    assert report.valid, report.violations


def test_explicit_hydrogens_count_toward_valence():
    assert check_valence(parse_smiles("[CH4]")).valid
    assert not check_valence(parse_smiles("[CH5]")).valid
    # A bracket CH3 bonded once is exactly tetravalent; bonded twice it is over.
    assert check_valence(parse_smiles("[CH3]C")).valid
    assert not check_valence(parse_smiles("[CH3](C)C")).valid


def test_remaining_capacity_simple_cases():
    ethane = parse_smiles("CC")
    assert remaining_capacity(ethane, 0) == 3

    benzene = parse_smiles("c1ccccc1")
    assert remaining_capacity(benzene, 0) == 1

    pyrrole = parse_smiles("c1cc[nH]c1")
    nitrogen = next(i for i, a in enumerate(pyrrole.atoms) if a.element == "N")
    assert remaining_capacity(pyrrole, nitrogen) == 0

    piperidine = parse_smiles("C1CCNCC1")
    nitrogen = next(i for i, a in enumerate(piperidine.atoms) if a.element == "N")
    assert remaining_capacity(piperidine, nitrogen) == 1

    saturated = parse_smiles("C(F)(F)(F)F")
    assert remaining_capacity(saturated, 0) == 0


def test_remaining_capacity_never_negative():
    overfull = parse_smiles("CC(C)(C)(C)C")
    assert remaining_capacity(overfull, 1) == 0
