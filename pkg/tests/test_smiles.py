"""SMILES parser and canonical emitter tests."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given

from conftest import random_smiles_graph, shuffle_ids, smiles_graphs
from ocsrbench.graphops import AttributeComparison, brute_force_isomorphic
from ocsrbench.molgraph import (
    Atom,
    AtomLabel,
    Bond,
    BondDir,
    BondType,
    Bracket,
    IMPLICIT_H,
    LabelKind,
    MolGraph,
    ParitySign,
)
from ocsrbench.smiles import (
    NotSmilesExpressibleError,
    SmilesParseError,
    emit_canonical_smiles,
    parse_smiles,
)

SMILES_COMPARE = AttributeComparison(hydrogens=True, aromatic_flag=True)


class TestParse:
    def test_pyridine_example(self):
        g = parse_smiles("[MeO]c1nc(C#N)cc(C)c1")
        assert len(g.atoms) == 10
        superatoms = [a for a in g.atoms if a.label.kind is LabelKind.SUPERATOM]
        assert [a.label.text for a in superatoms] == ["MeO"]
        assert sum(1 for b in g.bonds if b.bond_type is BondType.TRIPLE) == 1
        assert sum(1 for a in g.atoms if a.aromatic) == 6

    def test_methane_implicit_hydrogens(self):
        g = parse_smiles("C")
        assert len(g.atoms) == 1
        assert g.atoms[0].hydrogens == 4

    def test_unclosed_ring_is_error(self):
        with pytest.raises(SmilesParseError, match="unclosed ring bond 1"):
            parse_smiles("C1CC")

    def test_unbalanced_branch(self):
        with pytest.raises(SmilesParseError):
            parse_smiles("C(C")
        with pytest.raises(SmilesParseError):
            parse_smiles("CC)C")

    def test_empty_string(self):
        with pytest.raises(SmilesParseError):
            parse_smiles("")

    def test_implicit_hydrogen_standard_valences(self):
        for smiles, expected in [
            ("O", 2),
            ("N", 3),
            ("Cl", 1),
            ("S", 2),
            ("P", 3),
            ("B", 3),
            ("C=O", 2),
            ("C#N", 1),
        ]:
            assert parse_smiles(smiles).atoms[0].hydrogens == expected

    def test_nitrogen_higher_valence(self):
        # 4 bonds exceed 3: the next standard valence (5) applies.
        g = parse_smiles("N(C)(C)(C)C")
        assert g.atoms[0].hydrogens == 1

    def test_aromatic_ring_hydrogens(self):
        g = parse_smiles("c1ccccc1")
        assert all(a.hydrogens == 1 for a in g.atoms)
        assert all(b.bond_type is BondType.AROMATIC for b in g.bonds)

    def test_pyrrole_bracket_nh(self):
        g = parse_smiles("c1cc[nH]c1")
        n = next(a for a in g.atoms if a.label.text == "N")
        assert n.aromatic and n.hydrogens == 1

    def test_bracket_charge_forms(self):
        assert parse_smiles("[O-]").atoms[0].charge == Fraction(-1)
        assert parse_smiles("[Fe+3]").atoms[0].charge == Fraction(3)
        assert parse_smiles("[Fe+++]").atoms[0].charge == Fraction(3)
        assert parse_smiles("[NH4+]").atoms[0].charge == Fraction(1)
        assert parse_smiles("[NH4+]").atoms[0].hydrogens == 4

    def test_isotopes(self):
        assert parse_smiles("[2H]").atoms[0].isotope == 2
        assert parse_smiles("[14C]").atoms[0].isotope == 14

    def test_superatom_brackets(self):
        for text in ["MeO", "Ph", "Boc", "OTf"]:
            atom = parse_smiles(f"[{text}]").atoms[0]
            assert atom.label.kind is LabelKind.SUPERATOM
            assert atom.label.text == text

    def test_pb_is_element_not_superatom(self):
        atom = parse_smiles("[Pb]").atoms[0]
        assert atom.label.kind is LabelKind.ELEMENT
        assert atom.label.text == "Pb"

    def test_deuterium_bracket(self):
        assert parse_smiles("[D]").atoms[0].label.kind is LabelKind.DEUTERIUM

    def test_explicit_hydrogens_fold_into_counts(self):
        folded = parse_smiles("[N+]([H])([H])([H])[H]")
        bracketed = parse_smiles("[NH4+]")
        assert len(folded.atoms) == 1
        assert folded.atoms[0].hydrogens == 4
        assert brute_force_isomorphic(folded, bracketed, SMILES_COMPARE) is not None

    def test_isotopic_hydrogen_not_folded(self):
        g = parse_smiles("[2H]C")
        assert len(g.atoms) == 2

    def test_fragment_dot(self):
        g = parse_smiles("[Na+].[Cl-]")
        assert len(g.atoms) == 2
        assert not g.bonds

    def test_percent_ring_closure(self):
        g = parse_smiles("C%12CCCCC%12")
        assert len(g.bonds) == 6

    def test_ring_bond_symbol_agreement(self):
        assert parse_smiles("C=1CCCCC=1").bond_between(0, 5).bond_type is BondType.DOUBLE
        assert parse_smiles("C1CCCCC=1").bond_between(0, 5).bond_type is BondType.DOUBLE
        with pytest.raises(SmilesParseError, match="conflicting"):
            parse_smiles("C=1CCCCC#1")

    def test_directional_bonds_recorded(self):
        g = parse_smiles("F/C=C/F")
        marked = [b for b in g.bonds if b.direction is not None]
        assert len(marked) == 2
        assert {b.direction for b in marked} == {BondDir.UP}

    def test_parity_neighbor_order(self):
        g = parse_smiles("F[C@H](Cl)Br")
        center = next(a for a in g.atoms if a.parity is not None)
        f_id = next(a.id for a in g.atoms if a.label.text == "F")
        assert center.parity.sign is ParitySign.CCW
        assert center.parity.neighbors[0] == f_id
        assert center.parity.neighbors[1] == IMPLICIT_H

    def test_whitespace_rejected(self):
        with pytest.raises(SmilesParseError, match="whitespace"):
            parse_smiles("C C")

    def test_two_bond_symbols_rejected(self):
        with pytest.raises(SmilesParseError):
            parse_smiles("C==C")

    def test_unknown_character(self):
        with pytest.raises(SmilesParseError):
            parse_smiles("C&C")


class TestEmit:
    def test_fixed_canonical_string_for_ethanol(self):
        out1 = emit_canonical_smiles(parse_smiles("OCC"))
        out2 = emit_canonical_smiles(parse_smiles("CCO"))
        assert out1 == out2
        again = parse_smiles(out1)
        assert brute_force_isomorphic(again, parse_smiles("CCO"), SMILES_COMPARE) is not None

    def test_empty_graph(self):
        assert emit_canonical_smiles(MolGraph()) == ""

    def test_dative_bond_refused(self):
        g = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("N"))],
            bonds=[Bond(0, 1, BondType.DATIVE)],
        )
        with pytest.raises(NotSmilesExpressibleError, match="dative"):
            emit_canonical_smiles(g)

    def test_bracket_refused(self):
        g = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C"))], brackets=[Bracket({0}, "n")]
        )
        with pytest.raises(NotSmilesExpressibleError, match="bracket"):
            emit_canonical_smiles(g)

    def test_placeholder_labels_refused(self):
        g = MolGraph(atoms=[Atom(0, AtomLabel.rgroup_greek("α"))])
        with pytest.raises(NotSmilesExpressibleError, match="label"):
            emit_canonical_smiles(g)

    def test_non_integer_charge_refused(self):
        g = MolGraph(atoms=[Atom(0, AtomLabel.element("C"), charge=Fraction(1, 2))])
        with pytest.raises(NotSmilesExpressibleError, match="non-integer charge"):
            emit_canonical_smiles(g)

    def test_emission_constant_on_isomorphism_class(self, rng):
        for _ in range(30):
            g = random_smiles_graph(rng, max_atoms=8)
            reference = emit_canonical_smiles(g)
            for _ in range(3):
                assert emit_canonical_smiles(shuffle_ids(rng, g)) == reference

    def test_aromatic_single_bond_explicit(self):
        # biphenyl: the inter-ring bond must re-parse as single
        g = parse_smiles("c1ccccc1-c1ccccc1")
        out = emit_canonical_smiles(g)
        g2 = parse_smiles(out)
        singles = [b for b in g2.bonds if b.bond_type is BondType.SINGLE]
        assert len(singles) == 1

    @given(smiles_graphs(max_atoms=8))
    def test_round_trip_isomorphic(self, g):
        text = emit_canonical_smiles(g)
        parsed = parse_smiles(text) if text else MolGraph()
        compare = AttributeComparison(hydrogens=False, aromatic_flag=True)
        if len(g.atoms) <= 10:
            assert brute_force_isomorphic(g, parsed, compare) is not None

    @given(smiles_graphs(max_atoms=8))
    def test_double_round_trip_stable(self, g):
        text = emit_canonical_smiles(g)
        if not text:
            return
        assert emit_canonical_smiles(parse_smiles(text)) == text


class TestCorpus:
    def test_corpus_round_trips(self, data_dir):
        lines = (data_dir / "smiles_corpus.txt").read_text().splitlines()
        assert len(lines) == 200
        assert "[MeO]c1nc(C#N)cc(C)c1" in lines
        for smiles in lines:
            g = parse_smiles(smiles)
            out = emit_canonical_smiles(g)
            g2 = parse_smiles(out) if out else MolGraph()
            assert len(g2.atoms) == len(g.atoms), smiles
            if len(g.atoms) <= 10:
                assert brute_force_isomorphic(g, g2, SMILES_COMPARE) is not None, smiles
            # and stability
            assert emit_canonical_smiles(g2) == out, smiles

    def test_corpus_stereo_survives(self, data_dir):
        from ocsrbench.matching import smiles_match

        lines = (data_dir / "smiles_corpus.txt").read_text().splitlines()
        stereo = [s for s in lines if "@" in s or "/" in s or "\\" in s]
        assert stereo
        for smiles in stereo:
            out = emit_canonical_smiles(parse_smiles(smiles))
            assert smiles_match(smiles, out).matched, smiles
