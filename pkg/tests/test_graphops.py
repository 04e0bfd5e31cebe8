"""Canonical ranking, normalization, simplification, and the oracle."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given

import hypothesis.strategies as st

from conftest import graphs, mutate_graph, random_graph, shuffle_ids
from ocsrbench.graphops import (
    ConfigurationError,
    SizeGuardExceeded,
    brute_force_isomorphic,
    canonical_ranking,
    default_simplification,
    fold_deuterium,
    normalize_placeholder_labels,
    project_simplified,
    relabel_atoms,
    simplify_bonds,
    sort_atoms_canonically,
)
from ocsrbench.molgraph import (
    Atom,
    AtomLabel,
    BASIC_BOND_TYPES,
    Bond,
    BondType,
    Bracket,
    ContractViolation,
    LabelKind,
    MolGraph,
)


def _attr_tuple(g, atom):
    return (
        atom.label.kind.value,
        atom.label.text,
        str(atom.charge or 0),
        atom.isotope or 0,
        atom.valence or 0,
        int(atom.radical or 0),
        g.degree(atom.id),
        tuple(sorted(b.bond_type.value for b in g.incident_bonds(atom.id))),
    )


class TestCanonicalRanking:
    def test_single_atom(self):
        g = MolGraph([Atom(0, AtomLabel.element("C"))])
        assert canonical_ranking(g) == {0: 0}

    def test_middle_of_chain_gets_unique_rank(self):
        # C-O-C: the O is structurally unique regardless of id order.
        for ids in [(0, 1, 2), (2, 0, 1)]:
            a, b, c = ids
            g = MolGraph(
                atoms=[
                    Atom(a, AtomLabel.element("C")),
                    Atom(b, AtomLabel.element("O")),
                    Atom(c, AtomLabel.element("C")),
                ],
                bonds=[Bond(a, b, BondType.SINGLE), Bond(b, c, BondType.SINGLE)],
            )
            ranks = canonical_ranking(g)
            carbon_ranks = {ranks[a], ranks[c]}
            assert ranks[b] not in carbon_ranks

    def test_ranks_are_permutation(self):
        rng = random.Random(1)
        for _ in range(30):
            g = random_graph(rng, max_atoms=8)
            ranks = canonical_ranking(g)
            assert sorted(ranks.values()) == list(range(len(g.atoms)))

    def test_canonical_form_invariant_under_permutations(self):
        # 20 random graphs, 5 random id permutations each: the rank-induced
        # attribute sequence must be identical.
        rng = random.Random(7)
        for _ in range(20):
            g = random_graph(rng, max_atoms=8, min_atoms=1)
            ranks = canonical_ranking(g)
            by_rank = sorted(g.atoms, key=lambda a: ranks[a.id])
            reference = [_attr_tuple(g, a) for a in by_rank]
            for _ in range(5):
                shuffled = shuffle_ids(rng, g)
                sranks = canonical_ranking(shuffled)
                sequence = [
                    _attr_tuple(shuffled, a)
                    for a in sorted(shuffled.atoms, key=lambda a: sranks[a.id])
                ]
                assert sequence == reference

    def test_invalid_graph_is_contract_violation(self):
        g = MolGraph(atoms=[Atom(0, AtomLabel.element("C"))], bonds=[Bond(0, 5, BondType.SINGLE)])
        with pytest.raises(ContractViolation):
            canonical_ranking(g)

    def test_sorted_graph_rank_order_is_identity(self):
        rng = random.Random(3)
        for _ in range(10):
            g = sort_atoms_canonically(random_graph(rng, max_atoms=7, min_atoms=1))
            ranks = canonical_ranking(g)
            assert all(ranks[a.id] == i for i, a in enumerate(g.atoms))


class TestNormalizePlaceholders:
    def test_first_ranked_placeholder_becomes_alpha(self):
        # Rγ ranks before Rα here (lower degree), so the renaming maps
        # Rγ -> Rα and Rα -> Rβ.
        g = MolGraph(
            atoms=[
                Atom(0, AtomLabel.rgroup_greek("γ")),
                Atom(1, AtomLabel.rgroup_greek("α")),
                Atom(2, AtomLabel.element("C")),
            ],
            bonds=[Bond(1, 2, BondType.SINGLE)],
        )
        ranks = canonical_ranking(g)
        assert ranks[0] < ranks[1]
        renamed = normalize_placeholder_labels(g)
        assert renamed.atom(0).label.text == "Rα"
        assert renamed.atom(1).label.text == "Rβ"

    def test_numbered_rgroups_untouched(self):
        g = MolGraph(
            atoms=[Atom(0, AtomLabel.rgroup_numbered(1)), Atom(1, AtomLabel.rgroup_numbered(2))]
        )
        assert normalize_placeholder_labels(g) == g

    def test_same_text_shares_target(self):
        g = MolGraph(
            atoms=[
                Atom(0, AtomLabel.rgroup_greek("δ")),
                Atom(1, AtomLabel.rgroup_greek("δ")),
                Atom(2, AtomLabel.rgroup_greek("β")),
            ]
        )
        renamed = normalize_placeholder_labels(g)
        texts = [a.label.text for a in renamed.atoms]
        assert texts[0] == texts[1]
        assert set(texts) == {"Rα", "Rβ"}

    def test_families_are_independent(self):
        g = MolGraph(
            atoms=[
                Atom(0, AtomLabel.rgroup_greek("γ")),
                Atom(1, AtomLabel.group_placeholder("δ")),
            ]
        )
        renamed = normalize_placeholder_labels(g)
        assert renamed.atom(0).label.text == "Rα"
        assert renamed.atom(1).label.text == "GROUPα"

    def test_contiguous_from_alpha(self):
        rng = random.Random(11)
        for _ in range(30):
            g = random_graph(rng, max_atoms=8)
            renamed = normalize_placeholder_labels(g)
            for family, prefix in (("R", "R"), ("GROUP", "GROUP")):
                suffixes = {
                    a.label.text[len(prefix):]
                    for a in renamed.atoms
                    if a.label.greek_placeholder_family == family
                }
                expected = "αβγδεζηθικλμνξοπρστυφχψω"[: len(suffixes)]
                assert suffixes == set(expected)

    def test_idempotent_on_random_placeholder_graphs(self):
        rng = random.Random(13)
        for _ in range(50):
            g = random_graph(rng, max_atoms=7)
            once = normalize_placeholder_labels(g)
            assert normalize_placeholder_labels(once) == once


class TestSimplifyBonds:
    def test_default_mapping_values(self):
        mapping = default_simplification()
        assert mapping[BondType.BOLD] is BondType.SINGLE
        assert mapping[BondType.HOLLOW_WEDGE] is BondType.SOLID_WEDGE
        assert mapping[BondType.DOUBLE_OR_AROMATIC] is BondType.DOUBLE
        assert mapping[BondType.TRIPLE_WITH_SINGLE_DASH] is BondType.TRIPLE
        # basic fixed points
        for bt in BASIC_BOND_TYPES:
            assert mapping[bt] is bt

    def test_apply(self):
        g = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("C"))],
            bonds=[Bond(0, 1, BondType.BOLD)],
        )
        assert simplify_bonds(g).bonds[0].bond_type is BondType.SINGLE
        g2 = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("C"))],
            bonds=[Bond(0, 1, BondType.DOUBLE)],
        )
        assert simplify_bonds(g2).bonds[0].bond_type is BondType.DOUBLE

    def test_mapping_must_be_total(self):
        mapping = default_simplification()
        del mapping[BondType.WAVY]
        g = MolGraph()
        with pytest.raises(ConfigurationError):
            simplify_bonds(g, mapping)

    def test_mapping_image_must_be_basic(self):
        mapping = default_simplification()
        mapping[BondType.WAVY] = BondType.BOLD
        with pytest.raises(ConfigurationError):
            simplify_bonds(MolGraph(), mapping)

    def test_mapping_must_fix_basic(self):
        mapping = default_simplification()
        mapping[BondType.DOUBLE] = BondType.SINGLE
        with pytest.raises(ConfigurationError):
            simplify_bonds(MolGraph(), mapping)

    @given(graphs(max_atoms=7))
    def test_idempotent(self, g):
        once = simplify_bonds(g)
        assert simplify_bonds(once) == once


class TestProjectSimplified:
    def test_drops_attributes_and_brackets(self):
        g = MolGraph(
            atoms=[
                Atom(0, AtomLabel.element("C"), charge=Fraction(-1), isotope=14, point_2d=(1, 2)),
                Atom(1, AtomLabel.element("O")),
            ],
            bonds=[Bond(0, 1, BondType.WAVY)],
            brackets=[Bracket({0, 1}, "n")],
        )
        p = project_simplified(g)
        assert not p.brackets
        atom = p.atom(0)
        assert atom.charge is None and atom.isotope is None
        assert atom.point_2d == (1, 2)
        assert p.bonds[0].bond_type is BondType.SINGLE

    def test_example_document_graph_projection(self):
        g = MolGraph(
            atoms=[
                Atom(0, AtomLabel.element("C"), point_2d=(151, 202)),
                Atom(1, AtomLabel.element("O"), point_2d=(255, 221), charge=Fraction(-1)),
                Atom(2, AtomLabel.element("N"), point_2d=(132, 434)),
                Atom(3, AtomLabel.superatom("Ph"), point_2d=(59, 100)),
                Atom(4, AtomLabel.element("C"), point_2d=(276, 348), isotope=14),
            ],
            bonds=[
                Bond(0, 1, BondType.DOUBLE),
                Bond(0, 2, BondType.SINGLE),
                Bond(2, 3, BondType.WAVY),
                Bond(0, 4, BondType.SOLID_WEDGE),
            ],
            brackets=[Bracket({0, 1, 2}, "3")],
        )
        p = project_simplified(g)
        assert [a.label.to_wire() for a in p.atoms] == ["C", "O", "N", "[Ph]", "C"]
        assert p.atom(1).charge is None
        assert p.atom(4).isotope is None
        assert p.bond_between(2, 3).bond_type is BondType.SINGLE
        assert p.bond_between(0, 4).bond_type is BondType.SOLID_WEDGE
        assert not p.brackets
        assert p.atom(0).point_2d == (151, 202)

    def test_wedges_survive(self):
        g = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("C"))],
            bonds=[Bond(0, 1, BondType.SOLID_WEDGE)],
        )
        assert project_simplified(g).bonds[0].bond_type is BondType.SOLID_WEDGE

    @given(graphs(max_atoms=8))
    def test_output_is_basic_and_bare(self, g):
        p = project_simplified(g)
        assert all(b.bond_type in BASIC_BOND_TYPES for b in p.bonds)
        assert not p.brackets
        for atom in p.atoms:
            assert atom.charge is None
            assert atom.isotope is None
            assert atom.valence is None
            assert atom.radical is None

    @given(graphs(max_atoms=8))
    def test_idempotent(self, g):
        once = project_simplified(g)
        assert project_simplified(once) == once


class TestFoldDeuterium:
    def test_folds_to_heavy_hydrogen(self):
        g = MolGraph(atoms=[Atom(0, AtomLabel.deuterium())])
        folded = fold_deuterium(g)
        assert folded.atom(0).label.kind is LabelKind.ELEMENT
        assert folded.atom(0).label.text == "H"
        assert folded.atom(0).isotope == 2


class TestBruteForceOracle:
    def test_triangle_vs_path(self):
        def carbon_graph(bonds):
            return MolGraph(
                atoms=[Atom(i, AtomLabel.element("C")) for i in range(3)],
                bonds=[Bond(a, b, BondType.SINGLE) for a, b in bonds],
            )

        triangle = carbon_graph([(0, 1), (1, 2), (2, 0)])
        path = carbon_graph([(0, 1), (1, 2)])
        assert brute_force_isomorphic(triangle, path) is None

    def test_self_shuffle_always_found(self, rng):
        for _ in range(25):
            g = random_graph(rng, max_atoms=7)
            shuffled = shuffle_ids(rng, g)
            mapping = brute_force_isomorphic(g, shuffled)
            assert mapping is not None
            # verify the witness
            for bond in g.bonds:
                image = shuffled.bond_between(mapping[bond.atom1], mapping[bond.atom2])
                assert image is not None and image.bond_type is bond.bond_type

    def test_bond_type_mismatch(self):
        co_double = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("O"))],
            bonds=[Bond(0, 1, BondType.DOUBLE)],
        )
        co_single = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("O"))],
            bonds=[Bond(0, 1, BondType.SINGLE)],
        )
        assert brute_force_isomorphic(co_double, co_single) is None

    def test_size_guard(self):
        g = MolGraph(atoms=[Atom(i, AtomLabel.element("C")) for i in range(11)])
        with pytest.raises(SizeGuardExceeded):
            brute_force_isomorphic(g, g)

    def test_directional_orientation_checked(self):
        forward = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("N"))],
            bonds=[Bond(0, 1, BondType.DATIVE)],
        )
        backward = MolGraph(
            atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("N"))],
            bonds=[Bond(1, 0, BondType.DATIVE)],
        )
        assert brute_force_isomorphic(forward, backward) is None

    def test_bracket_marks_compared_whitespace_collapsed(self):
        def bracketed(mark):
            return MolGraph(
                atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("C"))],
                bonds=[Bond(0, 1, BondType.SINGLE)],
                brackets=[Bracket({0, 1}, mark)],
            )

        assert brute_force_isomorphic(bracketed("n=1, 2"), bracketed("n=1,2")) is not None
        assert brute_force_isomorphic(bracketed("n"), bracketed("N")) is None

    def test_round_trip_property(self, rng):
        # for random valid graphs <= 10 atoms the shuffled copy always maps
        for _ in range(40):
            g = random_graph(rng, max_atoms=10)
            assert brute_force_isomorphic(g, shuffle_ids(rng, g)) is not None


class TestRelabelAtoms:
    def test_requires_total_injective_mapping(self):
        g = MolGraph(atoms=[Atom(0, AtomLabel.element("C")), Atom(1, AtomLabel.element("O"))])
        with pytest.raises(ConfigurationError):
            relabel_atoms(g, {0: 5})
        with pytest.raises(ConfigurationError):
            relabel_atoms(g, {0: 5, 1: 5})

    @given(graphs(max_atoms=6), st.integers(0, 2**32))
    def test_relabel_preserves_structure(self, g, seed):
        rng = random.Random(seed)
        shuffled = shuffle_ids(rng, g)
        assert len(shuffled.atoms) == len(g.atoms)
        assert len(shuffled.bonds) == len(g.bonds)
        assert sorted(b.bond_type.value for b in shuffled.bonds) == sorted(
            b.bond_type.value for b in g.bonds
        )


def test_mutate_graph_yields_valid_graphs(rng):
    from ocsrbench.molgraph import validate_graph

    for _ in range(100):
        g = random_graph(rng, max_atoms=8)
        assert validate_graph(mutate_graph(rng, g)).ok
