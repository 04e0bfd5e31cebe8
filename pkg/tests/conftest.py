"""Shared fixtures, hypothesis strategies, and plain-random graph generators."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

import hypothesis.strategies as st

from ocsrbench.molgraph import (
    Atom,
    AtomLabel,
    Bond,
    BondType,
    Bracket,
    GREEK_LETTERS,
    MolGraph,
    Radical,
)
from ocsrbench.graphops import relabel_atoms

settings.register_profile(
    "default", settings(max_examples=60, suppress_health_check=[HealthCheck.too_slow])
)
settings.load_profile("default")

DATA_DIR = Path(__file__).parent / "data"

ELEMENT_POOL = ["C", "N", "O", "S", "P", "F", "Cl", "Br", "Si", "Fe"]
SUPERATOM_POOL = ["Ph", "Boc", "MeO", "Et", "OTf", "R?x"]
ALL_BOND_TYPES = list(BondType)
SMILES_BOND_TYPES = [BondType.SINGLE, BondType.DOUBLE, BondType.TRIPLE]


# ---------------------------------------------------------------------------
# Plain-random generation (seeded loops in determinism/oracle tests)
# ---------------------------------------------------------------------------


def random_label(rng: random.Random, placeholder_ok: bool = True) -> AtomLabel:
    roll = rng.random()
    if roll < 0.62 or not placeholder_ok:
        return AtomLabel.element(rng.choice(ELEMENT_POOL))
    if roll < 0.74:
        return AtomLabel.superatom(rng.choice(SUPERATOM_POOL))
    if roll < 0.82:
        return AtomLabel.rgroup_numbered(rng.randint(1, 3))
    if roll < 0.90:
        return AtomLabel.rgroup_greek(rng.choice(GREEK_LETTERS[:4]))
    if roll < 0.94:
        return AtomLabel.group_placeholder(rng.choice(GREEK_LETTERS[:3]))
    if roll < 0.97:
        return AtomLabel.wildcard()
    return AtomLabel.deuterium()


def random_graph(
    rng: random.Random,
    max_atoms: int = 8,
    min_atoms: int = 0,
    bond_pool: list[BondType] = ALL_BOND_TYPES,
    with_attrs: bool = True,
    with_brackets: bool = True,
    placeholder_ok: bool = True,
) -> MolGraph:
    n = rng.randint(min_atoms, max_atoms)
    atoms = []
    for i in range(n):
        kwargs = {}
        if with_attrs:
            if rng.random() < 0.25:
                kwargs["charge"] = Fraction(rng.choice([-2, -1, 1, 2])) if rng.random() < 0.85 else Fraction(1, 2)
            if rng.random() < 0.15:
                kwargs["isotope"] = rng.randint(1, 240)
            if rng.random() < 0.08:
                kwargs["valence"] = rng.randint(1, 6)
            if rng.random() < 0.10:
                kwargs["radical"] = rng.choice(list(Radical))
            if rng.random() < 0.5:
                kwargs["point_2d"] = (float(rng.randint(0, 500)), float(rng.randint(0, 500)))
        atoms.append(Atom(id=i, label=random_label(rng, placeholder_ok), **kwargs))

    bonds = []
    taken = set()
    if n >= 2:
        target = rng.randint(0, min(n + 2, n * (n - 1) // 2))
        # bias towards connectedness: chain first
        order = list(range(n))
        rng.shuffle(order)
        for k in range(1, n):
            if rng.random() < 0.75:
                a, b = order[k - 1], order[k]
                if frozenset((a, b)) not in taken:
                    taken.add(frozenset((a, b)))
                    bonds.append(Bond(a, b, rng.choice(bond_pool)))
        for _ in range(target):
            a, b = rng.sample(range(n), 2)
            if frozenset((a, b)) in taken:
                continue
            taken.add(frozenset((a, b)))
            bonds.append(Bond(a, b, rng.choice(bond_pool)))

    brackets = []
    if with_brackets and n >= 1 and rng.random() < 0.4:
        members = set(rng.sample(range(n), rng.randint(1, n)))
        brackets.append(Bracket(members, rng.choice(["n", "3", "n=1,2", "m"])))
        if len(members) > 2 and rng.random() < 0.5:
            inner = set(rng.sample(sorted(members), rng.randint(1, len(members) - 1)))
            brackets.append(Bracket(inner, rng.choice(["2", "k"])))
        elif rng.random() < 0.4:
            rest = sorted(set(range(n)) - members)
            if rest:
                other = set(rng.sample(rest, rng.randint(1, len(rest))))
                brackets.append(Bracket(other, "x"))

    return MolGraph(atoms, bonds, brackets)


def shuffle_ids(rng: random.Random, g: MolGraph) -> MolGraph:
    ids = list(g.atom_ids)
    new = ids[:]
    rng.shuffle(new)
    offset = rng.choice([0, 0, 100])
    mapping = {old: fresh + offset for old, fresh in zip(ids, new)}
    shuffled = relabel_atoms(g, mapping)
    atoms = list(shuffled.atoms)
    rng.shuffle(atoms)
    return MolGraph(atoms, shuffled.bonds, shuffled.brackets)


def mutate_graph(rng: random.Random, g: MolGraph) -> MolGraph:
    """One random semantic edit; always returns a valid graph."""
    from dataclasses import replace

    choices = ["label", "charge"]
    if g.bonds:
        choices += ["bond_type", "drop_bond", "flip_bond"]
    if len(g.atoms) >= 2:
        choices.append("add_bond")
    if g.brackets:
        choices += ["mark", "drop_bracket"]
    if not g.atoms:
        return MolGraph([Atom(0, AtomLabel.element("C"))])
    kind = rng.choice(choices)
    atoms, bonds, brackets = list(g.atoms), list(g.bonds), list(g.brackets)

    if kind == "label":
        i = rng.randrange(len(atoms))
        atoms[i] = replace(atoms[i], label=random_label(rng))
    elif kind == "charge":
        i = rng.randrange(len(atoms))
        old = atoms[i].charge
        new = Fraction(rng.choice([-1, 1, 2]))
        atoms[i] = replace(atoms[i], charge=None if old == new else new)
    elif kind == "bond_type":
        i = rng.randrange(len(bonds))
        bonds[i] = replace(bonds[i], bond_type=rng.choice(ALL_BOND_TYPES))
    elif kind == "flip_bond":
        i = rng.randrange(len(bonds))
        bonds[i] = Bond(bonds[i].atom2, bonds[i].atom1, bonds[i].bond_type, bonds[i].direction)
    elif kind == "drop_bond":
        bonds.pop(rng.randrange(len(bonds)))
    elif kind == "add_bond":
        existing = {b.pair for b in bonds}
        pairs = [
            (a.id, b.id)
            for i, a in enumerate(atoms)
            for b in atoms[i + 1 :]
            if frozenset((a.id, b.id)) not in existing
        ]
        if pairs:
            a, b = rng.choice(pairs)
            bonds.append(Bond(a, b, rng.choice(ALL_BOND_TYPES)))
    elif kind == "mark":
        i = rng.randrange(len(brackets))
        brackets[i] = Bracket(brackets[i].atoms, brackets[i].mark + "'")
    elif kind == "drop_bracket":
        brackets.pop(rng.randrange(len(brackets)))
    return MolGraph(atoms, bonds, brackets)


def random_smiles_graph(rng: random.Random, max_atoms: int = 8) -> MolGraph:
    """A SMILES-expressible random graph (tree plus occasional ring)."""
    n = rng.randint(1, max_atoms)
    atoms = []
    for i in range(n):
        kwargs = {}
        if rng.random() < 0.85:
            label = AtomLabel.element(rng.choice(["C", "N", "O", "S", "P", "F", "Cl", "Br"]))
            if rng.random() < 0.15:
                kwargs["charge"] = Fraction(rng.choice([-1, 1]))
            if rng.random() < 0.10:
                kwargs["isotope"] = rng.randint(2, 40)
            if rng.random() < 0.2:
                kwargs["hydrogens"] = rng.randint(0, 3)
        elif rng.random() < 0.7:
            label = AtomLabel.superatom(rng.choice(["Ph", "Boc", "MeO", "Et"]))
        else:
            label = AtomLabel.deuterium()
        atoms.append(Atom(id=i, label=label, **kwargs))
    bonds = []
    for i in range(1, n):
        parent = rng.randrange(i)
        bonds.append(Bond(parent, i, rng.choice(SMILES_BOND_TYPES)))
    taken = {b.pair for b in bonds}
    if n >= 4 and rng.random() < 0.4:
        for _ in range(3):
            a, b = rng.sample(range(n), 2)
            if frozenset((a, b)) not in taken:
                bonds.append(Bond(a, b, BondType.SINGLE))
                break
    return MolGraph(atoms, bonds)


# ---------------------------------------------------------------------------
# Hypothesis strategies
# ---------------------------------------------------------------------------


@st.composite
def graphs(draw, max_atoms=8, bond_pool=None, with_brackets=True):
    seed = draw(st.integers(0, 2**48))
    rng = random.Random(seed)
    return random_graph(
        rng,
        max_atoms=max_atoms,
        bond_pool=bond_pool or ALL_BOND_TYPES,
        with_brackets=with_brackets,
    )


@st.composite
def smiles_graphs(draw, max_atoms=8):
    seed = draw(st.integers(0, 2**48))
    return random_smiles_graph(random.Random(seed), max_atoms=max_atoms)


@pytest.fixture
def rng():
    return random.Random(20240811)


@pytest.fixture
def data_dir():
    return DATA_DIR
