"""
MOSAIC difficulty taxonomy and metric.

Two orthogonal closed label vocabularies (18 visual presentation labels, 19
chemical semantics labels, ids frozen to the taxonomy tables), the per-sample
(N_vis, N_chem) score, dataset-level distribution / co-occurrence matrices,
coverage statistics, and difficulty-stratified accuracy aggregation.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import IntEnum
from typing import Iterable, Mapping, NamedTuple


class UnknownLabelError(ValueError):
    def __init__(self, dimension: str, name: str):
        super().__init__(f"unknown {dimension} difficulty label {name!r}")
        self.name = name


class UndefinedStatisticError(ValueError):
    """Requested a statistic over an empty sample set."""


class InputMismatchError(ValueError):
    """Result keys and label keys do not describe the same samples."""


class VisualLabel(IntEnum):
    """Visual presentation difficulty labels (ids 1-18 are frozen)."""

    DECORATED_TEXT = 1
    DECORATED_BOND = 2
    POLLUTED_BOUNDARY = 3
    BLURRY_IMAGE = 4
    ADDITIONAL_ARROW_BOX_TEXT = 5
    COLORED_AREAS_OR_IMAGE_BACKGROUND = 6
    BOND_CROSSING = 7
    R_REPRESENTED_BY_PATTERN = 8
    COLORED_AR = 9
    SHORT_BOND = 10
    NUMBERED_ATOM = 11
    INCOMPLETE_MOLECULE = 12
    LARGE_MOLECULE = 13
    LARGE_FONT = 14
    LONG_BOND = 15
    THICK_BOND = 16
    THIN_BOND = 17
    LONG_FUNCTIONAL_GROUP_NAME = 18

    @property
    def wire_name(self) -> str:
        return self.name.lower()

    @staticmethod
    def parse(name: str) -> "VisualLabel":
        try:
            return VisualLabel[name.strip().upper()]
        except KeyError:
            raise UnknownLabelError("visual", name) from None


class ChemicalLabel(IntEnum):
    """Chemical semantics difficulty labels (ids 1-19 are frozen)."""

    EQUAL_WIDTH_CHIRAL_BOND = 1
    CHARGE_SYMBOL = 2
    DASHED_BOND = 3
    WAVY_BOND = 4
    LONE_PAIR_ELECTRON_SYMBOL = 5
    TRIPLE_BOND = 6
    HASH_BOND = 7
    IONIC_BOND = 8
    R_ON_AR_UNCERTAIN_POSITION = 9
    ABBREVIATED_STRUCTURE = 10
    VALENCE_SYMBOL = 11
    POLYMER = 12
    AROMATIC_BOND = 13
    MULTI_GROUP = 14
    ATOM_ON_AR_UNCERTAIN_POSITION = 15
    TRANSITION_STATE = 16
    COORDINATION_BOND = 17
    CONSECUTIVE_DOUBLE_BOND = 18
    DOUBLE_DASHED_BOND = 19

    @property
    def wire_name(self) -> str:
        return self.name.lower()

    @staticmethod
    def parse(name: str) -> "ChemicalLabel":
        try:
            return ChemicalLabel[name.strip().upper()]
        except KeyError:
            raise UnknownLabelError("chemical", name) from None


@dataclass(frozen=True)
class LabelSet:
    """Per-sample difficulty annotation: one set per dimension."""

    visual: frozenset[VisualLabel] = frozenset()
    chemical: frozenset[ChemicalLabel] = frozenset()

    def __init__(
        self,
        visual: Iterable[VisualLabel] = (),
        chemical: Iterable[ChemicalLabel] = (),
    ):
        object.__setattr__(self, "visual", frozenset(visual))
        object.__setattr__(self, "chemical", frozenset(chemical))

    @staticmethod
    def from_names(visual: Iterable[str] = (), chemical: Iterable[str] = ()) -> "LabelSet":
        return LabelSet(
            visual=(VisualLabel.parse(n) for n in visual),
            chemical=(ChemicalLabel.parse(n) for n in chemical),
        )

    def to_json(self) -> dict:
        return {
            "visual_labels": sorted(l.wire_name for l in self.visual),
            "chemical_labels": sorted(l.wire_name for l in self.chemical),
        }


class MosaicScore(NamedTuple):
    n_vis: int
    n_chem: int


def mosaic_score(labels: LabelSet) -> MosaicScore:
    """The sample's difficulty coordinates: label counts per dimension."""
    return MosaicScore(len(labels.visual), len(labels.chemical))


@dataclass(frozen=True)
class DistributionMatrix:
    counts: dict[MosaicScore, int]
    total: int

    def to_rows(self) -> list[dict]:
        return [
            {"n_vis": key.n_vis, "n_chem": key.n_chem, "count": count}
            for key, count in sorted(self.counts.items())
        ]


def distribution_matrix(samples: Iterable[LabelSet]) -> DistributionMatrix:
    """How many samples land on each (n_vis, n_chem) cell."""
    counts: dict[MosaicScore, int] = {}
    total = 0
    for labels in samples:
        score = mosaic_score(labels)
        counts[score] = counts.get(score, 0) + 1
        total += 1
    return DistributionMatrix(counts, total)


def cooccurrence_matrix(
    samples: Iterable[LabelSet],
) -> dict[tuple[VisualLabel, ChemicalLabel], int]:
    """Count samples carrying each (visual, chemical) label pair."""
    counts: dict[tuple[VisualLabel, ChemicalLabel], int] = {}
    for labels in samples:
        for v in labels.visual:
            for c in labels.chemical:
                counts[(v, c)] = counts.get((v, c), 0) + 1
    return counts


def round_percent(numerator: int, denominator: int) -> Decimal:
    """Percentage at 2 decimals, half-up."""
    if denominator == 0:
        raise UndefinedStatisticError("percentage over zero samples is undefined")
    value = Decimal(numerator) * 100 / Decimal(denominator)
    return value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


class CoverageStats(NamedTuple):
    pct_at_least_one_label: float
    pct_both_dimensions: float


def coverage_stats(samples: Iterable[LabelSet]) -> CoverageStats:
    """Share of samples with any difficulty label, and with labels in both
    dimensions; 2-decimal half-up percentages."""
    total = 0
    at_least_one = 0
    both = 0
    for labels in samples:
        total += 1
        if labels.visual or labels.chemical:
            at_least_one += 1
        if labels.visual and labels.chemical:
            both += 1
    if total == 0:
        raise UndefinedStatisticError("coverage over an empty sample set is undefined")
    return CoverageStats(
        float(round_percent(at_least_one, total)),
        float(round_percent(both, total)),
    )


def difficulty_grid(
    results: Mapping[str, bool], labels: Mapping[str, LabelSet]
) -> dict[MosaicScore, tuple[int, int]]:
    """Per-cell (matched, population) over samples keyed identically."""
    if set(results.keys()) != set(labels.keys()):
        only_results = sorted(set(results) - set(labels))
        only_labels = sorted(set(labels) - set(results))
        raise InputMismatchError(
            f"sample keys differ; only in results: {only_results}, "
            f"only in labels: {only_labels}"
        )
    grid: dict[MosaicScore, tuple[int, int]] = {}
    for sample_id, matched in results.items():
        score = mosaic_score(labels[sample_id])
        won, population = grid.get(score, (0, 0))
        grid[score] = (won + (1 if matched else 0), population + 1)
    return grid


def accuracy_by_difficulty(
    results: Mapping[str, bool], labels: Mapping[str, LabelSet]
) -> dict[MosaicScore, float]:
    """Accuracy per populated difficulty cell; empty cells are omitted."""
    return {
        score: matched / population
        for score, (matched, population) in difficulty_grid(results, labels).items()
    }
