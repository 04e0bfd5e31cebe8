"""
Ring perception: smallest rings through each bond.

Good enough for aromaticity normalization, which only cares about rings of
size <= 7; molecule graphs here are small, so a per-bond BFS is plenty.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from .molgraph import MolGraph


def _shortest_path_avoiding(
    g: MolGraph, start: int, goal: int, banned: frozenset[int]
) -> Optional[list[int]]:
    """Shortest path start..goal that does not use the banned edge."""
    queue = deque([start])
    came_from: dict[int, int] = {start: start}
    while queue:
        current = queue.popleft()
        if current == goal:
            path = [current]
            while path[-1] != start:
                path.append(came_from[path[-1]])
            path.reverse()
            return path
        for nbr in g.neighbors(current):
            if frozenset((current, nbr)) == banned:
                continue
            if nbr not in came_from:
                came_from[nbr] = current
                queue.append(nbr)
    return None


def smallest_rings(g: MolGraph, max_size: Optional[int] = None) -> list[list[int]]:
    """Return the smallest ring through each ring bond, as ordered atom cycles.

    Cycles are deduplicated by atom set; traversal is deterministic (neighbor
    lists are id-sorted), so so is the output.
    """
    seen: set[frozenset[int]] = set()
    rings: list[list[int]] = []
    for bond in g.bonds:
        if bond.atom1 == bond.atom2:
            continue
        edge = frozenset((bond.atom1, bond.atom2))
        path = _shortest_path_avoiding(g, bond.atom1, bond.atom2, edge)
        if path is None:
            continue
        if max_size is not None and len(path) > max_size:
            continue
        key = frozenset(path)
        if key in seen:
            continue
        seen.add(key)
        rings.append(path)
    return rings
