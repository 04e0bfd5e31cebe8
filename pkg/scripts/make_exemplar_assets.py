"""Regenerate the bundled exemplar images.

The bond exemplar draws each of the 23 bond styles next to its wire name;
the case exemplar is a text card listing the 12 normalization cases. Both
are reconstructions shipped as repository assets, rendered with Pillow so
they can be rebuilt offline at any time.

Usage: python scripts/make_exemplar_assets.py
"""

from __future__ import annotations

import math
from pathlib import Path

from PIL import Image, ImageDraw

ASSETS = Path(__file__).resolve().parents[1] / "src" / "ocsrbench" / "assets"

BOND_NAMES = [
    "single",
    "double",
    "triple",
    "aromatic",
    "solid wedge",
    "dashed wedge",
    "hollow wedge",
    "wavy",
    "any",
    "bold",
    "dashed bold",
    "dashed double",
    "dashed triple",
    "single or double",
    "bold double",
    "double either",
    "single or aromatic",
    "double or aromatic",
    "dative",
    "dashed dative",
    "hydrogen",
    "attachment point",
    "triple with single dash",
]

CASES = [
    "Case 1: asterisk or arc from an atom -> R-group variable (Ra, Rb, ...) on a single bond",
    "Case 2: bracket with subscript m -> predict without the bracket, emit brackets entry with mark m",
    "Case 3: charge outside complex brackets -> assign it to the central metal atom",
    "Case 4: HO- on a ring with undefined attachment -> other bond end is wildcard ?",
    "Case 5: bond truncated at the image edge -> other end is wildcard atom ?",
    "Case 6: dashed line to an undefined group -> other end is R-group variable Ra",
    "Case 7: complex graphical structure -> GROUPa (then GROUPb, GROUPc, ...)",
    "Case 8: charge drawn in ring center -> any ring atom; incomplete arcs are aromatic bonds",
    "Case 9: R on a ring with undefined attachment -> add R to each CH ring carbon (Ra, Rb, Rc, ...)",
    "Case 10: geometric shapes as Markush -> Ra, Rb, ...; same shape shares one label",
    "Case 11: ignore colors, highlights, decorative overlays; keep the chemical entity",
    "Case 12: d_n label -> n aromatic hydrogens replaced by explicit deuterium (D) atoms",
]


def _dashes(draw, x0, y, x1, width=3, dash=9, gap=6):
    x = x0
    while x < x1:
        draw.line([(x, y), (min(x + dash, x1), y)], fill="black", width=width)
        x += dash + gap


def _draw_bond(draw, name: str, x0: int, y: int, x1: int) -> None:
    if name == "single":
        draw.line([(x0, y), (x1, y)], fill="black", width=3)
    elif name == "double":
        draw.line([(x0, y - 4), (x1, y - 4)], fill="black", width=3)
        draw.line([(x0, y + 4), (x1, y + 4)], fill="black", width=3)
    elif name == "triple":
        for dy in (-7, 0, 7):
            draw.line([(x0, y + dy), (x1, y + dy)], fill="black", width=3)
    elif name == "aromatic":
        draw.line([(x0, y - 4), (x1, y - 4)], fill="black", width=3)
        _dashes(draw, x0, y + 5, x1)
    elif name == "solid wedge":
        draw.polygon([(x0, y), (x1, y - 9), (x1, y + 9)], fill="black")
    elif name == "dashed wedge":
        steps = 7
        for i in range(steps):
            t = i / (steps - 1)
            x = x0 + t * (x1 - x0)
            h = 2 + t * 8
            draw.line([(x, y - h), (x, y + h)], fill="black", width=3)
    elif name == "hollow wedge":
        draw.polygon([(x0, y), (x1, y - 9), (x1, y + 9)], outline="black", width=3)
    elif name == "wavy":
        points = []
        for i in range(0, x1 - x0 + 1, 2):
            points.append((x0 + i, y + 7 * math.sin(i / 7.0)))
        draw.line(points, fill="black", width=3)
    elif name == "any":
        _dashes(draw, x0, y, x1, width=2, dash=6, gap=6)
    elif name == "bold":
        draw.line([(x0, y), (x1, y)], fill="black", width=8)
    elif name == "dashed bold":
        _dashes(draw, x0, y, x1, width=8, dash=12, gap=8)
    elif name == "dashed double":
        _dashes(draw, x0, y - 4, x1)
        _dashes(draw, x0, y + 4, x1)
    elif name == "dashed triple":
        for dy in (-7, 0, 7):
            _dashes(draw, x0, y + dy, x1)
    elif name == "single or double":
        for dy in (-6, 0, 6):
            _dashes(draw, x0, y + dy, x1, width=2)
    elif name == "bold double":
        draw.line([(x0, y - 5), (x1, y - 5)], fill="black", width=7)
        draw.line([(x0, y + 5), (x1, y + 5)], fill="black", width=7)
    elif name == "double either":
        draw.line([(x0, y - 5), (x1, y + 5)], fill="black", width=3)
        draw.line([(x0, y + 5), (x1, y - 5)], fill="black", width=3)
    elif name == "single or aromatic":
        draw.line([(x0, y - 4), (x1, y - 4)], fill="black", width=3)
        _dashes(draw, x0, y + 5, x1, width=2, dash=4, gap=7)
    elif name == "double or aromatic":
        draw.line([(x0, y - 5), (x1, y - 5)], fill="black", width=3)
        draw.line([(x0, y), (x1, y)], fill="black", width=2)
        _dashes(draw, x0, y + 6, x1, width=2, dash=4, gap=7)
    elif name == "dative":
        draw.line([(x0, y), (x1 - 10, y)], fill="black", width=3)
        draw.polygon([(x1, y), (x1 - 12, y - 7), (x1 - 12, y + 7)], fill="black")
    elif name == "dashed dative":
        _dashes(draw, x0, y, x1 - 12)
        draw.polygon([(x1, y), (x1 - 12, y - 7), (x1 - 12, y + 7)], fill="black")
    elif name == "hydrogen":
        _dashes(draw, x0, y, x1, width=2, dash=3, gap=8)
    elif name == "attachment point":
        draw.line([(x0, y), (x1 - 14, y)], fill="black", width=3)
        draw.line([(x1 - 14, y - 9), (x1, y + 9)], fill="black", width=3)
        draw.line([(x1 - 14, y + 9), (x1, y - 9)], fill="black", width=3)
    elif name == "triple with single dash":
        draw.line([(x0, y - 7), (x1, y - 7)], fill="black", width=3)
        _dashes(draw, x0, y, x1, dash=6, gap=6)
        draw.line([(x0, y + 7), (x1, y + 7)], fill="black", width=3)


def make_bond_exemplar(path: Path) -> None:
    cols, rows = 2, 12
    cell_w, cell_h = 430, 58
    image = Image.new("RGB", (cols * cell_w + 30, rows * cell_h + 70), "white")
    draw = ImageDraw.Draw(image)
    draw.text((20, 16), "Bond types and their visual appearance", fill="black")
    for i, name in enumerate(BOND_NAMES):
        col, row = divmod(i, rows)
        x = 25 + col * cell_w
        y = 70 + row * cell_h
        _draw_bond(draw, name, x, y, x + 150)
        draw.text((x + 170, y - 7), name, fill="black")
    image.save(path)


def make_case_exemplar(path: Path) -> None:
    image = Image.new("RGB", (1020, 40 + 34 * len(CASES) + 30), "white")
    draw = ImageDraw.Draw(image)
    draw.text((20, 14), "Non-standard styles and their standardized forms", fill="black")
    for i, case in enumerate(CASES):
        draw.text((24, 52 + 34 * i), case, fill="black")
    image.save(path)


def main() -> None:
    ASSETS.mkdir(parents=True, exist_ok=True)
    make_bond_exemplar(ASSETS / "bond_exemplar.png")
    make_case_exemplar(ASSETS / "case_exemplar.png")
    print(f"wrote {ASSETS / 'bond_exemplar.png'}")
    print(f"wrote {ASSETS / 'case_exemplar.png'}")


if __name__ == "__main__":
    main()
