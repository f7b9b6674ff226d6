"""CSV and SVG writers. Output is deterministic for identical inputs."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PANEL_W = 800
PANEL_H = 400
_MARGIN = 50


def fmt(x) -> str:
    """17 significant digits; round-trips every double."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) if v else np.nan for v in r] for r in body])
    return header, data


def write_profiles_csv(path: Path, x: np.ndarray, u: np.ndarray) -> Path:
    return write_csv(path, ["x", "u1", "u2", "u3", "u4", "u5"], zip(x, *u))


def _panel(x: np.ndarray, y: np.ndarray, top: int, title: str) -> list[str]:
    w, h, m = PANEL_W, PANEL_H, _MARGIN
    x0, x1 = float(np.min(x)), float(np.max(x))
    y0, y1 = float(np.min(y)), float(np.max(y))
    if y1 - y0 <= 0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    sx = (w - 2 * m) / (x1 - x0)
    sy = (h - 2 * m) / (y1 - y0)
    pts = " ".join(f"{m + (xi - x0) * sx:.2f},{top + h - m - (yi - y0) * sy:.2f}" for xi, yi in zip(x, y))
    return [
        f'<g id="{title}">',
        f'<rect x="{m}" y="{top + m}" width="{w - 2 * m}" height="{h - 2 * m}" fill="none" stroke="#999"/>',
        f'<text x="{w / 2:.0f}" y="{top + m - 15}" text-anchor="middle" font-size="16">{title}</text>',
        f'<text x="{m - 5}" y="{top + m + 5}" text-anchor="end" font-size="11">{y1:.3g}</text>',
        f'<text x="{m - 5}" y="{top + h - m}" text-anchor="end" font-size="11">{y0:.3g}</text>',
        f'<text x="{m}" y="{top + h - m + 18}" text-anchor="middle" font-size="11">{x0:.3g}</text>',
        f'<text x="{w - m}" y="{top + h - m + 18}" text-anchor="middle" font-size="11">{x1:.3g}</text>',
        f'<polyline fill="none" stroke="#1f4e9a" stroke-width="1.5" points="{pts}"/>',
        "</g>",
    ]


def write_profiles_svg(path: Path, x: np.ndarray, u: np.ndarray) -> Path:
    """One 800x400 panel per species, each profile divided by its sup-norm."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{PANEL_H * len(u)}" '
        f'viewBox="0 0 {PANEL_W} {PANEL_H * len(u)}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for i, ui in enumerate(u):
        sup = float(np.max(np.abs(ui)))
        y = ui / sup if sup > 0 else ui
        lines += _panel(x, y, i * PANEL_H, f"u{i + 1}/max(u{i + 1})")
    lines.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
