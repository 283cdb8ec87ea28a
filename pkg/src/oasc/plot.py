"""SVG scatter of inputs colored by cluster, with diamond center markers."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .exceptions import ValidationError
from .labeling import label_points

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


@dataclass
class PlotSpec:
    report: str
    output: str
    width: int = 480
    height: int = 480
    points: int = 500

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError("image dimensions must be positive")
        if self.points < 0:
            raise ValidationError("point subsample count must be nonnegative")


def color(label):
    return PALETTE[(int(label) - 1) % len(PALETTE)]


def render_svg(bank, assignment, points, width=480, height=480, title=None) -> str:
    points = np.asarray(points, dtype=np.float64).reshape(-1, bank.D)
    if bank.D != 2:
        raise ValidationError("only 2-D banks can be plotted")
    labels = label_points(bank, assignment, points) if len(points) else np.empty(0, np.int64)
    everything = np.vstack([points, bank.centers])
    lo, hi = everything.min(axis=0), everything.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    margin = 12.0
    s = min((width - 2 * margin) / span[0], (height - 2 * margin) / span[1])
    # center the drawing, y axis pointing up
    ox = (width - s * span[0]) / 2 - s * lo[0]
    oy = (height + s * span[1]) / 2 + s * lo[1]

    def xy(p):
        return ox + s * p[0], oy - s * p[1]

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append('<g class="points" stroke="none" fill-opacity="0.25">')
    for p, lab in zip(points, labels):
        x, y = xy(p)
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color(lab)}"/>')
    out.append("</g>")
    out.append('<g class="centers" stroke="black" stroke-width="1">')
    r = 6.0
    for c, lab in zip(bank.centers, assignment.y):
        x, y = xy(c)
        pts = f"{x:.2f},{y - r:.2f} {x + r:.2f},{y:.2f} {x:.2f},{y + r:.2f} {x - r:.2f},{y:.2f}"
        out.append(f'<polygon class="diamond" points="{pts}" fill="{color(lab)}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def subsample(X, count, seed):
    if count >= len(X):
        return X
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(2,)))
    return X[np.sort(rng.choice(len(X), size=count, replace=False))]
