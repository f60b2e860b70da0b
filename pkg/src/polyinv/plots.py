"""Rendering: deterministic 2-D SVG overlays and matplotlib report figures.

The SVG path is hand-written (SVG 1.1, fixed decimal formatting) so that
identical inputs give identical bytes. The benchmark and bound-curve
commands additionally render matplotlib figures next to their CSV output.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import Polytope

__all__ = ["bench_figure", "curves_figure", "polytopes_svg"]

_PALETTE = [
    ("#1f77b4", "#9ecae1"),
    ("#d62728", "#ff9896"),
    ("#2ca02c", "#98df8a"),
    ("#9467bd", "#c5b0d5"),
    ("#ff7f0e", "#ffbb78"),
    ("#8c564b", "#c49c94"),
]


def _fmt(x: float) -> str:
    return format(x, ".6f")


def _ordered_polygon(S: Polytope) -> np.ndarray:
    """Vertices in counterclockwise order (2-D only)."""
    angles = np.arctan2(S.vertices[:, 1], S.vertices[:, 0])
    return S.vertices[np.argsort(angles, kind="stable")]


def polytopes_svg(polytopes, sample_points=None, successor_points=None) -> str:
    """Static SVG overlay of 2-D polytopes, the unit circle, optional points."""
    polys = list(polytopes)
    if not polys:
        raise ValueError("need at least one polytope to render")
    for S in polys:
        if S.n != 2:
            raise ValueError("SVG rendering supports dimension 2 only")
    xs = np.vstack([S.vertices for S in polys])
    bound = max(1.0, float(np.max(np.abs(xs))))
    if sample_points is not None and len(sample_points):
        bound = max(bound, float(np.max(np.abs(sample_points))))
    if successor_points is not None and len(successor_points):
        bound = max(bound, float(np.max(np.abs(successor_points))))
    half = bound * 1.08
    # SVG's y axis points down; emit with y negated to keep math orientation.
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        (
            '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'viewBox="{_fmt(-half)} {_fmt(-half)} {_fmt(2 * half)} {_fmt(2 * half)}" '
            'width="640" height="640">'
        ),
        (
            f'<circle cx="0" cy="0" r="1" fill="none" stroke="#888888" '
            f'stroke-width="{_fmt(half / 320)}" stroke-dasharray="{_fmt(half / 64)}"/>'
        ),
    ]
    for i, S in enumerate(polys):
        stroke, fill = _PALETTE[i % len(_PALETTE)]
        pts = _ordered_polygon(S)
        path = " ".join(
            ("M" if j == 0 else "L") + f" {_fmt(p[0])} {_fmt(-p[1])}"
            for j, p in enumerate(pts)
        )
        lines.append(
            f'<path d="{path} Z" fill="{fill}" fill-opacity="0.25" '
            f'stroke="{stroke}" stroke-width="{_fmt(half / 160)}"/>'
        )
    r_dot = half / 160
    if sample_points is not None:
        for p in np.atleast_2d(sample_points):
            lines.append(
                f'<circle cx="{_fmt(p[0])}" cy="{_fmt(-p[1])}" r="{_fmt(r_dot)}" '
                'fill="#444444"/>'
            )
    if successor_points is not None:
        for p in np.atleast_2d(successor_points):
            lines.append(
                f'<circle cx="{_fmt(p[0])}" cy="{_fmt(-p[1])}" r="{_fmt(r_dot)}" '
                'fill="none" stroke="#aa3333" stroke-width="{0}"/>'.format(
                    _fmt(r_dot / 2)
                )
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def bench_figure(rows: list[dict], path) -> None:
    """Benchmark summary: inner-approximation ratio per (n, M) grid cell."""
    labels = [f"({r['n']},{r['M']})" for r in rows]
    lam = [r.get("lambda_star") for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    xs = np.arange(len(rows))
    ok = [i for i, v in enumerate(lam) if v is not None]
    ax1.plot(xs[ok], [lam[i] for i in ok], "o-", color="#1f77b4")
    ax1.set_xticks(xs, labels)
    ax1.set_ylabel(r"$\lambda^*$")
    ax1.set_xlabel("(dimension, modes)")
    ax1.set_ylim(0.0, 1.05)
    ax1.grid(alpha=0.3)
    vt = [r.get("V_tilde") for r in rows]
    vs = [r.get("V_star") for r in rows]
    ax2.plot(xs[ok], [vt[i] for i in ok], "s-", label="data-driven vertices")
    ax2.plot(xs[ok], [vs[i] for i in ok], "^-", label="model-based vertices")
    ax2.set_xticks(xs, labels)
    ax2.set_xlabel("(dimension, modes)")
    ax2.set_ylabel("vertex count")
    ax2.legend(fontsize=8)
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def curves_figure(rows: list[dict], path) -> None:
    """Contraction-rate bound curves against sample count."""
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    styles = {
        "lambda_B": ("o-", "#1f77b4", "a-priori rate"),
        "lambda_eps": ("s--", "#d62728", "scenario rate"),
    }
    for name, (style, color, label) in styles.items():
        pts = sorted(
            (r["N"], r["value"])
            for r in rows
            if r["curve"] == name and r["value"] is not None
        )
        if pts:
            ax.plot(*zip(*pts), style, color=color, label=label, markersize=4)
    ax.set_xlabel("sample count N")
    ax.set_ylabel("certified contraction rate")
    ax.set_xscale("log")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
