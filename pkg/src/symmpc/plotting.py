"""Figure rendering for planar partitions and comparison reports.

Only two-dimensional state spaces can be drawn; everything else raises
NotPlanar.  Pieces that belong to the reduced family are shaded grey, the
remaining orbit members stay white, so the saved figure shows at a glance
how much of the partition the symmetry argument avoided computing.
"""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import NotPlanar

#: absolute slack when deciding whether an intersection point satisfies a row
_VERTEX_TOL = 1e-7
#: two candidate vertices closer than this are the same corner
_MERGE_TOL = 1e-7
_REDUCED_FACE = "0.78"
_EXPANDED_FACE = "white"
_EDGE = "black"


def polygon_vertices(poly) -> np.ndarray:
    """Ordered corner list of a bounded planar polytope.

    Intersects every pair of facet lines and keeps the points satisfying all
    rows, then orders them counterclockwise around the centroid.  Returns an
    empty array when the polytope has no area.
    """
    if poly.dim != 2:
        raise NotPlanar(
            f"vertex enumeration needs 2 state dimensions, got {poly.dim}")
    a = poly.normals
    b = poly.offsets
    scale = np.maximum(1.0, np.abs(b))
    points = []
    for i in range(len(b)):
        for j in range(i + 1, len(b)):
            m = a[[i, j]]
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if abs(det) < 1e-12:
                continue
            p = np.linalg.solve(m, b[[i, j]])
            if np.all(a @ p <= b + _VERTEX_TOL * scale):
                points.append(p)
    corners: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - kept) > _MERGE_TOL for kept in corners):
            corners.append(p)
    if len(corners) < 3:
        return np.empty((0, 2))
    arr = np.array(corners)
    center = arr.mean(axis=0)
    order = np.argsort(np.arctan2(arr[:, 1] - center[1],
                                  arr[:, 0] - center[0]))
    return arr[order]


def plot_partition(solution, path, title: str | None = None) -> str:
    """Draw the state-space partition of a planar explicit solution.

    `solution` is an ExplicitSolution; each piece's critical region becomes
    one polygon.  Reduced pieces are shaded, orbit images are white.
    """
    for piece in solution.pieces:
        if piece.region.dim != 2:
            raise NotPlanar(
                "partition plots need a 2-dimensional state space, "
                f"this solution has {piece.region.dim}")

    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    # white pieces first so shaded ones end on top with crisp edges
    pieces = sorted(solution.pieces, key=lambda p: p.from_reduced)
    drawn = 0
    for piece in pieces:
        verts = polygon_vertices(piece.region)
        if len(verts) < 3:
            continue
        face = _REDUCED_FACE if piece.from_reduced else _EXPANDED_FACE
        ax.fill(verts[:, 0], verts[:, 1], facecolor=face, edgecolor=_EDGE,
                linewidth=0.6)
        drawn += 1
    if drawn == 0:
        raise NotPlanar("no piece of the solution has a drawable region")
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(title if title is not None
                 else f"partition, horizon {solution.horizon}")
    ax.margins(0.05)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def plot_lp_report(rows, path) -> str:
    """Bar chart of cumulative LP counts per horizon, both modes.

    `rows` holds dicts with keys `n`, `lps_baseline`, `lps_symmetric` as
    produced by the compare command.
    """
    ns = [row["n"] for row in rows]
    base = [row["lps_baseline"] for row in rows]
    symm = [row["lps_symmetric"] for row in rows]
    x = np.arange(len(ns), dtype=float)
    width = 0.38

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.bar(x - width / 2, base, width, label="no symmetry", color="0.55")
    ax.bar(x + width / 2, symm, width, label="symmetric", color="0.2")
    for xi, b, s in zip(x, base, symm):
        if b > 0:
            ax.text(xi + width / 2, s, f"-{(1 - s / b) * 100:.0f}%",
                    ha="center", va="bottom", fontsize=8)
    ax.set_xticks(x)
    ax.set_xticklabels([str(n) for n in ns])
    ax.set_xlabel("horizon")
    ax.set_ylabel("LPs solved (cumulative)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)
