"""H-representation polytopes and the small amount of geometry the solver needs.

Sets are stored as {x : normals @ x <= offsets}.  Constraint sets (input,
state and terminal sets) are kept with unit offsets, which requires the
origin strictly inside; critical regions keep general offsets and are
canonicalised by row norm for comparisons instead.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyPolytope, LpFailure, NonPositiveOffset, SingularMap
from .lp import solve_lp

#: rows closer than this (after canonical scaling) are treated as equal
EPS_ROW = 1e-9
#: Chebyshev radii above this count as full dimensional
EPS_DIM = 1e-9
#: redundancy filter: a row is dropped when its best value stays this far
#: below its offset
EPS_REDUNDANT = 1e-9

_OFFSET_FLOOR = 1e-12
_DET_FLOOR = 1e-12


def _canonical_rows(normals, offsets):
    """Scale each row [a | b] by 1/||a||; zero-normal rows are left alone."""
    rows = np.hstack([normals, offsets[:, None]])
    norms = np.linalg.norm(normals, axis=1)
    scale = np.where(norms > 0.0, norms, 1.0)
    return rows / scale[:, None]


def _match_rows(rows_a, rows_b, tol):
    """Greedy bijective matching of equal rows; returns the map or None.

    Ties are broken towards the smallest unmatched index of rows_b so the
    result is deterministic and bijective even with duplicate rows.
    """
    if rows_a.shape != rows_b.shape:
        return None
    used = np.zeros(rows_b.shape[0], dtype=bool)
    out = np.empty(rows_a.shape[0], dtype=int)
    for i, row in enumerate(rows_a):
        dist = np.max(np.abs(rows_b - row), axis=1)
        candidates = np.flatnonzero((dist <= tol) & ~used)
        if candidates.size == 0:
            return None
        j = int(candidates[0])
        used[j] = True
        out[i] = j
    return out


class Polytope:
    """Immutable polytope {x : normals @ x <= offsets}."""

    def __init__(self, normals, offsets):
        normals = np.array(normals, dtype=float, ndmin=2)
        offsets = np.array(offsets, dtype=float).reshape(-1)
        if normals.shape[0] != offsets.shape[0]:
            raise ValueError("normals and offsets disagree on the row count")
        normals.setflags(write=False)
        offsets.setflags(write=False)
        self.normals = normals
        self.offsets = offsets

    # -- construction / serialisation ---------------------------------------

    @classmethod
    def box(cls, radii) -> "Polytope":
        """Axis-aligned box |x_i| <= radii_i with unit offsets."""
        radii = np.asarray(radii, dtype=float).reshape(-1)
        if np.any(radii <= 0.0):
            raise NonPositiveOffset("box radii must be positive")
        rows = np.vstack([np.diag(1.0 / radii), -np.diag(1.0 / radii)])
        return cls(rows, np.ones(2 * radii.size))

    @classmethod
    def from_json(cls, data) -> "Polytope":
        return cls(data["normals"], data["offsets"])

    def to_json(self) -> dict:
        return {
            "normals": self.normals.tolist(),
            "offsets": self.offsets.tolist(),
        }

    # -- basic queries -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def nrows(self) -> int:
        return self.normals.shape[0]

    def __repr__(self):
        return f"Polytope({self.nrows} rows, R^{self.dim})"

    def contains(self, x, tol: float = EPS_ROW) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        return bool(np.all(self.normals @ x <= self.offsets + tol))

    def support(self, direction) -> float:
        """max direction @ x over the set; raises LpFailure when unbounded."""
        res = solve_lp(-np.asarray(direction, dtype=float),
                       a_ub=self.normals, b_ub=self.offsets)
        if res.status == "unbounded":
            raise LpFailure("support function unbounded")
        if res.status == "infeasible":
            raise EmptyPolytope("support of an empty set")
        return -res.objective

    def chebyshev(self) -> tuple[np.ndarray, float]:
        """Largest inscribed ball; a negative radius signals an empty set."""
        norms = np.linalg.norm(self.normals, axis=1)
        a_ub = np.hstack([self.normals, norms[:, None]])
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        res = solve_lp(c, a_ub=a_ub, b_ub=self.offsets)
        if res.status != "optimal":
            raise LpFailure(f"Chebyshev LP {res.status}")
        return res.x[:-1].copy(), float(res.x[-1])

    # -- normal forms ----------------------------------------------------------

    def normalize(self) -> "Polytope":
        """Rescale rows to unit offsets; requires the origin strictly inside."""
        if np.any(self.offsets <= _OFFSET_FLOOR):
            raise NonPositiveOffset(
                "offset normalisation needs strictly positive offsets")
        return Polytope(self.normals / self.offsets[:, None],
                        np.ones(self.nrows))

    def remove_redundancy(self, tol: float = EPS_REDUNDANT) -> "Polytope":
        """Drop duplicate rows, then rows that can never be tight.

        Each surviving row is checked with one LP (maximise the row over the
        other surviving rows); it is dropped when its best value stays at
        least `tol` below its offset.
        """
        _, radius = self.chebyshev()
        if radius < -tol:
            raise EmptyPolytope("cannot reduce an empty polytope")

        canon = _canonical_rows(self.normals, self.offsets)
        keep: list[int] = []
        for i in range(self.nrows):
            dup = any(np.max(np.abs(canon[i] - canon[j])) <= EPS_ROW
                      for j in keep)
            if not dup:
                keep.append(i)

        alive = list(keep)
        for i in list(alive):
            others = [j for j in alive if j != i]
            if not others:
                continue
            res = solve_lp(-self.normals[i],
                           a_ub=self.normals[others],
                           b_ub=self.offsets[others])
            if res.status == "unbounded":
                continue
            if res.status != "optimal":
                raise LpFailure(f"redundancy LP {res.status}")
            if -res.objective < self.offsets[i] - tol:
                alive.remove(i)
        return Polytope(self.normals[alive], self.offsets[alive])

    # -- maps and comparisons ----------------------------------------------

    def image(self, mat) -> "Polytope":
        """{M x : x in self} for an invertible map M."""
        mat = np.asarray(mat, dtype=float)
        if abs(np.linalg.det(mat)) < _DET_FLOOR:
            raise SingularMap("image under a singular map")
        return Polytope(self.normals @ np.linalg.inv(mat), self.offsets)

    def linear_image_equals(self, mat, tol: float = EPS_ROW) -> bool:
        """True iff {x : normals @ M x <= 1} equals this set.

        Expects a unit-offset, irredundant representation; the test is exact
        row matching after the map.
        """
        mat = np.asarray(mat, dtype=float)
        if abs(np.linalg.det(mat)) < _DET_FLOOR:
            raise SingularMap("symmetry candidate is singular")
        mapped = self.normals @ mat
        return _match_rows(
            np.hstack([mapped, self.offsets[:, None]]),
            np.hstack([self.normals, self.offsets[:, None]]),
            tol,
        ) is not None

    def set_equal(self, other: "Polytope", tol: float = EPS_ROW) -> bool:
        """Row-matching equality of two irredundant representations."""
        if self.dim != other.dim or self.nrows != other.nrows:
            return False
        return _match_rows(
            _canonical_rows(self.normals, self.offsets),
            _canonical_rows(other.normals, other.offsets),
            tol,
        ) is not None
