"""Problem symmetries and the constraint permutations they induce.

A symmetry is a pair of invertible matrices (Theta, Omega) acting on states
and inputs that commutes with the dynamics, preserves the weights, and maps
each constraint set onto itself.  Valid pairs form a group.  Every pair
permutes the rows of the condensed constraint system: row i has exactly one
partner j with G_i = G_j (I kron Omega) and E_i = E_j Theta.  Applying these
permutations to active sets partitions the powerset of constraint indices
into orbits; only the lexicographically smallest member of each orbit (its
primary) needs to be examined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GroupTooLarge, NoMatch, NotASymmetry, SingularMap

_PAIR_TOL = 1e-9
_MATCH_TOL = 1e-9
_GROUP_CAP = 10_000


@dataclass(frozen=True)
class SymmetryPair:
    """State map Theta and input map Omega of one symmetry."""

    theta: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))

    def is_identity(self, tol: float = _PAIR_TOL) -> bool:
        return (np.max(np.abs(self.theta - np.eye(self.theta.shape[0]))) <= tol
                and np.max(np.abs(self.omega - np.eye(self.omega.shape[0]))) <= tol)

    def close_to(self, other: "SymmetryPair", tol: float = _PAIR_TOL) -> bool:
        return (self.theta.shape == other.theta.shape
                and self.omega.shape == other.omega.shape
                and np.max(np.abs(self.theta - other.theta)) <= tol
                and np.max(np.abs(self.omega - other.omega)) <= tol)

    @classmethod
    def identity(cls, n: int, m: int) -> "SymmetryPair":
        return cls(np.eye(n), np.eye(m))


@dataclass(frozen=True)
class SymmetryGroup:
    """Finite group of symmetry pairs; the identity is element 0."""

    pairs: tuple[SymmetryPair, ...]

    @property
    def size(self) -> int:
        return len(self.pairs)

    @classmethod
    def trivial(cls, n: int, m: int) -> "SymmetryGroup":
        return cls((SymmetryPair.identity(n, m),))


def validate_pair(ocp, pair: SymmetryPair, tol: float = _PAIR_TOL) -> SymmetryPair:
    """Check every invariance condition; raises NotASymmetry naming the first
    violated one."""
    theta, omega = pair.theta, pair.omega
    n, m = ocp.n, ocp.m
    if theta.shape != (n, n) or omega.shape != (m, m):
        raise NotASymmetry("state/input map dimensions do not match the problem")
    if abs(np.linalg.det(theta)) < 1e-12 or abs(np.linalg.det(omega)) < 1e-12:
        raise NotASymmetry("symmetry maps must be invertible")

    def _chk(name, lhs, rhs):
        if np.max(np.abs(lhs - rhs)) > tol:
            raise NotASymmetry(f"{name} not preserved")

    _chk("dynamics (state map)", theta @ ocp.A, ocp.A @ theta)
    _chk("dynamics (input map)", theta @ ocp.B, ocp.B @ omega)
    _chk("state weight", theta.T @ ocp.Q @ theta, ocp.Q)
    _chk("input weight", omega.T @ ocp.R @ omega, ocp.R)
    _chk("terminal weight", theta.T @ ocp.P @ theta, ocp.P)
    try:
        if not ocp.X.linear_image_equals(theta, tol):
            raise NotASymmetry("state set not invariant")
        if not ocp.U.linear_image_equals(omega, tol):
            raise NotASymmetry("input set not invariant")
        if not ocp.T.linear_image_equals(theta, tol):
            raise NotASymmetry("terminal set not invariant")
    except SingularMap as exc:
        raise NotASymmetry(str(exc)) from exc
    return pair


def close_group(pairs, ocp=None, cap: int = _GROUP_CAP,
                tol: float = _PAIR_TOL) -> SymmetryGroup:
    """Close a list of pairs under products and inverses.

    When an ocp is given every input pair is validated first; products and
    inverses of valid pairs are symmetries again, so only inputs need the
    full check.  The identity is always element 0.
    """
    if pairs:
        first = pairs[0]
        n = first.theta.shape[0]
        m = first.omega.shape[0]
    elif ocp is not None:
        n, m = ocp.n, ocp.m
    else:
        raise ValueError("need at least the problem dimensions; pass ocp or pairs")
    elements: list[SymmetryPair] = [SymmetryPair.identity(n, m)]

    def _push(cand: SymmetryPair) -> bool:
        for known in elements:
            if cand.close_to(known, tol):
                return False
        if len(elements) >= cap:
            raise GroupTooLarge(f"group closure exceeded {cap} elements")
        elements.append(cand)
        return True

    for pair in pairs:
        if ocp is not None:
            validate_pair(ocp, pair, tol)
        _push(pair)

    changed = True
    while changed:
        changed = False
        for pair in list(elements):
            inv = SymmetryPair(np.linalg.inv(pair.theta),
                               np.linalg.inv(pair.omega))
            if _push(inv):
                changed = True
        for left in list(elements):
            for right in list(elements):
                prod = SymmetryPair(left.theta @ right.theta,
                                    left.omega @ right.omega)
                if _push(prod):
                    changed = True
    return SymmetryGroup(tuple(elements))


@dataclass(frozen=True)
class ConstraintPermutation:
    """Row permutation induced by one symmetry pair on a condensed QP.

    mapping[i-1] = j means constraint i is carried to constraint j, i.e.
    G_i equals G_j (I kron Omega) and E_i equals E_j Theta.
    """

    mapping: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]

    def apply(self, active) -> tuple[int, ...]:
        """Image of an active set, sorted."""
        return tuple(sorted(self.mapping[i - 1] for i in active))

    def is_identity(self) -> bool:
        return all(j == i + 1 for i, j in enumerate(self.mapping))

    @classmethod
    def identity(cls, q: int) -> "ConstraintPermutation":
        return cls(tuple(range(1, q + 1)))


def constraint_permutation(qp, pair: SymmetryPair,
                           tol: float = _MATCH_TOL) -> ConstraintPermutation:
    """Match every constraint row to its partner under the symmetry.

    For each row i the partner j minimises the residual
    max|G_i - G_j (I kron Omega)| + max|E_i - E_j Theta|; the minimum must
    stay below `tol`.  With duplicate rows the smallest unmatched partner
    wins, which keeps the map bijective.
    """
    if pair.is_identity(tol):
        return ConstraintPermutation.identity(qp.q)
    mapped_g = qp.G @ np.kron(np.eye(qp.N), pair.omega)
    mapped_e = qp.E @ pair.theta
    used = np.zeros(qp.q, dtype=bool)
    mapping = np.empty(qp.q, dtype=int)
    for i in range(qp.q):
        resid = (np.max(np.abs(mapped_g - qp.G[i]), axis=1)
                 + np.max(np.abs(mapped_e - qp.E[i]), axis=1))
        candidates = np.flatnonzero((resid <= tol) & ~used)
        if candidates.size == 0:
            raise NoMatch(f"no partner row for constraint {i + 1}")
        j = int(candidates[0])
        used[j] = True
        mapping[i] = j + 1
    return ConstraintPermutation(tuple(int(v) for v in mapping))


def permutations_for(qp, group: SymmetryGroup,
                     tol: float = _MATCH_TOL) -> list[ConstraintPermutation]:
    """One constraint permutation per group element, identity first."""
    return [constraint_permutation(qp, pair, tol) for pair in group.pairs]


@dataclass(frozen=True)
class Orbit:
    """One orbit of active sets, with its primary member.

    pair_index maps each member to the index (into the permutation list) of
    the first group element that carries the primary onto it.
    """

    members: tuple[tuple[int, ...], ...]
    primary: tuple[int, ...]
    pair_index: dict = field(compare=False, hash=False)


def orbit_of(active, perms) -> Orbit:
    """Orbit of an active set under a list of constraint permutations."""
    active = tuple(sorted(active))
    seen: dict[tuple[int, ...], int] = {}
    for idx, perm in enumerate(perms):
        img = perm.apply(active)
        if img not in seen:
            seen[img] = idx
    members = tuple(sorted(seen))
    primary = members[0] if members else ()
    if primary != active:
        # express pair_index relative to the primary, not the query set
        seen = {}
        for idx, perm in enumerate(perms):
            img = perm.apply(primary)
            if img not in seen:
                seen[img] = idx
    return Orbit(members=members, primary=primary, pair_index=seen)


def is_primary(active, perms) -> bool:
    """True when no permutation maps the set to something lexicographically
    smaller."""
    active = tuple(sorted(active))
    return all(perm.apply(active) >= active for perm in perms)
