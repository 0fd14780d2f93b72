"""Enumeration of optimal active sets by dynamic programming over the horizon.

Candidates are visited by increasing cardinality and lexicographically within
one cardinality, which is exactly a left-to-right, top-down sweep of the
binary subset tree.  Three devices keep the sweep short:

* supersets of active sets whose equality system is infeasible can never be
  optimal and are skipped (pruning),
* when the problem has symmetries, every orbit is decided by its first
  (primary) member; the subtrees rooted at the other members are skipped,
* optimal active sets of the horizon-N problem generate the horizon-(N+1)
  candidates: keep those living on stages 0..N-1, and extend those touching
  the last stage or the terminal rows by shifting them one stage and gluing
  every subset of the new first-stage rows in front.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

from .condense import CondensedQp, condense
from .errors import BadHorizon, IndexOverflow, TooLarge
from .lp import EPS_DEGENERATE, LpCounts, feasibility_test, optimality_test
from .symmetry import SymmetryGroup, orbit_of, permutations_for

ActiveSet = tuple[int, ...]

_BRUTE_FORCE_CAP = 20  # refuse exhaustive sweeps beyond 2^20 subsets


def traversal(q: int):
    """All subsets of {1..q} by cardinality, lexicographic within one level."""
    for k in range(q + 1):
        yield from combinations(range(1, q + 1), k)


def subtree_contains(root: ActiveSet, candidate: ActiveSet) -> bool:
    """True when candidate extends root only with strictly larger indices.

    Equivalently: root is a prefix of the sorted candidate.
    """
    k = len(root)
    return len(candidate) >= k and candidate[:k] == tuple(root)


def shift(active: ActiveSet, q0: int, q: int | None = None) -> ActiveSet:
    """Move an active set one stage later by adding q0 to every index."""
    out = tuple(i + q0 for i in active)
    if q is not None and out and out[-1] > q:
        raise IndexOverflow(f"shifted index {out[-1]} exceeds q={q}")
    return out


def _mask(active: ActiveSet) -> int:
    m = 0
    for i in active:
        m |= 1 << (i - 1)
    return m


class PrunedIndex:
    """Infeasible active sets, bucketed by cardinality for superset checks."""

    def __init__(self):
        self._masks: dict[int, list[int]] = {}
        self.sets: list[ActiveSet] = []

    def add(self, active: ActiveSet, mask: int | None = None) -> None:
        if mask is None:
            mask = _mask(active)
        self._masks.setdefault(len(active), []).append(mask)
        self.sets.append(tuple(active))

    def covers(self, active: ActiveSet, mask: int | None = None,
               frozen: dict[int, int] | None = None) -> bool:
        """True when some stored set is a subset of `active`.

        `frozen` optionally restricts the check to a snapshot taken with
        `snapshot()`, which the parallel mode uses to defer merges.
        """
        if mask is None:
            mask = _mask(active)
        card = len(active)
        for c, masks in self._masks.items():
            if c > card:
                continue
            stop = frozen.get(c, 0) if frozen is not None else len(masks)
            for m in masks[:stop]:
                if m & mask == m:
                    return True
        return False

    def snapshot(self) -> dict[int, int]:
        return {c: len(masks) for c, masks in self._masks.items()}

    def __len__(self):
        return len(self.sets)


class NonprimaryIndex:
    """Roots of skipped subtrees, queried through the prefix property."""

    def __init__(self):
        self._roots: set[ActiveSet] = set()
        self.roots: list[ActiveSet] = []

    def covers(self, active: ActiveSet) -> bool:
        return any(active[:j] in self._roots for j in range(1, len(active) + 1))

    def add_if_uncovered(self, active: ActiveSet) -> bool:
        if self.covers(active):
            return False
        self._roots.add(active)
        self.roots.append(active)
        return True

    def __len__(self):
        return len(self.roots)


@dataclass
class SolveState:
    """Everything the horizon sweep carries from one horizon to the next."""

    horizon: int
    reduced: list[ActiveSet] = field(default_factory=list)
    degenerate: set[ActiveSet] = field(default_factory=set)
    pruned: PrunedIndex = field(default_factory=PrunedIndex)
    nonprimary: NonprimaryIndex = field(default_factory=NonprimaryIndex)
    orbit_duplicates: int = 0


def _trace_outcome(trace, active, test, outcome, t_star=None):
    if trace is not None:
        trace({"set": list(active), "test": test, "outcome": outcome,
               "t_star": t_star})


def _test_candidate(qp, cand, counter, trace, state, eps=EPS_DEGENERATE):
    """Optimality test, then feasibility test on failure; updates state."""
    out = optimality_test(qp, cand, counter, eps_degenerate=eps)
    _trace_outcome(trace, cand, "optimality",
                   "optimal" if out.optimal else "not_optimal", out.t_star)
    if out.optimal:
        state.reduced.append(cand)
        if out.degenerate:
            state.degenerate.add(cand)
        return
    feasible = feasibility_test(qp, cand, counter)
    _trace_outcome(trace, cand, "feasibility",
                   "feasible" if feasible else "infeasible")
    if not feasible:
        state.pruned.add(cand)


def _probe_candidate(qp, cand, eps=EPS_DEGENERATE):
    """Worker for the parallel mode; no shared state is touched."""
    out = optimality_test(qp, cand, None, eps_degenerate=eps)
    if out.optimal:
        return cand, out, None
    return cand, out, feasibility_test(qp, cand, None)


def _apply_probe(state, counter, trace, cand, out, feasible):
    counter.n_optimality += 1
    _trace_outcome(trace, cand, "optimality",
                   "optimal" if out.optimal else "not_optimal", out.t_star)
    if out.optimal:
        state.reduced.append(cand)
        if out.degenerate:
            state.degenerate.add(cand)
        return
    counter.n_feasibility += 1
    _trace_outcome(trace, cand, "feasibility",
                   "feasible" if feasible else "infeasible")
    if not feasible:
        state.pruned.add(cand)


def initial_solution(qp: CondensedQp, perms, counter: LpCounts | None = None,
                     trace=None, parallel: bool = False,
                     max_workers: int | None = None,
                     eps_degenerate: float = EPS_DEGENERATE) -> SolveState:
    """Sweep the whole subset tree of the horizon-1 constraints.

    `perms` is the list of constraint permutations (identity first); with
    only the identity this is the plain enumeration without symmetry.
    """
    state = SolveState(horizon=1)
    counter = counter if counter is not None else LpCounts()
    symmetric = len(perms) > 1

    if not parallel:
        for cand in traversal(qp.q):
            if symmetric and state.nonprimary.covers(cand):
                continue
            if not state.pruned.covers(cand):
                _test_candidate(qp, cand, counter, trace, state,
                                eps=eps_degenerate)
            if symmetric:
                for member in orbit_of(cand, perms).members:
                    if member != cand:
                        state.nonprimary.add_if_uncovered(member)
        return state

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        for card in range(qp.q + 1):
            level = []
            for cand in combinations(range(1, qp.q + 1), card):
                if symmetric and state.nonprimary.covers(cand):
                    continue
                level.append(cand)
                if symmetric:
                    for member in orbit_of(cand, perms).members:
                        if member != cand:
                            state.nonprimary.add_if_uncovered(member)
            frozen = state.pruned.snapshot()
            to_test = [c for c in level
                       if not state.pruned.covers(c, frozen=frozen)]
            for cand, out, feasible in pool.map(
                    lambda c: _probe_candidate(qp, c, eps_degenerate),
                    to_test):
                _apply_probe(state, counter, trace, cand, out, feasible)
    return state


def extend_horizon(state: SolveState, qp_next: CondensedQp,
                   counter: LpCounts | None = None, perms=None, trace=None,
                   parallel: bool = False, orbit_dedup: bool = False,
                   max_workers: int | None = None,
                   eps_degenerate: float = EPS_DEGENERATE) -> SolveState:
    """One dynamic-programming step from horizon N to N+1.

    Optimal sets living on stages 0..N-1 carry over verbatim; sets touching
    the last stage or the terminal rows are shifted one stage and combined
    with every subset of the new first-stage rows.
    """
    n_prev = state.horizon
    q0 = qp_next.q0
    counter = counter if counter is not None else LpCounts()
    next_state = SolveState(horizon=n_prev + 1)
    carry_limit = n_prev * q0
    tail_limit = (n_prev - 1) * q0
    pool = ThreadPoolExecutor(max_workers=max_workers) if parallel else None
    try:
        for a_l in state.reduced:
            a_max = a_l[-1] if a_l else 0
            if a_max <= carry_limit:
                next_state.reduced.append(a_l)
                if a_l in state.degenerate:
                    next_state.degenerate.add(a_l)
            if a_max <= tail_limit:
                continue
            shifted = shift(a_l, q0, qp_next.q)
            if pool is None:
                for a_j in traversal(q0):
                    cand = a_j + shifted
                    if next_state.pruned.covers(cand):
                        continue
                    _test_candidate(qp_next, cand, counter, trace, next_state,
                                    eps=eps_degenerate)
            else:
                for card in range(q0 + 1):
                    frozen = next_state.pruned.snapshot()
                    to_test = [
                        a_j + shifted
                        for a_j in combinations(range(1, q0 + 1), card)
                        if not next_state.pruned.covers(a_j + shifted,
                                                        frozen=frozen)
                    ]
                    for cand, out, feasible in pool.map(
                            lambda c: _probe_candidate(qp_next, c,
                                                       eps_degenerate),
                            to_test):
                        _apply_probe(next_state, counter, trace,
                                     cand, out, feasible)
    finally:
        if pool is not None:
            pool.shutdown()

    if perms is not None and len(perms) > 1:
        _mark_orbit_duplicates(next_state, perms, orbit_dedup)
    return next_state


def _mark_orbit_duplicates(state: SolveState, perms, collapse: bool) -> None:
    """Count (and optionally drop) later same-orbit copies in the reduced set."""
    claimed: set[ActiveSet] = set()
    kept: list[ActiveSet] = []
    duplicates = 0
    for a in state.reduced:
        primary = min(perm.apply(a) for perm in perms)
        if primary in claimed:
            duplicates += 1
            if collapse:
                continue
        claimed.add(primary)
        kept.append(a)
    state.orbit_duplicates = duplicates
    if collapse:
        state.reduced = kept
        state.degenerate &= set(kept)


def brute_force(qp: CondensedQp, counter: LpCounts | None = None) -> set[ActiveSet]:
    """Optimality test on every subset; no pruning, no symmetry."""
    if qp.q > _BRUTE_FORCE_CAP:
        raise TooLarge(
            f"2^{qp.q} subsets exceed the exhaustive enumeration cap 2^{_BRUTE_FORCE_CAP}")
    return {cand for cand in traversal(qp.q)
            if optimality_test(qp, cand, counter).optimal}


@dataclass
class HorizonSnapshot:
    """Cumulative counters and the reduced family after one horizon."""

    horizon: int
    n_optimality: int
    n_feasibility: int
    reduced: tuple[ActiveSet, ...]
    degenerate: frozenset
    orbit_duplicates: int
    seconds: float


@dataclass
class DpResult:
    mode: str
    horizon: int
    state: SolveState
    snapshots: list[HorizonSnapshot]
    accepted: list[ActiveSet]
    m_final: tuple[ActiveSet, ...]
    qp: CondensedQp
    perms: list
    counter: LpCounts
    converged_early: bool
    group_size: int
    parallel: bool
    seconds: float


def run_dp(ocp, group: SymmetryGroup | None = None, n_max: int | None = None,
           orbit_dedup: bool = False, parallel: bool = False, trace=None,
           eps_degenerate: float = EPS_DEGENERATE,
           max_workers: int | None = None) -> DpResult:
    """Full sweep: horizon 1, then extensions, then the final solution family.

    Stops early once an extension only reproduces carried-over sets: from
    that horizon on the family of optimal active sets no longer changes.
    The result's `m_final` lists every member of every accepted orbit after
    the rank and full-dimension filters.
    """
    from .postprocess import expand_orbits, full_dim_check, rank_filter

    n_max = ocp.n_max if n_max is None else int(n_max)
    if n_max < 1:
        raise BadHorizon(f"n_max must be positive, got {n_max}")
    group = group if group is not None else SymmetryGroup.trivial(ocp.n, ocp.m)

    counter = LpCounts()
    t_start = time.perf_counter()
    qp = condense(ocp, 1)
    perms = permutations_for(qp, group)
    state = initial_solution(qp, perms, counter, trace, parallel, max_workers,
                             eps_degenerate=eps_degenerate)
    snapshots = [HorizonSnapshot(
        1, counter.n_optimality, counter.n_feasibility,
        tuple(state.reduced), frozenset(state.degenerate), 0,
        time.perf_counter() - t_start)]

    converged = False
    n = 1
    while n <= n_max - 1:
        qp = condense(ocp, n + 1)
        perms = permutations_for(qp, group)
        state = extend_horizon(state, qp, counter,
                               perms=perms if group.size > 1 else None,
                               trace=trace, parallel=parallel,
                               orbit_dedup=orbit_dedup,
                               max_workers=max_workers,
                               eps_degenerate=eps_degenerate)
        carried_only = all((a[-1] if a else 0) <= n * qp.q0
                           for a in state.reduced)
        snapshots.append(HorizonSnapshot(
            n + 1, counter.n_optimality, counter.n_feasibility,
            tuple(state.reduced), frozenset(state.degenerate),
            state.orbit_duplicates, time.perf_counter() - t_start))
        n += 1
        if carried_only:
            converged = True
            break

    accepted = [
        a for a in state.reduced
        if rank_filter(qp, a)
        and (a not in state.degenerate or full_dim_check(qp, a))
    ]
    m_final = expand_orbits(accepted, perms)
    return DpResult(
        mode="symmetric" if group.size > 1 else "baseline",
        horizon=state.horizon,
        state=state,
        snapshots=snapshots,
        accepted=accepted,
        m_final=m_final,
        qp=qp,
        perms=perms,
        counter=counter,
        converged_early=converged,
        group_size=group.size,
        parallel=parallel,
        seconds=time.perf_counter() - t_start,
    )
