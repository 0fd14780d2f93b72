"""Deterministic LP backend and the two active-set certificate tests.

An active set is certified *optimal* when there is a parameter x0 together
with inputs U, multipliers and slacks such that the active rows hold with
equality, stationarity holds, and multipliers/inactive slacks admit a common
margin t >= 0.  Maximising t turns existence into a single LP; t* == 0 flags
a degenerate (weakly active) certificate.  The *feasibility* variant drops
stationarity and multipliers and only asks for a point where the active rows
are tight and the rest hold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalFailure

# Shared solver settings: dual simplex is deterministic for fixed input bytes.
_METHOD = "highs-ds"
_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-8,
    "dual_feasibility_tolerance": 1e-8,
}

#: t* at or below this value marks a degenerate certificate.
EPS_DEGENERATE = 1e-8


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None


def solve_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, bounds=None) -> LpResult:
    """Solve min c'x subject to a_ub x <= b_ub, a_eq x = b_eq.

    Variables are free unless `bounds` says otherwise.  Raises
    NumericalFailure for solver statuses other than solved, infeasible or
    unbounded, so callers can rely on a three-way answer.
    """
    if bounds is None:
        bounds = (None, None)
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method=_METHOD,
        options=_OPTIONS,
    )
    if res.status not in (0, 2, 3):
        # deterministic fallback: presolve occasionally gives up on
        # ill-conditioned instances that the plain simplex resolves
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=bounds, method=_METHOD,
                      options={**_OPTIONS, "presolve": False})
    if res.status not in (0, 2, 3):
        # last resort: interior point settles instances where simplex
        # cannot certify a verdict at all
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=bounds, method="highs-ipm")
    if res.status == 0:
        return LpResult("optimal", np.asarray(res.x, dtype=float), float(res.fun))
    if res.status == 2:
        return LpResult("infeasible", None, None)
    if res.status == 3:
        return LpResult("unbounded", None, None)
    raise NumericalFailure(f"LP backend failed: {res.message}")


@dataclass
class LpCounts:
    """Monotone counters for the two certificate tests, resettable per run."""

    n_optimality: int = 0
    n_feasibility: int = 0

    def reset(self) -> None:
        self.n_optimality = 0
        self.n_feasibility = 0

    def as_tuple(self) -> tuple[int, int]:
        return (self.n_optimality, self.n_feasibility)

    @property
    def total(self) -> int:
        return self.n_optimality + self.n_feasibility


@dataclass
class OptimalityOutcome:
    """Result of the optimality certificate for one active set.

    When optimal, the witness fields hold the certifying point: parameter
    x0, inputs u, multipliers aligned with the active rows and slacks
    aligned with the inactive rows.
    """

    optimal: bool
    t_star: float | None = None
    degenerate: bool = False
    x0: np.ndarray | None = None
    u: np.ndarray | None = None
    multipliers: np.ndarray | None = None
    slacks: np.ndarray | None = None


def _drop_noise(mat, rel=1e-14):
    """Zero out entries that are floating-point dirt relative to their row.

    Condensation products leave ~1e-17 residue where structural zeros
    belong; such entries contribute nothing within solver tolerances but
    can derail the LP presolve.
    """
    rowmax = np.max(np.abs(mat), axis=1, keepdims=True)
    return np.where(np.abs(mat) < rel * rowmax, 0.0, mat)


def _certificate_lp(qp, active, with_stationarity):
    """Assemble the certificate LP for one active set.

    Columns are [U, x0, (multipliers,) slacks, t].  Equality rows pin the
    active constraints (and stationarity when requested); inequality rows
    force multipliers and slacks to be at least t.
    """
    q = qp.q
    nm = qp.N * qp.m
    n = qp.n
    act = np.asarray(active, dtype=int) - 1
    mask = np.zeros(q, dtype=bool)
    mask[act] = True
    inact = np.flatnonzero(~mask)
    na, ni = act.size, inact.size

    ncols = nm + n + (na if with_stationarity else 0) + ni + 1
    col_u = slice(0, nm)
    col_x = slice(nm, nm + n)
    off = nm + n
    if with_stationarity:
        col_lam = slice(off, off + na)
        off += na
    col_s = slice(off, off + ni)
    col_t = off + ni

    eq_rows = []
    eq_rhs = []
    if with_stationarity:
        row = np.zeros((nm, ncols))
        row[:, col_u] = qp.H
        row[:, col_x] = qp.F.T
        if na:
            row[:, col_lam] = qp.G[act].T
        # rescale to O(1): the Hessian can dwarf the constraint rows and
        # derail the simplex; row scaling leaves the constraint unchanged
        scale = np.maximum(1.0, np.max(np.abs(row), axis=1))
        row /= scale[:, None]
        eq_rows.append(row)
        eq_rhs.append(np.zeros(nm))
    if na:
        row = np.zeros((na, ncols))
        row[:, col_u] = qp.G[act]
        row[:, col_x] = -qp.E[act]
        eq_rows.append(row)
        eq_rhs.append(qp.w[act])
    if ni:
        row = np.zeros((ni, ncols))
        row[:, col_u] = qp.G[inact]
        row[:, col_x] = -qp.E[inact]
        row[:, col_s] = np.eye(ni)
        eq_rows.append(row)
        eq_rhs.append(qp.w[inact])

    ub_rows = []
    ub_rhs = []
    if with_stationarity and na:
        row = np.zeros((na, ncols))
        row[:, col_lam] = -np.eye(na)
        row[:, col_t] = 1.0
        ub_rows.append(row)
        ub_rhs.append(np.zeros(na))
    if ni:
        row = np.zeros((ni, ncols))
        row[:, col_s] = -np.eye(ni)
        row[:, col_t] = 1.0
        ub_rows.append(row)
        ub_rhs.append(np.zeros(ni))

    c = np.zeros(ncols)
    c[col_t] = -1.0
    bounds = [(None, None)] * ncols
    bounds[col_t] = (0.0, None)

    a_eq = _drop_noise(np.vstack(eq_rows)) if eq_rows else None
    b_eq = np.concatenate(eq_rhs) if eq_rows else None
    a_ub = _drop_noise(np.vstack(ub_rows)) if ub_rows else None
    b_ub = np.concatenate(ub_rhs) if ub_rows else None
    cols = {"u": col_u, "x": col_x, "s": col_s, "t": col_t}
    if with_stationarity:
        cols["lam"] = col_lam
    return c, a_ub, b_ub, a_eq, b_eq, bounds, cols


def optimality_test(qp, active, counter: LpCounts | None = None,
                    eps_degenerate: float = EPS_DEGENERATE) -> OptimalityOutcome:
    """Certify whether `active` is the optimal active set for some parameter."""
    if counter is not None:
        counter.n_optimality += 1
    c, a_ub, b_ub, a_eq, b_eq, bounds, cols = _certificate_lp(qp, active, True)
    res = solve_lp(c, a_ub, b_ub, a_eq, b_eq, bounds)
    if res.status == "infeasible":
        return OptimalityOutcome(optimal=False)
    if res.status == "unbounded":
        # Cannot happen for compact constraint sets.
        raise NumericalFailure("optimality certificate LP unbounded")
    x = res.x
    t_star = float(x[cols["t"]])
    return OptimalityOutcome(
        optimal=True,
        t_star=t_star,
        degenerate=t_star <= eps_degenerate,
        x0=x[cols["x"]].copy(),
        u=x[cols["u"]].copy(),
        multipliers=x[cols["lam"]].copy() if "lam" in cols else np.zeros(0),
        slacks=x[cols["s"]].copy(),
    )


def feasibility_test(qp, active, counter: LpCounts | None = None) -> bool:
    """True when some parameter makes the active rows tight and the rest hold."""
    if counter is not None:
        counter.n_feasibility += 1
    c, a_ub, b_ub, a_eq, b_eq, bounds, _ = _certificate_lp(qp, active, False)
    res = solve_lp(c, a_ub, b_ub, a_eq, b_eq, bounds)
    if res.status == "unbounded":
        raise NumericalFailure("feasibility certificate LP unbounded")
    return res.status == "optimal"
