"""Problem data, validation, and terminal ingredients.

The constrained linear-quadratic problem is

    min  x_N' P x_N + sum_k  x_k' Q x_k + u_k' R u_k
    s.t. x_{k+1} = A x_k + B u_k,  u_k in U,  x_k in X,  x_N in T,

with polytopic U, X, T containing the origin in their interiors.  P is the
unconstrained infinite-horizon cost matrix and T the maximal invariant set
under the associated linear feedback; both are computed here when not
supplied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadWeights,
    DegenerateConstraintSet,
    NoConvergence,
    NoFiniteDetermination,
    NotDetectable,
    NotStabilizable,
    ValidationError,
)
from .polytope import Polytope

_RANK_TOL = 1e-9
_SYM_TOL = 1e-9
_DARE_STEP_TOL = 1e-12
_DARE_RESIDUAL_TOL = 1e-8
_DARE_MAX_ITER = 100_000
_INVARIANT_MAX_ITER = 500
_SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class OcpSpec:
    """Raw problem data as parsed, before any validation."""

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    U: Polytope
    X: Polytope
    n_max: int
    P: np.ndarray | None = None
    T: Polytope | None = None


@dataclass(frozen=True)
class ValidatedOcp:
    """Checked problem data with terminal ingredients filled in.

    U, X, T are stored unit-offset normalised and irredundant, so every
    stacked constraint row later has right-hand side one.
    """

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    U: Polytope
    X: Polytope
    P: np.ndarray
    K_lqr: np.ndarray
    T: Polytope
    n: int
    m: int
    n_max: int

    @property
    def q_u(self) -> int:
        return self.U.nrows

    @property
    def q_x(self) -> int:
        return self.X.nrows

    @property
    def q_t(self) -> int:
        return self.T.nrows

    @property
    def q0(self) -> int:
        return self.q_u + self.q_x


def _is_symmetric(mat, tol=_SYM_TOL):
    return np.max(np.abs(mat - mat.T)) <= tol


def _psd_sqrt(mat):
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return vecs @ np.diag(np.sqrt(vals)) @ vecs.T


def _hautus_ok(A, other, stacked_vertically):
    """Hautus rank test at every eigenvalue of A on or outside the unit circle."""
    n = A.shape[0]
    for lam in np.linalg.eigvals(A):
        if abs(lam) < 1.0 - _RANK_TOL:
            continue
        if stacked_vertically:
            pencil = np.vstack([A - lam * np.eye(n), other])
        else:
            pencil = np.hstack([A - lam * np.eye(n), other])
        sigma = np.linalg.svd(pencil, compute_uv=False)
        if sigma[n - 1] <= _RANK_TOL * max(1.0, sigma[0]):
            return False
    return True


def dare_residual(A, B, Q, R, P) -> float:
    """Max-abs residual of the discrete algebraic Riccati equation at P."""
    BtPB = B.T @ P @ B
    med = A.T @ P @ B @ np.linalg.solve(R + BtPB, B.T @ P @ A)
    return float(np.max(np.abs(A.T @ P @ A - P - med + Q)))


def solve_dare(A, B, Q, R, tol: float = _DARE_STEP_TOL,
               max_iter: int = _DARE_MAX_ITER) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-point iteration for the Riccati equation; returns (P, K).

    Stops when successive iterates agree to `tol` in max norm, or to the
    floating point noise floor for large-magnitude solutions.  The residual
    is verified afterwards.
    """
    P = np.array(Q, dtype=float)
    for _ in range(max_iter):
        BtP = B.T @ P
        gain = np.linalg.solve(R + BtP @ B, BtP @ A)
        P_next = Q + A.T @ P @ A - A.T @ P @ B @ gain
        P_next = 0.5 * (P_next + P_next.T)
        step = np.max(np.abs(P_next - P))
        P = P_next
        if step < max(tol, 8.0 * np.finfo(float).eps * np.max(np.abs(P))):
            break
    else:
        raise NoConvergence("Riccati iteration hit the iteration cap")
    if dare_residual(A, B, Q, R, P) > _DARE_RESIDUAL_TOL:
        raise NoConvergence("Riccati residual above tolerance")
    K = -np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
    return P, K


def max_invariant_set(A_cl, X: Polytope, U: Polytope, K,
                      max_iter: int = _INVARIANT_MAX_ITER,
                      tol: float = _SUPPORT_TOL) -> Polytope:
    """Maximal set kept inside X with K x in U under x+ = A_cl x.

    Starts from the rows of X and the K-mapped rows of U and keeps adding
    one-step-propagated rows until none of them cuts the current set.
    """
    base = np.vstack([X.normals, U.normals @ K])
    current = Polytope(base, np.ones(base.shape[0])).remove_redundancy()
    propagated = base
    for _ in range(max_iter):
        propagated = propagated @ A_cl
        cutting = [row for row in propagated
                   if current.support(row) > 1.0 + tol]
        if not cutting:
            return current
        stacked = Polytope(
            np.vstack([current.normals] + cutting),
            np.ones(current.nrows + len(cutting)),
        )
        current = stacked.remove_redundancy()
    raise NoFiniteDetermination(
        f"invariant set not finitely determined in {max_iter} steps")


def _check_constraint_set(p: Polytope, name: str) -> Polytope:
    """Normalise, reduce, and verify compact full-dimensional with 0 inside."""
    if np.any(p.offsets <= 0.0):
        raise DegenerateConstraintSet(
            f"{name}: origin must be strictly inside")
    clean = p.normalize().remove_redundancy()
    for i in range(clean.dim):
        e = np.zeros(clean.dim)
        e[i] = 1.0
        for sign in (1.0, -1.0):
            try:
                clean.support(sign * e)
            except Exception as exc:
                raise DegenerateConstraintSet(f"{name}: unbounded") from exc
    _, radius = clean.chebyshev()
    if radius <= 1e-9:
        raise DegenerateConstraintSet(f"{name}: not full dimensional")
    return clean


def validate(spec: OcpSpec) -> ValidatedOcp:
    """Check the problem data and fill in terminal cost and terminal set."""
    A = np.asarray(spec.A, dtype=float)
    B = np.asarray(spec.B, dtype=float)
    Q = np.asarray(spec.Q, dtype=float)
    R = np.asarray(spec.R, dtype=float)
    n = A.shape[0]
    m = B.shape[1]
    if A.shape != (n, n) or B.shape[0] != n:
        raise ValidationError("A must be square and B must have matching rows")
    if Q.shape != (n, n) or R.shape != (m, m):
        raise ValidationError("Q and R dimensions must match A and B")
    if spec.n_max < 1:
        raise ValidationError("n_max must be a positive integer")

    if not _is_symmetric(Q) or not _is_symmetric(R):
        raise BadWeights("Q and R must be symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (R + R.T))) <= 1e-12:
        raise BadWeights("R must be positive definite")
    if np.min(np.linalg.eigvalsh(0.5 * (Q + Q.T))) < -1e-9:
        raise BadWeights("Q must be positive semidefinite")

    if not _hautus_ok(A, B, stacked_vertically=False):
        raise NotStabilizable("(A, B) is not stabilizable")
    if not _hautus_ok(A, _psd_sqrt(Q), stacked_vertically=True):
        raise NotDetectable("(Q^1/2, A) is not detectable")

    U = _check_constraint_set(spec.U, "input set")
    X = _check_constraint_set(spec.X, "state set")
    if U.dim != m or X.dim != n:
        raise ValidationError("constraint set dimensions must match B and A")

    if spec.P is not None:
        P = np.asarray(spec.P, dtype=float)
        if dare_residual(A, B, Q, R, P) > _DARE_RESIDUAL_TOL:
            raise BadWeights("supplied P does not solve the Riccati equation")
        K = -np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
    else:
        P, K = solve_dare(A, B, Q, R)

    A_cl = A + B @ K
    if np.max(np.abs(np.linalg.eigvals(A_cl))) >= 1.0:
        raise NoConvergence("closed loop from the Riccati gain is not stable")

    if spec.T is not None:
        T = _check_constraint_set(spec.T, "terminal set")
        _verify_terminal_set(T, X, U, K, A_cl)
    else:
        T = max_invariant_set(A_cl, X, U, K)

    return ValidatedOcp(A=A, B=B, Q=Q, R=R, U=U, X=X, P=P, K_lqr=K, T=T,
                        n=n, m=m, n_max=int(spec.n_max))


def _verify_terminal_set(T: Polytope, X: Polytope, U: Polytope, K, A_cl):
    """Supplied terminal sets must be admissible and invariant."""
    for row, off in zip(X.normals, X.offsets):
        if T.support(row) > off + _SUPPORT_TOL:
            raise DegenerateConstraintSet("terminal set leaves the state set")
    for row, off in zip(U.normals, U.offsets):
        if T.support(row @ K) > off + _SUPPORT_TOL:
            raise DegenerateConstraintSet(
                "terminal feedback violates the input set on T")
    for row, off in zip(T.normals, T.offsets):
        if T.support(row @ A_cl) > off + _SUPPORT_TOL:
            raise DegenerateConstraintSet("terminal set is not invariant")


# -- problem files -----------------------------------------------------------

def load_problem(path) -> tuple[OcpSpec, list[tuple[np.ndarray, np.ndarray]]]:
    """Read a problem JSON file; returns the spec and raw symmetry pairs."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return parse_problem(data)


def parse_problem(data: dict) -> tuple[OcpSpec, list[tuple[np.ndarray, np.ndarray]]]:
    spec = OcpSpec(
        A=np.asarray(data["A"], dtype=float),
        B=np.asarray(data["B"], dtype=float),
        Q=np.asarray(data["Q"], dtype=float),
        R=np.asarray(data["R"], dtype=float),
        U=Polytope.from_json(data["U"]),
        X=Polytope.from_json(data["X"]),
        n_max=int(data["N"]),
        P=np.asarray(data["P"], dtype=float) if "P" in data else None,
        T=Polytope.from_json(data["T"]) if "T" in data else None,
    )
    pairs = [
        (np.asarray(entry["Theta"], dtype=float),
         np.asarray(entry["Omega"], dtype=float))
        for entry in data.get("symmetries", [])
    ]
    return spec, pairs
