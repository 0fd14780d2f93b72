"""Condense the optimal control problem into a parametric QP.

With U = (u_0, ..., u_{N-1}) stacked and the dynamics eliminated, the cost
becomes 1/2 x0' Y x0 + x0' F U + 1/2 U' H U and every stage constraint one
row of G U <= E x0 + w.  Rows are stacked stage by stage (inputs first,
then states) with the terminal rows last, so extending the horizon shifts
old rows by exactly q0 = q_u + q_x.  Unit-offset constraint sets make w a
vector of ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadHorizon, CondenseFailure
from .ocp import ValidatedOcp

_MIN_EIG_H = 1e-10


@dataclass(frozen=True)
class CondensedQp:
    """Dense QP data for one horizon, plus row bookkeeping."""

    Y: np.ndarray
    F: np.ndarray
    H: np.ndarray
    G: np.ndarray
    E: np.ndarray
    w: np.ndarray
    N: int
    n: int
    m: int
    q: int
    q0: int
    q_t: int
    stage_of_row: np.ndarray
    ocp: ValidatedOcp = field(repr=False)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "q": self.q,
            "q0": self.q0,
            "q_t": self.q_t,
            "Y": self.Y.tolist(),
            "F": self.F.tolist(),
            "H": self.H.tolist(),
            "G": self.G.tolist(),
            "E": self.E.tolist(),
            "w": self.w.tolist(),
            "stage_of_row": self.stage_of_row.tolist(),
        }


def condense(ocp: ValidatedOcp, horizon: int) -> CondensedQp:
    """Build the dense QP for the given horizon."""
    if not isinstance(horizon, (int, np.integer)) or horizon < 1:
        raise BadHorizon(f"horizon must be a positive integer, got {horizon}")
    N = int(horizon)
    n, m = ocp.n, ocp.m
    A, B = ocp.A, ocp.B

    # powers of A and the block-lower-triangular input-to-state map
    pow_a = [np.eye(n)]
    for _ in range(N):
        pow_a.append(A @ pow_a[-1])
    # s_blocks[k] maps U to x_k, k = 1..N
    s_blocks = []
    for k in range(1, N + 1):
        blk = np.zeros((n, N * m))
        for j in range(k):
            blk[:, j * m:(j + 1) * m] = pow_a[k - 1 - j] @ B
        s_blocks.append(blk)
    gamma = np.vstack([pow_a[k] for k in range(1, N + 1)])
    s_mat = np.vstack(s_blocks)

    # cost: x_1..x_{N-1} weighted with Q, x_N with P, inputs with R
    qbar = np.zeros((N * n, N * n))
    for k in range(N - 1):
        qbar[k * n:(k + 1) * n, k * n:(k + 1) * n] = ocp.Q
    qbar[(N - 1) * n:, (N - 1) * n:] = ocp.P
    rbar = np.kron(np.eye(N), ocp.R)

    Y = ocp.Q + gamma.T @ qbar @ gamma
    F = gamma.T @ qbar @ s_mat
    H = s_mat.T @ qbar @ s_mat + rbar
    Y = 0.5 * (Y + Y.T)
    H = 0.5 * (H + H.T)
    if np.min(np.linalg.eigvalsh(H)) <= _MIN_EIG_H:
        raise CondenseFailure("condensed Hessian is not positive definite")

    # constraint rows, stage by stage, terminal rows last
    au, ax, at = ocp.U.normals, ocp.X.normals, ocp.T.normals
    q_u, q_x, q_t = ocp.q_u, ocp.q_x, ocp.q_t
    q0 = q_u + q_x
    q = N * q0 + q_t
    G = np.zeros((q, N * m))
    E = np.zeros((q, n))
    stage = np.zeros(q, dtype=int)
    row = 0
    for k in range(N):
        G[row:row + q_u, k * m:(k + 1) * m] = au
        stage[row:row + q_u] = k
        row += q_u
        if k == 0:
            E[row:row + q_x] = -ax
        else:
            G[row:row + q_x] = ax @ s_blocks[k - 1]
            E[row:row + q_x] = -ax @ pow_a[k]
        stage[row:row + q_x] = k
        row += q_x
    G[row:] = at @ s_blocks[N - 1]
    E[row:] = -at @ pow_a[N]
    stage[row:] = N

    for arr in (Y, F, H, G, E):
        arr.setflags(write=False)
    stage.setflags(write=False)
    w = np.ones(q)
    w.setflags(write=False)
    return CondensedQp(Y=Y, F=F, H=H, G=G, E=E, w=w, N=N, n=n, m=m,
                       q=q, q0=q0, q_t=q_t, stage_of_row=stage, ocp=ocp)


def subqp(qp: CondensedQp, horizon: int) -> CondensedQp:
    """The same problem condensed at a shorter (or equal) horizon."""
    if not isinstance(horizon, (int, np.integer)) or not 1 <= horizon <= qp.N:
        raise BadHorizon(f"horizon must lie in 1..{qp.N}, got {horizon}")
    return condense(qp.ocp, int(horizon))
