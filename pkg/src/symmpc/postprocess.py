"""From optimal active sets to the explicit piecewise-affine solution.

For a full-row-rank active set the KKT conditions give affine multipliers
and inputs in the parameter; the critical region collects primal feasibility
of the inactive rows and nonnegativity of the multipliers.  Orbit members of
an accepted primary set are not re-derived: their regions are linear images
of the primary region under the state map that produces them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularKkt
from .polytope import EPS_DIM, Polytope
from .symmetry import orbit_of

_RANK_REL_TOL = 1e-9


def rank_filter(qp, active) -> bool:
    """True when the active rows of G are linearly independent."""
    if not active:
        return True
    rows = qp.G[np.asarray(active, dtype=int) - 1]
    sigma = np.linalg.svd(rows, compute_uv=False)
    if sigma[0] <= 0.0:
        return False
    return int(np.sum(sigma > _RANK_REL_TOL * sigma[0])) == len(active)


def _kkt_matrices(qp, active):
    """Affine laws for multipliers and inputs on one active set.

    Returns (K_u, b_u, K_lam, b_lam) with u(x) = K_u x + b_u and
    lam(x) = K_lam x + b_lam.
    """
    act = np.asarray(active, dtype=int) - 1
    h_inv_ft = np.linalg.solve(qp.H, qp.F.T)
    if act.size == 0:
        nm = qp.H.shape[0]
        return -h_inv_ft, np.zeros(nm), np.zeros((0, qp.n)), np.zeros(0)
    g_a = qp.G[act]
    h_inv_gt = np.linalg.solve(qp.H, g_a.T)
    schur = g_a @ h_inv_gt
    try:
        sol = np.linalg.solve(
            schur,
            np.hstack([g_a @ h_inv_ft + qp.E[act], qp.w[act][:, None]]),
        )
    except np.linalg.LinAlgError as exc:
        raise SingularKkt(f"singular KKT system for active set {active}") from exc
    k_lam = -sol[:, :-1]
    b_lam = -sol[:, -1]
    k_u = -h_inv_ft - h_inv_gt @ k_lam
    b_u = -h_inv_gt @ b_lam
    return k_u, b_u, k_lam, b_lam


def law_of(qp, active) -> tuple[np.ndarray, np.ndarray]:
    """Affine input law u(x) = gain @ x + offset on the active set's region."""
    k_u, b_u, _, _ = _kkt_matrices(qp, active)
    return k_u, b_u


def region_of(qp, active, reduce: bool = True) -> Polytope:
    """Critical region of one active set: inactive rows slack, multipliers
    nonnegative."""
    act = np.asarray(active, dtype=int) - 1
    mask = np.zeros(qp.q, dtype=bool)
    mask[act] = True
    inact = np.flatnonzero(~mask)
    k_u, b_u, k_lam, b_lam = _kkt_matrices(qp, active)
    rows = [qp.G[inact] @ k_u - qp.E[inact]]
    offs = [qp.w[inact] - qp.G[inact] @ b_u]
    if act.size:
        rows.append(-k_lam)
        offs.append(b_lam)
    region = Polytope(np.vstack(rows), np.concatenate(offs))
    return region.remove_redundancy() if reduce else region


def full_dim_check(qp, active, eps_dim: float = EPS_DIM) -> bool:
    """True when the critical region has a Chebyshev ball of radius > eps."""
    region = region_of(qp, active, reduce=False)
    _, radius = region.chebyshev()
    return radius > eps_dim


def expand_orbits(accepted, perms) -> tuple[tuple[int, ...], ...]:
    """Union of the orbits of the accepted sets, sorted, without duplicates."""
    out = set()
    for a in accepted:
        out.update(orbit_of(a, perms).members)
    return tuple(sorted(out, key=lambda s: (len(s), s)))


@dataclass
class ExplicitPiece:
    """One affine piece of the explicit solution."""

    active_set: tuple[int, ...]
    gain: np.ndarray
    offset: np.ndarray
    region: Polytope
    from_reduced: bool

    def to_json(self) -> dict:
        return {
            "active_set": list(self.active_set),
            "gain": self.gain.tolist(),
            "offset": self.offset.tolist(),
            "region": self.region.to_json(),
            "from_reduced": self.from_reduced,
        }

    @classmethod
    def from_json(cls, data) -> "ExplicitPiece":
        return cls(
            active_set=tuple(data["active_set"]),
            gain=np.asarray(data["gain"], dtype=float),
            offset=np.asarray(data["offset"], dtype=float),
            region=Polytope.from_json(data["region"]),
            from_reduced=bool(data["from_reduced"]),
        )


@dataclass
class ExplicitSolution:
    """The full piecewise-affine law u(x) over the critical regions."""

    horizon: int
    pieces: list[ExplicitPiece]
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "pieces": [p.to_json() for p in self.pieces],
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data) -> "ExplicitSolution":
        return cls(
            horizon=int(data["horizon"]),
            pieces=[ExplicitPiece.from_json(p) for p in data["pieces"]],
            metadata=dict(data.get("metadata", {})),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ExplicitSolution":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def build_solution(result, group, verify_regions: bool = False) -> ExplicitSolution:
    """Assemble the explicit solution from a finished enumeration run.

    Laws are derived from the KKT system for every orbit member; regions of
    non-primary members are images of the primary region under the state
    map, optionally re-derived and compared when `verify_regions` is set.
    """
    qp = result.qp
    perms = result.perms
    pieces: dict[tuple[int, ...], ExplicitPiece] = {}
    reduced = set(result.state.reduced)
    for a in result.accepted:
        orbit = orbit_of(a, perms)
        if orbit.primary in pieces:
            # a same-orbit duplicate was accepted earlier; the orbit is done
            continue
        base_region = region_of(qp, orbit.primary)
        for member in orbit.members:
            if member in pieces:
                continue
            gain, offset = law_of(qp, member)
            if member == orbit.primary:
                region = base_region
            else:
                theta = group.pairs[orbit.pair_index[member]].theta
                region = base_region.image(theta)
                if verify_regions and not region_of(qp, member).set_equal(region):
                    raise SingularKkt(
                        f"mapped region of {member} disagrees with its KKT region")
            pieces[member] = ExplicitPiece(
                active_set=member,
                gain=gain,
                offset=offset,
                region=region,
                from_reduced=member in reduced,
            )
    ordered = [pieces[key] for key in sorted(pieces, key=lambda s: (len(s), s))]
    metadata = {
        "mode": result.mode,
        "group_size": result.group_size,
        "orbit_count": len({orbit_of(a, perms).primary for a in result.accepted}),
        "piece_count": len(ordered),
        "lp_counts": {
            "optimality": result.counter.n_optimality,
            "feasibility": result.counter.n_feasibility,
        },
        "reduced_sets": [list(a) for a in result.state.reduced],
        "converged_early": result.converged_early,
        "parallel": result.parallel,
    }
    return ExplicitSolution(horizon=result.horizon, pieces=ordered,
                            metadata=metadata)
