"""Explicit-solution assembly: laws, regions, filters, serialization."""

import numpy as np
import pytest

from symmpc.condense import condense
from symmpc.lp import LpCounts, optimality_test
from symmpc.polytope import Polytope
from symmpc.postprocess import (
    ExplicitPiece,
    ExplicitSolution,
    build_solution,
    expand_orbits,
    full_dim_check,
    law_of,
    rank_filter,
    region_of,
)
from symmpc.enumeration import run_dp
from symmpc.symmetry import orbit_of, permutations_for

from oracles import interior_points, qp_at


def test_rank_filter_basic_cases(example2_qp1):
    assert rank_filter(example2_qp1, ())
    assert rank_filter(example2_qp1, (1,))
    assert rank_filter(example2_qp1, (1, 3))
    # opposite faces of the same input bound are linearly dependent
    assert not rank_filter(example2_qp1, (1, 2))
    # first-stage state rows have zero input coefficients
    assert not rank_filter(example2_qp1, (5,))
    # more active rows than inputs can never have full row rank
    assert not rank_filter(example2_qp1, (1, 3, 9))


def test_unconstrained_law_is_linear(example2_qp1):
    gain, offset = law_of(example2_qp1, ())
    expected = -np.linalg.solve(example2_qp1.H, example2_qp1.F.T)
    assert np.allclose(gain, expected, atol=1e-10)
    assert np.allclose(offset, 0.0, atol=1e-12)


def test_region_contains_certificate_witness(example2_qp1):
    for active in [(), (1,), (1, 3), (1, 9)]:
        out = optimality_test(example2_qp1, active, LpCounts())
        region = region_of(example2_qp1, active)
        assert region.contains(out.x0, tol=1e-7)


def test_piece_laws_match_direct_qp_solves(dp1_symmetric, example2_group):
    solution = build_solution(dp1_symmetric, example2_group)
    qp = dp1_symmetric.qp
    rng = np.random.default_rng(17)
    for piece in solution.pieces:
        for x0 in interior_points(piece.region, 5, rng):
            status, u_ref, active_ref, clean = qp_at(qp, x0)
            assert status == "optimal"
            u_law = piece.gain @ x0 + piece.offset
            assert np.max(np.abs(u_law - u_ref)) <= 1e-6
            if clean:
                assert active_ref == piece.active_set


def test_regions_have_disjoint_interiors(dp1_symmetric, example2_group):
    solution = build_solution(dp1_symmetric, example2_group)
    regions = [p.region for p in solution.pieces]
    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            overlap = Polytope(
                np.vstack([regions[i].normals, regions[j].normals]),
                np.concatenate([regions[i].offsets, regions[j].offsets]),
            )
            _, radius = overlap.chebyshev()
            assert radius <= 1e-7


def test_full_dim_check_on_accepted_sets(dp5_baseline):
    qp = dp5_baseline.qp
    for active in dp5_baseline.accepted[:10]:
        assert full_dim_check(qp, active)


def test_double_integrator_filters(di_dp):
    qp = di_dp.qp
    assert len(di_dp.m_final) == 15
    for active in di_dp.accepted:
        assert rank_filter(qp, active)
        region = region_of(qp, active)
        _, radius = region.chebyshev()
        assert radius > 1e-9
    rejected = set(di_dp.state.reduced) - set(di_dp.accepted)
    assert rejected
    for active in list(rejected)[:10]:
        if not rank_filter(qp, active):
            continue
        assert not full_dim_check(qp, active)


def test_expand_orbits_recovers_full_family(dp1_symmetric, example2_group):
    perms = permutations_for(dp1_symmetric.qp, example2_group)
    expanded = expand_orbits(dp1_symmetric.accepted, perms)
    manual = set()
    for a in dp1_symmetric.accepted:
        manual.update(orbit_of(a, perms).members)
    assert list(expanded) == sorted(manual, key=lambda s: (len(s), s))


def test_build_solution_flags_reduced_pieces(dp1_symmetric, dp5_baseline,
                                             example2_group):
    symmetric = build_solution(dp1_symmetric, example2_group)
    reduced_flags = [p for p in symmetric.pieces if p.from_reduced]
    assert len(symmetric.pieces) == 13
    assert len(reduced_flags) == 4
    assert symmetric.metadata["mode"] == "symmetric"
    assert symmetric.metadata["piece_count"] == 13
    assert symmetric.metadata["orbit_count"] == 4


def test_build_solution_verifies_mapped_regions(example2, example2_group):
    result = run_dp(example2, group=example2_group, n_max=2)
    solution = build_solution(result, example2_group, verify_regions=True)
    assert len(solution.pieces) == 41


def test_solution_json_round_trip(tmp_path, dp1_symmetric, example2_group):
    solution = build_solution(dp1_symmetric, example2_group)
    path = tmp_path / "solution.json"
    solution.save(path)
    loaded = ExplicitSolution.load(path)
    assert loaded.horizon == solution.horizon
    assert loaded.metadata == solution.metadata
    assert len(loaded.pieces) == len(solution.pieces)
    for ours, theirs in zip(solution.pieces, loaded.pieces):
        assert ours.active_set == theirs.active_set
        assert np.allclose(ours.gain, theirs.gain)
        assert np.allclose(ours.offset, theirs.offset)
        assert np.allclose(ours.region.normals, theirs.region.normals)
        assert ours.from_reduced == theirs.from_reduced


def test_piece_json_round_trip():
    piece = ExplicitPiece(
        active_set=(1, 3),
        gain=np.array([[1.0, 2.0], [3.0, 4.0]]),
        offset=np.array([0.5, -0.5]),
        region=Polytope.box([1.0, 1.0]),
        from_reduced=True,
    )
    again = ExplicitPiece.from_json(piece.to_json())
    assert again.active_set == (1, 3)
    assert np.allclose(again.gain, piece.gain)
    assert again.from_reduced
