"""Condensed quadratic program against simulated rollouts."""

import numpy as np
import pytest

from symmpc.condense import condense, subqp
from symmpc.errors import BadHorizon

from oracles import rollout_cost, stage_residuals


@pytest.mark.parametrize("horizon", [1, 2, 4])
def test_objective_matches_rollout(example2, horizon):
    qp = condense(example2, horizon)
    rng = np.random.default_rng(horizon)
    for _ in range(25):
        x0 = rng.uniform(-1.0, 1.0, size=2)
        u_flat = rng.uniform(-1.0, 1.0, size=qp.m * horizon)
        u_seq = u_flat.reshape(horizon, qp.m)
        condensed = (0.5 * x0 @ qp.Y @ x0 + x0 @ qp.F @ u_flat
                     + 0.5 * u_flat @ qp.H @ u_flat)
        simulated = rollout_cost(example2.A, example2.B, example2.Q,
                                 example2.R, example2.P, x0, u_seq)
        assert condensed == pytest.approx(simulated, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("horizon", [1, 3])
def test_constraint_rows_match_stage_residuals(example2, horizon):
    qp = condense(example2, horizon)
    rng = np.random.default_rng(10 + horizon)
    for _ in range(25):
        x0 = rng.uniform(-1.5, 1.5, size=2)
        u_flat = rng.uniform(-1.5, 1.5, size=qp.m * horizon)
        lhs = qp.G @ u_flat - qp.E @ x0 - qp.w
        rhs = stage_residuals(example2, horizon, x0,
                              u_flat.reshape(horizon, qp.m))
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_constraint_rows_match_stage_residuals_nonsquare_input(di):
    qp = condense(di, 3)
    rng = np.random.default_rng(5)
    for _ in range(25):
        x0 = rng.uniform(-4.0, 4.0, size=2)
        u_flat = rng.uniform(-2.0, 2.0, size=3)
        lhs = qp.G @ u_flat - qp.E @ x0 - qp.w
        rhs = stage_residuals(di, 3, x0, u_flat.reshape(3, 1))
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_single_stage_hessian_is_r_plus_btpb(example2):
    qp = condense(example2, 1)
    expected = np.asarray(example2.R) + \
        np.asarray(example2.B).T @ example2.P @ np.asarray(example2.B)
    assert np.allclose(qp.H, expected, rtol=1e-12)


def test_row_counts_and_offsets(example2):
    for horizon in (1, 2, 5):
        qp = condense(example2, horizon)
        assert qp.q0 == example2.q0
        assert qp.q_t == example2.q_t
        assert qp.q == horizon * qp.q0 + qp.q_t
        assert np.allclose(qp.w, 1.0)
        assert qp.G.shape == (qp.q, qp.m * horizon)
        assert qp.E.shape == (qp.q, qp.n)


def test_stage_of_row_layout(example2):
    qp = condense(example2, 2)
    stages = [qp.stage_of_row[i] for i in range(qp.q)]
    assert stages == [0] * 8 + [1] * 8 + [2] * 4


def test_first_stage_state_rows_do_not_touch_inputs(example2):
    qp = condense(example2, 3)
    x_rows = slice(example2.q_u, example2.q0)
    assert np.allclose(qp.G[x_rows], 0.0)
    assert np.allclose(qp.E[x_rows], -np.asarray(example2.X.normals))


def test_hessian_symmetric_positive_definite(example2, di):
    for ocp, horizon in ((example2, 4), (di, 5)):
        qp = condense(ocp, horizon)
        assert np.allclose(qp.H, qp.H.T, atol=1e-9)
        assert np.min(np.linalg.eigvalsh(qp.H)) > 0


def test_subqp_equals_fresh_condense(example2):
    qp5 = condense(example2, 5)
    for horizon in (1, 3, 5):
        sub = subqp(qp5, horizon)
        fresh = condense(example2, horizon)
        assert np.allclose(sub.H, fresh.H)
        assert np.allclose(sub.G, fresh.G)
        assert np.allclose(sub.E, fresh.E)
        assert np.allclose(sub.F, fresh.F)
        assert np.allclose(sub.Y, fresh.Y)


def test_subqp_rejects_horizon_out_of_range(example2):
    qp = condense(example2, 2)
    with pytest.raises(BadHorizon):
        subqp(qp, 3)
    with pytest.raises(BadHorizon):
        subqp(qp, 0)


def test_condense_rejects_bad_horizon(example2):
    with pytest.raises(BadHorizon):
        condense(example2, 0)
