"""Adjoint gradients against independent oracles."""

import numpy as np
import pytest
import sympy as sp

from failsafe_dampers import (
    ConstraintParams,
    DesignVector,
    FailureScenario,
    adjoint_gradient,
    fd_gradient,
    newmark_solve,
    no_failure,
)
from failsafe_dampers.adjoint import (
    accumulate_gradient,
    dg_du,
    dg_du_trajectory,
    solve_adjoint,
)
from failsafe_dampers.dynamics import ResponseHistory
from failsafe_dampers.model import assemble_added_damping

from conftest import shear_frame, synthetic_record


@pytest.fixture(scope="module")
def unit_model():
    return shear_frame(1, mass=1.0, story_k=1.0, d_allow=1.0, zeta=0.0)


def history_from_drifts(values, dt=0.1):
    u = np.asarray(values, dtype=float).reshape(-1, 1)
    z = np.zeros_like(u)
    return ResponseHistory(u=u, v=z, a=z, dt=dt, u0=u[0], v0=z[0])


class TestDgDu:
    def test_zero_history_gives_zero(self, unit_model):
        hist = history_from_drifts(np.zeros(6))
        out = dg_du_trajectory(hist, unit_model, ConstraintParams(p=8, q=8))
        assert np.all(out == 0.0)

    def test_zero_drift_step_contributes_nothing(self, unit_model):
        hist = history_from_drifts([0.0, 0.5, 0.0, 0.8, 0.0])
        out = dg_du_trajectory(hist, unit_model, ConstraintParams(p=4, q=2))
        assert np.all(out[[0, 2, 4]] == 0.0)
        assert np.all(out[[1, 3]] != 0.0)

    def test_two_step_hand_derivation(self, unit_model):
        # Single drift, samples (0, 0.6, 1.0), dt = 0.1, p = q = 2. With one
        # drift the aggregation collapses to g = d_tilde - 1, so
        # dg/du_i = w_i u_i / (T d_tilde). Frozen values recomputed
        # symbolically below.
        dt, u1, u2 = 0.1, 0.6, 1.0
        hist = history_from_drifts([0.0, u1, u2], dt=dt)
        params = ConstraintParams(p=2, q=2)
        got = dg_du_trajectory(hist, unit_model, params)[:, 0]

        x0, x1, x2 = sp.symbols("x0 x1 x2")
        T = 2 * sp.Rational(1, 10)
        w = [sp.Rational(1, 20), sp.Rational(1, 10), sp.Rational(1, 20)]
        d_tilde = sp.sqrt((w[0] * x0**2 + w[1] * x1**2 + w[2] * x2**2) / T)
        g = d_tilde - 1
        subs = {x0: 0, x1: sp.Rational(6, 10), x2: 1}
        expected = [float(sp.diff(g, x).subs(subs)) for x in (x0, x1, x2)]

        assert got == pytest.approx(expected, rel=1e-12)
        # 0.3 / sqrt(0.43) and 0.25 / sqrt(0.43), from the symbolic oracle
        assert got[1] == pytest.approx(0.457495710997814, rel=1e-12)
        assert got[2] == pytest.approx(0.381246425831512, rel=1e-12)

    def test_single_step_accessor_matches_trajectory(self, unit_model):
        hist = history_from_drifts([0.0, 0.3, -0.9, 0.5])
        params = ConstraintParams(p=4, q=3)
        full = dg_du_trajectory(hist, unit_model, params)
        assert np.array_equal(dg_du(hist, unit_model, params, 2), full[2])


class TestBackwardSweep:
    def test_zero_forcing_zero_adjoint_and_gradient(self, frame_2dof, record_short):
        design = DesignVector(x=[0.5, 0.5], c_bar=300.0)
        C_d = assemble_added_damping(frame_2dof, design)
        hist = newmark_solve(frame_2dof, C_d, record_short)
        state = solve_adjoint(
            frame_2dof, C_d, hist, np.zeros((hist.u.shape[0], 2))
        )
        assert np.all(state.lambda_u == 0.0)
        assert np.all(state.lambda_v == 0.0)
        assert np.all(state.lambda_a == 0.0)
        grad = accumulate_gradient(frame_2dof, design, None, hist.v, state.lambda_u)
        assert np.all(grad == 0.0)


class TestAccumulationKernel:
    def test_partial_failure_scales_linearly(self, frame_2dof):
        rng = np.random.default_rng(3)
        V = rng.standard_normal((20, 2))
        L = rng.standard_normal((20, 2))
        design = DesignVector(x=[0.7, 0.7], c_bar=1000.0)
        g_none = accumulate_gradient(frame_2dof, design, no_failure(), V, L)
        sc = FailureScenario(id=1, damaged=(0,), factor=0.5)
        g_half = accumulate_gradient(frame_2dof, design, sc, V, L)
        assert g_half[0] == pytest.approx(0.5 * g_none[0], rel=1e-14)
        assert g_half[1] == g_none[1]

    def test_complete_failure_component_exactly_zero(self, frame_2dof):
        rng = np.random.default_rng(4)
        V = rng.standard_normal((20, 2))
        L = rng.standard_normal((20, 2))
        design = DesignVector(x=[0.7, 0.7], c_bar=1000.0)
        sc = FailureScenario(id=1, damaged=(1,), factor=0.0)
        grad = accumulate_gradient(frame_2dof, design, sc, V, L)
        assert grad[1] == 0.0


class TestGradientConsistency:
    scenarios = [
        no_failure(),
        FailureScenario(id=1, damaged=(0,), factor=0.0),
        FailureScenario(id=2, damaged=(1,), factor=0.5),
    ]

    @pytest.mark.parametrize("pq,tol", [(8, 1e-6), (100, 1e-3)])
    def test_matches_central_differences(self, frame_2dof, record_short, pq, tol):
        design = DesignVector(x=[0.5, 0.4], c_bar=300.0)
        params = ConstraintParams(p=pq, q=pq)
        for sc in self.scenarios:
            adj = adjoint_gradient(frame_2dof, design, sc, record_short, params)
            fd = fd_gradient(
                frame_2dof, design, sc, record_short, params, h=1e-6
            )
            err = np.abs(adj - fd).max() / max(1.0, np.abs(fd).max())
            assert err <= tol, f"{sc.label()}: {err:.2e} > {tol}"

    def test_failed_damper_gradient_is_zero(self, frame_2dof, record_short):
        design = DesignVector(x=[0.5, 0.4], c_bar=300.0)
        params = ConstraintParams(p=8, q=8)
        sc = FailureScenario(id=1, damaged=(0,), factor=0.0)
        adj = adjoint_gradient(frame_2dof, design, sc, record_short, params)
        assert adj[0] == 0.0

    def test_monotone_damper_has_nonpositive_gradient(self):
        # More damping reduces the peak on this SDOF, so the constraint
        # gradient must point down.
        model = shear_frame(1, mass=1.0, story_k=40.0, d_allow=0.05)
        gm = synthetic_record(300, dt=0.02, seed=6, peak=1.5)
        design = DesignVector(x=[0.5], c_bar=8.0)
        adj = adjoint_gradient(
            model, design, no_failure(), gm, ConstraintParams(p=8, q=8)
        )
        assert adj[0] < 0.0

    def test_multi_row_damper_transform(self, record_short):
        # Devices may couple several DOFs; the assembly and the gradient
        # accumulation both accept transforms with more than one row.
        from failsafe_dampers.model import StructuralModel

        base = shear_frame(2, mass=10.0, story_k=2000.0, d_allow=0.03)
        coupled = np.array([[1.0, 0.0], [0.3, -0.7]])
        model = StructuralModel(
            mass=base.mass,
            stiffness=base.stiffness,
            inherent_damping=base.inherent_damping,
            influence=base.influence,
            drift_transform=base.drift_transform,
            d_allow=base.d_allow,
            damper_transforms=(coupled, base.drift_transform[1:2].copy()),
        )
        design = DesignVector(x=[0.5, 0.4], c_bar=300.0)
        params = ConstraintParams(p=8, q=8)
        adj = adjoint_gradient(model, design, no_failure(), record_short, params)
        fd = fd_gradient(model, design, no_failure(), record_short, params, h=1e-6)
        err = np.abs(adj - fd).max() / max(1.0, np.abs(fd).max())
        assert err <= 1e-6

    def test_nonzero_initial_conditions_rejected(self, frame_2dof, record_short):
        design = DesignVector(x=[0.5, 0.4], c_bar=300.0)
        C_d = assemble_added_damping(frame_2dof, design)
        hist = newmark_solve(
            frame_2dof, C_d, record_short, u0=np.array([0.01, 0.0])
        )
        with pytest.raises(ValueError, match="initial conditions"):
            adjoint_gradient(
                frame_2dof,
                design,
                no_failure(),
                record_short,
                ConstraintParams(p=8, q=8),
                history=hist,
            )
