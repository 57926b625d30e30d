from __future__ import annotations

import math

import numpy as np
import pytest

from fieldobs.errors import DomainError, NumericError, StiffnessError
from fieldobs.integrator import (
    CoupledLayout,
    StepControl,
    integrate,
    rk45_step,
)


def decay(t, y):
    return -y


class TestSingleStep:
    def test_exponential_decay_accuracy(self):
        # one accepted step against the closed form
        res = rk45_step(decay, np.array([1.0]), 0.0, 0.1, StepControl())
        assert res.accepted
        assert abs(res.state[0] - math.exp(-0.1)) < 1e-8

    def test_error_estimate_order(self):
        # the embedded difference is fifth order in h, so halving divides it by ~32
        ctl = StepControl()
        y = np.array([1.0])
        est_h = rk45_step(decay, y, 0.0, 0.2, ctl)
        est_h2 = rk45_step(decay, y, 0.0, 0.1, ctl)
        ratio = est_h.error_estimate / est_h2.error_estimate
        assert 32.0 / 1.5 <= ratio <= 32.0 * 1.5

    def test_step_growth_capped(self):
        res = rk45_step(decay, np.array([1.0]), 0.0, 1e-6, StepControl(h_max=10.0))
        assert res.h_next <= 5e-6 * (1 + 1e-12)

    def test_nan_state_raises(self):
        def bad(t, y):
            return np.full_like(y, np.nan)

        with pytest.raises(NumericError):
            rk45_step(bad, np.array([1.0]), 0.0, 0.1, StepControl())


class TestStepControlValidation:
    def test_defaults(self):
        ctl = StepControl()
        assert ctl.rtol == 1e-6 and ctl.atol == 1e-9
        assert ctl.h_init == 1e-4 and ctl.h_min == 1e-12 and ctl.h_max == 1.0
        assert ctl.safety == 0.9

    def test_bad_ordering(self):
        with pytest.raises(DomainError):
            StepControl(h_min=1.0, h_init=0.1)

    def test_bad_tolerance(self):
        with pytest.raises(DomainError):
            StepControl(rtol=0.0)

    def test_bad_safety(self):
        with pytest.raises(DomainError):
            StepControl(safety=1.0)


class TestIntegrate:
    def test_global_error_tracks_tolerance(self):
        # tightening rtol by two decades must pay off at least 10^1.5 in endpoint error
        y0 = np.array([1.0])
        exact = math.exp(-1.0)
        errs = []
        for rtol in (1e-4, 1e-6):
            res = integrate(decay, y0, 0.0, 1.0, [1.0], StepControl(rtol=rtol, atol=1e-13))
            errs.append(abs(res.final_state[0] - exact))
        assert errs[0] / errs[1] >= 10**1.5

    def test_rotation_preserves_radius(self):
        def rot(t, y):
            return np.array([-y[1], y[0]])

        y0 = np.array([1.0, 0.0])
        samples = np.linspace(0.0, 100.0, 101)
        res = integrate(rot, y0, 0.0, 100.0, samples, StepControl(rtol=1e-8, atol=1e-12))
        radii = np.hypot(res.states[:, 0], res.states[:, 1])
        assert np.max(np.abs(radii - 1.0)) < 1e-5

    def test_sample_times_exact(self):
        samples = np.array([0.0, 0.1, 0.25, 1.0 / 3.0, 0.9])
        res = integrate(decay, np.array([1.0]), 0.0, 1.0, samples, StepControl())
        assert np.array_equal(res.times, samples)

    def test_sample_accuracy_at_interior_points(self):
        samples = np.array([0.3, 0.7])
        res = integrate(decay, np.array([1.0]), 0.0, 1.0, samples, StepControl(rtol=1e-9, atol=1e-12))
        np.testing.assert_allclose(res.states[:, 0], np.exp(-samples), rtol=1e-7)

    def test_zero_length_interval(self):
        res = integrate(decay, np.array([2.0]), 5.0, 5.0, [5.0], StepControl())
        assert res.times.tolist() == [5.0]
        assert res.states[0, 0] == 2.0
        assert res.n_accepted == 0

    def test_deterministic_reruns(self):
        def rhs(t, y):
            return np.array([math.sin(3.0 * t) * y[0] - y[1], y[0]])

        samples = np.linspace(0.0, 10.0, 21)
        a = integrate(rhs, np.array([1.0, 0.5]), 0.0, 10.0, samples)
        b = integrate(rhs, np.array([1.0, 0.5]), 0.0, 10.0, samples)
        assert np.array_equal(a.states, b.states)
        assert a.n_accepted == b.n_accepted and a.n_rejected == b.n_rejected

    def test_rejections_counted(self):
        # a sharp transient forces at least one rejection at the default h_init
        def sharp(t, y):
            return np.array([-50.0 * y[0] + 50.0 * math.cos(40.0 * t)])

        res = integrate(sharp, np.array([5.0]), 0.0, 2.0, [2.0], StepControl(h_init=0.5))
        assert res.n_rejected >= 1
        assert res.n_accepted >= 1

    def test_callback_mode_skips_storage(self):
        seen = []

        def cb(t, y):
            seen.append((t, y.copy()))

        res = integrate(decay, np.array([1.0]), 0.0, 1.0, [0.5, 1.0], on_sample=cb)
        assert res.states is None
        assert [t for t, _ in seen] == [0.5, 1.0]
        assert seen[-1][1][0] == res.final_state[0]

    def test_stiffness_error(self):
        ctl = StepControl(h_min=0.5, h_init=0.5, h_max=0.5)
        with pytest.raises(StiffnessError) as exc:
            integrate(lambda t, y: -1e3 * y, np.array([1.0]), 0.0, 1.0, [1.0], ctl)
        assert "minimum step size" in str(exc.value)

    def test_nonfinite_initial_state(self):
        with pytest.raises(NumericError):
            integrate(decay, np.array([np.inf]), 0.0, 1.0, [1.0])

    def test_sample_validation(self):
        y0 = np.array([1.0])
        with pytest.raises(DomainError):
            integrate(decay, y0, 0.0, 1.0, [0.5, 0.5])
        with pytest.raises(DomainError):
            integrate(decay, y0, 0.0, 1.0, [0.5, 1.5])
        with pytest.raises(DomainError):
            integrate(decay, y0, 0.0, 1.0, [-0.5, 0.5])


class TestCoupledLayout:
    def test_round_trip_identity(self, rng):
        layout = CoupledLayout(6)
        flat = rng.standard_normal(layout.size)
        blocks = layout.unpack(flat)
        assert np.array_equal(layout.pack(*blocks), flat)

    def test_unpack_returns_views(self, rng):
        layout = CoupledLayout(4)
        flat = rng.standard_normal(layout.size)
        z1, _, _, _, w21, _ = layout.unpack(flat)
        assert z1.base is flat
        assert w21.base is flat

    def test_size(self):
        layout = CoupledLayout(126)
        assert layout.size == 4 * 126 + 2 * 126 * 126

    def test_shape_errors(self):
        layout = CoupledLayout(4)
        with pytest.raises(DomainError):
            layout.unpack(np.zeros(layout.size + 1))
        with pytest.raises(DomainError):
            layout.pack(np.zeros(3), np.zeros(4), np.zeros(4), np.zeros(4),
                        np.zeros((4, 4)), np.zeros((4, 4)))
