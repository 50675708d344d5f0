"""Whole-space radial quadrature of propagated profiles."""

import numpy as np
import pytest

from veflow import (
    BlockSystem,
    QuadratureError,
    decay_fit,
    gaussian_profile,
    make_params,
    whole_space_norm,
)
from veflow.quadrature import RadialProfile


@pytest.fixture(scope="module")
def comp():
    return BlockSystem.compressible(make_params())


class TestValues:
    def test_gaussian_at_time_zero(self, comp):
        prof = gaussian_profile(amp_first=1.0)
        got = whole_space_norm(prof, comp, 0.0, k=0)
        exact = np.sqrt(np.pi**1.5 / (2.0 * np.pi) ** 3)
        assert got == pytest.approx(exact, rel=1e-10)

    def test_gradient_weight_at_time_zero(self, comp):
        # int r^2 e^{-r^2} * 4 pi r^2 dr / (2pi)^3 = (3/2) pi^{3/2} / (2pi)^3
        prof = gaussian_profile(amp_first=1.0)
        got = whole_space_norm(prof, comp, 0.0, k=1)
        exact = np.sqrt(1.5 * np.pi**1.5 / (2.0 * np.pi) ** 3)
        assert got == pytest.approx(exact, rel=1e-9)

    def test_zero_profile(self, comp):
        prof = gaussian_profile(amp_first=0.0, amp_second=0.0)
        assert whole_space_norm(prof, comp, 3.0) == 0.0

    def test_amplitude_linearity(self, comp):
        p1 = gaussian_profile(amp_first=1.0, amp_second=0.5)
        p3 = gaussian_profile(amp_first=3.0, amp_second=1.5)
        t = 2.5
        assert whole_space_norm(p3, comp, t) == pytest.approx(
            3.0 * whole_space_norm(p1, comp, t), rel=1e-9
        )

    def test_component_split(self, comp):
        prof = gaussian_profile(amp_first=1.0, amp_second=0.7)
        t = 1.7
        both = whole_space_norm(prof, comp, t)
        c0 = whole_space_norm(prof, comp, t, component=0)
        c1 = whole_space_norm(prof, comp, t, component=1)
        assert both == pytest.approx(np.hypot(c0, c1), rel=1e-9)

    def test_time_zero_component_identity(self, comp):
        prof = gaussian_profile(amp_first=0.0, amp_second=1.0)
        c0 = whole_space_norm(prof, comp, 0.0, component=0)
        c1 = whole_space_norm(prof, comp, 0.0, component=1)
        assert c0 == 0.0
        assert c1 == pytest.approx(np.sqrt(np.pi**1.5 / (2.0 * np.pi) ** 3), rel=1e-10)


class TestGuards:
    def test_negative_time(self, comp):
        with pytest.raises(QuadratureError):
            whole_space_norm(gaussian_profile(), comp, -1.0)

    def test_non_decaying_profile_rejected(self, comp):
        flat = RadialProfile(
            first=lambda r: np.ones_like(r),
            second=lambda r: np.zeros_like(r),
            env_amp=1.0,
            env_eta=0.0,
            env_width=np.inf,
        )
        with pytest.raises(QuadratureError):
            whole_space_norm(flat, comp, 1.0)


class TestRates:
    def test_l2_decay_slope(self, comp):
        prof = gaussian_profile(amp_first=1.0, amp_second=1.0)
        ts = np.logspace(2, 4, 16)
        norms = [whole_space_norm(prof, comp, float(t)) for t in ts]
        fit = decay_fit(ts, norms)
        assert fit.slope == pytest.approx(-0.75, abs=0.03)
        assert fit.r_squared > 0.999

    def test_oscillation_resolved_at_large_time(self, comp):
        # adjacent samples at large t differ smoothly; a failed oscillation
        # seed would show up as wild jumps
        ts = np.linspace(9000.0, 10000.0, 5)
        prof = gaussian_profile(amp_first=1.0)
        ns = np.array([whole_space_norm(prof, comp, float(t)) for t in ts])
        assert np.all(np.abs(np.diff(np.log(ns))) < 0.05)
