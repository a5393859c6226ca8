import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vimpde import benchmark as bm
from vimpde.diffusion import (
    DiffusivityKind,
    DiffusivitySpec,
    OperatorConfig,
    SpatialOperator,
    catte_rhs,
    curvature_rhs,
    diffusivity_value,
    pm_rhs,
    weighted_curvature_rhs,
)
from vimpde.errors import ParameterError
from vimpde.field import GridField, GridGeometry, gaussian_kernel

RATIONAL = DiffusivitySpec("rational", 0.05)
EXPONENTIAL = DiffusivitySpec("exponential", 0.05)


class TestDiffusivity:
    def test_examples(self):
        assert diffusivity_value(RATIONAL, 0.0) == 1.0
        assert diffusivity_value(EXPONENTIAL, 0.0) == 1.0
        assert diffusivity_value(RATIONAL, 0.05) == pytest.approx(0.5, abs=1e-15)
        assert diffusivity_value(EXPONENTIAL, 0.05) == pytest.approx(math.exp(-1), abs=1e-15)

    @pytest.mark.parametrize("spec", [RATIONAL, EXPONENTIAL], ids=["rational", "exponential"])
    def test_monotone_and_bounded(self, spec):
        s = np.concatenate([[0.0], np.logspace(-6, 1, 200)])
        c = spec(s)
        assert np.all(c <= 1.0) and np.all(c >= 0.0)
        assert np.all(np.diff(c) <= 0)
        assert np.all(c[s <= 0.5] > 0)

    def test_kind_is_parsed(self):
        assert DiffusivitySpec("exponential").kind is DiffusivityKind.EXPONENTIAL
        with pytest.raises(ValueError):
            DiffusivitySpec("cubic")

    @pytest.mark.parametrize("k", [0.0, -0.1, math.inf])
    def test_rejects_bad_k(self, k):
        with pytest.raises(ParameterError):
            DiffusivitySpec("rational", k)

    def test_rejects_negative_magnitude(self):
        with pytest.raises(ParameterError):
            diffusivity_value(RATIONAL, -1e-3)


def step_field(n=32, low=0.2, high=0.8):
    g = GridGeometry(n, n)
    X, _ = g.mesh()
    return GridField(g, np.where(X < n // 2, low, high))


def random_field(seed, n=24):
    rng = np.random.default_rng(seed)
    return GridField(GridGeometry(n, n), rng.uniform(0, 1, (n, n)))


class TestPeronaMalik:
    def test_constant_gives_zero(self):
        out = pm_rhs(GridField.constant(GridGeometry(8, 8), 0.4), RATIONAL)
        assert not out.values.any()

    def test_linear_ramp_is_flat_in_the_interior(self):
        g = GridGeometry(16, 16, 0.1, 0.1)
        out = pm_rhs(GridField.from_function(g, lambda X, Y: 0.01 * X), RATIONAL).values
        assert np.abs(out[:, 2:-2]).max() <= 1e-12

    @settings(max_examples=25, deadline=None)
    @given(arrays(np.float64, (12, 15), elements=st.floats(0, 1)),
           st.sampled_from([RATIONAL, EXPONENTIAL]))
    def test_conserves_mass(self, values, spec):
        f = GridField(GridGeometry(15, 12), values)
        assert abs(pm_rhs(f, spec).values.sum()) <= 1e-10 * max(1.0, np.abs(values).sum())

    def test_small_k_protects_edges(self):
        u = step_field()
        edge = slice(14, 18)
        gentle = np.abs(pm_rhs(u, DiffusivitySpec("rational", 0.05)).values[:, edge]).max()
        strong = np.abs(pm_rhs(u, DiffusivitySpec("rational", 10.0)).values[:, edge]).max()
        assert gentle < 0.1 * strong

    def test_operator_facade_matches_function(self):
        u = random_field(3)
        op = SpatialOperator.perona_malik(0.05, "exponential")
        assert np.array_equal(op(u).values, pm_rhs(u, EXPONENTIAL).values)


class TestCatte:
    def test_conserves_mass(self):
        for seed in range(10):
            u = random_field(seed)
            out = catte_rhs(u, RATIONAL, gaussian_kernel(1.0))
            assert abs(out.values.sum()) <= 1e-10 * np.abs(u.values).sum()

    def test_tiny_sigma_reduces_to_perona_malik(self):
        g = GridGeometry.covering((0.0, 1.0), (0.0, 1.0), 0.02)
        u = GridField.from_function(g, lambda X, Y: 0.3 * np.tanh((X - 0.5) / 0.1) + 0.1 * Y)
        spec = DiffusivitySpec("rational", 0.5)
        out = catte_rhs(u, spec, gaussian_kernel(g.hx / 10, g.hx))
        assert np.abs(out.values - pm_rhs(u, spec).values).max() <= 1e-6

    def test_smoothing_helps_rescale_noise(self):
        # noise inflates |grad u|; the smoothed magnitude does not, so the
        # Catte flux acts more strongly than plain PM on a noisy plateau
        rng = np.random.default_rng(1)
        g = GridGeometry(32, 32)
        u = GridField(g, 0.5 + 0.05 * rng.standard_normal(g.shape))
        pm = np.abs(pm_rhs(u, RATIONAL).values).mean()
        ct = np.abs(catte_rhs(u, RATIONAL, gaussian_kernel(1.0)).values).mean()
        assert ct > pm

    def test_requires_sigma(self):
        with pytest.raises(ParameterError):
            SpatialOperator("catte", OperatorConfig(diffusivity=RATIONAL, sigma=0.0))


def cone_field(h, box=((2.5, 3.5), (3.5, 4.5))):
    g = GridGeometry.covering(*box, h)
    return g, GridField.from_function(g, lambda X, Y: np.hypot(X, Y) - 1.0)


class TestCurvature:
    def test_cone_example_value(self):
        g, u = cone_field(0.01)
        F = curvature_rhs(u).values
        assert F[50, 50] == pytest.approx(0.2, abs=1e-3)

    def test_matches_inverse_radius_at_second_order(self):
        errs = []
        for h in (0.04, 0.02):
            g = bm.annulus_geometry(h)
            F = curvature_rhs(bm.cone(g)).values
            X, Y = g.mesh()
            errs.append(np.abs(F - 1.0 / np.hypot(X, Y))[2:-2, 2:-2].max())
        assert errs[1] < 1e-3
        assert 3.2 <= errs[0] / errs[1] <= 4.8

    def test_constant_and_ramp_are_still(self):
        g = GridGeometry(12, 12, 0.1, 0.1)
        assert not curvature_rhs(GridField.constant(g, 2.0)).values.any()
        ramp = curvature_rhs(GridField.from_function(g, lambda X, Y: 0.3 * X - 0.7 * Y)).values
        assert np.abs(ramp[1:-1, 1:-1]).max() <= 1e-10

    def test_swap_symmetry(self):
        g = bm.annulus_geometry(0.05)
        F = curvature_rhs(bm.cone(g)).values
        assert np.abs(F - F.T).max() <= 1e-12

    def test_invariant_under_constant_shift(self):
        g, u = cone_field(0.02)
        a = curvature_rhs(u).values
        b = curvature_rhs(u.like(u.values + 5.0)).values
        assert np.abs(a - b).max() <= 1e-9

    @pytest.mark.parametrize("scale", [0.5, 2.0, 10.0])
    def test_contrast_invariance(self, scale):
        g, u = cone_field(0.02)
        a = curvature_rhs(u).values
        b = curvature_rhs(u.like(scale * u.values)).values
        # exact up to the eps regularization, which perturbs F by O(eps / |grad u|^2) relatively
        assert np.all(np.abs(b - scale * a) <= 1e-6 * scale * np.abs(a) + 1e-12)

    def test_needs_positive_epsilon(self):
        _, u = cone_field(0.1)
        with pytest.raises(ParameterError):
            curvature_rhs(u, eps=0.0)
        with pytest.raises(ParameterError):
            SpatialOperator.curvature(eps=0.0)

    def test_weighted_variant_is_bounded_by_plain(self):
        _, u = cone_field(0.02)
        plain = curvature_rhs(u).values
        spec = DiffusivitySpec("rational", 1.0)
        for kernel in (None, gaussian_kernel(0.05, 0.02)):
            weighted = weighted_curvature_rhs(u, spec, kernel).values
            assert np.all(np.abs(weighted) <= np.abs(plain) + 1e-15)
        flat = GridField.constant(u.geometry, 1.0)
        assert not weighted_curvature_rhs(flat, spec).values.any()

    def test_operator_dispatch(self):
        _, u = cone_field(0.05)
        op = SpatialOperator("curvature", OperatorConfig(1e-8, DiffusivitySpec("exponential", 2.0), 0.0))
        expected = weighted_curvature_rhs(u, DiffusivitySpec("exponential", 2.0)).values
        assert np.array_equal(op(u).values, expected)
