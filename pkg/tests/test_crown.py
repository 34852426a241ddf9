import numpy as np
import pytest

from carv import (
    Box,
    Interval,
    backward_crown,
    concretize,
    evaluate,
    relax_relu,
    relax_trig,
)
from carv.compgraph import GraphBuilder
from carv.crown import LinearBounds

from conftest import random_network, DI
from carv import compose_closed_loop


def envelope_holds(r, fn, lo, hi, n=10_000, tol=1e-12):
    z = np.linspace(lo, hi, n)
    f = fn(z)
    lower = r.lower_slope * z + r.lower_intercept
    upper = r.upper_slope * z + r.upper_intercept
    return float(np.max(lower - f)) <= tol and float(np.max(f - upper)) <= tol


class TestRelaxRelu:
    def test_fully_active(self):
        r = relax_relu(Interval(1.0, 2.0))
        assert (r.lower_slope, r.lower_intercept) == (1.0, 0.0)
        assert (r.upper_slope, r.upper_intercept) == (1.0, 0.0)

    def test_fully_inactive(self):
        r = relax_relu(Interval(-2.0, -1.0))
        assert (r.lower_slope, r.lower_intercept) == (0.0, 0.0)
        assert (r.upper_slope, r.upper_intercept) == (0.0, 0.0)

    def test_unstable_adaptive(self):
        r = relax_relu(Interval(-1.0, 2.0))
        assert r.upper_slope == pytest.approx(2.0 / 3.0)
        assert r.upper_intercept == pytest.approx(2.0 / 3.0)
        assert (r.lower_slope, r.lower_intercept) == (1.0, 0.0)

    def test_unstable_lower_zero_when_mostly_negative(self):
        r = relax_relu(Interval(-3.0, 1.0))
        assert (r.lower_slope, r.lower_intercept) == (0.0, 0.0)

    def test_envelope_soundness_fuzzed(self, rng):
        relu = lambda z: np.maximum(z, 0.0)
        for _ in range(200):
            lo = rng.uniform(-5, 5)
            hi = lo + rng.uniform(0, 5)
            r = relax_relu(Interval(lo, hi))
            assert envelope_holds(r, relu, lo, hi)

    def test_shrinking_never_loosens_upper(self, rng):
        # the upper chord over a sub-interval is pointwise at least as tight;
        # the adaptive lower rule can flip slope between 0 and 1 when the
        # interval shrinks, so only its soundness is guaranteed, not
        # pointwise monotonicity
        relu = lambda z: np.maximum(z, 0.0)
        for _ in range(50):
            lo = rng.uniform(-4, 0)
            hi = rng.uniform(0, 4)
            lo2 = rng.uniform(lo, hi)
            hi2 = rng.uniform(lo2, hi)
            big = relax_relu(Interval(lo, hi))
            small = relax_relu(Interval(lo2, hi2))
            z = np.linspace(lo2, hi2, 500)
            assert np.all(
                small.upper_slope * z + small.upper_intercept
                <= big.upper_slope * z + big.upper_intercept + 1e-12
            )
            assert envelope_holds(small, relu, lo2, hi2)


class TestRelaxTrig:
    def test_point_interval(self):
        r = relax_trig("sin", Interval(0.3, 0.3))
        assert r.lower_slope == 0.0 and r.upper_slope == 0.0
        assert r.lower_intercept == pytest.approx(np.sin(0.3))
        assert r.upper_intercept == pytest.approx(np.sin(0.3))

    def test_sin_concave_region(self):
        r = relax_trig("sin", Interval(0.0, 1.0))
        assert r.lower_slope == pytest.approx(np.sin(1.0) - np.sin(0.0))
        assert r.upper_slope == pytest.approx(np.cos(0.5))
        assert envelope_holds(r, np.sin, 0.0, 1.0)

    def test_cos_wide_mixed_curvature(self):
        r = relax_trig("cos", Interval(-4.0, 4.0))
        assert r.lower_slope == 0.0 and r.upper_slope == 0.0
        # exact range of cos over [-4, 4] is [-1, 1]
        assert r.lower_intercept == pytest.approx(-1.0)
        assert r.upper_intercept == pytest.approx(1.0)

    def test_width_over_two_pi(self):
        r = relax_trig("sin", Interval(0.0, 7.0))
        assert (r.lower_intercept, r.upper_intercept) == (-1.0, 1.0)

    def test_convex_region_sin(self):
        r = relax_trig("sin", Interval(-1.0, -0.1))
        assert envelope_holds(r, np.sin, -1.0, -0.1)
        # convex: tangent is the lower bound
        assert r.lower_slope == pytest.approx(np.cos(-0.55))

    @pytest.mark.parametrize("kind,fn", [("sin", np.sin), ("cos", np.cos)])
    def test_envelope_soundness_fuzzed(self, rng, kind, fn):
        for _ in range(200):
            lo = rng.uniform(-8, 8)
            hi = lo + rng.uniform(0, 8)
            assert envelope_holds(relax_trig(kind, Interval(lo, hi)), fn, lo, hi)


class TestBackwardCrown:
    def test_affine_only_exact(self, rng):
        w = rng.normal(size=(3, 2))
        b = rng.normal(size=3)
        gb = GraphBuilder(2)
        g = gb.finish(gb.affine(0, w, b))
        lb = backward_crown(g, Box([-1.0, -1.0], [1.0, 1.0]))
        np.testing.assert_array_equal(lb.psi, w)
        np.testing.assert_array_equal(lb.phi, w)
        np.testing.assert_array_equal(lb.alpha, b)
        np.testing.assert_array_equal(lb.beta, b)

    def test_identity_graph(self):
        gb = GraphBuilder(2)
        g = gb.finish(gb.affine(0, np.eye(2), np.zeros(2)))
        lb = backward_crown(g, Box([-1.0, -1.0], [1.0, 1.0]))
        np.testing.assert_array_equal(lb.psi, np.eye(2))
        np.testing.assert_array_equal(lb.alpha, np.zeros(2))

    def test_two_layer_relu_sampling_oracle(self, rng):
        net = random_network(rng, (2, 6, 2), scale=1.5)
        gb = GraphBuilder(2)
        h = gb.affine(0, *net.layers[0][:2])
        h = gb.relu(h)
        out = gb.affine(h, *net.layers[1][:2])
        g = gb.finish(out)
        box = Box([-1.0, -1.0], [1.0, 1.0])
        lb = backward_crown(g, box)
        z = rng.uniform(-1, 1, size=(10_000, 2))
        vals = np.array([evaluate(g, p) for p in z])
        lower = z @ lb.psi.T + lb.alpha
        upper = z @ lb.phi.T + lb.beta
        assert np.max(lower - vals) <= 1e-9
        assert np.max(vals - upper) <= 1e-9

    def test_pre_activation_cache_exposed(self, rng):
        net = random_network(rng, (2, 4, 1))
        g = compose_closed_loop(DI, net, 2)
        lb = backward_crown(g, Box([-0.5, -0.5], [0.5, 0.5]))
        assert lb.pre_activations
        for lo, hi in lb.pre_activations.values():
            assert np.all(lo <= hi + 1e-12)

    def test_input_dim_mismatch(self, rng):
        g = compose_closed_loop(DI, random_network(rng, (2, 3, 1)), 1)
        with pytest.raises(ValueError):
            backward_crown(g, Box([0.0], [1.0]))


class TestConcretize:
    def test_identity(self):
        lb = LinearBounds(np.eye(2), np.zeros(2), np.eye(2), np.zeros(2))
        out = concretize(lb, Box([-1.0, -1.0], [1.0, 1.0]))
        np.testing.assert_array_equal(out.lower, [-1.0, -1.0])
        np.testing.assert_array_equal(out.upper, [1.0, 1.0])

    def test_linearity(self):
        m = np.array([[1.0, 1.0]])
        lb = LinearBounds(m, np.zeros(1), m, np.zeros(1))
        out = concretize(lb, Box([0.0, 0.0], [1.0, 1.0]))
        np.testing.assert_array_equal(out.lower, [0.0])
        np.testing.assert_array_equal(out.upper, [2.0])

    def test_vertex_enumeration_oracle(self, rng):
        box = Box([-1.0, -1.0], [1.0, 1.0])
        for _ in range(20):
            psi = rng.normal(size=(2, 2))
            phi = psi + np.abs(rng.normal(size=(2, 2)))  # ensure consistency
            alpha = rng.normal(size=2)
            beta = alpha + np.abs(rng.normal(size=2))
            lb = LinearBounds(psi, alpha, phi, beta)
            out = concretize(lb, box)
            corners = box.corners()
            lo_oracle = np.min(corners @ psi.T + alpha, axis=0)
            hi_oracle = np.max(corners @ phi.T + beta, axis=0)
            np.testing.assert_allclose(out.lower, lo_oracle, atol=1e-12)
            np.testing.assert_allclose(out.upper, hi_oracle, atol=1e-12)


class TestFuzzedSoundness:
    def test_random_graphs_contain_samples(self, rng):
        # 50 random graphs mixing relu/sin/cos, <=3 layers, width <=8
        for trial in range(50):
            n_in = int(rng.integers(1, 4))
            gb = GraphBuilder(n_in)
            node = 0
            dim = n_in
            for _ in range(int(rng.integers(1, 4))):
                width = int(rng.integers(1, 9))
                node = gb.affine(
                    node, rng.normal(size=(width, dim)), 0.3 * rng.normal(size=width)
                )
                dim = width
                kind = rng.choice(["relu", "sin", "cos", "none"])
                if kind == "relu":
                    node = gb.relu(node)
                elif kind in ("sin", "cos"):
                    node = gb.trig(str(kind), node)
            g = gb.finish(node)
            lo = rng.uniform(-2, 1, size=n_in)
            box = Box(lo, lo + rng.uniform(0, 2, size=n_in))
            out = concretize(backward_crown(g, box), box)
            z = rng.uniform(box.lower, box.upper, size=(1000, n_in))
            vals = np.array([evaluate(g, p) for p in z])
            assert np.max(box_slack(out, vals)) <= 1e-9, f"trial {trial}"

    def test_affine_chain_exact_hull(self, rng):
        gb = GraphBuilder(2)
        node = gb.affine(0, rng.normal(size=(3, 2)), rng.normal(size=3))
        node = gb.affine(node, rng.normal(size=(2, 3)), rng.normal(size=2))
        g = gb.finish(node)
        box = Box([-1.0, 0.0], [1.0, 2.0])
        out = concretize(backward_crown(g, box), box)
        vals = np.array([evaluate(g, c) for c in box.corners()])
        np.testing.assert_allclose(out.lower, vals.min(axis=0), atol=1e-12)
        np.testing.assert_allclose(out.upper, vals.max(axis=0), atol=1e-12)


def box_slack(box, pts):
    return np.maximum(box.lower - pts, pts - box.upper)
