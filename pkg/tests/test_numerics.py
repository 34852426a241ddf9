import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carv import Box, Interval, box_center_radius, box_contains


def unit_square():
    return Box([0.0, 0.0], [1.0, 1.0])


class TestBoxContains:
    def test_interior_point(self):
        assert box_contains(unit_square(), np.array([0.5, 0.5]), 0.0)

    def test_boundary_inclusive(self):
        assert box_contains(unit_square(), np.array([1.0, 1.0]), 0.0)

    def test_outside_beyond_tolerance(self):
        assert not box_contains(unit_square(), np.array([1.0 + 1e-6, 0.5]), 1e-9)

    def test_within_tolerance(self):
        assert box_contains(unit_square(), np.array([1.0 + 1e-12, 0.5]), 1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            box_contains(unit_square(), np.array([0.5]), 0.0)

    def test_negative_tol_rejected(self):
        with pytest.raises(ValueError):
            box_contains(unit_square(), np.array([0.5, 0.5]), -1.0)

    def test_all_corners_contained(self):
        b = Box([-1.5, 0.25, 3.0], [2.0, 0.5, 3.0])
        for corner in b.corners():
            assert box_contains(b, corner, 0.0)


class TestCenterRadius:
    def test_basic(self):
        c, r = box_center_radius(Box([-1.0, 0.0], [1.0, 2.0]))
        np.testing.assert_array_equal(c, [0.0, 1.0])
        np.testing.assert_array_equal(r, [1.0, 1.0])

    def test_point_box(self):
        c, r = box_center_radius(Box([3.0], [3.0]))
        assert c[0] == 3.0 and r[0] == 0.0

    def test_reconstruction(self):
        b = Box([0.1], [0.7])
        c, r = box_center_radius(b)
        assert c[0] == pytest.approx(0.4) and r[0] == pytest.approx(0.3)
        np.testing.assert_allclose(c - r, b.lower, rtol=0, atol=np.spacing(1.0))
        np.testing.assert_allclose(c + r, b.upper, rtol=0, atol=np.spacing(1.0))

    @given(
        st.lists(
            st.tuples(
                st.floats(-1e6, 1e6, allow_nan=False),
                st.floats(0, 1e6, allow_nan=False),
            ),
            min_size=1,
            max_size=5,
        )
    )
    def test_reconstruction_within_one_ulp(self, pairs):
        lower = np.array([lo for lo, _ in pairs])
        upper = np.array([lo + w for lo, w in pairs])
        b = Box(lower, upper)
        c, r = box_center_radius(b)
        scale = np.maximum(np.abs(b.lower), np.abs(b.upper)) + 1
        assert np.all(np.abs((c - r) - b.lower) <= np.spacing(scale))
        assert np.all(np.abs((c + r) - b.upper) <= np.spacing(scale))


class TestValidation:
    def test_interval_lo_gt_hi_rejected(self):
        with pytest.raises(ValueError):
            Interval(1.0, 0.0)

    def test_interval_degenerate_ok(self):
        assert Interval(2.0, 2.0).width == 0.0

    def test_box_lower_gt_upper_rejected(self):
        with pytest.raises(ValueError):
            Box([0.0, 2.0], [1.0, 1.0])

    def test_box_nan_rejected(self):
        with pytest.raises(ValueError):
            Box([np.nan], [1.0])

    def test_box_dim_mismatch(self):
        with pytest.raises(ValueError):
            Box([0.0], [1.0, 2.0])

    def test_box_immutable(self):
        b = unit_square()
        with pytest.raises(ValueError):
            b.lower[0] = 5.0
