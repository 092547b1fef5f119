import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inflap import (BOUNDARY, EXTERIOR, INTERIOR, BoundaryTrace, GridDomain,
                    RhsSpec, ScalarField, build_domain, eval_rhs, load_mask,
                    oscillation, rhs_range, save_mask)


class TestDomains:
    def test_ball_mask_partition(self, ball2d):
        m = ball2d.mask
        assert set(np.unique(m)) <= {EXTERIOR, BOUNDARY, INTERIOR}
        assert ball2d.interior.any() and ball2d.boundary.any()

    def test_interior_never_touches_exterior(self, ball2d):
        interior = ball2d.interior
        ext = ball2d.mask == EXTERIOR
        for ax in (0, 1):
            for step in (-1, 1):
                shifted = np.roll(ext, step, axis=ax)
                assert not (interior & shifted).any()

    def test_ball_nodes_strictly_inside(self, ball2d):
        pts = np.argwhere(ball2d.nonexterior) * ball2d.h + ball2d.origin
        assert (np.linalg.norm(pts, axis=1) < 1.0).all()

    def test_box_includes_endpoints(self):
        d = build_domain({"kind": "box", "lo": [0.0], "hi": [1.0]}, 0.25)
        xs = np.argwhere(d.nonexterior).ravel() * d.h + d.origin[0]
        assert xs.min() == pytest.approx(0.0)
        assert xs.max() == pytest.approx(1.0)

    def test_bad_spacing(self):
        with pytest.raises(ValueError):
            build_domain({"kind": "ball", "center": [0.0], "R": 1.0}, 0.0)

    def test_unknown_shape(self):
        with pytest.raises(ValueError):
            build_domain({"kind": "pentagon"}, 0.1)

    def test_isolated_interior_rejected(self):
        mask = np.zeros((5, 5), dtype=np.int8)
        mask[2, 2] = INTERIOR
        mask[1, 2] = BOUNDARY
        with pytest.raises(ValueError):
            GridDomain(0.1, [0.0, 0.0], mask)

    def test_radii_ordering(self, ball2d):
        out_r, _, in_r, _ = ball2d.radii()
        assert 0.0 < in_r <= out_r
        assert out_r == pytest.approx(1.0, abs=0.15)
        assert in_r == pytest.approx(1.0, abs=0.15)

    def test_exact_radii(self, ball2d):
        assert ball2d.exact_radii() == (1.0, 1.0)
        d = build_domain({"kind": "box", "lo": [0.0, 0.0],
                          "hi": [2.0, 1.0]}, 0.25)
        out_r, in_r = d.exact_radii()
        assert out_r == pytest.approx(np.hypot(1.0, 0.5))
        assert in_r == pytest.approx(0.5)

    def test_mask_roundtrip(self, ball2d, tmp_path):
        path = tmp_path / "ball.mask"
        save_mask(ball2d, path)
        d2 = load_mask(path)
        assert d2.h == ball2d.h
        assert np.array_equal(d2.mask, ball2d.mask)
        assert np.allclose(d2.origin, ball2d.origin)


class TestFieldsAndTraces:
    def test_constant_field(self, ball2d):
        u = ScalarField.constant(ball2d, 3.0)
        assert u.sup() == 3.0 and u.inf() == 3.0
        assert np.isnan(u.values[ball2d.mask == EXTERIOR]).all()

    def test_from_function(self, ball2d):
        u = ScalarField.from_function(ball2d, lambda p: p[..., 0])
        assert u.sup() <= 1.0 and u.inf() >= -1.0

    def test_nonfinite_rejected(self, ball2d):
        vals = np.full(ball2d.dims, np.nan)
        vals[ball2d.nonexterior] = np.inf
        with pytest.raises(ValueError):
            ScalarField(ball2d, vals)

    def test_trace_bounds_and_oscillation(self, ball2d):
        b = BoundaryTrace.from_function(ball2d, lambda p: p[..., 0])
        assert b.ell < 0.0 < b.L
        assert oscillation(b) == pytest.approx(b.L - b.ell)
        assert oscillation(BoundaryTrace.constant(ball2d, 2.0)) == 0.0


class TestRhsSpec:
    def test_pinned_values(self):
        assert eval_rhs(RhsSpec("(neg (exp t))"), None, 1.0) \
            == pytest.approx(-np.e)
        assert eval_rhs(RhsSpec("(pow t 3)"), None, -2.0) \
            == pytest.approx(-8.0)
        assert eval_rhs(RhsSpec("(cospow 2)"), None, 0.0) \
            == pytest.approx(4.0)
        f = RhsSpec("(mul (coef a) (pow t 3))", coefs={"a": 0.5})
        assert eval_rhs(f, np.zeros(2), 2.0) == pytest.approx(4.0)

    def test_clip(self):
        f = RhsSpec("(clip (exp t) 10)")
        assert eval_rhs(f, None, 100.0) == 10.0

    def test_saturation(self):
        f = RhsSpec("(exp t)")
        assert eval_rhs(f, None, 1e6) == 1e300

    def test_missing_coef(self):
        with pytest.raises(ValueError):
            RhsSpec("(coef a)")

    def test_parse_error(self):
        with pytest.raises(ValueError):
            RhsSpec("(wat t)")

    def test_sign_probe(self):
        with pytest.raises(ValueError):
            RhsSpec("t", sign="nonneg")
        RhsSpec("(exp t)", sign="nonneg")

    def test_monotone_probe(self):
        with pytest.raises(ValueError):
            RhsSpec("(neg t)", monotone_in_t="nondecreasing")
        RhsSpec("t", monotone_in_t="nondecreasing")

    def test_monotone_value_checked(self):
        with pytest.raises(ValueError):
            RhsSpec("t", monotone_in_t=True)

    def test_rhs_range_exact(self):
        f = RhsSpec("(neg (exp t))")
        lo, hi, tag = rhs_range(f, (0.0, 3.0))
        assert tag == "exact"
        assert lo == pytest.approx(-np.exp(3.0))
        assert hi == pytest.approx(-1.0)

    @settings(max_examples=25, deadline=None)
    @given(t=st.floats(-5.0, 5.0))
    def test_range_contains_samples(self, t):
        f = RhsSpec("(add (pow t 3) (neg (exp t)))")
        lo, hi, _ = rhs_range(f, (-5.0, 5.0))
        assert lo - 1e-9 <= eval_rhs(f, None, t) <= hi + 1e-9
