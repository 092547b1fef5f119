"""Tests for the Gauss-Seidel and Perron solvers."""

import numpy as np
import pytest

from inflap import (
    BoundaryTrace,
    RhsSpec,
    ScalarField,
    SchemeParams,
    SolveOptions,
    Stencil,
    build_domain,
    local_update,
    perron_solve,
    probe_nonexistence,
    residual_field,
    solve_dirichlet,
)


class TestSolveDirichlet:
    def test_constant_boundary_zero_rhs(self, ball2d):
        b = BoundaryTrace.constant(ball2d, 3.0)
        u, rep = solve_dirichlet(ball2d, RhsSpec("(const 0)"), b)
        assert rep.status == "converged"
        assert rep.sweeps <= 2
        assert np.allclose(u.values[ball2d.nonexterior], 3.0)

    def test_one_dimensional_exact(self):
        # f == 1 on (0, 1) with zero boundary data has the closed form
        # u(x) = (1/4) ((3|x - A|)^(4/3) sgn(x - A) + (3 A)^(4/3)),
        # A fixed by u(1) = 0
        d = build_domain({"kind": "box", "lo": [0.0], "hi": [1.0]}, 1.0 / 100)
        b = BoundaryTrace.constant(d, 0.0)
        u, rep = solve_dirichlet(d, RhsSpec("(const 1)"), b,
                                 SolveOptions(tol=1e-10))
        assert rep.status == "converged"

        # symmetry pins the critical point at A = 1/2
        A = 0.5
        x = d.grid_coords()[0]
        exact = (np.abs(3.0 * (x - A)) ** (4 / 3)
                 - (3.0 * A) ** (4 / 3)) / 4.0
        err = np.abs(u.values - exact)[d.nonexterior].max()
        assert err < 5e-4

    def test_degree_three_scaling(self, ball2d, rng):
        # u solves rhs f iff c*u solves c**3 * f with boundary c*b
        c = 2.0
        b = BoundaryTrace.constant(ball2d, 0.0)
        u1, r1 = solve_dirichlet(ball2d, RhsSpec("(const 1)"), b,
                                 SolveOptions(tol=1e-10))
        u2, r2 = solve_dirichlet(ball2d, RhsSpec("(const 8)"), b,
                                 SolveOptions(tol=1e-10))
        assert r1.status == r2.status == "converged"
        ne = ball2d.nonexterior
        assert np.abs(c * u1.values[ne] - u2.values[ne]).max() < 1e-7

    def test_order_agreement(self, small_ball8):
        d = small_ball8
        b = BoundaryTrace.from_function(d, lambda p: p[:, 0] - p[:, 1])
        f = RhsSpec("(const -1)")
        u1, _ = solve_dirichlet(d, f, b, SolveOptions(tol=1e-8))
        u2, _ = solve_dirichlet(d, f, b,
                                SolveOptions(tol=1e-8,
                                             order="lexicographic"))
        ne = d.nonexterior
        assert np.abs(u1.values[ne] - u2.values[ne]).max() < 1e-7

    def test_residual_small_after_converged(self, ball2d):
        b = BoundaryTrace.constant(ball2d, 0.0)
        f = RhsSpec("(const 1)")
        u, rep = solve_dirichlet(ball2d, f, b, SolveOptions(tol=1e-9))
        res = residual_field(u, f, Stencil(ball2d, SchemeParams()))
        # the regularized fixed-point residual converged; the raw one is
        # small wherever the gradient is not degenerate
        assert rep.residual <= 1e-9
        assert np.median(np.abs(res.values[ball2d.interior])) < 1e-6

    def test_t_dependent_monotone(self, small_ball):
        # f(t) = e^t is nondecreasing, handled by the scalar bisection
        b = BoundaryTrace.constant(small_ball, 0.0)
        f = RhsSpec("(exp t)", monotone_in_t="nondecreasing")
        u, rep = solve_dirichlet(small_ball, f, b, SolveOptions(tol=1e-7))
        assert rep.status == "converged"
        assert u.sup() <= 0.0 + 1e-12
        assert u.inf() > -1.0

    def test_initial_guess_independence(self, ball2d):
        # the gradient-dominated zero-rhs problem has a unique discrete
        # solution, so the start point cannot matter
        b = BoundaryTrace.from_function(ball2d, lambda p: p[:, 0] - p[:, 1])
        f = RhsSpec("(const 0)")
        o = SolveOptions(tol=1e-9)
        u1, _ = solve_dirichlet(ball2d, f, b, o)
        g = ScalarField.constant(ball2d, 2.0)
        u2, _ = solve_dirichlet(ball2d, f, b, o, initial_guess=g)
        ne = ball2d.nonexterior
        assert np.abs(u1.values[ne] - u2.values[ne]).max() < 1e-6

    def test_bad_options(self):
        with pytest.raises(ValueError):
            SolveOptions(max_sweeps=0)
        with pytest.raises(ValueError):
            SolveOptions(tol=-1.0)
        with pytest.raises(ValueError):
            SolveOptions(order="diagonal")


class TestLocalUpdate:
    def test_closed_form_literal(self):
        # width-1 literal stencil on a 1D grid: the axis pair gives
        # (u+ + u-)/2 - t = eps^2 f / (2 phat^2) with
        # phat = (u+ - u-) / (2 eps)
        d = build_domain({"kind": "box", "lo": [0.0], "hi": [1.0]}, 0.25)
        s = Stencil(d, SchemeParams(w=1, refined=False))
        u = ScalarField(d, np.linspace(0.0, 1.0, d.dims[0]) ** 2)
        node = (2,)
        f = RhsSpec("(const 1)")
        got = local_update(node, u, f, s)
        up, um = u.values[3], u.values[1]
        eps = 0.25
        phat2 = ((up - um) / (2 * eps)) ** 2
        want = 0.5 * (up + um) - 0.5 * eps ** 2 * 1.0 / phat2
        assert got == pytest.approx(want, abs=1e-12)

    def test_requires_interior(self, ball2d):
        u = ScalarField.constant(ball2d, 0.0)
        s = Stencil(ball2d, SchemeParams())
        bd_node = tuple(np.argwhere(ball2d.boundary)[0])
        with pytest.raises(ValueError):
            local_update(bd_node, u, RhsSpec("(const 0)"), s)


class TestPerron:
    def test_ordering_errors(self, ball2d):
        b = BoundaryTrace.constant(ball2d, 0.0)
        f = RhsSpec("(const 1)")
        lo = ScalarField.constant(ball2d, -1.0)
        hi = ScalarField.constant(ball2d, 1.0)
        with pytest.raises(ValueError):
            perron_solve(ball2d, f, b, hi, lo)
        with pytest.raises(ValueError):
            perron_solve(ball2d, f, b, hi, hi)  # sub > b on the boundary
        b2 = BoundaryTrace.constant(ball2d, 2.0)
        with pytest.raises(ValueError):
            perron_solve(ball2d, f, b2, lo, hi)  # b > super on the boundary

    def test_fixed_point_converges_immediately(self, ball2d):
        # starting the iteration at the solution terminates in one sweep
        b = BoundaryTrace.constant(ball2d, 0.0)
        f = RhsSpec("(const 1)")
        u, _ = solve_dirichlet(ball2d, f, b, SolveOptions(tol=1e-10))
        hi = ScalarField.constant(ball2d, 1.0)
        u2, rep = perron_solve(ball2d, f, b, u, hi,
                               SolveOptions(tol=1e-8))
        assert rep.status == "converged"
        assert rep.sweeps == 1
        ne = ball2d.nonexterior
        assert np.abs(u2.values[ne] - u.values[ne]).max() < 1e-7

    def test_sandwich_and_agreement(self, small_ball):
        from inflap import SIGMA, cone_field

        b = BoundaryTrace.constant(small_ball, 0.0)
        f = RhsSpec("(neg (exp t))", monotone_in_t="nonincreasing")
        sub = ScalarField.constant(small_ball, 0.0)
        sup = cone_field(small_ball, 1.3, [0.0, 0.0],
                         SIGMA * 0.5 ** (4.0 / 3.0), "super")
        o = SolveOptions(tol=1e-6)
        u, rep = perron_solve(small_ball, f, b, sub, sup, o)
        assert rep.status == "converged"
        ne = small_ball.nonexterior
        assert (u.values[ne] >= sub.values[ne] - 1e-9).all()
        assert (u.values[ne] <= sup.values[ne] + 1e-9).all()
        u2, _ = solve_dirichlet(small_ball, f, b, o)
        assert np.abs(u.values[ne] - u2.values[ne]).max() < 1e-5

    def test_report_monotone_flag_honest(self, small_ball):
        b = BoundaryTrace.constant(small_ball, 0.0)
        f = RhsSpec("(const 1)")
        sub = ScalarField.constant(small_ball, -1.0)
        sup = ScalarField.constant(small_ball, 0.0)
        u, rep = perron_solve(small_ball, f, b, sub, sup,
                              SolveOptions(tol=1e-8))
        assert rep.status == "converged"
        assert isinstance(rep.monotone, bool)


class TestProbe:
    def test_requires_alarm(self, small_ball):
        b = BoundaryTrace.constant(small_ball, 0.0)
        f = RhsSpec("(exp t)", monotone_in_t="nondecreasing")
        with pytest.raises(ValueError):
            probe_nonexistence(small_ball, f, b, SolveOptions())

    def test_bounded_regime_converges(self, small_ball):
        b = BoundaryTrace.constant(small_ball, 0.0)
        f = RhsSpec("(const -1)")
        rep = probe_nonexistence(small_ball, f, b,
                                 SolveOptions(tol=1e-8, alarm_bound=100.0))
        assert rep.status == "converged"
        assert rep.sup <= 100.0

    def test_divergent_regime_alarms(self):
        d = build_domain({"kind": "ball", "center": [0.0, 0.0], "R": 3.0},
                         1.0 / 8)
        b = BoundaryTrace.constant(d, 0.0)
        f = RhsSpec("(neg (exp t))", monotone_in_t="nonincreasing")
        rep = probe_nonexistence(d, f, b,
                                 SolveOptions(alarm_bound=20.0,
                                              max_sweeps=2000))
        assert rep.status == "diverged_past_alarm"
        assert rep.sup > 20.0
