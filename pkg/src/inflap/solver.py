"""Gauss-Seidel Dirichlet solver and Perron-style monotone iteration.

The local update solves the scalar equation S(t) * phat^2 = f(x, t) at one
node, with phat frozen from the current iterate and S the second difference
along the currently steepest pair.  Division by phat^2 is guarded by a
scale-aware floor: p_floor^2 = (eps * |f|)^(2/3) / (2 sigma), so that a
flat iterate grows by sigma |f|^(1/3) eps^(4/3) per step, the growth rate
of the exact cone solution across one stencil arm, instead of exploding.
"""

from dataclasses import dataclass, replace

import numpy as np

from .core import RhsSpec, ScalarField
from .scheme import SchemeParams, Stencil, inf_lap_field, residual_field

SIGMA = 3.0 ** (4.0 / 3.0) / 4.0


@dataclass
class SolveOptions:
    """Iteration knobs for the Dirichlet and Perron solvers."""
    max_sweeps: int = 100000
    tol: float = None            # default 1e-8 * (1 + sup|b|)
    damping: float = None        # default 1.0, or 0.5 for t-dependent f
    order: str = "red-black"     # or "lexicographic"
    alarm_bound: float = None

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.tol is not None and self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.order not in ("red-black", "lexicographic"):
            raise ValueError("unknown sweep order %r" % self.order)


@dataclass
class SolveReport:
    status: str                  # converged | max_sweeps_reached | diverged_past_alarm
    sweeps: int
    residual: float
    sup: float
    inf: float
    monotone: bool
    clipped: bool = False


def _depends_on_t(tree):
    op = tree[0]
    if op in ("t", "pow", "exp", "cospow"):
        return True
    if op in ("add", "mul"):
        return any(_depends_on_t(c) for c in tree[1])
    if op in ("neg",):
        return _depends_on_t(tree[1])
    if op == "clip":
        return _depends_on_t(tree[1])
    return False


def _mode_of(f):
    if not _depends_on_t(f.tree):
        return "const"
    if f.monotone_in_t == "nondecreasing":
        return "monotone"
    return "implicit"


def _phat2_eff(phat, eps, fscale, delta_reg):
    floor = (eps * np.abs(fscale)) ** (2.0 / 3.0) / (2.0 * SIGMA)
    return np.maximum(np.maximum(phat ** 2, floor), delta_reg)


class _Sweeper:
    """Vectorized colored Gauss-Seidel machinery shared by the solvers."""

    def __init__(self, domain, f, stencil, opts):
        self.domain = domain
        self.f = f
        self.stencil = stencil
        self.opts = opts
        self.mode = _mode_of(f)
        # undamped colored sweeps can enter a period-2 cycle when f
        # depends on t (the frozen slope couples neighboring updates),
        # so t-dependent modes default to averaging damping
        self.theta = opts.damping if opts.damping is not None \
            else (1.0 if self.mode == "const" else 0.5)
        idx = np.indices(domain.dims).sum(axis=0)
        self.colors = [domain.interior & (idx % 2 == 0),
                       domain.interior & (idx % 2 == 1)]
        self.node_order = None
        if opts.order == "lexicographic":
            self.node_order = [tuple(ix) for ix in
                               np.argwhere(domain.interior)]
        if self.mode == "const":
            self.fx0 = f.eval_grid(domain, np.zeros(domain.dims))

    def _candidate(self, values, color):
        dom = self.domain
        st = self.stencil
        arm_p, arm_m, c0, csum, eps = st.pair_arrays(values)
        shape1 = (-1,) + (1,) * dom.N
        with np.errstate(invalid="ignore"):
            dc = (arm_p - arm_m) / (2.0 * eps.reshape(shape1))
        score = np.where(np.isnan(dc), -np.inf, np.abs(dc))
        ksel = np.argmax(score, axis=0)
        take = lambda a: np.take_along_axis(
            a, np.expand_dims(ksel, 0), axis=0)[0]
        A = take(arm_p) + take(arm_m) - 2.0 * take(csum)
        phat = take(dc)
        eps_s = eps[ksel]
        c0_s = c0[ksel]
        dreg = st.params.delta_reg

        if self.mode == "const":
            fx = self.fx0
            p2 = _phat2_eff(phat, eps_s, fx, dreg)
            t = (A - eps_s ** 2 * fx / p2) / (2.0 * c0_s)
        else:
            t = self._bisect(values, color, A, phat, eps_s, c0_s, dreg)
        return t

    def _bisect(self, values, color, A, phat, eps_s, c0_s, dreg):
        """Vector bisection of the implicit local equation.

        Solves 2 c0 t - A + eps^2 f(x, t) / p2 = 0 with the gradient
        floor p2 frozen at the incoming value; at a Gauss-Seidel fixed
        point the frozen floor equals the current one, so fp_residual
        vanishes there.  When no sign change can be found (f outgrowing
        the linear term, the local blow-up mechanism) the bisection runs
        off to the bracket edge, which the alarm check then catches.
        """
        dom = self.domain
        with np.errstate(invalid="ignore"):
            fx_old = self.f.eval_grid(dom, values)
        p2 = _phat2_eff(phat, eps_s, fx_old, dreg)

        def g(t):
            with np.errstate(invalid="ignore"):
                ft = self.f.eval_grid(dom, t)
            return 2.0 * c0_s * t - A + eps_s ** 2 * ft / p2

        vals = values[dom.nonexterior]
        lo = np.full(dom.dims, vals.min() - 1.0)
        hi = np.full(dom.dims, vals.max() + 1.0)
        span = 1.0
        for _ in range(60):
            with np.errstate(invalid="ignore"):
                bad_lo = color & (g(lo) > 0)
                bad_hi = color & (g(hi) < 0)
            if not (bad_lo.any() or bad_hi.any()):
                break
            span *= 2.0
            lo = np.where(bad_lo, lo - span, lo)
            hi = np.where(bad_hi, hi + span, hi)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            with np.errstate(invalid="ignore"):
                up = g(mid) > 0
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        return 0.5 * (lo + hi)

    def fp_residual(self, values):
        """Sup-norm of the regularized residual S * phat2_eff - f.

        This is the residual of the equation the local update actually
        solves; it vanishes at the Gauss-Seidel fixed point even at nodes
        where the discrete gradient degenerates (e.g. interior extrema,
        where the raw S * phat^2 residual cannot go below |f|).
        """
        dom = self.domain
        st = self.stencil
        arm_p, arm_m, c0, csum, eps = st.pair_arrays(values)
        shape1 = (-1,) + (1,) * dom.N
        with np.errstate(invalid="ignore"):
            dc = (arm_p - arm_m) / (2.0 * eps.reshape(shape1))
        score = np.where(np.isnan(dc), -np.inf, np.abs(dc))
        ksel = np.argmax(score, axis=0)
        take = lambda a: np.take_along_axis(
            a, np.expand_dims(ksel, 0), axis=0)[0]
        u0c = c0[ksel] * values + take(csum)
        eps_s = eps[ksel]
        with np.errstate(invalid="ignore"):
            S = (take(arm_p) + take(arm_m) - 2.0 * u0c) / eps_s ** 2
            fx = self.fx0 if self.mode == "const" \
                else self.f.eval_grid(dom, values)
        p2 = _phat2_eff(take(dc), eps_s, fx, st.params.delta_reg)
        res = S * p2 - fx
        return float(np.abs(res[dom.interior]).max())

    def _candidate_at(self, node, values):
        """Scalar candidate value at one node (sequential sweep path)."""
        st = self.stencil
        best, bestA, bestEps, bestC0 = None, None, None, None
        for k, p in enumerate(st.pairs):
            if not st.avail[k][node]:
                continue
            ap = sum(wt * values[tuple(n + o for n, o in zip(node, off))]
                     for off, wt in p.plus)
            am = sum(wt * values[tuple(n + o for n, o in zip(node, off))]
                     for off, wt in p.minus)
            cs, c0 = 0.0, 1.0
            for off, wt in p.corr:
                up = tuple(n + o for n, o in zip(node, off))
                dn = tuple(n - o for n, o in zip(node, off))
                cs += wt * (values[up] + values[dn])
                c0 -= 2.0 * wt
            dc = (ap - am) / (2.0 * p.eps)
            if best is None or abs(dc) > abs(best):
                best, bestA = dc, ap + am - 2.0 * cs
                bestEps, bestC0 = p.eps, c0
        x = self.domain.coords(node)
        dreg = st.params.delta_reg
        u0 = values[node]
        from .core import eval_rhs
        if self.mode == "const":
            fx = eval_rhs(self.f, x, u0)
            p2 = float(_phat2_eff(np.asarray(best), bestEps, fx, dreg))
            return (bestA - bestEps ** 2 * fx / p2) / (2.0 * bestC0)
        fx0 = eval_rhs(self.f, x, u0)
        p2 = float(_phat2_eff(np.asarray(best), bestEps, fx0, dreg))

        def g(t):
            return 2.0 * bestC0 * t - bestA \
                + bestEps ** 2 * eval_rhs(self.f, x, t) / p2

        lo, hi = u0 - 1.0, u0 + 1.0
        span = 1.0
        for _ in range(60):
            if g(lo) <= 0 and g(hi) >= 0:
                break
            span *= 2.0
            if g(lo) > 0:
                lo -= span
            if g(hi) < 0:
                hi += span
        else:
            raise ValueError("bisection bracket failure in local update")
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def half_sweep(self, values, color, only_up=False, cap=None):
        t = self._candidate(values, color)
        new = values[color] + self.theta * (t[color] - values[color])
        if only_up:
            new = np.maximum(values[color], new)
        clipped = False
        if cap is not None:
            capped = np.minimum(new, cap[color])
            clipped = bool((new > cap[color] + 1e-12).any())
            new = capped
        values[color] = new
        return clipped

    def full_sweep(self, values, only_up=False, cap=None):
        """One sweep; colored vectorized path or sequential lexicographic."""
        clipped = False
        if self.node_order is None:
            for color in self.colors:
                clipped |= self.half_sweep(values, color,
                                           only_up=only_up, cap=cap)
            return clipped
        for node in self.node_order:
            t = self._candidate_at(node, values)
            new = values[node] + self.theta * (t - values[node])
            if only_up:
                new = max(values[node], new)
            if cap is not None:
                if new > cap[node] + 1e-12:
                    clipped = True
                new = min(new, cap[node])
            values[node] = new
        return clipped


def local_update(node, u, f, s, p=None):
    """Solve the local scalar equation at one interior node.

    Returns the value t with (u+ - 2t~ + u-) * phat^2 / eps^2 = f(x, t),
    where t~ is t adjusted by the stencil's center correction and phat is
    frozen from the current iterate.
    """
    node = tuple(node)
    if u.domain.mask[node] != 2:
        raise ValueError("local_update needs an interior node")
    opts = SolveOptions(damping=1.0)
    sw = _Sweeper(u.domain, f, s, opts)
    return float(sw._candidate_at(node, u.values))


def _init_harmonic(domain, b, stencil, opts, tol):
    f0 = RhsSpec("(const 0)")
    vals = np.full(domain.dims, np.nan)
    vals[domain.boundary] = b.values[domain.boundary]
    vals[domain.interior] = 0.5 * (b.ell + b.L)
    sw = _Sweeper(domain, f0, stencil, replace(opts, damping=1.0))
    for _ in range(opts.max_sweeps):
        sw.full_sweep(vals)
        if sw.fp_residual(vals) <= tol:
            break
    return vals


def solve_dirichlet(d, f, b, opts=None, params=None, initial_guess=None):
    """Gauss-Seidel solve of Delta_inf u = f(x, u), u = b on the boundary.

    The initial guess is the f == 0 solve of the same boundary data unless
    `initial_guess` (a ScalarField) is supplied.

    Returns
    -------
    (ScalarField, SolveReport)
    """
    opts = opts or SolveOptions()
    params = params or SchemeParams()
    stencil = Stencil(d, params)
    tol = opts.tol if opts.tol is not None \
        else 1e-8 * (1.0 + max(abs(b.ell), abs(b.L)))
    if initial_guess is not None:
        vals = initial_guess.values.copy()
        vals[d.boundary] = b.values[d.boundary]
    else:
        vals = _init_harmonic(d, b, stencil, opts, tol)
    sw = _Sweeper(d, f, stencil, opts)
    status = "max_sweeps_reached"
    sweeps = opts.max_sweeps
    res_sup = np.inf
    for it in range(1, opts.max_sweeps + 1):
        sw.full_sweep(vals)
        res_sup = sw.fp_residual(vals)
        if opts.alarm_bound is not None \
                and np.abs(vals[d.nonexterior]).max() > opts.alarm_bound:
            status, sweeps = "diverged_past_alarm", it
            break
        if res_sup <= tol:
            status, sweeps = "converged", it
            break
    u = ScalarField(d, vals)
    rep = SolveReport(status, sweeps, res_sup, u.sup(), u.inf(),
                      monotone=False)
    return u, rep


def perron_solve(d, f, b, sub, super_, opts=None, params=None):
    """Monotone nondecreasing iteration from a sub-solution.

    Starts at `sub`, applies each local update only when it increases the
    value, and clips at `super_` (pass None for an unbounded probe).  On
    convergence the field sits between sub and super.
    """
    opts = opts or SolveOptions()
    params = params or SchemeParams()
    stencil = Stencil(d, params)
    tol = opts.tol if opts.tol is not None \
        else 1e-8 * (1.0 + max(abs(b.ell), abs(b.L)))
    ne = d.nonexterior
    bd = d.boundary
    if super_ is not None:
        if (sub.values[ne] > super_.values[ne] + 1e-12).any():
            raise ValueError("ordering violated: sub > super somewhere")
        if (b.values[bd] > super_.values[bd] + 1e-12).any():
            raise ValueError("ordering violated: b > super on the boundary")
    if (sub.values[bd] > b.values[bd] + 1e-12).any():
        raise ValueError("ordering violated: sub > b on the boundary")
    vals = sub.values.copy()
    vals[bd] = b.values[bd]
    cap = super_.values if super_ is not None else None
    floor_vals = sub.values
    sw = _Sweeper(d, f, stencil, opts)
    status = "max_sweeps_reached"
    sweeps = opts.max_sweeps
    res_sup = np.inf
    clipped = False
    monotone = True
    # Phase 1 realizes the sup-over-sub-solutions construction as a pure
    # ascent.  The local update is not monotone in the neighbor values
    # (the division by the squared slope breaks it), so the ascent can
    # lock in a transient overshoot and stall above the fixed point;
    # when the upward motion dies out with the residual still large, a
    # plain clamped sweep phase finishes the job inside [sub, super].
    ascent = True
    for it in range(1, opts.max_sweeps + 1):
        prev = vals.copy()
        if ascent:
            clipped = sw.full_sweep(vals, only_up=True, cap=cap)
            if (vals[ne] < prev[ne] - 1e-12).any():
                raise ValueError("Perron iterate decreased (internal error)")
        else:
            clipped = sw.full_sweep(vals, cap=cap)
            np.maximum(vals, floor_vals, out=vals)
            if (vals[ne] < prev[ne] - 1e-12).any():
                monotone = False
        if opts.alarm_bound is not None \
                and vals[d.interior].max() > opts.alarm_bound:
            status, sweeps = "diverged_past_alarm", it
            break
        res_sup = sw.fp_residual(vals)
        if res_sup <= tol:
            status, sweeps = "converged", it
            break
        if ascent and np.abs(vals[ne] - prev[ne]).max() < tol:
            ascent = False
    u = ScalarField(d, vals)
    rep = SolveReport(status, sweeps, res_sup, u.sup(), u.inf(),
                      monotone=monotone,
                      clipped=clipped and status == "converged")
    return u, rep


def probe_nonexistence(d, f, b, opts):
    """Unbounded Perron probe: blow-up evidence for the non-existence regime.

    Runs the only-increase iteration from the constant sub-solution at the
    boundary infimum with no upper clipping; crossing opts.alarm_bound is
    reported as diverged_past_alarm (a result, not an error).
    """
    if opts.alarm_bound is None:
        raise ValueError("probe_nonexistence needs alarm_bound set")
    sub = ScalarField.constant(d, b.ell)
    _, rep = perron_solve(d, f, b, sub, None, opts)
    return rep
