"""Closed-form existence / non-existence thresholds and their report.

All limit-type conditions are decided from finite probe schedules and may
return `undetermined`; a verdict never claims a criterion applies unless
its hypothesis check passed on the probes.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import ScalarField, rhs_range
from .radial import cumulative_H, zeta, zeta_bounds

SIGMA = 3.0 ** (4.0 / 3.0) / 4.0
SIGMA3 = 81.0 / 64.0


def c_eta(f, ell, L, eta, domain=None):
    """C(eta): cone amplitude needed to dominate f near the data range.

    max{(sup of f+ on Omega x [ell-eta, ell])^(1/3),
        (-inf of f- on Omega x [L, L+eta])^(1/3)}.

    Returns (value, tag); tag is `estimate` when a sampled range was used.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    lo1, hi1, tag1 = rhs_range(f, (ell - eta, ell), domain)
    lo2, hi2, tag2 = rhs_range(f, (L, L + eta), domain)
    sup_plus = max(hi1, 0.0)
    inf_minus = min(lo2, 0.0)
    val = max(sup_plus ** (1.0 / 3.0), (-inf_minus) ** (1.0 / 3.0))
    tag = "estimate" if "estimate" in (tag1, tag2) else "exact"
    return val, tag


def diam_threshold(f, ell, L, domain=None, eta_max=1e3):
    """Largest domain diameter certified by the cone construction.

    sup over eta > 0 of (eta / (sigma C(eta)))^(3/4), by a log-eta scan
    with golden-section refinement; +inf when C(eta) = 0 somewhere.
    """
    def g(log_eta):
        eta = np.exp(log_eta)
        C, _ = c_eta(f, ell, L, eta, domain)
        if C == 0.0:
            return np.inf
        return (eta / (SIGMA * C)) ** 0.75

    los, his = np.log(1e-6), np.log(eta_max)
    grid = np.linspace(los, his, 161)
    vals = np.array([g(x) for x in grid])
    if np.isinf(vals).any():
        return np.inf
    i = int(np.argmax(vals))
    # maximum at the window edge and still climbing: the sup lives at
    # eta = inf (C grows strictly slower than eta^(1/3))
    if i == len(grid) - 1 and vals[-1] > vals[-5] * (1.0 + 1e-9):
        return np.inf
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - phi * (hi - lo)
    d = lo + phi * (hi - lo)
    gc, gd = g(c), g(d)
    for _ in range(80):
        if gc > gd:
            hi, d, gd = d, c, gc
            c = hi - phi * (hi - lo)
            gc = g(c)
        else:
            lo, c, gc = c, d, gd
            d = lo + phi * (hi - lo)
            gd = g(d)
    return float(max(vals[i], gc, gd))


def nonexistence_radius(m, a_min=1e-6, a_max=1e6, n_scan=120):
    """M_f / sqrt(2): above this in-radius only constants can solve.

    M_f = sup over a > ell of zeta(a) (prefactor 1), probed on a log grid
    in a - ell.  The closed-form upper bound (4/3)((a-ell)^4 / H(a))^(1/4)
    screens the grid cheaply and certifies the tail: when it is still
    rising at the far end of the probe window the sup may sit at infinity
    and +inf is returned (criterion inapplicable).
    """
    avals = m.ell + np.geomspace(a_min, a_max, n_scan)
    uppers = np.array([zeta_bounds(m, a, m.ell)[1] for a in avals])
    tail = uppers[-8:]
    slope = np.diff(np.log(tail))
    at_edge = uppers[-1] >= uppers.max() * (1.0 - 1e-9)
    if at_edge and (slope > 1e-4).all():
        return np.inf
    order = np.argsort(uppers)[::-1]
    best = 0.0
    for i in order[:12]:
        best = max(best, zeta(m, float(avals[i]), 1))
    return best / np.sqrt(2.0)


def _h1(f, t, domain, t_hi=1e3, n=256):
    """inf over Omega x [t, t_hi] of f."""
    lo, _, _ = rhs_range(f, (t, t_hi), domain)
    return lo


def _h2(f, ell, t, domain):
    """sup over Omega x [ell, t] of f."""
    _, hi, _ = rhs_range(f, (ell, t), domain)
    return hi


def dd3_check(f, ell, domain=None):
    """Tri-state pair for the two sufficient small/large-a conditions.

    (i)  integrability of H1^(-1/4) just above ell (decaying graded
         partial integrals -> yes; growing inner decades -> no;
         anything else -> undetermined);
    (ii) h2(t) = o(t^3): ratio h2(t)/t^3 probed at t = 10^j, j = 1..6
         (decay below 1e-3 -> yes; non-decreasing at or above 1e-3 -> no;
         anything else -> undetermined).
    """
    # condition (i): partial integrals of H1^{-1/4} over shrinking decades
    # just above ell; geometric decay of the inner decades certifies
    # integrability of the full tail.
    ss = np.geomspace(1e-13, 1e-1, 400)
    h1v = np.array([max(_h1(f, ell + s, domain), 0.0) for s in ss])
    H1 = np.concatenate([[h1v[0] * ss[0]], np.zeros(len(ss) - 1)])
    H1[1:] = 0.5 * (h1v[1:] + h1v[:-1]) * np.diff(ss)
    H1 = np.cumsum(H1)
    with np.errstate(divide="ignore"):
        integrand = H1 ** -0.25
    parts = []
    for j in range(1, 12):
        sel = (ss >= 10.0 ** -(j + 1)) & (ss <= 10.0 ** -j)
        parts.append(float(np.trapezoid(integrand[sel], ss[sel])))
    parts = np.array(parts[::-1])   # innermost decade first
    if not np.isfinite(parts).all():
        cond_i = "undetermined"
    elif parts[0] < 0.25 * parts[-1] and (np.diff(parts) > 0).all():
        cond_i = "yes"
    elif parts[0] > 4.0 * parts[-1] and (np.diff(parts) < 0).all():
        # inner decades dominate and keep growing inward: divergent
        cond_i = "no"
    else:
        cond_i = "undetermined"
    # condition (ii)
    ratios = []
    for j in range(1, 7):
        t = 10.0 ** j
        ratios.append(_h2(f, ell, t, domain) / t ** 3)
    ratios = np.array(ratios)
    if ratios[-1] < 1e-3 and ratios[-1] <= ratios[0] + 1e-12:
        cond_ii = "yes"
    elif ratios.min() >= 1e-3:
        cond_ii = "no"
    else:
        cond_ii = "undetermined"
    return cond_i, cond_ii


def apriori_box(h_lo, h_hi, b, R):
    """Two-sided a priori bounds from the h-range of the right-hand side.

    lower = ell - sigma max(h_hi, 0)^(1/3) R^(4/3);
    upper = L - sigma cbrt(min(h_lo, 0)) R^(4/3).
    """
    if h_lo > h_hi:
        raise ValueError("apriori_box needs h_lo <= h_hi")
    if R < 0:
        raise ValueError("apriori_box needs R >= 0")
    lower = b.ell - SIGMA * max(h_hi, 0.0) ** (1.0 / 3.0) * R ** (4.0 / 3.0)
    upper = b.L - SIGMA * np.cbrt(min(h_lo, 0.0)) * R ** (4.0 / 3.0)
    return (float(lower), float(upper))


@dataclass
class GrowthClass:
    beta_est: float
    alpha_est: float
    t_alpha: float = None
    t_beta: float = None
    applicable: bool = False
    bounds: tuple = None


def growth_class(f, ell, L, R, domain=None, probe_tol=1e-3):
    """Cubic-comparison growth classification and the resulting box.

    Probes inf_x f(x,t)/t^3 at t = 10^j (j = 0..6) and the mirrored
    negative side; when both liminf estimates are >= -probe_tol the
    solver's sup-bound machinery applies with eps = (2 sigma R^(4/3))^-3
    and the box [2 t_alpha, 2 t_beta].
    """
    tpos = 10.0 ** np.arange(0, 7)
    infs = np.array([rhs_range(f, (t, t), domain)[0] for t in tpos])
    sups_neg = np.array([rhs_range(f, (-t, -t), domain)[1] for t in tpos])
    beta_probe = infs / tpos ** 3
    alpha_probe = sups_neg / (-tpos) ** 3
    beta_est = float(beta_probe[-3:].min())
    alpha_est = float(alpha_probe[-3:].min())
    gc = GrowthClass(beta_est=beta_est, alpha_est=alpha_est)
    if beta_est < -probe_tol or alpha_est < -probe_tol:
        return gc
    eps = (2.0 * SIGMA * R ** (4.0 / 3.0)) ** -3.0
    t_beta = None
    for i, t in enumerate(tpos):
        if t <= max(0.0, L):
            continue
        if (infs[i:] >= -eps * tpos[i:] ** 3 - 1e-15).all():
            t_beta = float(t)
            break
    t_alpha = None
    for i, t in enumerate(tpos):
        if -t >= min(0.0, ell):
            continue
        if (sups_neg[i:] <= eps * tpos[i:] ** 3 + 1e-15).all():
            t_alpha = float(-t)
            break
    if t_beta is not None and t_alpha is not None:
        gc.t_alpha, gc.t_beta = t_alpha, t_beta
        gc.applicable = True
        gc.bounds = (2.0 * t_alpha, 2.0 * t_beta)
    return gc


def cubic_smallness(a_sup, R, b):
    """Small cubic coefficient test sigma^3 a_sup R^4 < 1 and its M-bound.

    Returns (flag, M_bound, verdict); verdict is "only-zero" for zero
    boundary data under the flag, else "bounded" or "inapplicable".
    """
    if a_sup < 0:
        raise ValueError("a_sup must be >= 0")
    flag = SIGMA3 * a_sup * R ** 4 < 1.0
    if not flag:
        return False, None, "inapplicable"
    denom = 1.0 - SIGMA * a_sup ** (1.0 / 3.0) * R ** (4.0 / 3.0)
    M_bound = max(-b.ell, b.L) / denom
    verdict = "only-zero" if (b.ell == 0.0 and b.L == 0.0) else "bounded"
    return True, float(M_bound), verdict


def eigen_bracket(a_field, d, alphas=None):
    """Bracket for the first nonlinear eigenvalue of the cubic problem.

    lambda_lower = 1/(sigma^3 M R^4) with M = max a over interior nodes
    and R the out-radius; lambda_upper = 4 (4/3)^3 / (sigma^3 M) times
    the minimum over alpha of 1/(alpha rho_alpha^4), rho_alpha the
    in-radius of {a >= alpha M}.  Exact shape radii are used when the
    domain caches them and the level set fills the whole interior.
    """
    if isinstance(a_field, ScalarField):
        avals = a_field.values
    else:
        avals = np.asarray(a_field, dtype=float)
        if avals.shape != d.dims:
            raise ValueError("a_field shape mismatch")
    aint = avals[d.interior]
    if not (aint >= 0).all():
        raise ValueError("eigen_bracket needs a >= 0")
    M = float(aint.max())
    if M == 0.0:
        raise ValueError("eigen_bracket needs a not identically 0")
    exact = d.exact_radii()
    out_r = exact[0] if exact is not None else d.radii()[0]
    in_r_exact = exact[1] if exact is not None else None
    lam_lower = 1.0 / (SIGMA3 * M * out_r ** 4)
    if alphas is None:
        alphas = np.arange(1, 21) * 0.05
    best = np.inf
    for alpha in alphas:
        level = (avals >= alpha * M - 1e-15) & d.interior
        if not level.any():
            continue
        if in_r_exact is not None and level.sum() == d.interior.sum():
            rho = in_r_exact
        else:
            rho = float(ndimage.distance_transform_edt(level).max() * d.h)
        if rho <= 0:
            continue
        best = min(best, 1.0 / (alpha * rho ** 4))
    lam_upper = 4.0 * (4.0 / 3.0) ** 3 / (SIGMA3 * M) * best
    if lam_lower > lam_upper:
        raise ValueError("eigenvalue bracket inverted (internal error)")
    return float(lam_lower), float(lam_upper)


@dataclass
class CriteriaReport:
    """Aggregated threshold evaluation, serializable to one JSON object."""
    ell: float
    L: float
    c_eta_table: list = field(default_factory=list)
    diam_threshold: float = None
    diam_actual: float = None
    M_f: float = None
    nonexistence_radius: float = None
    in_radius_actual: float = None
    dd3: tuple = None
    growth: GrowthClass = None
    apriori_box: tuple = None
    cubic: tuple = None
    eigen: tuple = None
    verdicts: list = field(default_factory=list)

    def to_dict(self):
        def ext(v):
            if v is None:
                return None
            if isinstance(v, float) and np.isinf(v):
                return "inf"
            return v

        gc = None
        if self.growth is not None:
            gc = {"beta_est": self.growth.beta_est,
                  "alpha_est": self.growth.alpha_est,
                  "t_alpha": self.growth.t_alpha,
                  "t_beta": self.growth.t_beta,
                  "applicable": self.growth.applicable,
                  "bounds": list(self.growth.bounds)
                  if self.growth.bounds else None}
        return {
            "ell": self.ell, "L": self.L,
            "c_eta_table": [[e, c] for e, c in self.c_eta_table],
            "diam_threshold": ext(self.diam_threshold),
            "diam_actual": self.diam_actual,
            "M_f": ext(self.M_f),
            "nonexistence_radius": ext(self.nonexistence_radius),
            "in_radius_actual": self.in_radius_actual,
            "dd3": list(self.dd3) if self.dd3 else None,
            "growth": gc,
            "apriori_box": list(self.apriori_box)
            if self.apriori_box else None,
            "cubic": list(self.cubic) if self.cubic else None,
            "eigen": list(self.eigen) if self.eigen else None,
            "verdicts": self.verdicts,
        }
