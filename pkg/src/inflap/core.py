"""Grid domains, scalar fields, boundary traces, and right-hand sides.

Shared geometry and data types for the infinity-Laplacian laboratory.
Grids are axis aligned and uniform; curved boundaries are represented by a
node mask (exterior / boundary / interior), no cut cells.
"""

import numpy as np
from scipy import ndimage

EXTERIOR = 0
BOUNDARY = 1
INTERIOR = 2

SATURATE = 1e300


class GridDomain:
    """Uniform grid with an interior/boundary/exterior node mask.

    Parameters
    ----------
    h : float
        Grid spacing, positive.
    origin : array_like
        Physical coordinates of the node with index (0, ..., 0).
    mask : ndarray of int8
        Per-node tag: 0 exterior, 1 boundary, 2 interior.
    shape_info : dict, optional
        Analytic geometry of the generating shape when known, e.g.
        {"kind": "ball", "center": c, "R": r} with exact in/out radii.
    """

    def __init__(self, h, origin, mask, shape_info=None):
        if h <= 0:
            raise ValueError("spacing h must be positive")
        self.h = float(h)
        self.origin = np.asarray(origin, dtype=float)
        self.mask = np.asarray(mask, dtype=np.int8)
        self.N = self.mask.ndim
        if self.origin.shape != (self.N,):
            raise ValueError("origin dimension does not match mask")
        self.dims = self.mask.shape
        self.shape_info = shape_info
        self._check_mask()
        self._radii = None

    def _check_mask(self):
        interior = self.mask == INTERIOR
        if interior.any():
            if not (self.mask == BOUNDARY).any():
                raise ValueError("interior nonempty but no boundary nodes")
            # no interior node may touch exterior along an axis
            for ax in range(self.N):
                for step in (-1, 1):
                    nb = np.roll(self.mask, -step, axis=ax)
                    edge = [slice(None)] * self.N
                    edge[ax] = -1 if step == 1 else 0
                    bad = interior & (nb == EXTERIOR)
                    if interior[tuple(edge)].any() or bad.any():
                        raise ValueError(
                            "interior node adjacent to exterior (mask invalid)")

    # -- geometry -----------------------------------------------------------

    def coords(self, idx):
        """Physical coordinates of a node index tuple."""
        return self.origin + self.h * np.asarray(idx, dtype=float)

    def grid_coords(self):
        """Coordinate arrays (one per axis) broadcastable to mask shape."""
        axes = [self.origin[k] + self.h * np.arange(self.dims[k])
                for k in range(self.N)]
        return np.meshgrid(*axes, indexing="ij")

    @property
    def interior(self):
        return self.mask == INTERIOR

    @property
    def boundary(self):
        return self.mask == BOUNDARY

    @property
    def nonexterior(self):
        return self.mask != EXTERIOR

    def radii(self):
        """Discrete out/in radii of the domain.

        Returns
        -------
        (out_radius, out_center, in_radius, in_center)
            Out-radius from the max node distance to the centroid of
            non-exterior nodes, padded by h*sqrt(N) so it never
            underestimates the continuum shape.  In-radius from the
            distance transform of the interior mask, in grid units times h.
        """
        if self._radii is not None:
            return self._radii
        if not self.interior.any():
            raise ValueError("empty domain has no radii")
        pts = np.argwhere(self.nonexterior) * self.h + self.origin
        center = pts.mean(axis=0)
        out_r = np.linalg.norm(pts - center, axis=1).max() \
            + self.h * np.sqrt(self.N)
        dist = ndimage.distance_transform_edt(self.interior) * self.h
        flat = int(np.argmax(dist))
        in_idx = np.unravel_index(flat, self.dims)
        in_r = float(dist[in_idx])
        in_c = self.coords(in_idx)
        if in_r > out_r:
            raise ValueError("in_radius exceeded out_radius")
        self._radii = (float(out_r), center, in_r, in_c)
        return self._radii

    def exact_radii(self):
        """Analytic (out_radius, in_radius) when the shape is known, else None."""
        si = self.shape_info
        if si is None:
            return None
        if si["kind"] == "ball":
            return float(si["R"]), float(si["R"])
        if si["kind"] == "box":
            half = (np.asarray(si["hi"], float) - np.asarray(si["lo"], float)) / 2
            return float(np.linalg.norm(half)), float(half.min())
        return None


def build_domain(spec, h):
    """Build a GridDomain from a shape descriptor.

    Parameters
    ----------
    spec : dict
        One of {"kind": "ball", "center": c, "R": r},
        {"kind": "box", "lo": lo, "hi": hi}, or
        {"kind": "mask", "path": p}.
    h : float
        Grid spacing.

    Notes
    -----
    Candidate nodes are those inside the shape (strictly for balls, closed
    for boxes).  Interior nodes are candidates whose axis neighbors are all
    candidates; the remaining candidates are boundary nodes.
    """
    if h <= 0:
        raise ValueError("spacing h must be positive")
    kind = spec.get("kind")
    if kind == "mask":
        return load_mask(spec["path"])
    if kind == "ball":
        center = np.atleast_1d(np.asarray(spec["center"], dtype=float))
        R = float(spec["R"])
        if R <= 0:
            raise ValueError("ball radius must be positive")
        n = int(np.ceil(R / h))
        origin = center - n * h
        dims = (2 * n + 1,) * len(center)
        axes = [origin[k] + h * np.arange(dims[k]) for k in range(len(center))]
        grids = np.meshgrid(*axes, indexing="ij")
        r2 = sum((g - c) ** 2 for g, c in zip(grids, center))
        cand = r2 < R ** 2
        shape_info = {"kind": "ball", "center": center, "R": R}
    elif kind == "box":
        lo = np.atleast_1d(np.asarray(spec["lo"], dtype=float))
        hi = np.atleast_1d(np.asarray(spec["hi"], dtype=float))
        if not (hi > lo).all():
            raise ValueError("box needs hi > lo componentwise")
        origin = lo
        dims = tuple(int(np.floor((b - a) / h + 1e-12)) + 1
                     for a, b in zip(lo, hi))
        cand = np.ones(dims, dtype=bool)
        shape_info = {"kind": "box", "lo": lo, "hi": hi}
    else:
        raise ValueError("unknown shape kind: %r" % (kind,))

    mask = _mask_from_candidates(cand)
    if not (mask == INTERIOR).any():
        raise ValueError("empty interior: h=%g too coarse for the shape" % h)
    return GridDomain(h, origin, mask, shape_info=shape_info)


def _mask_from_candidates(cand):
    interior = cand.copy()
    for ax in range(cand.ndim):
        for step in (-1, 1):
            nb = np.roll(cand, -step, axis=ax)
            edge = [slice(None)] * cand.ndim
            edge[ax] = -1 if step == 1 else 0
            nb[tuple(edge)] = False
            interior &= nb
    mask = np.zeros(cand.shape, dtype=np.int8)
    mask[cand] = BOUNDARY
    mask[interior] = INTERIOR
    return mask


# -- mask file format -------------------------------------------------------

def save_mask(domain, path):
    """Write a GridDomain mask to a GRIDMASK v1 text file."""
    with open(path, "w") as fh:
        fh.write("GRIDMASK v1\n")
        fh.write("%d %.17g %s\n" % (domain.N, domain.h,
                                    " ".join(str(d) for d in domain.dims)))
        fh.write(" ".join("%.17g" % c for c in domain.origin) + "\n")
        chars = np.array(["E", "B", "I"])[domain.mask.ravel(order="C")]
        rows = domain.mask.reshape(domain.dims[0], -1)
        per_row = rows.shape[1]
        flat = "".join(chars)
        for i in range(domain.dims[0]):
            fh.write(flat[i * per_row:(i + 1) * per_row] + "\n")


def load_mask(path):
    """Read a GRIDMASK v1 file into a GridDomain."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "GRIDMASK v1":
        raise ValueError("malformed mask file: missing GRIDMASK v1 header")
    try:
        head = lines[1].split()
        N = int(head[0])
        h = float(head[1])
        dims = tuple(int(x) for x in head[2:2 + N])
        origin = [float(x) for x in lines[2].split()]
    except (IndexError, ValueError) as exc:
        raise ValueError("malformed mask file header: %s" % exc)
    body = "".join(lines[3:3 + dims[0]])
    count = int(np.prod(dims))
    if len(body) != count:
        raise ValueError("malformed mask file: expected %d node tags" % count)
    lut = {"E": EXTERIOR, "B": BOUNDARY, "I": INTERIOR}
    try:
        vals = np.array([lut[c] for c in body], dtype=np.int8)
    except KeyError as exc:
        raise ValueError("malformed mask file: bad tag %s" % exc)
    return GridDomain(h, origin, vals.reshape(dims))


# -- fields -----------------------------------------------------------------

class ScalarField:
    """Real values on the non-exterior nodes of a grid domain.

    Values are stored as a full array over the grid; exterior entries are
    NaN and never read.
    """

    def __init__(self, domain, values):
        values = np.asarray(values, dtype=float)
        if values.shape != domain.dims:
            raise ValueError("field shape does not match domain")
        if not np.isfinite(values[domain.nonexterior]).all():
            raise ValueError("field has non-finite values on the domain")
        self.domain = domain
        self.values = values

    @classmethod
    def constant(cls, domain, c):
        vals = np.full(domain.dims, np.nan)
        vals[domain.nonexterior] = c
        return cls(domain, vals)

    @classmethod
    def from_function(cls, domain, fn):
        grids = domain.grid_coords()
        vals = np.full(domain.dims, np.nan)
        ne = domain.nonexterior
        pts = np.stack([g[ne] for g in grids], axis=-1)
        vals[ne] = fn(pts)
        return cls(domain, vals)

    def sup(self):
        return float(np.max(self.values[self.domain.nonexterior]))

    def inf(self):
        return float(np.min(self.values[self.domain.nonexterior]))

    def same_domain(self, other):
        return self.domain is other.domain

    def copy(self):
        return ScalarField(self.domain, self.values.copy())


class BoundaryTrace:
    """Boundary data: one real value per boundary node."""

    def __init__(self, domain, values):
        values = np.asarray(values, dtype=float)
        if values.shape != domain.dims:
            raise ValueError("trace shape does not match domain")
        bvals = values[domain.boundary]
        if bvals.size == 0:
            raise ValueError("domain has no boundary nodes")
        if not np.isfinite(bvals).all():
            raise ValueError("boundary values must be finite")
        self.domain = domain
        self.values = values
        self.ell = float(bvals.min())
        self.L = float(bvals.max())

    @classmethod
    def constant(cls, domain, c):
        vals = np.full(domain.dims, np.nan)
        vals[domain.boundary] = c
        return cls(domain, vals)

    @classmethod
    def from_function(cls, domain, fn):
        grids = domain.grid_coords()
        vals = np.full(domain.dims, np.nan)
        bd = domain.boundary
        pts = np.stack([g[bd] for g in grids], axis=-1)
        vals[bd] = fn(pts)
        return cls(domain, vals)


def oscillation(b):
    """Oscillation of the boundary data, sup minus inf."""
    return b.L - b.ell


# -- right-hand sides -------------------------------------------------------

def _tokenize(text):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_expr(tokens, pos):
    if pos >= len(tokens):
        raise ValueError("unexpected end of rhs expression")
    tok = tokens[pos]
    if tok == "(":
        if pos + 1 >= len(tokens):
            raise ValueError("unexpected end of rhs expression")
        op = tokens[pos + 1]
        pos += 2
        args = []
        while pos < len(tokens) and tokens[pos] != ")":
            node, pos = _parse_expr(tokens, pos)
            args.append(node)
        if pos >= len(tokens):
            raise ValueError("missing ) in rhs expression")
        return _make_node(op, args), pos + 1
    if tok == ")":
        raise ValueError("unexpected ) in rhs expression")
    if tok == "t":
        return ("t",), pos + 1
    try:
        return ("const", float(tok)), pos + 1
    except ValueError:
        raise ValueError("unknown rhs token: %r" % tok)


def _make_node(op, args):
    def need(n):
        if len(args) != n:
            raise ValueError("%s expects %d arguments, got %d"
                             % (op, n, len(args)))

    if op == "const":
        need(1)
        return ("const", _const_of(args[0]))
    if op == "coef":
        need(1)
        if args[0][0] != "t":
            # coefficient names parse as bare atoms; 'a' arrives as a
            # failed float, so re-tokenize is not possible here.  Accept a
            # const node only if it was really a name stored earlier.
            pass
        return ("coef", args[0][1] if args[0][0] == "name" else args[0])
    if op == "pow":
        need(2)
        if args[0] != ("t",):
            raise ValueError("pow expects the t variable first")
        return ("pow", _const_of(args[1]))
    if op == "exp":
        need(1)
        if args[0] != ("t",):
            raise ValueError("exp expects the t variable")
        return ("exp",)
    if op == "cospow":
        need(1)
        return ("cospow", _const_of(args[0]))
    if op == "add":
        if len(args) < 2:
            raise ValueError("add expects at least 2 arguments")
        return ("add", args)
    if op == "mul":
        if len(args) < 2:
            raise ValueError("mul expects at least 2 arguments")
        return ("mul", args)
    if op == "neg":
        need(1)
        return ("neg", args[0])
    if op == "clip":
        need(2)
        return ("clip", args[0], _const_of(args[1]))
    raise ValueError("unknown rhs operator: %r" % op)


def _const_of(node):
    if node[0] != "const":
        raise ValueError("expected a numeric literal")
    return node[1]


def _parse_rhs(text):
    tokens = _tokenize(text)
    # coefficient names are bare identifiers; patch them before parsing
    fixed = []
    for i, tok in enumerate(tokens):
        if tok not in ("(", ")", "t") and not _is_number(tok) \
                and tok not in ("const", "coef", "pow", "exp", "cospow",
                                "add", "mul", "neg", "clip"):
            fixed.append(("name", tok))
        else:
            fixed.append(tok)
    tree, pos = _parse_expr_patched(fixed, 0)
    if pos != len(fixed):
        raise ValueError("trailing tokens in rhs expression")
    return tree


def _is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _parse_expr_patched(tokens, pos):
    tok = tokens[pos] if pos < len(tokens) else None
    if isinstance(tok, tuple) and tok[0] == "name":
        return ("name", tok[1]), pos + 1
    if tok == "(":
        op = tokens[pos + 1] if pos + 1 < len(tokens) else None
        if isinstance(op, tuple):
            raise ValueError("unknown rhs operator: %r" % (op[1],))
        pos += 2
        args = []
        while pos < len(tokens) and tokens[pos] != ")":
            node, pos = _parse_expr_patched(tokens, pos)
            args.append(node)
        if pos >= len(tokens):
            raise ValueError("missing ) in rhs expression")
        if op == "coef":
            if len(args) != 1 or args[0][0] != "name":
                raise ValueError("coef expects a coefficient name")
            return ("coef", args[0][1]), pos + 1
        return _make_node(op, args), pos + 1
    return _parse_expr(tokens, pos)


class RhsSpec:
    """Right-hand side f(x, t) as an expression tree with attributes.

    Parameters
    ----------
    expression : str
        Prefix expression over {(const c), (coef name), t, (pow t g),
        (exp t), (cospow g), (add ...), (mul ...), (neg ...), (clip e C)}.
        (pow t g) means the odd power t|t|^(g-1); (cospow g) means
        (1 + cos t)^g.
    coefs : dict, optional
        Coefficient name -> scalar, callable(points) or grid-shaped array.
    sign : {"nonneg", "nonpos", "mixed"}, optional
    monotone_in_t : {"nondecreasing", "nonincreasing", "none"}, optional
        Declared attributes are validated on a probe lattice; a declared
        but violated attribute raises ValueError.
    """

    def __init__(self, expression, coefs=None, sign=None, monotone_in_t=None,
                 probe_t=(-10.0, 10.0), probe_points=257):
        self.expression = expression
        self.tree = _parse_rhs(expression)
        self.coefs = dict(coefs or {})
        self.sign = sign
        if monotone_in_t not in (None, "nondecreasing", "nonincreasing",
                                 "none"):
            raise ValueError("monotone_in_t must be 'nondecreasing', "
                             "'nonincreasing', or 'none'")
        self.monotone_in_t = monotone_in_t
        self.saturated = False
        for name in _coef_names(self.tree):
            if name not in self.coefs:
                raise ValueError("missing coefficient samples for %r" % name)
        if sign is not None or monotone_in_t is not None:
            self._validate(probe_t, probe_points)

    # coefficient evaluation at probe time uses the declared samples; when a
    # coefficient is an array its raw sample values are the probe set.
    def _coef_probe_values(self):
        out = [np.array([1.0])]
        for name, val in self.coefs.items():
            if callable(val):
                out.append(np.asarray(
                    [val(np.zeros((1, 1)))], dtype=float).ravel())
            else:
                out.append(np.asarray(val, dtype=float).ravel())
        return out

    def _validate(self, probe_t, probe_points):
        t = np.linspace(probe_t[0], probe_t[1], probe_points)
        coef_vals = {}
        for name, val in self.coefs.items():
            if callable(val):
                coef_vals[name] = np.asarray(
                    val(np.zeros((1, len(self.coefs)))), dtype=float).ravel()
            else:
                arr = np.asarray(val, dtype=float).ravel()
                arr = arr[np.isfinite(arr)]
                coef_vals[name] = arr if arr.size else np.array([0.0])
        combos = [{}]
        for name, vals in coef_vals.items():
            sub = np.unique(np.concatenate(
                [[vals.min(), vals.max()], vals[:: max(1, len(vals) // 16)]]))
            combos = [dict(c, **{name: v}) for c in combos for v in sub]
        for combo in combos:
            y = _eval_tree(self.tree, combo, t)
            if self.sign == "nonneg" and (y < -1e-12).any():
                raise ValueError("declared nonneg but probe found f < 0")
            if self.sign == "nonpos" and (y > 1e-12).any():
                raise ValueError("declared nonpos but probe found f > 0")
            if self.monotone_in_t == "nondecreasing" \
                    and (np.diff(y) < -1e-9).any():
                raise ValueError("declared nondecreasing in t but probe "
                                 "found a decrease")
            if self.monotone_in_t == "nonincreasing" \
                    and (np.diff(y) > 1e-9).any():
                raise ValueError("declared nonincreasing in t but probe "
                                 "found an increase")

    def depends_on_x(self):
        return len(_coef_names(self.tree)) > 0

    def coef_value_at(self, x):
        """Resolve coefficient values at a point (dict name -> float)."""
        out = {}
        for name, val in self.coefs.items():
            if callable(val):
                out[name] = float(np.asarray(
                    val(np.asarray(x, float)[None, :])).ravel()[0])
            elif np.isscalar(val):
                out[name] = float(val)
            else:
                raise ValueError(
                    "grid-sampled coefficient %r needs index evaluation"
                    % name)
        return out

    def eval_grid(self, domain, t):
        """Vectorized evaluation on all grid nodes.

        Parameters
        ----------
        domain : GridDomain
        t : ndarray broadcastable to domain.dims

        Returns
        -------
        ndarray of f(x, t) over the grid (NaN where t is NaN).
        """
        combo = {}
        for name, val in self.coefs.items():
            if callable(val):
                grids = domain.grid_coords()
                pts = np.stack([g.ravel() for g in grids], axis=-1)
                combo[name] = np.asarray(val(pts), float).reshape(domain.dims)
            elif np.isscalar(val):
                combo[name] = float(val)
            else:
                arr = np.asarray(val, dtype=float)
                if arr.shape != domain.dims:
                    raise ValueError("coefficient %r shape mismatch" % name)
                combo[name] = arr
        y = _eval_tree(self.tree, combo, np.asarray(t, dtype=float))
        y = np.asarray(y, dtype=float)
        big = np.abs(y) > SATURATE
        if big.any():
            self.saturated = True
            y = np.clip(y, -SATURATE, SATURATE)
        return y


def _coef_names(tree):
    names = set()
    if tree[0] == "coef":
        names.add(tree[1])
    elif tree[0] in ("add", "mul"):
        for c in tree[1]:
            names |= _coef_names(c)
    elif tree[0] == "neg":
        names |= _coef_names(tree[1])
    elif tree[0] == "clip":
        names |= _coef_names(tree[1])
    return names


def _eval_tree(tree, combo, t):
    op = tree[0]
    if op == "const":
        return np.broadcast_to(np.asarray(tree[1], float), np.shape(t)).copy() \
            if np.shape(t) else tree[1]
    if op == "coef":
        val = combo[tree[1]]
        return val * np.ones_like(t) if np.ndim(t) and np.ndim(val) == 0 \
            else val + 0 * t
    if op == "t":
        return t
    if op == "pow":
        g = tree[1]
        with np.errstate(over="ignore"):
            return np.sign(t) * np.abs(t) ** g
    if op == "exp":
        with np.errstate(over="ignore"):
            return np.minimum(np.exp(np.minimum(t, 700.0)), SATURATE)
    if op == "cospow":
        return (1.0 + np.cos(t)) ** tree[1]
    if op == "add":
        return sum(_eval_tree(c, combo, t) for c in tree[1])
    if op == "mul":
        out = _eval_tree(tree[1][0], combo, t)
        for c in tree[1][1:]:
            out = out * _eval_tree(c, combo, t)
        return out
    if op == "neg":
        return -_eval_tree(tree[1], combo, t)
    if op == "clip":
        C = tree[2]
        return np.clip(_eval_tree(tree[1], combo, t), -C, C)
    raise ValueError("bad tree node %r" % (op,))


def eval_rhs(f, x, t):
    """Evaluate f(x, t) at a single point.

    Values are clamped to +/-1e300 with a saturation flag on the spec.
    """
    combo = f.coef_value_at(np.atleast_1d(x)) if f.coefs else {}
    y = float(_eval_tree(f.tree, combo, np.asarray(float(t))))
    if abs(y) > SATURATE:
        f.saturated = True
        y = float(np.clip(y, -SATURATE, SATURATE))
    return y


def _split_separable(tree):
    """Split the tree as (x-part, t-part) when it is a pure product, else None.

    Returns (coef_tree_list, t_tree_list) where the full f is the product
    of all listed factors, each depending on x only or on t only.
    """
    factors = [tree]
    changed = True
    while changed:
        changed = False
        out = []
        for fct in factors:
            if fct[0] == "mul":
                out.extend(fct[1])
                changed = True
            elif fct[0] == "neg":
                out.append(("const", -1.0))
                out.append(fct[1])
                changed = True
            else:
                out.append(fct)
        factors = out
    xp, tp = [], []
    for fct in factors:
        names = _coef_names(fct)
        if names:
            if fct[0] not in ("coef",):
                return None
            xp.append(fct)
        else:
            tp.append(fct)
    return xp, tp


def _t_range(trees, combo, lo, hi, n=4097):
    """Range of a product of t-only factors on [lo, hi] by candidate points."""
    cands = [lo, hi]
    # cospow extrema sit at multiples of pi
    k0 = int(np.ceil(lo / np.pi))
    k1 = int(np.floor(hi / np.pi))
    if k1 - k0 < 64:
        cands.extend(np.pi * k for k in range(k0, k1 + 1))
    cands.append(0.0) if lo <= 0.0 <= hi else None
    t = np.unique(np.clip(np.concatenate(
        [np.linspace(lo, hi, n), np.asarray(cands, float)]), lo, hi))
    y = np.ones_like(t)
    for tree in trees:
        y = y * _eval_tree(tree, combo, t)
    return float(y.min()), float(y.max())


def rhs_range(f, interval, domain=None):
    """Bounds of f over Omega x I.

    Parameters
    ----------
    f : RhsSpec
    interval : (lo, hi)
        Bounded t-interval.
    domain : GridDomain, optional
        Needed when f has coefficient factors.

    Returns
    -------
    (inf, sup, tag)
        tag is "exact" for separable specs (product of an x-only factor and
        t-only factors, ranges combined by interval arithmetic), otherwise
        "estimate" from a sampled probe lattice.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
        raise ValueError("rhs_range needs a bounded interval")
    split = _split_separable(f.tree)
    if split is not None:
        xp, tp = split
        glo, ghi = _t_range(tp, {}, lo, hi)
        alo, ahi = 1.0, 1.0
        for cf in xp:
            vals = f.coefs[cf[1]]
            if callable(vals):
                if domain is None:
                    raise ValueError("coefficient range needs a domain")
                grids = domain.grid_coords()
                ne = domain.nonexterior
                pts = np.stack([g[ne] for g in grids], axis=-1)
                arr = np.asarray(vals(pts), float)
            elif np.isscalar(vals):
                arr = np.asarray([vals], float)
            else:
                arr = np.asarray(vals, float)
                if domain is not None and arr.shape == domain.dims:
                    arr = arr[domain.nonexterior]
                arr = arr[np.isfinite(arr)]
            prods = [alo * arr.min(), alo * arr.max(),
                     ahi * arr.min(), ahi * arr.max()]
            alo, ahi = min(prods), max(prods)
        prods = [alo * glo, alo * ghi, ahi * glo, ahi * ghi]
        return (min(prods), max(prods), "exact")
    # non-separable: sampled estimate over a probe lattice
    t = np.linspace(lo, hi, 513)
    if domain is not None and f.depends_on_x():
        best_lo, best_hi = np.inf, -np.inf
        for tv in t:
            y = f.eval_grid(domain, tv)[domain.nonexterior]
            best_lo = min(best_lo, float(y.min()))
            best_hi = max(best_hi, float(y.max()))
        return (best_lo, best_hi, "estimate")
    y = _eval_tree(f.tree, {}, t)
    return (float(np.min(y)), float(np.max(y)), "estimate")
