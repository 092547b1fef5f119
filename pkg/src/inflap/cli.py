"""Command-line entry point: config parsing, runs, and export.

Usage: inflap <action> --config <path> [--out <dir>] [--h <spacing>]
[--seed <int>], with action one of solve, perron, probe, radial, family,
criteria, verify.  Configs are JSON; unknown keys are rejected.  Reports
are JSON with sorted keys and %.12e floats so identical configs give
byte-identical output; fields export as CSV with one `x...,value` row
per non-exterior node.
"""

import argparse
import json
import os
import sys

import numpy as np

from .core import (BoundaryTrace, RhsSpec, ScalarField, build_domain,
                   oscillation, rhs_range)
from .scheme import SchemeParams, Stencil, residual_field
from .solver import (SolveOptions, perron_solve, probe_nonexistence,
                     solve_dirichlet)
from . import criteria as crit
from . import radial
from . import verify as ver


class ConfigError(ValueError):
    pass


_SECTION_KEYS = {
    "": {"problem", "action", "scheme", "solve", "perron", "radial",
         "family", "criteria", "verify"},
    "problem": {"domain", "h", "rhs", "rhs_coefs", "rhs_sign",
                "rhs_monotone", "boundary"},
    "problem.domain": {"kind", "center", "R", "lo", "hi", "path"},
    "problem.boundary": {"constant", "expression"},
    "scheme": {"w", "delta_reg", "refined"},
    "solve": {"max_sweeps", "tol", "damping", "order", "alarm_bound"},
    "perron": {"sub", "super"},
    "perron.sub": {"constant", "cone", "power"},
    "perron.super": {"constant", "cone", "power"},
    "radial": {"m", "ell", "a", "prefactor", "n"},
    "family": {"gamma", "k", "n"},
    "criteria": {"eta_list", "m", "h_range", "a_sup", "eigen"},
    "verify": {"checks"},
}


def _check_keys(obj, section):
    allowed = _SECTION_KEYS.get(section)
    if allowed is None or not isinstance(obj, dict):
        return
    for key in obj:
        if key not in allowed:
            where = section or "top level"
            raise ConfigError("unknown key %r in %s" % (key, where))
        sub = (section + "." + key) if section else key
        if sub in _SECTION_KEYS:
            _check_keys(obj[key], sub)


def parse_config(text):
    """Parse and validate a JSON run config; unknown keys are errors."""
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config parse error at line %d column %d: %s"
                          % (e.lineno, e.colno, e.msg))
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(cfg, "")
    if "problem" not in cfg and cfg.get("action") not in ("radial", None):
        raise ConfigError("config needs a problem section")
    return cfg


def _build_problem(cfg, h_override):
    prob = cfg.get("problem")
    if prob is None:
        raise ConfigError("this action needs a problem section")
    if "domain" not in prob or "h" not in prob and h_override is None:
        raise ConfigError("problem needs domain and h")
    h = h_override if h_override is not None else prob["h"]
    d = build_domain(prob["domain"], h)
    f = RhsSpec(prob.get("rhs", "(const 0)"),
                coefs=prob.get("rhs_coefs"),
                sign=prob.get("rhs_sign"),
                monotone_in_t=prob.get("rhs_monotone"))
    bspec = prob.get("boundary", {"constant": 0.0})
    if "constant" in bspec:
        b = BoundaryTrace.constant(d, float(bspec["constant"]))
    else:
        b = BoundaryTrace.from_function(d, _coord_fn(bspec["expression"], d.N))
    return d, f, b


def _coord_fn(expr, N):
    """Compile a coordinate expression (names x0..x{N-1}, r, numpy as np)."""
    code = compile(expr, "<boundary>", "eval")

    def fn(pts):
        names = {"np": np, "__builtins__": {}}
        for j in range(N):
            names["x%d" % j] = pts[..., j]
        names["r"] = np.linalg.norm(pts, axis=-1)
        return np.broadcast_to(eval(code, names), pts.shape[:-1]).astype(float)
    return fn


def _scheme_params(cfg):
    s = cfg.get("scheme", {})
    return SchemeParams(w=s.get("w", 2),
                        delta_reg=s.get("delta_reg", 1e-10),
                        refined=s.get("refined", False))


def _solve_options(cfg):
    s = cfg.get("solve", {})
    return SolveOptions(max_sweeps=s.get("max_sweeps", 100000),
                        tol=s.get("tol"),
                        damping=s.get("damping"),
                        order=s.get("order", "red-black"),
                        alarm_bound=s.get("alarm_bound"))


def _field_from_spec(spec, d, b):
    if "constant" in spec:
        return ScalarField.constant(d, float(spec["constant"]))
    if "cone" in spec:
        c = spec["cone"]
        return radial.cone_field(d, c["C"], c["z"], c["d"], c["orientation"])
    if "power" in spec:
        p = spec["power"]
        return radial.power_subsolution(p["gamma"], p["R"], d)
    raise ConfigError("unknown field spec in perron section")


def _fmt(x):
    return "%.12e" % float(x)


def _dump_json(obj, out):
    """Serialize with sorted keys and %.12e floats (byte stable)."""
    if isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(key))
            out.append(": ")
            _dump_json(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _dump_json(v, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(json.dumps("inf" if np.isinf(x) and x > 0 else
                              "-inf" if np.isinf(x) else None)
                   if not np.isfinite(x) else _fmt(x))
    else:
        out.append(json.dumps(obj))


def write_report(report, path):
    out = []
    _dump_json(report, out)
    with open(path, "w") as fh:
        fh.write("".join(out) + "\n")


def write_field(u, path):
    d = u.domain
    idx = np.argwhere(d.nonexterior)
    pts = idx * d.h + d.origin
    with open(path, "w") as fh:
        fh.write(",".join("x%d" % j for j in range(d.N)) + ",value\n")
        for p, i in zip(pts, idx):
            row = [_fmt(c) for c in p] + [_fmt(u.values[tuple(i)])]
            fh.write(",".join(row) + "\n")


def _report_of(rep):
    return {"status": rep.status, "sweeps": rep.sweeps,
            "residual": rep.residual, "sup": rep.sup, "inf": rep.inf,
            "monotone": rep.monotone, "clipped": rep.clipped}


def _run_solve(cfg, out_dir, h_override):
    d, f, b = _build_problem(cfg, h_override)
    u, rep = solve_dirichlet(d, f, b, _solve_options(cfg),
                             _scheme_params(cfg))
    write_field(u, os.path.join(out_dir, "field.csv"))
    write_report({"action": "solve", "solve": _report_of(rep)},
                 os.path.join(out_dir, "report.json"))
    return 0 if rep.status == "converged" else 1


def _run_perron(cfg, out_dir, h_override):
    d, f, b = _build_problem(cfg, h_override)
    pspec = cfg.get("perron", {})
    if "sub" not in pspec:
        raise ConfigError("perron action needs perron.sub")
    sub = _field_from_spec(pspec["sub"], d, b)
    super_ = _field_from_spec(pspec["super"], d, b) \
        if "super" in pspec else None
    u, rep = perron_solve(d, f, b, sub, super_, _solve_options(cfg),
                          _scheme_params(cfg))
    write_field(u, os.path.join(out_dir, "field.csv"))
    write_report({"action": "perron", "solve": _report_of(rep)},
                 os.path.join(out_dir, "report.json"))
    if rep.status == "diverged_past_alarm":
        return 3
    return 0 if rep.status == "converged" else 1


def _run_probe(cfg, out_dir, h_override):
    d, f, b = _build_problem(cfg, h_override)
    opts = _solve_options(cfg)
    rep = probe_nonexistence(d, f, b, opts)
    write_report({"action": "probe", "solve": _report_of(rep),
                  "alarm_bound": opts.alarm_bound},
                 os.path.join(out_dir, "report.json"))
    if rep.status == "diverged_past_alarm":
        return 3
    return 0 if rep.status == "converged" else 1


def _run_radial(cfg, out_dir, h_override):
    r = cfg.get("radial")
    if r is None or "m" not in r or "a" not in r:
        raise ConfigError("radial action needs radial.m and radial.a")
    m = radial.MonotoneRhs1D(r["m"], r.get("ell", 0.0))
    prof = radial.build_profile(m, r["a"], r.get("prefactor", 1.0),
                                n=r.get("n", 2000))
    radial.save_profile(prof, os.path.join(out_dir, "profile.csv"))
    resid = float(radial.ode_residual(prof, m).max())
    write_report({"action": "radial",
                  "profile": {"a": prof.a, "ell": prof.ell, "R": prof.R,
                              "prefactor": prof.prefactor,
                              "ode_residual": resid}},
                 os.path.join(out_dir, "report.json"))
    return 0


def _run_family(cfg, out_dir, h_override):
    fam = cfg.get("family")
    if fam is None or "gamma" not in fam:
        raise ConfigError("family action needs family.gamma")
    d, _, _ = _build_problem(cfg, h_override)
    gamma, k = fam["gamma"], fam.get("k", 1)
    u, prof = radial.exact_family(gamma, k, d, n=fam.get("n", 2000))
    write_field(u, os.path.join(out_dir, "field.csv"))
    radial.save_profile(prof, os.path.join(out_dir, "profile.csv"))
    write_report({"action": "family",
                  "family": {"gamma": gamma, "k": k, "a": prof.a,
                             "R": prof.R, "sup_norm": float(u.sup())}},
                 os.path.join(out_dir, "report.json"))
    return 0


def _run_criteria(cfg, out_dir, h_override):
    d, f, b = _build_problem(cfg, h_override)
    copt = cfg.get("criteria", {})
    rr = d.radii()
    out_r, in_r = rr[0], rr[2]
    exact = d.exact_radii()
    if exact is not None:
        out_r, in_r = exact
    rep = crit.CriteriaReport(ell=b.ell, L=b.L)
    for eta in copt.get("eta_list", [0.1, 1.0, 3.0, 10.0]):
        val, _ = crit.c_eta(f, b.ell, b.L, eta, d)
        rep.c_eta_table.append((float(eta), float(val)))
    rep.diam_threshold = crit.diam_threshold(f, b.ell, b.L, d)
    rep.diam_actual = 2.0 * out_r
    rep.in_radius_actual = in_r
    rep.verdicts.append({
        "theorem": "diameter-threshold-existence",
        "status": "applies" if rep.diam_actual < rep.diam_threshold
        else "fails",
        "details": "diameter %s vs threshold %s"
        % (_fmt(rep.diam_actual), "inf" if np.isinf(rep.diam_threshold)
           else _fmt(rep.diam_threshold))})
    if "m" in copt or (not f.depends_on_x() and f.monotone_in_t):
        mexpr = copt.get("m", f.expression)
        try:
            m = radial.MonotoneRhs1D(mexpr, b.ell)
            M_f = crit.nonexistence_radius(m)
            rep.M_f = M_f * np.sqrt(2.0)
            rep.nonexistence_radius = M_f
            if np.isinf(M_f):
                status = "undetermined"
            else:
                status = "applies" if in_r > M_f else "fails"
            rep.verdicts.append({
                "theorem": "nonexistence-radius",
                "status": status,
                "details": "in-radius %s vs radius %s"
                % (_fmt(in_r), "inf" if np.isinf(M_f) else _fmt(M_f))})
        except ValueError:
            pass
        rep.dd3 = crit.dd3_check(f, b.ell, d)
    hr = copt.get("h_range")
    if hr is None:
        lo, hi, _ = rhs_range(f, (b.ell, b.L), d)
        hr = (lo, hi)
    rep.apriori_box = crit.apriori_box(hr[0], hr[1], b, out_r)
    gc = crit.growth_class(f, b.ell, b.L, out_r, d)
    rep.growth = gc
    rep.verdicts.append({
        "theorem": "growth-apriori",
        "status": "applies" if gc.applicable else "undetermined",
        "details": "beta_est %s alpha_est %s"
        % (_fmt(gc.beta_est), _fmt(gc.alpha_est))})
    if "a_sup" in copt:
        a_sup = copt["a_sup"]
        flag, M_bound, verdict = crit.cubic_smallness(a_sup, out_r, b)
        rep.cubic = (flag, M_bound, verdict)
        rep.verdicts.append({
            "theorem": "cubic-smallness-uniqueness",
            "status": "applies" if flag else "fails",
            "details": verdict})
        if copt.get("eigen", False):
            a_field = ScalarField.constant(d, a_sup)
            rep.eigen = crit.eigen_bracket(a_field, d)
    write_report({"action": "criteria", "criteria": rep.to_dict()},
                 os.path.join(out_dir, "report.json"))
    return 0


def _run_verify(cfg, out_dir, h_override):
    d, f, b = _build_problem(cfg, h_override)
    opts = _solve_options(cfg)
    params = _scheme_params(cfg)
    u, rep = solve_dirichlet(d, f, b, opts, params)
    write_field(u, os.path.join(out_dir, "field.csv"))
    tol = (opts.tol if opts.tol is not None
           else 1e-8 * (1.0 + max(abs(b.ell), abs(b.L))))
    tol_check = 10.0 * tol + d.h
    results = []
    for chk in cfg.get("verify", {}).get("checks", []):
        kind = chk.get("type")
        extra = {k: v for k, v in chk.items() if k != "type"}
        if kind == "comparison":
            f2 = RhsSpec(extra["rhs2"])
            v, _ = solve_dirichlet(d, f2, b, opts, params)
            res = ver.check_comparison(u, v, extra["mode"], tol_check)
        elif kind == "monotone-comparison":
            v = ScalarField.constant(d, extra["v_constant"])
            res = ver.check_monotone_comparison(u, v, f, tol_check=tol_check)
        elif kind == "lipschitz":
            x0 = extra.get("x0")
            if x0 is None or x0 == "center":
                x0 = tuple(n // 2 for n in d.dims)
            res = ver.lipschitz_bound(u, x0, extra.get("alpha", 0.0),
                                      tol_check)
        elif kind == "harnack":
            res = ver.check_harnack(u, extra["h_sup_plus"], extra["z"],
                                    extra["r"], tol_check)
        elif kind == "apriori":
            exact = d.exact_radii()
            out_r = exact[0] if exact is not None else d.radii()[0]
            hr = extra.get("h_range")
            if hr is None:
                lo, hi, _ = rhs_range(f, (b.ell, b.L), d)
                hr = (lo, hi)
            box = crit.apriori_box(hr[0], hr[1], b, out_r)
            res = ver.check_apriori(u, box, tol_check)
        else:
            raise ConfigError("unknown check type: %r" % (kind,))
        results.append(res)
    write_report({"action": "verify", "solve": _report_of(rep),
                  "checks": [r.to_dict() for r in results]},
                 os.path.join(out_dir, "report.json"))
    if any(r.status == "fail" for r in results):
        return 2
    return 0


_ACTIONS = {"solve": _run_solve, "perron": _run_perron,
            "probe": _run_probe, "radial": _run_radial,
            "family": _run_family, "criteria": _run_criteria,
            "verify": _run_verify}


def run(cfg, out_dir=".", h_override=None):
    """Execute a parsed config; returns the process exit code."""
    action = cfg.get("action")
    if action not in _ACTIONS:
        raise ConfigError("unknown or missing action: %r" % (action,))
    os.makedirs(out_dir, exist_ok=True)
    return _ACTIONS[action](cfg, out_dir, h_override)


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="inflap",
        description="Numerical laboratory for the inhomogeneous "
                    "infinity-Laplace Dirichlet problem.")
    ap.add_argument("action", choices=sorted(_ACTIONS))
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=".")
    ap.add_argument("--h", type=float, default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)
    if args.seed is not None:
        np.random.seed(args.seed)
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        cfg["action"] = args.action
        return run(cfg, args.out, args.h)
    except (ConfigError, ValueError, OSError) as e:
        print("inflap: error: %s" % e, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
