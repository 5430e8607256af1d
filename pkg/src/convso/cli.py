"""Command-line interface: ``convso build|verify|boundary|wahba``.

Exit codes: 0 success, 1 verification failure, 2 usage error or malformed
input, 3 I/O failure.

CSV schemas
  scenario  type,k,kappa,omega,x_1..x_n,y_1..y_n  (type is dir or spin;
            kappa may be inf; omega is blank on dir rows, x/y blank on spin rows)
  estimate  q11..qnn,omega,objective,eigengap,ambiguous
  boundary  theta,u,v  (u, v are coordinates in the projection plane)
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import estimation, geometry, hull_reps, polytopes, solver
from .clifford import a_family, spin_sample
from .geometry import BodyKind
from .sampling import haar_rotation, reflection_matrix

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- build -------------------------------------------------------------------

def size_formula(body, n):
    body = BodyKind.parse(body)
    if body is BodyKind.CONV_SON:
        return {2: "2", 3: "2^{n-1}"}.get(n, "2^{n-1}+2n")
    return {BodyKind.SON_POLAR: "2^{n-1}", BodyKind.SON_MINUS_POLAR: "2^{n-1}",
            BodyKind.ON_POLAR: "2^n", BodyKind.CONV_ON: "2n"}[body]


def cmd_build(args):
    lmi = hull_reps.representation(args.body, args.n)
    if args.format == "sdpa":
        obj = np.eye(args.n) if args.objective == "identity" else np.zeros((args.n, args.n))
        text = hull_reps.sdpa_text(lmi, obj)
    else:
        text = hull_reps.lmi_to_csv(lmi)
    _emit(text, args.out)
    blocks = " + ".join(str(s) for s in lmi.sizes)
    print(f"blocks: {blocks}; size {size_formula(args.body, args.n)} = {lmi.total_size}")
    return EXIT_OK


# -- verify ------------------------------------------------------------------

def _family(n, flip_a12):
    dense = np.array(a_family(n)[2])
    if flip_a12:
        dense[0, 1] = -dense[0, 1]
    return dense


def _pencil_with(dense, y):
    return np.tensordot(y, dense, axes=([-2, -1], [0, 1]))


def suite_construction(n_max, samples, rng, flip):
    bad = []
    for n in range(2, n_max + 1):
        d = _family(n, flip)
        for i in range(n):
            for j in range(n):
                m = d[i, j]
                ok = (np.array_equal(m, m.T) and set(np.unique(m)) <= {-1.0, 0.0, 1.0}
                      and np.all(np.sum(m != 0, axis=0) == 1)
                      and (i != j or np.count_nonzero(m - np.diag(np.diag(m))) == 0))
                if not ok:
                    bad.append([n, i + 1, j + 1])
    return not bad, {"bad": bad[:10]}


def suite_rotation_membership(n_max, samples, rng, flip):
    worst_orth, worst_slack = 0.0, np.inf
    for n in range(2, n_max + 1):
        d = _family(n, flip)
        for _ in range(max(1, samples // 10)):
            x = spin_sample(n, seed=rng).coords
            q = np.einsum("a,ijab,b->ij", x, d, x)
            worst_orth = max(worst_orth, float(np.linalg.norm(q.T @ q - np.eye(n))),
                             abs(float(np.linalg.det(q)) - 1.0))
        if n >= 3:
            xs = haar_rotation(n, rng, samples)
            r = np.ones(n)
            r[-1] = -1.0
            m = (n - 2) * np.eye(d.shape[-1]) - _pencil_with(d, xs * r[:, None])
            worst_slack = min(worst_slack, float(np.min(np.linalg.eigvalsh(m)[:, 0])))
    ok = worst_orth <= 1e-9 and worst_slack >= -1e-9
    return ok, {"orthogonality": worst_orth, "min_slack": worst_slack}


def suite_polytopes(n_max, samples, rng, flip):
    counts = {
        "pp3": polytopes.facet_count(polytopes.parity_polytope(3)),
        "pp4": polytopes.facet_count(polytopes.parity_polytope(4)),
        "pp5": polytopes.facet_count(polytopes.parity_polytope(5)),
    }
    ok = counts == {"pp3": 4, "pp4": 16, "pp5": 26}
    for n in range(3, min(n_max, 6) + 1):
        pts = rng.uniform(-1.5, 1.5, size=(samples, n))
        ok = ok and all(polytopes.ppalt_check(n, p) for p in pts)
    return ok, counts


def suite_horn(n_max, samples, rng, flip):
    worst = np.inf
    for n in range(2, n_max + 1):
        diags = np.diagonal(haar_rotation(n, rng, samples), axis1=1, axis2=2)
        worst = min(worst, float(np.min(geometry.parity_slack(diags))))
    return worst >= -1e-9, {"min_slack": worst}


def suite_oracle_equivalence(n_max, samples, rng, flip):
    disagree = 0
    for n in range(2, min(n_max, 6) + 1):
        xs = rng.standard_normal((samples, n, n)) * (0.6 / math.sqrt(n))
        a = hull_reps.lmi_slack(hull_reps.conv_son_rep(n), xs)
        b = geometry.conv_son_slack(xs)
        band = (np.abs(a) > 1e-7) & (np.abs(b) > 1e-7)
        disagree += int(np.sum(band & ((a > 0) != (b > 0))))
    return disagree == 0, {"disagreements": disagree}


def suite_support(n_max, samples, rng, flip):
    errs = []
    for n in range(3, n_max + 1):
        r = reflection_matrix(n)
        errs.append(abs(geometry.support_conv_son(np.eye(n)).value - n))
        errs.append(abs(geometry.support_conv_son(r).value - (n - 2)))
        errs.append(abs(float(geometry.conv_son_slack((n - 2) / n * r))))
    worst = max(errs)
    return worst <= 1e-8, {"max_error": worst}


def suite_duality(n_max, samples, rng, flip):
    worst = -np.inf
    for n in range(2, n_max + 1):
        ys = rng.standard_normal((max(1, samples // 10), n, n))
        ys /= geometry.support_conv_son_value(ys)[:, None, None]
        xs = haar_rotation(n, rng, samples)
        worst = max(worst, float(np.max(np.einsum("aij,bij->ab", ys, xs))))
    return worst <= 1 + 1e-8, {"max_pairing": worst}


def suite_solver(n_max, samples, rng, flip):
    worst_lp, worst_proj = 0.0, 0.0
    for n in range(2, min(n_max, 4) + 1):
        c = rng.standard_normal((n, n))
        rep = solver.maximize_linear_over_lmi(hull_reps.conv_son_rep(n), c)
        worst_lp = max(worst_lp, abs(rep.objective - geometry.support_conv_son(c).value))
        if n >= 3:
            x = 1.5 * rng.standard_normal((n, n))
            d = solver.dykstra_conv_son(x)
            worst_proj = max(worst_proj, float(np.linalg.norm(d.x - solver.project_conv_son(x))))
    return worst_lp <= 1e-5 and worst_proj <= 1e-4, {"lp": worst_lp, "projection": worst_proj}


def suite_estimation(n_max, samples, rng, flip):
    q = haar_rotation(3, rng)
    dirs, _ = estimation.synthesize_scenario(3, 3, math.inf, None, q, 0.0, seed=rng)
    err = float(np.linalg.norm(estimation.wahba_solve(dirs).q_hat - q))
    return err <= 1e-6, {"recovery_error": err}


SUITES = [
    ("construction", suite_construction),
    ("rotation-membership", suite_rotation_membership),
    ("polytopes", suite_polytopes),
    ("horn", suite_horn),
    ("oracle-equivalence", suite_oracle_equivalence),
    ("support", suite_support),
    ("duality", suite_duality),
    ("solver", suite_solver),
    ("estimation", suite_estimation),
]


def run_verify(n_max=6, samples=200, seed=0, flip_a12=False, out=None):
    out = sys.stdout if out is None else out
    all_ok = True
    for k, (name, fn) in enumerate(SUITES):
        rng = np.random.default_rng([seed, k])
        try:
            ok, details = fn(n_max, samples, rng, flip_a12)
        except Exception as exc:  # a crashing suite is a failing suite
            ok, details = False, {"error": f"{type(exc).__name__}: {exc}"}
        all_ok = all_ok and bool(ok)
        out.write(json.dumps({"suite": name, "passed": bool(ok), "details": details},
                             default=float, sort_keys=True) + "\n")
    return all_ok


def cmd_verify(args):
    if not 2 <= args.n_max <= 8:
        raise UsageError("--n-max must lie in [2, 8]")
    return EXIT_OK if run_verify(args.n_max, args.samples, args.seed, args.flip_a12) else EXIT_VERIFY


# -- boundary ----------------------------------------------------------------

def projection_plane(d1, d2):
    """Orthonormalize two direction matrices (Frobenius inner product)."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    n1 = np.linalg.norm(d1)
    if n1 < 1e-12:
        raise ValueError("first projection direction is zero")
    d1 = d1 / n1
    d2 = d2 - np.sum(d1 * d2) * d1
    n2 = np.linalg.norm(d2)
    if n2 < 1e-12:
        raise ValueError("projection directions are parallel")
    return d1, d2 / n2


def default_plane(n):
    e11 = np.zeros((n, n))
    e12 = np.zeros((n, n))
    e11[0, 0] = 1.0
    e12[0, 1] = 1.0
    return e11, e12


def conv_maximizer(body, c):
    body = BodyKind.parse(body)
    if body is BodyKind.CONV_SON:
        return geometry.support_conv_son(c).maximizer
    if body is BodyKind.CONV_ON:
        u, _, vt = np.linalg.svd(c)
        return u @ vt
    raise ValueError(f"{body.value} is not a convex-hull body")


def ray_length(body, y, tol=1e-8, hi=None):
    """sup {t >= 0 : t Y in body} by bisection on the membership oracle."""
    def inside(t):
        return geometry.polar_slack(body, t * y) >= 0.0

    lo, hi = 0.0, 1.0 if hi is None else hi
    while inside(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return lo


def boundary_points(body, n=3, functionals=100, plane=None, tol=1e-8):
    """(theta, u, v) rows on the projected boundary (conv bodies) or the
    planar section boundary (polar bodies)."""
    body = BodyKind.parse(body)
    d1, d2 = projection_plane(*(plane if plane is not None else default_plane(n)))
    thetas = np.arange(functionals) * (2.0 * math.pi / functionals)
    rows = []
    for th in thetas:
        direction = math.cos(th) * d1 + math.sin(th) * d2
        if body in (BodyKind.CONV_SON, BodyKind.CONV_ON):
            x = conv_maximizer(body, direction)
            rows.append((th, float(np.sum(d1 * x)), float(np.sum(d2 * x))))
        else:
            t = ray_length(body, direction, tol)
            rows.append((th, t * math.cos(th), t * math.sin(th)))
    return np.array(rows)


def points_csv(rows):
    lines = ["theta,u,v"] + [f"{a:.17g},{b:.17g},{c:.17g}" for a, b, c in rows]
    return "\n".join(lines) + "\n"


def points_svg(rows, size=400, label=""):
    pts = rows[:, 1:]
    span = max(1e-12, float(np.max(np.abs(pts)))) * 1.1
    scale = size / (2 * span)
    coords = [((u + span) * scale, (span - v) * scale) for u, v in pts]
    poly = " ".join(f"{x:.3f},{y:.3f}" for x, y in coords)
    dots = "\n".join(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2" fill="black"/>'
                     for x, y in coords)
    return (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{size}" height="{size}" viewBox="0 0 {size} {size}">\n'
            f'<title>{label}</title>\n'
            f'<polygon points="{poly}" fill="none" stroke="gray"/>\n{dots}\n</svg>\n')


def _parse_matrix(text, n):
    try:
        vals = [float(v) for v in text.replace(";", ",").split(",")]
    except ValueError:
        raise UsageError(f"cannot parse matrix {text!r}") from None
    if len(vals) != n * n:
        raise UsageError(f"matrix needs {n * n} entries, got {len(vals)}")
    return np.array(vals).reshape(n, n)


def cmd_boundary(args):
    d1, d2 = default_plane(args.n)
    if args.d1:
        d1 = _parse_matrix(args.d1, args.n)
    if args.d2:
        d2 = _parse_matrix(args.d2, args.n)
    try:
        rows = boundary_points(args.body, args.n, args.functionals, (d1, d2))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "svg":
        text = points_svg(rows, label=f"{args.body} n={args.n}")
    else:
        text = points_csv(rows)
    _emit(text, args.out)
    return EXIT_OK


# -- wahba -------------------------------------------------------------------

def _kappa(text):
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def cmd_wahba(args):
    q_true = None
    if args.synthesize:
        if args.seed is None:
            args.seed = 0
        q_true = haar_rotation(args.n, np.random.default_rng([args.seed, 1]))
        dirs, spins = estimation.synthesize_scenario(
            args.n, args.T, _kappa(args.kappa1),
            None if args.kappa2 is None else _kappa(args.kappa2),
            q_true, args.omega, seed=args.seed)
        if args.save_scenario:
            _emit(estimation.scenario_to_csv(dirs, spins), args.save_scenario, quiet=True)
    else:
        if not args.input:
            raise UsageError("give --input CSV or --synthesize")
        try:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
            return EXIT_IO
        try:
            dirs, spins = estimation.scenario_from_csv(text)
        except ValueError as exc:
            raise UsageError(f"malformed scenario: {exc}") from None
    try:
        if args.mode == "joint":
            est = estimation.joint_solve(dirs, spins, args.grid_size)
        else:
            est = estimation.wahba_solve(dirs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for row in est.q_hat:
        print(" ".join(f"{v: .12f}" for v in row))
    print(f"objective: {est.objective:.12g}")
    print(f"eigengap: {est.eigengap:.6g}{' (ambiguous)' if est.ambiguous else ''}")
    if est.omega_hat is not None:
        print(f"omega: {est.omega_hat:.12g}")
    if q_true is not None:
        print(f"recovery error: {np.linalg.norm(est.q_hat - q_true):.3e}")
    if args.out:
        _emit(estimation.estimate_to_csv(est), args.out, quiet=True)
    return EXIT_OK


# -- plumbing ----------------------------------------------------------------

def _emit(text, path, quiet=False):
    if path in (None, "-"):
        if not quiet:
            sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def build_parser():
    bodies = [k.value for k in BodyKind]
    p = argparse.ArgumentParser(prog="convso", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="export an LMI representation")
    b.add_argument("--body", choices=bodies, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--format", choices=["sdpa", "csv"], default="sdpa")
    b.add_argument("--objective", choices=["zero", "identity"], default="zero")
    b.add_argument("--out", help="output path (default: stdout)")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run the property suites, JSON lines out")
    v.add_argument("--n-max", type=int, default=6)
    v.add_argument("--samples", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--flip-a12", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("boundary", help="boundary samples in a 2-D plane")
    d.add_argument("--body", choices=bodies, required=True)
    d.add_argument("--n", type=int, default=3)
    d.add_argument("--functionals", type=int, default=100)
    d.add_argument("--d1", help="first direction matrix, row-major comma list")
    d.add_argument("--d2", help="second direction matrix, row-major comma list")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--format", choices=["csv", "svg"], default="csv")
    d.add_argument("--out")
    d.set_defaults(func=cmd_boundary)

    w = sub.add_parser("wahba", help="attitude estimation from a scenario CSV")
    w.add_argument("--input")
    w.add_argument("--mode", choices=["wahba", "joint"], default="wahba")
    w.add_argument("--synthesize", action="store_true")
    w.add_argument("--n", type=int, default=3)
    w.add_argument("--T", type=int, default=3)
    w.add_argument("--kappa1", default="inf")
    w.add_argument("--kappa2", default=None)
    w.add_argument("--omega", type=float, default=0.0)
    w.add_argument("--grid-size", type=int, default=None)
    w.add_argument("--seed", type=int, default=None)
    w.add_argument("--save-scenario")
    w.add_argument("--out")
    w.set_defaults(func=cmd_wahba)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
