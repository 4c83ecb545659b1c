"""Batch front-end: bound reports, verification runs, tables, simulations.

Commands
--------
``steinpp bound``     compute a bound report (maxima families, Archimedean
                      exceedances, or the bivariate geometric ledger);
``steinpp verify``    run oracle-vs-bound assertion suites, nonzero exit on
                      violation;
``steinpp table``     reproduce the swap-constant and tail-dependence
                      tables with a diff against the embedded expected
                      values;
``steinpp simulate``  seeded simulations emitting plot-ready CSV.

Exit codes: 0 ok, 2 bound violation, 3 configuration error, 4 gate or
validity error.  Output is byte-stable for a fixed configuration; the
seed comes from ``--seed`` or the STEINPP_SEED environment variable.
With ``--plot`` a PNG rendering is written next to the delimited output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import archimedean, copulas, maxima, mo_geometric, point_process
from .distributions import (
    Exponential,
    Geometric,
    MOExponentialLaw,
    MOGeometricLaw,
    Pareto,
    StdCauchy,
    StdNormal,
    Uniform,
)
from .stein_bounds import (
    IntensitySpec,
    barbour_hall_bound,
    exact_dtv_pmf,
    lecam_bound,
)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_GATE = 0, 2, 3, 4

TERM_REFS = {
    "tail_at_cutoff": "survival mass at the uniformity cutoff",
    "cdf_height_at_cutoff": "approximating cdf height at the cutoff",
    "mills_ratio": "Mills-ratio tail expansion error",
    "mills_cutoff": "Mills-ratio cutoff remainder",
    "gumbel_normalisation": "affine normalisation toward the Gumbel limit",
    "tail_expansion": "arctan tail expansion error",
    "discretisation": "lattice-to-continuum discretisation error",
    "norming_change": "scaling by p instead of log(1/q)",
    "count_poisson": "binomial-to-Poisson count error (Michel route)",
    "intensity_swap": "exact-to-limit intensity swap, K*(s+t)^2/n",
    "stage1_lattice_dtv": "process vs lattice Poisson process (dTV)",
    "stage2_discrete_to_continuous_d2": "lattice vs spread intensity (d2)",
    "stage3_parameter_limit_d2": "spread vs parameter-free intensity (d2)",
    "barbour_hall": "Barbour-Hall (1984) magic-factor bound",
    "lecam": "Le Cam (1960) coupling bound",
    "local": "local-dependence neighbourhood term",
    "weak_dependence": "weak-dependence bias term",
}


class CliError(Exception):
    def __init__(self, msg, code=EXIT_CONFIG):
        super().__init__(msg)
        self.code = code


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------


def _write_text(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _rows_to_csv(rows, fieldnames):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _report_rows(report):
    rows = [
        {"term": name, "value": repr(value), "ref": TERM_REFS.get(name, "")}
        for name, value in report.terms.items()
    ]
    rows.append({"term": "total", "value": repr(report.total), "ref": ""})
    return rows


def _emit_report(report, args, title):
    if args.format == "csv":
        text = _rows_to_csv(_report_rows(report), ["term", "value", "ref"])
    else:
        payload = report.to_dict()
        payload["refs"] = {k: TERM_REFS.get(k, "") for k in report.terms}
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    _write_text(text, args.out)
    if args.plot:
        from . import figures

        figures.render_bound_report(report, _plot_path(args), title=title)


def _plot_path(args):
    if args.out in (None, "-"):
        return "steinpp_plot.png"
    base, _ = os.path.splitext(args.out)
    return base + ".png"


def _seed(args):
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("STEINPP_SEED")
    if env is not None:
        return int(env)
    raise CliError("a seed is required: pass --seed or set STEINPP_SEED")


def _marginal_law(args):
    name = args.law
    if name == "exponential":
        return Exponential(args.rate)
    if name == "pareto":
        return Pareto(args.pareto_shape, args.pareto_scale)
    if name == "uniform":
        return Uniform(args.uniform_a, args.uniform_b)
    if name == "normal":
        return StdNormal()
    if name == "cauchy":
        return StdCauchy()
    if name == "geometric":
        return Geometric(args.q)
    raise CliError(f"unknown law {name!r}")


# ---------------------------------------------------------------------------
# bound
# ---------------------------------------------------------------------------


def _parse_s(value, n):
    if value is None:
        return None
    if isinstance(value, str) and value == "sqrtlog":
        return math.sqrt(math.log(n)) / 2.0
    return float(value)


def cmd_bound(args):
    if args.arch is not None:
        if args.theta is None or args.n is None:
            raise CliError("--arch needs --theta and --n")
        fam = archimedean.ArchimedeanFamily(args.arch, args.theta)
        s = _parse_s(args.s, args.n)
        t = _parse_s(args.t, args.n) if args.t is not None else s
        if s is None:
            raise CliError("--arch needs --s (a number or 'sqrtlog')")
        try:
            constants = archimedean.tail_constants(fam, r0=args.r0)
            report = archimedean.total_bound(fam, args.n, s, t, constants=constants)
        except archimedean.ExactFamilyError as exc:
            raise CliError(str(exc), code=EXIT_GATE)
        except archimedean.FeasibilityError as exc:
            if args.s == "sqrtlog":
                n_ok = _min_n_sqrtlog(constants.r0_exact)
                raise CliError(f"{exc} (with s=t=sqrt(log n)/2 the gate needs "
                               f"n >= {n_ok})", code=EXIT_GATE)
            raise CliError(str(exc), code=EXIT_GATE)
        _emit_report(report, args, f"family {args.arch}, theta={args.theta}, n={args.n}")
        return EXIT_OK
    if args.mogeo:
        for flag in ("gamma", "delta", "p11", "n", "u"):
            if getattr(args, flag) is None:
                raise CliError(f"--mogeo needs --{flag}")
        try:
            scen = mo_geometric.MOGeoScenario(args.gamma, args.delta, args.p11,
                                              args.n, args.u)
        except ValueError as exc:
            raise CliError(str(exc), code=EXIT_GATE)
        report = mo_geometric.bound_ledger(scen)
        _emit_report(report, args, f"bivariate geometric ledger, n={args.n}")
        return EXIT_OK
    if args.law is None or args.n is None:
        raise CliError("bound needs --law and --n (or --arch / --mogeo)")
    law = _marginal_law(args)
    try:
        report = maxima.max_bound(law, args.n, stage=args.stage)
    except maxima.StageValidityError as exc:
        raise CliError(str(exc), code=EXIT_GATE)
    _emit_report(report, args, f"{args.law} maxima, n={args.n}")
    return EXIT_OK


def _min_n_sqrtlog(r0):
    gate = 3.0 * r0 / 8.0
    n = 2
    while math.sqrt(math.log(n)) / (2.0 * n) > gate:
        n += 1
        if n > 10**7:
            raise CliError("no feasible n below 1e7")
    return n


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _poisson_pmf(lam):
    def pmf(k):
        return math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))

    return pmf


def _binomial_pmf(n, p):
    def pmf(k):
        if k > n:
            return 0.0
        return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1)
                        - math.lgamma(n - k + 1)
                        + k * math.log(p) + (n - k) * math.log1p(-p))

    return pmf


def _verify_binpoi(lines):
    ok = True
    for n in (5, 10, 50, 200):
        for p in (0.01, 0.05, 0.1, 0.3):
            dtv = exact_dtv_pmf(_binomial_pmf(n, p), _poisson_pmf(n * p))
            bh = barbour_hall_bound([p] * n)
            lc = lecam_bound([p] * n)
            good = dtv < bh < lc
            ok &= good
            lines.append(f"{'PASS' if good else 'FAIL'} binomial-poisson "
                         f"n={n} p={p} dtv={dtv:.6g} bh={bh:.6g} lecam={lc:.6g}")
    return ok


def _verify_maxima(lines):
    ok = True
    cases = []
    for n in (25, 100, 1000):
        cases += [
            (Exponential(1.0), n, None),
            (Pareto(2.0, 1.0), n, None),
            (Uniform(0.0, 1.0), n, None),
            (StdCauchy(), n, None),
            (StdNormal(), n, "a"),
            (StdNormal(), n, "b"),
            (StdNormal(), n, "c"),
        ]
    for q in (0.3, 0.9):
        for n in (100, 1000):
            cases.append((Geometric(q), n, "a"))
    for law, n, stage in cases:
        bound = maxima.max_bound(law, n, stage=stage)
        oracle, _ = maxima.kolmogorov_oracle(law, n, stage=stage)
        good = oracle <= bound.total
        ok &= good
        name = type(law).__name__
        lines.append(f"{'PASS' if good else 'FAIL'} maxima {name} n={n} "
                     f"stage={stage or 'evd'} oracle={oracle:.6g} "
                     f"bound={bound.total:.6g} margin={bound.total - oracle:.6g}")
    return ok


def _empirical_vs_poisson(counts, lam):
    values, freq = np.unique(counts, return_counts=True)
    emp = np.zeros(int(values.max()) + 1)
    emp[values] = freq / counts.size
    return exact_dtv_pmf(emp, _poisson_pmf(lam))


def _verify_immdeath(lines, lam, reps, seed):
    times = [0.5, 1.0, 2.0, 12.0]
    counts = point_process.immigration_death_counts(lam, times, reps, seed)
    ok = True
    for t, row in zip(times, counts):
        target = lam * -math.expm1(-t)
        dtv = _empirical_vs_poisson(row, target)
        good = dtv <= 0.02
        ok &= good
        lines.append(f"{'PASS' if good else 'FAIL'} immigration-death lam={lam} "
                     f"t={t} dtv={dtv:.4g} (reps={reps})")
    return ok


def cmd_verify(args):
    lines = []
    ok = True
    targets = args.target or ["binpoi", "maxima", "immdeath"]
    for target in targets:
        if target == "binpoi":
            ok &= _verify_binpoi(lines)
        elif target == "maxima":
            ok &= _verify_maxima(lines)
        elif target == "immdeath":
            ok &= _verify_immdeath(lines, args.lam, args.reps, _seed(args))
        else:
            raise CliError(f"unknown verify target {target!r}")
    text = "\n".join(lines) + "\n"
    _write_text(text, args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------


def cmd_table(args):
    if args.which == "arch-constants":
        theta = args.theta or 1.5
        rows = archimedean.constants_table(theta)
        published = archimedean.PUBLISHED_CONSTANTS.get(float(theta), {})
        out_rows = []
        for row in rows:
            pub = published.get(row["family"])
            rec = {
                "family": row["family"],
                "theta": theta,
                "h0": repr(round(row["h0"], 12)),
                "r0": f"{row['r0']:.3f}",
                "H": f"{row['H']:.3f}",
                "W": f"{row['W']:.3f}",
                "K": f"{row['K']:.1f}",
            }
            if pub:
                rec["K_expected"] = f"{pub[3]:.1f}"
                rec["K_abs_diff"] = f"{abs(row['K'] - pub[3]):.3f}"
                rec["K_rel_diff"] = f"{abs(row['K'] - pub[3]) / pub[3]:.4f}"
            out_rows.append(rec)
        fields = ["family", "theta", "h0", "r0", "H", "W", "K",
                  "K_expected", "K_abs_diff", "K_rel_diff"]
        text = _rows_to_csv(out_rows, fields)
        _write_text(text, args.out)
        if args.plot:
            from . import figures

            figures.render_table(rows, "K", _plot_path(args),
                                 title=f"swap constants, theta={theta}")
        return EXIT_OK
    if args.which == "tail-dependence":
        fams = [
            ("independence", copulas.Independence()),
            ("comonotonic", copulas.Comonotonic()),
            ("countermonotonic", copulas.Countermonotonic()),
            ("gumbel(theta=2)", copulas.GumbelCopula(2.0)),
            ("clayton(theta=2)", copulas.ClaytonCopula(2.0)),
            ("marshall-olkin(0.35,0.75)", copulas.MarshallOlkinCopula(0.35, 0.75)),
        ]
        rows = []
        for name, fam in fams:
            lo, up = copulas.tail_dependence(fam)
            rows.append({
                "copula": name,
                "lambda_lower": "undefined" if lo is None else repr(float(lo)),
                "lambda_upper": "undefined" if up is None else repr(float(up)),
            })
        text = _rows_to_csv(rows, ["copula", "lambda_lower", "lambda_upper"])
        _write_text(text, args.out)
        return EXIT_OK
    raise CliError(f"unknown table {args.which!r}")


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _points_csv(points, headers):
    rows = [dict(zip(headers, (repr(float(x)) for x in row)))
            for row in np.atleast_2d(points)]
    return _rows_to_csv(rows, headers)


def cmd_simulate(args):
    seed = _seed(args)
    kind = args.kind
    if kind == "mppe":
        if args.law is None or args.n is None or args.u is None:
            raise CliError("simulate mppe needs --law, --n and --u (normalised)")
        law = _marginal_law(args)
        bound = maxima.max_bound(law, args.n)
        a_n = bound.meta.get("a_n")
        b_n = bound.meta.get("b_n")
        if a_n is None:
            raise CliError("mppe simulation supports laws with affine norming")
        region = point_process.ThresholdRay(a_n * args.u + b_n)
        res = point_process.simulate_mppe(law, region, args.n, seed,
                                          normalization=(a_n, b_n))
        text = _points_csv(res.configuration.points, ["x"])
        _write_text(text, args.out)
        if args.plot:
            from . import figures

            figures.render_points(res.configuration, _plot_path(args),
                                  title=f"{args.law} exceedances, n={args.n}")
        return EXIT_OK
    if kind == "copula":
        fam = {
            "independence": lambda: copulas.Independence(),
            "comonotonic": lambda: copulas.Comonotonic(),
            "countermonotonic": lambda: copulas.Countermonotonic(),
            "gumbel": lambda: copulas.GumbelCopula(args.theta or 2.0),
            "clayton": lambda: copulas.ClaytonCopula(args.theta or 2.0),
            "mo": lambda: copulas.MarshallOlkinCopula(args.alpha, args.beta),
        }.get(args.copula)
        if fam is None:
            raise CliError(f"unknown copula {args.copula!r}")
        pts = copulas.sample_copula(fam(), seed, args.count)
        text = _points_csv(pts, ["u", "v"])
        _write_text(text, args.out)
        if args.plot:
            from . import figures

            figures.render_points(pts, _plot_path(args),
                                  title=f"{args.copula} sample, n={args.count}")
        return EXIT_OK
    if kind == "mo-exp":
        law = MOExponentialLaw(args.nu1, args.nu2, args.nu12)
        pts = law.sample(point_process.make_rng(seed), args.count)
        _write_text(_points_csv(pts, ["x1", "x2"]), args.out)
        if args.plot:
            from . import figures

            figures.render_points(pts, _plot_path(args), title="shock-model sample")
        return EXIT_OK
    if kind == "mo-geo":
        law = MOGeometricLaw.from_gamma_delta(args.gamma, args.delta, args.p11)
        pts = law.sample(point_process.make_rng(seed), args.count)
        _write_text(_points_csv(pts.astype(float), ["x1", "x2"]), args.out)
        return EXIT_OK
    if kind == "prm":
        u = args.u if args.u is not None else 0.0
        spec = IntensitySpec(region=(u, math.inf), density=lambda x: np.exp(-x))
        conf = point_process.sample_prm(spec, seed)
        _write_text(_points_csv(conf.points, ["x"]), args.out)
        if args.plot:
            from . import figures

            figures.render_points(conf, _plot_path(args), title="PRM sample")
        return EXIT_OK
    if kind == "immdeath-counts":
        # population-count histogram at the horizon, plot-ready
        counts = point_process.immigration_death_counts(
            args.lam, [args.horizon], args.reps, seed)[0]
        values, freq = np.unique(counts, return_counts=True)
        rows = [{"count": int(v), "frequency": int(f),
                 "proportion": repr(float(f) / counts.size)}
                for v, f in zip(values, freq)]
        _write_text(_rows_to_csv(rows, ["count", "frequency", "proportion"]),
                    args.out)
        if args.plot:
            from . import figures

            figures.render_counts(counts, _plot_path(args),
                                  title=f"population at t={args.horizon}, "
                                        f"lam={args.lam}")
        return EXIT_OK
    if kind == "immdeath":
        lam = args.lam
        horizon = args.horizon
        spec = IntensitySpec(region=(0.0, math.inf),
                             density=lambda x: lam * np.exp(-x))
        traj = point_process.immigration_death_simulate(
            spec, point_process.PointConfiguration(), horizon, seed)
        rows = [{"time": repr(t), "event": "birth" if sign > 0 else "death",
                 "x": repr(pt[0])} for t, sign, pt in traj.events]
        text = _rows_to_csv(rows, ["time", "event", "x"])
        _write_text(text, args.out)
        if args.plot:
            from . import figures

            times = [0.0] + [t for t, _, _ in traj.events]
            sizes = [0]
            for _, s, _ in traj.events:
                sizes.append(sizes[-1] + s)
            figures.render_trajectory(times, sizes, _plot_path(args),
                                      title=f"immigration-death, lam={lam}")
        return EXIT_OK
    raise CliError(f"unknown simulation kind {kind!r}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="steinpp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--plot", action="store_true",
                       help="also render a PNG figure next to the output")

    b = sub.add_parser("bound", help="compute a bound report")
    common(b)
    b.add_argument("--law", choices=["exponential", "pareto", "uniform",
                                     "normal", "cauchy", "geometric"])
    b.add_argument("--stage", default=None)
    b.add_argument("--n", type=int)
    b.add_argument("--rate", type=float, default=1.0)
    b.add_argument("--pareto-shape", type=float, default=1.0)
    b.add_argument("--pareto-scale", type=float, default=1.0)
    b.add_argument("--uniform-a", type=float, default=0.0)
    b.add_argument("--uniform-b", type=float, default=1.0)
    b.add_argument("--q", type=float, default=0.5)
    b.add_argument("--arch", type=int, default=None, help="Archimedean family id")
    b.add_argument("--theta", type=float, default=None)
    b.add_argument("--s", default=None, help="threshold s (or 'sqrtlog')")
    b.add_argument("--t", default=None)
    b.add_argument("--r0", type=float, default=None, help="swap-radius override")
    b.add_argument("--mogeo", action="store_true")
    b.add_argument("--gamma", type=float, default=None)
    b.add_argument("--delta", type=float, default=None)
    b.add_argument("--p11", type=float, default=None)
    b.add_argument("--u", type=float, default=None)

    v = sub.add_parser("verify", help="oracle-vs-bound assertion suites")
    common(v)
    v.add_argument("--target", action="append",
                   choices=["binpoi", "maxima", "immdeath"])
    v.add_argument("--lam", type=float, default=2.0)
    v.add_argument("--reps", type=int, default=20_000)

    t = sub.add_parser("table", help="constant tables with diff report")
    common(t)
    t.add_argument("--which", choices=["arch-constants", "tail-dependence"],
                   required=True)
    t.add_argument("--theta", type=float, default=None)

    s = sub.add_parser("simulate", help="seeded simulations, CSV output")
    common(s)
    s.add_argument("--kind", required=True,
                   choices=["mppe", "copula", "mo-exp", "mo-geo", "prm",
                            "immdeath", "immdeath-counts"])
    s.add_argument("--law", choices=["exponential", "pareto", "uniform",
                                     "normal", "cauchy", "geometric"])
    s.add_argument("--n", type=int)
    s.add_argument("--u", type=float, default=None)
    s.add_argument("--count", type=int, default=1000)
    s.add_argument("--copula", default=None)
    s.add_argument("--theta", type=float, default=None)
    s.add_argument("--alpha", type=float, default=0.35)
    s.add_argument("--beta", type=float, default=0.75)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--pareto-shape", type=float, default=1.0)
    s.add_argument("--pareto-scale", type=float, default=1.0)
    s.add_argument("--uniform-a", type=float, default=0.0)
    s.add_argument("--uniform-b", type=float, default=1.0)
    s.add_argument("--q", type=float, default=0.5)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--p11", type=float, default=0.01)
    s.add_argument("--nu1", type=float, default=1.0)
    s.add_argument("--nu2", type=float, default=1.0)
    s.add_argument("--nu12", type=float, default=1.0)
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--horizon", type=float, default=10.0)
    s.add_argument("--reps", type=int, default=10_000)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"bound": cmd_bound, "verify": cmd_verify,
                "table": cmd_table, "simulate": cmd_simulate}
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
