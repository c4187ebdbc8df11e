"""Command-line front end.

Every command prints one envelope: a JSON object with the command,
a digest of the input spec, the parameters, the results and the tool
version, or with ``--out csv`` a single table with a header row.
Scalars that apply to the whole run are repeated as columns of every
row, so each CSV is one rectangular numeric table.

Exit codes: 0 on success, 2 on invalid input or usage, 3 when a solver
fails to converge.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import discrete_avc as dav
from . import fading, jamming_sim, spectral, waterfill
from .channel_model import parse_spec, spec_digest
from .errors import AVCError, ParseError, SolverDidNotConverge
from .units import log_base, unit_name

DIGITS = 12


def _fmt(x):
    """Round floats to 12 significant digits; non-finite values become strings."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.{DIGITS}g}")
    if isinstance(x, np.ndarray):
        return _fmt(x.tolist())
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


def _csv_cell(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{DIGITS}g}"
    return str(x)


class _Output:
    """What a command hands back: JSON results plus a CSV table."""

    def __init__(self, results, columns, rows):
        self.results = results
        self.columns = columns
        self.rows = rows


def _table(per_row=None, scalars=None, n=1):
    """Columns from per-row arrays followed by repeated scalars."""
    per_row = per_row or {}
    scalars = scalars or {}
    cols = list(per_row) + list(scalars)
    rows = []
    for i in range(n):
        rows.append([per_row[k][i] for k in per_row] + [scalars[k] for k in scalars])
    return cols, rows


def _read_spec(path, kind):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return parse_spec(obj, kind), spec_digest(raw)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _waterfill_product(args, spec):
    al = waterfill.double_waterfill(spec)
    kkt = waterfill.verify_kkt(spec, al, tol=args.tol or 1e-9)
    c_rand = waterfill.random_code_capacity_product(spec, al)
    c_det = waterfill.deterministic_code_capacity_product(spec)
    res = {
        "beta": al.beta, "alpha": al.alpha,
        "N_star": al.N_star, "P_star": al.P_star,
        "capacity_random": c_rand,
        "capacity_closed_form": waterfill.closed_form_capacity(spec, al),
        "capacity_deterministic": c_det,
        "kkt_theta": kkt.theta, "kkt_passed": kkt.passed,
    }
    d = spec.d
    cols, rows = _table({
        "j": list(range(1, d + 1)), "sigma2": spec.sigma2, "N_star": al.N_star, "P_star": al.P_star,
    }, {"beta": al.beta, "alpha": al.alpha, "capacity": c_rand}, d)
    return _Output(res, cols, rows)


def _waterfill_spectral(args, spec):
    al = spectral.freq_double_waterfill(spec, args.grid)
    rnd, det = spectral.colored_capacity(spec, args.grid)
    res = {"beta": al.beta, "alpha": al.alpha, "grid": args.grid,
           "capacity_random": rnd, "capacity_deterministic": det}
    cols, rows = _table({
        "omega": al.omega, "psd": al.psd, "b_star": al.b_star, "a_star": al.a_star,
    }, {"beta": al.beta, "alpha": al.alpha}, al.omega.size)
    return _Output(res, cols, rows)


def _capacity_discrete(args, spec):
    rnd = dav.random_capacity_fixed_params(
        spec, seed=args.seed, oracle_grid=args.oracle_grid, tol=args.tol or dav.OUTER_TOL
    )
    res = {
        "random": rnd.value, "lower_bound": rnd.lower_bound, "gap": rnd.gap,
        "p": rnd.p, "q": rnd.q, "iterations": rnd.iterations,
        "oracle_value": rnd.oracle_value, "oracle_slack": rnd.oracle_slack,
        "nonsymmetrizable": dav.nonsymmetrizable_params(spec),
    }
    scal = {"random": rnd.value, "lower_bound": rnd.lower_bound, "gap": rnd.gap}
    if args.det:
        det = dav.deterministic_capacity_fixed_params(spec, seed=args.seed,
                                                      tol=args.tol or dav.OUTER_TOL)
        res.update({
            "deterministic": det.value, "threshold": det.threshold, "boundary": det.boundary,
            "constraint_active": det.constraint_active,
        })
        scal.update({"deterministic": det.value, "threshold": det.threshold,
                     "boundary": det.boundary})
    cols, rows = _table(None, scal, 1)
    return _Output(res, cols, rows)


def _capacity_fading(args, spec):
    r = fading.fading_random_capacity(spec)
    res = {"random": r.value, "lower_bound": r.lower_bound,
           "omega": r.allocation.omega, "lambda": r.allocation.lam, "oracle_value": r.oracle_value}
    scal = {"random": r.value}
    if args.det:
        d = fading.fading_det_capacity(spec)
        res.update({"deterministic": d.value, "threshold": d.threshold, "boundary": d.boundary,
                    "constraint_active": d.constraint_active})
        scal.update({"deterministic": d.value, "threshold": d.threshold})
    k = spec.theta.size
    cols, rows = _table({
        "i": list(range(k)), "theta": spec.theta, "P_T": spec.P_T,
        "omega": r.allocation.omega, "lambda": r.allocation.lam,
    }, scal, k)
    return _Output(res, cols, rows)


def _capacity_scalar(args, _spec):
    rnd, det = waterfill.scalar_capacity(args.gamma, args.lam, args.sigma2)
    res = {"random": rnd, "deterministic": det}
    cols, rows = _table(None, {"gamma": args.gamma, "lambda": args.lam,
                                     "sigma2": args.sigma2, **res}, 1)
    return _Output(res, cols, rows)


def _capacity_colored(args, spec):
    rnd, det = spectral.colored_capacity(spec, args.grid)
    res = {"random": rnd, "deterministic": det, "grid": args.grid}
    cols, rows = _table(None, res, 1)
    return _Output(res, cols, rows)


def _symmetrize(args, spec):
    T, X, S, _ = spec.sizes
    if not 0 <= args.t < T:
        raise AVCError(f"--t must lie in 0..{T - 1}")
    p = None
    if args.p is not None:
        p = np.array([float(v) for v in args.p.split(",")])
        if p.size != X or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
            raise AVCError(f"--p must be a probability vector of length {X}")
    kern = dav.find_symmetrizer(spec.W[args.t], p, spec.l if p is not None else None)
    if kern is None:
        res = {"t": args.t, "symmetrizable": False, "J": None, "cost": "inf"}
        cols, rows = ["t", "symmetrizable"], [[args.t, 0]]
        return _Output(res, cols, rows)
    res = {"t": args.t, "symmetrizable": True, "J": kern.J, "cost": kern.cost,
           "residual": kern.residual, "zero_one": kern.zero_one}
    ss, xs = np.meshgrid(np.arange(S), np.arange(X), indexing="ij")
    cols, rows = _table({"s": ss.ravel(), "x": xs.ravel(), "J": kern.J.ravel()},
                        {"residual": kern.residual}, S * X)
    return _Output(res, cols, rows)


def _szego(args, spec):
    n_list = [int(v) for v in args.n.split(",")]
    if spec.autocorr is not None:
        r = spec.autocorr
    else:
        r = spectral.autocorr_from_psd(spec, max(n_list) - 1)
    tab = spectral.szego_convergence(r, spec.gamma, spec.lam, n_list, args.grid)
    res = {"limit": tab.limit, "n": tab.n, "C_n": tab.C_n, "gap": tab.gap, "monotone": tab.monotone}
    cols, rows = _table({"n": tab.n, "C_n": tab.C_n, "gap": tab.gap},
                        {"limit": tab.limit}, len(tab.n))
    return _Output(res, cols, rows)


def _simulate(args, _spec):
    kw = dict(gamma=args.gamma, lam=args.lam, sigma2=args.sigma2, strategy=args.strategy,
              trials=args.trials, seed=args.seed)
    try:
        if args.M is not None:
            cfg = jamming_sim.SimConfig.from_codebook_size(args.n, args.M, **kw)
        else:
            cfg = jamming_sim.SimConfig(n=args.n, rate=args.rate, **kw)
    except ValueError as exc:
        raise AVCError(str(exc)) from None
    rep = jamming_sim.simulate(cfg)
    res = {"error_rate": rep.error_rate, "half_width": rep.half_width, "errors": rep.errors,
           "trials": rep.trials, "mode": rep.mode, "log2_M": cfg.log2_M,
           "capacity": rep.metadata["capacity_bits"]}
    cols, rows = _table(None, {k: v for k, v in res.items() if k != "mode"}, 1)
    return _Output(res, cols, rows)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=None, help="solver tolerance")
    p.add_argument("--log-base", choices=["2", "e"], default="2", help="unit of reported rates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=["json", "csv"], default="json")
    return p


def build_parser():
    common = _common()
    top = argparse.ArgumentParser(prog="avcap", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=__version__)
    verbs = top.add_subparsers(dest="verb", required=True)

    wf = verbs.add_parser("waterfill", help="double water filling").add_subparsers(dest="what", required=True)
    p = wf.add_parser("product", parents=[common])
    p.add_argument("--spec", required=True)
    p.set_defaults(func=_waterfill_product, kind="product")
    p = wf.add_parser("spectral", parents=[common])
    p.add_argument("--spec", required=True)
    p.add_argument("--grid", type=int, default=spectral.DEFAULT_GRID)
    p.set_defaults(func=_waterfill_spectral, kind="spectral")

    cap = verbs.add_parser("capacity", help="capacity evaluators").add_subparsers(dest="what", required=True)
    p = cap.add_parser("discrete", parents=[common])
    p.add_argument("--spec", required=True)
    p.add_argument("--oracle-grid", type=int, default=None)
    p.add_argument("--det", action="store_true")
    p.set_defaults(func=_capacity_discrete, kind="discrete")
    p = cap.add_parser("fading", parents=[common])
    p.add_argument("--spec", required=True)
    p.add_argument("--det", action="store_true")
    p.set_defaults(func=_capacity_fading, kind="fading")
    p = cap.add_parser("scalar", parents=[common])
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.set_defaults(func=_capacity_scalar, kind=None)
    p = cap.add_parser("colored", parents=[common])
    p.add_argument("--spec", required=True)
    p.add_argument("--grid", type=int, default=spectral.DEFAULT_GRID)
    p.set_defaults(func=_capacity_colored, kind="spectral")

    p = verbs.add_parser("symmetrize", parents=[common], help="symmetrizing kernel of one slice")
    p.add_argument("--spec", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--p", default=None, help="input law, comma separated, for the least-cost kernel")
    p.set_defaults(func=_symmetrize, kind="discrete")

    p = verbs.add_parser("szego", parents=[common], help="finite-n capacities against the limit")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", required=True, help="comma separated block lengths")
    p.add_argument("--grid", type=int, default=spectral.DEFAULT_GRID)
    p.set_defaults(func=_szego, kind="spectral")

    p = verbs.add_parser("simulate", parents=[common], help="Monte Carlo jamming simulation")
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rate", type=float)
    g.add_argument("--M", type=int)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--strategy", choices=["iid", "mimic"], required=True)
    p.add_argument("--trials", type=int, required=True)
    p.set_defaults(func=_simulate, kind=None)
    return top


def _parameters(args):
    skip = {"func", "kind", "verb", "what", "out"}
    return {("lambda" if k == "lam" else k): v for k, v in vars(args).items() if k not in skip}


def run(argv=None, stdout=None, stderr=None):
    """Execute one command; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        # usage text and --help/--version go to the supplied streams
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = " ".join(x for x in (args.verb, getattr(args, "what", None)) if x)
    try:
        with log_base(args.log_base):
            if args.kind is not None:
                spec, digest = _read_spec(args.spec, args.kind)
            else:
                spec = None
                digest = spec_digest(json.dumps(_parameters(args), sort_keys=True))
            out = args.func(args, spec)
            unit = unit_name()
    except SolverDidNotConverge as exc:
        print(f"avcap: solver did not converge: {exc}", file=stderr)
        return 3
    except (AVCError, ValueError) as exc:
        print(f"avcap: {exc}", file=stderr)
        return 2
    if args.out == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.columns)
        for row in out.rows:
            w.writerow([_csv_cell(v) for v in row])
        stdout.write(buf.getvalue())
    else:
        env = {
            "command": command,
            "spec_digest": digest,
            "parameters": _fmt(_parameters(args)),
            "results": _fmt({**out.results, "unit": unit}),
            "version": __version__,
        }
        stdout.write(json.dumps(env, indent=2) + "\n")
    return 0


def main(argv=None):
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
