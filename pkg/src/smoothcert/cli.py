"""Command line front end.

    smoothcert certify      records (one JSON object per line) -> CSV of radii
    smoothcert simulate     radius curves under the concentration assumption
    smoothcert oracle-check soundness sweep against the ball classifier
    smoothcert sample       synthetic records from the ball classifier
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional, Sequence

from .certify.context import CertContext, DELTA_INT, EPS_RADIUS
from .certify.engine import certify
from .confidence import ProbBound
from .distributions import SmoothingSpec
from .errors import AbstainError, InfeasibleError, InputError
from .heuristics import HeuristicConfig, default_k
from .numerics import reg_gamma_cdf_inv
from .pipeline import CSV_FIELDS, InputRecord, ResultRow, RunConfig, certify_record

log = logging.getLogger("smoothcert")

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.10g}"
    return str(v)


def write_csv(out, header: Sequence[str], rows: Iterable[Sequence]):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def pmap(fn: Callable, items: list, workers: int) -> list:
    """Map in input order; a pool only when more than one worker is asked for."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=1))


# ------------------------------------------------------------------ certify

def _apply_defaults(obj: dict, defaults: dict) -> dict:
    """Fill absent fields from command-line defaults; T and beta only where they apply."""
    obj = dict(obj)
    if defaults.get("q_family") and "q_family" not in obj:
        obj["q_family"] = defaults["q_family"]
    fam = obj.get("q_family", "trunc")
    key = "T" if fam == "trunc" else "beta"
    if defaults.get(key) is not None and key not in obj:
        obj[key] = defaults[key]
    return obj


def parse_records(lines: Iterable[str], defaults: dict) -> list:
    """Parse records; a bad line becomes ``(id, message)`` in its place."""
    out = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        ident = f"line{n}"
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise InputError("record must be a JSON object")
            ident = str(obj.get("id", ident))
            out.append(InputRecord.from_dict(_apply_defaults(obj, defaults)))
        except (ValueError, InputError) as exc:
            out.append((ident, f"input: {exc}"))
    return out


class _RecordTask:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg

    def __call__(self, item):
        if isinstance(item, tuple):
            return ResultRow(item[0], error=item[1])
        return certify_record(item, self.cfg)


def run_certify(lines: Iterable[str], cfg: RunConfig, defaults: dict, out) -> int:
    items = parse_records(lines, defaults)
    rows = pmap(_RecordTask(cfg), items, cfg.workers)
    write_csv(out, CSV_FIELDS, (r.as_list() for r in rows))
    hard = [r for r in rows if r.error.startswith("input:")]
    for r in hard:
        log.error("record %s: %s", r.id, r.error)
    return EXIT_ERROR if hard else EXIT_OK


# ----------------------------------------------------------------- simulate

SIM_FIELDS = ("mode", "d", "N", "exponent", "k", "T", "p_a", "q_lo", "radius_np", "radius_dsrs",
              "radius_projected", "error")


class _SimTask:
    def __init__(self, mode, sigma, p_con, p_a, alpha, k, delta_int, eps_radius):
        self.mode, self.sigma, self.p_con, self.p_a = mode, sigma, p_con, p_a
        self.alpha, self.k = alpha, k
        self.delta_int, self.eps_radius = delta_int, eps_radius

    def __call__(self, item):
        d, N, a = item
        row = dict(mode=self.mode, d=d, N=N, exponent=a, p_a=self.p_a)
        try:
            k = self.k if self.k is not None else default_k(d)
            row["k"] = k
            # concentration ball of the plain Gaussian, as in the theorem
            T = self.sigma * math.sqrt(2.0 * float(reg_gamma_cdf_inv(d / 2.0, self.p_con)))
            row["T"] = T
            q_lo = 1.0 if math.isinf(N) else self.alpha ** (1.0 / N)
            if self.mode == "relaxed":
                q_lo = min(q_lo, -math.expm1(-(d ** a)))
            row["q_lo"] = q_lo
            p_spec = SmoothingSpec.gaussian(d, self.sigma, k)
            ctx = CertContext(p_spec, p_spec.truncate(T), delta_int=self.delta_int,
                              eps_radius=self.eps_radius)
            out = certify(ProbBound.point(self.p_a), ProbBound(q_lo, 1.0), ctx)
            row["radius_np"] = out.radius_np
            row["radius_dsrs"] = out.radius_dsrs
            if self.mode == "relaxed":
                row["radius_projected"] = out.radius_np * d ** (a / 1.18)
            if out.abstained:
                row["error"] = "abstained"
        except (InputError, InfeasibleError, AbstainError) as exc:
            row["error"] = str(exc)
        return [row.get(f) for f in SIM_FIELDS]


def run_simulate(args, out) -> int:
    exps = args.exponent if args.mode == "relaxed" else [None]
    items = [(d, N, a) for a in exps for d in args.d_list for N in args.N_list]
    task = _SimTask(args.mode, args.sigma, args.p_con, args.pa, args.alpha, args.k,
                    args.delta_int, args.eps_radius)
    rows = pmap(task, items, args.workers)
    write_csv(out, SIM_FIELDS, rows)
    return EXIT_OK


# ------------------------------------------------------------- oracle-check

ORACLE_FIELDS = ("config", "family", "p_a", "q_a", "radius_true", "radius_np", "radius_dsrs",
                 "soundness_margin", "dominance_margin", "abstained", "ok")


class _OracleTask:
    def __init__(self, eps_radius, delta_int, inflate):
        self.eps_radius, self.delta_int, self.inflate = eps_radius, delta_int, inflate

    def __call__(self, item):
        from .synthetic import oracle_check_point
        gp, fam = item
        return oracle_check_point(gp, fam, self.eps_radius, self.delta_int, self.inflate)


def run_oracle_check(args, out) -> int:
    from .synthetic import oracle_grid
    fams = [args.q_family] if args.q_family else ["trunc", "var"]
    grid = list(oracle_grid(args.dims, args.sigmas, args.pas, k=args.k))
    items = [(gp, f) for gp in grid for f in fams]
    inflate = 2.0 * args.eps_radius if args.inject_fault else 0.0
    res = pmap(_OracleTask(args.eps_radius, args.delta_int, inflate), items, args.workers)
    rows = [[r.label, r.family, r.p_a, r.q_a, r.radius_true, r.radius_np, r.radius_dsrs,
             r.radius_true + args.eps_radius - r.radius_dsrs,
             r.radius_dsrs - r.radius_np + args.eps_radius, r.abstained, r.ok] for r in res]
    write_csv(out, ORACLE_FIELDS, rows)
    bad = [r for r in res if not r.ok]
    abstained = sum(r.abstained for r in res)
    print(f"oracle-check: {len(res)} checks, {len(bad)} violations, {abstained} abstained",
          file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


# ------------------------------------------------------------------- sample

def run_sample(args, out) -> int:
    from .synthetic import BallClassifier, ball_for_mass, sample_record
    k = args.k if args.k is not None else default_k(args.d)
    p_spec = SmoothingSpec.gaussian(args.d, args.sigma, k)
    if (args.T_true is None) == (args.mass is None):
        raise InputError("give exactly one of --T-true and --mass")
    T_true = args.T_true if args.T_true is not None else ball_for_mass(p_spec, args.mass)
    clf = BallClassifier(T_true, args.d)
    heur = HeuristicConfig(args.p_floor, args.p_ceiling, args.slope, args.intercept)
    for i in range(args.count):
        rec = sample_record(clf, p_spec, args.N, args.seed + i, family=args.q_family or "trunc",
                            alpha=args.alpha, T=args.T, beta=args.beta, fallback=args.fallback,
                            record_id=f"{args.id_prefix}{i}", heuristic=heur)
        out.write(json.dumps(rec.to_dict(), sort_keys=False) + "\n")
    return EXIT_OK


# ------------------------------------------------------------------ parsing

def _floats(s: str) -> list:
    return [float(x) for x in s.split(",") if x.strip()]


def _ints(s: str) -> list:
    return [int(float(x)) for x in s.split(",") if x.strip()]


def _counts(s: str) -> list:
    out = []
    for x in s.split(","):
        x = x.strip().lower()
        if not x:
            continue
        out.append(math.inf if x in ("inf", "infinity") else int(float(x)))
    return out


def _common(p: argparse.ArgumentParser):
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--delta-int", type=float, default=DELTA_INT)
    p.add_argument("--eps-radius", type=float, default=EPS_RADIUS)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--q-family", choices=["trunc", "var"], default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--fallback", action="store_true")
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--p-floor", type=float, default=0.5)
    p.add_argument("--p-ceiling", type=float, default=0.999)
    p.add_argument("--slope", type=float, default=-0.08)
    p.add_argument("--intercept", type=float, default=0.2)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smoothcert", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="certify records read from a file or stdin")
    _common(c)
    c.add_argument("input", nargs="?", default="-")

    s = sub.add_parser("simulate", help="radius curves for an idealized classifier")
    _common(s)
    s.add_argument("--mode", choices=["concentration", "relaxed"], default="concentration")
    s.add_argument("--d-list", type=_ints, default=[1000, 10000, 100000])
    s.add_argument("--N-list", type=_counts, default=[1000, 100000, 10000000])
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--p-con", type=float, default=0.5)
    s.add_argument("--pa", type=float, default=0.6)
    s.add_argument("--exponent", type=_floats, default=[0.1, 0.2, 0.3, 0.4, 0.5])

    o = sub.add_parser("oracle-check", help="soundness sweep against the ball classifier")
    _common(o)
    o.add_argument("--dims", type=_ints, default=[20, 784, 3072])
    o.add_argument("--sigmas", type=_floats, default=[0.25, 0.5, 1.0])
    o.add_argument("--pas", type=_floats, default=[0.6, 0.75, 0.9])
    o.add_argument("--inject-fault", action="store_true",
                   help="inflate every certified radius by 2*eps-radius (harness self-test)")

    m = sub.add_parser("sample", help="emit synthetic records for the ball classifier")
    _common(m)
    m.add_argument("--d", type=int, required=True)
    m.add_argument("--sigma", type=float, required=True)
    m.add_argument("--N", type=int, default=100000)
    m.add_argument("--T-true", type=float, default=None)
    m.add_argument("--mass", type=float, default=None, help="P-mass of the classifier's ball")
    m.add_argument("--count", type=int, default=1)
    m.add_argument("--id-prefix", default="r")
    return ap


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        heur = HeuristicConfig(args.p_floor, args.p_ceiling, args.slope, args.intercept)
        if args.command == "certify":
            cfg = RunConfig(alpha=args.alpha, delta_int=args.delta_int, eps_radius=args.eps_radius,
                            r_max=args.rmax, workers=args.workers, seed=args.seed,
                            fallback_enabled=args.fallback, k=args.k, heuristic=heur)
            defaults = {"q_family": args.q_family, "T": args.T, "beta": args.beta}
            src = sys.stdin if args.input == "-" else open(args.input)
            buf = io.StringIO()
            with src:
                code = run_certify(src, cfg, defaults, buf)
        else:
            buf = io.StringIO()
            if args.command == "simulate":
                code = run_simulate(args, buf)
            elif args.command == "oracle-check":
                code = run_oracle_check(args, buf)
            else:
                code = run_sample(args, buf)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = _open_out(args.output)
    try:
        out.write(buf.getvalue())
    finally:
        if out is not sys.stdout:
            out.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
