"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 bad input,
3 the precision or depth budget ran out.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

from . import __version__
from .core import Alpha, eval_F, partial_sum_bracket, tail_bound
from .digits import (
    Membership,
    RuleBased,
    Unknown,
    classify_membership,
    parse_point,
    rate_trace,
)
from .errors import DepthExceeded, KnoppError, PrecisionUnreachable
from .extrema import DyadicInterval, argmax_on_interval, classify_extremum, max_on_interval, min_on_interval
from .geometry import (
    COMPLEMENT,
    OMEGA,
    SIDES,
    ProbePoint,
    box_dimension,
    construction_scales,
    exponent_trace,
    exponent_trace_on_subsequence,
    p_exponent_direct,
    trace_summary,
    traces_to_csv,
)
from .verify import SUITES

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECISION = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    alpha: Alpha
    point_spec: Optional[str]
    k_min: int
    k_max: int
    rel_tol: float
    p: Optional[float]
    seed: int
    output: str

    def __post_init__(self):
        if self.k_min >= self.k_max:
            raise ValueError(f"need kmin < kmax, got {self.k_min} and {self.k_max}")
        if not 0 < self.rel_tol < 0.5:
            raise ValueError("rtol must lie in (0, 0.5)")
        if self.p is not None and not self.p >= 1:
            raise ValueError("p must be at least 1")

    def header(self) -> dict:
        return {
            "alpha": str(self.alpha.value),
            "point": self.point_spec,
            "kmin": self.k_min,
            "kmax": self.k_max,
            "rtol": self.rel_tol,
            "p": self.p,
            "seed": self.seed,
            "norm": "sup",
            "radii": "r = 2^-k",
            "window": "last ceil((n - 1) / 3) radii",
            "version": __version__,
        }


def _num(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return None
    if isinstance(v, float) and math.isinf(v):
        return str(v)
    return v


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _table(rows: list, header: list) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


def _csv(rows: list, header: list) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _render(cfg: RunConfig, doc: dict, rows: list, header: list) -> str:
    if cfg.output == "json":
        return _dump_json({"defaults": cfg.header(), **doc})
    if cfg.output == "csv":
        return _csv(rows, header)
    return _table(rows, header)


def _point(cfg: RunConfig):
    if not cfg.point_spec:
        raise ValueError("--point is required")
    return parse_point(cfg.point_spec)


# --------------------------------------------------------------------------
# subcommands


def cmd_eval(cfg: RunConfig, args) -> tuple:
    x = _point(cfg)
    b = eval_F(x, cfg.alpha, eps=min(cfg.rel_tol, 1e-12) if args.width is None else args.width)
    rows = [["F", "", repr(b.lo), repr(b.hi), f"{b.width:.3e}"]]
    for n in range(args.terms):
        lo, hi = partial_sum_bracket(x, n)
        lo_v, hi_v = lo.evaluate(cfg.alpha), hi.evaluate(cfg.alpha)
        rows.append([f"F_{n}", n, repr(lo_v.lo), repr(hi_v.hi), repr(tail_bound(n, cfg.alpha).hi)])
    doc = {"point": cfg.point_spec, "F": {"lo": b.lo, "hi": b.hi, "mid": b.mid, "width": b.width}}
    if args.terms:
        doc["partial_sums"] = [{"n": r[1], "lo": float(r[2]), "hi": float(r[3]), "tail_bound": float(r[4])}
                               for r in rows[1:]]
    return _render(cfg, doc, rows, ["quantity", "n", "lo", "hi", "width_or_tail"]), EXIT_OK


def _predicted(member, alpha: Alpha) -> dict:
    e = 1.0 / alpha.alpha - 1.0
    if isinstance(member, Unknown):
        return {}
    if member == Membership.DYADIC:
        return {"E_w Omega": 0.0, "E_s Omega": 0.0, "E_w OmegaComplement": e, "E_s OmegaComplement": e}
    if member == Membership.MAXIMA_SET:
        return {"E_w Omega": e, "E_s Omega": e, "E_w OmegaComplement": 0.0, "E_s OmegaComplement": 0.0}
    return {"E_w Omega": 0.0, "E_w OmegaComplement": 0.0}


def cmd_classify(cfg: RunConfig, args) -> tuple:
    x = _point(cfg)
    a = cfg.alpha
    member = classify_membership(x)
    rep = classify_extremum(x, a)
    depth = getattr(x, "depth", None)
    j_max = min(args.jmax, depth - 1) if depth else args.jmax
    rates = {}
    if j_max >= 1:
        for kind in ("dyadic", "maxima"):
            try:
                rates[kind] = rate_trace(x, kind, j_max).limsup_estimate
            except DepthExceeded:
                rates[kind] = None
    predicted = _predicted(member, a)
    empirical = {}
    if args.verify:
        X0 = ProbePoint(x, a)
        for side in SIDES:
            tr = exponent_trace(X0, side, cfg.k_min, cfg.k_max, cfg.rel_tol)
            empirical[f"E_w {side}"] = tr.E_w["est"]
            empirical[f"E_s {side}"] = tr.E_s["est"]
            empirical[f"E_w slope {side}"] = tr.E_w_slope["est"]
            empirical[f"E_s slope {side}"] = tr.E_s_slope["est"]
    member_name = "Unknown" if isinstance(member, Unknown) else member.value
    rows = [
        ["membership", member_name, ""],
        ["extremum", rep.kind.value + (" (undecided)" if rep.unknown else ""), ""],
        ["F", f"[{rep.value.lo!r}, {rep.value.hi!r}]", ""],
    ]
    for kind, v in rates.items():
        rows.append([f"rate {kind}", "n/a" if v is None else f"{v:.4f}", f"j <= {j_max}"])
    for key in sorted(set(predicted) | set(empirical)):
        if key.startswith("E_w slope") or key.startswith("E_s slope"):
            rows.append([key, "", f"{empirical[key]:.4f}"])
            continue
        pv = predicted.get(key)
        ev = empirical.get(key)
        rows.append([key, "" if pv is None else f"{pv:.4f}", "" if ev is None else f"{ev:.4f}"])
    doc = {
        "point": cfg.point_spec,
        "membership": member_name,
        "extremum": rep.kind.value,
        "undecided": rep.unknown,
        "F": {"lo": rep.value.lo, "hi": rep.value.hi},
        "rates": {k: _num(v) for k, v in rates.items()},
        "predicted": predicted,
        "empirical": {k: _num(v) for k, v in empirical.items()},
    }
    return _render(cfg, doc, rows, ["quantity", "predicted", "empirical"]), EXIT_OK


class _Renamed:
    """A trace reported under another side label in the CSV."""

    def __init__(self, tr, side):
        self.side, self.entries = side, tr.entries


def cmd_exponents(cfg: RunConfig, args) -> tuple:
    x = _point(cfg)
    X0 = ProbePoint(x, cfg.alpha)
    traces = [exponent_trace(X0, side, cfg.k_min, cfg.k_max, cfg.rel_tol) for side in SIDES]
    summaries = [trace_summary(tr, cfg.point_spec, cfg.alpha, (cfg.k_min, cfg.k_max)) for tr in traces]
    for s, tr in zip(summaries, traces):
        s["E_w_slope"] = {k: _num(v) for k, v in tr.E_w_slope.items()}
        s["E_s_slope"] = {k: _num(v) for k, v in tr.E_s_slope.items()}
    sub = []
    if isinstance(x, RuleBased):
        for kind, side in (("dyadic", COMPLEMENT), ("maxima", OMEGA)):
            ks = construction_scales(x, cfg.alpha, kind, args.length, args.sub_kmax)
            if not ks:
                continue
            tr = exponent_trace_on_subsequence(X0, side, ks, cfg.rel_tol)
            sub.append(_Renamed(tr, f"{side}@{kind}-scales"))
            summaries.append({"point_spec": cfg.point_spec, "side": side, "scales": ks, "kind": kind,
                              "max_ratio_lo": max(e.ratio_lo for e in tr.entries)})
    extra = {}
    if cfg.p is not None:
        res = p_exponent_direct(X0, cfg.p, cfg.k_min, cfg.k_max, cfg.rel_tol)
        extra = {"p": cfg.p, "u": res.estimate, "u_regression": res.regression, "p_times_u": cfg.p * res.estimate}
    if cfg.output == "csv":
        return traces_to_csv(traces + sub), EXIT_OK
    if cfg.output == "json":
        doc = {"defaults": cfg.header(), "summaries": summaries}
        if extra:
            doc["p_exponent"] = extra
        return _dump_json(doc), EXIT_OK
    rows = []
    for tr in traces:
        for e in tr.entries:
            rows.append([tr.side, int(e.k), f"{e.measure.lower:.6e}", f"{e.measure.upper:.6e}",
                         f"{e.ratio_lo:.4f}", f"{e.ratio_hi:.4f}", e.flag])
    text = _table(rows, ["side", "k", "meas_lo", "meas_hi", "ratio_lo", "ratio_hi", "flag"])
    for tr in traces:
        text += (f"{tr.side}: E_w={tr.E_w['est']:.4f} E_s={tr.E_s['est']:.4f} "
                 f"slope E_w={tr.E_w_slope['est']:.4f} E_s={tr.E_s_slope['est']:.4f} (window {tr.window})\n")
    for s in summaries[2:]:
        text += f"{s['side']} on {s['kind']} scales {s['scales']}: max ratio {s['max_ratio_lo']:.4f}\n"
    if extra:
        text += f"p={cfg.p:g}: u={extra['u']:.4f} p*u={extra['p_times_u']:.4f}\n"
    return text, EXIT_OK


def cmd_extrema_scan(cfg: RunConfig, args) -> tuple:
    if not 0 <= args.depth <= 16:
        raise ValueError("depth must lie in 0..16")
    a = cfg.alpha
    rows = []
    for N in range(args.depth + 1):
        for k in range(1 << N):
            I = DyadicInterval(k, N)
            xmin, vmin = min_on_interval(I, a)
            vb = vmin.evaluate(a)
            mb = max_on_interval(I, a)
            xs = sorted(argmax_on_interval(I, a))
            rows.append([N, k, str(xmin), repr(vb.lo), repr(vb.hi), " ".join(str(v) for v in xs), repr(mb.lo), repr(mb.hi)])
    header = ["N", "k", "argmin", "min_lo", "min_hi", "argmax", "max_lo", "max_hi"]
    doc = {"intervals": [dict(zip(header, r)) for r in rows]}
    return _render(cfg, doc, rows, header), EXIT_OK


def cmd_boxdim(cfg: RunConfig, args) -> tuple:
    res = box_dimension(cfg.alpha, cfg.k_min, cfg.k_max)
    rows = [[k, c] for k, c in zip(res.ks, res.counts)]
    doc = {"estimate": res.estimate, "expected": 2 - cfg.alpha.alpha, "ks": res.ks, "counts": res.counts}
    if cfg.output == "table":
        text = _table(rows, ["k", "boxes"])
        return text + f"slope {res.estimate:.4f} (2 - alpha = {2 - cfg.alpha.alpha:.4f})\n", EXIT_OK
    return _render(cfg, doc, rows, ["k", "boxes"]), EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> tuple:
    suite = SUITES[args.suite]
    kw = {}
    if args.suite in ("dyadic", "maxima", "boxdim", "exact", "invariants") and args.alpha is not None:
        kw["alphas"] = (cfg.alpha.value,)
    if args.suite in ("nonextremum", "dalpha", "pexponent") and args.alpha is not None:
        kw["alpha"] = cfg.alpha.value
    if args.suite in ("maxima", "exact", "invariants"):
        kw["seed"] = cfg.seed
    if args.suite in ("dyadic", "maxima", "nonextremum", "dalpha", "pexponent", "invariants"):
        kw["rtol"] = cfg.rel_tol
    checks = suite(**kw)
    ok = all(c.passed for c in checks)
    rows = [["PASS" if c.passed else "FAIL", c.name, f"{c.value:.4f}", f"{c.target:.4f}", f"{c.tol:g}", c.detail]
            for c in checks]
    doc = {"suite": args.suite, "passed": ok,
           "checks": [{"name": c.name, "passed": c.passed, "value": _num(c.value), "target": c.target,
                       "tol": c.tol, "detail": c.detail} for c in checks]}
    return _render(cfg, doc, rows, ["status", "check", "value", "target", "tol", "detail"]), EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", default=None, help="regularity in (0, 1), read exactly (default 0.5)")
    common.add_argument("--point", default=None, help="point spec, e.g. dyadic:1/2^1, rational:1/3, rule:r=2")
    common.add_argument("--kmin", type=int, default=6)
    common.add_argument("--kmax", type=int, default=20)
    common.add_argument("--rtol", type=float, default=1e-3)
    common.add_argument("--p", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json", "table"), default="table")
    common.add_argument("--out", default=None, help="write output to this path instead of stdout")

    parser = argparse.ArgumentParser(prog="knopp", description="Takagi-Knopp function and the domain under its graph.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="bracket F at a point")
    p.add_argument("--terms", type=int, default=0, help="also list F_n for n < TERMS")
    p.add_argument("--width", type=float, default=None, help="target bracket width (default min(rtol, 1e-12))")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("classify", parents=[common], help="membership, extremum kind and predicted exponents")
    p.add_argument("--verify", action="store_true", help="also measure the exponents over kmin..kmax")
    p.add_argument("--jmax", type=int, default=60, help="digits used by the rate traces")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("exponents", parents=[common], help="ratio traces on both sides")
    p.add_argument("--length", type=int, default=420, help="digits searched for construction scales")
    p.add_argument("--sub-kmax", type=int, default=210, help="largest subsequence scale")
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("extrema-scan", parents=[common], help="extrema on every dyadic interval up to a depth")
    p.add_argument("--depth", type=int, default=4)
    p.set_defaults(func=cmd_extrema_scan)

    p = sub.add_parser("boxdim", parents=[common], help="box-counting dimension of the graph")
    p.set_defaults(func=cmd_boxdim, kmin=4, kmax=16)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            alpha=Alpha(args.alpha if args.alpha is not None else "1/2"),
            point_spec=args.point,
            k_min=args.kmin,
            k_max=args.kmax,
            rel_tol=args.rtol,
            p=args.p,
            seed=args.seed,
            output=args.format,
        )
        text, code = args.func(cfg, args)
    except (PrecisionUnreachable, DepthExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (KnoppError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
