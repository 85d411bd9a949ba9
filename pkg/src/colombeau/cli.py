"""Command-line front end.

Exit codes: 0 success/associated, 1 not-associated, 2 usage or parse error,
3 non-moderate, 4 indeterminate, 5 numerical failure.  Reports are JSON on
stdout; --out writes the JSON plus gnuplot-friendly CSV sidecars (two
columns, '#' header).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .asymptotics import classify
from .association import (TestFunction, associated, exact_identity_check_H2H,
                          h2h_identity_values, impossibility_demo, pair,
                          self_energy_table, shadow_report)
from .config import RunConfig
from .errors import NumericalFailure
from .gfcore import (delta, expr_from_json, expr_to_json, gproduct, represent)
from .mollifier import verify_moments

EXIT_OK = 0
EXIT_NOT_ASSOCIATED = 1
EXIT_USAGE = 2
EXIT_NON_MODERATE = 3
EXIT_INDETERMINATE = 4
EXIT_NUMERICAL = 5


def _load_config(args):
    if getattr(args, "config", None):
        cfg = RunConfig.from_file(args.config)
    else:
        cfg = RunConfig()
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    if getattr(args, "tol", None):
        cfg.quad_tol = args.tol
    return cfg


def _load_expr(text):
    if text.strip().startswith("{"):
        raw = json.loads(text)
    else:
        with open(text, encoding="utf-8") as fh:
            raw = json.load(fh)
    return expr_from_json(raw)


def _emit(cfg, report, csv_files=()):
    print(json.dumps(report, indent=2, default=_json_default))
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        with open(os.path.join(cfg.out_dir, "report.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, default=_json_default)
        for name, header, rows in csv_files:
            with open(os.path.join(cfg.out_dir, name), "w",
                      encoding="utf-8") as fh:
                fh.write(f"# {header}\n")
                for row in rows:
                    fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _json_default(obj):
    if isinstance(obj, float) and (math.isinf(obj) or math.isnan(obj)):
        return str(obj)
    raise TypeError(f"not JSON serializable: {obj!r}")


def _sanitize(obj):
    """inf/nan are not valid JSON scalars; stringify them."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and (math.isinf(obj) or math.isnan(obj)):
        return str(obj)
    return obj


def cmd_moments(args):
    cfg = _load_config(args)
    m = cfg.mollifier_obj()
    default_tol = 1e-5 if m.kind == "ft_plateau" else 1e-8
    tol = args.tol if args.tol else default_tol
    rows = []
    all_pass = True
    for est in verify_moments(m, args.n_max, cfg.moment_tol):
        target = 1.0 if est.n == 0 else 0.0
        ok = abs(est.value - target) < tol
        all_pass &= ok
        rows.append({"n": est.n, "value": est.value, "error_estimate": est.error,
                     "tolerance": tol, "pass": bool(ok)})
    report = {"mollifier": m.spec_dict(), "moments": rows, "all_pass": all_pass}
    _emit(cfg, report, [("moments.csv", "n,value",
                         [(r["n"], r["value"]) for r in rows])])
    return EXIT_OK if all_pass else EXIT_NUMERICAL


def cmd_embed_eval(args):
    cfg = _load_config(args)
    m = cfg.mollifier_obj()
    expr = _load_expr(args.expr)
    rep = represent(expr, m, cfg.domain)
    value = rep.eval(args.eps, args.x)
    report = {"expr": expr_to_json(expr), "eps": args.eps, "x": args.x,
              "value": value}
    _emit(cfg, report)
    return EXIT_OK


def cmd_classify(args):
    cfg = _load_config(args)
    m = cfg.mollifier_obj()
    expr = _load_expr(args.expr)
    report = classify(expr, m, cfg.classify_config(), cfg.domain)
    payload = {"expr": expr_to_json(expr), "mollifier": m.spec_dict(),
               "report": _sanitize(report.to_dict())}
    csvs = [(f"classify_alpha{c.derivative_order}.csv", "eps,sup",
             list(zip(c.eps_values, c.sup_values)))
            for c in report.components]
    _emit(cfg, payload, csvs)
    if report.classification in ("moderate", "negligible"):
        return EXIT_OK
    if report.classification == "non_moderate":
        return EXIT_NON_MODERATE
    return EXIT_INDETERMINATE


def cmd_pair(args):
    cfg = _load_config(args)
    m = cfg.mollifier_obj()
    expr = _load_expr(args.expr)
    rep = represent(expr, m, cfg.domain)
    t_fn = TestFunction(args.center, args.radius)
    res = pair(rep, t_fn, cfg.ladder(), cfg.quad_tol)
    payload = {"expr": expr_to_json(expr),
               "probe": {"center": args.center, "radius": args.radius},
               "pairing": _sanitize(res.to_dict())}
    _emit(cfg, payload, [("pairing.csv", "eps,value",
                          list(zip(res.eps_values, res.values)))])
    return EXIT_INDETERMINATE if res.status == "indeterminate" else EXIT_OK


def cmd_associate(args):
    cfg = _load_config(args)
    m = cfg.mollifier_obj()
    expr_g = _load_expr(args.expr)
    expr_h = _load_expr(args.expr2)
    rep_g = represent(expr_g, m, cfg.domain)
    rep_h = represent(expr_h, m, cfg.domain)
    verdict, evidence = associated(rep_g, rep_h, cfg.probe_set(), cfg.ladder(),
                                   cfg.association_tol, cfg.quad_tol)
    payload = {
        "g": expr_to_json(expr_g), "h": expr_to_json(expr_h),
        "associated": verdict,
        "evidence": [{"probe": {"center": t.center, "radius": t.radius},
                      "pairing": _sanitize(r.to_dict())} for t, r in evidence],
    }
    _emit(cfg, payload)
    if verdict is True:
        return EXIT_OK
    if verdict is False:
        return EXIT_NOT_ASSOCIATED
    return EXIT_INDETERMINATE


def cmd_shadow(args):
    cfg = _load_config(args)
    m = cfg.mollifier_obj()
    expr = _load_expr(args.expr)
    rep = represent(expr, m, cfg.domain)
    rows = shadow_report(rep, cfg.probe_set(), cfg.ladder(), cfg.quad_tol)
    payload = {"expr": expr_to_json(expr),
               "shadow": [{"probe": {"center": t.center, "radius": t.radius},
                           "pairing": _sanitize(r.to_dict())} for t, r in rows]}
    _emit(cfg, payload)
    return EXIT_OK


def cmd_self_energy(args):
    cfg = _load_config(args)
    m = cfg.mollifier_obj()
    rows = self_energy_table(m, cfg.ladder(), args.charge)
    scaled = [r[2] for r in rows]
    payload = {"mollifier": m.spec_dict(), "charge": args.charge,
               "rows": [{"eps": e, "U": u, "eps_U": s} for e, u, s in rows],
               "eps_U_spread": max(scaled) - min(scaled)}
    _emit(cfg, payload, [("self_energy.csv", "eps,eps_times_U",
                          [(e, s) for e, u, s in rows])])
    return EXIT_OK


def _demo_impossibility(args, cfg):
    m = cfg.mollifier_obj()
    report = impossibility_demo(m, TestFunction(0.0, 1.0), cfg.ladder(),
                                cfg.quad_tol)
    print("impossibility demo: x * pv(1/x) * delta")
    print(f"  parenthesization max relative difference: "
          f"{report.parenthesization_max_rel_diff:.3e}")
    for label, res in (("x*pv(1/x) - 1", report.x_pv_minus_one),
                       ("x*delta", report.x_delta)):
        print(f"  pairing of {label}: status={res.status} limit={res.limit}")
    print(f"  triple product limit / T(0): {report.triple_constant!r} "
          "(mollifier-dependent, reported not asserted)")
    _emit(cfg, report.to_dict(),
          [("triple_pairing.csv", "eps,value",
            list(zip(report.triple.eps_values, report.triple.values)))])
    return EXIT_OK


def _demo_self_energy(args, cfg):
    code = cmd_self_energy(args)
    return code


def _demo_h2h(args, cfg):
    m = cfg.mollifier_obj()
    rows = h2h_identity_values(m, cfg.ladder(), cfg.moment_tol)
    dev = max(abs(v + 1.0 / 6.0) for _, v in rows)
    for eps, v in rows:
        print(f"  eps={eps:12.8f}  integral={v:+.12f}  (target -1/6)")
    print(f"  max deviation from -1/6: {dev:.3e}")
    value = exact_identity_check_H2H(m, cfg.ladder())
    _emit(cfg, {"mollifier": m.spec_dict(), "value": value,
                "max_deviation": dev,
                "rows": [{"eps": e, "value": v} for e, v in rows]},
          [("h2h.csv", "eps,value", rows)])
    return EXIT_OK


def _demo_delta_square(args, cfg):
    m = cfg.mollifier_obj()
    rep = represent(gproduct(delta(), delta()), m, cfg.domain)
    t_fn = TestFunction(0.0, 1.0)
    res = pair(rep, t_fn, cfg.ladder(), cfg.quad_tol)
    print("delta^2 pairing (divergent: not a distribution)")
    for eps, v in zip(res.eps_values, res.values):
        print(f"  eps={eps:12.8f}  <delta^2, T> = {v:.6f}")
    print(f"  status={res.status}  fitted exponent={res.divergence_exponent}")
    _emit(cfg, _sanitize(res.to_dict()),
          [("delta_square.csv", "eps,value",
            list(zip(res.eps_values, res.values)))])
    return EXIT_OK


_DEMOS = {"impossibility": _demo_impossibility,
          "self-energy": _demo_self_energy,
          "h2h": _demo_h2h,
          "delta-square": _demo_delta_square}


def cmd_demo(args):
    cfg = _load_config(args)
    if args.name not in _DEMOS:
        print(f"unknown demo {args.name!r}; choose from {sorted(_DEMOS)}",
              file=sys.stderr)
        return EXIT_USAGE
    return _DEMOS[args.name](args, cfg)


def _add_common(p):
    p.add_argument("--config", help="path to RunConfig JSON")
    p.add_argument("--out", help="directory for report.json and CSV sidecars")
    p.add_argument("--tol", type=float, default=None,
                   help="override quadrature/check tolerance")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="colombeau",
        description="Numerics for Colombeau generalized functions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="build a mollifier and certify moments")
    p.add_argument("--n-max", type=int, default=6)
    _add_common(p)
    p.set_defaults(fn=cmd_moments)

    p = sub.add_parser("embed-eval", help="evaluate a representative at (eps, x)")
    p.add_argument("--expr", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_embed_eval)

    p = sub.add_parser("classify", help="moderate/negligible/non-moderate report")
    p.add_argument("--expr", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("pair", help="pair an expression against one bump")
    p.add_argument("--expr", required=True)
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(fn=cmd_pair)

    p = sub.add_parser("associate", help="test association of two expressions")
    p.add_argument("--expr", required=True)
    p.add_argument("--expr2", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_associate)

    p = sub.add_parser("shadow", help="pairings against the probe family")
    p.add_argument("--expr", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_shadow)

    p = sub.add_parser("self-energy", help="finite-eps self-energy table")
    p.add_argument("--charge", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(fn=cmd_self_energy)

    p = sub.add_parser("demo-impossibility",
                       help="alias for 'demo impossibility'")
    _add_common(p)
    p.set_defaults(fn=cmd_demo, name="impossibility")

    p = sub.add_parser("demo", help="named demonstration")
    p.add_argument("name", help="impossibility | self-energy | h2h | delta-square")
    p.add_argument("--charge", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(fn=cmd_demo)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.fn(args)
    except (ValueError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
    return code


if __name__ == "__main__":
    sys.exit(main())
