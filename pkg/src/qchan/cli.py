"""Command-line front end: ``qchan coeff | region | verify | nogo | bkm``."""

import argparse
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import channels as chs
from . import coefficients as co
from . import lessnoisy as ln
from .divergences import bkm_metric, bkm_qubit
from .errors import AssumptionFailed, ParseError, QchanError
from .estimator import OptimizerConfig, estimate_coefficient, nogo_ladder
from .parse import parse_channel, read_kraus_json
from .states import bloch_to_state, pauli_operator
from .verification import SUITES, run_suite

EXIT_FAIL, EXIT_USAGE, EXIT_ASSUMPTION = 1, 2, 3


# ------------------------------------------------------------ manifest


def resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("QCHAN_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"QCHAN_SEED is not an integer: {env!r}") from None
    return 0


def manifest_hash(argv, seed, config):
    """Hash over the reproducible inputs: command, seed, config and version."""
    payload = json.dumps({"argv": list(argv), "seed": seed, "config": config,
                          "version": __version__}, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()


def write_manifest(out_path, argv, seed, config, timings):
    data = Path(out_path).read_bytes()
    manifest = {
        "manifest_hash": manifest_hash(argv, seed, config),
        "command": list(argv),
        "seed": seed,
        "config": config,
        "version": __version__,
        "wall_clock": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "timings": timings,
        "output": str(out_path),
        "output_sha256": hashlib.sha256(data).hexdigest(),
    }
    side = Path(str(out_path) + ".manifest.json")
    side.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return side


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    raise TypeError(f"not JSON serializable: {type(x)}")


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else ("inf" if f > 0 else "-inf" if f < 0 else "nan")
    return obj


def emit_json(obj, out=None):
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------- coeff


def _family(spec):
    kind, _, body = spec.strip().partition(":")
    args = dict(p.split("=", 1) for p in body.split(",") if "=" in p) if kind != "flag" else {}
    return kind, args


def _estimate_dict(name, est):
    d = {"coefficient": name}
    d.update(est.as_dict())
    run = d.get("meta", {}).pop("run", None)
    if run is not None:
        d["meta"]["restart_values"] = run.values
        d["meta"]["converged"] = sum(run.converged)
    return d


def closed_forms(spec_n, spec_m, which, eps=None):
    """Closed forms and bounds that apply to the pair of specs."""
    out = []
    kn, an = _family(spec_n)
    km, am = _family(spec_m)
    want_c = which in ("contraction", "both")
    want_e = which in ("expansion", "both")
    if kn == km == "depol" and an.get("d") == am.get("d"):
        d, p1, p2 = int(an["d"]), float(an["p"]), float(am["p"])
        if 0 < p2 <= p1 < 1:
            if want_c:
                out.append(_estimate_dict("contraction", co.depol_relative_bounds(d, p1, p2)))
            if d == 2:
                eta, check = co.depol_qubit_exact(p1, p2)
                if want_c:
                    out.append(_estimate_dict("contraction", eta))
                if want_e:
                    out.append(_estimate_dict("expansion", check))
        elif 0 < p1 < p2 < 1 and d == 2:
            # Reciprocity: eta_check(N, M) = 1 / eta(M, N).
            eta, check = co.depol_qubit_exact(p2, p1)
            if want_c:
                out.append(_estimate_dict("contraction", co.CoefficientEstimate.point(
                    1 / check.value, co.EXACT, "qubit depolarizing, reciprocal")))
            if want_e:
                out.append(_estimate_dict("expansion", co.CoefficientEstimate.point(
                    1 / eta.value, co.EXACT, "qubit depolarizing, reciprocal")))
    if kn == "depol" and km == "id" and want_c:
        d, p = int(an["d"]), float(an["p"])
        if 0 < p < 1:
            out.append(_estimate_dict("contraction", co.depol_relative_bounds(d, p, 0.0)))
            if d == 2:
                out.append(_estimate_dict("contraction", co.CoefficientEstimate.point(
                    (1 - p) ** 2, co.EXACT, "qubit depolarizing contraction")))
    if kn == km == "amp":
        g1, g2 = float(an["gamma"]), float(am["gamma"])
        if 0 < g1 < 1 and 0 < g2 < 1:
            if want_e:
                out.append(_estimate_dict("expansion", co.ampdamp_expansion_conjecture(g1, g2)))
            if want_c:
                out.append(_estimate_dict("contraction", co.ampdamp_contraction_conjecture(g1, g2)))
    if kn == "amp" and km == "id" and want_c:
        g = float(an["gamma"])
        if 0 < g < 1:
            _, sand = co.ampdamp_trace_contraction(g)
            out.append(_estimate_dict("contraction", sand))
    if kn == km == "deph" and want_e:
        pn, pm = float(an["p"]), float(am["p"])
        g_n, g_m = chs.qubit_dephasing_matrix(pn), chs.qubit_dephasing_matrix(pm)
        if eps is not None:
            out.append(_estimate_dict("expansion", co.dephasing_cp_expansion_bound(g_m, g_n, eps)))
        else:
            best = _best_dephasing_eps(g_m, g_n)
            if best is not None:
                out.append(_estimate_dict("expansion", best))
    return out


def _best_dephasing_eps(gamma, gamma_p):
    for e in np.linspace(0.005, 0.495, 99):
        try:
            return co.dephasing_cp_expansion_bound(gamma, gamma_p, float(e))
        except AssumptionFailed:
            continue
    return None


def cmd_coeff(args):
    seed = resolve_seed(args.seed)
    ch_n = parse_channel(args.n)
    ch_m = parse_channel(args.m) if args.m else chs.identity(ch_n.dim_in)
    spec_m = args.m or f"id:d={ch_n.dim_in}"
    report = {"n": args.n, "m": spec_m, "which": args.which, "seed": seed}
    report["closed_forms"] = closed_forms(args.n, spec_m, args.which, args.eps)
    numerical = []
    if args.restarts > 0:
        modes = {"contraction": ["max"], "expansion": ["min"], "both": ["max", "min"]}[args.which]
        for mode in modes:
            cfg = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, seed=seed,
                                  mode=mode, jobs=args.jobs)
            est = estimate_coefficient(ch_n, None if args.m is None else ch_m, cfg)
            name = "contraction" if mode == "max" else "expansion"
            numerical.append(_estimate_dict(name, est))
    report["numerical"] = numerical
    if args.which in ("expansion", "both") and _is_identity_spec(spec_m) \
            and ch_n.dim_in >= ch_n.dim_out:
        report["nogo"] = nogo_ladder(ch_n, seed=seed)
    config = _config(args)
    report["manifest_hash"] = manifest_hash(args.argv, seed, config)
    emit_json(report, args.out)
    if args.out:
        write_manifest(args.out, args.argv, seed, config, {})
    return 0


def _config(args):
    return {k: v for k, v in vars(args).items() if k not in ("func", "argv")}


def _is_identity_spec(spec):
    return spec.strip().startswith("id:")


# -------------------------------------------------------------- region


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"expected a comma-separated list of numbers, got {text!r}") from None


def cmd_region(args):
    seed = resolve_seed(args.seed)
    config = _config(args)
    t0 = time.perf_counter()
    gammas = _floats(args.gammas) if args.gammas else None
    fmt = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
    if args.fig == 2:
        cfg = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, seed=seed,
                              mode="min", jobs=args.jobs)
        rows = ln.relative_expansion_surface(args.grid, args.numerical, cfg, gammas)
        fields = ["gamma1", "gamma2", "conjectured"] + (["numerical"] if args.numerical else [])
        buf = io.StringIO()
        if fmt == "csv":
            buf.write(",".join(fields) + "\n")
            for r in rows:
                buf.write(",".join(f"{r[f]:.12g}" for f in fields) + "\n")
            text = buf.getvalue()
        else:
            text = None
            payload = {"rows": rows, "kind": co.CONJECTURED,
                       "manifest_hash": manifest_hash(args.argv, seed, config)}
    else:
        if args.points:
            samples = []
            for k, trip in enumerate(args.points.split(";")):
                p, g1, g2 = _floats(trip)
                cell = int(np.random.SeedSequence([seed, k]).generate_state(1)[0])
                samples.append(ln.region_sample(p, g1, g2, args.ensembles, cell))
        else:
            p_list = _floats(args.p)
            samples = ln.sweep_region(args.grid, p_list, args.ensembles, seed, gammas, args.jobs)
        if fmt == "csv":
            buf = io.StringIO()
            ln.write_region_csv(samples, buf)
            text = buf.getvalue()
        else:
            text = None
            payload = {"rows": [s.row() for s in samples], "metadata": ln.region_metadata(),
                       "manifest_hash": manifest_hash(args.argv, seed, config)}
    timings = {"total_seconds": round(time.perf_counter() - t0, 3)}
    if text is not None:
        if args.out:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        emit_json(payload, args.out)
    if args.out:
        write_manifest(args.out, args.argv, seed, config, timings)
    return 0


# -------------------------------------------------------------- verify


def cmd_verify(args):
    seed = resolve_seed(args.seed)
    results = run_suite(args.suite, args.trials, seed)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAIL if failed else 0


# ---------------------------------------------------------------- nogo


def cmd_nogo(args):
    seed = resolve_seed(args.seed)
    ch = parse_channel(args.channel)
    eps = _floats(args.eps) if args.eps else [10.0 ** -k for k in range(2, 7)]
    report = nogo_ladder(ch, eps, seed)
    report["channel"] = args.channel
    report["manifest_hash"] = manifest_hash(args.argv, seed, {"eps": eps})
    emit_json(report, args.out)
    return 0


# ----------------------------------------------------------------- bkm


def _read_matrix(path):
    ops = read_kraus_json(path) if str(path).endswith(".json") else None
    if ops is None or len(ops) != 1:
        raise ParseError(f"{path}: expected a JSON list holding one matrix")
    return ops[0]


def cmd_bkm(args):
    out = {}
    if args.w is not None or args.y is not None:
        if args.w is None or args.y is None:
            raise ParseError("--w and --y go together")
        w, y = _floats(args.w), _floats(args.y)
        if len(w) != 3 or len(y) != 3:
            raise ParseError("--w and --y need three components")
        out["closed_form"] = bkm_qubit(w, y)
        out["spectral"] = bkm_metric(bloch_to_state(w), pauli_operator(y))
    if args.state:
        if not args.x:
            raise ParseError("--state needs --x")
        out["spectral"] = bkm_metric(_read_matrix(args.state), _read_matrix(args.x))
    if not out:
        raise ParseError("give --w/--y or --state/--x")
    emit_json(out, args.out)
    return 0


# --------------------------------------------------------------- main


def build_parser():
    ap = argparse.ArgumentParser(prog="qchan", description=__doc__)
    ap.add_argument("--version", action="version", version=f"qchan {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, jobs=True):
        p.add_argument("--seed", type=int, default=None,
                       help="random seed (falls back to $QCHAN_SEED, then 0)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        if jobs:
            p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("coeff", help="closed-form, bound and numerical coefficients")
    p.add_argument("--n", required=True, help="numerator channel spec")
    p.add_argument("--m", default=None, help="denominator channel spec (default identity)")
    p.add_argument("--which", choices=("contraction", "expansion", "both"), default="both")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--eps", type=float, default=None, help="dephasing comparison parameter")
    common(p)
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("region", help="less-noisy region and figure data")
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--p", default="0.6,0.75,0.9", help="comma-separated p values")
    p.add_argument("--gammas", default=None, help="explicit comma-separated gamma axis")
    p.add_argument("--points", default=None, help="explicit 'p,g1,g2;p,g1,g2' triples")
    p.add_argument("--ensembles", type=int, default=0, help="Holevo samples per cell")
    p.add_argument("--fig", type=int, choices=(2, 3, 4), default=None)
    p.add_argument("--numerical", action="store_true", help="fig 2: add optimizer estimates")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("verify", help="run property suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("nogo", help="vanishing-expansion witness ladder")
    p.add_argument("--channel", required=True)
    p.add_argument("--eps", default=None, help="comma-separated eps values")
    common(p, jobs=False)
    p.set_defaults(func=cmd_nogo)

    p = sub.add_parser("bkm", help="evaluate the BKM metric")
    p.add_argument("--state", default=None, help="JSON matrix file")
    p.add_argument("--x", default=None, help="JSON matrix file")
    p.add_argument("--w", default=None, help="Bloch vector 'x,y,z'")
    p.add_argument("--y", default=None, help="perturbation vector 'x,y,z'")
    common(p, jobs=False)
    p.set_defaults(func=cmd_bkm)
    return ap


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.argv = ["qchan"] + argv
    try:
        return args.func(args)
    except AssumptionFailed as exc:
        print(f"assumption failed: {'; '.join(exc.failures)}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (ParseError, QchanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
