"""Command-line front end: spec JSON in, CSV/JSON artifacts out.

Exit codes: 0 success, 1 domain error (JSON diagnostics on stderr), 2 usage
error.  All floating-point CSV output is fixed to 17 significant digits so
identical argv + seed produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import activations
from .blend import blend_activations, build_tanh_approx
from .bump import BumpSpec, build_bump, iterate_f, solve_tangency, verify_bump
from .complexcurves import PoleLattice, blowup_curve, curve_decay_profile, sigmoid_pole, three_layer_sigmoid_neuron
from .expr import EvalFlag, ScalarExpr, eval_grid, to_text
from .fourier import even_schwartz_check, fourier_transform, ft_decay_test, trig_sum_lower
from .growth import Curve, OrderFailure, classify_growth, order_by_growth
from .indep import numeric_independent
from .network import NetworkStructure, ParamVector, embed_params, forward_grid, leading_order_at_zero
from .util import fmt17, write_csv
from .zeroset import enumerate_zero_subspaces, in_minimal_zero_set, predict_three_layer_tanh, predict_two_layer


class DomainError(Exception):
    pass


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _load_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DomainError(f"spec file not found: {path}")
    except json.JSONDecodeError as exc:
        raise DomainError(f"malformed spec {path}: {exc.msg} at line {exc.lineno} column {exc.colno}")


def _expr(text: str) -> ScalarExpr:
    try:
        return activations.resolve(text)
    except Exception as exc:
        raise DomainError(f"cannot parse expression {text!r}: {exc}")


def _structure(spec: dict) -> NetworkStructure:
    try:
        return NetworkStructure(int(spec["d"]), tuple(int(m) for m in spec["widths"]),
                                bool(spec.get("bias", True)))
    except (KeyError, ValueError) as exc:
        raise DomainError(f"bad network structure: {exc}")


def _network(spec: dict) -> tuple[NetworkStructure, ScalarExpr, ParamVector]:
    if spec.get("kind") != "network":
        raise DomainError('spec must have "kind": "network"')
    s = _structure(spec)
    sigma = _expr(spec.get("sigma", "tanh"))
    theta = ParamVector(s, np.asarray(spec["theta"], dtype=float))
    return s, sigma, theta


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v != ""]


# -- subcommand handlers -------------------------------------------------------

def cmd_bump_solve(args) -> int:
    lam, level = solve_tangency(_expr(args.rho), (args.bracket[0], args.bracket[1]))
    _emit({"lambda": lam, "L": level})
    return 0


def _bump_spec_from_args(args) -> BumpSpec:
    rho = _expr(args.rho)
    plateau = tuple(args.plateau)
    guard = tuple(args.guard)
    if args.sub_tangent and args.sub_tangent > 1.0:
        return BumpSpec.sub_tangent(rho, shrink=args.sub_tangent, n=args.n, plateau=plateau, guard=guard)
    return BumpSpec.tangent(rho, n=args.n, plateau=plateau, guard=guard)


def cmd_bump_build(args) -> int:
    spec = _bump_spec_from_args(args)
    xi = build_bump(spec)
    if args.out:
        xs = np.linspace(args.window[0], args.window[1], args.grid)
        rows = []
        for x in xs:
            fvals = [iterate_f(spec.rho, spec.lam, n, float(x)) for n in range(1, min(spec.n, 6) + 1)]
            fvals = [v if not isinstance(v, EvalFlag) else float("inf") for v in fvals]
            xival = eval_grid(xi, np.array([x]))[0]
            rows.append((float(x), *fvals, float(xival)))
        header = ["x"] + [f"f_{n}" for n in range(1, min(spec.n, 6) + 1)] + ["xi"]
        write_csv(args.out, header, rows, schema="bump-iterates")
    _emit({"lambda": spec.lam, "L": spec.level, "n": spec.n, "expr": to_text(xi)})
    return 0


def cmd_bump_verify(args) -> int:
    spec = _bump_spec_from_args(args)
    xi = build_bump(spec)
    a, b = spec.plateau
    a1, b1 = spec.guard
    report = verify_bump(xi, a, b, a1, b1, eps=args.eps, s_max=args.smax, grid=args.grid)
    _emit({
        "ok": report.ok,
        "plateau_dev": report.plateau_dev,
        "tail_sup": report.tail_sup,
        "min_value": report.min_value,
        "window": report.window,
        "deriv_sup": {str(k): v for k, v in report.deriv_sup.items()},
        "checks": report.checks,
    })
    return 0


def cmd_blend_mix(args) -> int:
    st = blend_activations(_expr(args.sigma), _expr(args.sigma0), _expr(args.xi))
    if args.out:
        xs = np.linspace(args.window[0], args.window[1], args.grid)
        vals = eval_grid(st, xs)
        write_csv(args.out, ["x", "blend"], zip(map(float, xs), map(float, vals)), schema="blend-mix")
    _emit({"expr": to_text(st)})
    return 0


def cmd_blend_tanh_approx(args) -> int:
    approx = build_tanh_approx(args.alpha)
    xs = np.linspace(args.window[0], args.window[1], args.grid)
    vals = eval_grid(approx.expr, xs)
    target = np.tanh(xs)
    sup = float(np.max(np.abs(vals - target)))
    if args.out:
        write_csv(args.out, ["x", "sigma_tilde", "tanh"],
                  zip(map(float, xs), map(float, vals), map(float, target)),
                  schema=f"tanh-approx alpha={fmt17(args.alpha)}")
    _emit({"alpha": args.alpha, "sup_distance": sup})
    return 0


def cmd_net_eval(args) -> int:
    s, sigma, theta = _network(_load_spec(args.spec))
    xs = np.asarray([_floats(args.x)] if s.d > 1 else _floats(args.x), dtype=float)
    out = forward_grid(s, sigma, theta, xs)
    payload = {"value": [float(v) for v in out.value]}
    if out.flag:
        payload["flag"] = {"kind": out.flag[0], "layer": out.flag[1]}
    if args.layers:
        payload["layers"] = [[[float(v) for v in row] for row in h] for h in out.layers]
    _emit(payload)
    return 0


def cmd_net_embed(args) -> int:
    spec = _load_spec(args.spec)
    if spec.get("kind") != "embedding":
        raise DomainError('spec must have "kind": "embedding"')
    small = _structure(spec["small"])
    big = _structure(spec["big"])
    emb = embed_params(small, big, spec["assignment"], spec["split"])
    payload = {"rank": int(np.linalg.matrix_rank(emb.matrix))}
    if "theta" in spec:
        theta_s = ParamVector(small, np.asarray(spec["theta"], dtype=float))
        payload["theta_big"] = [float(v) for v in emb.apply(theta_s).flat]
    _emit(payload)
    return 0


def cmd_net_leading_order(args) -> int:
    out = leading_order_at_zero(_expr(args.expr), s_max=args.smax, tol=args.tol)
    if out.found:
        _emit({"order": out.order, "coeff": out.coeff})
    else:
        _emit({"zero_to_order": out.zero_to_order})
    return 0


def cmd_zero_check(args) -> int:
    s, sigma, theta = _network(_load_spec(args.spec))
    out = in_minimal_zero_set(s, sigma, theta, tol=args.tol, probe=(-2.0, 2.0, args.grid))
    _emit({"in_zero_set": out.in_zero_set, "certificate": _jsonable(out.certificate)})
    return 0


def cmd_zero_enumerate(args) -> int:
    spec = _load_spec(args.spec)
    s = _structure(spec)
    subs = enumerate_zero_subspaces(s)
    _emit({"count": len(subs), "subspaces": [
        {"description": sub.description,
         "constraints": [[float(v) for v in row] for row in np.atleast_2d(sub.constraints)]
         if np.asarray(sub.constraints).size else []}
        for sub in subs
    ]})
    return 0


def cmd_zero_predict(args) -> int:
    spec = _load_spec(args.spec)
    kind = spec.get("kind")
    if kind == "two-layer":
        v = predict_two_layer(spec["variant"], spec["w"], spec.get("b"))
    elif kind == "three-layer-tanh":
        v = predict_three_layer_tanh(spec["W1"], spec["W2"])
    else:
        raise DomainError(f"unknown predict kind {kind!r}")
    _emit({"independent": v.predicted, "certificate": _jsonable(v.certificate),
           "criterion": v.criterion})
    return 0


def cmd_indep_test(args) -> int:
    spec = _load_spec(args.spec)
    if spec.get("kind") != "family":
        raise DomainError('spec must have "kind": "family"')
    fns = []
    for entry in spec["functions"]:
        if isinstance(entry, str):
            fns.append(_expr(entry))
        elif isinstance(entry, dict) and "network" in entry:
            s, sigma, theta = _network(entry["network"])
            layer = int(entry["layer"])
            xs_probe = None

            def neuron(idx, s=s, sigma=sigma, theta=theta, layer=layer):
                def f(xs):
                    return forward_grid(s, sigma, theta, np.asarray(xs)).layers[layer][:, idx]
                return f

            indices = entry.get("indices", list(range(s.widths[layer - 1])))
            fns.extend(neuron(i) for i in indices)
        else:
            raise DomainError(f"bad family entry: {entry!r}")
    interval = tuple(spec.get("interval", (-2.0, 2.0)))
    out = numeric_independent(fns, interval=interval, tol=args.tol)
    _emit({"independent": out.independent, "min_singular_value": out.min_singular_value,
           "certificate": _jsonable(out.certificate)})
    return 0


def cmd_fourier_transform(args) -> int:
    f = _expr(args.f)
    if args.xi:
        xis = np.asarray(_floats(args.xi))
    else:
        lo, hi, count = args.xi_range
        xis = np.linspace(lo, hi, int(count))
    out = fourier_transform(f, xis)
    if args.out:
        base = np.abs(out.values[0]) if abs(out.values[0]) > 0 else 1.0
        rows = [(float(xi), float(v.real), float(v.imag), float(abs(v) / base))
                for xi, v in zip(out.xis, out.values)]
        write_csv(args.out, ["xi", "re", "im", "ratio"], rows, schema="fourier-transform")
    _emit({"tail_bound": out.tail_bound, "window": out.window,
           "values": [[float(v.real), float(v.imag)] for v in out.values]})
    return 0


def cmd_fourier_decay(args) -> int:
    result = ft_decay_test(_expr(args.f), args.wt, args.w)
    flags = even_schwartz_check(_expr(args.f))
    _emit({"passes": result if isinstance(result, bool) else None,
           "inconclusive": result == "inconclusive",
           "flags": sorted(flags.flags), "lambda": flags.lam})
    return 0


def cmd_fourier_trig(args) -> int:
    bound = trig_sum_lower(_floats(args.a), _floats(args.b))
    _emit({"lower_bound": bound})
    return 0


def cmd_curves_poles(args) -> int:
    rows = [(q, *_c(sigmoid_pole(args.w, args.b, q))) for q in range(args.qmin, args.qmax + 1)]
    if args.out:
        write_csv(args.out, ["q", "re", "im"], rows, schema="sigmoid-poles")
    _emit({"poles": [[int(q), re, im] for q, re, im in rows]})
    return 0


def _c(z: complex) -> tuple[float, float]:
    return float(z.real), float(z.imag)


def _parse_params(text: str) -> list[tuple[float, float]]:
    out = []
    for chunk in text.split(";"):
        w, b = chunk.split(",")
        out.append((float(w), float(b)))
    return out


def cmd_curves_blowup(args) -> int:
    params = _parse_params(args.params)
    bc = blowup_curve(params, args.k, args.sign, tmax=args.tmax)
    ts = np.linspace(0.0, args.tmax, args.grid)
    vals = bc.target_values(ts)
    if args.out:
        rows = [(float(t), *_c(bc.curve.map(float(t))), float(v.real), float(v.imag))
                for t, v in zip(ts, vals)]
        write_csv(args.out, ["t", "re_gamma", "im_gamma", "re_sigma", "im_sigma"], rows,
                  schema="blowup-curve")
    _emit({"pole": list(_c(bc.pole)), "shift": bc.shift, "disk_radius": bc.disk_radius})
    return 0


def cmd_curves_profile(args) -> int:
    spec = _load_spec(args.spec)
    if spec.get("kind") != "profile":
        raise DomainError('spec must have "kind": "profile"')
    params = [(float(w), float(b)) for w, b in spec["first_layer"]]
    bc = blowup_curve(params, int(spec.get("target", 0)), int(spec.get("sign", 1)),
                      tmax=float(spec.get("tmax", 100.0)))
    neurons = [three_layer_sigmoid_neuron(row, b2, params)
               for row, b2 in zip(spec["W2"], spec["b2"])]
    ts = np.linspace(0.0, bc.curve.tmax, args.grid)
    guards = [PoleLattice(w, b) for w, b in params[bc.index + 1:]]
    prof = curve_decay_profile(neurons, bc.curve, ts, pole_guards=guards)
    if args.out:
        header = ["t"] + [f"log_abs_{i}" for i in range(len(neurons))]
        write_csv(args.out, header, prof.rows(), schema="decay-profile")
    _emit({"flags": [list(f) for f in prof.flags], "rows": len(ts)})
    return 0


def cmd_growth_classify(args) -> int:
    verdict = classify_growth(_expr(args.f), Curve.real_line(), tmax=args.tmax)
    if args.out:
        write_csv(args.out, ["t", "l", "gap_or_sign", "log_ratio_or_mag"],
                  [tuple(map(float, row)) for row in verdict.evidence], schema="growth-evidence")
    _emit({"class": verdict.cls})
    return 0


def cmd_growth_order(args) -> int:
    from .growth import default_ladder, growth_evidence

    fs = [_expr(t) for t in args.fs.split(";")]
    line = Curve.real_line()
    out = order_by_growth(fs, line, tmax=args.tmax)
    if args.out:
        ladder = default_ladder(line, tmax=args.tmax if args.tmax else 50.0)
        header = ["t", "l"] + [f"log_abs_{i}" for i in range(len(fs))]
        write_csv(args.out, header, growth_evidence(fs, line, ladder), schema="growth-order-evidence")
    if isinstance(out, OrderFailure):
        _emit({"ordered": False, "pair": list(out.pair), "reason": out.reason})
    else:
        _emit({"ordered": True, "order": out})
    return 0


def _jsonable(obj):
    if obj is None or isinstance(obj, (str, int, float, bool)):
        return obj
    if isinstance(obj, (tuple, list)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return str(obj)


# -- argument grammar -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="neuronlab",
                                description="Numerical neuron-independence toolkit")

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--grid", type=int, default=401)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--out", type=str, default=None)

    top = p.add_subparsers(dest="group", required=True)

    bump = top.add_parser("bump").add_subparsers(dest="cmd", required=True)
    sp = bump.add_parser("solve")
    sp.add_argument("--rho", required=True)
    sp.add_argument("--bracket", type=float, nargs=2, default=(1.000001, 8.0))
    common(sp)
    sp.set_defaults(fn=cmd_bump_solve)
    for name, fn in (("build", cmd_bump_build), ("verify", cmd_bump_verify)):
        sp = bump.add_parser(name)
        sp.add_argument("--rho", default="exp_square")
        sp.add_argument("--n", type=int, default=12)
        sp.add_argument("--plateau", type=float, nargs=2, default=(-1.0, 1.0))
        sp.add_argument("--guard", type=float, nargs=2, default=(-1.5, 1.5))
        sp.add_argument("--sub-tangent", type=float, default=0.0,
                        help="shrink factor > 1 selects a sub-tangent level")
        sp.add_argument("--window", type=float, nargs=2, default=(-4.0, 4.0))
        if name == "verify":
            sp.add_argument("--eps", type=float, default=0.05)
            sp.add_argument("--smax", type=int, default=0)
        common(sp)
        sp.set_defaults(fn=fn)

    blend = top.add_parser("blend").add_subparsers(dest="cmd", required=True)
    sp = blend.add_parser("mix")
    sp.add_argument("--sigma", required=True)
    sp.add_argument("--sigma0", required=True)
    sp.add_argument("--xi", required=True)
    sp.add_argument("--window", type=float, nargs=2, default=(-3.0, 3.0))
    common(sp)
    sp.set_defaults(fn=cmd_blend_mix)
    sp = blend.add_parser("tanh-approx")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--window", type=float, nargs=2, default=(-3.0, 3.0))
    common(sp)
    sp.set_defaults(fn=cmd_blend_tanh_approx)

    net = top.add_parser("net").add_subparsers(dest="cmd", required=True)
    sp = net.add_parser("eval")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--x", required=True, help="comma-separated input(s)")
    sp.add_argument("--layers", action="store_true")
    common(sp)
    sp.set_defaults(fn=cmd_net_eval)
    sp = net.add_parser("embed")
    sp.add_argument("--spec", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_net_embed)
    sp = net.add_parser("leading-order")
    sp.add_argument("--expr", required=True)
    sp.add_argument("--smax", type=int, default=12)
    common(sp)
    sp.set_defaults(fn=cmd_net_leading_order)

    zero = top.add_parser("zero").add_subparsers(dest="cmd", required=True)
    for name, fn, needs_spec in (("check", cmd_zero_check, True),
                                 ("enumerate", cmd_zero_enumerate, True),
                                 ("predict", cmd_zero_predict, True)):
        sp = zero.add_parser(name)
        sp.add_argument("--spec", required=True)
        if name == "check":
            sp.set_defaults(tol=1e-9)
        common(sp)
        if name == "check":
            sp.set_defaults(grid=64)
        sp.set_defaults(fn=fn)

    indep = top.add_parser("indep").add_subparsers(dest="cmd", required=True)
    sp = indep.add_parser("test")
    sp.add_argument("--spec", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_indep_test)

    fourier = top.add_parser("fourier").add_subparsers(dest="cmd", required=True)
    sp = fourier.add_parser("transform")
    sp.add_argument("--f", required=True)
    sp.add_argument("--xi", type=str, default=None)
    sp.add_argument("--xi-range", type=float, nargs=3, default=(0.0, 8.0, 33),
                    metavar=("LO", "HI", "N"))
    common(sp)
    sp.set_defaults(fn=cmd_fourier_transform)
    sp = fourier.add_parser("decay")
    sp.add_argument("--f", required=True)
    sp.add_argument("--wt", type=float, required=True)
    sp.add_argument("--w", type=float, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_fourier_decay)
    sp = fourier.add_parser("trig")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_fourier_trig)

    curves = top.add_parser("curves").add_subparsers(dest="cmd", required=True)
    sp = curves.add_parser("poles")
    sp.add_argument("--w", type=float, required=True)
    sp.add_argument("--b", type=float, default=0.0)
    sp.add_argument("--qmin", type=int, default=-2)
    sp.add_argument("--qmax", type=int, default=2)
    common(sp)
    sp.set_defaults(fn=cmd_curves_poles)
    sp = curves.add_parser("blowup")
    sp.add_argument("--params", required=True, help='semicolon-separated "w,b" pairs')
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--sign", type=int, default=1, choices=(-1, 1))
    sp.add_argument("--tmax", type=float, default=100.0)
    common(sp)
    sp.set_defaults(fn=cmd_curves_blowup)
    sp = curves.add_parser("profile")
    sp.add_argument("--spec", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_curves_profile)

    growth = top.add_parser("growth").add_subparsers(dest="cmd", required=True)
    sp = growth.add_parser("classify")
    sp.add_argument("--f", required=True)
    sp.add_argument("--tmax", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_growth_classify)
    sp = growth.add_parser("order")
    sp.add_argument("--fs", required=True, help="semicolon-separated expressions")
    sp.add_argument("--tmax", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_growth_order)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None:
        np.random.seed(args.seed % 2**32)
    try:
        return args.fn(args)
    except DomainError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
