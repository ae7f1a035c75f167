"""Command-line pipeline over net files.

Exit codes: 0 success, 1 failed check, 2 input error, 3 numerical failure.
"""

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .exceptions import GeometryError, IsonetsError, NetFileError, SingularLambda
from .meshes import export_mesh
from .netfile import NetFile, load_net, save_net
from .projective import AffineChart
from .quaternions import as_quat, complex_to_cj
from .special import (
    HolomorphicNet,
    catenoid_pair,
    ccousin_coords,
    gauss_map_mobius,
    integrate_H,
    poincare_ball,
)
from .suites import (
    christoffel_suite,
    darboux_suite,
    horospherical_suite,
    isothermic_suite,
    permutability_report,
    t_laws_suite,
)
from .transforms import (
    build_connection,
    christoffel,
    darboux_riccati,
    goursat,
    integrate_T,
    pair_from_nets,
    t_transform,
)


def _quat_arg(text):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("quaternion needs four comma-separated floats")
    return np.array(parts)


def _lambda_list(text):
    return [float(x) for x in text.split(",")]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="isonets",
        description="Transformations of discrete isothermic nets and discrete "
                    "minimal / horospherical nets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate seed nets")
    gen_sub = gen.add_subparsers(dest="what", required=True)
    cat = gen_sub.add_parser("catenoid", help="exponential Christoffel pair")
    cat.add_argument("--n", type=int, default=20, help="points per period")
    cat.add_argument("--irg", type=int, default=10)
    cat.add_argument("--jrg", type=int, default=10)
    cat.add_argument("--out-g", default="g.net")
    cat.add_argument("--out-h", default="h.net")

    chr_ = sub.add_parser("christoffel", help="Christoffel transform of a net file")
    chr_.add_argument("net")
    chr_.add_argument("--out", required=True)
    chr_.add_argument("--seed", type=_quat_arg, default=np.zeros(4))

    dar = sub.add_parser("darboux", help="Darboux transform via the Riccati system")
    dar.add_argument("net")
    dar.add_argument("--lambda", dest="lam", type=float, required=True)
    dar.add_argument("--init", type=_quat_arg, required=True)
    dar.add_argument("--dual", help="optional explicit dual net fixing the (a,b) scale")
    dar.add_argument("--out", required=True)

    tt = sub.add_parser("ttransform", help="Calapso transform at a spectral parameter")
    tt.add_argument("net")
    tt.add_argument("--lambda", dest="lam", type=float, required=True)
    tt.add_argument("--dual", help="optional explicit dual net fixing the (a,b) scale")
    tt.add_argument("--out", required=True)

    gou = sub.add_parser("goursat", help="Goursat transform into a new chart")
    gou.add_argument("net")
    gou.add_argument("--inf", type=_quat_arg, required=True,
                     help="affine point sent to infinity by the new chart")
    gou.add_argument("--zero", type=_quat_arg, default=None,
                     help="affine point sent to zero (default: old infinity)")
    gou.add_argument("--out", required=True)

    cou = sub.add_parser("cousins", help="reproduce the catenoid-cousin sweep")
    cou.add_argument("--lambda-list", type=_lambda_list, required=True)
    cou.add_argument("--n", type=int, default=20)
    cou.add_argument("--irg", type=int, default=10)
    cou.add_argument("--jrg", type=int, default=10)
    cou.add_argument("--out-dir", required=True)
    cou.add_argument("--format", choices=("obj", "ply"), default="obj")
    cou.add_argument("--no-check", action="store_true",
                     help="skip the per-lambda invariant checks")

    chk = sub.add_parser("check", help="run an invariant suite on net files")
    chk.add_argument("net")
    chk.add_argument("--against",
                     help="second net: the dual (christoffel, horospherical) or "
                          "the transformed net (darboux)")
    chk.add_argument("--dual",
                     help="explicit dual net fixing the (a,b) scale for the "
                          "darboux / t-laws / permutability suites")
    chk.add_argument("--suite", required=True,
                     choices=("isothermic", "christoffel", "darboux", "t-laws",
                              "permutability", "horospherical"))
    chk.add_argument("--lambda", dest="lam", type=float, default=0.1)
    chk.add_argument("--mu", type=float, default=0.25)
    chk.add_argument("--init", type=_quat_arg, default=None)
    chk.add_argument("--json", dest="json_path")
    return parser


def _load_affine(path):
    return load_net(path).as_affine()


def _cmd_gen(args):
    g, h = catenoid_pair(args.n, args.irg, args.jrg)
    save_net(args.out_g, NetFile.from_complex_grid(g.window, g.values,
                                                   meta={"kind": "catenoid-g", "n": args.n}))
    save_net(args.out_h, NetFile.from_complex_grid(h.window, h.values,
                                                   meta={"kind": "catenoid-h", "n": args.n}))
    print(f"wrote {args.out_g} and {args.out_h}")
    return 0


def _cmd_christoffel(args):
    net = _load_affine(args.net)
    pair = christoffel(net, seed=args.seed)
    save_net(args.out, NetFile.from_affine(pair.f_star))
    print(f"wrote {args.out} (closure residual {pair.closure_residual:.3e})")
    return 0


def _pair_from_args(args):
    net = _load_affine(args.net)
    if getattr(args, "dual", None):
        return pair_from_nets(net, _load_affine(args.dual))
    return christoffel(net)


def _cmd_darboux(args):
    pair = _pair_from_args(args)
    hat = darboux_riccati(pair, args.lam, args.init)
    save_net(args.out, NetFile.from_affine(hat.to_affine(pair.f.chart), lam=args.lam))
    print(f"wrote {args.out} (riccati residual {hat.residual:.3e})")
    return 0


def _cmd_ttransform(args):
    pair = _pair_from_args(args)
    frame = integrate_T(build_connection(pair), args.lam)
    image = t_transform(pair.f, frame)
    save_net(args.out, NetFile.from_projective(image, lam=args.lam))
    print(f"wrote {args.out} (face residual {frame.residual:.3e})")
    return 0


def _cmd_goursat(args):
    net = _load_affine(args.net)
    pair = christoffel(net)
    vinf = net.chart.lift(as_quat(args.inf))
    v0 = net.chart.lift(as_quat(args.zero)) if args.zero is not None else net.chart.vinf
    new_chart = AffineChart.from_points(v0, vinf)
    moved = goursat(pair, new_chart)
    save_net(args.out, NetFile.from_affine(moved.f_star))
    print(f"wrote {args.out}")
    return 0


def _cousin_meshes(gz_pair, lam, out_dir, fmt, check):
    g, h = gz_pair
    frame = integrate_H(g, h, lam)
    gauss = complex_to_cj(gauss_map_mobius(frame, g))
    cousin = ccousin_coords(frame)
    ball = poincare_ball(cousin)
    tag = format(lam, "g")
    files = []
    for name, points in (("gauss", gauss), ("cousin", cousin), ("ball", ball)):
        path = Path(out_dir) / f"{name}_lam{tag}.{fmt}"
        export_mesh(points, path, fmt)
        files.append(path)
    if check:
        rep = horospherical_suite(g, h, lam)
        if not rep.ok:
            return files, rep
    return files, None


def _cmd_cousins(args):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    g, h = catenoid_pair(args.n, args.irg, args.jrg)
    failures = []
    with ThreadPoolExecutor(max_workers=4) as pool:
        futures = {
            pool.submit(_cousin_meshes, (g, h), lam, out_dir, args.format,
                        not args.no_check): lam
            for lam in args.lambda_list
        }
        for fut, lam in futures.items():
            files, rep = fut.result()
            print(f"lambda={lam:g}: " + ", ".join(p.name for p in files))
            if rep is not None:
                failures.append((lam, rep))
    if failures:
        for lam, rep in failures:
            print(f"-- invariant failures at lambda={lam:g} --")
            print(rep.to_text())
        return 1
    return 0


def _cmd_check(args):
    suite = args.suite
    dual = _load_affine(args.dual) if args.dual else None
    if suite == "isothermic":
        rep = isothermic_suite(_load_affine(args.net))
    elif suite == "christoffel":
        if not args.against:
            raise NetFileError("christoffel suite needs --against <dual net>")
        rep = christoffel_suite(_load_affine(args.net), _load_affine(args.against))
    elif suite == "darboux":
        if not args.against:
            raise NetFileError("darboux suite needs --against <transformed net>")
        rep = darboux_suite(_load_affine(args.net), _load_affine(args.against),
                            args.lam, dual=dual)
    elif suite == "t-laws":
        rep = t_laws_suite(_load_affine(args.net), args.lam, dual=dual)
    elif suite == "permutability":
        rep = permutability_report(_load_affine(args.net), args.lam, args.mu,
                                   dual=dual, init=args.init)
    else:  # horospherical
        if not args.against:
            raise NetFileError("horospherical suite needs --against <dual net>")
        gfile = load_net(args.net)
        hfile = load_net(args.against)
        g = HolomorphicNet(gfile.window, gfile.as_complex_grid())
        h = HolomorphicNet(hfile.window, hfile.as_complex_grid())
        rep = horospherical_suite(g, h, args.lam,
                                  p0=None if args.init is None else args.init)
    print(rep.to_text())
    if args.json_path:
        with open(args.json_path, "w") as fh:
            fh.write(rep.to_json() + "\n")
    return 0 if rep.ok else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "christoffel": _cmd_christoffel,
        "darboux": _cmd_darboux,
        "ttransform": _cmd_ttransform,
        "goursat": _cmd_goursat,
        "cousins": _cmd_cousins,
        "check": _cmd_check,
    }
    try:
        return handlers[args.command](args)
    except SingularLambda as exc:
        print(f"error: {exc}" + (f" (index {exc.index})" if exc.index else ""),
              file=sys.stderr)
        return 3
    except (NetFileError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GeometryError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except IsonetsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
