"""tropipm command line.

Exit codes: 0 success, 1 a checked property failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import experiments as ex
from .cex import build_cex, build_tcex, instantiate
from .ipm import DEFAULT_PRECISION

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def rational(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}")


def rational_list(s: str) -> list:
    return [rational(p) for p in s.split(",") if p.strip()]


def interval(s: str) -> tuple:
    parts = rational_list(s)
    if len(parts) != 2 or parts[0] > parts[1]:
        raise argparse.ArgumentTypeError("interval must be lo,hi with lo <= hi")
    return tuple(parts)


def lambda_grid(s: str) -> list:
    """lo:hi:step or a comma list."""
    if ":" in s:
        lo, hi, step = (rational(p) for p in s.split(":"))
        return ex.grid(lo, hi, step)
    return rational_list(s)


def _write(path, text: str):
    Path(path).write_text(text)


def _emit_json(data: dict, out):
    text = json.dumps(data, indent=1, sort_keys=True) + "\n"
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text)


def cmd_troppath(a) -> int:
    if a.n < 1 or a.step <= 0:
        raise ValueError("need n >= 1 and step > 0")
    text = ex.troppath_csv(a.n, a.lambda_max, a.step)
    if a.out:
        _write(a.out, text)
        if a.figure:
            from .plotting import plot_csv

            plot_csv(a.out, "path2d" if a.n == 2 else "path3d-projection", a.figure)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gamma(a) -> int:
    lo, hi = a.interval if a.interval else (None, None)
    data = ex.gamma_summary(a.n, lo, hi)
    if a.json:
        _emit_json(data, None)
    else:
        for k, v in data["canonical"].items():
            print(f"gamma{k} = {v}")
        if lo is not None:
            print(f"gamma[{lo},{hi}] = {data['gamma']}")
    n = a.n
    c = data["canonical"]
    ok = (c["[0,u_n-1]"], c["[0,2u_n-1]"], c["[0,2u_n]"]) == (2 ** (n - 1) - 1, 2**n - 2, 2**n - 1)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_converge(a) -> int:
    if any(t <= 1 for t in a.t):
        raise ValueError("every t must exceed 1")
    rep = ex.run_convergence(a.n, a.t, a.lambdas, a.prec, with_delta=a.delta)
    data = rep.to_json()
    if a.out:
        base = Path(a.out)
        _write(base.with_suffix(".json"), json.dumps(data, indent=1, sort_keys=True) + "\n")
        csv_path = base.with_suffix(".csv")
        _write(csv_path, rep.to_csv())
        if a.figure:
            from .plotting import plot_csv

            plot_csv(csv_path, "convergence", a.figure)
    else:
        _emit_json(data, None)
    for t in rep.t_list:
        print(f"t={t}: max deviation {rep.max_deviation(t):.6g}, fitted Gamma {rep.gamma_hat(t):.6g}", file=sys.stderr)
    return EXIT_OK if rep.consistent else EXIT_FAIL


def cmd_ipm(a) -> int:
    if a.t <= 1:
        raise ValueError("t must exceed 1")
    rep, traj, _ = ex.run_ipm(a.n, a.t, a.sigma, a.prec, a.target_exp, a.tube_radius)
    data = rep.to_json()
    if a.out:
        base = Path(a.out)
        csv_path = base.with_suffix(".csv")
        _write(csv_path, traj.to_csv())
        _write(base.with_suffix(".json"), json.dumps(data, indent=1, sort_keys=True) + "\n")
        if a.figure:
            from .plotting import plot_trajectory, read_csv

            header, rows = read_csv(csv_path)
            plot_trajectory(header, rows, a.figure, float(a.t))
    else:
        _emit_json(data, None)
    status = "certified" if rep.certified else "uncertified"
    print(f"iterations {rep.iterations} vs gamma {rep.gamma_reference} ({status})", file=sys.stderr)
    return EXIT_OK if rep.certified and rep.verdict else EXIT_FAIL


def cmd_faces(a) -> int:
    if not 1 <= a.n <= 5:
        print("faces: n must lie in 1..5", file=sys.stderr)
        return EXIT_USAGE
    data = ex.run_faces(a.n, a.s)
    _emit_json(data, a.out)
    ok = data["is_cube"] and data["simplex_chain_disjoint"] and all(p["disjoint"] for p in data["pairing"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_plot(a) -> int:
    from .plotting import plot_csv

    plot_csv(a.input, a.kind, a.out)
    return EXIT_OK


def cmd_cex(a) -> int:
    lp = build_cex(a.n)
    data = {"schema_version": ex.SCHEMA_VERSION, "cex": lp.to_json(), "tcex": build_tcex(a.n).to_json()}
    _emit_json(data, a.out)
    if a.s is not None and a.ab:
        _write(a.ab, instantiate(lp, a.s).to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tropipm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("troppath", help="closed-form tropical central path on a lambda grid")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--lambda-max", type=rational, required=True)
    s.add_argument("--step", type=rational, default=Fraction(1))
    s.add_argument("--out")
    s.add_argument("--figure", help="also write an SVG of the path (needs --out)")
    s.set_defaults(func=cmd_troppath)

    s = sub.add_parser("gamma", help="segment counts of the tropical central path")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--interval", type=interval)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_gamma)

    s = sub.add_parser("converge", help="log-limit convergence of the classical central path")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=rational_list, required=True, help="comma list, e.g. 100,1000,10000")
    s.add_argument("--lambdas", type=lambda_grid, default=None, help="lo:hi:step or comma list")
    s.add_argument("--prec", type=int, default=DEFAULT_PRECISION)
    s.add_argument("--delta", action="store_true", help="also estimate the instance deviation from vertices")
    s.add_argument("--out", help="output stem; writes .json and .csv")
    s.add_argument("--figure")
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("ipm", help="predictor-corrector iteration count")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=rational, required=True)
    s.add_argument("--sigma", type=rational, default=Fraction(1, 2))
    s.add_argument("--prec", type=int, default=DEFAULT_PRECISION)
    s.add_argument("--target-exp", type=rational, default=None)
    s.add_argument("--tube-radius", type=rational, default=Fraction(1, 2))
    s.add_argument("--out", help="output stem; writes .json and the trajectory .csv")
    s.add_argument("--figure")
    s.set_defaults(func=cmd_ipm)

    s = sub.add_parser("faces", help="vertices, cube structure and facet disjointness")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--s", type=rational, required=True, help="base with t = s^2")
    s.add_argument("--out")
    s.set_defaults(func=cmd_faces)

    s = sub.add_parser("plot", help="render a CSV to SVG")
    s.add_argument("--input", required=True)
    s.add_argument("--kind", choices=("path2d", "path3d-projection", "convergence"), required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plot)

    s = sub.add_parser("cex", help="dump the symbolic and tropical instance")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--s", type=rational)
    s.add_argument("--ab", help="write the instantiated A b text here (needs --s)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_cex)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "converge" and args.lambdas is None:
        args.lambdas = ex.grid(0, 4, Fraction(1, 2))
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
