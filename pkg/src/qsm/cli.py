"""Command-line front end: compute, scan, cross-check, and emit CSV/JSON.

Subcommands
-----------
``tfim free-energy``   chain free energy / ground energy, optional B scan
``tfim correlation``   Toeplitz correlation determinants up to n_max
``spherical``          saddle-point free energy / ground energy, optional B scan
``oracle tfim-ed``     dense-ED chain oracle vs the closed forms
``oracle spherical-contour``  exact finite-N contour oracle vs the saddle value
``oracle spherical-mc``       sphere Monte Carlo vs the contour oracle
``check``              run the acceptance suite

Exit codes: 0 ok, 1 check failure, 2 usage error, 3 numerical
non-convergence, 4 oracle comparison failure.

Output is CSV by default (``#``-prefixed metadata header, 17-significant-
digit floats, byte-identical for identical configuration) or JSON with the
same schema via ``--format json``.  ``--threads`` (default from
``QSM_THREADS``) fans parameter scans out over a worker pool; results are
ordered by grid index regardless of scheduling.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__, ising_chain, oracles, spherical, toeplitz
from .exceptions import NonConvergence
from .numerics import RandomStream
from .spherical import LatticeSpec, SphericalParams

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3
EXIT_ORACLE_MISMATCH = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _emit(args, command: str, config: dict, columns: list[str], rows: list[tuple]) -> None:
    if args.format == "json":
        payload = {
            "tool": "qsm",
            "version": __version__,
            "command": command,
            "config": config,
            "columns": columns,
            "rows": [[_fmt(v) if isinstance(v, float) else v for v in row] for row in rows],
        }
        text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    else:
        lines = [
            f"# qsm {__version__}",
            f"# command: {command}",
            "# config: " + json.dumps(config, sort_keys=True),
            "# columns: " + ",".join(columns),
            ",".join(columns),
        ]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _default_threads() -> int:
    env = os.environ.get("QSM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _scan_values(args) -> list[float]:
    if args.scan_B is None:
        return [args.B]
    lo, hi, count = args.scan_B
    count = int(count)
    if count < 2:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _map_ordered(func, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def _cmd_tfim_free_energy(args) -> int:
    if args.B < 0 or args.J <= 0 or (args.beta is not None and args.beta <= 0):
        print("error: need J > 0, B >= 0, beta > 0", file=sys.stderr)
        return EXIT_USAGE
    if args.beta is None and not args.ground:
        print("error: give --beta or --ground", file=sys.stderr)
        return EXIT_USAGE
    fields = _scan_values(args)

    def one(b: float) -> tuple:
        if args.ground:
            f, err = ising_chain.ground_energy(args.J, b)
            return (b, math.inf, f, err)
        f, err = ising_chain.free_energy(ising_chain.IsingParams(args.J, b, args.beta))
        return (b, args.beta, f, err)

    rows = _map_ordered(one, fields, args.threads)
    config = {
        "J": args.J, "B": args.B, "beta": args.beta, "ground": args.ground,
        "scan_B": args.scan_B, "threads": args.threads,
    }
    _emit(args, "tfim free-energy", config,
          ["B[energy]", "beta[1/energy]", "f[energy/site]", "err_est[energy/site]"], rows)
    return EXIT_OK


def _cmd_tfim_correlation(args) -> int:
    if args.k < 0 or not (1 <= args.n_max <= toeplitz.DETERMINANT_CAP):
        print(f"error: need k >= 0 and 1 <= n_max <= {toeplitz.DETERMINANT_CAP}", file=sys.stderr)
        return EXIT_USAGE
    coeffs = toeplitz.symbol_fourier_coefficients(args.k, args.n_max - 1)
    import numpy as np
    import scipy.linalg

    center = args.n_max - 1
    full = scipy.linalg.toeplitz(coeffs[center:], coeffs[center::-1])
    limit = toeplitz.szego_limit(args.k)
    rows = []
    for n in range(1, args.n_max + 1):
        sign, logabs = np.linalg.slogdet(full[:n, :n])
        det = float(sign * np.exp(logabs)) if sign != 0 else 0.0
        rows.append((n, det, limit))
    config = {"k_ratio": args.k, "n_max": args.n_max}
    _emit(args, "tfim correlation", config,
          ["n[sites]", "det_value[1]", "szego_limit[1]"], rows)
    return EXIT_OK


def _cmd_spherical(args) -> int:
    if args.J <= 0 or args.B < 0 or args.H < 0 or args.d < 1:
        print("error: need J > 0, B >= 0, H >= 0, d >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.beta is None and not args.ground:
        print("error: give --beta or --ground", file=sys.stderr)
        return EXIT_USAGE
    lattice = None
    if args.mode.startswith("finite"):
        if args.L is None or args.L < 3:
            print("error: finite mode needs --L >= 3", file=sys.stderr)
            return EXIT_USAGE
        lattice = LatticeSpec(args.d, args.L)
    fields = _scan_values(args)

    def one(b: float) -> tuple:
        if args.ground:
            if args.H == 0:
                f = spherical.ground_energy_h_extrapolated(args.J, b, args.d)
                u0 = max(float(args.d), b / (2.0 * args.J))
            else:
                u0, e_min = spherical.ground_saddle(args.J, b, args.H, args.d)
                f = -e_min
            w0 = u0 - args.d
            status = "edge" if w0 == 0.0 else "ok"
            return (b, args.H, math.inf, w0, f, status)
        params = SphericalParams(J=args.J, B=b, H=args.H, d=args.d, beta=args.beta)
        res = spherical.free_energy_finite_beta(params, lattice)
        status = "edge" if res.saddle.edge_case else "ok"
        return (b, args.H, args.beta, res.saddle.w0, res.value, status)

    rows = _map_ordered(one, fields, args.threads)
    config = {
        "J": args.J, "B": args.B, "H": args.H, "d": args.d, "beta": args.beta,
        "ground": args.ground, "mode": args.mode, "L": args.L,
        "scan_B": args.scan_B, "threads": args.threads,
    }
    _emit(args, "spherical", config,
          ["B[energy]", "H[energy]", "beta[1/energy]", "w0[1]", "f[energy/site]", "status"],
          rows)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    rows = []
    failed = False
    if args.oracle == "tfim-ed":
        spec = oracles.ChainSpec(args.L, args.J, args.B, args.beta)
        f_ed = oracles.ed_free_energy(spec)
        f_ref = ising_chain.free_energy(ising_chain.IsingParams(args.J, args.B, args.beta))[0] \
            if args.J > 0 else -math.log(2 * math.cosh(args.beta * args.B)) / args.beta
        gap = abs(f_ed - f_ref)
        status = "pass" if gap < args.tol else "fail"
        rows.append(("free_energy", args.L, args.J, args.B, args.beta,
                     f_ed, f_ref, gap, args.tol, status))
        if args.corr_dist is not None:
            corr_ed = oracles.ed_correlation(spec, 0, args.corr_dist)
            det = toeplitz.correlation_determinant(
                toeplitz.CorrelationQuery(args.B / args.J, args.corr_dist)
            ).det_value
            gap_c = abs(corr_ed - det)
            status_c = "pass" if gap_c < max(args.tol, 1e-2) else "fail"
            rows.append(("correlation", args.L, args.J, args.B, args.beta,
                         corr_ed, det, gap_c, max(args.tol, 1e-2), status_c))
        columns = ["kind", "L[sites]", "J[energy]", "B[energy]", "beta[1/energy]",
                   "oracle_value", "target_value", "abs_diff", "tol", "status"]
        config = {"L": args.L, "J": args.J, "B": args.B, "beta": args.beta,
                  "tol": args.tol, "corr_dist": args.corr_dist}
        command = "oracle tfim-ed"
    else:
        lattice = LatticeSpec(args.d, args.L)
        params = SphericalParams(J=args.J, B=args.B, H=args.H, d=args.d, beta=args.beta)
        lz_contour = oracles.contour_partition(params, lattice)
        f_oracle = -lz_contour / (args.beta * lattice.N)
        if args.oracle == "spherical-contour":
            f_saddle = spherical.free_energy_finite_beta(params, lattice).value
            gap = abs(f_oracle - f_saddle)
            # leading saddle value differs from exact log Z by O(log N / N)
            allowance = args.tol + 2.0 * (1.0 + math.log(lattice.N)) / (args.beta * lattice.N)
            status = "pass" if gap < allowance else "fail"
            rows.append((args.d, args.L, args.J, args.B, args.H, args.beta,
                         lz_contour, f_oracle, f_saddle, gap, allowance, status))
            columns = ["d", "L[sites]", "J[energy]", "B[energy]", "H[energy]",
                       "beta[1/energy]", "log_z", "f_oracle[energy/site]",
                       "f_saddle[energy/site]", "abs_diff", "tol", "status"]
            command = "oracle spherical-contour"
        else:
            mc_spec = oracles.MCSpec(args.samples, RandomStream(args.seed))
            lz_mc, err = oracles.sphere_mc_partition(params, lattice, mc_spec,
                                                     threads=args.threads)
            gap = abs(lz_mc - lz_contour)
            three_sigma = 3.0 * err
            if gap <= three_sigma:
                status = "inconclusive" if three_sigma > args.tol else "pass"
            else:
                status = "fail"
            rows.append((args.d, args.L, args.J, args.B, args.H, args.beta,
                         args.samples, lz_mc, err, lz_contour, gap, three_sigma,
                         args.tol, status))
            columns = ["d", "L[sites]", "J[energy]", "B[energy]", "H[energy]",
                       "beta[1/energy]", "samples", "log_z_mc", "std_err",
                       "log_z_contour", "abs_diff", "three_sigma", "tol", "status"]
            command = "oracle spherical-mc"
        config = {"d": args.d, "L": args.L, "J": args.J, "B": args.B, "H": args.H,
                  "beta": args.beta, "tol": args.tol, "seed": args.seed,
                  "samples": getattr(args, "samples", None)}
    failed = any(row[-1] == "fail" for row in rows)
    _emit(args, command, config, columns, rows)
    return EXIT_ORACLE_MISMATCH if failed else EXIT_OK


def _cmd_check(args) -> int:
    from . import acceptance

    if args.mutate:
        os.environ["QSM_MUTATE"] = args.mutate
    try:
        results = acceptance.run_all(args.filter)
    finally:
        if args.mutate:
            os.environ.pop("QSM_MUTATE", None)
    if not results:
        print(f"no acceptance criteria match filter {args.filter!r}", file=sys.stderr)
        return EXIT_USAGE
    n_pass = sum(r.passed for r in results)
    print(f"\n{n_pass}/{len(results)} criteria passed")
    return EXIT_OK if n_pass == len(results) else EXIT_CHECK_FAILED


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="-", help="output path ('-' for stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker threads for scans (default: QSM_THREADS or CPU count)")
    parser.add_argument("--seed", type=int, default=0, help="random seed for Monte Carlo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsm",
        description="Transverse-field Ising chain and mean-spherical model numerics",
    )
    parser.add_argument("--version", action="version", version=f"qsm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    tfim = sub.add_parser("tfim", help="exact chain results")
    tfim_sub = tfim.add_subparsers(dest="tfim_command", required=True)

    fe = tfim_sub.add_parser("free-energy", help="free energy / ground energy per site")
    fe.add_argument("--J", type=float, default=1.0)
    fe.add_argument("--B", type=float, required=True)
    fe.add_argument("--beta", type=float)
    fe.add_argument("--ground", action="store_true", help="zero-temperature limit")
    fe.add_argument("--scan-B", nargs=3, type=float, metavar=("LO", "HI", "N"))
    _add_common(fe)
    fe.set_defaults(func=_cmd_tfim_free_energy)

    corr = tfim_sub.add_parser("correlation", help="x-x correlation determinants")
    corr.add_argument("--k", type=float, required=True, help="field ratio B/J")
    corr.add_argument("--n-max", type=int, default=20)
    _add_common(corr)
    corr.set_defaults(func=_cmd_tfim_correlation)

    sph = sub.add_parser("spherical", help="mean-spherical model saddle results")
    sph.add_argument("--J", type=float, default=1.0)
    sph.add_argument("--B", type=float, required=True)
    sph.add_argument("--H", type=float, default=0.0)
    sph.add_argument("--d", type=int, default=1)
    sph.add_argument("--beta", type=float)
    sph.add_argument("--ground", action="store_true", help="H->0 extrapolated ground energy")
    sph.add_argument("--mode", default="limit", choices=("limit", "finite"),
                     help="thermodynamic limit or finite lattice")
    sph.add_argument("--L", type=int, help="lattice side for finite mode")
    sph.add_argument("--scan-B", nargs=3, type=float, metavar=("LO", "HI", "N"))
    _add_common(sph)
    sph.set_defaults(func=_cmd_spherical)

    oracle = sub.add_parser("oracle", help="independent desk-scale oracles")
    oracle_sub = oracle.add_subparsers(dest="oracle", required=True)

    ed = oracle_sub.add_parser("tfim-ed", help="dense exact diagonalization")
    ed.add_argument("--L", type=int, default=10)
    ed.add_argument("--J", type=float, default=1.0)
    ed.add_argument("--B", type=float, required=True)
    ed.add_argument("--beta", type=float, default=20.0)
    ed.add_argument("--corr-dist", type=int, help="also check <s^x_0 s^x_n> at this distance")
    ed.add_argument("--tol", type=float, default=5e-3)
    _add_common(ed)
    ed.set_defaults(func=_cmd_oracle)

    for name, help_text in (
        ("spherical-contour", "exact finite-N contour integral"),
        ("spherical-mc", "Monte Carlo on the constraint sphere"),
    ):
        orc = oracle_sub.add_parser(name, help=help_text)
        orc.add_argument("--d", type=int, default=1)
        orc.add_argument("--L", type=int, default=4)
        orc.add_argument("--J", type=float, default=1.0)
        orc.add_argument("--B", type=float, default=1.0)
        orc.add_argument("--H", type=float, default=0.5)
        orc.add_argument("--beta", type=float, default=0.5)
        orc.add_argument("--tol", type=float, default=0.1)
        if name == "spherical-mc":
            orc.add_argument("--samples", type=int, default=10**6)
        _add_common(orc)
        orc.set_defaults(func=_cmd_oracle)

    check = sub.add_parser("check", help="run the acceptance suite")
    check.add_argument("--filter", help="run only criteria whose name contains this")
    check.add_argument("--mutate", help=argparse.SUPPRESS)  # dev-only fault injection
    check.set_defaults(func=_cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
