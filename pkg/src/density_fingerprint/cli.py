"""Command-line entry point.

Exit codes: 0 success, 2 parse or validation error, 3 numerical degeneracy,
4 comparison precondition failure.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

import numpy as np

from . import io as pio
from . import lattice as lat
from . import zones as zn
from .compare import compare, stability_trial
from .errors import ComparisonPreconditionError, FingerprintError
from .fingerprint import FingerprintConfig, psi_table
from .volumes import oracle_psi

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_PRECONDITION = 0, 2, 3, 4


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _config(args) -> FingerprintConfig:
    return FingerprintConfig(
        kmax=args.kmax,
        t_steps=args.steps,
        t_max=getattr(args, "tmax", None),
        method=getattr(args, "method", "zones"),
        volume_method=getattr(args, "volume", "exact"),
        mc_samples=getattr(args, "mc_samples", 200_000),
        seed=args.seed,
    )


def cmd_fingerprint(args) -> int:
    pset = pio.read_pps(args.file)
    table = psi_table(pset, _config(args))
    _emit(pio.write_density_csv(table), args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    a, q = pio.read_pps(args.a), pio.read_pps(args.b)
    rep = compare(a, q, _config(args), metric=args.metric)
    lines = []
    if rep.d_B is not None:
        lines.append(f"d_B {rep.d_B:.9g}")
    if rep.d_F is not None:
        lines.append(f"d_F {rep.d_F:.9g}")
        lines.append("per_k_linf " + " ".join(f"{v:.9g}" for v in rep.per_k))
    lines.append(f"r {rep.r:.9g}")
    lines.append(f"R {rep.R:.9g}")
    if rep.lipschitz_C is not None:
        lines.append(f"lipschitz_C {rep.lipschitz_C:.9g}")
    if rep.bound_satisfied is not None:
        lines.append(f"bound_satisfied {str(rep.bound_satisfied).lower()}")
    if rep.note:
        lines.append(f"note {rep.note}")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.output:
        row = ["" if v is None else f"{v:.9g}" for v in (rep.d_B, rep.d_F, rep.lipschitz_C)]
        bound = "" if rep.bound_satisfied is None else str(rep.bound_satisfied).lower()
        _emit("d_B,d_F,lipschitz_C,bound_satisfied\n" + ",".join(row + [bound]) + "\n", args.output)
    return EXIT_OK


def cmd_zones(args) -> int:
    pset = pio.read_pps(args.file)
    if not 0 <= args.point < len(pset):
        raise ValueError(f"point index must be in 0..{len(pset) - 1}")
    _emit(pio.export_zone_geometry(zn.build_zones(pset, args.point, args.kmax)), args.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    pset = pio.read_pps(args.file)
    values = oracle_psi(pset, args.kmax, args.t, mode=args.mode, n=args.n, seed=args.seed)
    sys.stdout.write("".join(f"psi_{k} {v:.9g}\n" for k, v in enumerate(values, start=1)))
    return EXIT_OK


def cmd_stability(args) -> int:
    pset = pio.read_pps(args.file)
    cfg = FingerprintConfig(kmax=args.kmax, t_steps=args.steps, seed=args.seed)
    rep = stability_trial(pset, args.delta, args.trials, cfg, seed=args.seed)
    _emit(pio.write_stability_csv(rep), args.output)
    summary = f"max_ratio {rep.max_ratio:.9g}"
    if rep.all_satisfied is not None:
        summary += f" lipschitz_C {rep.lipschitz_C:.9g} all_satisfied {str(rep.all_satisfied).lower()}"
    else:
        summary += f" note {rep.note}"
    sys.stderr.write(summary + "\n")
    return EXIT_OK


def fixture_text(name: str) -> str:
    return resources.files("density_fingerprint.fixtures").joinpath(name).read_text(encoding="utf-8")


def selftest(verbose: bool = True) -> bool:
    """Tiling and supercell-invariance checks on the bundled fixtures."""
    ok = True

    def report(name, passed, detail):
        nonlocal ok
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    for name in ("square.pps", "hexagonal.pps", "random2d.pps"):
        pset = pio.parse_pps(fixture_text(name))
        mult = zn.multiplicity(pset)
        worst = 0.0
        for i in range(len(pset)):
            zc = zn.build_zones(pset, i, 6)
            w = float(sum(mult[i].weights()))
            vols = np.array([zn.zone_volume(zc, k) for k in range(1, 7)])
            if i == 0:
                acc = w * vols
            else:
                acc += w * vols
        worst = float(np.max(np.abs(acc - pset.lattice.volume)))
        report(f"tiling {name}", worst <= 1e-6, f"max |sum - Vol(U)| = {worst:.2e}")

    square = pio.parse_pps(fixture_text("square.pps"))
    big = lat.supercell(square, (2, 2))
    cfg = FingerprintConfig(kmax=4, t_steps=64)
    tgrid = np.linspace(0.0, 2.5, 64)
    diff = float(np.max(np.abs(psi_table(square, cfg, tgrid).psi - psi_table(big, cfg, tgrid).psi)))
    report("supercell square 2x2", diff <= 5e-3, f"max |psi difference| = {diff:.2e}")
    return ok


def cmd_selftest(args) -> int:
    return EXIT_OK if selftest() else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="density-fingerprint", description="Density fingerprints of periodic point sets.")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fingerprint", help="compute psi/rho tables")
    f.add_argument("file")
    f.add_argument("--kmax", type=int, required=True)
    f.add_argument("--steps", type=int, required=True)
    f.add_argument("--tmax", type=float)
    f.add_argument("--method", choices=["zones", "oracle"], default="zones")
    f.add_argument("--volume", choices=["exact", "monte_carlo"], default="exact")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--mc-samples", type=int, default=200_000)
    f.add_argument("-o", "--output")
    f.set_defaults(func=cmd_fingerprint)

    c = sub.add_parser("compare", help="fingerprint and bottleneck distances")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--kmax", type=int, required=True)
    c.add_argument("--steps", type=int, required=True)
    c.add_argument("--metric", choices=["fingerprint", "bottleneck", "both"], default="both")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_compare)

    z = sub.add_parser("zones", help="export Brillouin zone geometry of one motif point")
    z.add_argument("file")
    z.add_argument("--point", type=int, required=True)
    z.add_argument("--kmax", type=int, required=True)
    z.add_argument("-o", "--output")
    z.set_defaults(func=cmd_zones)

    o = sub.add_parser("oracle", help="brute-force psi values at one radius")
    o.add_argument("file")
    o.add_argument("--kmax", type=int, required=True)
    o.add_argument("--t", type=float, required=True)
    o.add_argument("--mode", choices=["grid", "mc"], default="grid")
    o.add_argument("--n", type=int, default=100_000)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("stability", help="perturbation trials against the Lipschitz bound")
    s.add_argument("file")
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_stability)

    t = sub.add_parser("selftest", help="tiling and supercell checks on bundled fixtures")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ComparisonPreconditionError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PRECONDITION
    except (ArithmeticError, FingerprintError) as exc:
        if isinstance(exc, ValueError):
            sys.stderr.write(f"error: {exc}\n")
            return EXIT_INPUT
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
