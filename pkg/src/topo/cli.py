"""Command line front end.

Subcommands:
    topo chern-bulk --model FILE [--mu X] [--grid N[,N,...]]
    topo verify {bbc|theorem1|theorem2|properties} --model FILE [options]
    topo sweep {delta|epsilon|grid|strip_N} --model FILE [options]

Every command writes CSV: a `#`-prefixed metadata block carrying the full
configuration, a one-line header, then data rows.  With --output FILE and
--figure, a PNG report is rendered next to the CSV.  Exit codes: 0 success,
1 usage error, 2 model or gap error, 3 convergence or verification failure.
"""

import argparse
import csv
import sys

import numpy as np

from . import errors, greens, invariants, krein, modelio, scattering
from .model import (BlockJacobiModel, MomentumGrid, ScatteringSystem,
                    WireModel, wire_chain)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_CONVERGENCE = 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(output, header, rows, config):
    """CSV with a `#` metadata block, one header line, then the rows."""
    def emit(fh):
        for key in sorted(config):
            fh.write(f"# {key} = {_fmt(config[key])}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])

    if output:
        with open(output, "w") as fh:
            emit(fh)
    else:
        emit(sys.stdout)


def _parse_grid(text, ndim):
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise CliError(f"invalid --grid {text!r}", EXIT_USAGE)
    if len(parts) == 1:
        parts = parts * ndim
    if len(parts) != ndim or any(p < 2 for p in parts):
        raise CliError(
            f"--grid needs {ndim} sizes >= 2, got {text!r}", EXIT_USAGE)
    return tuple(parts)


def _load(path):
    try:
        return modelio.load_model(path)
    except errors.TopoError as exc:
        raise CliError(str(exc), EXIT_MODEL)


def _insulator(m):
    if isinstance(m, ScatteringSystem):
        return m.insulator
    if isinstance(m, BlockJacobiModel):
        return m
    raise CliError("this command needs an insulator model", EXIT_MODEL)


def _scattering(m):
    if isinstance(m, ScatteringSystem):
        return m
    if isinstance(m, BlockJacobiModel):
        return ScatteringSystem(wire_chain(m.L), m)
    raise CliError("this command needs a scattering system or insulator",
                   EXIT_MODEL)


def _config(args, **extra):
    cfg = {"command": args.command, "model": args.model,
           "mu": args.mu, "delta": args.delta, "depth": args.depth,
           "strip": args.strip, "epsilon": args.epsilon,
           "jobs": args.jobs, "seed": args.seed}
    if args.grid:
        cfg["grid"] = args.grid
    cfg.update(extra)
    return cfg


def _maybe_figure(args, render):
    if args.figure:
        if not args.output:
            raise CliError("--figure requires --output", EXIT_USAGE)
        path = args.output.rsplit(".", 1)[0] + ".png"
        render(path)


def cmd_chern_bulk(args):
    m = _insulator(_load(args.model))
    shape = _parse_grid(args.grid, m.d) if args.grid else \
        ((64,) * 2 if m.d == 2 else (12,) * 4)
    chern = invariants.chern_2d if m.d == 2 else invariants.chern_4d
    P = invariants.fermi_projection_field(m, args.mu, MomentumGrid(shape))
    res = chern(P)
    rows = [["x".join(map(str, shape)), res.value, res.rounded,
             res.distance_to_integer, "converged" if res.converged else
             "unconverged"]]
    _write_csv(args.output, ["grid", "value", "rounded",
                             "distance_to_integer", "status"],
               rows, _config(args, grid="x".join(map(str, shape))))
    return EXIT_OK if res.converged else EXIT_CONVERGENCE


def _report_rows(report):
    rows = []
    for key, res in report.items():
        if key == "pass":
            continue
        rows.append([key, res.value, res.rounded, res.distance_to_integer,
                     "pass" if res.converged else "fail"])
    return rows


def _verify_theorem1(args, m):
    ins = _insulator(m)
    d = ins.d
    shape = _parse_grid(args.grid, d - 1) if args.grid else \
        ((64,) if d == 2 else (16,) * 3)
    bulk = MomentumGrid((32,) * 2 if d == 2 else (12,) * 4)
    report = invariants.verify_theorem1(
        ins, args.mu, args.delta, bulk, MomentumGrid(shape),
        depth=args.depth, eps=args.epsilon, jobs=args.jobs)
    return _report_rows(report), report["pass"]


def _verify_theorem2(args, m):
    sys_ = _scattering(m)
    d = sys_.insulator.d
    shape = _parse_grid(args.grid, d - 1) if args.grid else \
        ((64,) if d == 2 else (16,) * 3)
    report = scattering.verify_theorem2(
        sys_, args.mu, args.delta, MomentumGrid(shape),
        depth=args.depth, jobs=args.jobs)
    return _report_rows(report), report["pass"]


def _verify_bbc(args, m):
    ins = _insulator(m)
    d = ins.d
    shape = _parse_grid(args.grid, d - 1) if args.grid else \
        ((64,) if d == 2 else (16,) * 3)
    grid = MomentumGrid(shape)
    bulk = MomentumGrid((32,) * 2 if d == 2 else (12,) * 4)
    gap = greens.bulk_gap(ins, mu=args.mu)
    strip = args.strip or 30
    wind = invariants.winding_1d if d == 2 else invariants.winding_3d
    chern = invariants.chern_2d if d == 2 else invariants.chern_4d
    ch = chern(invariants.fermi_projection_field(ins, args.mu, bulk))
    Uf = greens.exp_map_field(ins, grid, strip, gap, mu=args.mu,
                              jobs=args.jobs)
    Vf = greens.boundary_unitary_field(ins, args.mu + 1j * args.delta, grid,
                                       eps=args.epsilon, jobs=args.jobs)
    wu, wv = wind(Uf), wind(Vf)
    ok = (wu.rounded == ch.rounded == -wv.rounded
          and ch.converged and wu.converged and wv.converged)
    return _report_rows({"Ch_d": ch, "Ch_dm1_Uexp": wu, "Ch_dm1_V": wv}), ok


def _verify_properties(args, m):
    """Seeded randomized property suites; deterministic for a fixed seed."""
    rng = np.random.default_rng(args.seed)
    rows = []

    def check(name, residual, tol):
        rows.append([name, residual, 0, tol,
                     "pass" if residual <= tol else "fail"])

    # Cayley transform: contraction and round-trip on Im G > 0 samples
    worst_norm, worst_rt = 0.0, 0.0
    for _ in range(100):
        L = int(rng.integers(1, 9))
        X = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        Y = rng.normal(size=(L, L))
        G = X + X.conj().T + 1j * (Y @ Y.T + 0.1 * np.eye(L))
        V = greens.cayley(G)
        worst_norm = max(worst_norm, np.linalg.norm(V, 2) - 1.0)
        worst_rt = max(worst_rt,
                       np.linalg.norm(greens.inverse_cayley(V) - G))
    check("cayley_contraction", worst_norm, 1e-12)
    check("cayley_round_trip", worst_rt, 1e-10)

    # transfer matrices: G-unitarity and eigenvalue pairing at real energy
    worst_gu, worst_pair = 0.0, 0.0
    for _ in range(100):
        L = int(rng.integers(1, 5))
        A = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L)) \
            + 2 * np.eye(L)
        Bh = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        B = Bh + Bh.conj().T
        E = float(rng.uniform(-3, 3))
        T = krein.transfer_matrix(A, B, E).matrix
        G = krein.g_form(L)
        worst_gu = max(worst_gu,
                       np.linalg.norm(T.conj().T @ G @ T - G))
        lam = np.linalg.eigvals(T)
        paired = 1.0 / lam.conj()
        dist = np.abs(lam[:, None] - paired[None, :]).min(axis=1)
        worst_pair = max(worst_pair, float(dist.max()))
    check("transfer_g_unitarity", worst_gu, 1e-10)
    check("eigenvalue_pairing", worst_pair, 1e-8)

    # eigenphase derivative sign law on a conducting wire, finite differences
    wire = wire_chain(1)
    h = 1e-5
    worst_sign = 1.0
    for E in rng.uniform(-1.8, 1.8, size=20):
        nf = krein.elliptic_normal_form(
            krein.transfer_matrix(wire.A, wire.B, float(E)))
        for lam, sign in ((nf.Lambda_plus, 1.0), (nf.Lambda_minus, -1.0)):
            for l0 in np.atleast_1d(lam):
                nfp = krein.transfer_matrix(wire.A, wire.B, float(E) + h)
                lamp = np.linalg.eigvals(nfp.matrix)
                near = lamp[np.argmin(np.abs(lamp - l0))]
                dphase = (np.angle(near) - np.angle(l0)) / h
                worst_sign = min(worst_sign, sign * dphase)
    check("eigenphase_sign_law", max(0.0, -worst_sign), 0.0)

    # frame_angles unitarity on random G-Lagrangian frames
    worst_fa = 0.0
    for _ in range(100):
        L = int(rng.integers(1, 5))
        X = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        Phi = np.vstack([X + X.conj().T, np.eye(L)])  # graph of a Hermitian matrix
        nf = krein.elliptic_normal_form(
            krein.transfer_matrix(np.eye(L), np.zeros((L, L)), 0.0))
        R = krein.frame_angles(Phi, nf)
        worst_fa = max(worst_fa,
                       np.linalg.norm(R @ R.conj().T - np.eye(L)))
    check("frame_angles_unitarity", worst_fa, 1e-10)

    ok = all(r[-1] == "pass" for r in rows)
    return rows, ok


def cmd_verify(args):
    m = _load(args.model)
    dispatch = {"bbc": _verify_bbc, "theorem1": _verify_theorem1,
                "theorem2": _verify_theorem2, "properties": _verify_properties}
    rows, ok = dispatch[args.which](args, m)
    rows.append(["overall", 1.0 if ok else 0.0, int(ok), 0.0,
                 "pass" if ok else "fail"])
    _write_csv(args.output,
               ["check", "value", "rounded", "residual", "status"],
               rows, _config(args, which=args.which))
    def render(path):
        from . import plotting
        plotting.report_figure([r[0] for r in rows[:-1]],
                               [float(r[1]) for r in rows[:-1]],
                               [float(r[3]) for r in rows[:-1]],
                               f"verify {args.which}", path)

    _maybe_figure(args, render)
    return EXIT_OK if ok else EXIT_CONVERGENCE


_SWEEP_DEFAULTS = {
    "delta": [1e-3, 3e-3, 1e-2, 3e-2, 1e-1],
    "epsilon": [0.1, 0.25, 0.5, 0.75, 0.9],
    "grid": [16, 32, 64, 128],
    "strip_N": [1, 2, 3, 4],
}


def cmd_sweep(args):
    m = _insulator(_load(args.model))
    d = m.d
    if args.values:
        try:
            if args.vary in ("grid", "strip_N"):
                values = [int(v) for v in args.values.split(",")]
            else:
                values = [float(v) for v in args.values.split(",")]
        except ValueError:
            raise CliError(f"invalid --values {args.values!r}", EXIT_USAGE)
    else:
        values = list(_SWEEP_DEFAULTS[args.vary])
        if args.vary == "grid" and d == 4:
            values = [8, 12, 16]
    wind = invariants.winding_1d if d == 2 else invariants.winding_3d
    base_shape = _parse_grid(args.grid, d - 1) if args.grid else \
        ((64,) if d == 2 else (16,) * 3)
    rows, any_ok = [], False
    for v in values:
        delta, eps, N, shape = args.delta, args.epsilon, 1, base_shape
        if args.vary == "delta":
            delta = v
        elif args.vary == "epsilon":
            eps = v
        elif args.vary == "strip_N":
            N = v
        else:
            shape = (v,) * (d - 1)
        try:
            field = greens.boundary_unitary_field(
                m, args.mu + 1j * delta, MomentumGrid(shape), N=N, eps=eps,
                depth=args.depth, jobs=args.jobs)
            res = wind(field)
            rows.append([v, res.value, res.rounded, res.distance_to_integer,
                         "converged"])
            any_ok = True
        except (errors.RefineGrid, errors.Unconverged) as exc:
            # winding_1d/3d raise before returning a value; recover the raw
            # number from the message when present
            rows.append([v, "", "", "", f"unconverged: {exc}"])
        except errors.TopoError as exc:
            rows.append([v, "", "", "", f"error: {exc}"])
    _write_csv(args.output,
               [args.vary, "value", "rounded", "distance_to_integer",
                "status"],
               rows, _config(args, vary=args.vary))
    def render(path):
        from . import plotting
        plotting.sweep_figure([r[0] for r in rows],
                              {"winding": [r[1] if r[1] != "" else None
                                           for r in rows]},
                              args.vary, f"{args.vary} sweep", path,
                              logx=args.vary == "delta")

    _maybe_figure(args, render)
    return EXIT_OK if any_ok else EXIT_CONVERGENCE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="topo",
                description="Topological invariants of tight-binding "
                            "insulators: bulk Chern numbers and boundary "
                            "windings.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--model", required=True, help="model file (YAML)")
        sp.add_argument("--mu", type=float, default=0.0,
                        help="Fermi level (default 0)")
        sp.add_argument("--delta", type=float, default=1e-2,
                        help="imaginary offset of the spectral parameter")
        sp.add_argument("--grid", default=None,
                        help="grid sizes, N or N,N,N")
        sp.add_argument("--depth", type=int, default=None,
                        help="half-space truncation depth")
        sp.add_argument("--strip", type=int, default=None,
                        help="boundary strip width N (or exp-map strip M)")
        sp.add_argument("--epsilon", type=float, default=0.5,
                        help="Cayley scale of the boundary unitary")
        sp.add_argument("--output", default=None, help="CSV output path")
        sp.add_argument("--figure", action="store_true",
                        help="render a PNG next to the CSV")
        sp.add_argument("--jobs", type=int, default=1,
                        help="worker threads for grid evaluation")
        sp.add_argument("--seed", type=int, default=0,
                        help="seed for randomized property suites")

    sp = sub.add_parser("chern-bulk", help="bulk Chern number at mu")
    common(sp)
    sp.set_defaults(func=cmd_chern_bulk)

    sp = sub.add_parser("verify", help="verification suites")
    sp.add_argument("which", choices=["bbc", "theorem1", "theorem2",
                                      "properties"])
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="parameter stability sweeps")
    sp.add_argument("vary", choices=["delta", "epsilon", "grid", "strip_N"])
    sp.add_argument("--values", default=None,
                    help="comma separated sweep values")
    common(sp)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"topo: {exc}", file=sys.stderr)
        return exc.code
    except (errors.GapViolated, errors.InvalidGap, errors.InvalidModel,
            errors.ModelParseError) as exc:
        print(f"topo: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (errors.RefineGrid, errors.Unconverged) as exc:
        print(f"topo: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
