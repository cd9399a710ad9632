"""Command-line front end.

Every subcommand builds a table ``(meta, columns, rows)`` through a
``cmd_*`` function (usable from Python) and writes it as CSV or JSON.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import io
from .closed_form import A1ChainSpec, chain_a1, hopf_chain
from .cr_structure import check_modulus
from .exceptions import (
    CRChainsError,
    DegenerateBifurcation,
    EmptyLevelSet,
    HomoclinicRegime,
    NumericalFailure,
    ParameterError,
)
from .holonomy import (
    ChainKind,
    PhaseReport,
    canonical_start,
    classify_chain,
    classify_report,
    delta_theta,
    resonant_levels,
)
from .integrator import reconstruct_chain
from .lie_group import GroupElement, hopf_project, quat_distance
from .reduced_dynamics import (
    bifurcation_row,
    c_of_a,
    critical_points,
    homoclinic_level,
    is_degenerate,
    level_curve,
    lift,
    locate_bifurcations,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("phase-portrait", "bifurcation-scan", "delta-theta", "trace-chain", "classify")


@dataclass
class RunConfig:
    command: str
    a: float | None = None
    a_range: tuple[float, float] | None = None
    K: list[float] = field(default_factory=list)
    tol: float = 1e-10
    class_tol: float = 1e-6
    q_max: int = 64
    t_end: float = 4 * math.pi
    jobs: int = 1
    fmt: str = "csv"
    out: str | None = None

    def __post_init__(self):
        if self.tol <= 0 or self.class_tol <= 0:
            raise ParameterError("tolerances must be positive")
        if self.a_range is not None and not self.a_range[0] < self.a_range[1]:
            raise ParameterError("--a-range must satisfy lo < hi")
        if self.jobs < 1:
            raise ParameterError("--jobs must be at least 1")
        if self.fmt not in io.FORMATS:
            raise ParameterError(f"--format must be one of {io.FORMATS}")


def k_values(K=None, K_range=None, n=None) -> list[float]:
    """Explicit levels, or ``n`` evenly spaced levels over a closed range."""
    out = list(K or [])
    if K_range is not None:
        lo, hi = K_range
        if not lo < hi:
            raise ParameterError("--K-range must satisfy lo < hi")
        if n is None or n < 1:
            raise ParameterError("--K-range needs --n >= 1")
        out.extend(np.linspace(lo, hi, n).tolist() if n > 1 else [lo])
    if not out:
        raise ParameterError("no K values given (use --K or --K-range with --n)")
    if any(not math.isfinite(k) or k < 0 for k in out):
        raise ParameterError("K values must be finite and non-negative")
    return sorted(set(out))


def _pool_map(fn, items, jobs):
    # Executor.map preserves input order, so output order never depends on scheduling
    if jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# -- phase portrait ----------------------------------------------------------------------

def cmd_phase_portrait(a: float, K_list, grid: int = 512, samples: int = 400):
    a = check_modulus(a)
    columns = ["K", "topology", "component", "index", "M1", "M2"]
    rows = []
    for K in K_list:
        rep = level_curve(a, K, grid=grid, n_samples=samples)
        if not rep.curves:
            rows.append([K, rep.topology.value, None, None, None, None])
        for ci, curve in enumerate(rep.curves):
            for j, (x, y) in enumerate(np.asarray(curve)):
                rows.append([K, rep.topology.value, ci, j, x, y])
    return io.base_meta(command="phase-portrait", a=a, grid=grid), columns, rows


# -- bifurcation scan --------------------------------------------------------------------

def cmd_bifurcation_scan(a_lo: float, a_hi: float, step: float = 1e-3, tol: float = 1e-12):
    roots = locate_bifurcations(a_lo, a_hi, step, tol=tol)
    n = int(math.floor((a_hi - a_lo) / step + 1e-9))
    grid = [a_lo + step * i for i in range(n + 1)]
    if grid[-1] < a_hi:
        grid.append(a_hi)
    columns = ["a", "hessian_m1", "hessian_m2", "determinant", "origin_kind", "center_m1", "center_m2", "center_K"]
    rows = []
    for x in grid:
        r = bifurcation_row(x)
        rows.append([r.a, r.hessian_m1, r.hessian_m2, r.determinant, r.origin_kind,
                     r.center_m1, r.center_m2, r.center_K])
    meta = io.base_meta(command="bifurcation-scan", a_lo=a_lo, a_hi=a_hi, step=step, bifurcations=roots)
    return meta, columns, rows


# -- delta theta / classification sweeps ------------------------------------------------

def _report_cells(rep: PhaseReport | None):
    if rep is None:
        return [None] * 6
    return [rep.T, rep.dynamic, rep.geometric, rep.delta_theta, rep.delta_theta_reconstructed, rep.discrepancy]


def _sweep_row(cls) -> list:
    rep = cls.evidence if isinstance(cls.evidence, PhaseReport) else None
    return _report_cells(rep) + [cls.kind.value, cls.p, cls.q]


def _delta_theta_task(job):
    a, K, tol, class_tol, q_max = job
    try:
        rep = delta_theta(a, K, tol=tol)
    except HomoclinicRegime:
        return [a, K] + [None] * 6 + [ChainKind.HOMOCLINIC.value, None, None]
    return [a, K] + _sweep_row(classify_report(rep, tol=class_tol, q_max=q_max))


def _classify_task(job):
    a, K, p_flag, tol, class_tol, q_max = job
    return [a, K] + _sweep_row(classify_chain(a, K, P_flag=p_flag, tol=class_tol, q_max=q_max, int_tol=tol))


def cmd_delta_theta(a: float, K_list, tol: float = 1e-10, class_tol: float = 1e-6, q_max: int = 64, jobs: int = 1):
    a = check_modulus(a)
    rows = _pool_map(_delta_theta_task, [(a, K, tol, class_tol, q_max) for K in K_list], jobs)
    meta = io.base_meta(command="delta-theta", a=a, tol=tol, class_tol=class_tol, q_max=q_max)
    return meta, list(io.SWEEP_COLUMNS), rows


def resonant_window(a: float, K_list) -> tuple[float, float]:
    """K interval searched for rational levels: the lobe range when bifurcated."""
    k_hom = homoclinic_level(a)
    if k_hom is not None:
        k_cen = critical_points(a)[1].K_value
        span = k_hom - k_cen
        return k_cen + 0.05 * span, k_hom - 0.05 * span
    k_min = c_of_a(a) ** 2 / 9.0 if is_degenerate(a) else critical_points(a)[0].K_value
    hi = max(K_list) if K_list else 2.0 * k_min
    if hi <= k_min:
        raise ParameterError("resonant search needs a level above the minimum of K")
    return k_min + 0.05 * (hi - k_min), hi


def cmd_classify(
    a: float, K_list, p_zero: bool = False, tol: float = 1e-10, class_tol: float = 1e-6,
    q_max: int = 64, jobs: int = 1, resonant: int = 0,
):
    a = check_modulus(a)
    K_list = list(K_list)
    meta = io.base_meta(command="classify", a=a, tol=tol, class_tol=class_tol, q_max=q_max, p_flag=0 if p_zero else 1)
    if resonant:
        lo, hi = resonant_window(a, K_list)
        found = resonant_levels(a, lo, hi, resonant, q_max=q_max, tol=tol)
        K_list = sorted(set(K_list) | {K for K, _ in found})
        meta["resonant_levels"] = [K for K, _ in found]
    jobs_list = [(a, K, 0 if p_zero else 1, tol, class_tol, q_max) for K in K_list]
    rows = _pool_map(_classify_task, jobs_list, jobs)
    return meta, list(io.SWEEP_COLUMNS), rows


# -- chain traces --------------------------------------------------------------------------

def cmd_trace_chain(
    a: float, K: float | None = None, M0=None, t_end: float = 4 * math.pi, n: int = 400,
    tol: float = 1e-10, closed_form: bool = False, p_zero: bool = False,
):
    a = check_modulus(a)
    if t_end <= 0:
        raise ParameterError("--t-end must be positive")
    if n < 2:
        raise ParameterError("--n must be at least 2 samples")
    if p_zero:
        # the Reeb orbits sit over the paraboloid vertex
        s0 = np.array([0.0, 0.0, -c_of_a(a) / 3.0, 1.0])
    elif M0 is not None:
        s0 = np.asarray(lift(a, *M0), dtype=float)
    elif K is not None:
        s0 = np.asarray(canonical_start(a, K), dtype=float)
    else:
        raise ParameterError("trace-chain needs --K, --M0 or --p-zero")
    traj = reconstruct_chain(a, s0, GroupElement.identity(), t_end=t_end, tol=tol)
    ts = np.linspace(0.0, t_end, n)
    y = traj(ts)
    columns = list(io.TRAJECTORY_COLUMNS)
    rows = io.trajectory_rows(a, ts, y)
    meta = io.base_meta(command="trace-chain", a=a, tol=tol, t_end=t_end, start=s0.tolist(),
                        drift_K=traj.drift.get("K"), drift_H=traj.drift.get("H"))
    q = y[:, 4:8]
    if closed_form:
        if a != 1.0:
            raise ParameterError("--closed-form traces exist only for a = 1")
        ref = chain_a1(A1ChainSpec(*s0), ts)
        dev = quat_distance(q, ref)
        columns += ["cf_qw", "cf_qx", "cf_qy", "cf_qz", "deviation"]
        rows = [r + list(c) + [d] for r, c, d in zip(rows, ref.tolist(), dev.tolist())]
        meta["max_deviation"] = float(np.max(dev))
    if p_zero:
        hp = hopf_project(q)
        ref = hopf_chain(GroupElement.identity(), -1.5, ts)
        columns += ["hopf_x", "hopf_y", "hopf_z"]
        rows = [r + list(h) for r, h in zip(rows, hp.tolist())]
        meta["hopf_spread"] = float(np.max(np.linalg.norm(hp - hp[0], axis=1)))
        meta["max_deviation"] = float(np.max(quat_distance(q, ref)))
    return meta, columns, rows


# -- argument parsing ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10, help="integration tolerance (default 1e-10)")
    common.add_argument("--format", choices=io.FORMATS, default=None, help="output format (default from --out suffix, else csv)")
    common.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    levels = argparse.ArgumentParser(add_help=False)
    levels.add_argument("--K", type=float, nargs="+", default=None, help="explicit levels of K")
    levels.add_argument("--K-range", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    levels.add_argument("--n", type=int, default=None, help="number of levels in --K-range")

    p = argparse.ArgumentParser(prog="crchains", description="Chains of left-invariant CR structures on SU(2).")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("phase-portrait", parents=[common, levels], help="level curves of K on the paraboloid")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--grid", type=int, default=512)
    s.add_argument("--samples", type=int, default=400)

    s = sub.add_parser("bifurcation-scan", parents=[common], help="origin Hessian and centers against a")
    s.add_argument("--a-range", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    s.add_argument("--step", type=float, default=1e-3)

    s = sub.add_parser("delta-theta", parents=[common, levels], help="holonomy sweep over K")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--class-tol", type=float, default=1e-6)
    s.add_argument("--q-max", type=int, default=64)

    s = sub.add_parser("classify", parents=[common, levels], help="periodic / quasi-periodic / homoclinic / Reeb")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--class-tol", type=float, default=1e-6)
    s.add_argument("--q-max", type=int, default=64)
    s.add_argument("--p-zero", action="store_true", help="classify the P = 0 family")
    s.add_argument("--resonant", type=int, default=0, metavar="N",
                   help="also solve for up to N levels with rational delta_theta / 2 pi")

    s = sub.add_parser("trace-chain", parents=[common], help="sampled chain on SU(2) x S^1")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--K", type=float, default=None, help="level (canonical curve, lobe M1 > 0)")
    s.add_argument("--M0", type=float, nargs=2, metavar=("M1", "M2"), default=None, help="start on the paraboloid")
    s.add_argument("--t-end", type=float, default=4 * math.pi)
    s.add_argument("--n", type=int, default=400, help="number of output samples")
    s.add_argument("--closed-form", action="store_true", help="a = 1: also write the closed-form chain")
    s.add_argument("--p-zero", action="store_true", help="trace the Reeb orbit (Hopf fibre)")
    return p


def _fmt(args) -> str:
    if args.format:
        return args.format
    return "json" if args.out and str(args.out).endswith(".json") else "csv"


def run(args) -> tuple[dict, list, list]:
    RunConfig(
        command=args.command,
        a=getattr(args, "a", None),
        a_range=tuple(args.a_range) if getattr(args, "a_range", None) else None,
        tol=args.tol,
        class_tol=getattr(args, "class_tol", 1e-6),
        jobs=args.jobs,
        fmt=_fmt(args),
        out=args.out,
    )
    if args.command == "phase-portrait":
        return cmd_phase_portrait(args.a, k_values(args.K, args.K_range, args.n), args.grid, args.samples)
    if args.command == "bifurcation-scan":
        return cmd_bifurcation_scan(*args.a_range, step=args.step)
    if args.command == "delta-theta":
        return cmd_delta_theta(args.a, k_values(args.K, args.K_range, args.n), tol=args.tol,
                               class_tol=args.class_tol, q_max=args.q_max, jobs=args.jobs)
    if args.command == "classify":
        K = k_values(args.K, args.K_range, args.n) if (args.K or args.K_range or not args.p_zero) else [0.0]
        return cmd_classify(args.a, K, p_zero=args.p_zero, tol=args.tol, class_tol=args.class_tol,
                            q_max=args.q_max, jobs=args.jobs, resonant=args.resonant)
    return cmd_trace_chain(args.a, K=args.K, M0=args.M0, t_end=args.t_end, n=args.n, tol=args.tol,
                           closed_form=args.closed_form, p_zero=args.p_zero)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        meta, columns, rows = run(args)
    except (ParameterError, EmptyLevelSet, DegenerateBifurcation, HomoclinicRegime) as exc:
        print(f"crchains: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"crchains: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CRChainsError as exc:
        print(f"crchains: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        io.write_table(args.out, columns, rows, meta, _fmt(args))
    except OSError as exc:
        print(f"crchains: cannot write {args.out!r}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
