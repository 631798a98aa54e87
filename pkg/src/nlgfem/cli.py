"""Command-line front end: single solves, convergence sweeps, validation, CSV.

The CSV schema is the stable machine interface; downstream tooling reads the
header names and the 6-significant-digit scientific floats written here.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .analytic import KernelParams, double_gauss_poly, int_gauss_poly, phi
from .assembly import assemble_load, assemble_system, interaction_stencil
from .mesh import BoxDomain, build_mesh, named_domain
from .metrics import (fit_rates, h1_error, l2_error, manufactured_solution,
                      recovery_errors)
from .oracle import oracle_nonlocal_energy
from .poly1d import Poly1D
from .recovery import RecoveredField
from .sparse import cg_solve

CSV_COLUMNS = (
    "domain", "solution", "order", "N", "h", "delta", "s",
    "l2_error", "h1_error",
    "grad_rec_full", "grad_rec_interior", "grad_rec_corrected",
    "assembly_time_s", "assembly_time_generic_s", "solve_time_s",
    "cg_iters", "n_dofs", "nnz",
)

_DEFAULT_SOLUTION = {"rect": "rect-trig", "lshape": "lshape-mixed",
                     "cube": "cube-trig"}


@dataclass
class ExperimentConfig:
    """One solve or sweep request, after flag/config-file merging."""

    domain: str | list = "rect"
    solution: str | None = None
    order: int = 1
    n: int | list = 8
    delta: float | list = 0.05
    s: float = 2.0
    cutoff_eps: float = 1e-16
    sweep: str = "none"
    invariance: bool = True
    compare_assembly: bool = False
    recovery: bool = False
    quad_order: int | None = None
    cg_tol: float = 1e-10
    threads: int | None = None
    out: str | None = None

    def validated(self) -> "ExperimentConfig":
        cfg = self
        if cfg.solution is None:
            if not isinstance(cfg.domain, str) or cfg.domain not in _DEFAULT_SOLUTION:
                raise ValueError("no default solution for this domain; "
                                 "pass --solution")
            cfg = replace(cfg, solution=_DEFAULT_SOLUTION[cfg.domain])
        if cfg.order not in (1, 2, 3):
            raise ValueError(f"order must be 1, 2 or 3, got {cfg.order}")
        if cfg.sweep not in ("none", "h", "delta"):
            raise ValueError(f"unknown sweep mode {cfg.sweep!r}")
        for name, vals in (("n", cfg.n), ("delta", cfg.delta)):
            if isinstance(vals, list):
                arr = np.asarray(vals, dtype=float)
                d = np.diff(arr)
                if not (np.all(d > 0) or np.all(d < 0)):
                    raise ValueError(f"{name} sweep list must be strictly "
                                     "monotone")
        if cfg.threads is not None and cfg.threads < 1:
            raise ValueError("threads must be >= 1")
        return cfg


@dataclass
class ExperimentResult:
    """One CSV row; recovery and generic-timing fields stay None unless run."""

    domain: str
    solution: str
    order: int
    N: int
    h: float
    delta: float
    s: float
    l2_error: float
    h1_error: float
    grad_rec_full: float | None
    grad_rec_interior: float | None
    grad_rec_corrected: float | None
    assembly_time_s: float
    assembly_time_generic_s: float | None
    solve_time_s: float
    cg_iters: int
    n_dofs: int
    nnz: int

    def __post_init__(self):
        for name in ("l2_error", "h1_error", "assembly_time_s",
                     "solve_time_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.h1_error < self.l2_error:
            raise ValueError("h1_error must dominate l2_error")

    def to_row(self) -> list[str]:
        row = []
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            if v is None:
                row.append("")
            elif isinstance(v, float):
                row.append(f"{v:.5e}")
            else:
                row.append(str(v))
        return row


def _domain_object(spec) -> BoxDomain:
    if isinstance(spec, str):
        return named_domain(spec)
    boxes = tuple(tuple(tuple(float(e) for e in iv) for iv in box)
                  for box in spec)
    return BoxDomain(boxes)


def _domain_label(spec) -> str:
    if isinstance(spec, str):
        return spec
    # comma-free so the label stays a single CSV field
    return "+".join("x".join(f"{iv[0]:g}:{iv[1]:g}" for iv in box)
                    for box in spec)


def run_solve(config: ExperimentConfig) -> ExperimentResult:
    """Build, assemble, solve and measure one problem instance."""
    config = config.validated()
    if isinstance(config.n, list) or isinstance(config.delta, list):
        raise ValueError("run_solve takes scalar n and delta; use run_sweep")
    domain = _domain_object(config.domain)
    sol = manufactured_solution(config.solution)
    if sol.dim != domain.dim:
        raise ValueError(f"solution {config.solution} is {sol.dim}D but the "
                         f"domain is {domain.dim}D")

    mesh, dofmap = build_mesh(domain, int(config.n), config.order)
    params = KernelParams(delta=float(config.delta), s=config.s,
                          cutoff_eps=config.cutoff_eps)

    t0 = time.perf_counter()
    A, mbar = assemble_system(mesh, dofmap, params,
                              use_invariance=config.invariance)
    t_asm = time.perf_counter() - t0

    t_gen = None
    if config.compare_assembly:
        t0 = time.perf_counter()
        A_gen, mbar_gen = assemble_system(mesh, dofmap, params,
                                          use_invariance=False)
        t_gen = time.perf_counter() - t0
        for fast, gen, tag in ((A, A_gen, "stiffness"), (mbar, mbar_gen, "mass")):
            if (not np.array_equal(fast.indptr, gen.indptr)
                    or not np.array_equal(fast.indices, gen.indices)):
                raise RuntimeError(f"{tag} sparsity differs between paths")
            scale = np.abs(fast.values).max()
            err = np.abs(fast.values - gen.values).max() / scale
            if err > 1e-12:
                raise RuntimeError(f"{tag} fast/generic mismatch: rel {err:.2e}")

    b = assemble_load(mesh, dofmap, params, f=sol.f, g=sol.g, mbar=mbar)

    t0 = time.perf_counter()
    res = cg_solve(A, b, rel_tol=config.cg_tol)
    t_solve = time.perf_counter() - t0
    if not res.converged:
        raise RuntimeError(f"CG did not converge in {res.iters} iterations "
                           f"(residual {res.residual:.2e})")

    qo = config.quad_order if config.quad_order is not None else mesh.order + 2
    l2 = l2_error(res.c, sol.u, mesh, qo)
    h1 = h1_error(res.c, sol.u, sol.grad, mesh, qo)

    gr_full = gr_int = gr_corr = None
    if config.recovery:
        field = RecoveredField(mesh, dofmap, res.c, params, g=sol.g)
        gr_full, gr_int, gr_corr = recovery_errors(field, sol.grad, mesh,
                                                   params, qo)

    return ExperimentResult(
        domain=_domain_label(config.domain), solution=config.solution,
        order=config.order, N=int(config.n), h=mesh.spacing,
        delta=float(config.delta), s=config.s,
        l2_error=l2, h1_error=h1,
        grad_rec_full=gr_full, grad_rec_interior=gr_int,
        grad_rec_corrected=gr_corr,
        assembly_time_s=t_asm, assembly_time_generic_s=t_gen,
        solve_time_s=t_solve, cg_iters=res.iters,
        n_dofs=dofmap.n_dofs, nnz=A.nnz)


_RATE_COLUMNS = ("l2_error", "h1_error", "grad_rec_full",
                 "grad_rec_interior", "grad_rec_corrected")


def run_sweep(config: ExperimentConfig):
    """Run an h- or delta-sweep; returns (results, fitted rates per column)."""
    config = config.validated()
    if config.sweep == "h":
        if not isinstance(config.n, list):
            raise ValueError("h sweep needs a list of N values")
        points = [replace(config, sweep="none", n=v) for v in config.n]
    elif config.sweep == "delta":
        if not isinstance(config.delta, list):
            raise ValueError("delta sweep needs a list of delta values")
        points = [replace(config, sweep="none", delta=v) for v in config.delta]
    else:
        raise ValueError("config.sweep must be 'h' or 'delta'")
    if len(points) < 3:
        raise ValueError("sweep needs at least 3 points")

    results = [run_solve(p) for p in points]
    if config.sweep == "h":
        values = [r.h for r in results]
    else:
        values = [r.delta for r in results]

    rates = {}
    for col in _RATE_COLUMNS:
        errs = [getattr(r, col) for r in results]
        if any(e is None for e in errs):
            continue
        rates[col] = fit_rates(errs, values)

    if config.out:
        write_csv(results, config.out)
    return results, rates


def write_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow(r.to_row())


def read_csv(path) -> list[dict]:
    """Parse a results CSV back into dicts (floats where possible)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            out = {}
            for key, val in rec.items():
                if val == "" or val is None:
                    out[key] = None
                else:
                    try:
                        out[key] = int(val)
                    except ValueError:
                        try:
                            out[key] = float(val)
                        except ValueError:
                            out[key] = val
            rows.append(out)
    return rows


# ---------------------------------------------------------------- validation

@dataclass
class ValidationCase:
    name: str
    passed: bool
    detail: str


def _case(cases, name, err, tol):
    cases.append(ValidationCase(name, err <= tol, f"err {err:.3e} tol {tol:g}"))


def _panel_nodes(lo, hi, lam, l):
    # Gauss panels no wider than 1/lam, split at the kernel peak, so the
    # 64-point rule resolves the Gaussian to machine accuracy
    x64, w64 = np.polynomial.legendre.leggauss(64)
    ts, ws = [], []
    for p, q in ((lo, min(hi, l)), (max(lo, l), hi)):
        if q <= p:
            continue
        n = max(1, int(np.ceil((q - p) * lam)))
        edges = np.linspace(p, q, n + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        rad = 0.5 * (edges[1:] - edges[:-1])
        ts.append((mid[:, None] + rad[:, None] * x64).ravel())
        ws.append((rad[:, None] * w64).ravel())
    return np.concatenate(ts), np.concatenate(ws)


def _gauss_ref(f, a, b, l, lam):
    """Reference value and |integrand| scale for int_a^b f around a peak at l."""
    r = 27.0 / lam
    lo, hi = max(a, l - r), min(b, l + r)
    if lo >= hi:
        return 0.0, 0.0
    t, w = _panel_nodes(lo, hi, lam, l)
    v = f(t)
    return float(w @ v), float(w @ np.abs(v))


def _validate_integrals(cases):
    rng = np.random.default_rng(20240811)
    for i in range(20):
        lam = float(10 ** rng.uniform(np.log10(0.5), np.log10(50)))
        a, b = np.sort(rng.uniform(-2.0, 2.0, size=2))
        k = int(rng.integers(0, 7))
        ref, scale = _gauss_ref(
            lambda t: t ** k * np.exp(-lam ** 2 * t ** 2), a, b, 0.0, lam)
        err = abs(phi(a, b, lam, k) - ref) / max(scale, 1e-300)
        _case(cases, f"integrals/phi-{i:02d}", err, 1e-9)
    for i in range(20):
        lam = float(10 ** rng.uniform(np.log10(0.5), np.log10(20)))
        a, b = np.sort(rng.uniform(-1.5, 1.5, size=2))
        l = float(rng.uniform(-1.5, 1.5))
        p = Poly1D(rng.uniform(-1, 1, size=int(rng.integers(1, 7))))
        ref, scale = _gauss_ref(
            lambda t: p(t) * np.exp(-lam ** 2 * (t - l) ** 2), a, b, l, lam)
        err = abs(int_gauss_poly(p, a, b, l, lam) - ref) / max(scale, 1e-300)
        _case(cases, f"integrals/single-{i:02d}", err, 1e-9)
    for i in range(8):
        lam = float(10 ** rng.uniform(np.log10(0.5), np.log10(5)))
        a, b = np.sort(rng.uniform(-1.0, 1.0, size=2))
        ap, bp = np.sort(rng.uniform(-1.0, 1.0, size=2))
        p = Poly1D(rng.uniform(-1, 1, size=int(rng.integers(1, 4))))
        q = Poly1D(rng.uniform(-1, 1, size=int(rng.integers(1, 4))))

        xs, xw = _panel_nodes(a, b, lam, 0.5 * (ap + bp))
        ref = scale = 0.0
        for x, w in zip(xs, xw):
            inner, iscale = _gauss_ref(
                lambda y: q(y) * np.exp(-lam ** 2 * (x - y) ** 2),
                ap, bp, x, lam)
            ref += w * p(x) * inner
            scale += w * abs(p(x)) * iscale
        err = (abs(double_gauss_poly(p, q, lam, a, b, ap, bp) - ref)
               / max(scale, 1e-300))
        _case(cases, f"integrals/double-{i:02d}", err, 1e-8)


def _validate_assembly(cases):
    mesh, dofmap = build_mesh(named_domain("rect"), 2, 1)
    params = KernelParams(delta=0.2)
    A, mbar = assemble_system(mesh, dofmap, params)

    dense = A.todense()
    sym = np.abs(dense - dense.T).max() / np.abs(dense).max()
    _case(cases, "assembly/symmetry", sym, 1e-12)

    ones = np.ones(dofmap.n_dofs)
    annih = (np.abs(A.matvec(ones) - mbar.matvec(ones)).max()
             / np.abs(mbar.matvec(ones)).max())
    _case(cases, "assembly/constant-annihilation", annih, 1e-10)

    rng = np.random.default_rng(7)
    c = rng.standard_normal(dofmap.n_dofs)
    energy = float(c @ A.matvec(c))
    ref = oracle_nonlocal_energy(mesh, dofmap, c, params)
    err = abs(energy - ref) / abs(ref)
    _case(cases, "assembly/energy-identity", err, 1e-6)

    A_gen, _ = assemble_system(mesh, dofmap, params, use_invariance=False)
    dg = A_gen.todense()
    err = np.abs(dense - dg).max() / np.abs(dense).max()
    _case(cases, "assembly/fast-vs-generic", err, 1e-12)

    # negative control: a 1e-3 relative corruption must trip the energy check
    bad = SparseLike(A)
    bad.values[len(bad.values) // 2] *= 1 + 1e-3
    bad_energy = float(c @ bad.matvec(c))
    tripped = abs(bad_energy - ref) / abs(ref) > 1e-6
    cases.append(ValidationCase("assembly/mutation-detected", tripped,
                                "corrupted matrix must fail the identity"))


class SparseLike:
    """Value-mutable copy of a sparse matrix, for the mutation smoke test."""

    def __init__(self, A):
        self.n = A.n
        self.indptr = A.indptr
        self.indices = A.indices
        self.values = A.values.copy()

    def matvec(self, x):
        out = np.zeros(self.n)
        for i in range(self.n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            out[i] = self.values[lo:hi] @ x[self.indices[lo:hi]]
        return out


def _validate_recovery(cases):
    mesh, dofmap = build_mesh(named_domain("rect"), 4, 1)
    params = KernelParams(delta=0.15)
    field = RecoveredField(mesh, dofmap, np.full(dofmap.n_dofs, 3.25), params)
    pts = np.array([[0.37, 0.52], [0.05, 0.93], [0.5, 0.5], [1.0, 0.25]])
    verr = np.abs(field.value_many(pts) - 3.25).max() / 3.25
    _case(cases, "recovery/constant-value", verr, 1e-12)
    gerr = np.abs(field.gradient_many(pts)).max()
    _case(cases, "recovery/constant-gradient", gerr, 1e-10)

    rng = np.random.default_rng(11)
    c = rng.standard_normal(dofmap.n_dofs)
    field = RecoveredField(mesh, dofmap, c, params)
    x = np.array([0.43, 0.61])
    step = 1e-6
    fd = np.empty(2)
    for d in range(2):
        e = np.zeros(2)
        e[d] = step
        fd[d] = (field.smoothed_value(x + e)
                 - field.smoothed_value(x - e)) / (2 * step)
    err = np.abs(field.smoothed_gradient(x) - fd).max()
    _case(cases, "recovery/gradient-vs-fd", err, 1e-5)

    corr = np.abs(field.correction_many(pts)).max()
    cases.append(ValidationCase("recovery/zero-correction-without-g",
                                corr == 0.0, f"max |F| = {corr:.1e}"))


def run_validate(suite: str = "all") -> list[ValidationCase]:
    """Oracle cross-checks runnable from the installed package."""
    suites = {"integrals": (_validate_integrals,),
              "assembly": (_validate_assembly,),
              "recovery": (_validate_recovery,),
              "all": (_validate_integrals, _validate_assembly,
                      _validate_recovery)}
    if suite not in suites:
        raise ValueError(f"unknown suite {suite!r}; "
                         f"choose from {sorted(suites)}")
    cases: list[ValidationCase] = []
    for fn in suites[suite]:
        fn(cases)
    return cases


# ------------------------------------------------------------------ commands

def _print_result(r: ExperimentResult) -> None:
    print(f"{r.domain} / {r.solution}  order {r.order}  N {r.N}  "
          f"delta {r.delta:g}  s {r.s:g}")
    print(f"  dofs {r.n_dofs}  nnz {r.nnz}")
    line = f"  assembly {r.assembly_time_s:.3f} s"
    if r.assembly_time_generic_s is not None:
        line += f"  (generic {r.assembly_time_generic_s:.3f} s)"
    print(line + f"  solve {r.solve_time_s:.3f} s  cg iters {r.cg_iters}")
    print(f"  l2_error {r.l2_error:.5e}  h1_error {r.h1_error:.5e}")
    if r.grad_rec_full is not None:
        print(f"  grad recovery: full {r.grad_rec_full:.5e}  "
              f"interior {r.grad_rec_interior:.5e}  "
              f"corrected {r.grad_rec_corrected:.5e}")


def _cmd_solve(config: ExperimentConfig) -> int:
    result = run_solve(config)
    _print_result(result)
    if config.out:
        write_csv([result], config.out)
        print(f"wrote {config.out}")
    return 0


def _cmd_sweep(config: ExperimentConfig) -> int:
    results, rates = run_sweep(config)
    for r in results:
        cols = [f"N={r.N}", f"delta={r.delta:g}",
                f"l2={r.l2_error:.4e}", f"h1={r.h1_error:.4e}"]
        if r.grad_rec_full is not None:
            cols += [f"rec_full={r.grad_rec_full:.4e}",
                     f"rec_int={r.grad_rec_interior:.4e}",
                     f"rec_corr={r.grad_rec_corrected:.4e}"]
        cols += [f"asm={r.assembly_time_s:.3f}s",
                 f"solve={r.solve_time_s:.3f}s"]
        print("  ".join(cols))
    for col, rr in rates.items():
        steps = " ".join(f"{v:.3f}" for v in rr)
        print(f"rate {col}: [{steps}]  mean {np.mean(rr):.3f}")
    if config.out:
        print(f"wrote {config.out}")
    return 0


def _cmd_validate(suite: str) -> int:
    cases = run_validate(suite)
    failed = 0
    for c in cases:
        mark = "ok  " if c.passed else "FAIL"
        print(f"{mark} {c.name}  ({c.detail})")
        failed += not c.passed
    print(f"{len(cases) - failed}/{len(cases)} checks passed")
    return 1 if failed else 0


def _cmd_info() -> int:
    print(f"nlgfem {__version__} (numpy {np.__version__})")
    print("domains:")
    for name in ("rect", "lshape", "cube"):
        dom = named_domain(name)
        label = " union ".join(
            "x".join(f"[{iv[0]:g},{iv[1]:g}]" for iv in box)
            for box in dom.boxes)
        print(f"  {name}: {label}")
    print("solutions:")
    for name in ("rect-trig", "lshape-mixed", "cube-trig"):
        sol = manufactured_solution(name)
        print(f"  {name}: {sol.dim}D")
    print("defaults: s=2  cutoff_eps=1e-16  cg_tol=1e-10  order=1")
    example = KernelParams(delta=0.01)
    print(f"example stencil: delta=0.01 h=1/128 -> M="
          f"{interaction_stencil(example, 1.0 / 128)}")
    return 0


# ------------------------------------------------------------- flag plumbing

_CONFIG_KEYS = {"domain", "solution", "order", "n", "delta", "s",
                "cutoff_eps", "no_invariance", "compare_assembly", "recovery",
                "quad_order", "cg_tol", "threads", "out"}


def _parse_int_list(text: str):
    vals = [int(v) for v in text.split(",") if v != ""]
    return vals[0] if len(vals) == 1 else vals


def _parse_float_list(text: str):
    vals = [float(v) for v in text.split(",") if v != ""]
    return vals[0] if len(vals) == 1 else vals


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domain", help="rect, lshape or cube")
    common.add_argument("--solution",
                        help="rect-trig, lshape-mixed or cube-trig")
    common.add_argument("--order", type=int, choices=(1, 2, 3))
    common.add_argument("--n", type=_parse_int_list, metavar="N[,N...]",
                        help="cells per unit length; comma list sweeps h")
    common.add_argument("--delta", type=_parse_float_list,
                        metavar="D[,D...]",
                        help="horizon; comma list sweeps delta")
    common.add_argument("--s", type=float, help="kernel shape (default 2)")
    common.add_argument("--cutoff-eps", type=float,
                        help="relative kernel cutoff (default 1e-16)")
    common.add_argument("--no-invariance", action="store_true",
                        help="force the generic per-pair assembly path")
    common.add_argument("--compare-assembly", action="store_true",
                        help="run and time both assembly paths")
    common.add_argument("--recovery", action="store_true",
                        help="compute gradient-recovery error columns")
    common.add_argument("--quad-order", type=int,
                        help="error-quadrature points per axis")
    common.add_argument("--cg-tol", type=float)
    common.add_argument("--threads", type=int,
                        help="worker cap (runs are serial either way)")
    common.add_argument("--out", help="write results CSV here")
    common.add_argument("--config", help="JSON config file; flags override")

    parser = argparse.ArgumentParser(
        prog="nlgfem",
        description="Nonlocal diffusion solver on unions of axis-aligned "
                    "boxes (Gaussian kernel, quadrature-free assembly).")
    parser.add_argument("--version", action="version",
                        version=f"nlgfem {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common],
                   help="solve one problem and report errors")
    sub.add_parser("sweep", parents=[common],
                   help="run an h- or delta-convergence sweep")
    pv = sub.add_parser("validate", help="run built-in oracle cross-checks")
    pv.add_argument("suite", nargs="?", default="all",
                    choices=("integrals", "assembly", "recovery", "all"))
    sub.add_parser("info", help="print versions, domains and defaults")
    return parser


def _merge_config(args: argparse.Namespace) -> ExperimentConfig:
    merged = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(data)

    flag_map = {"domain": args.domain, "solution": args.solution,
                "order": args.order, "n": args.n, "delta": args.delta,
                "s": args.s, "cutoff_eps": args.cutoff_eps,
                "quad_order": args.quad_order, "cg_tol": args.cg_tol,
                "threads": args.threads, "out": args.out}
    for key, val in flag_map.items():
        if val is not None:
            merged[key] = val
    for key in ("no_invariance", "compare_assembly", "recovery"):
        if getattr(args, key):
            merged[key] = True

    merged["invariance"] = not merged.pop("no_invariance", False)
    config = ExperimentConfig(**{k: v for k, v in merged.items()})

    n_list = isinstance(config.n, list)
    d_list = isinstance(config.delta, list)
    if args.command == "sweep":
        if n_list == d_list:
            raise ValueError("sweep needs a comma list for exactly one of "
                             "--n or --delta")
        config = replace(config, sweep="h" if n_list else "delta")
    elif n_list or d_list:
        raise ValueError("solve takes scalar --n and --delta; "
                         "use the sweep subcommand")
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "info":
            return _cmd_info()
        if args.command == "validate":
            return _cmd_validate(args.suite)
        config = _merge_config(args)
        if args.command == "solve":
            return _cmd_solve(config)
        return _cmd_sweep(config)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
