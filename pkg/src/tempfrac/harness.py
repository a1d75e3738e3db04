"""Convergence studies: run a solver over a resolution ladder, measure errors and orders.

A study report serializes to CSV with the columns
``resolution,error,order,cpu_seconds`` preceded by ``#``-prefixed metadata lines,
or to a markdown table in the style of published convergence tables.
"""

from __future__ import annotations

import io
import math
import statistics
from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timezone

import numpy as np

from tempfrac.analytic import (
    BenchmarkProblem,
    BlochParams,
    DiffusionProblem,
    benchmark_exact,
    bloch_mplus_exact,
    bloch_mz_exact,
    diffusion_exact,
    forced_exact_solution,
)
from tempfrac.mesh import TemperedParams, build_graded_mesh, optimal_grading
from tempfrac.solvers.benchmark import solve_benchmark_forced
from tempfrac.solvers.bloch import solve_bloch
from tempfrac.solvers.diffusion import build_spatial_grid, solve_diffusion

PROBLEMS = ("benchmark", "forced", "diffusion", "bloch_mz", "bloch_mplus")
NORMS = ("final", "max_time")
REFERENCES = ("analytic", "finest")
CSV_COLUMNS = ("resolution", "error", "order", "cpu_seconds")
_TIMING_KEYS = ("date",)


@dataclass(frozen=True)
class StudySpec:
    """One convergence study.

    ``resolutions`` are the step counts ``N`` (``vary="N"``) or the spatial
    counts ``M`` with ``N = M^2`` (``vary="M"``, diffusion only). ``r=None``
    selects ``2(2 - alpha)/alpha`` for the L1 schemes and 1 for WSGL.

    ``norm="final"`` measures the largest nodal error at ``t = T``;
    ``"max_time"`` takes the largest error over every time level.
    ``reference="finest"`` compares against the same solver at
    ``finest_factor`` times the largest resolution instead of the analytic
    solution.
    """

    problem: str
    resolutions: tuple[int, ...]
    alpha: float
    rho: float = 0.0
    scheme: str = "L1"
    r: float | None = None
    m: int = 0
    soe_eps: float = 1e-9
    k0: float = 2.0
    u0: float = 1.0
    T: float = 1.0
    D: float = 1.0
    M: int = 64
    vary: str = "N"
    norm: str = "final"
    reference: str = "analytic"
    finest_factor: int = 4
    varpi0: float = 0.0

    def __post_init__(self) -> None:
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if not self.resolutions:
            raise ValueError("the resolution ladder is empty")
        if any(int(v) != v or v < 1 for v in self.resolutions):
            raise ValueError("resolutions must be positive integers")
        if list(self.resolutions) != sorted(set(self.resolutions)):
            raise ValueError("resolutions must be strictly increasing")
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}, got {self.norm!r}")
        if self.reference not in REFERENCES:
            raise ValueError(f"reference must be one of {REFERENCES}, got {self.reference!r}")
        if self.vary not in ("N", "M"):
            raise ValueError(f"vary must be 'N' or 'M', got {self.vary!r}")
        if self.vary == "M" and self.problem != "diffusion":
            raise ValueError("vary='M' applies to the diffusion problem only")
        if self.reference == "finest":
            if self.finest_factor < 2 or int(self.finest_factor) != self.finest_factor:
                raise ValueError("the finest-grid reference must be strictly finer (factor >= 2)")
            if self.vary == "M":
                raise ValueError("the finest-grid reference varies N only")
        TemperedParams(self.alpha, self.rho)

    @property
    def params(self) -> TemperedParams:
        return TemperedParams(self.alpha, self.rho)

    def grading(self) -> float:
        if self.r is not None:
            return float(self.r)
        if self.scheme == "WSGL":
            return 1.0
        return optimal_grading(self.alpha) if self.alpha < 1.0 else 1.0


@dataclass
class StudyRow:
    resolution: int
    error: float
    order: float | None = None
    cpu_seconds: float = math.nan


@dataclass
class ConvergenceReport:
    """Rows in resolution order plus string metadata."""

    rows: list[StudyRow] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def errors(self) -> list[float]:
        return [row.error for row in self.rows]

    @property
    def orders(self) -> list[float | None]:
        return [row.order for row in self.rows]


def estimate_order(errors, ratio: float = 2.0) -> list[float | None]:
    """``order_k = ln(e_{k-1}/e_k)/ln(ratio)``; the first entry and any entry
    touching a non-positive or non-finite error are ``None``."""
    if not ratio > 1.0:
        raise ValueError(f"refinement ratio must exceed 1, got {ratio}")
    out: list[float | None] = [None]
    for prev, cur in zip(errors[:-1], errors[1:]):
        ok = all(math.isfinite(v) and v > 0.0 for v in (prev, cur))
        out.append(math.log(prev / cur) / math.log(ratio) if ok else None)
    return out[: len(errors)]


# -- row evaluation ---------------------------------------------------------------


def _timed(fn, repeats: int = 3):
    """Run ``fn`` (returning an object with ``elapsed``); median of 3 when under 1 s."""
    run = fn()
    times = [run.elapsed]
    if run.elapsed < 1.0:
        for _ in range(repeats - 1):
            times.append(fn().elapsed)
    return run, statistics.median(times)


def _scalar_solution(spec: StudySpec, N: int):
    """Times, numerical samples and elapsed seconds for the scalar problems."""
    mesh = build_graded_mesh(spec.T, N, spec.grading())
    p = spec.params
    if spec.problem in ("benchmark", "forced"):
        forcing = None
        k0 = spec.k0
        if spec.problem == "forced":
            _, forcing = forced_exact_solution(p, spec.u0)
            k0 = 0.0
        run, cpu = _timed(
            lambda: solve_benchmark_forced(
                p, k0, spec.u0, mesh, spec.scheme, forcing, m=spec.m, soe_eps=spec.soe_eps
            )
        )
        return np.asarray(run.times), np.asarray(run.values), cpu
    bp = BlochParams(p, varpi0=spec.varpi0)
    run, cpu = _timed(lambda: solve_bloch(bp, mesh))
    values = run.mz if spec.problem == "bloch_mz" else np.abs(run.mplus)
    return np.asarray(run.times), values, cpu


def _scalar_exact(spec: StudySpec, t: np.ndarray) -> np.ndarray:
    p = spec.params
    if spec.problem == "benchmark":
        return benchmark_exact(BenchmarkProblem(p, spec.k0, spec.u0, spec.T), t)
    if spec.problem == "forced":
        u, _ = forced_exact_solution(p, spec.u0)
        return u(t)
    bp = BlochParams(p, varpi0=spec.varpi0)
    if spec.problem == "bloch_mz":
        return bloch_mz_exact(bp, t)
    return np.abs(bloch_mplus_exact(bp, t))


def _diffusion_problem(spec: StudySpec) -> DiffusionProblem:
    return DiffusionProblem(spec.params, spec.D, math.pi, np.sin, None, spec.T)


def _diffusion_run(spec: StudySpec, N: int, M: int, exact=None, keep: str = "final"):
    p = _diffusion_problem(spec)
    mesh = build_graded_mesh(spec.T, N, spec.grading())
    grid = build_spatial_grid(0.0, p.l, M)
    fast = spec.scheme == "FastL1"
    if spec.scheme not in ("L1", "FastL1"):
        raise ValueError(f"diffusion studies support L1 and FastL1, not {spec.scheme}")
    return _timed(lambda: solve_diffusion(p, mesh, grid, fast, spec.soe_eps, exact=exact, keep=keep))


def _diffusion_error(spec: StudySpec, res: int, reference=None):
    N, M = (res, spec.M) if spec.vary == "N" else (res * res, res)
    p = _diffusion_problem(spec)
    if reference is not None:
        keep = "all" if spec.norm == "max_time" else "final"
        run, cpu = _diffusion_run(spec, N, M, keep=keep)
        ref_fields, factor = reference
        ref = ref_fields[::factor] if keep == "all" else ref_fields[-1:]
        return float(np.max(np.abs(run.fields - ref))), cpu
    if spec.norm == "max_time":
        def exact(x, t):
            return diffusion_exact(p, x, t)
        run, cpu = _diffusion_run(spec, N, M, exact=exact)
        return float(run.max_error), cpu
    run, cpu = _diffusion_run(spec, N, M)
    grid_x = run.grid.x
    err = np.max(np.abs(run.final - diffusion_exact(p, grid_x, spec.T)))
    return float(err), cpu


def _norm(diff: np.ndarray, spec: StudySpec) -> float:
    diff = np.abs(diff)
    return float(diff[-1] if spec.norm == "final" else diff.max())


def run_study(spec: StudySpec) -> ConvergenceReport:
    """Evaluate every resolution of ``spec``; failures are recorded per row."""
    report = ConvergenceReport(metadata=_metadata(spec))
    ref = None
    if spec.reference == "finest":
        fine = spec.resolutions[-1] * spec.finest_factor
        report.metadata["reference_resolution"] = str(fine)
        if spec.problem == "diffusion":
            keep = "all" if spec.norm == "max_time" else "final"
            run, _ = _diffusion_run(spec, fine, spec.M, keep=keep)
            ref = run.fields
        else:
            _, ref, _ = _scalar_solution(spec, fine)
    failures = []
    for res in spec.resolutions:
        try:
            if spec.problem == "diffusion":
                if ref is not None:
                    err, cpu = _diffusion_error(spec, res, (ref, fine // res))
                else:
                    err, cpu = _diffusion_error(spec, res)
            else:
                t, u, cpu = _scalar_solution(spec, res)
                if ref is not None:
                    factor = fine // res
                    target = ref[::factor]
                else:
                    target = _scalar_exact(spec, t if spec.norm == "max_time" else t[-1:])
                    u = u if spec.norm == "max_time" else u[-1:]
                err = _norm(u - target, spec)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            failures.append(f"{res}: {type(exc).__name__}: {exc}")
            err, cpu = math.nan, math.nan
        report.rows.append(StudyRow(int(res), err, None, cpu))
    ratios = {b / a for a, b in zip(spec.resolutions[:-1], spec.resolutions[1:])}
    if len(ratios) <= 1:
        ratio = ratios.pop() if ratios else 2.0
        for row, order in zip(report.rows, estimate_order(report.errors, ratio)):
            row.order = order
    else:
        report.metadata["orders"] = "omitted: refinement ratio is not constant"
    for k, msg in enumerate(failures):
        report.metadata[f"failure_{k}"] = msg
    return report


def _metadata(spec: StudySpec) -> dict[str, str]:
    from tempfrac import __version__

    meta = {f.name: _format_meta(getattr(spec, f.name)) for f in fields(spec)}
    meta["grading"] = repr(spec.grading())
    meta["version"] = __version__
    meta["date"] = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return meta


def _format_meta(value) -> str:
    if isinstance(value, tuple):
        return " ".join(str(v) for v in value)
    return "" if value is None else str(value)


# -- serialization ------------------------------------------------------------------


def _fmt_full(value: float | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.17g}"


def _fmt_sci(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.4E}"


def emit_table(report: ConvergenceReport, fmt: str = "csv") -> bytes:
    """Serialize ``report``.

    ``csv``: metadata lines ``# key=value`` then the four columns, values in
    17 significant digits (lossless). ``markdown``: errors in scientific
    notation with 4 significant digits, orders with 2 decimals.
    """
    out = io.StringIO()
    if fmt == "csv":
        for key, value in report.metadata.items():
            out.write(f"# {key}={value}\n")
        out.write(",".join(CSV_COLUMNS) + "\n")
        for row in report.rows:
            out.write(
                ",".join(
                    [str(row.resolution), _fmt_full(row.error), _fmt_full(row.order), _fmt_full(row.cpu_seconds)]
                )
                + "\n"
            )
    elif fmt == "markdown":
        out.write("| resolution | error | order | cpu_seconds |\n|---:|---:|---:|---:|\n")
        for row in report.rows:
            order = "" if row.order is None else f"{row.order:.2f}"
            cpu = "" if math.isnan(row.cpu_seconds) else f"{row.cpu_seconds:.3g}"
            out.write(f"| {row.resolution} | {_fmt_sci(row.error)} | {order} | {cpu} |\n")
    else:
        raise ValueError(f"format must be 'csv' or 'markdown', got {fmt!r}")
    return out.getvalue().encode("utf-8")


def parse_table(data: bytes | str) -> ConvergenceReport:
    """Inverse of ``emit_table(report, "csv")``."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    report = ConvergenceReport()
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: metadata line without '='")
            report.metadata[key] = value
            continue
        if not line.strip():
            continue
        if not header_seen:
            if tuple(line.strip().split(",")) != CSV_COLUMNS:
                raise ValueError(f"line {lineno}: expected header {','.join(CSV_COLUMNS)}")
            header_seen = True
            continue
        parts = line.strip().split(",")
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        res, err, order, cpu = parts
        report.rows.append(
            StudyRow(int(res), float(err), float(order) if order else None, float(cpu))
        )
    if not header_seen:
        raise ValueError("missing CSV header")
    return report


def strip_timing(report: ConvergenceReport) -> ConvergenceReport:
    """Copy of ``report`` without timing data (for determinism comparisons)."""
    meta = {k: v for k, v in report.metadata.items() if k not in _TIMING_KEYS}
    rows = [replace(row, cpu_seconds=math.nan) for row in report.rows]
    return ConvergenceReport(rows, meta)
