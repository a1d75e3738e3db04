"""Command-line interface: ``tempfrac <subcommand> [config.ini] [--set key=value ...]``.

Configuration files are INI-style with the sections ``problem``, ``mesh``,
``scheme``, ``study`` and ``fit``. Every subcommand accepts only the keys of
its schema (see ``SCHEMAS`` or ``tempfrac <subcommand> --keys``). Overrides
given with ``--set`` use ``section.key=value`` or a bare ``key=value`` when the
key name is unique within the subcommand.

Results are written as CSV (17 significant digits) to ``--output``; a
one-line summary goes to standard output. The environment variable
``TEMPFRAC_THREADS`` caps the number of BLAS and numba threads.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import os
import re
import sys
from dataclasses import dataclass

import numpy as np

# type tags: float, int, str, bool, floats (whitespace/comma separated), ints
_F, _I, _S, _B, _FL, _IL = "float", "int", "str", "bool", "floats", "ints"

SCHEMAS: dict[str, dict[str, dict[str, tuple[str, object]]]] = {
    "bench": {
        "problem": {
            "alpha": (_F, None), "rho": (_F, 0.0), "k0": (_F, 2.0), "u0": (_F, 1.0),
            "T": (_F, 1.0), "forced": (_B, False),
        },
        "mesh": {"N": (_I, None), "r": (_F, None)},
        "scheme": {"name": (_S, "L1"), "m": (_I, 0), "soe_eps": (_F, 1e-9)},
    },
    "bloch": {
        "problem": {
            "alpha": (_F, None), "rho": (_F, 0.0), "T1p": (_F, 1.0), "T2p": (_F, 20.0),
            "varpi0": (_F, 0.0), "M0": (_F, 100.0), "Mz0": (_F, 0.0), "Mx0": (_F, 0.0),
            "My0": (_F, 100.0), "T": (_F, 1.0), "check": (_B, True),
        },
        "mesh": {"N": (_I, None), "r": (_F, None)},
    },
    "diffusion": {
        "problem": {
            "alpha": (_F, None), "rho": (_F, 0.0), "D": (_F, 1.0), "T": (_F, 1.0),
            "initial": (_S, "sine"), "L": (_F, 20.0), "width": (_F, 0.03),
        },
        "mesh": {"N": (_I, None), "M": (_I, None), "r": (_F, None)},
        "scheme": {"name": (_S, "L1"), "soe_eps": (_F, 1e-9)},
    },
    "twolayer": {
        "problem": {
            "alpha1": (_F, None), "rho1": (_F, 0.0), "D1": (_F, None), "Sa1": (_F, 0.0), "Sb1": (_F, 0.0),
            "alpha2": (_F, None), "rho2": (_F, 0.0), "D2": (_F, None), "Sa2": (_F, 0.0), "Sb2": (_F, 0.0),
            "l0": (_F, 0.0), "l1": (_F, 0.5), "l2": (_F, 1.0), "X10": (_F, 1.0), "X20": (_F, 1.0),
            "fL": (_F, 0.0), "fR": (_F, 0.0), "T": (_F, 1.0), "n_modes": (_I, 100), "check": (_B, True),
        },
        "mesh": {"N": (_I, None), "M": (_I, None), "r": (_F, None)},
        "scheme": {"interface": (_S, "one_sided")},
    },
    "soe-check": {
        "problem": {"beta": (_F, None), "eps": (_F, 1e-9), "sigma": (_F, 1e-6), "T": (_F, 1.0)},
    },
    "fit": {
        "fit": {
            "data": (_S, None), "model": (_S, "staged"), "max_iter": (_I, 20_000),
            "rel_tol": (_F, 1e-12), "restarts": (_I, 3), "seed": (_I, 0),
        },
    },
    "study": {
        "study": {
            "problem": (_S, None), "resolutions": (_IL, None), "vary": (_S, "N"),
            "norm": (_S, "final"), "reference": (_S, "analytic"), "finest_factor": (_I, 4),
            "format": (_S, "csv"),
        },
        "problem": {
            "alpha": (_F, None), "rho": (_F, 0.0), "k0": (_F, 2.0), "u0": (_F, 1.0), "T": (_F, 1.0),
            "D": (_F, 1.0), "varpi0": (_F, 0.0),
        },
        "mesh": {"M": (_I, 64), "r": (_F, None)},
        "scheme": {"name": (_S, "L1"), "m": (_I, 0), "soe_eps": (_F, 1e-9)},
    },
}


class ConfigError(ValueError):
    """Schema or value problems, one message per offending key."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("\n".join(problems))


@dataclass
class Config:
    command: str
    values: dict[str, dict[str, object]]

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    lines, section = {}, None
    for lineno, line in enumerate(text.splitlines(), 1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            lines[(section, "")] = lineno
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            lines[(section, m.group(1).strip())] = lineno
    return lines


def _convert(kind: str, raw: str):
    raw = raw.strip()
    if kind == _F:
        return float(raw)
    if kind == _I:
        value = float(raw)
        if value != int(value):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(value)
    if kind == _B:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind in (_FL, _IL):
        items = [v for v in re.split(r"[,\s]+", raw) if v]
        return tuple(_convert(_F if kind == _FL else _I, v) for v in items)
    return raw


def parse_config(command: str, path: str | None = None, overrides: list[str] = ()) -> Config:
    """Read ``path`` (optional) and ``overrides`` against the schema of ``command``.

    Raises :class:`ConfigError` listing every unknown key, bad value and
    missing required key, with line numbers for file entries.
    """
    if command not in SCHEMAS:
        raise ConfigError([f"unknown subcommand {command!r}"])
    schema = SCHEMAS[command]
    raw: dict[tuple[str, str], tuple[str, str]] = {}
    problems: list[str] = []
    if path is not None:
        if not os.path.isfile(path):
            raise FileNotFoundError(f"config file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        parser = configparser.ConfigParser(interpolation=None, strict=True)
        parser.optionxform = str  # keep key case
        try:
            parser.read_string(text, source=path)
        except configparser.Error as exc:
            raise ConfigError([f"{path}: {exc}"]) from None
        lines = _key_lines(text)
        for section in parser.sections():
            if section not in schema:
                problems.append(f"{path}:{lines.get((section, ''), '?')}: unknown section [{section}]")
                continue
            for key, value in parser.items(section):
                where = f"{path}:{lines.get((section, key), '?')}"
                if key not in schema[section]:
                    problems.append(f"{where}: unknown key '{key}' in [{section}]")
                else:
                    raw[(section, key)] = (value, where)
    for item in overrides:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep:
            problems.append(f"--set {item!r}: expected key=value")
            continue
        if "." in name:
            section, key = name.split(".", 1)
            matches = [(section, key)] if key in schema.get(section, {}) else []
        else:
            matches = [(s, name) for s in schema if name in schema[s]]
        if len(matches) != 1:
            why = "ambiguous" if matches else "unknown"
            problems.append(f"--set {name}: {why} key for '{command}'")
            continue
        raw[matches[0]] = (value, f"--set {name}")
    values: dict[str, dict[str, object]] = {}
    for section, keys in schema.items():
        values[section] = {}
        for key, (kind, default) in keys.items():
            if (section, key) in raw:
                text_value, where = raw[(section, key)]
                try:
                    values[section][key] = _convert(kind, text_value)
                except ValueError as exc:
                    problems.append(f"{where}: {section}.{key}: {exc}")
            elif default is None and not (section == "mesh" and key == "r"):
                problems.append(f"missing required key {section}.{key}")
            else:
                values[section][key] = default
    if problems:
        raise ConfigError(problems)
    cfg = Config(command, values)
    try:
        _validate(cfg)
    except (ValueError, TypeError) as exc:
        raise ConfigError([str(exc)]) from None
    return cfg


def _validate(cfg: Config) -> None:
    # build the typed objects once so invalid physics fails at parse time
    from tempfrac.mesh import TemperedParams

    p = cfg.values.get("problem", {})
    if "alpha" in p:
        TemperedParams(p["alpha"], p["rho"])
    if "alpha1" in p:
        TemperedParams(p["alpha1"], p["rho1"])
        TemperedParams(p["alpha2"], p["rho2"])
    mesh = cfg.values.get("mesh", {})
    for key in ("N", "M"):
        if key in mesh and mesh[key] is not None and mesh[key] < 1:
            raise ValueError(f"mesh.{key} must be a positive integer, got {mesh[key]}")
    if "r" in mesh and mesh["r"] is not None and mesh["r"] < 1.0:
        raise ValueError(f"grading exponent r must be >= 1, got {mesh['r']}")
    if cfg.command == "study":
        _study_spec(cfg)


# -- commands -------------------------------------------------------------------------


def _grading(cfg: Config, alpha: float) -> float:
    from tempfrac.mesh import optimal_grading

    r = cfg["mesh"].get("r")
    if r is not None:
        return float(r)
    return optimal_grading(alpha) if alpha < 1.0 else 1.0


def _write_csv(path: str | None, header: list[str], rows, meta: dict[str, object]) -> None:
    if path is None:
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, value in meta.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in row])


def _cmd_bench(cfg: Config, out: str | None) -> str:
    from tempfrac.analytic import BenchmarkProblem, benchmark_exact, forced_exact_solution
    from tempfrac.mesh import TemperedParams, build_graded_mesh
    from tempfrac.solvers.benchmark import solve_benchmark_forced

    p, s = cfg["problem"], cfg["scheme"]
    params = TemperedParams(p["alpha"], p["rho"])
    r = 1.0 if s["name"] == "WSGL" and cfg["mesh"]["r"] is None else _grading(cfg, p["alpha"])
    mesh = build_graded_mesh(p["T"], cfg["mesh"]["N"], r)
    if p["forced"]:
        exact, forcing = forced_exact_solution(params, p["u0"])
        k0 = 0.0
    else:
        prob = BenchmarkProblem(params, p["k0"], p["u0"], p["T"])
        forcing, k0 = None, p["k0"]

        def exact(t):
            return benchmark_exact(prob, t)

    run = solve_benchmark_forced(
        params, k0, p["u0"], mesh, s["name"], forcing, m=s["m"], soe_eps=s["soe_eps"]
    )
    ref = exact(run.times)
    err = np.abs(run.values - ref)
    _write_csv(out, ["t", "u", "exact", "abs_error"], zip(run.times, run.values, ref, err),
               {"command": "bench", "scheme": s["name"], "N": mesh.N, "r": r})
    return (
        f"bench scheme={s['name']} alpha={p['alpha']} N={mesh.N} r={r:.4g} "
        f"error_max={err.max():.4E} error_final={err[-1]:.4E}"
    )


def _cmd_bloch(cfg: Config, out: str | None) -> str:
    from tempfrac.analytic import BlochParams, bloch_mplus_exact, bloch_mz_exact
    from tempfrac.mesh import TemperedParams, build_graded_mesh
    from tempfrac.solvers.bloch import solve_bloch

    p = cfg["problem"]
    params = TemperedParams(p["alpha"], p["rho"])
    bp = BlochParams(params, p["T1p"], p["T2p"], p["varpi0"], p["M0"], p["Mz0"], p["Mx0"], p["My0"])
    mesh = build_graded_mesh(p["T"], cfg["mesh"]["N"], _grading(cfg, p["alpha"]))
    run = solve_bloch(bp, mesh)
    _write_csv(out, ["t", "Mz", "Mx", "My", "abs_Mplus"],
               zip(run.times, run.mz, run.mx, run.my, np.abs(run.mplus)), {"command": "bloch"})
    line = f"bloch alpha={p['alpha']} rho={p['rho']} N={mesh.N} Mz(T)={run.mz[-1]:.6g} |M+|(T)={abs(run.mplus[-1]):.6g}"
    if p["check"]:
        ez = abs(run.mz[-1] - bloch_mz_exact(bp, p["T"]))
        ep = abs(run.mplus[-1] - bloch_mplus_exact(bp, p["T"]))
        line += f" error_Mz={ez:.4E} error_Mplus={ep:.4E}"
    return line


def _cmd_diffusion(cfg: Config, out: str | None) -> str:
    from tempfrac.analytic import DiffusionProblem, diffusion_exact, msd_exact
    from tempfrac.mesh import TemperedParams, build_graded_mesh
    from tempfrac.solvers.diffusion import build_spatial_grid, solve_diffusion

    p, s, m = cfg["problem"], cfg["scheme"], cfg["mesh"]
    params = TemperedParams(p["alpha"], p["rho"])
    mesh = build_graded_mesh(p["T"], m["N"], _grading(cfg, p["alpha"]))
    if s["name"] not in ("L1", "FastL1"):
        raise ValueError(f"diffusion scheme must be L1 or FastL1, got {s['name']!r}")
    fast = s["name"] == "FastL1"
    if p["initial"] == "sine":
        prob = DiffusionProblem(params, p["D"], math.pi, np.sin, None, p["T"])
        grid = build_spatial_grid(0.0, prob.l, m["M"])
        run = solve_diffusion(prob, mesh, grid, fast, s["soe_eps"])
        ref = diffusion_exact(prob, grid.x, p["T"])
        err = np.abs(run.final - ref)
        _write_csv(out, ["x", "u", "exact", "abs_error"], zip(grid.x, run.final, ref, err),
                   {"command": "diffusion", "scheme": s["name"]})
        return f"diffusion scheme={s['name']} N={m['N']} M={m['M']} error_final={err.max():.4E} cpu={run.elapsed:.3g}s"
    if p["initial"] == "gaussian":
        L, w = p["L"], p["width"]

        def psi(x):
            return np.exp(-0.5 * ((x - L) / w) ** 2) / (w * math.sqrt(2.0 * math.pi))

        prob = DiffusionProblem(params, p["D"], 2.0 * L, psi, None, p["T"])
        grid = build_spatial_grid(0.0, prob.l, m["M"])
        run = solve_diffusion(prob, mesh, grid, fast, s["soe_eps"], keep="all")
        xc = grid.x - L
        msd = np.trapezoid(run.fields * xc**2, grid.x, axis=1)
        ref = msd_exact(params, p["D"], run.times)
        _write_csv(out, ["t", "msd", "exact"], zip(run.times, msd, ref), {"command": "diffusion"})
        rel = abs(msd[-1] - ref[-1]) / ref[-1]
        return f"diffusion initial=gaussian N={m['N']} M={m['M']} msd(T)={msd[-1]:.6g} rel_error={rel:.4E}"
    raise ValueError(f"problem.initial must be 'sine' or 'gaussian', got {p['initial']!r}")


def _cmd_twolayer(cfg: Config, out: str | None) -> str:
    from tempfrac.analytic import LayerSpec, TwoLayerProblem, twolayer_semianalytic
    from tempfrac.mesh import TemperedParams, build_graded_mesh
    from tempfrac.solvers.diffusion import build_spatial_grid
    from tempfrac.solvers.twolayer import solve_twolayer, twolayer_grading

    p, m = cfg["problem"], cfg["mesh"]
    lay1 = LayerSpec(p["l0"], p["l1"], TemperedParams(p["alpha1"], p["rho1"]), p["D1"], p["Sa1"], p["Sb1"])
    lay2 = LayerSpec(p["l1"], p["l2"], TemperedParams(p["alpha2"], p["rho2"]), p["D2"], p["Sa2"], p["Sb2"])
    prob = TwoLayerProblem(lay1, lay2, p["X10"], p["X20"], p["fL"], p["fR"], p["n_modes"])
    r = m["r"] if m["r"] is not None else twolayer_grading(prob)
    mesh = build_graded_mesh(p["T"], m["N"], r)
    grid = build_spatial_grid(p["l0"], p["l2"], m["M"])
    run = solve_twolayer(prob, mesh, grid, cfg["scheme"]["interface"])
    cols, rows = ["x", "X"], [grid.x, run.final]
    line = f"twolayer N={m['N']} M={m['M']} interface={cfg['scheme']['interface']}"
    if p["check"]:
        ref = np.empty_like(grid.x)
        ref[1:-1] = twolayer_semianalytic(prob, grid.x[1:-1], p["T"])
        ref[0], ref[-1] = p["fL"], p["fR"]
        cols += ["semianalytic", "abs_difference"]
        rows += [ref, np.abs(run.final - ref)]
        line += f" max_deviation={np.max(np.abs(run.final - ref)):.4E}"
    _write_csv(out, cols, zip(*rows), {"command": "twolayer"})
    return line


def _cmd_soe_check(cfg: Config, out: str | None) -> str:
    from tempfrac.soe import build_soe

    p = cfg["problem"]
    soe = build_soe(p["beta"], p["eps"], p["sigma"], p["T"])
    _write_csv(out, ["node", "weight"], zip(soe.nodes, soe.weights), {"command": "soe-check"})
    return (
        f"soe-check beta={p['beta']} eps={p['eps']:.1e} sigma={p['sigma']:.1e} "
        f"n_exp={soe.n_exp} max_rel_error={soe.max_rel_error:.4E} max_abs_error={soe.max_abs_error:.4E}"
    )


def _cmd_fit(cfg: Config, out: str | None) -> str:
    from tempfrac.fitting import MODEL_PARAMS, default_config, fit, fit_staged, load_data

    f = cfg["fit"]
    t, y = load_data(f["data"])
    opts = {k: f[k] for k in ("max_iter", "rel_tol", "restarts", "seed")}
    if f["model"] == "staged":
        results = fit_staged(t, y, **opts)
    elif f["model"] in MODEL_PARAMS:
        results = {f["model"]: fit(f["model"], t, y, default_config(f["model"], t, y, **opts))}
    else:
        raise ValueError(f"fit.model must be 'staged' or one of {tuple(MODEL_PARAMS)}, got {f['model']!r}")
    rows = [(kind, name, value) for kind, res in results.items() for name, value in res.params.items()]
    rows += [(kind, "mse", res.mse) for kind, res in results.items()]
    _write_csv(out, ["model", "parameter", "value"], rows, {"command": "fit"})
    return "fit " + " ".join(f"{kind}_mse={res.mse:.6g}" for kind, res in results.items())


def _study_spec(cfg: Config):
    from tempfrac.harness import StudySpec

    st, p, m, s = cfg["study"], cfg["problem"], cfg["mesh"], cfg["scheme"]
    return StudySpec(
        problem=st["problem"], resolutions=tuple(st["resolutions"]), alpha=p["alpha"], rho=p["rho"],
        scheme=s["name"], r=m["r"], m=s["m"], soe_eps=s["soe_eps"], k0=p["k0"], u0=p["u0"], T=p["T"],
        D=p["D"], M=m["M"], vary=st["vary"], norm=st["norm"], reference=st["reference"],
        finest_factor=st["finest_factor"], varpi0=p["varpi0"],
    )


def _cmd_study(cfg: Config, out: str | None) -> str:
    from tempfrac.harness import emit_table, run_study

    report = run_study(_study_spec(cfg))
    fmt = cfg["study"]["format"]
    data = emit_table(report, fmt)
    if out is not None:
        with open(out, "wb") as fh:
            fh.write(data)
    last = report.rows[-1]
    order = "" if last.order is None else f" order={last.order:.2f}"
    return f"study problem={cfg['study']['problem']} resolution={last.resolution} error={last.error:.4E}{order}"


COMMANDS = {
    "bench": _cmd_bench,
    "bloch": _cmd_bloch,
    "diffusion": _cmd_diffusion,
    "twolayer": _cmd_twolayer,
    "soe-check": _cmd_soe_check,
    "fit": _cmd_fit,
    "study": _cmd_study,
}


def _limit_threads():
    value = os.environ.get("TEMPFRAC_THREADS")
    if not value:
        return None
    n = int(value)
    if n < 1:
        raise ValueError(f"TEMPFRAC_THREADS must be >= 1, got {value}")
    import numba
    from threadpoolctl import threadpool_limits

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return threadpool_limits(limits=n)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tempfrac", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS), help="what to run")
    parser.add_argument("config", nargs="?", help="INI configuration file")
    parser.add_argument("-o", "--output", help="CSV artifact path")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a configuration key (repeatable)")
    parser.add_argument("--keys", action="store_true", help="list the configuration keys and exit")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.keys:
        for section, keys in SCHEMAS[args.command].items():
            for key, (kind, default) in keys.items():
                req = "required" if default is None else f"default {default}"
                print(f"{section}.{key}: {kind} ({req})")
        return 0
    try:
        _limit_threads()
        cfg = parse_config(args.command, args.config, args.overrides)
        print(COMMANDS[args.command](cfg, args.output))
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 2
    except (OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
