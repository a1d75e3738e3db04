"""Relaxometry signal models and a box-constrained least-squares fitter.

Models (``t`` in the data's time unit):

* ``monoexp``:    ``A0 exp(-t/T2) + C``
* ``fractional``: ``A0 E_alpha(-t^alpha/T2) + C``
* ``tempered``:   ``A0 exp(-rho t) |E_alpha(-k3 t^alpha)| + C`` with ``k3 = i varpi0 + 1/T2``

The models nest: ``fractional`` at ``alpha = 1`` is ``monoexp``, and
``tempered`` at ``rho = varpi0 = 0`` is ``fractional``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from tempfrac.laplace import relaxation_function

MODEL_PARAMS: dict[str, tuple[str, ...]] = {
    "monoexp": ("A0", "T2", "C"),
    "fractional": ("A0", "T2", "C", "alpha"),
    "tempered": ("A0", "T2", "C", "alpha", "rho", "varpi0"),
}
STAGES = ("monoexp", "fractional", "tempered")

# staged-protocol seeds and ranges for the parameters new to the tempered model
VARPI0_SEED, VARPI0_RANGE = 10.0, (0.0, 250.0)
RHO_SEED, RHO_RANGE = 0.1, (0.0, 1.0)
SEED_BOX = (0.7, 1.3)
ALPHA_RANGE = (0.05, 1.0)


def _check_kind(kind: str) -> None:
    if kind not in MODEL_PARAMS:
        raise ValueError(f"unknown model {kind!r}; expected one of {tuple(MODEL_PARAMS)}")


@dataclass(frozen=True)
class SignalModel:
    """A model kind with its parameter vector (ordered as ``MODEL_PARAMS[kind]``)."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        _check_kind(self.kind)
        names = MODEL_PARAMS[self.kind]
        if len(self.params) != len(names):
            raise ValueError(f"{self.kind} takes {len(names)} parameters {names}, got {len(self.params)}")
        p = self.as_dict()
        if not p["A0"] > 0.0:
            raise ValueError(f"A0 must be positive, got {p['A0']}")
        if not p["T2"] > 0.0:
            raise ValueError(f"T2 must be positive, got {p['T2']}")
        if "alpha" in p and not 0.0 < p["alpha"] <= 1.0:
            raise ValueError(f"alpha must lie in (0,1], got {p['alpha']}")
        if p.get("rho", 0.0) < 0.0:
            raise ValueError(f"rho must be >= 0, got {p['rho']}")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(MODEL_PARAMS[self.kind], self.params))

    def __call__(self, t) -> np.ndarray:
        return eval_model(self, t)


def _eval(kind: str, params, t: np.ndarray) -> np.ndarray:
    if kind == "monoexp":
        A0, T2, C = params
        return A0 * np.exp(-t / T2) + C
    if kind == "fractional":
        A0, T2, C, alpha = params
        return A0 * relaxation_function(alpha, 1.0 / T2, t).real + C
    A0, T2, C, alpha, rho, varpi0 = params
    k3 = 1j * varpi0 + 1.0 / T2
    return A0 * np.exp(-rho * t) * np.abs(relaxation_function(alpha, k3, t)) + C


def eval_model(m: SignalModel, t) -> np.ndarray:
    """Model signal at times ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("model times must be nonnegative")
    return _eval(m.kind, m.params, t)


def mean_squared_error(m: SignalModel, t, y) -> float:
    """``sum (model - y)^2 / n``."""
    r = eval_model(m, t) - np.asarray(y, dtype=float)
    return float(np.mean(r * r))


@dataclass(frozen=True)
class FitConfig:
    """Parameter boxes, the starting point(s) and optimizer controls.

    ``starts`` holds one or more starting vectors; the best fit over all of
    them is kept. Each start is refined by Nelder-Mead, then restarted
    ``restarts`` times from a small perturbation of the incumbent.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    starts: tuple[tuple[float, ...], ...]
    max_iter: int = 20_000
    rel_tol: float = 1e-12
    restarts: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("parameter bounds must be finite")
        if np.any(hi <= lo):
            raise ValueError("every parameter box must be non-empty (lower < upper)")
        if not self.starts:
            raise ValueError("need at least one starting point")
        for s in self.starts:
            s = np.asarray(s, float)
            if s.shape != lo.shape or np.any(s < lo) or np.any(s > hi):
                raise ValueError(f"start {tuple(s)} is not inside the box")


@dataclass
class FitResult:
    """Best model found, its MSE and optimizer bookkeeping."""

    model: SignalModel
    mse: float
    n_iter: int
    converged: bool
    history: list = field(default_factory=list, repr=False)

    @property
    def params(self) -> dict[str, float]:
        return self.model.as_dict()


def _box(seed: float, scale: float) -> tuple[float, float]:
    lo, hi = sorted((SEED_BOX[0] * seed, SEED_BOX[1] * seed))
    if hi - lo < 1e-12 * max(scale, 1.0):
        half = 0.3 * scale
        lo, hi = seed - half, seed + half
    return lo, hi


def default_config(kind: str, t, y, **opts) -> FitConfig:
    """Wide boxes and a data-driven start for fitting ``kind`` on its own."""
    _check_kind(kind)
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    span = float(np.ptp(y)) or 1.0
    tmax = float(t.max()) or 1.0
    order = np.argsort(t)
    y0, y_end = float(y[order[0]]), float(y[order[-1]])
    A0 = max(y0 - y_end, 1e-3 * span)
    # time for the signal to fall to 1/e of its drop
    level = y_end + A0 / np.e
    below = t[order][y[order] <= level]
    T2 = float(below[0]) if below.size and below[0] > 0 else 0.3 * tmax
    lower = [1e-6 * span, 1e-4 * tmax, y.min() - span]
    upper = [10.0 * span, 100.0 * tmax, y.max() + span]
    start = [A0, T2, y_end]
    if kind in ("fractional", "tempered"):
        lower.append(ALPHA_RANGE[0])
        upper.append(ALPHA_RANGE[1])
        start.append(0.9)
    if kind == "tempered":
        lower += [RHO_RANGE[0], VARPI0_RANGE[0]]
        upper += [RHO_RANGE[1], VARPI0_RANGE[1]]
        start += [RHO_SEED, VARPI0_SEED]
    start = np.clip(start, lower, upper)
    return FitConfig(tuple(lower), tuple(upper), (tuple(start),), **opts)


def seeded_config(kind: str, seed: SignalModel, scale: float = 1.0, **opts) -> FitConfig:
    """Boxes of 70-130% around the parameters carried over from ``seed``.

    ``fractional`` adds ``alpha`` (starts at 1 and 0.9, range ``ALPHA_RANGE``);
    ``tempered`` adds ``rho`` and ``varpi0`` at their protocol seeds and
    ranges. The embedded point of ``seed`` is always one of the starts, so the
    richer model never ends worse than the poorer one.
    """
    _check_kind(kind)
    names = MODEL_PARAMS[kind]
    carried = seed.as_dict()
    lower, upper, base = [], [], []
    for name in names:
        if name not in carried:
            continue
        lo, hi = _box(carried[name], scale)
        if name == "alpha":
            lo, hi = max(lo, ALPHA_RANGE[0]), min(hi, ALPHA_RANGE[1])
        if name in ("A0", "T2"):
            lo = max(lo, 1e-12)
        lower.append(lo)
        upper.append(hi)
        base.append(carried[name])
    if kind == "fractional" and seed.kind == "monoexp":
        lower.append(ALPHA_RANGE[0])
        upper.append(ALPHA_RANGE[1])
        starts = (tuple(base + [1.0]), tuple(base + [0.9]))
    elif kind == "tempered" and seed.kind in ("monoexp", "fractional"):
        if seed.kind == "monoexp":
            lower.append(ALPHA_RANGE[0])
            upper.append(ALPHA_RANGE[1])
            base.append(1.0)
        lower += [RHO_RANGE[0], VARPI0_RANGE[0]]
        upper += [RHO_RANGE[1], VARPI0_RANGE[1]]
        starts = (tuple(base + [RHO_SEED, VARPI0_SEED]), tuple(base + [0.0, 0.0]))
    elif kind == seed.kind:
        starts = (tuple(base),)
    else:
        raise ValueError(f"cannot seed {kind} from {seed.kind}")
    return FitConfig(tuple(lower), tuple(upper), starts, **opts)


def _nelder_mead(objective, u0, cfg: FitConfig, fatol: float):
    d = len(u0)
    res = minimize(
        objective,
        u0,
        method="Nelder-Mead",
        bounds=[(0.0, 1.0)] * d,
        options={
            "maxiter": cfg.max_iter,
            "maxfev": 2 * cfg.max_iter,
            "xatol": 1e-10,
            "fatol": fatol,
            "adaptive": d > 3,
        },
    )
    return res


def fit(kind: str, t, y, cfg: FitConfig | None = None) -> FitResult:
    """Minimize the MSE of ``kind`` on the data inside the boxes of ``cfg``.

    Search runs in box-normalized coordinates. Non-convergence is reported in
    ``converged``; the best iterate is returned regardless.
    """
    _check_kind(kind)
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-D arrays of equal length")
    n_par = len(MODEL_PARAMS[kind])
    if t.size < n_par:
        raise ValueError(f"{kind} has {n_par} parameters but only {t.size} data points")
    if np.any(t < 0.0):
        raise ValueError("data times must be nonnegative")
    cfg = default_config(kind, t, y) if cfg is None else cfg
    if len(cfg.lower) != n_par:
        raise ValueError(f"config has {len(cfg.lower)} parameters, {kind} needs {n_par}")
    lo = np.asarray(cfg.lower, float)
    width = np.asarray(cfg.upper, float) - lo
    scale = float(np.mean(y * y)) or 1.0

    def to_params(u):
        return lo + np.clip(u, 0.0, 1.0) * width

    def objective(u):
        r = _eval(kind, to_params(u), t) - y
        val = float(np.mean(r * r))
        return val if np.isfinite(val) else np.inf

    rng = np.random.default_rng(cfg.seed)
    best_u, best_f, n_iter, converged = None, np.inf, 0, True
    history = []
    for start in cfg.starts:
        u = (np.asarray(start, float) - lo) / width
        f = objective(u)
        for attempt in range(cfg.restarts + 1):
            if attempt:
                trial = np.clip(u + 1e-3 * rng.standard_normal(u.size), 0.0, 1.0)
            else:
                trial = u
            res = _nelder_mead(objective, trial, cfg, cfg.rel_tol * scale)
            n_iter += int(res.nit)
            improved = res.fun < f
            if improved:
                gain = f - res.fun
                u, f = np.clip(res.x, 0.0, 1.0), float(res.fun)
            history.append(float(f))
            if attempt == cfg.restarts:
                # the last restart must not have moved the optimum noticeably
                converged &= bool(res.success) and (not improved or gain <= cfg.rel_tol * scale)
        if f < best_f:
            best_u, best_f = u, f
    model = SignalModel(kind, tuple(float(v) for v in to_params(best_u)))
    return FitResult(model, best_f, n_iter, converged, history)


def fit_staged(t, y, **opts) -> dict[str, FitResult]:
    """Monoexp, then fractional seeded from it, then tempered seeded from fractional."""
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    scale = float(np.ptp(y)) or 1.0
    out = {"monoexp": fit("monoexp", t, y, default_config("monoexp", t, y, **opts))}
    out["fractional"] = fit(
        "fractional", t, y, seeded_config("fractional", out["monoexp"].model, scale, **opts)
    )
    out["tempered"] = fit(
        "tempered", t, y, seeded_config("tempered", out["fractional"].model, scale, **opts)
    )
    return out


def load_data(path) -> tuple[np.ndarray, np.ndarray]:
    """Read two columns (time, signal) separated by commas or whitespace.

    Lines starting with ``#`` and a non-numeric header line are skipped.
    """
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.replace(",", " ").split()
            try:
                values = [float(v) for v in parts]
            except ValueError:
                if not rows:
                    continue  # header
                raise ValueError(f"{path}:{lineno}: non-numeric entry in {text!r}") from None
            if len(values) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(values)}")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows)
    return data[:, 0], data[:, 1]
