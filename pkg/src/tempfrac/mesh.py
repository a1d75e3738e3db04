"""Operator parameters and power-graded time meshes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TemperedParams:
    """Fractional index ``alpha`` in (0, 1) and tempering rate ``rho >= 0``.

    ``alpha = 1`` is accepted as the classical limit, where the operator is
    ``exp(-rho t) d/dt (exp(rho t) u)``.
    """

    alpha: float
    rho: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(
                f"alpha must lie in (0,1) (or equal 1 for the classical limit), got {self.alpha}"
            )
        if self.rho < 0.0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")


@dataclass(frozen=True)
class GradedMesh:
    """Time grid ``t_n = T (n/N)^r`` for ``n = 0..N``.

    ``nodes`` has length ``N + 1`` and ``steps[n-1] = t_n - t_{n-1}``.
    """

    T: float
    N: int
    r: float
    nodes: np.ndarray = field(repr=False)
    steps: np.ndarray = field(repr=False)

    @property
    def is_uniform(self) -> bool:
        return self.r == 1.0

    @property
    def min_step(self) -> float:
        return float(self.steps.min())


def build_graded_mesh(T: float, N: int, r: float = 1.0) -> GradedMesh:
    """Build the power-graded mesh on ``[0, T]`` with ``N`` steps and grading ``r``."""
    if not T > 0.0:
        raise ValueError(f"T must be positive, got {T}")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if not r >= 1.0:
        raise ValueError(f"grading exponent r must be >= 1, got {r}")
    N = int(N)
    if r == 1.0:
        nodes = T * (np.arange(N + 1) / N)
    else:
        nodes = T * (np.arange(N + 1) / N) ** r
    nodes[0] = 0.0
    nodes[-1] = T
    nodes.setflags(write=False)
    steps = np.diff(nodes)
    steps.setflags(write=False)
    return GradedMesh(T=float(T), N=N, r=float(r), nodes=nodes, steps=steps)


def optimal_grading(alpha: float, safety: bool = True) -> float:
    """Grading exponent for the L1 scheme.

    ``(2 - alpha)/alpha`` is the smallest grading restoring order ``2 - alpha``;
    with ``safety`` the doubled value ``2(2 - alpha)/alpha`` is returned, which
    is the recommended choice when the singularity index is not known exactly.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    r = (2.0 - alpha) / alpha
    return 2.0 * r if safety else r
