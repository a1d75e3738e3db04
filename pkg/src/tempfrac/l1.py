"""Direct L1 discretization of the tempered Caputo derivative on graded meshes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from tempfrac.mesh import GradedMesh, TemperedParams


def l1_kernel_differences(mesh: GradedMesh, alpha: float, n: int) -> np.ndarray:
    """Return ``(t_n - t_k)^(1-a) - (t_n - t_{k+1})^(1-a)`` for ``k = 0..n-1``."""
    if not 1 <= n <= mesh.N:
        raise IndexError(f"step index {n} outside 1..{mesh.N}")
    t = mesh.nodes
    tau = mesh.steps[:n]
    p = 1.0 - alpha
    if p == 0.0:
        # classical limit: only the last interval contributes
        b = np.zeros(n)
        b[-1] = 1.0
        return b
    # (y + tau)^p - y^p = y^p expm1(p log1p(tau/y)) avoids the cancellation
    # of the plain difference when the interval is far from t_n
    y = t[n] - t[1:n]
    b = np.empty(n)
    b[:-1] = y**p * np.expm1(p * np.log1p(tau[:-1] / y))
    b[-1] = tau[-1] ** p
    return b


def _l1_slopes(mesh: GradedMesh, alpha: float, n: int) -> np.ndarray:
    # a_k = b_{n,k} / (tau_{k+1} Gamma(2 - alpha))
    return l1_kernel_differences(mesh, alpha, n) / (mesh.steps[:n] * gamma(2.0 - alpha))


def _decay(mesh: GradedMesh, rho: float, n: int) -> np.ndarray:
    if rho == 0.0:
        return np.ones(n + 1)
    return np.exp(-rho * (mesh.nodes[n] - mesh.nodes[: n + 1]))


def l1_step_coefficients(
    mesh: GradedMesh, params: TemperedParams, n: int
) -> np.ndarray:
    """Coefficients ``c_{n,k}``, ``k = 0..n``, of the discrete tempered operator.

    The discrete derivative at ``t_n`` equals ``sum_k c[k] * u(t_k)``; the
    diagonal entry ``c[n] = tau_n^(-alpha) / Gamma(2 - alpha)`` is positive.
    """
    a = _l1_slopes(mesh, params.alpha, n)
    c = np.empty(n + 1)
    c[0] = -a[0]
    c[1:n] = a[: n - 1] - a[1:]
    c[n] = a[n - 1]
    return c * _decay(mesh, params.rho, n)


@dataclass
class L1State:
    """Samples ``u_0..u_n`` of one unknown on a fixed mesh."""

    params: TemperedParams
    mesh: GradedMesh
    history: list = field(default_factory=list)

    @property
    def step(self) -> int:
        return len(self.history) - 1

    def append(self, value) -> None:
        if len(self.history) > self.mesh.N:
            raise IndexError("history already spans the whole mesh")
        self.history.append(value)


def l1_tempered_apply(state: L1State, n: int):
    """Evaluate the discrete tempered Caputo derivative at ``t_n``."""
    if not 1 <= n <= state.mesh.N:
        raise IndexError(f"step index {n} outside 1..{state.mesh.N}")
    if len(state.history) < n + 1:
        raise IndexError(
            f"history holds {len(state.history)} samples, step {n} needs {n + 1}"
        )
    c = l1_step_coefficients(state.mesh, state.params, n)
    u = np.asarray(state.history[: n + 1])
    return c @ u
