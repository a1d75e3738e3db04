"""Tempered Bloch system on a graded mesh with the direct L1 scheme."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from tempfrac.analytic import BlochParams
from tempfrac.l1 import l1_step_coefficients
from tempfrac.mesh import GradedMesh


@dataclass
class BlochRun:
    """Magnetization samples on the mesh nodes ``times``."""

    times: np.ndarray = field(repr=False)
    mz: np.ndarray = field(repr=False)
    mx: np.ndarray = field(repr=False)
    my: np.ndarray = field(repr=False)
    elapsed: float = 0.0

    @property
    def mplus(self) -> np.ndarray:
        return self.mx + 1j * self.my


def solve_bloch(p: BlochParams, mesh: GradedMesh) -> BlochRun:
    """March the three components over ``mesh``.

    ``Mz`` is a scalar implicit solve per step; ``(Mx, My)`` is coupled through
    the precession term and solved as one 2x2 system per step.
    """
    k1 = 1.0 / p.T1p
    k2 = 1.0 / p.T2p
    w = p.varpi0
    N = mesh.N
    mz = np.empty(N + 1)
    mxy = np.empty((N + 1, 2))
    mz[0] = p.Mz0
    mxy[0] = (p.Mx0, p.My0)
    start = time.perf_counter()
    for n in range(1, N + 1):
        c = l1_step_coefficients(mesh, p.params, n)
        mz[n] = (p.M0 * k1 - c[:n] @ mz[:n]) / (c[n] + k1)
        hist = c[:n] @ mxy[:n]
        d = c[n] + k2
        det = d * d + w * w
        assert det > 0.0, "singular precession block"
        # [[d, -w], [w, d]] (mx, my) = -hist
        bx, by = -hist
        mxy[n] = ((d * bx + w * by) / det, (d * by - w * bx) / det)
    elapsed = time.perf_counter() - start
    return BlochRun(np.asarray(mesh.nodes), mz, mxy[:, 0].copy(), mxy[:, 1].copy(), elapsed)
