"""Finite-difference triples on the unit interval.

Nodes ``x_i = i h``, ``i = 0..N``.  The domain space holds all ``N + 1`` nodal
values; the state is the interior (``p = N - 1``) and the trace the two endpoint
values, so ``[J; L]`` is a permutation matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidK
from .triple import MaximalTriple

BOUNDARY_STENCILS = ("three_point", "two_point")


@dataclass(frozen=True)
class GridSpec:
    n_nodes: int

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 5:
            raise ValueError(f"n_nodes must be an integer >= 5, got {self.n_nodes}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_nodes)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def p(self) -> int:
        return self.n_nodes - 2


@dataclass(frozen=True)
class DTParams:
    """Transport coefficient `k` and boundary feedback coefficients `c`, `d`."""

    k: float = 0.0
    c: complex | float = 0.0
    d: complex | float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.k) or self.k < 0:
            raise InvalidK(f"transport coefficient must be >= 0, got {self.k}")
        if not (np.isfinite(self.c) and np.isfinite(self.d)):
            raise ValueError("c and d must be finite")


def _selectors(n: int) -> tuple[np.ndarray, np.ndarray]:
    p = n - 2
    J = np.zeros((p, n))
    J[:, 1:-1] = np.eye(p)
    L = np.zeros((2, n))
    L[0, 0] = 1.0
    L[1, -1] = 1.0
    return J, L


def _interior_operator(grid: GridSpec, k: float) -> np.ndarray:
    n, h = grid.n_nodes, grid.h
    A = np.zeros((n - 2, n))
    lower = 1.0 / h**2 - k / (2.0 * h)
    upper = 1.0 / h**2 + k / (2.0 * h)
    for i in range(n - 2):
        A[i, i] = lower
        A[i, i + 1] = -2.0 / h**2
        A[i, i + 2] = upper
    return A


def build_heat_1d(grid: GridSpec) -> MaximalTriple:
    """Second-difference Laplacian with Dirichlet trace and no feedback."""
    J, L = _selectors(grid.n_nodes)
    return MaximalTriple(_interior_operator(grid, 0.0), L, J, None, name="heat")


def build_diffusion_transport(
    grid: GridSpec, params: DTParams, boundary_stencil: str = "three_point"
) -> MaximalTriple:
    """``u'' + k u'`` inside, dynamic feedback ``(u'(0) + c u(0), -u'(1) + d u(1))``.

    ``boundary_stencil="three_point"`` uses the second-order one-sided derivative;
    ``"two_point"`` uses the first-order difference, whose generator has
    nonnegative off-diagonal entries.
    """
    if boundary_stencil not in BOUNDARY_STENCILS:
        raise ValueError(f"unknown boundary stencil {boundary_stencil!r}")
    n, h = grid.n_nodes, grid.h
    J, L = _selectors(n)
    A = _interior_operator(grid, params.k)
    dtype = np.result_type(float, params.c, params.d)
    B = np.zeros((2, n), dtype=dtype)
    if boundary_stencil == "three_point":
        B[0, :3] = np.array([-3.0, 4.0, -1.0]) / (2.0 * h)
        B[1, -3:] = -np.array([1.0, -4.0, 3.0]) / (2.0 * h)
    else:
        B[0, :2] = np.array([-1.0, 1.0]) / h
        B[1, -2:] = np.array([1.0, -1.0]) / h
    B[0, 0] += params.c
    B[1, -1] += params.d
    return MaximalTriple(A, L, J, B, name="diffusion_transport")


def sample_function(grid: GridSpec, f: Callable[[np.ndarray], np.ndarray]):
    """Return ``(interior samples, endpoint samples)`` of `f`."""
    values = np.asarray(f(grid.nodes), dtype=float) * np.ones(grid.n_nodes)
    return values[1:-1].copy(), values[[0, -1]].copy()


def state_norms(u, h: float) -> dict[str, float]:
    """Sup-norm and h-weighted 2-norm of an interior state vector."""
    u = np.asarray(u)
    return {
        "sup": float(np.max(np.abs(u))),
        "l2h": float(np.sqrt(h * np.sum(np.abs(u) ** 2))),
    }


def dt_dirichlet_closed_form(x, k: float, alpha: float = 0.0, beta: float = 1.0):
    """Solution of ``u'' + k u' = 0`` with ``u(0) = alpha``, ``u(1) = beta``."""
    x = np.asarray(x, dtype=float)
    if k == 0:
        shape = x
    else:
        shape = -np.expm1(-k * x) / -np.expm1(-k)
    return alpha + (beta - alpha) * shape
