"""Dense linear-algebra kernel: solves, eigenvalues, matrix exponential, quadrature.

Everything here is a pure function of its inputs.  LU factorization and the
Hessenberg/QR eigenvalue iteration come from LAPACK (through scipy/numpy);
the matrix exponential and Simpson quadrature are implemented locally.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import MatrixOverflow, NoConvergence, SingularMatrix

PIVOT_RTOL = 1e-13
MAX_EIG_DIM = 4096

# Diagonal Pade(13) coefficients and the matching scaling threshold (Higham 2005).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


def as_matrix(M, name="matrix") -> np.ndarray:
    """Return `M` as a 2-d array, rejecting empty or non-finite input."""
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.iscomplexobj(arr):
        arr = arr.astype(float, copy=False)
    return arr


def _square(M, name="matrix") -> np.ndarray:
    arr = as_matrix(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def inf_norm(M) -> float:
    """Maximum absolute row sum (max-abs for vectors)."""
    arr = np.asarray(M)
    if arr.ndim == 1:
        return float(np.max(np.abs(arr))) if arr.size else 0.0
    return float(np.max(np.sum(np.abs(arr), axis=1)))


def solve_linear(M, rhs) -> np.ndarray:
    """Solve ``M X = rhs`` by LU with partial pivoting.

    Raises `SingularMatrix` when a pivot of the factorization has magnitude
    below ``1e-13 * ||M||_inf``.
    """
    A = _square(M, "M")
    b = np.asarray(rhs)
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"rhs has {b.shape[0]} rows, M has {A.shape[0]}")
    scale = inf_norm(A)
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_RTOL * scale:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below threshold {PIVOT_RTOL * scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def eigenvalues(M) -> np.ndarray:
    """Eigenvalues (complex array) via Hessenberg reduction and shifted QR."""
    A = _square(M, "M")
    if A.shape[0] > MAX_EIG_DIM:
        raise ValueError(f"dimension {A.shape[0]} exceeds {MAX_EIG_DIM}")
    try:
        lam = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return lam.astype(complex)


def numerical_abscissa(M) -> float:
    """Largest eigenvalue of the Hermitian part ``(M + M^H)/2``."""
    A = _square(M, "M")
    H = 0.5 * (A + A.conj().T)
    return float(np.linalg.eigvalsh(H)[-1])


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with diagonal Pade(13).

    The scaling exponent is chosen so that ``||M / 2**s||_1 <= theta_13``.
    """
    A = _square(M, "M")
    n = A.shape[0]
    norm1 = float(np.max(np.sum(np.abs(A), axis=0)))
    s = 0
    if norm1 > _THETA13:
        s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
    A = A / (2.0**s)
    b = _PADE13
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6
        + b[5] * A4
        + b[3] * A2
        + b[1] * ident
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6
        + b[4] * A4
        + b[2] * A2
        + b[0] * ident
    )
    with np.errstate(over="ignore", invalid="ignore"):
        R = np.linalg.solve(V - U, V + U)
        for _ in range(s):
            R = R @ R
    if not np.all(np.isfinite(R)):
        raise MatrixOverflow("matrix exponential overflowed")
    return R


def simpson_weights(n_panels: int, width: float) -> np.ndarray:
    """Composite Simpson weights for `n_panels` (even) uniform panels."""
    if n_panels < 2 or n_panels % 2:
        raise ValueError(f"n_panels must be even and >= 2, got {n_panels}")
    w = np.ones(n_panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (width / n_panels / 3.0)


def integrate_matrix_function(
    F: Callable[[float], np.ndarray], t0: float, t1: float, n_panels: int
) -> np.ndarray:
    """Composite Simpson approximation of the integral of `F` over ``[t0, t1]``."""
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    weights = simpson_weights(n_panels, t1 - t0)
    nodes = np.linspace(t0, t1, n_panels + 1)
    total = None
    for w, s in zip(weights, nodes):
        term = w * np.asarray(F(float(s)))
        total = term if total is None else total + term
    return total


def cumulative_simpson(values: np.ndarray, step: float) -> np.ndarray:
    """Running Simpson integrals at the even nodes of a uniform sample.

    ``values`` has shape ``(2N + 1, ...)``; the result has shape ``(N + 1, ...)``
    with entry ``j`` approximating the integral up to node ``2j``.
    """
    values = np.asarray(values)
    if values.shape[0] % 2 != 1:
        raise ValueError("need an odd number of samples")
    pairs = (values[:-2:2] + 4.0 * values[1:-1:2] + values[2::2]) * (step / 3.0)
    out = np.zeros((values.shape[0] // 2 + 1,) + values.shape[1:], dtype=pairs.dtype)
    np.cumsum(pairs, axis=0, out=out[1:])
    return out
