"""Finite-dimensional maximal triples (A, L, B) and the operator algebra built on them.

A domain element is a vector ``w`` of length ``n = p + m``.  The embedding
``J`` reads off its state coordinates and the trace ``L`` its boundary values;
the stacked map ``[J; L]`` must be invertible, so every pair ``(u, v)`` of a
state and a trace determines exactly one domain element.  All block matrices
returned here act on the product space ``X x dX`` with the state block first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LambdaInSpectrum, LambdaZero, MissingFeedback, SingularMatrix
from .numerics import as_matrix, inf_norm, solve_linear

CONSTRAINT_TOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _scalar(lam):
    """Collapse complex scalars with vanishing imaginary part to float."""
    lam = complex(lam)
    return lam.real if lam.imag == 0.0 else lam


def _realify(M: np.ndarray, lam) -> np.ndarray:
    if isinstance(lam, float) and np.iscomplexobj(M):
        if np.max(np.abs(M.imag), initial=0.0) <= 1e-12 * max(1.0, inf_norm(M)):
            return M.real.copy()
    return M


@dataclass(frozen=True)
class MaximalTriple:
    """Maximal operator `A_op`, trace `L_op`, embedding `J_op` and optional feedback `B_op`.

    Shapes: ``A_op, J_op`` are ``p x n``; ``L_op, B_op`` are ``m x n``; ``n = p + m``.
    """

    A_op: np.ndarray
    L_op: np.ndarray
    J_op: np.ndarray
    B_op: np.ndarray | None = None
    name: str = "triple"
    stacked_condition: float = field(init=False)
    _rec: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = as_matrix(self.A_op, "A_op")
        L = as_matrix(self.L_op, "L_op")
        J = as_matrix(self.J_op, "J_op")
        p, n = A.shape
        m = L.shape[0]
        if J.shape != (p, n):
            raise ValueError(f"J_op must have shape {(p, n)}, got {J.shape}")
        if L.shape[1] != n or p + m != n:
            raise ValueError(f"need L_op of shape (n - p, n) = {(n - p, n)}, got {L.shape}")
        if np.linalg.matrix_rank(L) != m:
            raise ValueError("L_op must have full row rank")
        B = None
        if self.B_op is not None:
            B = as_matrix(self.B_op, "B_op")
            if B.shape != (m, n):
                raise ValueError(f"B_op must have shape {(m, n)}, got {B.shape}")
        stacked = np.vstack([J, L])
        cond = float(np.linalg.cond(stacked))
        if not np.isfinite(cond):
            raise SingularMatrix("[J; L] is not invertible")
        rec = solve_linear(stacked, np.eye(n))
        object.__setattr__(self, "A_op", _freeze(A))
        object.__setattr__(self, "L_op", _freeze(L))
        object.__setattr__(self, "J_op", _freeze(J))
        object.__setattr__(self, "B_op", None if B is None else _freeze(B))
        object.__setattr__(self, "stacked_condition", cond)
        object.__setattr__(self, "_rec", _freeze(rec))

    @property
    def p(self) -> int:
        return self.A_op.shape[0]

    @property
    def m(self) -> int:
        return self.L_op.shape[0]

    @property
    def n(self) -> int:
        return self.A_op.shape[1]

    @property
    def has_feedback(self) -> bool:
        return self.B_op is not None

    @property
    def reconstruction(self) -> np.ndarray:
        """The ``n x (p + m)`` inverse of ``[J; L]``."""
        return self._rec

    def without_feedback(self) -> "MaximalTriple":
        return MaximalTriple(self.A_op, self.L_op, self.J_op, None, name=self.name)


@dataclass(frozen=True)
class DirichletOperator:
    """Lift of boundary data into ``ker(lam - A)``: full domain and state coordinates."""

    lam: complex | float
    D_full: np.ndarray
    D_state: np.ndarray

    def constraint_residuals(self, triple: MaximalTriple) -> tuple[float, float]:
        """Return ``(||L D - I||, ||(lam J - A) D|| / ||A||)``."""
        trace = inf_norm(triple.L_op @ self.D_full - np.eye(triple.m))
        harmonic = (self.lam * triple.J_op - triple.A_op) @ self.D_full
        return trace, inf_norm(harmonic) / max(1.0, inf_norm(triple.A_op))


@dataclass(frozen=True)
class BlockGenerator:
    """Generator on the product space; ``feedback`` selects the second block row ``B``."""

    matrix: np.ndarray
    p: int
    m: int
    feedback: bool

    @property
    def dim(self) -> int:
        return self.p + self.m


def split_blocks(M: np.ndarray, p: int):
    """Return the four blocks ``(M11, M12, M21, M22)`` of a product-space matrix."""
    return M[:p, :p], M[:p, p:], M[p:, :p], M[p:, p:]


def reconstruct(triple: MaximalTriple, u, v) -> np.ndarray:
    """The domain element ``w`` with ``J w = u`` and ``L w = v``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape[0] != triple.p or v.shape[0] != triple.m:
        raise ValueError("state/trace dimensions do not match the triple")
    return triple.reconstruction @ np.concatenate([u, v])


def restrict_A0(triple: MaximalTriple) -> np.ndarray:
    """Matrix of ``A`` restricted to ``ker L``, in state coordinates."""
    return triple.A_op @ triple.reconstruction[:, : triple.p]


def _feedback_on_kernel(triple: MaximalTriple) -> np.ndarray:
    # B applied to zero-trace domain elements, as an m x p matrix.
    return triple.B_op @ triple.reconstruction[:, : triple.p]


def dirichlet_map(triple: MaximalTriple, lam) -> DirichletOperator:
    """Solve ``[(lam J - A); L] D = [0; I]`` for the Dirichlet operator at `lam`."""
    lam = _scalar(lam)
    stacked = np.vstack([lam * triple.J_op - triple.A_op, triple.L_op])
    rhs = np.vstack([np.zeros((triple.p, triple.m)), np.eye(triple.m)])
    try:
        D_full = solve_linear(stacked, rhs)
    except SingularMatrix as exc:
        raise LambdaInSpectrum(f"lambda={lam} lies in the spectrum of A0") from exc
    D_full = _realify(D_full, lam)
    return DirichletOperator(lam, D_full, triple.J_op @ D_full)


def resolvent_A0(triple: MaximalTriple, lam, rhs=None) -> np.ndarray:
    """``R(lam, A0) rhs`` (the full resolvent when `rhs` is omitted)."""
    lam = _scalar(lam)
    A0 = restrict_A0(triple)
    if rhs is None:
        rhs = np.eye(triple.p)
    try:
        X = solve_linear(lam * np.eye(triple.p) - A0, rhs)
    except SingularMatrix as exc:
        raise LambdaInSpectrum(f"lambda={lam} lies in the spectrum of A0") from exc
    return _realify(X, lam)


def dirichlet_identity_residual(triple: MaximalTriple, lam, mu) -> float:
    """``||D_lam - (I + (mu - lam) R(lam, A0)) D_mu||_inf`` on state coordinates."""
    lam = _scalar(lam)
    mu = _scalar(mu)
    D_lam = dirichlet_map(triple, lam).D_state
    D_mu = dirichlet_map(triple, mu).D_state
    if lam == mu:
        return inf_norm(D_lam - D_mu)
    rhs = D_mu + (mu - lam) * resolvent_A0(triple, lam, D_mu)
    return inf_norm(D_lam - rhs)


def build_block_generator(triple: MaximalTriple, feedback: bool = False) -> BlockGenerator:
    """Assemble the generator with the coupled domain condition ``L w = v`` built in."""
    rec = triple.reconstruction
    top = triple.A_op @ rec
    if feedback:
        if not triple.has_feedback:
            raise MissingFeedback(f"{triple.name} has no feedback operator")
        bottom = triple.B_op @ rec
    else:
        bottom = np.zeros((triple.m, triple.n))
    return BlockGenerator(np.vstack([top, bottom]), triple.p, triple.m, feedback)


def _unipotent(D: np.ndarray, p: int, m: int, sign: float = -1.0) -> np.ndarray:
    R = np.eye(p + m, dtype=D.dtype)
    R[:p, p:] = sign * D
    return R


def factorize(triple: MaximalTriple, lam):
    """Split ``calA - lam`` into a block-diagonal factor times a unipotent factor.

    Returns ``(A_lam, R_lam)`` with ``A_lam = diag(A0 - lam, -lam)`` and
    ``R_lam = [[I, -D_lam], [0, I]]``.  The feedback row of the triple is ignored.
    """
    lam = _scalar(lam)
    p, m = triple.p, triple.m
    D = dirichlet_map(triple, lam).D_state
    A0 = restrict_A0(triple)
    A_lam = np.zeros((p + m, p + m), dtype=np.result_type(A0, D, lam))
    A_lam[:p, :p] = A0 - lam * np.eye(p)
    A_lam[p:, p:] = -lam * np.eye(m)
    return A_lam, _unipotent(D, p, m)


def b_lambda(triple: MaximalTriple, lam) -> np.ndarray:
    """Boundary-to-boundary map ``B D_lam``."""
    if not triple.has_feedback:
        raise MissingFeedback(f"{triple.name} has no feedback operator")
    D = dirichlet_map(triple, lam)
    return triple.B_op @ D.D_full


def feedback_factorize(triple: MaximalTriple, lam):
    """Factor ``calA_tilde - lam`` as ``[[A0 - lam, 0], [B, B_lam - lam]] R_lam``."""
    if not triple.has_feedback:
        raise MissingFeedback(f"{triple.name} has no feedback operator")
    lam = _scalar(lam)
    p, m = triple.p, triple.m
    D = dirichlet_map(triple, lam)
    A0 = restrict_A0(triple)
    B_lam = triple.B_op @ D.D_full
    B0 = _feedback_on_kernel(triple)
    At = np.zeros((p + m, p + m), dtype=np.result_type(A0, B_lam, lam))
    At[:p, :p] = A0 - lam * np.eye(p)
    At[p:, :p] = B0
    At[p:, p:] = B_lam - lam * np.eye(m)
    return At, _unipotent(D.D_state, p, m)


def feedback_split(triple: MaximalTriple, lam0):
    """Return ``(At, R, P)`` with ``calA_tilde = At R + lam0 P``.

    ``At = [[A0, 0], [B, B_lam0]]``, ``R = [[I, -D], [0, I]]`` and
    ``P = [[0, D], [0, 0]]``.
    """
    lam0 = _scalar(lam0)
    At_shift, R = feedback_factorize(triple, lam0)
    p, m = triple.p, triple.m
    At = At_shift + lam0 * np.eye(p + m)
    P = np.zeros_like(R)
    P[:p, p:] = -R[:p, p:]
    return At, R, P


def similarity_decompose(triple: MaximalTriple, lam0):
    """Decompose ``R At`` into a part with diagonal domain and a bounded part.

    Returns ``(M, N)`` where ``M = [[A0 - D B, 0], [B, 0]]`` and
    ``N = [[0, -D B_lam0], [0, B_lam0]]``, ``D = D_lam0``.
    """
    if not triple.has_feedback:
        raise MissingFeedback(f"{triple.name} has no feedback operator")
    lam0 = _scalar(lam0)
    p, m = triple.p, triple.m
    D = dirichlet_map(triple, lam0)
    A0 = restrict_A0(triple)
    B0 = _feedback_on_kernel(triple)
    B_lam = triple.B_op @ D.D_full
    dtype = np.result_type(A0, D.D_state, B_lam)
    M = np.zeros((p + m, p + m), dtype=dtype)
    M[:p, :p] = A0 - D.D_state @ B0
    M[p:, :p] = B0
    N = np.zeros((p + m, p + m), dtype=dtype)
    N[:p, p:] = -D.D_state @ B_lam
    N[p:, p:] = B_lam
    return M, N


def block_resolvent(triple: MaximalTriple, lam) -> np.ndarray:
    """``R(lam, calA) = [[R(lam, A0), D_lam / lam], [0, I / lam]]``."""
    lam = _scalar(lam)
    if lam == 0:
        raise LambdaZero("0 belongs to the spectrum of the block generator")
    p, m = triple.p, triple.m
    R0 = resolvent_A0(triple, lam)
    D = dirichlet_map(triple, lam).D_state
    out = np.zeros((p + m, p + m), dtype=np.result_type(R0, D, lam))
    out[:p, :p] = R0
    out[:p, p:] = D / lam
    out[p:, p:] = np.eye(m) / lam
    return out
