"""Time evolution on the product space ``X x dX``.

The bulk semigroup is ``T(t) = exp(t A0)``; the block semigroup generated by
the coupled operator is assembled from ``T(t)`` and the family ``Q(t)`` and can
be compared against the direct exponential of the block generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LambdaInSpectrum, ZeroInSpectrum
from .numerics import eigenvalues, expm, inf_norm, simpson_weights, solve_linear
from .triple import (
    MaximalTriple,
    _realify,
    _scalar,
    build_block_generator,
    dirichlet_map,
    restrict_A0,
)

# Upper bound on |eigenvalue| * panel width for automatically chosen panel counts.
STIFF_STEP = 0.1


@dataclass(frozen=True)
class BoundarySignal:
    """Boundary input ``psi(t)`` with values in ``C^m``.

    Use the constructors `zero`, `constant`, `sine` and `sampled`.
    """

    kind: str
    m: int = 2
    values: tuple = ()
    amplitude: tuple = ()
    omega: float = 1.0
    phase: float = 0.0
    sample_times: tuple = ()
    sample_values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "sine", "sampled"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.kind == "sampled":
            times = np.asarray(self.sample_times, dtype=float)
            vals = np.asarray(self.sample_values, dtype=float)
            if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) <= 0):
                raise ValueError("sample times must be strictly increasing, >= 2 points")
            if vals.shape != (times.size, self.m):
                raise ValueError(f"sample values must have shape {(times.size, self.m)}")

    @classmethod
    def zero(cls, m: int = 2) -> "BoundarySignal":
        return cls("zero", m)

    @classmethod
    def constant(cls, values) -> "BoundarySignal":
        values = tuple(float(x) for x in values)
        return cls("constant", len(values), values=values)

    @classmethod
    def sine(cls, amplitude, omega: float = 1.0, phase: float = 0.0) -> "BoundarySignal":
        amplitude = tuple(float(x) for x in amplitude)
        return cls("sine", len(amplitude), amplitude=amplitude, omega=omega, phase=phase)

    @classmethod
    def sampled(cls, times, values) -> "BoundarySignal":
        vals = np.asarray(values, dtype=float)
        return cls(
            "sampled",
            vals.shape[1],
            sample_times=tuple(float(t) for t in times),
            sample_values=tuple(map(tuple, vals)),
        )

    def __call__(self, t) -> np.ndarray:
        """Evaluate at a scalar `t` (shape ``(m,)``) or an array (shape ``(len(t), m)``)."""
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if self.kind == "zero":
            out = np.zeros((ts.size, self.m))
        elif self.kind == "constant":
            out = np.tile(np.asarray(self.values), (ts.size, 1))
        elif self.kind == "sine":
            out = np.outer(np.sin(self.omega * ts + self.phase), self.amplitude)
        else:
            grid = np.asarray(self.sample_times)
            if ts.min() < grid[0] - 1e-12 or ts.max() > grid[-1] + 1e-12:
                raise ValueError("sampled signal evaluated outside its time range")
            vals = np.asarray(self.sample_values)
            out = np.column_stack([np.interp(ts, grid, vals[:, j]) for j in range(self.m)])
        return out[0] if np.ndim(t) == 0 else out

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"


@dataclass(frozen=True)
class Trajectory:
    """Product-space states ``(u(t), v(t))`` on an increasing time grid starting at 0."""

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 1 or times[0] != 0.0:
            raise ValueError("times must be a 1-d grid starting at 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        u = np.atleast_2d(np.asarray(self.u))
        v = np.atleast_2d(np.asarray(self.v))
        if u.shape[0] != times.size or v.shape[0] != times.size:
            raise ValueError("state arrays must align with times")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def states(self) -> np.ndarray:
        return np.hstack([self.u, self.v])

    def __len__(self) -> int:
        return self.times.size


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing and start at 0")
    return times


def auto_panels(A0: np.ndarray, t: float, minimum: int = 256) -> int:
    """Even panel count with ``rho(A0) * (t / n) <= STIFF_STEP``, at least `minimum`."""
    rho = float(np.max(np.abs(eigenvalues(A0)))) if A0.size else 0.0
    n = max(minimum, int(math.ceil(rho * t / STIFF_STEP)))
    return n + (n % 2)


def propagator_T(triple: MaximalTriple, t: float) -> np.ndarray:
    """``T(t) = exp(t A0)``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return expm(t * restrict_A0(triple))


def _integral_samples(A0: np.ndarray, X: np.ndarray, step: float, count: int) -> np.ndarray:
    """``T(k step) X`` for ``k = 0..count`` by repeated multiplication."""
    E = expm(step * A0)
    out = np.empty((count + 1,) + X.shape, dtype=np.result_type(E, X))
    out[0] = X
    for k in range(count):
        out[k + 1] = E @ out[k]
    return out


def q_quadrature(triple: MaximalTriple, lam, t: float, n_panels: int = 256) -> np.ndarray:
    """``(lam - A0) * Simpson( int_0^t T(s) D_lam ds )``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    lam = _scalar(lam)
    D = dirichlet_map(triple, lam).D_state
    A0 = restrict_A0(triple)
    if t == 0:
        return np.zeros_like(D)
    weights = simpson_weights(n_panels, t)
    samples = _integral_samples(A0, D, t / n_panels, n_panels)
    integral = np.tensordot(weights, samples, axes=1)
    return _realify((lam * np.eye(triple.p) - A0) @ integral, lam)


def q_closed_form(triple: MaximalTriple, t: float) -> np.ndarray:
    """``Q(t) = (I - T(t)) D_0``; requires an invertible `A0`."""
    try:
        D0 = dirichlet_map(triple, 0.0).D_state
    except LambdaInSpectrum as exc:
        raise ZeroInSpectrum("A0 is not invertible; use q_quadrature") from exc
    return (np.eye(triple.p) - propagator_T(triple, t)) @ D0


def q_family(triple: MaximalTriple, t: float) -> np.ndarray:
    """``Q(t)`` by the closed form, or by quadrature when ``0`` is in the spectrum of `A0`."""
    try:
        return q_closed_form(triple, t)
    except ZeroInSpectrum:
        pass
    A0 = restrict_A0(triple)
    n_panels = auto_panels(A0, t)
    for lam in (1.0, 2.0, 3.5):
        try:
            return q_quadrature(triple, lam, t, n_panels)
        except LambdaInSpectrum:
            continue
    raise LambdaInSpectrum("no quadrature shift found outside the spectrum of A0")


def block_semigroup(triple: MaximalTriple, t: float) -> np.ndarray:
    """``[[T(t), Q(t)], [0, I]]``, the semigroup of the generator without feedback."""
    p, m = triple.p, triple.m
    out = np.zeros((p + m, p + m))
    out[:p, :p] = propagator_T(triple, t)
    out[:p, p:] = q_family(triple, t)
    out[p:, p:] = np.eye(m)
    return out


def _generator(triple: MaximalTriple, feedback) -> np.ndarray:
    if feedback is None:
        feedback = triple.has_feedback
    return build_block_generator(triple, feedback).matrix


def solve_homogeneous(triple: MaximalTriple, f, g, times, feedback: bool | None = None) -> Trajectory:
    """States ``exp(t G) (f, g)`` at each requested time.

    ``feedback=None`` uses the feedback row whenever the triple has one.
    """
    times = _check_times(times)
    G = _generator(triple, feedback)
    x0 = np.concatenate([np.asarray(f, dtype=float), np.asarray(g, dtype=float)])
    if x0.size != G.shape[0]:
        raise ValueError("initial data dimensions do not match the triple")
    states = np.array([expm(t * G) @ x0 for t in times])
    p = triple.p
    if not np.any(G[p:]):
        # zero boundary row: the trace is invariant, keep it free of roundoff
        states[:, p:] = x0[p:]
    return Trajectory(times, states[:, :p], states[:, p:])


def _panel_kernels(G: np.ndarray, p: int, m: int, width: float):
    """Exact moments of ``exp((H - s) G) [0; I]`` against 1, s, s^2 over one panel.

    Returns ``(E, K0, K1, K2)`` where ``E = exp(H G)`` and ``Kj`` is the integral
    of ``exp((H - s) G) [0; I] s^j`` over ``[0, H]``.
    """
    d = p + m
    Z = np.zeros((d + 3 * m, d + 3 * m))
    Z[:d, :d] = G
    Z[p:d, d : d + m] = np.eye(m)
    Z[d : d + m, d + m : d + 2 * m] = np.eye(m)
    Z[d + m : d + 2 * m, d + 2 * m :] = np.eye(m)
    F = expm(width * Z)
    E = F[:d, :d]
    K0 = F[:d, d : d + m]
    K1 = F[:d, d + m : d + 2 * m]
    K2 = 2.0 * F[:d, d + 2 * m :]
    return E, K0, K1, K2


def convolution(G: np.ndarray, p: int, m: int, psi: BoundarySignal, t: float, n_panels: int) -> np.ndarray:
    """``int_0^t exp((t - s) G) (0, psi(s)) ds`` with Simpson's quadratic interpolant of `psi`.

    On each double panel `psi` is replaced by its quadratic interpolant through
    the three Simpson nodes and the stiff kernel is integrated exactly, so the
    boundary component reproduces composite Simpson applied to `psi`.
    """
    if t == 0:
        return np.zeros(p + m)
    if n_panels < 2 or n_panels % 2:
        raise ValueError(f"n_panels must be even and >= 2, got {n_panels}")
    step = t / n_panels
    E, K0, K1, K2 = _panel_kernels(G, p, m, 2.0 * step)
    W0 = K0 - 1.5 * K1 / step + 0.5 * K2 / step**2
    W1 = 2.0 * K1 / step - K2 / step**2
    W2 = -0.5 * K1 / step + 0.5 * K2 / step**2
    values = psi(np.linspace(0.0, t, n_panels + 1))
    incr = values[:-2:2] @ W0.T + values[1:-1:2] @ W1.T + values[2::2] @ W2.T
    acc = np.zeros(p + m)
    for row in incr:
        acc = E @ acc + row
    return acc


def solve_inhomogeneous(
    triple: MaximalTriple, f, g, psi: BoundarySignal, times, n_panels: int = 512, feedback: bool = False
) -> Trajectory:
    """Variation of constants ``U(t) = calT(t)(f, g) + int_0^t calT(t - s)(0, psi(s)) ds``."""
    times = _check_times(times)
    G = _generator(triple, feedback)
    p, m = triple.p, triple.m
    if psi.m != m:
        raise ValueError(f"boundary signal has dimension {psi.m}, expected {m}")
    x0 = np.concatenate([np.asarray(f, dtype=float), np.asarray(g, dtype=float)])
    states = np.empty((times.size, p + m))
    for k, t in enumerate(times):
        states[k] = expm(t * G) @ x0
        if not psi.is_zero:
            states[k] += convolution(G, p, m, psi, t, n_panels)
    return Trajectory(times, states[:, :p], states[:, p:], meta={"n_panels": n_panels})


def _cumtrapz(values: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * dt * (values[1:] + values[:-1]), axis=0)
    return out


def integrated_problem_residual(
    triple: MaximalTriple,
    trajectory: Trajectory,
    g,
    psi: BoundarySignal | None = None,
    feedback: bool = False,
) -> float:
    """Maximum residual of the integrated (mild) form of the problem on the time grid.

    Checks ``u(t) = f + A int_0^t u`` and
    ``int_0^t v = t g + int_0^t F(s) ds``, where ``F(s) = B(int_0^s u)`` with
    feedback and ``F(s) = int_0^s psi`` otherwise.  Time integrals use the
    trapezoidal rule.
    """
    times = trajectory.times
    if times.size < 2:
        return 0.0
    steps = np.diff(times)
    dt = steps[0]
    if np.max(np.abs(steps - dt)) > 1e-9 * max(1.0, times[-1]):
        raise ValueError("integrated residual needs a uniform time grid")
    g = np.asarray(g, dtype=float)
    U = _cumtrapz(trajectory.u, dt)
    V = _cumtrapz(trajectory.v, dt)
    domain = np.hstack([U, V]) @ triple.reconstruction.T
    r_state = trajectory.u - trajectory.u[0] - domain @ triple.A_op.T
    if feedback:
        if not triple.has_feedback:
            raise ValueError("feedback residual requested for a triple without B")
        inner = domain @ triple.B_op.T
    elif psi is not None and not psi.is_zero:
        inner = _cumtrapz(psi(times), dt)
    else:
        inner = np.zeros_like(V)
    r_trace = V - np.outer(times, g) - _cumtrapz(inner, dt)
    return float(max(np.max(np.abs(r_state)), np.max(np.abs(r_trace))))


def spectral_bound(M) -> float:
    """Largest real part of the spectrum."""
    return float(np.max(eigenvalues(M).real))


def laplace_transform_residual(
    triple: MaximalTriple, lam, T_max: float | None = None, n_panels: int = 2048
) -> float:
    """``|| int_0^T_max e^{-lam t} Q(t) dt - D_lam / lam ||_inf`` by Simpson in t.

    Requires ``Re lam > 0`` (``Q(t)`` tends to ``D_0`` and does not decay).
    ``T_max`` defaults to ``20 / Re lam``.
    """
    lam = _scalar(lam)
    if lam.real <= 0:
        raise ValueError(f"need Re(lambda) > 0, got {lam}")
    A0 = restrict_A0(triple)
    if lam.real <= spectral_bound(A0):
        raise ValueError("Re(lambda) must exceed the spectral bound of A0")
    if T_max is None:
        T_max = 20.0 / lam.real
    step = T_max / n_panels
    nodes = np.linspace(0.0, T_max, n_panels + 1)
    try:
        D0 = dirichlet_map(triple, 0.0).D_state
        Q = D0[None] - _integral_samples(A0, D0, step, n_panels)
    except LambdaInSpectrum:
        Q = _q_samples_shifted(triple, step, n_panels)
    weights = simpson_weights(n_panels, T_max) * np.exp(-lam * nodes)
    transform = np.tensordot(weights, Q, axes=1)
    target = dirichlet_map(triple, lam).D_state / lam
    return inf_norm(transform - target)


def _q_samples_shifted(triple: MaximalTriple, step: float, count: int) -> np.ndarray:
    # Q(t) = (mu - A0) int_0^t T(s) D_mu ds, with the integral stepped exactly
    # through an augmented exponential.
    A0 = restrict_A0(triple)
    p, m = triple.p, triple.m
    for mu in (1.0, 2.0, 3.5):
        try:
            D = dirichlet_map(triple, mu).D_state
            break
        except LambdaInSpectrum:
            continue
    Z = np.zeros((p + m, p + m))
    Z[:p, :p] = A0
    Z[:p, p:] = D
    F = expm(step * Z)
    E, Y1 = F[:p, :p], F[:p, p:]
    out = np.empty((count + 1, p, m))
    Y = np.zeros((p, m))
    T = np.eye(p)
    shift = mu * np.eye(p) - A0
    for k in range(count + 1):
        out[k] = shift @ Y
        Y = Y + T @ Y1
        T = E @ T
    return out


@dataclass
class SectorSample:
    r: float
    s: float
    scaled_resolvent_A0: float
    scaled_resolvent_block: float
    local_bound: float
    passed: bool


@dataclass
class SectorReport:
    """Sampled resolvent bound ``||s R(r + is, calA)|| <= C + |D| + C|D| + 1``."""

    C: float
    dirichlet_norm: float
    bound: float
    samples: list[SectorSample]

    @property
    def passed(self) -> bool:
        return all(smp.passed for smp in self.samples)


def sector_estimate(triple: MaximalTriple, r_values, s_values, mu: float = 1.0) -> SectorReport:
    """Measure ``C = max ||s R(r + is, A0)||_2`` and test the block bound at every sample."""
    A0 = restrict_A0(triple)
    G = build_block_generator(triple, feedback=False).matrix
    p, d = triple.p, triple.p + triple.m
    D_norm = float(np.linalg.norm(dirichlet_map(triple, mu).D_state, 2))
    rows = []
    for r in r_values:
        for s in s_values:
            if r <= 0 or s == 0:
                raise ValueError("samples need r > 0 and s != 0")
            lam = complex(r, s)
            try:
                RA0 = solve_linear(lam * np.eye(p) - A0, np.eye(p))
                RA = solve_linear(lam * np.eye(d) - G, np.eye(d))
            except LambdaInSpectrum:
                raise
            except Exception as exc:  # SingularMatrix from the dense solves
                raise LambdaInSpectrum(f"lambda={lam} in the spectrum") from exc
            rows.append((r, s, abs(s) * np.linalg.norm(RA0, 2), abs(s) * np.linalg.norm(RA, 2)))
    C = max(row[2] for row in rows)
    bound = C + D_norm + C * D_norm + 1.0
    samples = []
    for r, s, a0, blk in rows:
        local = a0 + D_norm + a0 * D_norm + 1.0
        samples.append(SectorSample(r, s, a0, blk, local, blk <= bound))
    return SectorReport(C, D_norm, bound, samples)
