"""Independent reference computations and the packaged verification suites.

The RK4 integrator and the Fourier series of the heat equation share no code
with the exponential-based solvers, so agreement between the two is a real
cross-check rather than a restatement.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AIBVPError, LambdaInSpectrum, LambdaZero, UnstableStep
from .models import (
    DTParams,
    GridSpec,
    build_diffusion_transport,
    build_heat_1d,
    dt_dirichlet_closed_form,
)
from .numerics import (
    eigenvalues,
    expm,
    inf_norm,
    integrate_matrix_function,
    numerical_abscissa,
    simpson_weights,
    solve_linear,
)
from .semigroup import (
    BoundarySignal,
    Trajectory,
    auto_panels,
    block_semigroup,
    integrated_problem_residual,
    propagator_T,
    q_closed_form,
    q_quadrature,
    sector_estimate,
    solve_homogeneous,
    solve_inhomogeneous,
    spectral_bound,
)
from .triple import (
    MaximalTriple,
    b_lambda,
    block_resolvent,
    build_block_generator,
    dirichlet_identity_residual,
    dirichlet_map,
    factorize,
    feedback_factorize,
    feedback_split,
    reconstruct,
    restrict_A0,
    similarity_decompose,
)

RK4_STABILITY = 2.5

# ---------------------------------------------------------------------------
# reference solutions


def rk4_reference(
    triple: MaximalTriple,
    f,
    g,
    psi: BoundarySignal | None,
    dt: float,
    t_end: float,
    feedback: bool | None = None,
    record_every: int = 1,
) -> Trajectory:
    """Classical RK4 for ``U' = G U + (0, psi(t))``.

    Raises `UnstableStep` when ``dt * rho(G) > 2.5``.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    if feedback is None:
        feedback = triple.has_feedback
    G = build_block_generator(triple, feedback).matrix
    rho = float(np.max(np.abs(eigenvalues(G))))
    if dt * rho > RK4_STABILITY:
        raise UnstableStep(f"dt={dt:g} exceeds the RK4 limit {RK4_STABILITY / rho:.3e}")
    n_steps = int(round(t_end / dt))
    if not math.isclose(n_steps * dt, t_end, rel_tol=1e-9):
        raise ValueError("t_end must be an integer multiple of dt")
    p, m = triple.p, triple.m
    x = np.concatenate([np.asarray(f, dtype=float), np.asarray(g, dtype=float)])
    if psi is None or psi.is_zero:

        def forcing(t):
            return 0.0

    else:

        def forcing(t):
            out = np.zeros(p + m)
            out[p:] = psi(t)
            return out

    times = [0.0]
    states = [x.copy()]
    for k in range(n_steps):
        t = k * dt
        k1 = G @ x + forcing(t)
        k2 = G @ (x + 0.5 * dt * k1) + forcing(t + 0.5 * dt)
        k3 = G @ (x + 0.5 * dt * k2) + forcing(t + 0.5 * dt)
        k4 = G @ (x + dt * k3) + forcing(t + dt)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % record_every == 0:
            times.append((k + 1) * dt)
            states.append(x.copy())
    states = np.array(states)
    return Trajectory(np.array(times), states[:, :p], states[:, p:])


def heat_series_solution(grid: GridSpec, modes: Iterable[tuple[float, int]], t: float) -> np.ndarray:
    """``sum_j a_j exp(-(j pi)^2 t) sin(j pi x)`` at the interior nodes."""
    x = grid.interior
    u = np.zeros_like(x)
    for amplitude, j in modes:
        u += amplitude * math.exp(-((j * math.pi) ** 2) * t) * np.sin(j * math.pi * x)
    return u


# ---------------------------------------------------------------------------
# reports


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class CheckResult:
    check_id: str
    residual: float
    tolerance: float
    passed: bool
    wall_time: float = 0.0
    note: str = ""


@dataclass
class VerificationReport:
    suite: str
    checks: list[CheckResult] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def record(self, check_id: str, tolerance: float, fn: Callable[[], float], note: str = "") -> CheckResult:
        """Run `fn` and store its residual; exceptions become failed entries."""
        start = time.perf_counter()
        try:
            residual = float(fn())
        except (AIBVPError, np.linalg.LinAlgError, ValueError) as exc:
            residual = math.inf
            note = f"{type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        result = CheckResult(check_id, residual, tolerance, residual <= tolerance, elapsed, note)
        self.checks.append(result)
        return result

    def to_dict(self, timings: bool = False) -> dict:
        checks = {}
        for c in self.checks:
            entry = {
                "residual": _json_float(c.residual),
                "tolerance": _json_float(c.tolerance),
                "pass": c.passed,
            }
            if c.note:
                entry["note"] = c.note
            if timings:
                entry["wall_time"] = c.wall_time
            checks[c.check_id] = entry
        return {"suite": self.suite, "pass": self.passed, "meta": self.meta, "checks": checks}


# ---------------------------------------------------------------------------
# identity suite

DEFAULT_TOLERANCES = {
    "dirichlet_constraints": 1e-9,
    "dirichlet_identity": 1e-8,
    "factorization": 1e-9,
    "feedback_factorization": 1e-9,
    "similarity_decomposition": 1e-9,
    "similarity_spectrum": 1e-6,
    "block_resolvent": 1e-8,
    "resolvent_rejects_zero": 0.0,
    "block_semigroup_formula": 1e-9,
    "semigroup_law": 1e-9,
    "q_coincidence": 1e-6,
    "q_closed_form": 1e-6,
    "laplace_identity": 1e-4,
    "boundedness_transfer": 1e-6,
    "non_dissipativity": 0.0,
    "sector_estimate": 0.0,
    "trace_correspondence": 1e-9,
    "integrated_residual": 1e-4,
    "boundary_identity": 1e-8,
}


def match_spectra(a, b) -> float:
    """Largest distance in an optimal one-to-one pairing of two eigenvalue multisets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        return math.inf
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _relative_spectrum_gap(a, b) -> float:
    scale = max(1.0, float(np.max(np.abs(a))))
    return match_spectra(a, b) / scale


def laplace_residual_resolved(triple: MaximalTriple, lam: float, T_max: float, n_panels: int = 2048) -> float:
    """Laplace residual with the initial layer of the stiff modes resolved.

    Composite Simpson on ``[0, tau]`` (``tau = 40 / rho(A0)``, panels of width
    ``<= 0.1 / rho``) followed by `n_panels` uniform panels on ``[tau, T_max]``.
    """
    A0 = restrict_A0(triple)
    p = triple.p
    D0 = dirichlet_map(triple, 0.0).D_state
    rho = float(np.max(np.abs(eigenvalues(A0))))
    tau = min(T_max, 40.0 / rho)
    total = np.zeros_like(D0, dtype=float)
    T_start = np.eye(p)
    for a, b, n in ((0.0, tau, 400), (tau, T_max, n_panels)):
        if b <= a:
            continue
        step = (b - a) / n
        E = expm(step * A0)
        weights = simpson_weights(n, b - a)
        T = T_start
        for k in range(n + 1):
            t = a + k * step
            total += weights[k] * math.exp(-lam * t) * (D0 - T @ D0)
            if k < n:
                T = E @ T
        T_start = T
    target = dirichlet_map(triple, lam).D_state / lam
    return inf_norm(total - target)


def slow_initial_state(triple: MaximalTriple, n_modes: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Real combination of the rightmost eigenvectors of the generator.

    Smooth in time by construction, so the trapezoid-based integrated residual
    measures the solver rather than an initial layer.
    """
    G = build_block_generator(triple, feedback=triple.has_feedback).matrix
    w, V = np.linalg.eig(G)
    order = np.argsort(-w.real)[:n_modes]
    x = np.zeros(G.shape[0])
    for j in order:
        e = V[:, j]
        e = e / e[np.argmax(np.abs(e))]
        x += e.real
    x /= np.max(np.abs(x))
    return x[: triple.p].copy(), x[triple.p :].copy()


def run_identity_suite(
    triple: MaximalTriple,
    seed: int = 42,
    tolerances: dict | None = None,
    tol_scale: float = 1.0,
    tol_override: float | None = None,
) -> VerificationReport:
    """Cross-check every operator identity on `triple` with seeded random draws.

    Tolerances come from `DEFAULT_TOLERANCES`, updated by `tolerances`, scaled by
    `tol_scale`; `tol_override` replaces all of them.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    tol = {k: v * tol_scale for k, v in tol.items()}
    if tol_override is not None:
        tol = {k: tol_override for k in tol}
    rng = np.random.default_rng(seed)
    report = VerificationReport("identities", meta={"triple": triple.name, "p": triple.p, "m": triple.m, "seed": seed})
    p, m = triple.p, triple.m
    A0 = restrict_A0(triple)
    calA = build_block_generator(triple, feedback=False).matrix
    invertible_A0 = True
    try:
        D0 = dirichlet_map(triple, 0.0)
    except LambdaInSpectrum:
        invertible_A0 = False

    def constraints():
        worst = 0.0
        for lam in rng.uniform(0.5, 20.0, size=20):
            trace, harmonic = dirichlet_map(triple, lam).constraint_residuals(triple)
            worst = max(worst, trace, harmonic)
        return worst

    report.record("dirichlet_constraints", tol["dirichlet_constraints"], constraints)

    def identity():
        pairs = rng.uniform(0.5, 20.0, size=(20, 2))
        return max(dirichlet_identity_residual(triple, lam, mu) for lam, mu in pairs)

    report.record("dirichlet_identity", tol["dirichlet_identity"], identity)

    def fact():
        lam = rng.uniform(0.5, 20.0)
        A_lam, R_lam = factorize(triple, lam)
        return inf_norm((calA - lam * np.eye(p + m)) - A_lam @ R_lam)

    report.record("factorization", tol["factorization"], fact)

    def resolvent():
        worst = 0.0
        for lam in rng.uniform(0.5, 20.0, size=10):
            dense = solve_linear(lam * np.eye(p + m) - calA, np.eye(p + m))
            worst = max(worst, inf_norm(block_resolvent(triple, lam) - dense))
        return worst

    report.record("block_resolvent", tol["block_resolvent"], resolvent)

    def rejects_zero():
        try:
            block_resolvent(triple, 0.0)
        except LambdaZero:
            return 0.0
        return 1.0

    report.record("resolvent_rejects_zero", tol["resolvent_rejects_zero"], rejects_zero)

    def semigroup_formula():
        return max(inf_norm(block_semigroup(triple, t) - expm(t * calA)) for t in (0.1, 0.5, 1.0))

    report.record("block_semigroup_formula", tol["block_semigroup_formula"], semigroup_formula)

    G = build_block_generator(triple, feedback=triple.has_feedback).matrix

    def law():
        worst = 0.0
        for t, s in rng.uniform(0.0, 1.0, size=(5, 2)):
            worst = max(worst, inf_norm(expm(t * G) @ expm(s * G) - expm((t + s) * G)))
            if not triple.has_feedback:
                lhs = block_semigroup(triple, t) @ block_semigroup(triple, s)
                worst = max(worst, inf_norm(lhs - block_semigroup(triple, t + s)))
        return worst

    report.record("semigroup_law", tol["semigroup_law"], law)

    q_draws = [(rng.uniform(0.5, 20.0), rng.uniform(0.5, 20.0), rng.uniform(0.05, 0.5)) for _ in range(10)]

    def q_coincide():
        worst = 0.0
        for lam, mu, t in q_draws:
            n = auto_panels(A0, t)
            worst = max(worst, inf_norm(q_quadrature(triple, lam, t, n) - q_quadrature(triple, mu, t, n)))
        return worst

    report.record("q_coincidence", tol["q_coincidence"], q_coincide)

    if invertible_A0:

        def q_closed():
            worst = 0.0
            for lam, _, t in q_draws:
                n = auto_panels(A0, t)
                worst = max(worst, inf_norm(q_quadrature(triple, lam, t, n) - q_closed_form(triple, t)))
            return worst

        report.record("q_closed_form", tol["q_closed_form"], q_closed)
        report.record(
            "laplace_identity",
            tol["laplace_identity"],
            lambda: laplace_residual_resolved(triple, 2.0, 20.0, 2048),
        )

        def bounded():
            D_norm = inf_norm(D0.D_state)
            sup_block = 0.0
            sup_T = 0.0
            for k in range(9):
                t = 0.1 * 2**k
                sup_block = max(sup_block, inf_norm(block_semigroup(triple, t)))
                sup_T = max(sup_T, inf_norm(propagator_T(triple, t)))
            return max(0.0, sup_block - (1.0 + D_norm), sup_T - 1.0)

        report.record("boundedness_transfer", tol["boundedness_transfer"], bounded)

    def dissipativity():
        return max(0.0, -numerical_abscissa(calA), numerical_abscissa(A0))

    report.record("non_dissipativity", tol["non_dissipativity"], dissipativity)

    def sector():
        rep = sector_estimate(triple, [0.1, 1.0], [1.0, -1.0, 10.0, -10.0, 100.0, -100.0], mu=1.0)
        return max(0.0, max(s.scaled_resolvent_block - rep.bound for s in rep.samples))

    report.record("sector_estimate", tol["sector_estimate"], sector)

    f, g = slow_initial_state(triple)
    times = np.linspace(0.0, 1.0, 1001)
    cache = {}

    def trajectory():
        if "traj" not in cache:
            cache["traj"] = solve_homogeneous(triple, f, g, times)
        return cache["traj"]

    def correspondence():
        traj = trajectory()
        worst = 0.0
        for u, v in zip(traj.u, traj.v):
            worst = max(worst, inf_norm(triple.L_op @ reconstruct(triple, u, v) - v))
        return worst

    report.record("trace_correspondence", tol["trace_correspondence"], correspondence)
    report.record(
        "integrated_residual",
        tol["integrated_residual"],
        lambda: integrated_problem_residual(triple, trajectory(), g, feedback=triple.has_feedback),
    )

    def boundary_identity():
        psi = BoundarySignal.sine([1.0, 0.5], omega=2.0)
        g0 = np.array([0.3, -0.2])[:m]
        bt = np.linspace(0.0, 1.0, 6)
        traj = solve_inhomogeneous(triple, np.zeros(p), g0, psi, bt, n_panels=64)
        worst = 0.0
        for t, v in zip(bt, traj.v):
            ref = g0 if t == 0 else g0 + integrate_matrix_function(psi, 0.0, t, 64)
            worst = max(worst, inf_norm(v - ref))
        return worst

    report.record("boundary_identity", tol["boundary_identity"], boundary_identity)

    if triple.has_feedback:
        Atil = build_block_generator(triple, feedback=True).matrix

        def fb_fact():
            lam = rng.uniform(0.5, 20.0)
            At, R = feedback_factorize(triple, lam)
            return inf_norm((Atil - lam * np.eye(p + m)) - At @ R)

        report.record("feedback_factorization", tol["feedback_factorization"], fb_fact)

        def sim():
            lam0 = rng.uniform(0.5, 20.0)
            M, N = similarity_decompose(triple, lam0)
            At, R, _ = feedback_split(triple, lam0)
            return inf_norm(M + N - R @ At)

        report.record("similarity_decomposition", tol["similarity_decomposition"], sim)

        def sim_spec():
            lam0 = rng.uniform(0.5, 20.0)
            At, R, P = feedback_split(triple, lam0)
            direct = eigenvalues(Atil)
            rebuilt = eigenvalues(At @ R + lam0 * P)
            swapped = _relative_spectrum_gap(eigenvalues(At @ R), eigenvalues(R @ At))
            return max(_relative_spectrum_gap(direct, rebuilt), swapped)

        report.record("similarity_spectrum", tol["similarity_spectrum"], sim_spec)
    return report


# ---------------------------------------------------------------------------
# stability sweep


@dataclass
class SweepCell:
    k: float
    c: float
    d: float
    sbound_generator: float
    sbound_B0: float
    positivity: bool
    excluded: bool
    agreement: bool | None


@dataclass
class SweepResult:
    cells: list[SweepCell]
    exclusion_band: float
    n_nodes: int
    boundary_stencil: str
    positivity_proxy: str = "metzler"

    def counted(self) -> list[SweepCell]:
        """Cells entering the agreement statistic: positive and outside the band."""
        return [c for c in self.cells if c.positivity and not c.excluded]

    @property
    def agreement_fraction(self) -> float:
        cells = self.counted()
        if not cells:
            return math.nan
        return sum(bool(c.agreement) for c in cells) / len(cells)

    @property
    def all_agree(self) -> bool:
        return all(c.agreement for c in self.counted())

    def k_varying(self) -> list[tuple[float, float]]:
        """``(c, d)`` pairs whose generator spectral-bound sign changes with ``k``."""
        signs: dict = {}
        for cell in self.counted():
            signs.setdefault((cell.c, cell.d), set()).add(math.copysign(1.0, cell.sbound_generator))
        return sorted(cd for cd, s in signs.items() if len(s) > 1)


def is_metzler(M: np.ndarray, atol: float = 1e-12) -> bool:
    off = np.array(M, dtype=float, copy=True)
    np.fill_diagonal(off, 0.0)
    return bool(off.min(initial=0.0) >= -atol * max(1.0, inf_norm(M)))


def stability_sweep(
    grid: GridSpec,
    k_values,
    c_values,
    d_values,
    exclusion_band: float = 0.05,
    boundary_stencil: str = "two_point",
) -> SweepResult:
    """Compare the spectral bound of the feedback generator with that of ``B_0``."""
    if exclusion_band <= 0:
        raise ValueError("exclusion_band must be positive")
    cells = []
    for k in k_values:
        for c in c_values:
            for d in d_values:
                triple = build_diffusion_transport(grid, DTParams(float(k), float(c), float(d)), boundary_stencil)
                G = build_block_generator(triple, feedback=True).matrix
                s_gen = spectral_bound(G)
                s_b0 = spectral_bound(b_lambda(triple, 0.0))
                excluded = abs(s_gen) <= exclusion_band or abs(s_b0) <= exclusion_band
                agree = None if excluded else bool(np.sign(s_gen) == np.sign(s_b0))
                cells.append(SweepCell(float(k), float(c), float(d), s_gen, s_b0, is_metzler(G), excluded, agree))
    return SweepResult(cells, exclusion_band, grid.n_nodes, boundary_stencil)


DEFAULT_SWEEP = {
    "k_values": (0.0, 1.0, 4.0),
    "c_values": (-6.0, -4.0, -2.0, -0.5, 0.5, 2.0),
    "d_values": (-6.0, -4.0, -2.0, -0.5, 0.5, 2.0),
    "n_nodes": 129,
    "exclusion_band": 0.05,
}


# ---------------------------------------------------------------------------
# convergence studies


@dataclass
class ConvergenceRow:
    h: float
    error: float
    observed_order: float | None


@dataclass
class ConvergenceTable:
    scenario: str
    rows: list[ConvergenceRow]

    def orders(self) -> list[float]:
        return [r.observed_order for r in self.rows if r.observed_order is not None]

    def within(self, lo: float = 1.8, hi: float = 2.2) -> bool:
        return all(lo <= q <= hi for q in self.orders())


CONVERGENCE_SCENARIOS = ("heat_series", "dirichlet_map", "feedback_finest")


def _level_nodes(levels: int, base: int) -> list[int]:
    return [(base - 1) * 2**j + 1 for j in range(levels)]


def convergence_study(
    model: str = "heat",
    params: DTParams | None = None,
    levels: int = 4,
    scenario: str | None = None,
    base_nodes: int = 9,
    t: float = 0.1,
) -> ConvergenceTable:
    """Errors and observed orders ``log2(e(h) / e(h/2))`` under uniform refinement."""
    if levels < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    if scenario is None:
        scenario = "heat_series" if model == "heat" else "dirichlet_map"
    if scenario not in CONVERGENCE_SCENARIOS:
        raise ValueError(f"unknown convergence scenario {scenario!r}")
    if scenario == "heat_series" and model != "heat":
        raise ValueError("heat_series needs the heat model")
    if scenario != "heat_series" and model != "diffusion_transport":
        raise ValueError(f"{scenario} needs the diffusion_transport model")
    params = params or DTParams(k=1.0)
    nodes = _level_nodes(levels, base_nodes)
    errors = []
    if scenario == "heat_series":
        for n in nodes:
            grid = GridSpec(n)
            triple = build_heat_1d(grid)
            f = np.sin(math.pi * grid.interior)
            u = propagator_T(triple, t) @ f
            errors.append(inf_norm(u - heat_series_solution(grid, [(1.0, 1)], t)))
    elif scenario == "dirichlet_map":
        for n in nodes:
            grid = GridSpec(n)
            triple = build_diffusion_transport(grid, params)
            lift = dirichlet_map(triple, 0.0).D_state[:, 1]
            errors.append(inf_norm(lift - dt_dirichlet_closed_form(grid.interior, params.k)))
    else:
        ref_nodes = (nodes[-1] - 1) * 4 + 1

        def final_state(n):
            grid = GridSpec(n)
            triple = build_diffusion_transport(grid, params)
            x = grid.nodes
            full = np.sin(math.pi * x)
            traj = solve_homogeneous(triple, full[1:-1], full[[0, -1]], [0.0, t], feedback=True)
            return np.concatenate([[traj.v[-1, 0]], traj.u[-1], [traj.v[-1, 1]]])

        ref = final_state(ref_nodes)
        for n in nodes:
            stride = (ref_nodes - 1) // (n - 1)
            errors.append(inf_norm(final_state(n) - ref[::stride]))
    rows = []
    for i, (n, e) in enumerate(zip(nodes, errors)):
        order = None if i == 0 else math.log2(errors[i - 1] / e)
        rows.append(ConvergenceRow(1.0 / (n - 1), e, order))
    return ConvergenceTable(scenario, rows)


# ---------------------------------------------------------------------------
# oracle suite


def compare_with_rk4(
    triple: MaximalTriple,
    f,
    g,
    psi: BoundarySignal | None,
    t_end: float = 1.0,
    dt: float = 1e-4,
    n_out: int = 10,
    n_panels: int = 512,
    feedback: bool | None = None,
) -> float:
    """Max sup-norm gap between the exponential solvers and RK4 on a coarse output grid."""
    if feedback is None:
        feedback = triple.has_feedback
    n_steps = int(round(t_end / dt))
    every = n_steps // n_out
    ref = rk4_reference(triple, f, g, psi, dt, t_end, feedback=feedback, record_every=every)
    if psi is None or psi.is_zero:
        traj = solve_homogeneous(triple, f, g, ref.times, feedback=feedback)
    else:
        traj = solve_inhomogeneous(triple, f, g, psi, ref.times, n_panels=n_panels, feedback=feedback)
    return float(np.max(np.abs(traj.states - ref.states)))


def run_oracle_suite(scenarios, tol_scale: float = 1.0, tol_override: float | None = None) -> VerificationReport:
    """RK4 versus exponential trajectories for each ``(name, setup)`` scenario.

    Each setup is a `Scenario` from `aibvp.config`; the tolerance is ``1e-6`` for
    homogeneous and ``1e-5`` for inhomogeneous runs.
    """
    report = VerificationReport("oracle")
    for sc in scenarios:
        inhomogeneous = not sc.psi.is_zero
        tol = (1e-5 if inhomogeneous else 1e-6) * tol_scale
        if tol_override is not None:
            tol = tol_override
        report.record(
            f"rk4_{sc.name}",
            tol,
            lambda sc=sc: compare_with_rk4(
                sc.triple, sc.f, sc.g, sc.psi, t_end=sc.t_end, n_panels=sc.n_panels, feedback=sc.feedback
            ),
        )
    return report


def run_sweep_suite(result: SweepResult, tol_override: float | None = None) -> VerificationReport:
    """Sweep agreement as a report: residual is the number of disagreeing counted cells."""
    report = VerificationReport(
        "sweep",
        meta={
            "n_nodes": result.n_nodes,
            "boundary_stencil": result.boundary_stencil,
            "positivity_proxy": result.positivity_proxy,
            "counted_cells": len(result.counted()),
            "k_varying_pairs": [list(cd) for cd in result.k_varying()],
        },
    )
    tol = 0.0 if tol_override is None else tol_override
    report.record("sign_agreement", tol, lambda: sum(not c.agreement for c in result.counted()))
    report.record("counted_cells_nonempty", tol, lambda: 0.0 if result.counted() else 1.0)
    return report
