from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aibvp.errors import UnstableStep
from aibvp.models import DTParams, GridSpec, build_diffusion_transport, build_heat_1d
from aibvp.numerics import eigenvalues
from aibvp.oracles import (
    DEFAULT_TOLERANCES,
    VerificationReport,
    compare_with_rk4,
    convergence_study,
    heat_series_solution,
    laplace_residual_resolved,
    match_spectra,
    rk4_reference,
    run_identity_suite,
    run_sweep_suite,
    slow_initial_state,
    stability_sweep,
)
from aibvp.semigroup import BoundarySignal
from aibvp.triple import build_block_generator

HEAT9 = build_heat_1d(GridSpec(9))


def test_rk4_stability_guard():
    rho = np.max(np.abs(eigenvalues(build_block_generator(HEAT9).matrix)))
    with pytest.raises(UnstableStep):
        rk4_reference(HEAT9, np.zeros(7), np.zeros(2), None, 3.0 / rho, 1.0)
    with pytest.raises(ValueError):
        rk4_reference(HEAT9, np.zeros(7), np.zeros(2), None, 0.3, 1.0)


def test_rk4_exact_on_linear_forcing():
    # f = 0, g = 0, psi = (1, 1): boundary grows linearly, RK4 integrates it exactly
    traj = rk4_reference(HEAT9, np.zeros(7), np.zeros(2), BoundarySignal.constant([1.0, 1.0]), 1e-3, 0.5)
    assert np.allclose(traj.v[-1], [0.5, 0.5], atol=1e-13)


def test_heat_series_solution():
    g = GridSpec(9)
    u = heat_series_solution(g, [(2.0, 1), (0.5, 3)], 0.0)
    assert np.allclose(u, 2 * np.sin(math.pi * g.interior) + 0.5 * np.sin(3 * math.pi * g.interior))
    assert heat_series_solution(g, [(1.0, 1)], 0.1)[3] == pytest.approx(math.exp(-(math.pi**2) * 0.1))


def test_rk4_agrees_with_exponential_small_grid():
    g = GridSpec(9)
    f = np.sin(math.pi * g.interior)
    assert compare_with_rk4(HEAT9, f, np.zeros(2), None, t_end=0.5, dt=1e-3, n_out=5) <= 1e-8


def test_match_spectra():
    assert match_spectra([1, 2, 3j], [3j, 1, 2]) == 0.0
    assert match_spectra([1, 2], [1]) == math.inf
    assert match_spectra([1, 1, 2], [1, 2, 2]) == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_match_spectra_permutation_invariant(values):
    rng = np.random.default_rng(len(values))
    assert match_spectra(values, rng.permutation(values)) == 0.0


@pytest.mark.parametrize(
    "triple",
    [build_heat_1d(GridSpec(9)), build_diffusion_transport(GridSpec(9), DTParams(1.0, -2.0, -2.0))],
    ids=["heat", "diffusion_transport"],
)
def test_identity_suite_passes(triple):
    report = run_identity_suite(triple, seed=42)
    assert report.passed, [c for c in report.checks if not c.passed]
    ids = {c.check_id for c in report.checks}
    assert {"dirichlet_identity", "block_resolvent", "laplace_identity"} <= ids
    if triple.has_feedback:
        assert "similarity_spectrum" in ids


def test_identity_suite_deterministic_and_forced_failure():
    a = run_identity_suite(HEAT9, seed=7).to_dict()
    b = run_identity_suite(HEAT9, seed=7).to_dict()
    assert json.dumps(a) == json.dumps(b)
    forced = run_identity_suite(HEAT9, seed=7, tol_override=0.0)
    assert not forced.passed


def test_identity_suite_tolerance_scaling():
    rep = run_identity_suite(HEAT9, seed=1, tol_scale=10.0, tolerances={"dirichlet_identity": 1e-3})
    tol = {c.check_id: c.tolerance for c in rep.checks}
    assert tol["dirichlet_identity"] == pytest.approx(1e-2)
    assert tol["block_resolvent"] == pytest.approx(10 * DEFAULT_TOLERANCES["block_resolvent"])


def test_report_records_exceptions():
    rep = VerificationReport("x")

    def boom():
        raise ValueError("nope")

    res = rep.record("c", 1.0, boom)
    assert not res.passed and res.residual == math.inf and "nope" in res.note
    d = rep.to_dict()
    assert d["checks"]["c"]["residual"] == "inf" and "wall_time" not in d["checks"]["c"]
    assert "wall_time" in rep.to_dict(timings=True)["checks"]["c"]


def test_slow_initial_state_is_real_and_normalized():
    tr = build_diffusion_transport(GridSpec(9), DTParams(1.0, -2.0, -2.0))
    f, g = slow_initial_state(tr)
    x = np.concatenate([f, g])
    assert x.dtype == float and np.max(np.abs(x)) == pytest.approx(1.0)


def test_laplace_resolved_small():
    assert laplace_residual_resolved(build_heat_1d(GridSpec(17)), 2.0, 20.0) <= 1e-4


def test_sweep_single_cell_hand_value():
    res = stability_sweep(GridSpec(129), [0.0], [-3.0], [-3.0])
    (cell,) = res.cells
    # B0 -> [[c - 1, 1], [1, d - 1]] with eigenvalues {-3, -5}
    assert cell.sbound_B0 == pytest.approx(-3.0, abs=1e-8)
    assert cell.sbound_generator < 0 and cell.agreement and cell.positivity
    assert run_sweep_suite(res).passed


def test_sweep_exclusion_band():
    res = stability_sweep(GridSpec(17), [0.0], [0.0], [0.0], exclusion_band=0.05)
    # c = d = 0, k = 0: B0 = [[-1, 1], [1, -1]] is singular, bound 0
    assert res.cells[0].excluded and res.cells[0].agreement is None
    assert not res.counted()
    with pytest.raises(ValueError):
        stability_sweep(GridSpec(17), [0.0], [0.0], [0.0], exclusion_band=0.0)


def test_convergence_heat_series():
    table = convergence_study("heat", levels=3)
    assert table.scenario == "heat_series"
    assert table.rows[0].observed_order is None
    assert table.within()


def test_convergence_dirichlet_map():
    table = convergence_study("diffusion_transport", DTParams(k=1.0), levels=3)
    assert table.scenario == "dirichlet_map" and table.within()


def test_convergence_feedback_finest():
    table = convergence_study("diffusion_transport", DTParams(1.0, -2.0, -2.0), levels=3, scenario="feedback_finest")
    assert table.within()


def test_convergence_rejects_bad_input():
    with pytest.raises(ValueError):
        convergence_study("heat", levels=2)
    with pytest.raises(ValueError):
        convergence_study("heat", levels=3, scenario="dirichlet_map")
    with pytest.raises(ValueError):
        convergence_study("heat", levels=3, scenario="nope")
