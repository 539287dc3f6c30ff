from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aibvp.errors import InvalidK
from aibvp.models import (
    DTParams,
    GridSpec,
    build_diffusion_transport,
    build_heat_1d,
    dt_dirichlet_closed_form,
    sample_function,
    state_norms,
)
from aibvp.oracles import is_metzler
from aibvp.triple import build_block_generator, dirichlet_map


def test_grid_validation():
    assert GridSpec(5).h == 0.25
    assert GridSpec(33).p == 31
    for bad in (4, 0, 7.5):
        with pytest.raises(ValueError):
            GridSpec(bad)


def test_dt_params_validation():
    with pytest.raises(InvalidK):
        DTParams(k=-1.0)
    with pytest.raises(ValueError):
        DTParams(k=1.0, c=np.inf)
    assert DTParams(k=0.0, c=1 + 2j).c == 1 + 2j


def test_heat_has_no_feedback():
    tr = build_heat_1d(GridSpec(9))
    assert not tr.has_feedback and tr.p == 7 and tr.m == 2
    assert tr.stacked_condition == pytest.approx(1.0)


def test_dt_reduces_to_heat_interior_at_k0():
    g = GridSpec(9)
    a = build_heat_1d(g).A_op
    b = build_diffusion_transport(g, DTParams(0.0)).A_op
    assert np.array_equal(a, b)


def test_boundary_stencils():
    g = GridSpec(9)
    x = g.nodes
    for stencil, exact_on in (("three_point", x**2), ("two_point", x)):
        tr = build_diffusion_transport(g, DTParams(1.0, 0.0, 0.0), stencil)
        fprime = np.gradient(exact_on, x, edge_order=2)
        Bu = tr.B_op @ exact_on
        assert Bu == pytest.approx([fprime[0], -fprime[-1]], abs=1e-12)
    with pytest.raises(ValueError):
        build_diffusion_transport(g, DTParams(1.0), "five_point")


def test_complex_feedback_coefficients():
    tr = build_diffusion_transport(GridSpec(9), DTParams(1.0, 1j, -1.0))
    assert np.iscomplexobj(tr.B_op)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 8.0), st.floats(-6.0, 6.0), st.floats(-6.0, 6.0))
def test_metzler_flag_by_stencil(k, c, d):
    g = GridSpec(17)
    two = build_diffusion_transport(g, DTParams(k, c, d), "two_point")
    three = build_diffusion_transport(g, DTParams(k, c, d), "three_point")
    assert is_metzler(build_block_generator(two, True).matrix)
    assert not is_metzler(build_block_generator(three, True).matrix)


def test_dirichlet_closed_form():
    x = np.linspace(0, 1, 5)
    assert np.allclose(dt_dirichlet_closed_form(x, 0.0), x)
    u = dt_dirichlet_closed_form(x, 3.0, alpha=2.0, beta=-1.0)
    assert u[0] == pytest.approx(2.0) and u[-1] == pytest.approx(-1.0)
    # u'' + k u' = 0 checked by finite differences on a fine grid
    xf = np.linspace(0, 1, 2001)
    uf = dt_dirichlet_closed_form(xf, 3.0)
    res = np.gradient(np.gradient(uf, xf), xf) + 3.0 * np.gradient(uf, xf)
    assert np.max(np.abs(res[5:-5])) < 1e-4


def test_dirichlet_map_matches_closed_form():
    g = GridSpec(129)
    tr = build_diffusion_transport(g, DTParams(2.0))
    lift = dirichlet_map(tr, 0.0).D_state[:, 1]
    assert np.max(np.abs(lift - dt_dirichlet_closed_form(g.interior, 2.0))) < 1e-4


def test_sample_function_and_norms():
    g = GridSpec(5)
    f, gb = sample_function(g, lambda x: 1.0 + x)
    assert np.allclose(f, [1.25, 1.5, 1.75]) and np.allclose(gb, [1.0, 2.0])
    f0, _ = sample_function(g, lambda x: 3.0)
    assert np.allclose(f0, 3.0)
    n = state_norms(np.array([3.0, -4.0]), 0.25)
    assert n["sup"] == 4.0 and n["l2h"] == pytest.approx(2.5)
