from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aibvp.errors import LambdaInSpectrum, LambdaZero, MissingFeedback, SingularMatrix
from aibvp.models import DTParams, GridSpec, build_diffusion_transport, build_heat_1d
from aibvp.numerics import eigenvalues, expm, inf_norm
from aibvp.triple import (
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
    resolvent_A0,
    restrict_A0,
    similarity_decompose,
    split_blocks,
)

HEAT5 = build_heat_1d(GridSpec(5))
DT17 = build_diffusion_transport(GridSpec(17), DTParams(k=1.0, c=-2.0, d=-2.0))

lams = st.floats(0.5, 20.0)


# hand-computed values on h = 1/4
A0_H4 = 16.0 * np.array([[-2.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -2.0]])
D0_H4 = np.array([[0.75, 0.25], [0.5, 0.5], [0.25, 0.75]])


def test_restricted_operator_h4():
    assert np.allclose(restrict_A0(HEAT5), A0_H4, atol=0)


def test_dirichlet_map_at_zero_h4():
    D = dirichlet_map(HEAT5, 0.0)
    assert np.allclose(D.D_state, D0_H4, atol=1e-14)
    assert np.allclose(D.D_full[[0, -1]], np.eye(2), atol=1e-14)


def test_dirichlet_constraints():
    for lam in (0.5, 3.0, 17.0, 2.0 + 5.0j):
        trace, harmonic = dirichlet_map(DT17, lam).constraint_residuals(DT17)
        assert trace <= 1e-9 and harmonic <= 1e-9


def test_complex_lambda_keeps_complex_dtype():
    D = dirichlet_map(HEAT5, 1.0 + 2.0j).D_state
    assert np.iscomplexobj(D)
    assert not np.iscomplexobj(dirichlet_map(HEAT5, 1.0 + 0.0j).D_state)


def test_lambda_in_spectrum_raises():
    ev = eigenvalues(A0_H4).real[0]
    with pytest.raises(LambdaInSpectrum):
        dirichlet_map(HEAT5, ev)
    with pytest.raises(LambdaInSpectrum):
        resolvent_A0(HEAT5, ev)


@settings(max_examples=50, deadline=None)
@given(lams, lams)
def test_dirichlet_resolvent_identity(lam, mu):
    assert dirichlet_identity_residual(HEAT5, lam, mu) <= 1e-8
    assert dirichlet_identity_residual(DT17, lam, mu) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(lams)
def test_factorization(lam):
    A_lam, R_lam = factorize(DT17, lam)
    G = build_block_generator(DT17).matrix
    assert inf_norm(G - lam * np.eye(G.shape[0]) - A_lam @ R_lam) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(lams)
def test_feedback_factorization(lam):
    At, R = feedback_factorize(DT17, lam)
    G = build_block_generator(DT17, feedback=True).matrix
    assert inf_norm(G - lam * np.eye(G.shape[0]) - At @ R) <= 1e-9


@settings(max_examples=20, deadline=None)
@given(lams)
def test_feedback_split_and_similarity(lam0):
    At, R, P = feedback_split(DT17, lam0)
    G = build_block_generator(DT17, feedback=True).matrix
    assert inf_norm(G - (At @ R + lam0 * P)) <= 1e-9
    M, N = similarity_decompose(DT17, lam0)
    assert inf_norm(M + N - R @ At) <= 1e-9
    # M has the zero boundary column block: its domain is diagonal
    assert np.all(M[:, DT17.p :] == 0)


@settings(max_examples=30, deadline=None)
@given(lams)
def test_block_resolvent_vs_dense_inverse(lam):
    G = build_block_generator(HEAT5).matrix
    dense = np.linalg.inv(lam * np.eye(5) - G)
    assert inf_norm(block_resolvent(HEAT5, lam) - dense) <= 1e-8


def test_block_resolvent_rejects_zero():
    with pytest.raises(LambdaZero):
        block_resolvent(HEAT5, 0.0)
    # zero is in the spectrum of the block generator but not of A0
    assert np.min(np.abs(eigenvalues(build_block_generator(HEAT5).matrix))) < 1e-12
    assert np.min(np.abs(eigenvalues(A0_H4))) > 1.0


def test_block_generator_structure():
    G = build_block_generator(HEAT5).matrix
    A11, A12, A21, A22 = split_blocks(G, 3)
    assert np.allclose(A11, A0_H4)
    assert np.allclose(A12, 16.0 * np.array([[1, 0], [0, 0], [0, 1]]))
    assert not A21.any() and not A22.any()


def test_block_generator_semigroup_fixes_boundary():
    G = build_block_generator(HEAT5).matrix
    E = expm(0.3 * G)
    assert np.allclose(E[3:, :3], 0) and np.allclose(E[3:, 3:], np.eye(2))


def test_missing_feedback():
    with pytest.raises(MissingFeedback):
        build_block_generator(HEAT5, feedback=True)
    for fn in (b_lambda, feedback_factorize, feedback_split, similarity_decompose):
        with pytest.raises(MissingFeedback):
            fn(HEAT5, 1.0)


def test_b_lambda_hand_value_k0():
    grid = GridSpec(257)
    triple = build_diffusion_transport(grid, DTParams(0.0, -3.0, -3.0))
    B0 = b_lambda(triple, 0.0)
    # continuum value [[c - 1, 1], [1, d - 1]]; three-point stencil is exact on linears
    assert np.allclose(B0, [[-4.0, 1.0], [1.0, -4.0]], atol=1e-10)
    assert np.allclose(np.sort(eigenvalues(B0).real), [-5.0, -3.0], atol=1e-10)


def test_reconstruct_round_trip():
    rng = np.random.default_rng(1)
    u, v = rng.normal(size=DT17.p), rng.normal(size=2)
    w = reconstruct(DT17, u, v)
    assert np.allclose(DT17.J_op @ w, u) and np.allclose(DT17.L_op @ w, v)


def test_triple_validation():
    J = np.eye(2, 3)
    L = np.array([[0.0, 0.0, 1.0]])
    A = np.ones((2, 3))
    MaximalTriple(A, L, J)
    with pytest.raises(ValueError):
        MaximalTriple(np.ones((2, 4)), L, J)
    with pytest.raises(ValueError):
        MaximalTriple(A, np.zeros((1, 3)), J)
    with pytest.raises(ValueError):
        MaximalTriple(A, L, J, B_op=np.ones((2, 3)))
    with pytest.raises(SingularMatrix):
        MaximalTriple(A, np.array([[1.0, 0.0, 0.0]]), J)
    with pytest.raises(ValueError):
        MaximalTriple(np.full((2, 3), np.nan), L, J)


def test_triple_is_immutable():
    with pytest.raises(ValueError):
        HEAT5.A_op[0, 0] = 1.0
    assert HEAT5.without_feedback().B_op is None
    assert not DT17.without_feedback().has_feedback
