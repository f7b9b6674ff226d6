import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morphsolve import elliptic
from morphsolve.errors import DominanceError, SingularPivotError
from morphsolve.grid import build_grid, l1_norm
from morphsolve.verify import random_block_system, resolvent_trial


def test_zero_coupling_constants_are_harmonic():
    g = build_grid(32)
    sys = elliptic.assemble(g, 1.0, 0.3, 1.0, 0, 0, 0, 0)
    u1, u2 = elliptic.solve(sys, np.ones(33), np.ones(33))
    assert np.allclose(u1, 1.0, atol=1e-13)
    assert np.allclose(u2, 1.0, atol=1e-13)


def test_equality_in_dominance_allowed():
    g = build_grid(8)
    sys = elliptic.assemble(g, 1.0, 1.0, 0.5, 2.0, 2.0, 2.0, 2.0)
    u1, u2 = elliptic.solve(sys, np.ones(9), np.zeros(9))
    assert np.all(u1 >= 0) and np.all(u2 >= 0)


def test_dominance_violation_names_node():
    g = build_grid(8)
    a11 = np.ones(9)
    a11[3] = 0.0
    with pytest.raises(DominanceError) as exc:
        elliptic.assemble(g, 1.0, 1.0, 1.0, a11, 0, 1.0, 0)
    assert exc.value.node == 3
    assert "node 3" in str(exc.value)


def test_dominance_second_condition():
    g = build_grid(8)
    with pytest.raises(DominanceError):
        elliptic.assemble(g, 1.0, 1.0, 1.0, 0, 1.0, 0, 0.5)


@pytest.mark.parametrize(
    "args",
    [
        (0.0, 1.0, 1.0, 0, 0, 0, 0),
        (1.0, -1.0, 1.0, 0, 0, 0, 0),
        (1.0, 1.0, 0.0, 0, 0, 0, 0),
        (1.0, 1.0, 1.0, 1, -1, 0, 0),
    ],
)
def test_assemble_rejects_bad_inputs(args):
    with pytest.raises(ValueError):
        elliptic.assemble(build_grid(8), *args)


def test_solve_rejects_size_mismatch():
    sys = elliptic.assemble(build_grid(8), 1, 1, 1, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        elliptic.solve(sys, np.ones(8), np.ones(9))


def test_singular_pivot_is_reported():
    # bypass assemble: a zero shift with no reaction leaves the Neumann operator singular
    g = build_grid(4)
    z = np.zeros(5)
    sys = elliptic.BlockSystem(g, 1.0, 1.0, 0.0, z, z, z, z)
    with pytest.raises(SingularPivotError):
        elliptic.solve(sys, np.ones(5), np.ones(5))


def test_apply_is_inverse_of_solve(rng):
    sys = random_block_system(rng, 40)
    f1, f2 = rng.normal(size=(2, 41))
    u1, u2 = elliptic.solve(sys, f1, f2)
    g1, g2 = elliptic.apply(sys, u1, u2)
    assert np.allclose(g1, f1, atol=1e-9) and np.allclose(g2, f2, atol=1e-9)
    assert elliptic.residual_norm(sys, u1, u2, f1, f2) <= 1e-10 * (
        l1_norm(f1, sys.grid) + l1_norm(f2, sys.grid) + l1_norm(u1, sys.grid) + l1_norm(u2, sys.grid)
    )


def test_dense_matches_apply(rng):
    sys = random_block_system(rng, 6)
    u1, u2 = rng.normal(size=(2, 7))
    a1, a2 = elliptic.apply(sys, u1, u2)
    dense = elliptic.to_dense(sys) @ np.column_stack([u1, u2]).ravel()
    assert np.allclose(np.column_stack([a1, a2]).ravel(), dense)


def test_dense_is_m_matrix(rng):
    for _ in range(20):
        A = elliptic.to_dense(random_block_system(rng, 8))
        off = A - np.diag(np.diag(A))
        assert np.all(off <= 0)
        assert np.all(np.linalg.inv(A) >= -1e-12)


@settings(max_examples=200)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_agrees_with_dense_oracle(k, seed):
    r = np.random.default_rng(seed)
    sys = random_block_system(r, 2 * k)
    f1, f2 = r.normal(size=(2, 2 * k + 1))
    u1, u2 = elliptic.solve(sys, f1, f2)
    dense = np.linalg.solve(elliptic.to_dense(sys), np.column_stack([f1, f2]).ravel())
    got = np.column_stack([u1, u2]).ravel()
    assert np.max(np.abs(got - dense)) <= 1e-10 * np.max(np.abs(dense))


def test_resolvent_properties_1000_trials():
    r = np.random.default_rng(7)
    for _ in range(1000):
        pos, l1 = resolvent_trial(r, 2 * int(r.integers(2, 33)))
        assert pos >= 0
        assert l1 >= 0


def test_large_grid_residual():
    r = np.random.default_rng(3)
    sys = random_block_system(r, 4096)
    f1, f2 = r.uniform(0, 1, (2, 4097))
    u1, u2 = elliptic.solve(sys, f1, f2)
    assert min(u1.min(), u2.min()) >= 0
