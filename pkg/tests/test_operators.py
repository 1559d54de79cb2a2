import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdynlab.errors import DimensionMismatch, NonFinite, TruncationError
from qdynlab.operators import (
    ATOM_EXCITED,
    FockSpace,
    SiteLattice,
    anticommutator,
    annihilation_op,
    atom_state,
    check_tail,
    commutator,
    creation_op,
    dag,
    displacement,
    embed,
    embed_sparse,
    fock_state,
    is_hermitian,
    kron,
    local_left_multiply,
    local_right_multiply,
    matrix_exp,
    number_op,
    operator_norm,
    partial_trace,
    trace,
    weyl_op,
)

SZ = np.diag([1.0, -1.0]).astype(complex)


def rand_mat(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def taylor_exp(m, terms=80):
    """Series oracle with scaling and squaring by hand."""
    s = max(0, math.ceil(math.log2(max(np.abs(m).sum(axis=1).max(), 1e-300))) + 1)
    a = m / 2**s
    out, term = np.eye(len(m), dtype=complex), np.eye(len(m), dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


# ---------------------------------------------------------------- Fock space


def test_annihilation_small_cutoffs():
    assert np.array_equal(annihilation_op(FockSpace(1)), np.array([[0, 1], [0, 0]]))
    assert annihilation_op(FockSpace(2))[1, 2] == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("cutoff", [1, 2, 5, 20, 40])
def test_ccr_exact_below_cutoff(cutoff):
    sp = FockSpace(cutoff)
    b, bd = annihilation_op(sp), creation_op(sp)
    defect = (commutator(b, bd) - np.eye(sp.dim))[:cutoff, :cutoff]
    assert np.max(np.abs(defect)) <= 1e-12
    assert np.array_equal(bd, dag(b))


def test_number_operator_is_bdag_b():
    sp = FockSpace(7)
    b = annihilation_op(sp)
    assert np.allclose(dag(b) @ b, number_op(sp), atol=1e-14)


def test_fock_space_rejects_negative_cutoff():
    with pytest.raises(ValueError):
        FockSpace(-1)


def test_displacement_zero_is_identity():
    assert np.array_equal(displacement(FockSpace(5), 0.0), np.eye(6))


def test_displacement_shift_identity():
    sp = FockSpace(30)
    d = displacement(sp, 0.3)
    b = annihilation_op(sp)
    lhs = (d @ b @ dag(d))[:21, :21]
    rhs = (b - 0.3 * np.eye(sp.dim))[:21, :21]
    assert np.max(np.abs(lhs - rhs)) <= 1e-8
    assert abs((dag(d) @ d)[0, 0] - 1) <= 1e-12


def test_displacement_truncation_error():
    with pytest.raises(TruncationError):
        displacement(FockSpace(5), 3.0)


def test_weyl_conventions():
    sp = FockSpace(30)
    assert np.array_equal(weyl_op(sp, 0), np.eye(sp.dim))
    assert np.allclose(weyl_op(sp, 0.4), displacement(sp, -0.4), atol=1e-13)
    w = weyl_op(sp, 0.3 - 0.2j)
    assert np.allclose(dag(w), weyl_op(sp, -0.3 + 0.2j), atol=1e-12)


def test_weyl_vacuum_expectation():
    # normal ordering: <0|W(alpha)|0> = exp(-|alpha|^2 / 2)
    sp = FockSpace(30)
    assert abs(weyl_op(sp, 0.5j)[0, 0] - math.exp(-0.125)) <= 1e-12


def test_check_tail():
    sp = FockSpace(3)
    check_tail(fock_state(sp, 2))
    with pytest.raises(TruncationError):
        check_tail(fock_state(sp, 3))


def test_atom_projector():
    assert np.array_equal(ATOM_EXCITED @ ATOM_EXCITED, ATOM_EXCITED)
    assert is_hermitian(ATOM_EXCITED)
    assert np.trace(atom_state(0.3)).real == pytest.approx(1.0)
    with pytest.raises(ValueError):
        atom_state(1.5)


# ---------------------------------------------------------------- matrix exponential


def test_matrix_exp_trivial_cases():
    assert np.array_equal(matrix_exp(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(matrix_exp(1j * math.pi * np.diag([1, -1])), -np.eye(2), atol=1e-14)


def test_matrix_exp_against_series():
    rng = np.random.default_rng(8)
    m = rand_mat(rng, 8)
    assert np.max(np.abs(matrix_exp(m) - taylor_exp(m))) <= 1e-10 * np.max(np.abs(taylor_exp(m)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_matrix_exp_unitary_for_hermitian(seed, d):
    rng = np.random.default_rng(seed)
    h = rand_mat(rng, d)
    u = matrix_exp(1j * (h + dag(h)))
    assert np.max(np.abs(dag(u) @ u - np.eye(d))) <= 1e-11


def test_matrix_exp_rejects_non_finite():
    with pytest.raises(NonFinite):
        matrix_exp(np.array([[np.nan]]))
    with pytest.raises(DimensionMismatch):
        matrix_exp(np.zeros((2, 3)))


# ---------------------------------------------------------------- small helpers


def test_norm_trace_commutators():
    assert operator_norm(np.diag([3.0, -4.0, 0.0])) == pytest.approx(4.0)
    a = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.array_equal(anticommutator(a, SZ), np.zeros((2, 2)))
    assert trace(np.eye(3)) == 3
    with pytest.raises(DimensionMismatch):
        commutator(np.eye(2), np.eye(3))
    with pytest.raises(DimensionMismatch):
        trace(np.zeros((2, 3)))


# ---------------------------------------------------------------- lattices


def test_lattice_dimension_and_labels():
    lat = SiteLattice((2, 3, 4), ("a", "b", "c"))
    assert lat.dim == 24 and lat.n_sites == 3
    assert lat.index("c") == 2
    with pytest.raises(DimensionMismatch):
        lat.index("z")
    with pytest.raises(ValueError):
        SiteLattice((2, 2), ("a", "a"))


def test_embed_ordering_convention():
    lat = SiteLattice.qubits(2)
    assert np.array_equal(embed(SZ, (0,), lat), np.diag([1, 1, -1, -1]))
    assert np.array_equal(embed(SZ, (1,), lat), np.diag([1, -1, 1, -1]))
    assert np.array_equal(embed(np.eye(2), (1,), lat), np.eye(4))


def test_embed_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        embed(np.eye(3), (0,), SiteLattice.qubits(2))


def test_embed_non_adjacent_support_matches_kron_with_swap():
    rng = np.random.default_rng(1)
    lat = SiteLattice((2, 3, 2))
    a, b = rand_mat(rng, 2), rand_mat(rng, 2)
    got = embed(np.kron(a, b), (0, 2), lat)
    assert np.allclose(got, kron(a, np.eye(3), b), atol=1e-13)
    # reversed support order swaps the tensor factors
    got_rev = embed(np.kron(a, b), (2, 0), lat)
    assert np.allclose(got_rev, kron(b, np.eye(3), a), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(2, 3), min_size=2, max_size=4))
def test_embed_homomorphism_and_norm(seed, dims):
    rng = np.random.default_rng(seed)
    lat = SiteLattice(tuple(dims))
    k = int(rng.integers(1, len(dims) + 1))
    support = tuple(int(i) for i in rng.permutation(len(dims))[:k])
    d = lat.support_dim(support)
    a, b = rand_mat(rng, d), rand_mat(rng, d)
    ea, eb = embed(a, support, lat), embed(b, support, lat)
    assert np.allclose(embed(a @ b, support, lat), ea @ eb, atol=1e-10)
    assert operator_norm(ea) == pytest.approx(operator_norm(a), rel=1e-10)
    assert np.allclose(embed_sparse(a, support, lat).toarray(), ea, atol=1e-13)
    m = rand_mat(rng, lat.dim)
    assert np.allclose(local_left_multiply(a, support, lat, m), ea @ m, atol=1e-10)
    assert np.allclose(local_right_multiply(m, a, support, lat), m @ ea, atol=1e-10)


def test_partial_trace_of_product():
    rng = np.random.default_rng(2)
    rho, sig = rand_mat(rng, 3), rand_mat(rng, 2)
    lat = SiteLattice((3, 2))
    assert np.allclose(partial_trace(np.kron(rho, sig), lat, (0,)), rho * np.trace(sig), atol=1e-12)
    assert np.allclose(partial_trace(np.kron(rho, sig), lat, (1,)), sig * np.trace(rho), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(2, 3), min_size=2, max_size=4))
def test_partial_trace_preserves_trace_and_positivity(seed, dims):
    rng = np.random.default_rng(seed)
    lat = SiteLattice(tuple(dims))
    x = rand_mat(rng, lat.dim)
    rho = x @ dag(x)
    keep = tuple(i for i in range(len(dims)) if rng.uniform() < 0.5) or (0,)
    red = partial_trace(rho, lat, keep)
    assert np.trace(red) == pytest.approx(np.trace(rho), rel=1e-12)
    assert np.linalg.eigvalsh(0.5 * (red + dag(red)))[0] >= -1e-12 * np.trace(rho).real
    # duality with embed: Tr(red A) = Tr(rho embed(A))
    a = rand_mat(rng, lat.support_dim(keep))
    assert np.trace(red @ a) == pytest.approx(np.trace(rho @ embed(a, keep, lat)), rel=1e-10)
