import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import pd_pairs, psd_pairs
from matineq import drury
from matineq import generators as gen
from matineq import linalg as la
from matineq.errors import DegenerateInstance, DimensionError, DomainError
from matineq.inequalities import check_bkd

SQ3 = np.sqrt(3.0)
# lambda_1 of [[1.5, sqrt3], [sqrt3, 3]] by the 2x2 trace/determinant formula
PROP3_LAMBDA = (4.5 + np.sqrt(4.5**2 - 4 * (4.5 - 3.0))) / 2


def test_prop3_lambda_constant():
    assert PROP3_LAMBDA == pytest.approx((4.5 + np.sqrt(14.25)) / 2)


# -- normalize --------------------------------------------------------------

def test_normalize_examples():
    A = np.diag([1.0, 1.0])
    B = np.diag([2.0, 1.0])
    An, Bn, c = drury.normalize_pair(A, B, 2)
    assert c == 1.0 and np.array_equal(An, A) and np.array_equal(Bn, B)
    An, Bn, c = drury.normalize_pair(2 * np.eye(2), 2 * np.eye(2), 1)
    assert c == pytest.approx(0.5)
    assert np.allclose(An, np.eye(2)) and np.allclose(Bn, np.eye(2))


def test_normalize_identity_unchanged():
    An, Bn, c = drury.normalize_pair(np.eye(3), np.eye(3), 2)
    assert c == 1.0


@given(pd_pairs(), st.data())
def test_normalize_sets_sigma_r(pair, data):
    A, B = pair
    r = data.draw(st.integers(1, A.shape[0]))
    An, Bn, c = drury.normalize_pair(A, B, r)
    assert la.svdvals_desc(An @ Bn)[r - 1] == pytest.approx(1.0, abs=la.tol(An, Bn))


def test_normalize_rejects_bad_r():
    with pytest.raises(DomainError):
        drury.normalize_pair(np.eye(2), np.eye(2), 3)


# -- B1 ---------------------------------------------------------------------

def test_b1_examples():
    assert np.allclose(drury.build_b1(np.eye(3), np.eye(3), 3), np.eye(3))
    assert np.allclose(drury.build_b1(np.eye(2), np.diag([1.0, 0.5]), 1), np.diag([1.0, 0.0]), atol=1e-14)


def test_b1_degenerate_postconditions():
    B1 = drury.build_b1(np.eye(3), np.eye(3), 1)
    assert drury.numerical_rank(B1) == 1
    assert la.min_eig(np.eye(3) - B1) >= -1e-12
    P = la.hermitian(B1 @ B1)
    assert np.linalg.norm(P @ P - P) <= 1e-12


def test_b1_requires_normalization():
    with pytest.raises(DomainError):
        drury.build_b1(0.1 * np.eye(2), 0.1 * np.eye(2), 1)


# -- partition / A1 ---------------------------------------------------------

def test_partition_diag():
    pair, V = drury.partition_basis(np.eye(2), np.diag([1.0, 0.0]), 1)
    assert np.allclose(np.abs(V), np.eye(2))
    assert np.allclose(pair.X, [[1]]) and np.allclose(pair.A11, [[1]])
    assert np.allclose(pair.A12, [[0]]) and np.allclose(pair.A22, [[1]])


def test_partition_recovers_rotated_block():
    # B1 = W diag(X0, 0) W* with X0 PD; A chosen so that the constraint holds
    n, r = 4, 2
    inst = gen.make_prop1_instance(n, r, seed=11)
    A0 = inst.full_a()
    X0 = inst.X
    W = gen.haar_unitary(n, seed=12)
    B1 = W @ np.block([[X0, np.zeros((r, n - r))], [np.zeros((n - r, r)), np.zeros((n - r, n - r))]]) @ W.conj().T
    A = W @ A0 @ W.conj().T
    pair, V = drury.partition_basis(A, B1, r)
    assert np.allclose(np.sort(la.eigvalsh_desc(pair.X)), np.sort(la.eigvalsh_desc(X0)))
    assert pair.constraint_residual() <= la.tol_proj(A, B1)


def test_partition_rank_mismatch():
    with pytest.raises(DimensionError):
        drury.partition_basis(np.eye(2), np.diag([1.0, 0.0]), 2)


def test_build_a1_examples():
    p = drury.PartitionedPair(X=np.eye(1), A11=np.array([[2.0]]), A12=np.array([[0.0]]),
                              A22=np.array([[5.0]]))
    assert np.allclose(drury.build_a1(p), np.diag([2.0, 0.0]))
    p = drury.PartitionedPair(X=np.eye(1), A11=np.array([[2.0]]), A12=np.array([[1.0]]),
                              A22=np.array([[1.0]]))
    A1 = drury.build_a1(p)
    assert np.allclose(A1, [[2.0, 1.0], [1.0, 0.5]])
    assert drury.numerical_rank(A1) == 1 and la.is_psd(A1)


# -- lemma1 -----------------------------------------------------------------

@pytest.mark.parametrize("X,S,expected", [
    (1.0, 1.0, 0.0),
    (2.0, 1.0, 0.5),
    (1.0, 2.0, (5 + np.sqrt(10)) / 2 - 2),
])
def test_lemma1_examples(X, S, expected):
    res = drury.lemma1_margin([[X]], [[S]])
    assert res.min_margin == pytest.approx(expected, abs=1e-10)
    assert res.details["chain_ok"]


def test_lemma1_singular_s():
    with pytest.raises(DomainError):
        drury.lemma1_margin(np.eye(2), np.diag([1.0, 0.0]))


@given(st.integers(1, 5), st.integers(0, 2**31), st.sampled_from(gen.FIELDS))
def test_lemma1_chain_random(r, seed, field):
    X = gen.random_pd(gen.GenSpec(r, cond=100, field=field, seed=seed))
    S = gen.random_nonsingular(r, seed + 1, field)
    res = drury.lemma1_margin(X, S)
    assert res.passed and res.details["chain_ok"]
    c = res.details["chain"]
    assert all(c[i] >= c[i + 1] - res.tolerance for i in range(3))


def test_lemma1_equality_iff_unit_singular_value():
    S = np.diag([3.0, 1.0])  # |S| has eigenvalue 1 at position r=2
    res = drury.lemma1_margin(np.eye(2), S)
    assert res.details["chain"][2] == pytest.approx(2.0)


# -- prop1 ------------------------------------------------------------------

def test_prop1_equality_example():
    p = drury.PartitionedPair(X=np.eye(1), A11=np.eye(1), A12=np.zeros((1, 1)), A22=np.eye(1))
    res = drury.verify_prop1(p)
    assert res.min_margin == pytest.approx(0.0, abs=1e-12)
    assert res.details["chain_ok"]


def test_prop1_sqrt3_example():
    A11, A12 = np.array([[1.0]]), np.array([[SQ3]])
    X = la.matrix_power(A11 @ A11 + A12 @ A12.T, -0.5)
    assert X[0, 0] == pytest.approx(0.5)
    p = drury.PartitionedPair(X=X, A11=A11, A12=A12, A22=np.array([[4.0]]))
    res = drury.verify_prop1(p)
    assert res.details["lambda_r"] == pytest.approx(PROP3_LAMBDA, abs=1e-10)
    assert res.min_margin == pytest.approx(PROP3_LAMBDA - 2, abs=1e-10)


@given(st.integers(1, 7), st.data(), st.integers(0, 2**31), st.sampled_from(gen.FIELDS))
def test_prop1_random(n, data, seed, field):
    r = data.draw(st.integers(1, n))
    p = gen.make_prop1_instance(n, r, seed, field)
    res = drury.verify_prop1(p)
    assert res.passed
    assert res.details["chain_ok"], res.details["checks"]


# -- Props 2 and 3 ----------------------------------------------------------

def test_prop2_examples():
    res = drury.check_prop2(drury.Prop2Instance(np.eye(3), np.eye(3)))
    assert res.min_margin == pytest.approx(0.0, abs=1e-12)
    res = drury.check_prop2(drury.Prop2Instance(np.array([[4.0]]), np.array([[1.0]])))
    assert res.details["lambda_r"] == pytest.approx((5 + np.sqrt(10)) / 2, abs=1e-10)
    res = drury.check_prop2(drury.Prop2Instance(np.array([[0.1]]), np.array([[0.1]])))
    assert res.min_margin == pytest.approx(8.1, abs=1e-10)
    assert res.details["lambda_min"] == pytest.approx(-9.9, abs=1e-10)


def test_make_prop3_examples():
    inst = drury.make_prop3_instance(np.eye(2), np.zeros((2, 2)))
    assert np.allclose(inst.M, np.eye(2))
    inst = drury.make_prop3_instance([[1.0]], [[SQ3]])
    assert inst.M[0, 0] == pytest.approx(0.5)


@given(st.integers(1, 5), st.integers(0, 2**31), st.sampled_from(gen.FIELDS))
def test_prop3_constraint_random(r, seed, field):
    L = gen.random_pd(gen.GenSpec(r, cond=100, field=field, seed=seed))
    Z = gen._gaussian(gen.derive_rng(seed, 9), (r, r), field)
    inst = drury.make_prop3_instance(L, Z)
    assert inst.constraint_residual() <= la.tol_proj(L, Z)
    res = drury.check_prop3(inst)
    assert res.passed and res.details["psd_ok"]


def test_prop3_examples():
    res = drury.check_prop3(drury.make_prop3_instance([[1.0]], [[0.0]]))
    assert res.min_margin == pytest.approx(0.0, abs=1e-12)
    res = drury.check_prop3(drury.make_prop3_instance([[1.0]], [[SQ3]]))
    assert res.details["lambda_r"] == pytest.approx(PROP3_LAMBDA, abs=1e-10)


def test_prop3_matches_prop1_under_substitution():
    # the prop1 block with (A11, A12, X) equals the prop3 matrix with
    # L = A11, Z = A11^{-1} A12 and M = X (constraint coincides)
    r = 2
    p = gen.make_prop1_instance(2 * r, r, seed=21)
    Z = np.linalg.solve(p.A11, p.A12)
    inst = drury.make_prop3_instance(p.A11, Z)
    assert np.allclose(inst.M, p.X, atol=1e-10)
    assert drury.check_prop3(inst).min_margin == pytest.approx(drury.verify_prop1(p).min_margin, abs=1e-9)


# -- full reduction ---------------------------------------------------------

@pytest.mark.parametrize("r", [1, 2, 3])
def test_reduction_identity(r):
    tr = drury.run_reduction(np.eye(3), np.eye(3), r)
    assert tr.scale == 1.0 and tr.ok
    assert drury.numerical_rank(tr.B1) == r
    assert all(v == pytest.approx(2.0, abs=1e-12) for v in tr.stage_eigen.values())


def test_reduction_worked_diagonal():
    tr = drury.run_reduction(np.eye(2), np.diag([1.0, 0.5]), 1)
    assert np.allclose(tr.B1, np.diag([1.0, 0.0]), atol=1e-10)
    assert np.allclose(tr.a1_original_basis(), np.diag([1.0, 0.0]), atol=1e-10)
    assert tr.stage_eigen["A1+B1"] == pytest.approx(2.0, abs=1e-10)
    assert [s["stage"] for s in tr.to_record()["stages"]] == list(drury.STAGES)


@given(pd_pairs(max_n=6), st.data())
def test_reduction_invariants(pair, data):
    A, B = pair
    r = data.draw(st.integers(1, A.shape[0]))
    tr = drury.run_reduction(A, B, r)
    assert tr.ok, {k: v for k, v in tr.checks.items() if not v}
    e, tol = tr.stage_eigen, tr.tolerance
    assert e["A+B"] >= e["A+B1"] - tol >= e["A1+B1"] - 2 * tol >= 2 - 3 * tol


@given(psd_pairs(max_n=5), st.data())
def test_reduction_semidefinite(pair, data):
    A, B = pair
    r = data.draw(st.integers(1, A.shape[0]))
    try:
        tr = drury.run_reduction(A, B, r)
    except DegenerateInstance:
        return
    # after an eps shift the pair can have condition number ~1/eps, and the
    # B >= B1 certificates lose accuracy in proportion; the chain, the
    # projection structure and the theorem margin stay within tolerance
    core = ("chain_b1", "chain_a1", "chain_final", "a_geq_a1", "ab1_projection", "b1a_projection",
            "partition_constraint", "prop1", "bkd")
    assert all(tr.checks[k] for k in core), tr.checks
    if not tr.perturbed:
        assert tr.ok


def test_epsilon_sweep_shape():
    A = np.diag([1.0, 0.0])
    sweep = drury.epsilon_sweep(A, np.diag([0.0, 1.0]))
    assert sorted(sweep) == sorted(drury.EPS_SWEEP)
    for m in sweep.values():
        assert np.all(m >= -la.tol(A))


def test_reduction_bkd_agrees():
    A = gen.random_pd(gen.GenSpec(4, seed=31))
    B = gen.random_pd(gen.GenSpec(4, seed=32))
    tr = drury.run_reduction(A, B, 3)
    assert tr.bkd_margin == check_bkd(A, B).margins[2]
