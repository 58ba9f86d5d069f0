import numpy as np
import pytest

from hopbound import make_instance, sample_instance
from hopbound.exact import solve_exact
from hopbound.spectral import (ConvergenceError, eigen_solve, round_eigenvector, top_eigenpair)


def test_diagonal_pair():
    lam, q, _ = top_eigenpair(make_instance(np.diag([2.0, 1.0])))
    assert lam == pytest.approx(4.0, rel=1e-10)
    np.testing.assert_allclose(q, [1.0, 0.0], atol=1e-4)


def test_isotropic_any_vector():
    inst = make_instance(np.eye(2))
    lam, q, _ = top_eigenpair(inst)
    assert lam == pytest.approx(1.0)
    assert np.linalg.norm(q) == pytest.approx(1.0, abs=1e-10)
    assert float(q @ inst.H.T @ inst.H @ q) == pytest.approx(1.0)


def test_eigen_solve_diagonal():
    res = eigen_solve(make_instance(np.diag([2.0, 1.0])))
    assert list(res.sigma) == [1, 1]
    assert res.report.raw_quadratic == 5.0
    # q1 is only sqrt(tol)-accurate when the Rayleigh quotient has converged to tol
    assert res.guaranteed_floor == pytest.approx(4.0, rel=1e-4)


def test_sign_flip_invariance():
    inst = sample_instance(30, 20, "gaussian", 2)
    res = eigen_solve(inst)
    flipped = round_eigenvector(inst, res.lambda1, -res.q1)
    assert flipped.report.raw_quadratic == res.report.raw_quadratic


def test_canonical_sign_and_rayleigh():
    inst = sample_instance(40, 30, "gaussian", 8)
    lam, q, _ = top_eigenpair(inst)
    assert q[np.flatnonzero(q)[0]] > 0
    assert abs(np.linalg.norm(q) - 1.0) <= 1e-10
    Hq = inst.H @ q
    assert lam >= Hq @ Hq - 1e-8 * lam
    assert lam == pytest.approx(np.linalg.eigvalsh(inst.H.T @ inst.H)[-1], rel=1e-9)


def test_start_in_null_space_reseeds():
    # all-ones is annihilated by H; the alternating start is not
    H = np.array([[1.0, -1.0, 0.0], [0.0, 1.0, -1.0]])
    lam, q, _ = top_eigenpair(make_instance(H))
    assert lam == pytest.approx(3.0, rel=1e-9)


def test_both_patterned_starts_degenerate():
    # annihilates all-ones and the alternating vector; the row-space start still works
    H = np.array([[1.0, 1.0, -1.0, -1.0]])
    lam, q, _ = top_eigenpair(make_instance(H))
    assert lam == pytest.approx(4.0, rel=1e-12)
    np.testing.assert_allclose(q, [0.5, 0.5, -0.5, -0.5], atol=1e-12)


def test_non_convergence_reports_residual():
    inst = sample_instance(50, 50, "gaussian", 3)
    with pytest.raises(ConvergenceError) as err:
        top_eigenpair(inst, tol=1e-14, max_iters=2)
    assert err.value.residual > 0


def test_zero_matrix():
    lam, q, _ = top_eigenpair(make_instance(np.zeros((2, 3))))
    assert lam == 0.0 and np.linalg.norm(q) == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [dict(tol=0), dict(max_iters=0)])
def test_argument_checks(bad):
    with pytest.raises(ValueError):
        top_eigenpair(make_instance(np.eye(2)), **bad)


def test_floor_and_oracle_dominance(small_instances):
    for inst in small_instances[:80]:
        res = eigen_solve(inst)
        assert res.report.raw_quadratic >= res.guaranteed_floor * (1 - 1e-8)
        assert res.report.raw_quadratic <= solve_exact(inst, "pos").report.raw_quadratic


@pytest.mark.slow
def test_practical_value_bracket():
    from hopbound.core import mix_seed
    xi = [eigen_solve(sample_instance(400, 400, "gaussian", mix_seed(77, t))).report.normalized_xi
          for t in range(20)]
    assert 1.55 <= np.mean(xi) <= 1.85
