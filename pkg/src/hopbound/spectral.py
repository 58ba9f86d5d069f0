"""Dominant-eigenvector rounding for the positive form.

The top eigenpair of ``H^T H`` is found by power iteration on ``v -> H^T (H v)``, so
the ``n x n`` Gram matrix is never formed.  Spins are the signs of the eigenvector,
and the realized value always clears ``lambda_1 * (sum_i |q_i|)**2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Algorithm, EnergyReport, Form, ProblemInstance, energy, spin_sign

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITERS",
    "ConvergenceError",
    "SpectralResult",
    "top_eigenpair",
    "round_eigenvector",
    "eigen_solve",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 10_000


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SpectralResult:
    lambda1: float
    q1: np.ndarray
    sigma: np.ndarray
    report: EnergyReport
    guaranteed_floor: float
    iterations: int = 0


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _power_iterate(H, v, tol, max_iters):
    lam = float(np.dot(H @ v, H @ v))
    for it in range(1, max_iters + 1):
        u = H.T @ (H @ v)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return None, 0.0, it
        v = u / norm
        Hv = H @ v
        lam_new = float(Hv @ Hv)
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return v, lam_new, it
        lam = lam_new
    residual = float(np.linalg.norm(H.T @ (H @ v) - lam * v))
    raise ConvergenceError(
        f"power iteration did not converge in {max_iters} iterations "
        f"(last eigen-residual {residual:.3e})", residual, max_iters)


def top_eigenpair(instance: ProblemInstance, tol: float = DEFAULT_TOL,
                  max_iters: int = DEFAULT_MAX_ITERS):
    """Largest eigenvalue of ``H^T H`` and a unit eigenvector.

    Starts from the normalized all-ones vector.  If that start lies in the null space
    of ``H`` the iteration is restarted from the alternating ``(+1, -1, ...)`` vector,
    and failing that from the largest-norm row of ``H``, which lies in the row space
    and so cannot be annihilated.  The returned vector has its first nonzero component
    positive.

    Returns:
        tuple: ``(lambda1, q1, iterations)``
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    H = instance.H
    n = instance.n
    if not np.any(H):
        return 0.0, np.ones(n) / np.sqrt(n), 0

    widest_row = H[int(np.argmax(np.einsum("ij,ij->i", H, H)))]
    starts = (np.ones(n), np.where(np.arange(n) % 2 == 0, 1.0, -1.0), widest_row)
    for start in starts:
        v0 = start / np.linalg.norm(start)
        v, lam, iters = _power_iterate(H, v0, tol, max_iters)
        if v is not None:
            return lam, _canonical_sign(v), iters
    raise ConvergenceError(
        "every deterministic start vector lies in the null space of H; "
        "cannot locate the dominant eigenvector")


def round_eigenvector(instance: ProblemInstance, lambda1: float, q1: np.ndarray,
                      iterations: int = 0) -> SpectralResult:
    """Round a given eigenvector to spins and evaluate it."""
    q1 = np.asarray(q1, dtype=np.float64)
    sigma = spin_sign(q1)
    report = energy(instance, sigma, Form.POSITIVE, Algorithm.EIGEN)
    floor = float(lambda1) * float(np.abs(q1).sum()) ** 2
    # sigma^T H^T H sigma >= lambda1 (q1 . sigma)^2 for the exact eigenpair
    slack = 1e-8 * max(floor, report.raw_quadratic, 1.0)
    if report.raw_quadratic < floor - slack:
        raise ArithmeticError(
            f"rounded value {report.raw_quadratic!r} is below the eigen floor {floor!r}")
    return SpectralResult(float(lambda1), q1, sigma, report, floor, iterations)


def eigen_solve(instance: ProblemInstance, tol: float = DEFAULT_TOL,
                max_iters: int = DEFAULT_MAX_ITERS) -> SpectralResult:
    lam, q1, iters = top_eigenpair(instance, tol, max_iters)
    return round_eigenvector(instance, lam, q1, iters)
