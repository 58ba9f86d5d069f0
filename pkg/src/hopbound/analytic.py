"""Closed-form ground-state bounds and the greedy performance recursions.

All bound values are on the ``||H x||_2 / sqrt(n)`` scale with ``x`` in
``{-1/sqrt(n), 1/sqrt(n)}^n``, i.e. directly comparable with
:attr:`hopbound.core.EnergyReport.normalized_xi`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import Form

__all__ = [
    "SQRT_2_OVER_PI",
    "XI_SK_DEFAULT",
    "XI_SK_ALTERNATIVE",
    "BoundSet",
    "RecursionTrace",
    "bounds",
    "recursion",
    "recursion_limit",
    "RecursionConvergenceError",
]

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

#: Ground-state energy of the SK model in the thermodynamic limit (numerical estimate).
XI_SK_DEFAULT = 0.763
#: Slightly less conservative estimate of the same constant.
XI_SK_ALTERNATIVE = 0.7632


@dataclass(frozen=True)
class BoundSet:
    alpha: float
    xi_sk: float
    positive_upper: float
    positive_lower: float
    negative_lower_asymptotic: float
    eigen_floor_asymptotic: float
    negative_lower_finite: Optional[float] = None
    m: Optional[int] = None
    n: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RecursionTrace:
    m: int
    n: int
    form: Form
    phi: np.ndarray

    @property
    def phi_n(self) -> float:
        return float(self.phi[-1])

    @property
    def normalized_limit(self) -> float:
        """``phi_n / n**2``, the predicted mean of ``r_n / n**2``."""
        return self.phi_n / (self.n * self.n)

    @property
    def normalized_xi(self) -> float:
        """``sqrt(phi_n) / n``, the predicted ``normalized_xi`` of the greedy pass."""
        return math.sqrt(self.phi_n) / self.n


class RecursionConvergenceError(RuntimeError):
    pass


def bounds(alpha: float, xi_sk: float = XI_SK_DEFAULT, m: Optional[int] = None,
           n: Optional[int] = None) -> BoundSet:
    """Evaluate every closed-form bound at ``alpha = m / n``.

    ``negative_lower_finite`` keeps the ``1 / (4 sqrt(m n))`` correction and is only
    filled in when both ``m`` and ``n`` are given.
    """
    alpha = float(alpha)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be a positive finite number, got {alpha}")
    if (m is None) != (n is None):
        raise ValueError("give both m and n, or neither")
    finite = None
    if m is not None:
        m, n = int(m), int(n)
        if m < 1 or n < 1:
            raise ValueError(f"m and n must be positive, got m={m}, n={n}")
        if not math.isclose(m / n, alpha, rel_tol=1e-12):
            raise ValueError(f"inconsistent sizes: m/n = {m / n} but alpha = {alpha}")
        finite = math.sqrt(alpha) - 1.0 / (4.0 * math.sqrt(m * n)) - SQRT_2_OVER_PI

    root = math.sqrt(alpha)
    return BoundSet(
        alpha=alpha,
        xi_sk=float(xi_sk),
        positive_upper=root + SQRT_2_OVER_PI,
        positive_lower=root + float(xi_sk),
        negative_lower_asymptotic=root - SQRT_2_OVER_PI,
        eigen_floor_asymptotic=math.sqrt((root + 1.0) ** 2 * 2.0 / math.pi),
        negative_lower_finite=finite,
        m=m,
        n=n,
    )


def recursion(m: int, n: int, form="positive") -> RecursionTrace:
    """Iterate ``phi_k = phi_{k-1} +/- 2 sqrt(2/pi) sqrt(phi_{k-1}) + m`` from ``phi_1 = m``.

    ``phi_k`` models the expected greedy value after ``k`` spins are fixed; the sign
    is ``+`` for the positive form and ``-`` for the negative one.
    """
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise ValueError(f"m and n must be positive, got m={m}, n={n}")
    form = Form.parse(form)
    step = 2.0 * SQRT_2_OVER_PI * (1.0 if form is Form.POSITIVE else -1.0)
    sqrt = math.sqrt
    fm = float(m)
    phi = [fm] * n
    p = fm
    for k in range(1, n):
        p = p + step * sqrt(p) + fm
        phi[k] = p
    # the negative map is bounded below by m - 2/pi > 0
    if min(phi) < 0:
        raise ArithmeticError("recursion produced a negative value")
    return RecursionTrace(m, n, form, np.array(phi))


def recursion_limit(alpha: float, form="positive", resolution: int = 1_000_000,
                    rtol: float = 1e-3) -> float:
    """Large-``n`` value of ``sqrt(phi_n) / n`` at ``m = round(alpha n)``.

    The recursion is evaluated at ``n = resolution`` and again at twice that; the two
    must agree to ``rtol`` relative, otherwise :class:`RecursionConvergenceError`.
    The value at ``n = resolution`` is returned.
    """
    alpha = float(alpha)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be a positive finite number, got {alpha}")
    resolution = int(resolution)
    if resolution < 1000:
        raise ValueError("resolution must be at least 1000")
    values = []
    for n in (resolution, 2 * resolution):
        m = max(1, round(alpha * n))
        values.append(recursion(m, n, form).normalized_xi)
    coarse, fine = values
    if abs(fine - coarse) > rtol * abs(fine):
        raise RecursionConvergenceError(
            f"recursion not converged at resolution {resolution}: {coarse!r} vs {fine!r}")
    return coarse
