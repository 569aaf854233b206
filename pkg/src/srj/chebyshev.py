"""Chebyshev polynomials and the bounded amplification polynomials built on them.

The degree-M amplification polynomial is the vertically and horizontally
rescaled Chebyshev polynomial

    G_M(lam) = T_M(f(lam)) / 3,   f(lam) = ((lam* + 1) lam + (lam* - 1)) / 2,

where lam* > 1 solves T_M(lam*) = 3.  G_M equals 1 at lam = 1, stays within
+-1/3 on [-1, lambda_max(M)], and its M real roots generate one relaxation
factor each.  lambda_max(M) = (3 - lam*)/(1 + lam*) increases toward 1 with M,
so larger M bounds a wider band of Jacobi eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ARCCOSH_3 = math.acosh(3.0)

# Boundedness scans use a fixed grid; doubled for very large M where the
# extrema of G_M become too dense for 10,001 points to resolve.
BOUNDEDNESS_GRID = 10_001
_GRID_DOUBLING_M = 2500


def _acosh_stable(x: np.ndarray) -> np.ndarray:
    """acosh for x >= 1 computed from the exact excess x - 1.

    The subtraction is exact for x in [1, 2) (Sterbenz), so unlike
    log(x + sqrt(x^2 - 1)) no precision is lost just above 1, where the
    bound-point evaluations of large-M polynomials live.
    """
    d = x - 1.0
    return np.log1p(d + np.sqrt(d * (2.0 + d)))


def cheb_eval(M: int, x) -> float | np.ndarray:
    """Evaluate T_M(x).

    Uses cos(M acos x) inside [-1, 1] and the sign-corrected hyperbolic form
    outside; the three-term recurrence is avoided because it loses precision
    for large M near the interval ends.
    """
    if M < 0:
        raise ValueError("degree must be nonnegative")
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xa)
    inside = np.abs(xa) <= 1.0
    out[inside] = np.cos(M * np.arccos(xa[inside]))
    xo = np.abs(xa[~inside])
    sign = np.where(xa[~inside] < 0.0, (-1.0) ** M, 1.0)
    out[~inside] = sign * np.cosh(M * _acosh_stable(xo))
    return float(out[0]) if scalar else out


def cheb_deriv(M: int, x: float) -> float:
    """T_M'(x) = M U_{M-1}(x), hyperbolic form for |x| > 1."""
    if M == 0:
        return 0.0
    if x > 1.0:
        t = math.acosh(x)
        if t == 0.0:
            return float(M * M)
        return M * math.sinh(M * t) / math.sinh(t)
    if x < -1.0:
        t = math.acosh(-x)
        if t == 0.0:
            u = float(M)
        else:
            u = math.sinh(M * t) / math.sinh(t)
        return M * (-1.0) ** (M - 1) * u
    if abs(x) == 1.0:
        return M * M * (1.0 if x > 0 else (-1.0) ** (M - 1))
    t = math.acos(x)
    return M * math.sin(M * t) / math.sin(t)


def cheb_roots(M: int) -> np.ndarray:
    """Roots of T_M in descending order: cos(pi (2j+1) / (2M)), j = 0..M-1."""
    if M < 1:
        raise ValueError("degree must be positive")
    j = np.arange(M)
    return np.cos(np.pi * (2 * j + 1) / (2 * M))


def lambda_star(M: int) -> float:
    """The argument where T_M equals 3, in closed form: cosh(acosh(3)/M)."""
    if M < 1:
        raise ValueError("degree must be positive")
    return math.cosh(ARCCOSH_3 / M)


def affine_f(lam_star: float, lam) -> float | np.ndarray:
    """Map [-1, 1] onto [-1, lam*]: f(lam) = ((lam*+1) lam + (lam*-1)) / 2."""
    lam = np.asarray(lam, dtype=float)
    out = ((lam_star + 1.0) * lam + (lam_star - 1.0)) / 2.0
    return float(out) if out.ndim == 0 else out


def affine_g(lam_star: float, x) -> float | np.ndarray:
    """Inverse of affine_f: g(x) = 2x/(lam*+1) + (1-lam*)/(1+lam*)."""
    x = np.asarray(x, dtype=float)
    out = 2.0 * x / (lam_star + 1.0) + (1.0 - lam_star) / (1.0 + lam_star)
    return float(out) if out.ndim == 0 else out


def amplification_eval(M: int, lam) -> float | np.ndarray:
    """G_M(lam) = T_M(f(lam)) / 3 with lam* = lambda_star(M)."""
    ls = lambda_star(M)
    return cheb_eval(M, affine_f(ls, lam)) / 3.0


def lambda_max(M: int) -> float:
    """Largest eigenvalue for which |G_M| <= 1/3; equals g(1) = (3-lam*)/(1+lam*)."""
    ls = lambda_star(M)
    return (3.0 - ls) / (1.0 + ls)


@dataclass(frozen=True)
class AmplificationPolynomial:
    """Degree, its T_M = 3 anchor point, and the captured eigenvalue bound."""

    M: int
    lambda_star: float
    lambda_max: float

    def __call__(self, lam):
        return amplification_eval(self.M, lam)


def amplification_poly(M: int) -> AmplificationPolynomial:
    return AmplificationPolynomial(M=M, lambda_star=lambda_star(M), lambda_max=lambda_max(M))


def bounded_region_max(M: int, grid_points: int | None = None) -> float:
    """max |G_M| over a uniform grid on [-1, lambda_max(M)].

    Should not exceed 1/3 (plus rounding).  The default grid has 10,001
    points, doubled once M exceeds 2500 so neighboring extrema stay resolved.
    """
    if grid_points is None:
        grid_points = BOUNDEDNESS_GRID if M <= _GRID_DOUBLING_M else 2 * BOUNDEDNESS_GRID
    grid = np.linspace(-1.0, lambda_max(M), grid_points)
    return float(np.max(np.abs(amplification_eval(M, grid))))
