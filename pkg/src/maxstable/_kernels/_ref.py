"""Pure NumPy reference implementation of the bivariate likelihood kernel.

Evaluates the Pickands polynomial and its first two derivatives row by row
from Bernstein coefficients, then assembles the simple max-stable log
density.  The compiled backend mirrors this module exactly; parity between
the two is enforced by the test suite.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "reference"

_FLOOR = 1e-300


def _bernstein_rows(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    m = len(coeffs) - 1
    if m == 0:
        return np.full_like(t, float(coeffs[0]))
    j = np.arange(m + 1)
    binom = np.array([math.comb(m, int(v)) for v in j], dtype=float)
    tt = t[:, None]
    basis = binom * tt**j * (1.0 - tt) ** (m - j)
    return basis @ coeffs


def pickands_derivs2(beta: np.ndarray, t: np.ndarray):
    """A(t), A'(t), A''(t) for the degree len(beta)-1 Bernstein polynomial."""
    beta = np.asarray(beta, dtype=float)
    t = np.asarray(t, dtype=float)
    k = len(beta) - 1
    d1 = k * np.diff(beta)
    a = _bernstein_rows(beta, t)
    a1 = _bernstein_rows(d1, t)
    if k >= 2:
        a2 = _bernstein_rows((k - 1) * np.diff(d1), t)
    else:
        a2 = np.zeros_like(t)
    return a, a1, a2


def simple_logpdf2(beta: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Per-row log density of the simple bivariate max-stable law.

    beta holds the Bernstein coefficients of the Pickands function; rows is
    an (n, 2) array of strictly positive points.
    """
    y1 = rows[:, 0]
    y2 = rows[:, 1]
    s = y1 + y2
    t = y1 / s
    a, a1, a2 = pickands_derivs2(beta, t)
    big_v = a * s / (y1 * y2)
    m1 = (a - t * a1) / y1**2
    m2 = (a + (1.0 - t) * a1) / y2**2
    m12 = a2 / s**3
    bracket = np.maximum(m1, 0.0) * np.maximum(m2, 0.0) + np.maximum(m12, 0.0)
    return -big_v + np.log(np.maximum(bracket, _FLOOR))


def simple_loglik2(beta: np.ndarray, rows: np.ndarray) -> tuple[float, bool]:
    """Summed log density over rows, with a finiteness flag."""
    values = simple_logpdf2(beta, rows)
    total = float(values.sum())
    return total, bool(np.isfinite(total))
