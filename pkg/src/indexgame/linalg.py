"""Symmetric tridiagonal solve used by the discrete schedule solvers and the oracle."""

import numpy as np

from .errors import IndefiniteSystemError


def solve_spd_tridiagonal(diag, off, rhs) -> np.ndarray:
    """Solve a symmetric tridiagonal system by LDL^T, refusing non-positive pivots."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = diag.size
    piv = np.empty(n)
    z = np.empty(n)
    piv[0], z[0] = diag[0], rhs[0]
    for i in range(1, n + 1):
        if piv[i - 1] <= 0.0:
            raise IndefiniteSystemError(f"stationarity system is not positive definite (pivot {i - 1} = {piv[i - 1]:.3e})",
                                        pivot=float(piv[i - 1]))
        if i == n:
            break
        m = off[i - 1] / piv[i - 1]
        piv[i] = diag[i] - m * off[i - 1]
        z[i] = rhs[i] - m * z[i - 1]
    out = np.empty(n)
    out[-1] = z[-1] / piv[-1]
    for i in range(n - 2, -1, -1):
        out[i] = (z[i] - off[i] * out[i + 1]) / piv[i]
    return out
