"""Bergman reproducing kernels as truncated power series.

``B_z(zeta) = sum_n (conj(z) zeta)^n / (2 w_{2n+1})`` and the averaged kernel
``K_t(z) = (1/z) int_0^z B_t(u) du = sum_n (t z)^n / (2 (n+1) w_{2n+1})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weights import MomentTable, RadialWeight, log_moments

N_CAP = 2**15


class KernelTruncationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class KernelSeries:
    weight_id: str
    log_coeffs: np.ndarray  # log c_n, n = 0..N

    @property
    def N(self) -> int:
        return self.log_coeffs.size - 1

    @property
    def coeffs(self) -> np.ndarray:
        return np.exp(self.log_coeffs)


@dataclass(frozen=True)
class KernelValue:
    value: complex
    tail_bound: float
    N: int


def kernel_coeffs(w: RadialWeight, N: int, table: MomentTable | None = None,
                  method: str = "auto") -> KernelSeries:
    """``c_n = 1 / (2 w_{2n+1})`` for ``n = 0..N``; ``method`` as in ``log_moments``."""
    if N < 0:
        raise ValueError("N must be >= 0")
    lv, _ = log_moments(w, 2.0 * np.arange(N + 1) + 1.0, table, method=method)
    return KernelSeries(w.weight_id, -math.log(2.0) - lv)


def tail_bound(log_c: np.ndarray, q: float) -> float:
    """Bound ``sum_{n > N} c_n q^n`` from a power fit ``c_n <= A (n+1)^p``.

    The fit uses the upper half of the computed coefficients only, and is
    trusted beyond them; callers report the bound rather than rely on it.
    """
    N = log_c.size - 1
    if q == 0:
        return 0.0
    if N < 2:
        return math.inf
    lo = N // 2
    n = np.arange(lo, N + 1, dtype=float)
    ln1 = np.log1p(n)
    p = 0.0
    if N > lo:
        p = max(0.0, float(np.max((log_c[lo + 1:] - log_c[lo]) / (ln1[1:] - ln1[0]))))
    logA = float(np.max(log_c[lo:] - p * ln1))
    rho = q * ((N + 3.0) / (N + 2.0)) ** p
    if rho >= 1:
        return math.inf
    return math.exp(logA + p * math.log(N + 2.0) + (N + 1) * math.log(q)) / (1.0 - rho)


def _series(log_c, q: complex) -> complex:
    if q == 0:
        return complex(math.exp(log_c[0]))
    n = np.arange(log_c.size)
    terms = np.exp(log_c + n * np.log(complex(q)))
    return complex(np.sum(terms[::-1]))


def _adaptive(log_coeffs_for, q: complex, N, tol: float, n_cap: int) -> KernelValue:
    aq = abs(q)
    if N is not None:
        lc = log_coeffs_for(N)
        return KernelValue(_series(lc, q), tail_bound(lc, aq), N)
    n = 32
    while True:
        lc = log_coeffs_for(n)
        tb = tail_bound(lc, aq)
        if tb <= tol:
            return KernelValue(_series(lc, q), tb, n)
        if n >= n_cap:
            raise KernelTruncationError(
                f"kernel tail bound {tb:.3g} above {tol:.3g} at N={n}")
        n = min(2 * n, n_cap)


def kernel_eval(w: RadialWeight, z: complex, zeta: complex, N: int | None = None,
                tol: float = 1e-13, table: MomentTable | None = None,
                n_cap: int = N_CAP) -> KernelValue:
    """``B_z(zeta)`` with a reported truncation bound.

    With ``N=None`` the degree doubles from 32 until the bound drops below
    ``tol`` or ``n_cap`` is reached.
    """
    if abs(z) >= 1 or abs(zeta) >= 1:
        raise ValueError("kernel points must lie in the unit disc")
    table = table if table is not None else MomentTable(w.weight_id)
    return _adaptive(lambda n: kernel_coeffs(w, n, table).log_coeffs,
                     np.conj(z) * zeta, N, tol, n_cap)


def averaged_log_coeffs(w: RadialWeight, N: int, table: MomentTable | None = None) -> np.ndarray:
    """Log-coefficients of the averaged kernel, ``c_n / (n + 1)``."""
    return kernel_coeffs(w, N, table).log_coeffs - np.log1p(np.arange(N + 1.0))


def averaged_kernel_eval(w: RadialWeight, t: float, z: complex, N: int | None = None,
                         tol: float = 1e-13, table: MomentTable | None = None,
                         n_cap: int = N_CAP) -> complex:
    """``K_t(z)``; the removable singularity at ``z = 0`` is handled by the series."""
    if not 0 <= t < 1:
        raise ValueError("t must lie in [0, 1)")
    if abs(z) >= 1:
        raise ValueError("z must lie in the unit disc")
    table = table if table is not None else MomentTable(w.weight_id)
    return _adaptive(lambda n: averaged_log_coeffs(w, n, table), t * z, N, tol, n_cap).value
