"""The generalized Cesaro operator on Taylor coefficients.

Coefficient form::

    g_n = w_n * sum_{k<=n} f_k / (2 (n-k+1) w_{2(n-k)+1})

Integral form (used as an independent oracle)::

    C f(z) = int_0^1 f(t z) K_t(z) w(t) dt
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .io import atomic_write_text
from .kernels import KernelTruncationError, averaged_log_coeffs, tail_bound
from .quadrature import tanh_sinh
from .spaces import CoefficientSeries, SpaceSpec
from .weights import MomentTable, RadialWeight, log_moments

_FLUSH = -700.0
_OVERFLOW = 709.0
_ROWS = 256


class SectionOverflowError(ArithmeticError):
    def __init__(self, n: int, k: int, log_value: float):
        super().__init__(f"matrix entry ({n}, {k}) overflows: log-magnitude {log_value:.6g}")
        self.n, self.k, self.log_value = n, k, log_value


def _table(w, table):
    return table if table is not None else MomentTable(w.weight_id)


def log_factors(w: RadialWeight, N: int, table: MomentTable | None = None):
    """``(log w_n, log a_j)`` for ``n, j < N`` with ``a_j = 1/(2 (j+1) w_{2j+1})``."""
    table = _table(w, table)
    idx = np.arange(N, dtype=float)
    lw, _ = log_moments(w, idx, table)
    lodd, _ = log_moments(w, 2.0 * idx + 1.0, table)
    return lw, -np.log(2.0 * (idx + 1.0)) - lodd


def apply(w: RadialWeight, f: CoefficientSeries, table: MomentTable | None = None) -> CoefficientSeries:
    """``C_w f`` truncated at the degree of ``f``; direct O(N^2) sum."""
    N = f.coeffs.size
    lw, la = log_factors(w, N, table)
    g = np.zeros(N, dtype=complex)
    k = np.arange(N)
    for start in range(0, N, _ROWS):
        n = np.arange(start, min(start + _ROWS, N))
        diff = n[:, None] - k[None, :]
        low = diff >= 0
        logs = np.where(low, lw[n][:, None] + la[np.where(low, diff, 0)], -np.inf)
        g[n] = np.exp(logs) @ f.coeffs
    return CoefficientSeries(g)


def apply_integral(w: RadialWeight, f: CoefficientSeries, z: complex, tol: float = 1e-12,
                   table: MomentTable | None = None) -> complex:
    """Evaluate ``C_w f`` at ``z`` from the integral representation."""
    if abs(z) >= 1:
        raise ValueError("z must lie in the unit disc")
    table = _table(w, table)
    # one truncation good for every t in [0, 1): |t z| <= |z|
    n = 32
    while True:
        lb = averaged_log_coeffs(w, n, table)
        if tail_bound(lb, abs(z)) <= 1e-3 * tol * math.exp(lb[0]):
            break
        if n >= 2**15:
            raise KernelTruncationError(f"averaged kernel tail too large at N={n}")
        n *= 2
    b = np.exp(lb)

    def integrand(t, tc):
        u = t * z
        kern = np.zeros_like(u, dtype=complex)
        for c in b[::-1]:
            kern = kern * u + c
        with np.errstate(divide="ignore"):
            wt = np.exp(w.expression.log_eval(t, np.log(tc)))
        return f.evaluate(u) * kern * wt

    val, _ = tanh_sinh(integrand, tol=tol)
    return complex(val)


# --------------------------------------------------------------------------
# matrix sections
# --------------------------------------------------------------------------

@dataclass
class OperatorSection:
    """Leading ``N x N`` block of ``C_w`` in the orthonormal basis ``z^n / sqrt(w_n)``."""

    weight: str
    weight_id: str
    space: str
    N: int
    entries: np.ndarray
    flushed: int = 0
    sigma_max: float | None = None

    def metadata(self) -> dict:
        return {"weight": self.weight, "weight_id": self.weight_id, "space": self.space,
                "N": self.N, "flushed": self.flushed, "sigma_max": self.sigma_max}

    def leading(self, n: int) -> "OperatorSection":
        if not 1 <= n <= self.N:
            raise ValueError("block size out of range")
        block = np.ascontiguousarray(self.entries[:n, :n])
        return OperatorSection(self.weight, self.weight_id, self.space, n, block,
                               int(np.count_nonzero((block == 0) & np.tri(n, dtype=bool)))
                               if self.flushed else 0)

    def dump(self, path) -> None:
        """CSV ``n,k,value`` of the lower triangle under a ``# {json}`` header line."""
        n, k = np.tril_indices(self.N)
        lines = ["# " + json.dumps(self.metadata(), sort_keys=True), "n,k,value"]
        lines += [f"{a},{b},{v:.16e}" for a, b, v in zip(n, k, self.entries[n, k])]
        atomic_write_text(path, "\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "OperatorSection":
        with open(path) as fh:
            meta = json.loads(fh.readline()[2:])
            fh.readline()
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        N = meta["N"]
        entries = np.zeros((N, N))
        entries[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2]
        return cls(meta["weight"], meta["weight_id"], meta["space"], N, entries,
                   meta["flushed"], meta["sigma_max"])


def matrix_section(w: RadialWeight, space: SpaceSpec, N: int,
                   table: MomentTable | None = None) -> OperatorSection:
    """Assemble ``M[n, k] = w_n a_{n-k} sqrt(w_n / w_k)`` (space weights) for ``k <= n < N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not space.admissible:
        raise ValueError(f"{space.label} is not an admissible operator domain")
    lw, la = log_factors(w, N, table)
    half = 0.5 * space.log_coeff_weights(np.arange(N))
    row = lw + half
    M = np.zeros((N, N))
    flushed = 0
    k = np.arange(N)
    for start in range(0, N, _ROWS):
        n = np.arange(start, min(start + _ROWS, N))
        diff = n[:, None] - k[None, :]
        low = diff >= 0
        logs = np.where(low, row[n][:, None] + la[np.where(low, diff, 0)] - half[None, :],
                        -np.inf)
        top = np.max(logs)
        if top > _OVERFLOW:
            i, j = np.unravel_index(np.argmax(logs), logs.shape)
            raise SectionOverflowError(int(n[i]), int(j), float(top))
        tiny = low & (logs < _FLUSH)
        flushed += int(np.count_nonzero(tiny))
        M[n] = np.where(tiny, 0.0, np.exp(logs))
    return OperatorSection(w.label, w.weight_id, space.label, N, M, flushed)
