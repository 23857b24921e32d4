"""Hilbert spaces of analytic functions described by coefficient weights.

A space is fixed by a positive sequence ``w_n`` with
``||f||^2 = sum_n w_n |f_n|^2``:

* ``H_gamma`` (``gamma > 0``): ``w_n = (n + 1)**(1 - gamma)``; ``gamma = 1`` is H^2.
* ``A^2_mu``: ``w_n = 2 mu_{2n+1}``, from the odd moments of a radial weight.
* the Dirichlet space (``w_n = n + 1``) exists only for the divergence demo and
  is rejected as an operator domain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .specfun import log_beta
from .weights import MomentTable, RadialWeight, log_moments, parse_weight


@dataclass(frozen=True)
class SpaceSpec:
    kind: str  # "hgamma" | "bergman" | "dirichlet"
    gamma: float | None = None
    mu: RadialWeight | None = None
    table: MomentTable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "hgamma":
            if self.gamma is None or not self.gamma > 0:
                raise ValueError(f"H_gamma needs gamma > 0, got {self.gamma}")
        elif self.kind == "bergman":
            if self.mu is None:
                raise ValueError("Bergman space needs a weight")
            if self.table is None:
                object.__setattr__(self, "table", MomentTable(self.mu.weight_id))
        elif self.kind != "dirichlet":
            raise ValueError(f"unknown space kind {self.kind!r}")

    @classmethod
    def hgamma(cls, gamma: float) -> "SpaceSpec":
        return cls("hgamma", gamma=float(gamma))

    @classmethod
    def bergman(cls, mu, table: MomentTable | None = None) -> "SpaceSpec":
        if isinstance(mu, str):
            mu = parse_weight(mu)
        return cls("bergman", mu=mu, table=table)

    @classmethod
    def dirichlet(cls) -> "SpaceSpec":
        return cls("dirichlet")

    @property
    def admissible(self) -> bool:
        """Whether the space may serve as an operator domain."""
        return self.kind != "dirichlet"

    @property
    def label(self) -> str:
        if self.kind == "hgamma":
            return f"hgamma:{self.gamma!r}"
        if self.kind == "bergman":
            return f"bergman:{self.mu.label}"
        return "dirichlet"

    def log_coeff_weights(self, n) -> np.ndarray:
        n = np.atleast_1d(np.asarray(n, dtype=float))
        if np.any(n < 0):
            raise ValueError("coefficient index must be >= 0")
        if self.kind == "hgamma":
            return (1.0 - self.gamma) * np.log1p(n)
        if self.kind == "dirichlet":
            return np.log1p(n)
        lv, _ = log_moments(self.mu, 2.0 * n + 1.0, self.table)
        return math.log(2.0) + lv

    def __str__(self):
        return self.label


def parse_space(text: str, table: MomentTable | None = None) -> SpaceSpec:
    """``"hgamma:<gamma>"``, ``"bergman:<weight>"`` or ``"dirichlet"``."""
    kind, _, arg = text.strip().partition(":")
    if kind == "hgamma":
        try:
            return SpaceSpec.hgamma(float(arg))
        except ValueError as exc:
            raise ValueError(f"bad space {text!r}: {exc}") from None
    if kind == "bergman":
        return SpaceSpec.bergman(parse_weight(arg), table)
    if kind == "dirichlet" and not arg:
        return SpaceSpec.dirichlet()
    raise ValueError(f"bad space {text!r}; expected hgamma:<g>, bergman:<weight> or dirichlet")


def coeff_weight(space: SpaceSpec, n: int) -> float:
    return float(np.exp(space.log_coeff_weights([n])[0]))


# --------------------------------------------------------------------------
# coefficient series
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """Taylor coefficients ``f_0 .. f_degree`` of a polynomial."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty vector")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def padded(self, degree: int) -> "CoefficientSeries":
        if degree < self.degree:
            return CoefficientSeries(self.coeffs[:degree + 1])
        return CoefficientSeries(np.concatenate([self.coeffs, np.zeros(degree - self.degree)]))

    def evaluate(self, z):
        """Horner evaluation at one or many points."""
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return complex(acc) if acc.ndim == 0 else acc

    def __add__(self, other):
        d = max(self.degree, other.degree)
        return CoefficientSeries(self.padded(d).coeffs + other.padded(d).coeffs)

    def __mul__(self, scalar):
        return CoefficientSeries(self.coeffs * scalar)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, CoefficientSeries) and np.array_equal(self.coeffs, other.coeffs)

    def to_json(self) -> str:
        return json.dumps([[float(c.real), float(c.imag)] for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str) -> "CoefficientSeries":
        data = json.loads(text)
        if not isinstance(data, list) or not all(
                isinstance(p, list) and len(p) == 2 for p in data):
            raise ValueError("coefficient JSON must be an array of [re, im] pairs")
        return cls(np.array([complex(re, im) for re, im in data]))


def norm(space: SpaceSpec, f: CoefficientSeries) -> float:
    """``sqrt(sum_n w_n |f_n|^2)``."""
    lw = space.log_coeff_weights(np.arange(f.coeffs.size))
    a = np.abs(f.coeffs)
    if not np.any(a):
        return 0.0
    with np.errstate(divide="ignore"):
        terms = lw + 2.0 * np.log(a)
    return float(np.exp(0.5 * logsumexp(terms)))


def exact_hgamma_norm(f: CoefficientSeries, gamma: float) -> float:
    """Norm from ``|f(0)|^2 + int |f'|^2 (1 - |z|)^gamma dA``, via Beta values."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    a2 = np.abs(f.coeffs) ** 2
    total = a2[0]
    if f.degree >= 1:
        n = np.arange(1, f.degree + 1, dtype=float)
        total += np.sum(n**2 * a2[1:] * 2.0 * np.exp(log_beta(2.0 * n, gamma + 1.0)))
    return float(math.sqrt(total))


def hgamma_kernel_coeffs(gamma: float, N: int) -> np.ndarray:
    """Taylor coefficients ``gamma(n)`` of ``(1 - x)**-gamma`` for ``n = 0..N``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    n = np.arange(N, dtype=float)
    return np.concatenate([[1.0], np.cumprod((n + gamma) / (n + 1.0))])
