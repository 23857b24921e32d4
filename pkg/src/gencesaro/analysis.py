"""Experiments: section-norm scans, the Dirichlet demo, probes and test families."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .cesaro import OperatorSection, apply, log_factors, matrix_section
from .spaces import CoefficientSeries, SpaceSpec, norm
from .weights import MomentTable, RadialWeight, log_moments


def _table(w, table):
    return table if table is not None else MomentTable(w.weight_id)


# --------------------------------------------------------------------------
# section norms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NormConfig:
    tol: float = 1e-8
    max_iter: int = 20000
    calm: int = 3  # consecutive small steps required


@dataclass(frozen=True)
class NormEstimate:
    sigma: float
    converged: bool
    iterations: int


def section_norm(S, cfg: NormConfig = NormConfig()) -> NormEstimate:
    """Largest singular value by power iteration on ``S^T S``.

    Starts from the normalised all-ones vector; converged once the relative
    change of the estimate stays below ``cfg.tol`` for ``cfg.calm`` steps.
    """
    A = S.entries if isinstance(S, OperatorSection) else np.asarray(S, dtype=float)
    n = A.shape[1]
    v = np.full(n, 1.0 / math.sqrt(n))
    sigma, calm = 0.0, 0
    for it in range(1, cfg.max_iter + 1):
        u = A @ v
        new = float(np.linalg.norm(u))
        if new == 0.0:
            return NormEstimate(0.0, True, it)
        x = A.T @ u
        v = x / np.linalg.norm(x)
        calm = calm + 1 if abs(new - sigma) <= cfg.tol * new else 0
        sigma = new
        if calm >= cfg.calm:
            return NormEstimate(sigma, True, it)
    return NormEstimate(sigma, False, cfg.max_iter)


# --------------------------------------------------------------------------
# boundedness scans
# --------------------------------------------------------------------------

DEFAULT_NS = (64, 128, 256, 512, 1024, 2048, 4096)


@dataclass(frozen=True)
class ScanConfig:
    norm: NormConfig = NormConfig()
    tol_plateau: float = 0.05
    slope_threshold: float = 0.02
    tail_window: int = 3
    threads: int = 1


@dataclass
class ScanReport:
    weight: str
    space: str
    Ns: list
    sigmas: list
    iters: list
    converged: list
    growth_fit: float
    tail_ratio: float
    verdict: str
    thresholds: dict
    flushed: int = 0
    errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def curve(self):
        return ("N", "sigma"), list(zip(self.Ns, self.sigmas))


def _scan_verdict(Ns, sigmas, cfg: ScanConfig):
    ok = [(n, s) for n, s in zip(Ns, sigmas) if s is not None and s > 0]
    if len(ok) < 2:
        return math.nan, math.nan, "inconclusive"
    ns = np.log2([n for n, _ in ok])
    ls = np.log([s for _, s in ok])
    tail = max(2, min(cfg.tail_window, len(ok)))
    slope = float(np.polyfit(ns[-tail:], ls[-tail:], 1)[0])
    # growth of sigma per doubling of N over the last step
    ratio = math.exp((ls[-1] - ls[-2]) / (ns[-1] - ns[-2]))
    if ratio <= 1.0 + cfg.tol_plateau:
        verdict = "bounded-looking"
    elif slope > cfg.slope_threshold:
        verdict = "unbounded-looking"
    else:
        verdict = "inconclusive"
    return slope, ratio, verdict


def boundedness_scan(w: RadialWeight, space: SpaceSpec, Ns=DEFAULT_NS,
                     cfg: ScanConfig = ScanConfig(), table: MomentTable | None = None,
                     dump_dir=None) -> ScanReport:
    """Section norms of ``C_w`` on ``space`` for increasing ``N``.

    The largest section is assembled once; smaller ones are its leading
    blocks. A failure at some ``N`` is recorded and the scan carries on with
    the sizes that can still be formed.
    """
    Ns = [int(n) for n in Ns]
    if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])) or Ns[0] < 1:
        raise ValueError("Ns must be a strictly increasing list of positive sizes")
    table = _table(w, table)
    errors = []
    big = None
    usable = list(Ns)
    while usable and big is None:
        try:
            big = matrix_section(w, space, usable[-1], table)
        except ArithmeticError as exc:
            errors.append({"N": usable[-1], "error": str(exc)})
            usable.pop()

    def run(n):
        sec = big.leading(n) if n != big.N else big
        est = section_norm(sec, cfg.norm)
        if dump_dir is not None:
            sec.sigma_max = est.sigma
            sec.dump(f"{dump_dir}/section_{n}.csv")
        return est

    if usable:
        if cfg.threads > 1:
            with ThreadPoolExecutor(cfg.threads) as pool:
                results = dict(zip(usable, pool.map(run, usable)))
        else:
            results = {n: run(n) for n in usable}
    else:
        results = {}

    sigmas = [results[n].sigma if n in results else None for n in Ns]
    iters = [results[n].iterations if n in results else None for n in Ns]
    conv = [results[n].converged if n in results else False for n in Ns]
    slope, ratio, verdict = _scan_verdict(Ns, sigmas, cfg)
    thresholds = {"tol_plateau": cfg.tol_plateau, "slope_threshold": cfg.slope_threshold,
                  "tail_window": cfg.tail_window, "norm_tol": cfg.norm.tol,
                  "max_iter": cfg.norm.max_iter}
    return ScanReport(w.label, space.label, Ns, sigmas, iters, conv, slope, ratio, verdict,
                      thresholds, big.flushed if big is not None else 0, errors)


# --------------------------------------------------------------------------
# test families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFamily:
    kind: str
    params: dict
    series: CoefficientSeries

    __test__ = False  # not a pytest class

    @classmethod
    def fN(cls, gamma: float, N: int) -> "TestFamily":
        n = np.arange(N + 1.0)
        return cls("fN", {"gamma": gamma, "N": N}, CoefficientSeries((n + 1.0) ** ((gamma - 1.0) / 2)))

    @classmethod
    def fNM(cls, N: int, M: int) -> "TestFamily":
        return cls("fNM", {"N": N, "M": M}, CoefficientSeries(np.ones(M * N + 1)))

    @classmethod
    def fa(cls, space: SpaceSpec, a: float, N: int) -> "TestFamily":
        """``sqrt(1 - a^2) a^n / sqrt(w_n)``: unit norm up to the tail ``a^(2(N+1))``."""
        if not 0 < a < 1:
            raise ValueError("a must lie in (0, 1)")
        n = np.arange(N + 1.0)
        logc = 0.5 * math.log1p(-a * a) + n * math.log(a) - 0.5 * space.log_coeff_weights(n)
        return cls("fa", {"a": a, "N": N, "space": space.label}, CoefficientSeries(np.exp(logc)))

    @classmethod
    def bergman_fN(cls, mu: RadialWeight, N: int, table: MomentTable | None = None) -> "TestFamily":
        lv, _ = log_moments(mu, 2.0 * np.arange(N + 1) + 1.0, table)
        return cls("bergman_fN", {"mu": mu.label, "N": N}, CoefficientSeries(np.exp(-0.5 * lv)))


def truncation_degree(a: float, tail: float = 1e-6) -> int:
    """Smallest ``N >= log(tail) / (2 log a)``; the dropped norm mass ``a^(2(N+1))`` is below ``tail``."""
    return max(1, math.ceil(math.log(tail) / (2.0 * math.log(a))))


# --------------------------------------------------------------------------
# Dirichlet divergence
# --------------------------------------------------------------------------

@dataclass
class DirichletCurve:
    weight: str
    N: np.ndarray
    S: np.ndarray
    L: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.S >= self.L * (1.0 - 1e-12)))

    def to_dict(self) -> dict:
        return {"weight": self.weight, "N_max": int(self.N[-1]), "S_final": float(self.S[-1]),
                "L_final": float(self.L[-1]), "holds": self.holds}

    def curve(self):
        return ("N", "S", "L"), list(zip(self.N.tolist(), self.S, self.L))


def dirichlet_divergence(w: RadialWeight, N_max: int,
                         table: MomentTable | None = None) -> DirichletCurve:
    """Partial sums of the Dirichlet norm of ``C_w 1`` against ``sum 1/(4(n+1))``."""
    if N_max < 16:
        raise ValueError("N_max must be >= 16")
    table = _table(w, table)
    lw, la = log_factors(w, N_max + 1, table)
    n = np.arange(N_max + 1.0)
    # (n+1) * (w_n a_n)^2 with a_n = 1/(2 (n+1) w_{2n+1})
    terms = np.exp(np.log1p(n) + 2.0 * (lw + la))
    return DirichletCurve(w.label, n.astype(int), np.cumsum(terms), np.cumsum(0.25 / (n + 1.0)))


# --------------------------------------------------------------------------
# compactness probe
# --------------------------------------------------------------------------

@dataclass
class ProbeReport:
    weight: str
    space: str
    a: list
    N: list
    norm_f: list
    norm_g: list
    ratio: list
    tail: float

    def to_dict(self) -> dict:
        return asdict(self)

    def curve(self):
        return ("a", "ratio"), list(zip(self.a, self.ratio))


def compactness_probe(w: RadialWeight, space: SpaceSpec, a_grid, tail: float = 1e-6,
                      table: MomentTable | None = None) -> ProbeReport:
    """``||C_w f_a|| / ||f_a||`` along ``a -> 1``, with ``f_a`` truncated at ``N(a)``."""
    if not space.admissible:
        raise ValueError(f"{space.label} is not an admissible operator domain")
    table = _table(w, table)
    rep = ProbeReport(w.label, space.label, [], [], [], [], [], tail)
    for a in a_grid:
        N = truncation_degree(a, tail)
        f = TestFamily.fa(space, a, N).series
        nf = norm(space, f)
        ng = norm(space, apply(w, f, table))
        rep.a.append(float(a))
        rep.N.append(N)
        rep.norm_f.append(nf)
        rep.norm_g.append(ng)
        rep.ratio.append(ng / nf)
    return rep


# --------------------------------------------------------------------------
# necessity functionals
# --------------------------------------------------------------------------

def double_sum(gamma: float, N: int, M: int) -> float:
    """``(1/sum_n (n+1)^(1-g)) sum_{k=N}^{MN} (1/(k+1)) sum_{n=k}^{MN} (n+1)^(1-g)``, n from 0."""
    top = M * N
    p = np.arange(1.0, top + 2.0) ** (1.0 - gamma)
    suffix = np.cumsum(p[::-1])[::-1]  # suffix[k] = sum_{n>=k}
    k = np.arange(N, top + 1)
    return float(np.sum(suffix[k] / (k + 1.0)) / suffix[0])


def bergman_double_sum(alpha: float, N: int, M: int) -> float:
    """Bergman analogue ``(1/(MN+1)) sum_k (1/(k+1)) sum_{n>=k} ((n-k+1)/(n+1))^(alpha/2)``."""
    top = M * N
    n = np.arange(top + 1.0)
    total = 0.0
    for k in range(N, top + 1):
        m = n[k:]
        total += float(np.sum(((m - k + 1.0) / (m + 1.0)) ** (alpha / 2.0))) / (k + 1.0)
    return total / (top + 1.0)


def family_ratio(w: RadialWeight, space: SpaceSpec, f: CoefficientSeries,
                 table: MomentTable | None = None) -> float:
    """``||C_w f||^2 / ||f||^2`` with ``C_w f`` truncated at the degree of ``f``."""
    return (norm(space, apply(w, f, table)) / norm(space, f)) ** 2


def necessity_functionals(w: RadialWeight, space: SpaceSpec, N: int, Ms=(4, 16, 64),
                          alpha: float = 2.0, table: MomentTable | None = None) -> dict:
    """Observables of the necessity argument for boundedness.

    Returns the moment ratio probe, the averaged double sum for each ``M``
    with its fit against ``log M``, and the family ratios for ``f_N`` and
    ``f_{N,M}``.
    """
    if N < 1 or any(m < 1 for m in Ms):
        raise ValueError("N and M must be >= 1")
    table = _table(w, table)
    if space.kind == "hgamma":
        x, y = 8 * N, 12 * N
    elif space.kind == "bergman":
        x, y = 5 * N, 6 * N
    else:
        raise ValueError(f"{space.label} is not an admissible operator domain")
    lv, _ = log_moments(w, [float(x), float(y)], table)
    if space.kind == "hgamma":
        fam = TestFamily.fN(space.gamma, N)
        sums = [double_sum(space.gamma, N, m) for m in Ms]
    else:
        fam = TestFamily.bergman_fN(space.mu, N, space.table)
        sums = [bergman_double_sum(alpha, N, m) for m in Ms]
    slope = float(np.polyfit(np.log(Ms), sums, 1)[0]) if len(Ms) >= 2 else math.nan
    return {
        "weight": w.label,
        "space": space.label,
        "N": N,
        "moment_ratio": {"x": x, "y": y, "value": float(np.exp(lv[0] - lv[1]))},
        "double_sum": {"M": list(Ms), "values": sums, "log_M_slope": slope},
        "family_ratio": {
            "fN": family_ratio(w, space, fam.series, table),
            "fNM": [family_ratio(w, space, TestFamily.fNM(N, m).series, table) for m in Ms],
        },
    }
