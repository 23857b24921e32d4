"""Radial weights: moments, tails and numerical class profiling.

All moment and tail values are handled as natural logarithms; exponential
type weights produce moments far below the double range long before the
exponents become interesting.
"""

from __future__ import annotations

import csv
import hashlib
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsl import parse_expr
from .quadrature import QuadratureError, log_sinh_batch

DEFAULT_TOL = 1e-13
_CHUNK = 256


@dataclass(frozen=True)
class RadialWeight:
    """An immutable parsed weight.  Build one with :func:`parse_weight`."""

    expression: object
    label: str

    @property
    def weight_id(self) -> str:
        return hashlib.sha256(self.label.encode()).hexdigest()[:16]

    @property
    def closed_form_moment(self) -> bool:
        return self.expression.log_moment(1.0) is not None

    @property
    def closed_form_tail(self) -> bool:
        return self.expression.log_tail(0.0) is not None

    @property
    def support_hint(self):
        """``(exponent at r = 1, essential decay flag)``."""
        return self.expression.endpoint

    def log_evaluate(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return self.expression.log_eval(r, np.log1p(-r))

    def evaluate(self, r):
        """``w(r)`` for ``0 <= r < 1``."""
        out = np.exp(self.log_evaluate(r))
        return float(out) if np.ndim(out) == 0 else out

    def __str__(self):
        return self.label


def parse_weight(text: str) -> RadialWeight:
    expr = parse_expr(text)
    return RadialWeight(expr, expr.label())


def scale(w: RadialWeight, factor: float) -> RadialWeight:
    return parse_weight(f"scale({w.label},{float(factor)!r})")


ROSTER = ("one", "pow(0.5)", "pow(1)", "pow(2)", "pow2(1)", "exp(1,1)", "loginv(2)")


# --------------------------------------------------------------------------
# moment cache
# --------------------------------------------------------------------------

@dataclass
class MomentTable:
    """Cache of ``log w_x`` keyed by exponent.

    Single writer, many readers: lookups are lock-free, insertions take the
    lock and never overwrite an existing entry, so concurrent sweeps cannot
    leave two disagreeing values for one exponent.
    """

    weight_id: str
    tol: float = DEFAULT_TOL
    max_level: int = 7
    entries: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def get(self, x: float):
        return self.entries.get(float(x))

    def insert(self, xs, log_values, errs):
        with self._lock:
            for x, v, e in zip(xs, log_values, errs):
                self.entries.setdefault(float(x), (float(v), float(e)))

    def __len__(self):
        return len(self.entries)

    def rows(self):
        for x in sorted(self.entries):
            v, e = self.entries[x]
            yield self.weight_id, x, v, e


def _f17(v: float) -> str:
    return f"{v:.16e}"


CACHE_HEADER = ("weight_id", "x", "log_value", "abs_log_err")


def save_cache(tables, path) -> None:
    """Write one or more tables to the moment-cache CSV (atomically)."""
    from .io import atomic_write_text

    if isinstance(tables, MomentTable):
        tables = [tables]
    lines = [",".join(CACHE_HEADER)]
    for table in tables:
        for wid, x, v, e in table.rows():
            lines.append(f"{wid},{_f17(x)},{_f17(v)},{_f17(e)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_cache(path, tol: float = DEFAULT_TOL) -> dict:
    """Read a moment-cache CSV into ``{weight_id: MomentTable}``."""
    tables: dict = {}
    path = Path(path)
    if not path.exists():
        return tables
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CACHE_HEADER:
            raise ValueError(f"{path}: not a moment cache (header {reader.fieldnames})")
        for row in reader:
            t = tables.setdefault(row["weight_id"], MomentTable(row["weight_id"], tol=tol))
            t.entries[float(row["x"])] = (float(row["log_value"]), float(row["abs_log_err"]))
    return tables


# --------------------------------------------------------------------------
# quadrature integrands
# --------------------------------------------------------------------------

def _log_u_over_expm1(u):
    # log(u / (e^u - 1)), stable for tiny and huge u
    small = np.minimum(u, 700.0)
    return np.where(u < 700.0,
                    -np.log(np.where(u > 0, np.expm1(small) / np.where(u > 0, small, 1.0), 1.0)),
                    np.log(u) - u - np.log1p(-np.exp(-u)))


def _moment_logf(expr):
    # r = exp(-u), u = exp(y):  w_x = int exp(-x u) [w(r)(1-r)] u e^{-u} / (1-r) dy
    def logf(y, x):
        u = np.exp(y)
        r = np.exp(-u)
        log_s = np.where(u > 1e-300, np.log(-np.expm1(-np.maximum(u, 1e-300))), y)
        return -x * u + expr.log_eval_s(r, log_s) + _log_u_over_expm1(u)
    return logf


def _moment_by_parts_logf(expr):
    # w_x = x int_0^1 r^(x-1) tail(r) dr for x > 0, with r = exp(-u), u = exp(y).
    # Used when the tail is closed-form: the direct integrand of log-type
    # weights decays only algebraically in y, this one exponentially.
    def logf(y, x):
        u = np.exp(y)
        log_s = np.where(u > 1e-300, np.log(-np.expm1(-np.maximum(u, 1e-300))), y)
        log_x = np.log(x)
        # x u via logs: for subnormal x the peak lies where u overflows
        return log_x - np.exp(log_x + y) + expr.log_tail(log_s) + y
    return logf


def _tail_logf(expr):
    # v = s0 exp(-u), u = exp(y):  tail = int [w(1 - v) v] u dy
    def logf(y, log_s0):
        u = np.exp(y)
        log_v = log_s0 - u
        s0 = np.exp(log_s0)
        r = -np.expm1(log_s0) + s0 * -np.expm1(-u)
        return expr.log_eval_s(r, log_v) + y
    return logf


def _batched(logf, params, tol, max_level):
    vals = np.empty(len(params))
    errs = np.empty(len(params))
    for i in range(0, len(params), _CHUNK):
        res = log_sinh_batch(logf, params[i:i + _CHUNK], tol=tol, max_level=max_level)
        vals[i:i + _CHUNK] = res.log_value
        errs[i:i + _CHUNK] = res.log_err
    # a converged rule still carries the rounding of the log-sum
    return vals, np.maximum(errs, _closed_err(vals))


def _closed_err(v):
    return 4 * np.finfo(float).eps * (np.abs(v) + 1.0)


# --------------------------------------------------------------------------
# moments and tails
# --------------------------------------------------------------------------

def _quad_moments(w: RadialWeight, xs, tol, max_level):
    expr = w.expression
    if w.closed_form_moment or not w.closed_form_tail:
        return _batched(_moment_logf(expr), xs, tol, max_level)
    vals = np.empty(xs.size)
    errs = np.empty(xs.size)
    zero = xs == 0
    if np.any(zero):
        # w_0 is the whole mass, tail(0)
        v = float(expr.log_tail(0.0))
        vals[zero], errs[zero] = v, _closed_err(v)
    if np.any(~zero):
        pos = xs[~zero]
        vals[~zero], errs[~zero] = _batched(_moment_by_parts_logf(expr), pos, tol, max_level)
        # log x and y cancel near the peak y = log(1/x)
        errs[~zero] = np.maximum(errs[~zero], _closed_err(np.abs(np.log(pos))))
    return vals, errs


def log_moments(w: RadialWeight, xs, table: MomentTable | None = None,
                method: str = "auto"):
    """``(log w_x, abs_log_err)`` for every ``x`` in ``xs``.

    ``method`` is ``"auto"`` (closed form when the weight has one, otherwise
    quadrature), ``"closed"`` or ``"quad"``.  Quadrature integrates the
    density directly, or by parts against the tail when only the tail is
    known in closed form.  Only ``"auto"`` reads and
    writes ``table``.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise ValueError("moment exponents must be finite and >= 0")
    tol = table.tol if table is not None else DEFAULT_TOL
    max_level = table.max_level if table is not None else 7
    if method == "closed" or (method == "auto" and w.closed_form_moment):
        v = w.expression.log_moment(xs)
        if v is None:
            raise ValueError(f"{w.label} has no closed-form moments")
        v = np.asarray(v, dtype=float)
        if method == "auto" and table is not None:
            table.insert(xs, v, _closed_err(v))
        return v, _closed_err(v)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if method == "quad" or table is None:
        return _quad_moments(w, xs, tol, max_level)
    missing = np.unique([x for x in xs if table.get(x) is None])
    if missing.size:
        v, e = _quad_moments(w, missing, tol, max_level)
        table.insert(missing, v, e)
    got = [table.get(x) for x in xs]
    return np.array([g[0] for g in got]), np.array([g[1] for g in got])


def moment(w: RadialWeight, x: float, table: MomentTable | None = None) -> float:
    """``log w_x``, the natural log of ``int_0^1 r^x w(r) dr``."""
    return float(log_moments(w, [x], table)[0][0])


def log_tails(w: RadialWeight, s, method: str = "auto", tol: float = DEFAULT_TOL):
    """``(log tail(1 - s), abs_log_err)`` for distances ``s = 1 - r`` in ``(0, 1]``.

    Taking ``s`` rather than ``r`` lets callers reach ``1 - r = 2**-60``
    without rounding ``r`` to one.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 0) or np.any(s > 1):
        raise ValueError("tail needs 0 <= r < 1")
    log_s = np.log(s)
    if method == "closed" or (method == "auto" and w.closed_form_tail):
        v = w.expression.log_tail(log_s)
        if v is None:
            raise ValueError(f"{w.label} has no closed-form tail")
        return np.asarray(v, dtype=float), _closed_err(v)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    return _batched(_tail_logf(w.expression), log_s, tol, 7)


def tail(w: RadialWeight, r: float, method: str = "auto") -> float:
    """``int_r^1 w(s) ds``."""
    if not 0 <= r < 1:
        raise ValueError("tail needs 0 <= r < 1")
    return float(np.exp(log_tails(w, [1.0 - r], method)[0][0]))


# --------------------------------------------------------------------------
# class profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """A diagnostic curve: ``log_ratios[i]`` belongs to ``grid[i]``."""

    name: str
    grid: np.ndarray
    log_ratios: np.ndarray
    max_err: float

    @property
    def ratios(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_ratios)

    def to_dict(self):
        return {"name": self.name, "grid": [float(g) for g in self.grid],
                "log_ratios": [float(v) for v in self.log_ratios],
                "max_log_err": float(self.max_err)}


def dhat_profile(w: RadialWeight, j_max: int = 24, table: MomentTable | None = None) -> Profile:
    """``q_j = w_{2^j} / w_{2^{j+1}}`` for ``j = 0..j_max``."""
    if j_max < 4:
        raise ValueError("j_max must be >= 4")
    xs = 2.0 ** np.arange(j_max + 2)
    lv, err = log_moments(w, xs, table)
    return Profile("dhat", np.arange(j_max + 1, dtype=float), lv[:-1] - lv[1:],
                   float(np.max(err[:-1] + err[1:])))


def m_profile(w: RadialWeight, K: float = 4.0, x_grid=None,
              table: MomentTable | None = None) -> Profile:
    """``w_x / w_{Kx}`` over ``x_grid`` (default ``2^0 .. 2^40``)."""
    if not K > 1:
        raise ValueError("K must exceed 1")
    x_grid = 2.0 ** np.arange(41) if x_grid is None else np.asarray(x_grid, dtype=float)
    if np.any(x_grid < 1):
        raise ValueError("x_grid must lie in [1, inf)")
    a, ea = log_moments(w, x_grid, table)
    b, eb = log_moments(w, K * x_grid, table)
    return Profile("m", x_grid, a - b, float(np.max(ea + eb)))


def dcheck_profile(w: RadialWeight, K: float = 4.0, r_grid=None) -> Profile:
    """``tail(r) / tail(1 - (1 - r)/K)`` over ``r_grid`` (default ``1 - 2^-i``)."""
    if not K > 1:
        raise ValueError("K must exceed 1")
    if r_grid is None:
        s = 2.0 ** -np.arange(1, 41)
    else:
        r_grid = np.asarray(r_grid, dtype=float)
        if np.any(r_grid < 0) or np.any(r_grid >= 1):
            raise ValueError("r_grid must lie in [0, 1)")
        s = 1.0 - r_grid
    a, ea = log_tails(w, s)
    b, eb = log_tails(w, s / K)
    return Profile("dcheck", 1.0 - s, a - b, float(np.max(ea + eb)))


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassifyConfig:
    j_max: int = 24
    K_m: float = 4.0
    m_exponents: tuple = tuple(range(41))
    K_dcheck: float = 4.0
    dcheck_exponents: tuple = tuple(range(1, 41))
    window: int = 8
    tol_plateau: float = 0.10
    slope_threshold: float = 0.02
    tol_away: float = 0.01
    q_bound: float = 1e6

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class Verdict:
    verdict: str  # "yes" | "no" | "inconclusive"
    reason: str
    profile: Profile | None = None

    def to_dict(self):
        out = {"verdict": self.verdict, "reason": self.reason}
        if self.profile is not None:
            out["curve"] = self.profile.to_dict()
        return out


@dataclass(frozen=True)
class ClassReport:
    weight: str
    in_dhat: Verdict
    in_m: Verdict
    in_dcheck: Verdict
    in_d: Verdict
    parameters_used: dict

    def to_dict(self):
        return {"weight": self.weight, "in_dhat": self.in_dhat.to_dict(),
                "in_m": self.in_m.to_dict(), "in_dcheck": self.in_dcheck.to_dict(),
                "in_d": self.in_d.to_dict(), "parameters_used": self.parameters_used}


def _fmt_exp(log_v: float) -> str:
    """Format ``exp(log_v)`` without overflowing."""
    return f"{math.exp(log_v):.6g}" if log_v < 700 else f"exp({log_v:.6g})"


def _slope(v):
    return float(np.polyfit(np.arange(len(v), dtype=float), v, 1)[0])


def _dhat_verdict(p: Profile, cfg: ClassifyConfig) -> Verdict:
    lq = p.log_ratios[-cfg.window:]
    spread = float(lq.max() - lq.min())
    if spread <= math.log1p(cfg.tol_plateau) and lq.max() <= math.log(cfg.q_bound):
        return Verdict("yes", f"q_j plateaus near {_fmt_exp(lq[-1])} "
                              f"(window spread {math.expm1(spread):.3g})", p)
    s = _slope(lq)
    if s > cfg.slope_threshold:
        return Verdict("no", f"log q_j grows by {s:.3g} per doubling", p)
    return Verdict("inconclusive", f"no plateau, slope {s:.3g}", p)


def _away_verdict(p: Profile, cfg: ClassifyConfig) -> Verdict:
    """Ratios must stay bounded away from one; a slow decay towards one fails."""
    e = p.log_ratios[-cfg.window:]
    e_min, e_max = float(e.min()), float(e.max())
    if e_min < math.log1p(cfg.tol_away):
        return Verdict("no", f"ratios reach {_fmt_exp(e_min)}, not away from 1", p)
    flat = e_max / e_min <= 1.0 + cfg.tol_plateau
    s = _slope(np.log(e))
    if flat or s >= 0:
        return Verdict("yes", f"ratios stay >= {_fmt_exp(e_min)} "
                              f"({'flat' if flat else 'growing'})", p)
    return Verdict("no", f"log-ratios decay towards 0 (slope of log {s:.3g} per step)", p)


def classify(w: RadialWeight, config: ClassifyConfig | None = None,
             table: MomentTable | None = None) -> ClassReport:
    cfg = config or ClassifyConfig()
    dh = _dhat_verdict(dhat_profile(w, cfg.j_max, table), cfg)
    m = _away_verdict(m_profile(w, cfg.K_m, 2.0 ** np.array(cfg.m_exponents, dtype=float),
                                table), cfg)
    dc = _away_verdict(dcheck_profile(w, cfg.K_dcheck,
                                      1.0 - 2.0 ** -np.array(cfg.dcheck_exponents, dtype=float)),
                       cfg)
    votes = (dh.verdict, m.verdict, dc.verdict)
    if "no" in votes and not (dh.verdict == "yes" and m.verdict == "yes"):
        d = Verdict("no", "fails " + ", ".join(n for n, v in zip(("dhat", "M", "dcheck"), votes)
                                               if v == "no"))
    elif dh.verdict == "yes" and m.verdict == "yes" and dc.verdict != "no":
        d = Verdict("yes", "dhat and M both hold")
    else:
        d = Verdict("inconclusive", f"dhat={dh.verdict}, M={m.verdict}, dcheck={dc.verdict}")
    return ClassReport(w.label, dh, m, dc, d, cfg.to_dict())


# --------------------------------------------------------------------------
# consequences of upper doubling, used as checks
# --------------------------------------------------------------------------

def moment_tail_band(w: RadialWeight, xs, table: MomentTable | None = None):
    """``w_x / tail(1 - 1/x)`` for ``x >= 1``; bounded above and below on the upper doubling class."""
    xs = np.asarray(xs, dtype=float)
    lm, _ = log_moments(w, xs, table)
    lt, _ = log_tails(w, 1.0 / xs)
    return np.exp(lm - lt)


def power_domination_sup(w: RadialWeight, xs, alpha: float,
                         table: MomentTable | None = None) -> float:
    """``sup_{x <= y} (w_x x^alpha) / (w_y y^alpha)`` over the grid."""
    xs = np.sort(np.asarray(xs, dtype=float))
    lm, _ = log_moments(w, xs, table)
    g = lm + alpha * np.log(xs)
    # pairs x <= y: running max of g from the left minus g
    return float(np.exp(np.max(np.maximum.accumulate(g) - g)))


__all__ = [
    "RadialWeight", "MomentTable", "ClassReport", "ClassifyConfig", "Profile", "Verdict",
    "QuadratureError", "parse_weight", "scale", "log_moments", "moment", "log_tails", "tail",
    "dhat_profile", "m_profile", "dcheck_profile", "classify", "save_cache", "load_cache",
    "moment_tail_band", "power_domination_sup", "ROSTER",
]
