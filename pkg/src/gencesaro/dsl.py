"""Expression trees and parser for the radial-weight mini-language.

Grammar::

    expr := atom | "scale(" expr "," float ")" | "sum(" expr "," expr ")"
    atom := "one" | "pow(" float ")" | "pow2(" float ")"
          | "exp(" float "," float ")" | "loginv(" float ")"

Every node evaluates ``log w(r)`` from the pair ``(r, log(1 - r))``.  Passing
the logarithm of the distance to the boundary, rather than ``r`` alone, keeps
the densities exact arbitrarily close to ``r = 1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .specfun import log_beta


class WeightSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        pointer = " " * pos + "^"
        super().__init__(f"{message} at position {pos}\n  {text}\n  {pointer}")
        self.pos = pos


class WeightParameterError(ValueError):
    pass


def _fmt(v: float) -> str:
    return repr(float(v))


class _Node:
    def log_eval_s(self, r, log_s):
        """``log(w(r) * (1 - r))``; overridden where the sum would cancel."""
        return self.log_eval(r, log_s) + log_s


@dataclass(frozen=True)
class One(_Node):
    def log_eval(self, r, log_s):
        return np.zeros(np.broadcast(r, log_s).shape)

    def log_moment(self, x):
        return -np.log1p(x)

    def log_tail(self, log_s):
        return np.asarray(log_s, dtype=float)

    @property
    def endpoint(self):
        return 0.0, False

    def label(self):
        return "one"


@dataclass(frozen=True)
class Pow(_Node):
    """``(1 - r)**alpha``."""
    alpha: float

    def __post_init__(self):
        if not self.alpha > -1:
            raise WeightParameterError(f"pow(alpha) needs alpha > -1, got {self.alpha}")

    def log_eval(self, r, log_s):
        return self.alpha * np.asarray(log_s) + 0.0 * np.asarray(r)

    def log_moment(self, x):
        return log_beta(np.asarray(x, dtype=float) + 1.0, self.alpha + 1.0)

    def log_tail(self, log_s):
        return (self.alpha + 1.0) * np.asarray(log_s) - math.log(self.alpha + 1.0)

    @property
    def endpoint(self):
        return self.alpha, False

    def label(self):
        return f"pow({_fmt(self.alpha)})"


@dataclass(frozen=True)
class Pow2(_Node):
    """``(1 - r**2)**alpha``."""
    alpha: float

    def __post_init__(self):
        if not self.alpha > -1:
            raise WeightParameterError(f"pow2(alpha) needs alpha > -1, got {self.alpha}")

    def log_eval(self, r, log_s):
        return self.alpha * (np.asarray(log_s) + np.log1p(r))

    def log_moment(self, x):
        # substitute r^2 = s: half a Beta integral
        return log_beta(0.5 * (np.asarray(x, dtype=float) + 1.0), self.alpha + 1.0) - math.log(2.0)

    def log_tail(self, log_s):
        return None

    @property
    def endpoint(self):
        return self.alpha, False

    def label(self):
        return f"pow2({_fmt(self.alpha)})"


@dataclass(frozen=True)
class Exp(_Node):
    """``exp(-c / (1 - r)**beta)``."""
    c: float
    beta: float

    def __post_init__(self):
        if not (self.c > 0 and self.beta > 0):
            raise WeightParameterError(
                f"exp(c, beta) needs c > 0 and beta > 0, got ({self.c}, {self.beta})")

    def log_eval(self, r, log_s):
        return -self.c * np.exp(-self.beta * np.asarray(log_s)) + 0.0 * np.asarray(r)

    def log_moment(self, x):
        return None

    def log_tail(self, log_s):
        return None

    @property
    def endpoint(self):
        return math.inf, True

    def label(self):
        return f"exp({_fmt(self.c)},{_fmt(self.beta)})"


@dataclass(frozen=True)
class LogInv(_Node):
    """``(1 - r)**-1 * log(e / (1 - r))**-p``."""
    p: float

    def __post_init__(self):
        if not self.p > 1:
            raise WeightParameterError(f"loginv(p) needs p > 1, got {self.p}")

    def log_eval(self, r, log_s):
        log_s = np.asarray(log_s)
        return -log_s - self.p * np.log1p(-log_s) + 0.0 * np.asarray(r)

    def log_eval_s(self, r, log_s):
        return -self.p * np.log1p(-np.asarray(log_s)) + 0.0 * np.asarray(r)

    def log_moment(self, x):
        return None

    def log_tail(self, log_s):
        # d/ds log(e/(1-s)) = 1/(1-s), so the tail integrates in closed form
        return (1.0 - self.p) * np.log1p(-np.asarray(log_s)) - math.log(self.p - 1.0)

    @property
    def endpoint(self):
        return -1.0, False

    def label(self):
        return f"loginv({_fmt(self.p)})"


@dataclass(frozen=True)
class Scale(_Node):
    expr: object
    factor: float

    def __post_init__(self):
        if not self.factor > 0:
            raise WeightParameterError(f"scale factor must be positive, got {self.factor}")

    def log_eval(self, r, log_s):
        return self.expr.log_eval(r, log_s) + math.log(self.factor)

    def log_eval_s(self, r, log_s):
        return self.expr.log_eval_s(r, log_s) + math.log(self.factor)

    def log_moment(self, x):
        inner = self.expr.log_moment(x)
        return None if inner is None else inner + math.log(self.factor)

    def log_tail(self, log_s):
        inner = self.expr.log_tail(log_s)
        return None if inner is None else inner + math.log(self.factor)

    @property
    def endpoint(self):
        return self.expr.endpoint

    def label(self):
        return f"scale({self.expr.label()},{_fmt(self.factor)})"


@dataclass(frozen=True)
class Sum(_Node):
    left: object
    right: object

    def log_eval(self, r, log_s):
        return np.logaddexp(self.left.log_eval(r, log_s), self.right.log_eval(r, log_s))

    def log_eval_s(self, r, log_s):
        return np.logaddexp(self.left.log_eval_s(r, log_s), self.right.log_eval_s(r, log_s))

    def log_moment(self, x):
        a, b = self.left.log_moment(x), self.right.log_moment(x)
        return None if a is None or b is None else np.logaddexp(a, b)

    def log_tail(self, log_s):
        a, b = self.left.log_tail(log_s), self.right.log_tail(log_s)
        return None if a is None or b is None else np.logaddexp(a, b)

    @property
    def endpoint(self):
        (ea, da), (eb, db) = self.left.endpoint, self.right.endpoint
        # the heavier endpoint dominates
        return min(ea, eb), da and db

    def label(self):
        return f"sum({self.left.label()},{self.right.label()})"


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
                    r"|(?P<name>[a-z][a-z0-9]*)|(?P<punct>[(),]))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise WeightSyntaxError("unexpected character", text, pos)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("eof", "", len(self.text))

    def _take(self, kind, value=None):
        tok = self._peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = repr(value) if value is not None else "a number"
            got = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise WeightSyntaxError(f"expected {want}, found {got}", self.text, tok[2])
        self.i += 1
        return tok

    def _float(self):
        return float(self._take("num")[1])

    def parse(self):
        node = self._expr()
        tok = self._peek()
        if tok[0] != "eof":
            raise WeightSyntaxError(f"trailing input {tok[1]!r}", self.text, tok[2])
        return node

    def _expr(self):
        kind, name, pos = self._take("name")
        try:
            if name == "one":
                return One()
            if name in ("pow", "pow2", "loginv"):
                self._take("punct", "(")
                v = self._float()
                self._take("punct", ")")
                return {"pow": Pow, "pow2": Pow2, "loginv": LogInv}[name](v)
            if name == "exp":
                self._take("punct", "(")
                c = self._float()
                self._take("punct", ",")
                b = self._float()
                self._take("punct", ")")
                return Exp(c, b)
            if name == "scale":
                self._take("punct", "(")
                inner = self._expr()
                self._take("punct", ",")
                s = self._float()
                self._take("punct", ")")
                return Scale(inner, s)
            if name == "sum":
                self._take("punct", "(")
                a = self._expr()
                self._take("punct", ",")
                b = self._expr()
                self._take("punct", ")")
                return Sum(a, b)
        except WeightParameterError as exc:
            raise WeightParameterError(f"{exc} (at position {pos})") from None
        raise WeightSyntaxError(f"unknown weight {name!r}", self.text, pos)


def parse_expr(text: str):
    """Parse ``text`` into an expression tree."""
    return _Parser(text).parse()
