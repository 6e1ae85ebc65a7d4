"""Real functions of one variable: interval/function types, operators, corpus.

Evaluators are numpy-vectorized: they accept a float or an ndarray and
return the same shape.  Singular points are an explicit, finite, declared
list; nothing here tries to detect singularities.  Indicators follow the
half-open convention (1 at the left endpoint, 0 at the right), so endpoint
values never affect any measure or integral computed downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .expr import Call, BinOp, parse_expr, eval_expr

__all__ = [
    "Interval", "RealFunction", "CorpusEntry",
    "DomainError", "SingularPointError",
    "eval_at", "translate", "reflect", "scale", "add", "abs_fn",
    "restrict", "zero_function", "indicator", "step_function",
    "from_expression", "corpus", "corpus_entry",
    "TAG_LEBESGUE", "TAG_HK_ONLY", "TAG_BOUNDED",
]

TAG_LEBESGUE = "lebesgue"
TAG_HK_ONLY = "hk_only"
TAG_BOUNDED = "bounded_compact_support"

_TAGS = (TAG_LEBESGUE, TAG_HK_ONLY, TAG_BOUNDED)


class DomainError(ValueError):
    """Evaluation requested outside the function's domain."""


class SingularPointError(ValueError):
    """Evaluation requested at a declared singular point."""


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi].  ``hi`` may be +inf for Alexiewicz domains."""

    lo: float
    hi: float

    def __post_init__(self):
        if not math.isfinite(self.lo):
            raise ValueError(f"interval lower end must be finite, got {self.lo}")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.hi)

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if not lo < hi:
            raise ValueError(f"intervals {self} and {other} do not overlap")
        return Interval(lo, hi)


@dataclass(frozen=True, eq=False)
class RealFunction:
    """A real function on an interval, plus the metadata the toolkit needs.

    ``breakpoints`` are jump/kink/oscillation-node locations (hints that
    seed the adaptive partition; correctness does not depend on them) and
    may be a tuple or a numpy array.  ``bound`` is a sup bound on |f| over
    the support, required for the bounded tag.
    """

    evaluator: Callable
    domain: Interval
    support: Interval
    singularities: tuple = ()
    antiderivative: Optional[Callable] = None
    tag: str = TAG_LEBESGUE
    bound: Optional[float] = None
    breakpoints: object = ()

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        if self.tag == TAG_BOUNDED:
            if self.bound is None:
                raise ValueError("bounded_compact_support requires a bound")
            if not self.support.bounded:
                raise ValueError("bounded_compact_support requires bounded support")
        if not (self.domain.lo <= self.support.lo and self.support.hi <= self.domain.hi):
            raise ValueError("support must be a subset of the domain")

    def __call__(self, x):
        """Raw vectorized evaluation with no domain/singularity checks."""
        return self.evaluator(x)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    function: RealFunction
    known_values: tuple = field(default_factory=tuple)


# ---------------------------------------------------------------------------
# pointwise access and operators

def eval_at(f: RealFunction, x: float) -> float:
    """Evaluate ``f`` at a single point with domain/singularity checks."""
    if not f.domain.contains(x):
        raise DomainError(f"{x} outside domain [{f.domain.lo}, {f.domain.hi}]")
    if x in f.singularities:
        raise SingularPointError(f"{x} is a declared singular point")
    return float(f.evaluator(x))


def translate(f: RealFunction, t: float) -> RealFunction:
    """g(x) = f(x - t); support, singularities and breakpoints shift by t."""
    ev = f.evaluator
    anti = f.antiderivative
    hi = f.domain.hi + t if f.domain.bounded else math.inf
    shi = f.support.hi + t if f.support.bounded else math.inf
    return RealFunction(
        evaluator=lambda x, _ev=ev, _t=t: _ev(np.asarray(x) - _t) if np.ndim(x) else _ev(x - _t),
        domain=Interval(f.domain.lo + t, hi),
        support=Interval(f.support.lo + t, shi),
        singularities=tuple(s + t for s in f.singularities),
        antiderivative=None if anti is None else (lambda x, _a=anti, _t=t: _a(x - _t)),
        tag=f.tag,
        bound=f.bound,
        breakpoints=np.asarray(f.breakpoints, dtype=float) + t if len(f.breakpoints) else (),
    )


def reflect(f: RealFunction) -> RealFunction:
    """g(x) = f(-x).  Requires a bounded domain."""
    if not f.domain.bounded:
        raise ValueError("cannot reflect a function on an unbounded domain")
    ev = f.evaluator
    anti = f.antiderivative
    return RealFunction(
        evaluator=lambda x, _ev=ev: _ev(-np.asarray(x)) if np.ndim(x) else _ev(-x),
        domain=Interval(-f.domain.hi, -f.domain.lo),
        support=Interval(-f.support.hi, -f.support.lo),
        singularities=tuple(sorted(-s for s in f.singularities)),
        antiderivative=None if anti is None else (lambda x, _a=anti: -_a(-x)),
        tag=f.tag,
        bound=f.bound,
        breakpoints=np.sort(-np.asarray(f.breakpoints, dtype=float)) if len(f.breakpoints) else (),
    )


def scale(f: RealFunction, alpha: float) -> RealFunction:
    """g(x) = alpha * f(x)."""
    ev = f.evaluator
    anti = f.antiderivative
    return RealFunction(
        evaluator=lambda x, _ev=ev, _a=alpha: _a * _ev(x),
        domain=f.domain,
        support=f.support,
        singularities=f.singularities,
        antiderivative=None if anti is None else (lambda x, _f=anti, _a=alpha: _a * _f(x)),
        tag=f.tag,
        bound=None if f.bound is None else abs(alpha) * f.bound,
        breakpoints=f.breakpoints,
    )


def _combine_tag(f: RealFunction, g: RealFunction):
    if f.tag == TAG_HK_ONLY or g.tag == TAG_HK_ONLY:
        return TAG_HK_ONLY, None
    if f.tag == TAG_BOUNDED and g.tag == TAG_BOUNDED:
        return TAG_BOUNDED, f.bound + g.bound
    return TAG_LEBESGUE, None


def add(f: RealFunction, g: RealFunction) -> RealFunction:
    """Pointwise sum on the intersection of the domains."""
    dom = f.domain.intersect(g.domain)
    slo = min(f.support.lo, g.support.lo)
    shi = max(f.support.hi, g.support.hi)
    support = Interval(max(dom.lo, slo), min(dom.hi, shi)) if slo < shi else dom
    tag, bound = _combine_tag(f, g)
    fe, ge = f.evaluator, g.evaluator
    fa, ga = f.antiderivative, g.antiderivative
    anti = None if (fa is None or ga is None) else (lambda x, _fa=fa, _ga=ga: _fa(x) + _ga(x))
    sings = tuple(sorted(set(f.singularities) | set(g.singularities)))
    breaks = np.unique(np.concatenate([
        np.asarray(f.breakpoints, dtype=float).ravel(),
        np.asarray(g.breakpoints, dtype=float).ravel()]))
    return RealFunction(
        evaluator=lambda x, _f=fe, _g=ge: _f(x) + _g(x),
        domain=dom,
        support=support,
        singularities=sings,
        antiderivative=anti,
        tag=tag,
        bound=bound,
        breakpoints=breaks,
    )


def abs_fn(f: RealFunction) -> RealFunction:
    """g(x) = |f(x)|.  Drops the antiderivative (no longer valid)."""
    ev = f.evaluator
    return RealFunction(
        evaluator=lambda x, _ev=ev: np.abs(_ev(x)),
        domain=f.domain,
        support=f.support,
        singularities=f.singularities,
        antiderivative=None,
        tag=f.tag,
        bound=f.bound,
        breakpoints=f.breakpoints,
    )


def restrict(f: RealFunction, window: Interval) -> RealFunction:
    """The same pointwise values, considered as a function on ``window``."""
    dom = f.domain.intersect(window)
    slo = max(f.support.lo, dom.lo)
    shi = min(f.support.hi, dom.hi)
    support = Interval(slo, shi) if slo < shi else dom
    tag = f.tag
    bound = f.bound
    if tag == TAG_HK_ONLY and not any(dom.lo <= s <= dom.hi for s in f.singularities):
        # away from its singularities an hk_only corpus entry is plain measurable
        tag = TAG_LEBESGUE
    breaks = np.asarray(f.breakpoints, dtype=float)
    if len(breaks):
        breaks = breaks[(breaks >= dom.lo) & (breaks <= dom.hi)]
    return RealFunction(
        evaluator=f.evaluator,
        domain=dom,
        support=support,
        singularities=tuple(s for s in f.singularities if dom.lo <= s <= dom.hi),
        antiderivative=f.antiderivative,
        tag=tag,
        bound=bound,
        breakpoints=breaks,
    )


def zero_function(domain: Interval = None) -> RealFunction:
    dom = domain or Interval(-50.0, 50.0)
    return RealFunction(
        evaluator=lambda x: np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0,
        domain=dom,
        support=dom,
        antiderivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0,
        tag=TAG_BOUNDED,
        bound=0.0,
    )


def indicator(a: float, b: float, domain: Interval = None) -> RealFunction:
    """1 on [a, b) (half-open convention), 0 elsewhere."""
    dom = domain or Interval(min(a, -50.0) - 1.0, max(b, 50.0) + 1.0)
    return RealFunction(
        evaluator=lambda x, _a=a, _b=b: np.where(
            (np.asarray(x) >= _a) & (np.asarray(x) < _b), 1.0, 0.0),
        domain=dom,
        support=Interval(a, b),
        antiderivative=lambda x, _a=a, _b=b: np.clip(x, _a, _b) - _a,
        tag=TAG_BOUNDED,
        bound=1.0,
        breakpoints=(a, b),
    )


def step_function(breaks, heights, domain: Interval = None) -> RealFunction:
    """Piecewise constant: heights[i] on [breaks[i], breaks[i+1]), 0 outside."""
    breaks = np.asarray(breaks, dtype=float)
    heights = np.asarray(heights, dtype=float)
    if len(breaks) != len(heights) + 1:
        raise ValueError("need len(breaks) == len(heights) + 1")
    if not np.all(np.diff(breaks) > 0):
        raise ValueError("breakpoints must be strictly increasing")
    dom = domain or Interval(min(breaks[0], -50.0) - 1.0, max(breaks[-1], 50.0) + 1.0)
    padded = np.concatenate(([0.0], heights, [0.0]))
    # antiderivative: cumulative mass up to each breakpoint
    cum = np.concatenate(([0.0], np.cumsum(heights * np.diff(breaks))))

    def ev(x, _b=breaks, _h=padded):
        idx = np.searchsorted(_b, np.asarray(x), side="right")
        return _h[idx] if np.ndim(x) else float(_h[idx])

    def anti(x, _b=breaks, _h=heights, _c=cum):
        xc = np.clip(x, _b[0], _b[-1])
        idx = np.clip(np.searchsorted(_b, np.asarray(xc), side="right") - 1, 0, len(_h) - 1)
        val = _c[idx] + _h[idx] * (xc - _b[idx])
        return val if np.ndim(x) else float(val)

    return RealFunction(
        evaluator=ev,
        domain=dom,
        support=Interval(float(breaks[0]), float(breaks[-1])),
        antiderivative=anti,
        tag=TAG_BOUNDED,
        bound=float(np.max(np.abs(heights))),
        breakpoints=tuple(float(b) for b in breaks),
    )


# ---------------------------------------------------------------------------
# expressions -> RealFunction

def _infer_support(node, domain: Interval):
    """Support of an ind() factor in a top-level product, if present."""
    if isinstance(node, Call) and node.fn == "ind":
        return Interval(node.args[0].value, node.args[1].value)
    if isinstance(node, BinOp) and node.op == "*":
        left = _infer_support(node.left, domain)
        right = _infer_support(node.right, domain)
        if left and right:
            return left.intersect(right)
        return left or right
    return None


def _expr_breakpoints(node):
    if isinstance(node, Call) and node.fn == "ind":
        return {node.args[0].value, node.args[1].value}
    out = set()
    if isinstance(node, BinOp):
        out |= _expr_breakpoints(node.left)
        out |= _expr_breakpoints(node.right)
    elif isinstance(node, Call):
        for a in node.args:
            out |= _expr_breakpoints(a)
    elif hasattr(node, "operand"):
        out |= _expr_breakpoints(node.operand)
    return out


def from_expression(text: str, domain: Interval = None, singularities=(),
                    tag: str = TAG_LEBESGUE, bound: float = None) -> RealFunction:
    """Build a RealFunction from expression source text."""
    ast = parse_expr(text)
    dom = domain or Interval(-50.0, 50.0)
    support = _infer_support(ast, dom)
    if support is not None:
        support = Interval(max(support.lo, dom.lo), min(support.hi, dom.hi)) \
            if support.lo < dom.hi and support.hi > dom.lo else dom
    else:
        support = dom
    breaks = tuple(sorted(b for b in _expr_breakpoints(ast) if dom.lo < b < dom.hi))
    if tag == TAG_BOUNDED and bound is None:
        raise ValueError("bounded_compact_support requires a bound")
    return RealFunction(
        evaluator=lambda x, _ast=ast: eval_expr(_ast, x),
        domain=dom,
        support=support,
        singularities=tuple(sorted(singularities)),
        tag=tag,
        bound=bound,
        breakpoints=breaks,
    )


# ---------------------------------------------------------------------------
# corpus

_SIN1 = 0.8414709848078965           # sin(1), value of the hk-only showcase
_SI_PI = 1.8519370519824662          # max_s of the partial sine integrals (s = pi)

_C4_NODES = None


def _c4_oscillation_nodes():
    """Sign-change nodes of the dominant oscillation of the c4 derivative.

    Zeros of cos(1/x^2) at 1/x^2 = pi/2 + k pi, seeded down to ~5.2e-4 where
    the remaining tail mass |F(x)| <= x^2 is below 2.8e-7.  Cached; ~1.2M
    nodes.
    """
    global _C4_NODES
    if _C4_NODES is None:
        x_min = 5.2e-4
        k_max = int((1.0 / (x_min * x_min) - 0.5 * math.pi) / math.pi)
        k = np.arange(k_max + 1, dtype=float)
        _C4_NODES = np.sort(1.0 / np.sqrt(0.5 * math.pi + math.pi * k))
    return _C4_NODES


def _c1():
    f = RealFunction(
        evaluator=lambda x: np.where((np.asarray(x) >= 0) & (np.asarray(x) < 1),
                                     np.asarray(x, dtype=float), 0.0),
        domain=Interval(-50.0, 50.0),
        support=Interval(0.0, 1.0),
        antiderivative=lambda x: 0.5 * np.clip(x, 0.0, 1.0) ** 2,
        tag=TAG_BOUNDED,
        bound=1.0,
        breakpoints=(0.0, 1.0),
    )
    return CorpusEntry("c1", f, (
        ("henstock_integral_0_1", 0.5, "F(1)-F(0) with F = x^2/2"),
        ("luxemburg_norm_power2_[0,1]", 3 ** -0.5, "root of (1/a^2) * int x^2 = 1"),
    ))


def _c2():
    f = indicator(0.0, 1.0, Interval(-50.0, 50.0))
    return CorpusEntry("c2", f, (
        ("henstock_integral_0_1", 1.0, "length of the support"),
        ("luxemburg_norm_power2", 1.0, "theta(1/a) <= 1 iff a >= 1"),
        ("alexiewicz_norm_-2_2", 1.0, "partial integral ramps to 1 and stays"),
    ))


def _c3():
    f = RealFunction(
        evaluator=lambda x: np.where((np.asarray(x) >= 0) & (np.asarray(x) < 1),
                                     np.sin(np.pi * np.asarray(x, dtype=float)), 0.0),
        domain=Interval(-50.0, 50.0),
        support=Interval(0.0, 1.0),
        antiderivative=lambda x: (1.0 - np.cos(np.pi * np.clip(x, 0.0, 1.0))) / np.pi,
        tag=TAG_BOUNDED,
        bound=1.0,
        breakpoints=(0.0, 1.0),
    )
    return CorpusEntry("c3", f, (
        ("henstock_integral_0_1", 2.0 / np.pi, "F(1)-F(0) with F = (1-cos(pi x))/pi"),
        ("distribution_at_half", 2.0 / 3.0, "level crossings at 1/6 and 5/6"),
    ))


def _c4():
    def ev(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u = 1.0 / (x * x)
            val = 2.0 * x * np.sin(u) - (2.0 / x) * np.cos(u)
        out = np.where(x == 0.0, 0.0, val)
        return out if out.ndim else float(out)

    def anti(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = x * x * np.sin(1.0 / (x * x))
        out = np.where(x == 0.0, 0.0, val)
        return out if out.ndim else float(out)

    f = RealFunction(
        evaluator=ev,
        domain=Interval(0.0, 1.0),
        support=Interval(0.0, 1.0),
        singularities=(0.0,),
        antiderivative=anti,
        tag=TAG_HK_ONLY,
        breakpoints=_c4_oscillation_nodes(),
    )
    return CorpusEntry("c4", f, (
        ("henstock_integral_0_1", _SIN1, "F(1)-F(0) with F = x^2 sin(1/x^2)"),
        ("antiderivative_at_1", _SIN1, "F(1) = sin(1)"),
    ))


def _c5():
    def ev(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sin(x) / x
        out = np.where(x == 0.0, 1.0, val)
        return out if out.ndim else float(out)

    f = RealFunction(
        evaluator=ev,
        domain=Interval(0.0, math.inf),
        support=Interval(0.0, math.inf),
        tag=TAG_HK_ONLY,
    )
    return CorpusEntry("c5", f, (
        ("alexiewicz_norm_0_20", _SI_PI, "sup of partial sine integrals, at s = pi"),
    ))


def _c6():
    f = step_function([0.0, 0.25, 2.0 / 3.0, 1.0], [1.5, 0.5, 1.25],
                      Interval(-50.0, 50.0))
    return CorpusEntry("c6", f, (
        ("henstock_integral_0_1", 1.0, "3/8 + 5/24 + 5/12 telescopes to 1"),
    ))


def corpus():
    """The built-in function corpus, in a fixed deterministic order."""
    return [_c1(), _c2(), _c3(), _c4(), _c5(), _c6()]


def corpus_entry(name: str) -> CorpusEntry:
    for entry in corpus():
        if entry.name == name:
            return entry
    raise KeyError(f"no corpus entry named {name!r}")
