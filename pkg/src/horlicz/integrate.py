"""Henstock-Kurzweil integration via gauge-driven adaptive tagged partitions.

The integrator refines a tagged partition: cells violating delta-fineness
for the working gauge, or whose local error estimate (cell estimate vs.
two-half refinement) exceeds their share of the tolerance, are bisected.
Convergence is declared when two successive global refinements agree to
within the tolerance; divergence when the running sum exceeds a magnitude
cap or the partition exceeds a cell-count cap.

A cell that abuts a declared singularity is tagged at the singular endpoint
and contributes zero to the sum; the gauge exempts the singular tag itself
from shrinkage, which is the standard mechanism by which gauge integration
tames point singularities.  Summation is in left-to-right cell order
through an error-free accumulator (math.fsum), so results are bit
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .funcspace import Interval, RealFunction, DomainError

__all__ = [
    "TaggedPartition", "Gauge", "IntegralResult", "IntegrationDivergedError",
    "riemann_sum", "is_delta_fine", "henstock_integrate", "alexiewicz_norm",
    "DIVERGENCE_CAP", "CELL_CAP",
]

DIVERGENCE_CAP = 1e12
CELL_CAP = 2 ** 22

# 7-point Gauss-Legendre rule on (-1, 1); all nodes interior, so quadrature
# never samples a cell endpoint (where a singularity may sit)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(7)


class IntegrationDivergedError(ArithmeticError):
    """Raised when a computation needs a value but integration diverged."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class TaggedPartition:
    """Finite tagged subdivision: cells is a tuple of (tag, Interval)."""

    cells: tuple

    def validate(self, ambient: Interval):
        ordered = sorted(self.cells, key=lambda c: c[1].lo)
        prev_hi = ambient.lo
        for tag, cell in ordered:
            if not (cell.lo <= tag <= cell.hi):
                raise ValueError(f"tag {tag} outside its cell [{cell.lo}, {cell.hi}]")
            if abs(cell.lo - prev_hi) > 1e-12 * max(1.0, abs(prev_hi)):
                raise ValueError("cells overlap or leave a gap")
            prev_hi = cell.hi
        if abs(prev_hi - ambient.hi) > 1e-12 * max(1.0, abs(ambient.hi)):
            raise ValueError("cells do not cover the ambient interval")

    def ordered(self):
        return sorted(self.cells, key=lambda c: c[1].lo)


@dataclass(frozen=True)
class Gauge:
    """delta(t) = min(base_delta, shrink_rate * dist(t, singularities)),
    except at a singular point itself where delta = base_delta."""

    base_delta: float
    singularities: tuple = ()
    shrink_rate: float = 0.5

    def __post_init__(self):
        if self.base_delta <= 0:
            raise ValueError("base_delta must be positive")
        if not 0 < self.shrink_rate <= 1:
            raise ValueError("shrink_rate must lie in (0, 1]")

    def delta(self, t: float) -> float:
        if not self.singularities:
            return self.base_delta
        if t in self.singularities:
            return self.base_delta
        d = min(abs(t - s) for s in self.singularities)
        return min(self.base_delta, self.shrink_rate * d)

    def delta_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        if not self.singularities:
            return np.full_like(ts, self.base_delta)
        dist = np.min(np.abs(ts[:, None] - np.asarray(self.singularities)[None, :]),
                      axis=1)
        out = np.minimum(self.base_delta, self.shrink_rate * dist)
        exempt = np.isin(ts, np.asarray(self.singularities))
        return np.where(exempt, self.base_delta, out)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool
    diverged: bool

    def __post_init__(self):
        if self.converged and self.diverged:
            raise ValueError("converged and diverged are mutually exclusive")


def riemann_sum(f: RealFunction, partition: TaggedPartition) -> float:
    """Sum of f(tag) * length(cell) in left-to-right cell order.

    Tags coinciding with a declared singularity contribute zero.
    """
    terms = []
    for tag, cell in partition.ordered():
        if tag in f.singularities:
            terms.append(0.0)
        else:
            terms.append(float(f.evaluator(tag)) * (cell.hi - cell.lo))
    return math.fsum(terms)


def is_delta_fine(partition: TaggedPartition, gauge: Gauge) -> bool:
    """True iff every cell sits strictly inside (tag - delta, tag + delta)."""
    for tag, cell in partition.cells:
        d = gauge.delta(tag)
        if not (tag - d < cell.lo and cell.hi < tag + d):
            return False
    return True


# ---------------------------------------------------------------------------
# adaptive engine
#
# Cells live in parallel arrays sorted by left edge.  scode 0 marks a normal
# cell (tag = midpoint, Gauss-7 estimate); scode 1/2 mark a cell tagged at
# its singular left/right endpoint (contribution 0).  Each cell stores its
# own estimate plus its two half-cell estimates; bisection reuses the halves.

class _Engine:
    def __init__(self, f, interval, tol, divergence_cap, cell_cap):
        self.f = f
        self.interval = interval
        self.tol = tol
        self.divergence_cap = divergence_cap
        self.cell_cap = cell_cap
        self.evaluations = 0
        self.length = interval.hi - interval.lo
        sing = sorted(s for s in f.singularities
                      if interval.lo <= s <= interval.hi)
        self.singularities = tuple(sing)
        self.gauge = Gauge(base_delta=self.length, singularities=self.singularities,
                           shrink_rate=0.5)

    def _quad(self, lo, hi):
        """Vectorized Gauss-7 estimates for cell arrays lo, hi."""
        if len(lo) == 0:
            return np.zeros(0)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        pts = mid[None, :] + half[None, :] * _GL_NODES[:, None]
        with np.errstate(all="ignore"):
            vals = self.f.evaluator(pts.ravel()).reshape(pts.shape)
        self.evaluations += pts.size
        return half * np.einsum("i,ij->j", _GL_WEIGHTS, vals)

    def _children(self, lo, hi, scode):
        """Quadrature of the two halves of each cell, honoring singular tags."""
        mid = 0.5 * (lo + hi)
        ql = np.zeros(len(lo))
        qr = np.zeros(len(lo))
        left_normal = scode != 1     # left half keeps the singular left tag
        right_normal = scode != 2
        ql[left_normal] = self._quad(lo[left_normal], mid[left_normal])
        qr[right_normal] = self._quad(mid[right_normal], hi[right_normal])
        return ql, qr

    def _initial_cells(self, n0=32):
        a, b = self.interval.lo, self.interval.hi
        pieces = [np.linspace(a, b, n0 + 1)]
        if self.singularities:
            pieces.append(np.asarray(self.singularities, dtype=float))
        breaks = np.asarray(self.f.breakpoints, dtype=float).ravel()
        if len(breaks):
            pieces.append(breaks[(breaks > a) & (breaks < b)])
        edges = np.unique(np.concatenate(pieces))
        lo, hi = edges[:-1], edges[1:]
        scode = np.zeros(len(lo), dtype=np.int8)
        if self.singularities:
            sing = np.asarray(self.singularities)
            scode[np.isin(lo, sing)] = 1
            right = np.isin(hi, sing) & (scode == 0)
            scode[right] = 2
        return lo, hi, scode

    def _zone_mass(self, lo, hi, q, window_lo, window_hi, normal_flag):
        """Pro-rata mass of cells overlapping [window_lo, window_hi] and
        whether every overlapped cell is settled (not flagged)."""
        if window_hi <= window_lo:
            return 0.0, True
        j0 = int(np.searchsorted(hi, window_lo, side="right"))
        j1 = int(np.searchsorted(lo, window_hi, side="left"))
        if j1 <= j0:
            return 0.0, True
        seg_lo = np.maximum(lo[j0:j1], window_lo)
        seg_hi = np.minimum(hi[j0:j1], window_hi)
        width = hi[j0:j1] - lo[j0:j1]
        frac = np.clip((seg_hi - seg_lo) / width, 0.0, 1.0)
        mass = float(np.dot(q[j0:j1], frac))
        settled = not bool(normal_flag[j0:j1].any())
        return mass, settled

    def _singular_state(self, i, lo, hi, q, scode, normal_flag):
        """Tail estimate for a singular-tagged cell from its three dyadic
        collar zones.  Returns (settled, tail_estimate, zone1_settled)."""
        w = hi[i] - lo[i]
        masses, settled_all = [], True
        zone1_settled = True
        for level in range(3):
            if scode[i] == 1:
                s = lo[i]
                a = s + w * (2 ** level)
                b = s + w * (2 ** (level + 1))
                a, b = min(a, self.interval.hi), min(b, self.interval.hi)
            else:
                s = hi[i]
                b = s - w * (2 ** level)
                a = s - w * (2 ** (level + 1))
                a, b = max(a, self.interval.lo), max(b, self.interval.lo)
            mass, settled = self._zone_mass(lo, hi, q, a, b, normal_flag)
            masses.append(abs(mass))
            settled_all = settled_all and settled
            if level == 0:
                zone1_settled = settled
        m1, m2, m3 = masses
        eps = 1e-300
        ratio = max(m1 / (m2 + eps), m2 / (m3 + eps))
        ratio = min(max(ratio, 0.05), 0.95)
        envelope = max(m1, m2 * ratio, m3 * ratio * ratio)
        tail = envelope * (1.0 + ratio / (1.0 - ratio))
        return settled_all, tail, zone1_settled

    def run(self, max_passes=256):
        lo, hi, scode = self._initial_cells()
        normal = scode == 0
        q = np.zeros(len(lo))
        q[normal] = self._quad(lo[normal], hi[normal])
        ql, qr = self._children(lo, hi, scode)

        prev_sum = None
        small_diffs = 0
        diff = math.inf
        for _ in range(max_passes):
            total = math.fsum(q.tolist())
            if not math.isfinite(total) or abs(total) > self.divergence_cap:
                return self._result(total, diff, converged=False, diverged=True,
                                    cells=(lo, hi, scode))
            if len(lo) > self.cell_cap:
                return self._result(total, diff, converged=False, diverged=True,
                                    cells=(lo, hi, scode))

            halfwidth = 0.5 * (hi - lo)
            mids = 0.5 * (lo + hi)
            delta = self.gauge.delta_many(mids)
            fine = halfwidth < delta
            fine[scode != 0] = True   # singular tags are exempt

            if prev_sum is not None:
                diff = abs(total - prev_sum)
                if diff < self.tol and bool(np.all(fine)):
                    small_diffs += 1
                    if small_diffs >= 2:
                        return self._result(total, diff, converged=True,
                                            diverged=False, cells=(lo, hi, scode))
                else:
                    small_diffs = 0
            prev_sum = total

            err = np.abs(q - (ql + qr))
            share = self.tol * (hi - lo) / self.length
            flag = (err > share) | ~fine
            if not flag.any():
                continue

            mid = 0.5 * (lo[flag] + hi[flag])
            flo, fhi, fsc = lo[flag], hi[flag], scode[flag]
            fql, fqr = ql[flag], qr[flag]
            # children of the flagged cells; the half next to a singular tag
            # inherits the singular code, the other half becomes normal
            c_lo = np.concatenate([flo, mid])
            c_hi = np.concatenate([mid, fhi])
            c_sc = np.concatenate([np.where(fsc == 1, 1, 0),
                                   np.where(fsc == 2, 2, 0)]).astype(np.int8)
            c_q = np.concatenate([fql, fqr])
            keep = ~flag
            lo = np.concatenate([lo[keep], c_lo])
            hi = np.concatenate([hi[keep], c_hi])
            scode = np.concatenate([scode[keep], c_sc])
            q = np.concatenate([q[keep], c_q])
            c_ql, c_qr = self._children(c_lo, c_hi, c_sc)
            ql = np.concatenate([ql[keep], c_ql])
            qr = np.concatenate([qr[keep], c_qr])
            order = np.argsort(lo, kind="stable")
            lo, hi, scode = lo[order], hi[order], scode[order]
            q, ql, qr = q[order], ql[order], qr[order]

        return self._result(prev_sum if prev_sum is not None else math.nan,
                            diff, converged=False, diverged=True,
                            cells=(lo, hi, scode))

    def _result(self, value, diff, converged, diverged, cells):
        self._final_cells = cells
        return IntegralResult(
            value=float(value),
            error_estimate=float(diff) if math.isfinite(diff) else math.inf,
            evaluations=int(self.evaluations),
            converged=converged,
            diverged=diverged,
        )

    def final_partition(self):
        lo, hi, scode = self._final_cells
        cells = []
        for a, b, sc in zip(lo.tolist(), hi.tolist(), scode.tolist()):
            if sc == 1:
                tag = a
            elif sc == 2:
                tag = b
            else:
                tag = 0.5 * (a + b)
            cells.append((tag, Interval(a, b)))
        return TaggedPartition(tuple(cells))


def henstock_integrate(f: RealFunction, interval: Interval, tol: float,
                       divergence_cap: float = DIVERGENCE_CAP,
                       cell_cap: int = CELL_CAP,
                       return_detail: bool = False):
    """Adaptive Henstock-Kurzweil integral of ``f`` over ``interval``.

    Returns an IntegralResult; with ``return_detail`` also the final
    tagged partition and the gauge the refinement used.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not interval.bounded:
        raise ValueError("henstock_integrate needs a bounded interval")
    if not (f.domain.lo <= interval.lo and interval.hi <= f.domain.hi):
        raise DomainError(f"interval [{interval.lo}, {interval.hi}] not inside "
                          f"domain [{f.domain.lo}, {f.domain.hi}]")
    engine = _Engine(f, interval, tol, divergence_cap, cell_cap)
    result = engine.run()
    if return_detail:
        return result, engine.final_partition(), engine.gauge
    return result


# ---------------------------------------------------------------------------
# Alexiewicz norm

def _alexiewicz_bounded(f, interval, tol, divergence_cap, cell_cap):
    a, b = interval.lo, interval.hi
    n = 64
    seg_tol = tol / (8 * n)

    def integrate_segments(edges):
        partials = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            res = henstock_integrate(f, Interval(lo, hi), seg_tol,
                                     divergence_cap, cell_cap)
            if res.diverged:
                raise IntegrationDivergedError(
                    f"partial integral over [{lo}, {hi}] diverged", res)
            partials.append(res.value)
        return partials

    edges = np.linspace(a, b, n + 1)
    partials = integrate_segments(edges.tolist())
    cumulative = [0.0]
    for p in partials:
        cumulative.append(cumulative[-1] + p)
    best = max(abs(c) for c in cumulative)
    idx = int(np.argmax(np.abs(cumulative)))

    window_lo = edges[max(0, idx - 1)]
    window_hi = edges[min(n, idx + 1)]
    base = cumulative[max(0, idx - 1)]
    while window_hi - window_lo > 1e-13 * (b - a):
        edges_w = np.linspace(window_lo, window_hi, n + 1)
        partials = integrate_segments(edges_w.tolist())
        cum = [base]
        for p in partials:
            cum.append(cum[-1] + p)
        local_best = max(abs(c) for c in cum)
        j = int(np.argmax(np.abs(cum)))
        improved = max(best, local_best)
        if abs(improved - best) < tol and window_hi - window_lo < (b - a) / n:
            return improved
        best = improved
        lo_j = max(0, j - 1)
        base = cum[lo_j]
        window_lo, window_hi = edges_w[lo_j], edges_w[min(n, j + 1)]
    return best


def alexiewicz_norm(f: RealFunction, interval: Interval, tol: float,
                    divergence_cap: float = DIVERGENCE_CAP,
                    cell_cap: int = CELL_CAP) -> float:
    """sup over s of |integral of f on [interval.lo, s]|.

    For an unbounded interval the upper limit grows geometrically until the
    supremum stabilizes.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if interval.bounded:
        return _alexiewicz_bounded(f, interval, tol, divergence_cap, cell_cap)
    lo = interval.lo
    span = 16.0
    prev = None
    stable = 0
    while span <= 2 ** 24:
        hi = min(lo + span, f.domain.hi) if f.domain.bounded else lo + span
        current = _alexiewicz_bounded(f, Interval(lo, hi), tol,
                                      divergence_cap, cell_cap)
        if prev is not None and abs(current - prev) < tol / 2:
            stable += 1
            if stable >= 2:
                return current
        else:
            stable = 0
        prev = current
        span *= 2
    raise IntegrationDivergedError(
        "partial-integral supremum did not stabilize on a growing interval")
