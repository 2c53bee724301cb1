"""Inner and outer bounds on the one-sided secrecy rate region.

Rates are ``(r1s, r2)``: user 1's secret rate and user 2's public rate, in
bits per channel use. Single-policy evaluations return rectangles (with
feedback), small polytopes (without feedback) or outer-bound corners; the
sweep collects them over a policy grid and takes the downward-closed convex
hull.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .channels import TwoWayChannel, has_common_output
from .errors import (
    DimensionMismatch,
    EmptyRegion,
    MarkovViolation,
    NotCommonOutput,
    UnknownVariable,
    ValidationError,
)
from .info import (
    InputPolicy,
    Pmf,
    conditional_entropy,
    joint_from_inputs,
    joint_from_policy,
    mutual_info,
)

HULL_TOL = 1e-12
HULL_DIGITS = 12
CONTAIN_TOL = 1e-9
MARKOV_TOL = 1e-9
EXPORT_SAMPLES = 201

INNER_FEEDBACK = "inner_feedback"
INNER_NOFEEDBACK = "inner_nofeedback"
OUTER = "outer"
KINDS = (INNER_FEEDBACK, INNER_NOFEEDBACK, OUTER)


@dataclass(frozen=True, order=True)
class RatePoint:
    r1s: float
    r2: float

    def __post_init__(self):
        for name in ("r1s", "r2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            if v < 0:
                if v < -HULL_TOL:
                    raise ValueError(f"{name} must be non-negative, got {v!r}")
                v = 0.0
            object.__setattr__(self, name, v + 0.0)

    def as_tuple(self) -> tuple[float, float]:
        return (self.r1s, self.r2)


@dataclass(frozen=True)
class PolicyTerms:
    """Mutual-information terms shared by the inner bounds.

    ``i1 = I(U1;Y2|X2,Q)``, ``i2 = I(U2;Y1|X1,Q)``, ``iz = I(U1,U2;Z)``,
    ``iz1 = I(U1;Z)``, ``iz2 = I(U2;Z)``.
    """

    i1: float
    i2: float
    iz: float
    iz1: float
    iz2: float


def policy_terms(ch: TwoWayChannel, pol: InputPolicy) -> PolicyTerms:
    p = joint_from_policy(ch, pol)
    return PolicyTerms(
        i1=mutual_info(p, "U1", "Y2", ("X2", "Q")),
        i2=mutual_info(p, "U2", "Y1", ("X1", "Q")),
        iz=mutual_info(p, ("U1", "U2"), "Z"),
        iz1=mutual_info(p, "U1", "Z"),
        iz2=mutual_info(p, "U2", "Z"),
    )


@dataclass(frozen=True)
class PolicyBounds:
    r1s_sum_bound: float
    r1s_key_bound: float
    r2_bound: float
    feasible: bool
    terms: PolicyTerms | None = field(default=None, compare=False, repr=False)

    @property
    def r1s_max(self) -> float:
        """Effective secret-rate bound, clamped at zero."""
        return max(0.0, min(self.r1s_sum_bound, self.r1s_key_bound))

    def corner(self) -> RatePoint:
        return RatePoint(self.r1s_max, max(0.0, self.r2_bound))


def inner_point(ch: TwoWayChannel, pol: InputPolicy) -> PolicyBounds:
    """Rectangle of rates achievable with key feedback under one policy.

    The secret rate is bounded by both the sum-rate and the key term; the
    policy is usable only when user 2's link to user 1 carries at least what
    the eavesdropper learns about ``U2``.
    """
    t = policy_terms(ch, pol)
    return PolicyBounds(
        r1s_sum_bound=t.i1 + t.i2 - t.iz,
        r1s_key_bound=t.i1 - t.iz1,
        r2_bound=t.i2,
        feasible=t.i2 >= t.iz2,
        terms=t,
    )


@dataclass(frozen=True)
class NoFeedbackPolytope:
    """``{r1s <= a, r1s + r2 <= s, r2 <= c, r1s, r2 >= 0}`` when feasible."""

    a: float
    s: float
    c: float
    feasible: bool

    @property
    def empty(self) -> bool:
        return not self.feasible or self.a < 0 or self.s < 0 or self.c < 0

    def contains(self, pt: RatePoint | tuple[float, float], tol: float = CONTAIN_TOL) -> bool:
        r1s, r2 = pt.as_tuple() if isinstance(pt, RatePoint) else pt
        if self.empty:
            return False
        return (
            r1s >= -tol
            and r2 >= -tol
            and r1s <= self.a + tol
            and r2 <= self.c + tol
            and r1s + r2 <= self.s + tol
        )

    def max_r1s(self, r2: float) -> float:
        """Largest secret rate at public rate ``r2``; NaN outside the polytope."""
        if self.empty or r2 < 0 or r2 > min(self.c, self.s):
            return math.nan
        return min(self.a, self.s - r2)

    def public_only_point(self) -> RatePoint | None:
        """``(0, c)``: user 2 alone at full rate, no secret traffic to protect."""
        if not self.feasible or self.c < 0:
            return None
        return RatePoint(0.0, self.c)

    def vertices(self) -> list[RatePoint]:
        if self.empty:
            return []
        # lines as (n1, n2, rhs) meaning n1*r1s + n2*r2 = rhs
        lines = [(1, 0, 0.0), (0, 1, 0.0), (1, 0, self.a), (1, 1, self.s), (0, 1, self.c)]
        out = set()
        for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(lines, 2):
            det = a1 * b2 - a2 * b1
            if det == 0:
                continue
            x = (c1 * b2 - c2 * b1) / det
            y = (a1 * c2 - a2 * c1) / det
            if self.contains((x, y), tol=1e-12):
                out.add((max(x, 0.0), max(y, 0.0)))
        return [RatePoint(x, y) for x, y in sorted(out)]


def nofeedback_point(ch: TwoWayChannel, pol: InputPolicy) -> NoFeedbackPolytope:
    """Rates achievable without the key mechanism under one policy.

    Without feedback user 1 has no key, and only the two randomisation
    indices (not user 2's public message) may be spent hiding the codeword
    pair from the eavesdropper. Projecting the sub-rate system onto
    ``(r1s, r2)`` leaves::

        r1s        <= I(U1;Y2|X2,Q) - I(U1;Z)
        r1s + r2   <= I(U1;Y2|X2,Q) + I(U2;Y1|X1,Q) - I(U1,U2;Z)
        r2         <= I(U2;Y1|X1,Q)

    with the policy usable iff ``I(U2;Y1|X1,Q) >= I(U2;Z)``.
    """
    t = policy_terms(ch, pol)
    return NoFeedbackPolytope(
        a=t.i1 - t.iz1,
        s=t.i1 + t.i2 - t.iz,
        c=t.i2,
        feasible=t.i2 >= t.iz2,
    )


def _input_law_table(ch: TwoWayChannel, px1x2) -> np.ndarray:
    if isinstance(px1x2, Pmf):
        try:
            t = px1x2.marginal_table(["X1", "X2"])
        except UnknownVariable as exc:
            raise DimensionMismatch(f"input law needs variables X1 and X2: {exc}") from exc
        return t
    return np.asarray(px1x2, dtype=float)


def outer_common_output_point(ch: TwoWayChannel, px1x2) -> RatePoint:
    """Outer-bound corner for a channel where all terminals see the same output.

    Returns ``(min(H(X1|Z), H(X2|Z)), I(X2;Z|X1))`` for the (possibly
    correlated) input law ``px1x2``.
    """
    if not has_common_output(ch):
        raise NotCommonOutput(f"channel {ch.name or '<unnamed>'} does not have Y1 = Y2 = Z")
    p = joint_from_inputs(ch, _input_law_table(ch, px1x2))
    r1s = min(conditional_entropy(p, "X1", "Z"), conditional_entropy(p, "X2", "Z"))
    r2 = mutual_info(p, "X2", "Z", "X1")
    return RatePoint(max(r1s, 0.0), max(r2, 0.0))


def outer_general_point(ch: TwoWayChannel, aux: Pmf) -> RatePoint:
    """General outer-bound corner for auxiliaries ``Q, U, V`` and inputs.

    ``aux`` is a Pmf over ``(Q, U, V, X1, X2)`` satisfying
    ``Q -> U -> V -> (X1, X2)``; violations larger than 1e-9 bits raise
    :class:`MarkovViolation`.
    """
    need = ("Q", "U", "V", "X1", "X2")
    try:
        t = aux.marginal_table(need)
    except UnknownVariable as exc:
        raise DimensionMismatch(f"auxiliary law needs variables {need}: {exc}") from exc
    if t.shape[3:] != (ch.x1_size, ch.x2_size):
        raise DimensionMismatch("auxiliary input alphabets do not match the channel")
    a = Pmf(list(zip(need, t.shape)), t, tol=1e-9)
    leak_q = mutual_info(a, "V", "Q", "U")
    leak_x = mutual_info(a, ("Q", "U"), ("X1", "X2"), "V")
    if leak_q > MARKOV_TOL or leak_x > MARKOV_TOL:
        raise MarkovViolation(
            f"Q -> U -> V -> (X1, X2) violated: I(V;Q|U)={leak_q:.3g}, "
            f"I(Q,U;X1,X2|V)={leak_x:.3g}"
        )
    full = t[..., None, None, None] * ch.transitions[None, None, None]
    names = need + ("Y1", "Y2", "Z")
    p = Pmf(list(zip(names, full.shape)), full, tol=1e-9)
    eve = mutual_info(p, "V", "Z", "U")
    via_user2 = mutual_info(p, "V", ("X2", "Y2"), "U") - eve
    via_user1 = mutual_info(p, "V", ("X1", "Y1"), "U") - eve
    r2 = mutual_info(p, "X2", "Y1", "X1")
    return RatePoint(max(0.0, min(via_user2, via_user1)), max(0.0, r2))


# ---------------------------------------------------------------------------
# convex hull and regions


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _turns_left(o, a, b) -> bool:
    # sine of the turn angle, so the collinearity test does not depend on edge length
    scale = math.hypot(a[0] - o[0], a[1] - o[1]) * math.hypot(b[0] - o[0], b[1] - o[1])
    return _cross(o, a, b) > HULL_TOL * scale


def _monotone_chain(pts: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Counter-clockwise hull without collinear vertices, starting at the lexicographic minimum."""
    if len(pts) <= 2:
        return pts
    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and not _turns_left(lower[-2], lower[-1], p):
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and not _turns_left(upper[-2], upper[-1], p):
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def convex_hull(points: Iterable[RatePoint]) -> list[RatePoint]:
    """Upper-right boundary of the downward-closed convex hull.

    Each point is augmented with its projections onto both axes and the
    origin, the 2-d hull is built with Andrew's monotone chain, and the
    boundary is returned from ``(max r1s, 0)`` to ``(0, max r2)``.
    """
    raw = [p.as_tuple() if isinstance(p, RatePoint) else tuple(map(float, p)) for p in points]
    if not raw:
        raise ValueError("convex_hull needs at least one point")
    aug = {(0.0, 0.0)}
    for x, y in raw:
        # merge points that differ only by rounding noise
        x, y = round(max(x, 0.0), HULL_DIGITS) + 0.0, round(max(y, 0.0), HULL_DIGITS) + 0.0
        aug.update({(x, y), (x, 0.0), (0.0, y)})
    hull = _monotone_chain(sorted(aug))
    if len(hull) == 1:
        return [RatePoint(*hull[0])]
    r_max = max(x for x, y in hull if y == 0.0)
    c_max = max(y for x, y in hull if x == 0.0)
    start = hull.index((r_max, 0.0))
    stop = hull.index((0.0, c_max))
    if stop >= start:
        chain = hull[start : stop + 1]
    else:
        chain = hull[start:] + hull[: stop + 1]
    return [RatePoint(x, y) for x, y in chain]


def _seg_dist(p, a, b) -> float:
    ax, ay = b[0] - a[0], b[1] - a[1]
    L2 = ax * ax + ay * ay
    if L2 == 0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = max(0.0, min(1.0, ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / L2))
    return math.hypot(p[0] - a[0] - t * ax, p[1] - a[1] - t * ay)


@dataclass(frozen=True)
class RateRegion:
    """Swept corner points plus their downward-closed convex boundary."""

    points: tuple[RatePoint, ...]
    hull: tuple[RatePoint, ...]
    label: str
    grid: dict | None = field(default=None, compare=False)

    @classmethod
    def from_points(cls, points: Sequence[RatePoint], label: str, grid: dict | None = None) -> "RateRegion":
        pts = tuple(points)
        return cls(points=pts, hull=tuple(convex_hull(pts)), label=label, grid=grid)

    @property
    def max_r1s(self) -> float:
        return max(p.r1s for p in self.hull)

    @property
    def max_r2(self) -> float:
        return max(p.r2 for p in self.hull)

    def polygon(self) -> list[tuple[float, float]]:
        """Closed CCW polygon ``(0,0), (max r1s, 0), ..., (0, max r2)``."""
        poly = [(0.0, 0.0)]
        for p in self.hull:
            if p.as_tuple() != poly[-1]:
                poly.append(p.as_tuple())
        if len(poly) > 1 and poly[-1] == poly[0]:
            poly.pop()
        return poly

    def contains(self, pt: RatePoint | tuple[float, float], tol: float = CONTAIN_TOL) -> bool:
        return region_contains(self, pt, tol)

    def r1s_at(self, r2) -> np.ndarray:
        """Largest secret rate on the boundary at each public rate (NaN outside)."""
        r2 = np.atleast_1d(np.asarray(r2, dtype=float))
        out = np.full(r2.shape, np.nan)
        h = [p.as_tuple() for p in self.hull]
        if len(h) == 1:
            out[np.abs(r2 - h[0][1]) <= CONTAIN_TOL] = h[0][0]
            return out
        for (x0, y0), (x1, y1) in zip(h[:-1], h[1:]):
            lo, hi = min(y0, y1), max(y0, y1)
            inside = (r2 >= lo - 1e-15) & (r2 <= hi + 1e-15)
            if not np.any(inside):
                continue
            if hi - lo <= 1e-15:
                val = np.full(r2.shape, max(x0, x1))
            else:
                val = x0 + (x1 - x0) * (np.clip(r2, lo, hi) - y0) / (y1 - y0)
            cur = np.where(np.isnan(out), -np.inf, out)
            out = np.where(inside, np.maximum(cur, val), out)
        return out

    def sample(self, num: int = EXPORT_SAMPLES) -> tuple[np.ndarray, np.ndarray]:
        r2 = np.linspace(0.0, self.max_r2, num)
        return r2, self.r1s_at(r2)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "hull": [{"r1s": p.r1s, "r2": p.r2} for p in self.hull],
            "grid": self.grid,
        }


def region_contains(region: RateRegion, pt, tol: float = CONTAIN_TOL) -> bool:
    """Membership in the downward-closed convex hull, boundary inclusive."""
    x, y = pt.as_tuple() if isinstance(pt, RatePoint) else map(float, pt)
    if x < -tol or y < -tol:
        return False
    poly = region.polygon()
    if len(poly) == 1:
        return math.hypot(x - poly[0][0], y - poly[0][1]) <= tol
    if len(poly) == 2:
        return _seg_dist((x, y), poly[0], poly[1]) <= tol
    for a, b in zip(poly, poly[1:] + poly[:1]):
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        if _cross(a, b, (x, y)) < -tol * length:
            return False
    return True


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class GridSpec:
    """Policy grid for a sweep.

    ``step`` spaces the Bernoulli parameters of binary ``U1``/``U2`` (and the
    joint input simplex for outer sweeps). ``q_card = 2`` adds policies with
    a two-valued time-sharing variable whose weight runs over a 0.05 grid.
    ``prefix_step`` enables BSC prefix channels with crossover on that grid
    (``None`` keeps identity prefixes).
    """

    step: float = 0.02
    q_card: int = 1
    prefix_step: float | None = None
    q_weight_step: float = 0.05

    def __post_init__(self):
        if not (0 < self.step <= 0.5):
            raise ValidationError(f"grid step must lie in (0, 0.5], got {self.step}")
        if self.q_card not in (1, 2):
            raise ValidationError("q_card must be 1 or 2")
        if self.prefix_step is not None and not (0 < self.prefix_step <= 0.5):
            raise ValidationError("prefix_step must lie in (0, 0.5]")

    @staticmethod
    def _axis(step: float, stop: float = 1.0) -> np.ndarray:
        k = int(round(stop / step))
        return np.round(np.linspace(0.0, stop, k + 1), 12)

    def to_dict(self) -> dict:
        return {"step": self.step, "q_card": self.q_card, "prefix": self.prefix_step}

    def bernoulli_pairs(self) -> list[tuple[float, float]]:
        ax = self._axis(self.step)
        return [(float(a), float(b)) for a in ax for b in ax]

    def crossovers(self) -> list[tuple[float, float]]:
        if self.prefix_step is None:
            return [(0.0, 0.0)]
        ax = self._axis(self.prefix_step, 0.5)
        return [(float(a), float(b)) for a in ax for b in ax]

    def policies(self, ch: TwoWayChannel) -> Iterator[InputPolicy]:
        if (ch.x1_size, ch.x2_size) != (2, 2):
            raise DimensionMismatch("policy grids are defined for binary inputs only")
        pairs = self.bernoulli_pairs()
        for c1, c2 in self.crossovers():
            pre1 = [[1 - c1, c1], [c1, 1 - c1]]
            pre2 = [[1 - c2, c2], [c2, 1 - c2]]
            # |Q| = 1 policies are the degenerate members of every larger grid
            for p1, p2 in pairs:
                yield InputPolicy([1.0], [[1 - p1, p1]], [[1 - p2, p2]], pre1, pre2)
            if self.q_card == 1:
                continue
            weights = self._axis(self.q_weight_step)[1:-1]
            for i, (a1, a2) in enumerate(pairs):
                for b1, b2 in pairs[i + 1 :]:
                    for w in weights:
                        yield InputPolicy(
                            [w, 1 - w],
                            [[1 - a1, a1], [1 - b1, b1]],
                            [[1 - a2, a2], [1 - b2, b2]],
                            pre1,
                            pre2,
                        )

    def input_laws(self, ch: TwoWayChannel) -> Iterator[np.ndarray]:
        """Joint input laws ``p(x1, x2)`` on the simplex grid."""
        m = ch.x1_size * ch.x2_size
        k = int(round(1.0 / self.step))
        for bars in itertools.combinations(range(k + m - 1), m - 1):
            cuts = (-1,) + bars + (k + m - 1,)
            counts = np.diff(cuts) - 1
            yield (counts / k).reshape(ch.x1_size, ch.x2_size)


def _eval_chunk(args) -> list[tuple[float, float]]:
    ch, kind, items = args
    out: list[tuple[float, float]] = []
    for item in items:
        if kind == INNER_FEEDBACK:
            b = inner_point(ch, item)
            if b.feasible:
                out.append(b.corner().as_tuple())
        elif kind == INNER_NOFEEDBACK:
            poly = nofeedback_point(ch, item)
            out.extend(v.as_tuple() for v in poly.vertices())
            axis = poly.public_only_point()
            if axis is not None:
                out.append(axis.as_tuple())
        else:
            out.append(outer_common_output_point(ch, item).as_tuple())
    return out


def default_workers() -> int:
    """Worker count from ``SECRECY_REGIONS_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("SECRECY_REGIONS_THREADS", "")
    try:
        n = int(raw) if raw else 1
    except ValueError:
        n = 1
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def sweep(
    ch: TwoWayChannel,
    grid: GridSpec | None = None,
    kind: str = INNER_FEEDBACK,
    *,
    workers: int = 1,
) -> RateRegion:
    """Evaluate ``kind`` over every policy of ``grid`` and hull the results.

    Infeasible policies are skipped. Outer sweeps range over correlated input
    laws and need a channel with ``Y1 = Y2 = Z``.
    """
    grid = grid or GridSpec()
    if kind not in KINDS:
        raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == OUTER:
        if not has_common_output(ch):
            raise NotCommonOutput("outer sweeps need a channel with Y1 = Y2 = Z")
        items: list = list(grid.input_laws(ch))
    else:
        items = list(grid.policies(ch))

    if workers > 1 and len(items) > 64:
        size = math.ceil(len(items) / (workers * 4))
        chunks = [(ch, kind, items[i : i + size]) for i in range(0, len(items), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_chunk, chunks))
        raw = [pt for chunk in results for pt in chunk]
    else:
        raw = _eval_chunk((ch, kind, items))

    if not raw:
        raise EmptyRegion(f"no feasible policy for {kind} on {ch.name or 'channel'}")
    pts = [RatePoint(x, y) for x, y in sorted(set(raw))]
    return RateRegion.from_points(pts, kind, grid.to_dict())
