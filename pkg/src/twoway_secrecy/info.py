"""Exact entropy and mutual information on labelled joint tables.

All logarithms are base 2. Conditional quantities are always assembled from
joint entropies, so no conditional table is ever divided out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channels import TwoWayChannel
from .errors import (
    DimensionMismatch,
    OverlappingSets,
    UnknownVariable,
    ValidationError,
)

PMF_TOL = 1e-12
MI_CLAMP = 1e-12

#: Variable order of the joint law built by :func:`joint_from_policy`.
JOINT_VARS = ("Q", "U1", "U2", "X1", "X2", "Y1", "Y2", "Z")


def _entropy_of_table(t: np.ndarray) -> float:
    p = t[t > 0]
    return float(-np.sum(p * np.log2(p)))


class Pmf:
    """Joint probability table over named discrete variables.

    Parameters
    ----------
    variables : sequence of (str, int)
        Variable names with their cardinalities, one per table axis.
    table : array_like
        Non-negative probabilities summing to one.
    """

    __slots__ = ("_names", "_cards", "_table", "_axis")

    def __init__(self, variables: Sequence[tuple[str, int]], table, *, tol: float = PMF_TOL):
        names = tuple(str(v[0]) for v in variables)
        cards = tuple(int(v[1]) for v in variables)
        if len(set(names)) != len(names):
            raise ValidationError(f"variable names must be unique: {names}")
        if any(c < 1 for c in cards):
            raise ValidationError("cardinalities must be positive")
        t = np.array(table, dtype=float)
        if t.shape != cards:
            raise DimensionMismatch(f"table shape {t.shape} does not match cardinalities {cards}")
        if np.any(t < 0):
            raise ValidationError("probabilities must be non-negative")
        total = t.sum()
        if abs(total - 1.0) > tol:
            raise ValidationError(f"probabilities sum to {total!r}, expected 1")
        t.setflags(write=False)
        self._names = names
        self._cards = cards
        self._table = t
        self._axis = {n: i for i, n in enumerate(names)}

    @property
    def variables(self) -> tuple[tuple[str, int], ...]:
        return tuple(zip(self._names, self._cards))

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def table(self) -> np.ndarray:
        return self._table

    def card(self, name: str) -> int:
        return self._cards[self._axes([name])[0]]

    def _axes(self, names: Iterable[str]) -> list[int]:
        out = []
        for n in names:
            try:
                out.append(self._axis[n])
            except KeyError:
                raise UnknownVariable(f"unknown variable {n!r}; have {self._names}") from None
        return out

    def marginal_table(self, names: Iterable[str]) -> np.ndarray:
        """Marginal over ``names`` with axes in the order given."""
        names = list(names)
        axes = self._axes(names)
        drop = tuple(i for i in range(len(self._names)) if i not in axes)
        t = self._table.sum(axis=drop) if drop else self._table
        kept = sorted(axes)
        return np.transpose(t, [kept.index(a) for a in axes])

    def marginal(self, names: Iterable[str]) -> "Pmf":
        names = list(names)
        t = self.marginal_table(names)
        return Pmf([(n, self.card(n)) for n in names], t, tol=1e-9)

    def __repr__(self):
        vs = ", ".join(f"{n}:{c}" for n, c in self.variables)
        return f"Pmf({vs})"


def _as_names(vars) -> tuple[str, ...]:
    if isinstance(vars, str):
        return (vars,)
    return tuple(vars)


def _disjoint(*sets: tuple[str, ...]):
    seen: set[str] = set()
    for s in sets:
        dup = seen.intersection(s)
        if dup:
            raise OverlappingSets(f"variable sets overlap on {sorted(dup)}")
        seen.update(s)


def entropy(p: Pmf, vars) -> float:
    """Entropy in bits of the marginal of ``p`` on ``vars``.

    An empty variable set has zero entropy.
    """
    names = _as_names(vars)
    if not names:
        return 0.0
    return _entropy_of_table(p.marginal_table(dict.fromkeys(names)))


def conditional_entropy(p: Pmf, a, given=()) -> float:
    """``H(A | B) = H(A, B) - H(B)``, clamped at zero."""
    a, b = _as_names(a), _as_names(given)
    p._axes(a + b)
    _disjoint(a, b)
    h = entropy(p, a + b) - entropy(p, b)
    return 0.0 if h < 0 and h > -MI_CLAMP else h


def mutual_info(p: Pmf, a, b, given=()) -> float:
    """``I(A; B | C) = H(A, C) + H(B, C) - H(A, B, C) - H(C)``.

    Values within 1e-12 below zero are rounding noise and returned as 0.
    """
    a, b, c = _as_names(a), _as_names(b), _as_names(given)
    p._axes(a + b + c)
    _disjoint(a, b, c)
    v = entropy(p, a + c) + entropy(p, b + c) - entropy(p, a + b + c) - entropy(p, c)
    if abs(v) < MI_CLAMP:
        return 0.0
    return v


def _check_stochastic(m: np.ndarray, what: str, tol: float = PMF_TOL) -> np.ndarray:
    m = np.array(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch(f"{what} must be a 2-d table, got shape {m.shape}")
    if np.any(m < 0):
        raise ValidationError(f"{what} has negative entries")
    bad = np.abs(m.sum(axis=1) - 1.0) > tol
    if np.any(bad):
        raise ValidationError(f"{what} row {int(np.argmax(bad))} does not sum to 1")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class InputPolicy:
    """Factored input law ``p(q) p(u1|q) p(u2|q) p(x1|u1) p(x2|u2)``.

    Every conditional table is row-stochastic; rows are indexed by the
    conditioning variable.
    """

    q_weights: np.ndarray
    u1_given_q: np.ndarray
    u2_given_q: np.ndarray
    x1_given_u1: np.ndarray
    x2_given_u2: np.ndarray

    def __post_init__(self):
        q = np.array(self.q_weights, dtype=float).reshape(-1)
        if q.size < 1 or np.any(q < 0) or abs(q.sum() - 1.0) > PMF_TOL:
            raise ValidationError("q_weights must be a probability vector")
        q.setflags(write=False)
        object.__setattr__(self, "q_weights", q)
        for name in ("u1_given_q", "u2_given_q", "x1_given_u1", "x2_given_u2"):
            object.__setattr__(self, name, _check_stochastic(getattr(self, name), name))
        nq = q.size
        if self.u1_given_q.shape[0] != nq or self.u2_given_q.shape[0] != nq:
            raise DimensionMismatch("u|q tables need one row per value of Q")
        if self.x1_given_u1.shape[0] != self.u1_given_q.shape[1]:
            raise DimensionMismatch("x1|u1 rows must match |U1|")
        if self.x2_given_u2.shape[0] != self.u2_given_q.shape[1]:
            raise DimensionMismatch("x2|u2 rows must match |U2|")

    @property
    def q_card(self) -> int:
        return self.q_weights.size

    @property
    def u1_card(self) -> int:
        return self.u1_given_q.shape[1]

    @property
    def u2_card(self) -> int:
        return self.u2_given_q.shape[1]

    @property
    def x1_card(self) -> int:
        return self.x1_given_u1.shape[1]

    @property
    def x2_card(self) -> int:
        return self.x2_given_u2.shape[1]

    @classmethod
    def identity(cls, px1, px2) -> "InputPolicy":
        """``|Q| = 1``, ``U1 = X1 ~ px1``, ``U2 = X2 ~ px2``."""
        px1 = np.asarray(px1, dtype=float)
        px2 = np.asarray(px2, dtype=float)
        return cls(
            [1.0],
            px1[None, :],
            px2[None, :],
            np.eye(px1.size),
            np.eye(px2.size),
        )

    @classmethod
    def bernoulli(cls, p1: float, p2: float, c1: float = 0.0, c2: float = 0.0) -> "InputPolicy":
        """Binary policy with ``U_i ~ Bern(p_i)`` and BSC(c_i) prefixes."""
        return cls(
            [1.0],
            [[1 - p1, p1]],
            [[1 - p2, p2]],
            [[1 - c1, c1], [c1, 1 - c1]],
            [[1 - c2, c2], [c2, 1 - c2]],
        )

    def input_law(self) -> np.ndarray:
        """Induced joint ``p(x1, x2)``."""
        px1 = np.einsum("q,qa,ax->qx", self.q_weights, self.u1_given_q, self.x1_given_u1)
        px2 = np.einsum("qb,by->qy", self.u2_given_q, self.x2_given_u2)
        return np.einsum("qx,qy->xy", px1, px2)


def joint_from_policy(ch: TwoWayChannel, pol: InputPolicy) -> Pmf:
    """Full joint law over ``(Q, U1, U2, X1, X2, Y1, Y2, Z)``."""
    if pol.x1_card != ch.x1_size or pol.x2_card != ch.x2_size:
        raise DimensionMismatch(
            f"policy inputs ({pol.x1_card}, {pol.x2_card}) do not match channel "
            f"inputs ({ch.x1_size}, {ch.x2_size})"
        )
    t = np.einsum(
        "q,qa,qb,ax,by,xyijk->qabxyijk",
        pol.q_weights,
        pol.u1_given_q,
        pol.u2_given_q,
        pol.x1_given_u1,
        pol.x2_given_u2,
        ch.transitions,
        optimize=True,
    )
    cards = t.shape
    return Pmf(list(zip(JOINT_VARS, cards)), t, tol=1e-9)


def joint_from_inputs(ch: TwoWayChannel, px1x2) -> Pmf:
    """Joint over ``(X1, X2, Y1, Y2, Z)`` for an arbitrary input law."""
    px = np.asarray(px1x2, dtype=float)
    if px.shape != (ch.x1_size, ch.x2_size):
        raise DimensionMismatch(f"input law shape {px.shape} does not match channel inputs")
    t = px[:, :, None, None, None] * ch.transitions
    names = ("X1", "X2", "Y1", "Y2", "Z")
    return Pmf(list(zip(names, t.shape)), t, tol=1e-9)
