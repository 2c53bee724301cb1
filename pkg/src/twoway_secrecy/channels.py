"""Discrete memoryless two-way wiretap channels.

A channel is a dense tensor ``W[x1, x2, y1, y2, z] = p(y1, y2, z | x1, x2)``.
The three binary-input examples (multiplying, XOR and adder channels) are
available as builtins; every builtin gives all three terminals the same
deterministic output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import SchemaError, ValidationError

ROW_TOL = 1e-9

_SIZE_FIELDS = ("x1_size", "x2_size", "y1_size", "y2_size", "z_size")


@dataclass(frozen=True, eq=False)
class TwoWayChannel:
    """Transition law ``p(y1, y2, z | x1, x2)`` stored as a read-only tensor.

    Parameters
    ----------
    transitions : array_like, shape (|X1|, |X2|, |Y1|, |Y2|, |Z|)
        Conditional probabilities; every ``(x1, x2)`` slice must sum to one.
    name : str, optional
        Free-form label.
    """

    transitions: np.ndarray
    name: str = ""

    def __post_init__(self):
        w = np.array(self.transitions, dtype=float)
        if w.ndim != 5:
            raise ValidationError(f"transition tensor must have 5 axes, got {w.ndim}")
        if min(w.shape) < 1:
            raise ValidationError("all alphabet sizes must be >= 1")
        if not np.all(np.isfinite(w)):
            raise ValidationError("transition probabilities must be finite")
        if np.any(w < 0):
            raise ValidationError("transition probabilities must be non-negative")
        sums = w.reshape(w.shape[0], w.shape[1], -1).sum(axis=2)
        bad = np.argwhere(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            x1, x2 = bad[0]
            raise ValidationError(
                f"row (x1={x1}, x2={x2}) sums to {sums[x1, x2]!r}, expected 1"
            )
        w.setflags(write=False)
        object.__setattr__(self, "transitions", w)

    @property
    def x1_size(self) -> int:
        return self.transitions.shape[0]

    @property
    def x2_size(self) -> int:
        return self.transitions.shape[1]

    @property
    def y1_size(self) -> int:
        return self.transitions.shape[2]

    @property
    def y2_size(self) -> int:
        return self.transitions.shape[3]

    @property
    def z_size(self) -> int:
        return self.transitions.shape[4]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.transitions.shape

    def __eq__(self, other):
        if not isinstance(other, TwoWayChannel):
            return NotImplemented
        return (
            self.name == other.name
            and self.shape == other.shape
            and np.array_equal(self.transitions, other.transitions)
        )

    def __hash__(self):
        return hash((self.name, self.shape, self.transitions.tobytes()))

    def is_deterministic(self) -> bool:
        """True when each input pair maps to a single output triple."""
        rows = self.transitions.reshape(self.x1_size, self.x2_size, -1)
        return bool(np.all(np.isclose(rows.max(axis=2), 1.0, rtol=0, atol=ROW_TOL)))

    def eavesdropper_law(self) -> np.ndarray:
        """Marginal ``p(z | x1, x2)`` with shape (|X1|, |X2|, |Z|)."""
        return self.transitions.sum(axis=(2, 3))

    def user1_law(self) -> np.ndarray:
        """Marginal ``p(y1 | x1, x2)``."""
        return self.transitions.sum(axis=(3, 4))

    def user2_law(self) -> np.ndarray:
        """Marginal ``p(y2 | x1, x2)``."""
        return self.transitions.sum(axis=(2, 4))

    def deterministic_map(self) -> np.ndarray:
        """For a deterministic channel, flat output index per ``(x1, x2)``.

        The flat index enumerates ``(y1, y2, z)`` in row-major order.
        """
        if not self.is_deterministic():
            raise ValidationError("channel is not deterministic")
        rows = self.transitions.reshape(self.x1_size, self.x2_size, -1)
        return rows.argmax(axis=2)

    def to_dict(self) -> dict[str, Any]:
        """Serialise to the JSON-compatible channel schema."""
        rows = self.transitions.reshape(self.x1_size * self.x2_size, -1)
        doc: dict[str, Any] = {"name": self.name}
        doc.update(zip(_SIZE_FIELDS, (int(s) for s in self.shape)))
        doc["rows"] = [[float(v) for v in row] for row in rows]
        return doc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _deterministic(name: str, fn, x1_size: int, x2_size: int, out_size: int) -> TwoWayChannel:
    w = np.zeros((x1_size, x2_size, out_size, out_size, out_size))
    for x1 in range(x1_size):
        for x2 in range(x2_size):
            o = fn(x1, x2)
            w[x1, x2, o, o, o] = 1.0
    return TwoWayChannel(w, name=name)


def builtin_bmc() -> TwoWayChannel:
    """Binary multiplying channel, ``Y1 = Y2 = Z = X1 * X2``."""
    return _deterministic("bmc", lambda a, b: a * b, 2, 2, 2)


def builtin_xor() -> TwoWayChannel:
    """Binary XOR channel, ``Y1 = Y2 = Z = X1 xor X2``."""
    return _deterministic("xor", lambda a, b: a ^ b, 2, 2, 2)


def builtin_adder() -> TwoWayChannel:
    """Binary adder channel with ternary output, ``Y1 = Y2 = Z = X1 + X2``."""
    return _deterministic("adder", lambda a, b: a + b, 2, 2, 3)


BUILTINS = {
    "bmc": builtin_bmc,
    "xor": builtin_xor,
    "adder": builtin_adder,
}


def get_builtin(name: str) -> TwoWayChannel:
    try:
        return BUILTINS[name.lower()]()
    except KeyError:
        raise KeyError(f"unknown builtin channel {name!r}; choose from {sorted(BUILTINS)}") from None


def _positive_int(doc: Mapping[str, Any], key: str) -> int:
    if key not in doc:
        raise SchemaError(f"missing field {key!r}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise SchemaError(f"field {key!r} must be a positive integer, got {v!r}")
    return v


def load_channel(document: str | bytes | Mapping[str, Any]) -> TwoWayChannel:
    """Parse and validate a channel document.

    ``document`` may be a JSON string or an already-decoded mapping.

    Raises
    ------
    SchemaError
        Malformed document: bad JSON, missing fields, wrong row shapes.
    ValidationError
        Negative entries or rows that do not sum to one within 1e-9.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise SchemaError("channel document must be an object")

    sizes = [_positive_int(doc, k) for k in _SIZE_FIELDS]
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise SchemaError("field 'name' must be a string")
    rows = doc.get("rows")
    if not isinstance(rows, list):
        raise SchemaError("field 'rows' must be an array")
    x1, x2, y1, y2, z = sizes
    if len(rows) != x1 * x2:
        raise SchemaError(f"expected {x1 * x2} rows, got {len(rows)}")
    width = y1 * y2 * z
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != width:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise SchemaError(f"row {i} must have {width} entries, got {got}")
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SchemaError(f"row {i} contains non-numeric entry {v!r}")
    w = np.asarray(rows, dtype=float).reshape(x1, x2, y1, y2, z)
    return TwoWayChannel(w, name=name)


def read_channel(path) -> TwoWayChannel:
    with open(path, encoding="utf-8") as fh:
        return load_channel(fh.read())


def resolve_channel(ref: str) -> TwoWayChannel:
    """A builtin name, or else a path to a channel document."""
    if ref.lower() in BUILTINS:
        return get_builtin(ref)
    return read_channel(ref)


def has_common_output(ch: TwoWayChannel) -> bool:
    """True iff all mass sits on triples with ``y1 == y2 == z``."""
    if not (ch.y1_size == ch.y2_size == ch.z_size):
        return False
    k = ch.z_size
    diag = np.zeros((k, k, k), dtype=bool)
    idx = np.arange(k)
    diag[idx, idx, idx] = True
    off = ch.transitions[..., ~diag]
    return bool(np.all(off <= ROW_TOL))
