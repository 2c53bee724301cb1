"""Desk-scale simulation of the block-Markov key-chaining scheme.

User 1 splits each secret message into a keyed part ``m1u`` and a binned
part ``m1s``. The keyed part is one-time-padded with the key user 2 sent in
the previous block; user 2 sends a fresh key together with its public
message in every block. Both codebooks are random binning codebooks, and
both receivers use joint-typicality decoding against their own channel
input.

Indices are 0-based. Block numbers ``j`` run from 1 to ``b``; user 1 is
silent in block 1 (it transmits the all-zero input sequence).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .channels import TwoWayChannel
from .errors import (
    CapacityOverflow,
    CapExceeded,
    DimensionMismatch,
    IndexOutOfRange,
    NondeterministicChannel,
    PreconditionUnmet,
    ValidationError,
)
from .info import InputPolicy, joint_from_policy, mutual_info

RATE_NAMES = ("r1u", "r1s", "r1x", "r2", "r2k", "r2x")
LEAKAGE_MODES = ("auto", "exact", "estimate", "off")
DEFAULT_CAP = 2**24


def _default_policy() -> InputPolicy:
    return InputPolicy.bernoulli(0.5, 0.5)


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation experiment.

    Every ``n * rate`` must be a non-negative integer so that all bins hold a
    power-of-two number of codewords. ``typicality_floor`` widens the
    per-cell typicality slack to that many binomial standard deviations;
    set it to 0 for the bare ``epsilon * max(p, 1/n)`` rule.

    Leakage and the equivocation check are averaged over the first
    ``leakage_trials`` and ``lemma_trials`` codebook draws (0 disables the
    check); decoding errors always use every trial.
    """

    n: int
    b: int = 3
    r1u: float = 0.0
    r1s: float = 0.0
    r1x: float = 0.0
    r2: float = 0.0
    r2k: float = 0.0
    r2x: float = 0.0
    policy: InputPolicy = field(default_factory=_default_policy)
    epsilon: float = 0.1
    seed: int = 0
    trials: int = 2000
    cap: int = DEFAULT_CAP
    leakage: str = "auto"
    leakage_samples: int = 20000
    typicality_floor: float = 2.0
    leakage_trials: int = 100
    lemma_trials: int = 32

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValidationError(f"block length n must be a positive integer, got {self.n!r}")
        if not isinstance(self.b, (int, np.integer)) or self.b < 2:
            raise ValidationError(f"number of blocks b must be >= 2, got {self.b!r}")
        for name in RATE_NAMES:
            r = float(getattr(self, name))
            if r < 0 or not math.isfinite(r):
                raise ValidationError(f"{name} must be a non-negative number, got {r!r}")
            nr = r * self.n
            if abs(nr - round(nr)) > 1e-9:
                raise ValidationError(f"n*{name} = {nr} is not an integer")
        if self.r1u > self.r2k + 1e-12:
            raise ValidationError("the keyed rate r1u may not exceed the key rate r2k")
        if self.policy.q_card != 1:
            raise ValidationError("simulation supports |Q| = 1 only")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.trials < 1:
            raise ValidationError("trials must be positive")
        if self.leakage not in LEAKAGE_MODES:
            raise ValidationError(f"leakage must be one of {LEAKAGE_MODES}")
        if self.typicality_floor < 0:
            raise ValidationError("typicality_floor must be non-negative")
        if self.leakage_trials < 0 or self.lemma_trials < 0:
            raise ValidationError("leakage_trials and lemma_trials must be non-negative")

    def bits(self, name: str) -> int:
        return int(round(getattr(self, name) * self.n))

    def size(self, name: str) -> int:
        return 2 ** self.bits(name)

    @property
    def rbar1(self) -> float:
        return self.r1u + self.r1s + self.r1x

    @property
    def rbar2(self) -> float:
        return self.r2 + self.r2k + self.r2x

    @property
    def shape1(self) -> tuple[int, int, int]:
        return (self.size("r1u"), self.size("r1s"), self.size("r1x"))

    @property
    def shape2(self) -> tuple[int, int, int]:
        return (self.size("r2"), self.size("r2k"), self.size("r2x"))

    def tuple_count(self) -> int:
        """Index combinations across all ``b`` blocks (messages, keys, randomisation)."""
        per2 = math.prod(self.shape2)
        per1 = math.prod(self.shape1)
        return per2**self.b * per1 ** (self.b - 1)

    def echo(self) -> dict[str, Any]:
        d = {k: getattr(self, k) for k in ("n", "b") + RATE_NAMES}
        d.update(
            epsilon=self.epsilon,
            seed=int(self.seed),
            trials=self.trials,
            cap=self.cap,
            leakage=self.leakage,
            leakage_trials=self.leakage_trials,
            lemma_trials=self.lemma_trials,
            typicality_floor=self.typicality_floor,
            policy={
                "u1": self.policy.u1_given_q[0].tolist(),
                "u2": self.policy.u2_given_q[0].tolist(),
                "x1_given_u1": self.policy.x1_given_u1.tolist(),
                "x2_given_u2": self.policy.x2_given_u2.tolist(),
            },
        )
        return d


@dataclass(frozen=True, eq=False)
class CodebookPair:
    """Random binning codebooks of both users.

    ``c1[m1u, m1s, m1x]`` and ``c2[m2, k2, m2x]`` are length-``n`` sequences
    over the auxiliary alphabets.
    """

    c1: np.ndarray
    c2: np.ndarray
    policy: InputPolicy
    seed_material: tuple

    @property
    def n(self) -> int:
        return self.c1.shape[-1]

    @property
    def flat1(self) -> np.ndarray:
        return self.c1.reshape(-1, self.n)

    @property
    def flat2(self) -> np.ndarray:
        return self.c2.reshape(-1, self.n)

    @property
    def m1u_size(self) -> int:
        return self.c1.shape[0]

    @property
    def k2_size(self) -> int:
        return self.c2.shape[1]


@dataclass(frozen=True)
class DecodeFailure:
    """No codeword, or more than one, passed the typicality test."""

    reason: str
    candidates: int = 0


def _child_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def build_codebooks(cfg: SimConfig, trial: int = 0) -> CodebookPair:
    """Draw both codebooks i.i.d. from the policy's ``p(u1)`` and ``p(u2)``.

    The result is a deterministic function of ``(cfg.seed, trial)``.
    """
    n1, n2 = math.prod(cfg.shape1), math.prod(cfg.shape2)
    if max(n1, n2) > cfg.cap:
        raise CapacityOverflow(
            f"codebooks need {n1} and {n2} codewords, above the cap of {cfg.cap}; "
            "reduce n or the rates"
        )
    rng = _child_rng(cfg.seed, trial, 0)
    pu1 = cfg.policy.u1_given_q[0]
    pu2 = cfg.policy.u2_given_q[0]
    c1 = rng.choice(pu1.size, size=(n1, cfg.n), p=pu1).reshape(cfg.shape1 + (cfg.n,))
    c2 = rng.choice(pu2.size, size=(n2, cfg.n), p=pu2).reshape(cfg.shape2 + (cfg.n,))
    c1.setflags(write=False)
    c2.setflags(write=False)
    return CodebookPair(c1, c2, cfg.policy, (int(cfg.seed), trial))


def encrypt(m: int, k: int, modulus: int) -> int:
    return (m + k) % modulus


def decrypt(c: int, k: int, modulus: int) -> int:
    return (c - k) % modulus


def _prefix(seq: np.ndarray, table: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Pass a sequence through a memoryless prefix channel ``p(x|u)``."""
    rows = table[seq]
    if np.all(rows.max(axis=1) == 1.0):
        return rows.argmax(axis=1)
    cdf = np.cumsum(rows, axis=1)
    u = rng.random(seq.shape[0])[:, None]
    return np.minimum((u >= cdf).sum(axis=1), table.shape[1] - 1)


def _check(idx: int, size: int, what: str):
    if not 0 <= idx < size:
        raise IndexOutOfRange(f"{what}={idx} outside [0, {size})")


def encode_block(
    cb: CodebookPair,
    j: int,
    m1u: int,
    m1s: int,
    m2: int,
    k2_curr: int,
    k2_prev: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Channel inputs ``(x1, x2)`` of block ``j``.

    ``k2_prev`` is the key user 1 holds from block ``j - 1``; it is ignored in
    block 1, where user 1 sends zeros.
    """
    x1, x2, _, _ = _encode(cb, j, m1u, m1s, m2, k2_curr, k2_prev, rng)
    return x1, x2


def _encode(cb, j, m1u, m1s, m2, k2_curr, k2_prev, rng):
    M1u, M1s, M1x = cb.c1.shape[:3]
    M2, K2, M2x = cb.c2.shape[:3]
    _check(m2, M2, "m2")
    _check(k2_curr, K2, "k2_curr")
    m2x = int(rng.integers(M2x))
    u2 = cb.c2[m2, k2_curr, m2x]
    x2 = _prefix(u2, cb.policy.x2_given_u2, rng)
    if j <= 1:
        return np.zeros(cb.n, dtype=int), x2, None, (m2, k2_curr, m2x)
    _check(m1u, M1u, "m1u")
    _check(m1s, M1s, "m1s")
    _check(k2_prev, K2, "k2_prev")
    m1u_enc = encrypt(m1u, k2_prev, M1u)
    m1x = int(rng.integers(M1x))
    u1 = cb.c1[m1u_enc, m1s, m1x]
    x1 = _prefix(u1, cb.policy.x1_given_u1, rng)
    return x1, x2, (m1u_enc, m1s, m1x), (m2, k2_curr, m2x)


def transmit(ch: TwoWayChannel, x1: np.ndarray, x2: np.ndarray, rng: np.random.Generator):
    """Per-symbol draw of ``(y1, y2, z)`` from the channel law."""
    x1 = np.asarray(x1, dtype=int)
    x2 = np.asarray(x2, dtype=int)
    rows = ch.transitions.reshape(ch.x1_size, ch.x2_size, -1)[x1, x2]
    if ch.is_deterministic():
        flat = rows.argmax(axis=1)
    else:
        cdf = np.cumsum(rows, axis=1)
        u = rng.random(x1.shape[0])[:, None]
        flat = np.minimum((u >= cdf).sum(axis=1), rows.shape[1] - 1)
    y1, y2, z = np.unravel_index(flat, (ch.y1_size, ch.y2_size, ch.z_size))
    return y1, y2, z


@dataclass(frozen=True)
class DesignLaws:
    """Single-letter laws the typicality decoders compare against."""

    at_user2: np.ndarray  # p(u1, y2, x2)
    at_user1: np.ndarray  # p(u2, y1, x1)


def design_laws(ch: TwoWayChannel, policy: InputPolicy) -> DesignLaws:
    p = joint_from_policy(ch, policy)
    return DesignLaws(
        at_user2=p.marginal_table(["U1", "Y2", "X2"]),
        at_user1=p.marginal_table(["U2", "Y1", "X1"]),
    )


def typical_rows(codebook, y, x, design, epsilon, floor: float = 2.0) -> np.ndarray:
    """Indices of codewords jointly typical with the observed ``(y, x)``.

    A cell with zero design probability must stay empty. A cell with
    probability ``p > 0`` may deviate by ``epsilon * max(p, 1/n)`` or by
    ``floor`` binomial standard deviations, whichever is larger.
    """
    codebook = np.asarray(codebook)
    n = codebook.shape[1]
    nu, ny, nx = design.shape
    cells = nu * ny * nx
    idx = (codebook * ny + np.asarray(y)[None, :]) * nx + np.asarray(x)[None, :]
    offs = np.arange(codebook.shape[0])[:, None] * cells
    counts = np.bincount((idx + offs).ravel(), minlength=codebook.shape[0] * cells)
    freq = counts.reshape(codebook.shape[0], cells) / n
    p = design.reshape(-1)
    tol = epsilon * np.maximum(p, 1.0 / n)
    if floor > 0:
        tol = np.maximum(tol, floor * np.sqrt(p * (1 - p) / n))
    tol = np.where(p > 0, tol, 0.0) + 1e-12
    ok = np.all(np.abs(freq - p) <= tol, axis=1)
    return np.flatnonzero(ok)


def decode_user2(cb: CodebookPair, y2, x2, k2_prev: int, epsilon: float, design: DesignLaws, floor: float = 2.0):
    """Recover ``(m1u, m1s)`` at user 2, removing the one-time pad."""
    rows = typical_rows(cb.flat1, y2, x2, design.at_user2, epsilon, floor)
    if rows.size != 1:
        return DecodeFailure("none" if rows.size == 0 else "ambiguous", int(rows.size))
    m1u_enc, m1s, _ = np.unravel_index(rows[0], cb.c1.shape[:3])
    return decrypt(int(m1u_enc), int(k2_prev), cb.m1u_size), int(m1s)


def decode_user1(cb: CodebookPair, y1, x1, epsilon: float, design: DesignLaws, floor: float = 2.0):
    """Recover ``(m2, k2)`` at user 1."""
    rows = typical_rows(cb.flat2, y1, x1, design.at_user1, epsilon, floor)
    if rows.size != 1:
        return DecodeFailure("none" if rows.size == 0 else "ambiguous", int(rows.size))
    m2, k2, _ = np.unravel_index(rows[0], cb.c2.shape[:3])
    return int(m2), int(k2)


# ---------------------------------------------------------------------------
# exact leakage


def _eve_kernel(ch: TwoWayChannel, policy: InputPolicy) -> tuple[np.ndarray, np.ndarray]:
    """``p(z | u1, u2)`` for regular blocks and ``p(z | u2)`` for block 1."""
    w = ch.eavesdropper_law()
    k = np.einsum("ax,by,xyz->abz", policy.x1_given_u1, policy.x2_given_u2, w)
    k1 = np.einsum("by,yz->bz", policy.x2_given_u2, w[0])
    return k, k1


def _sequence_law(kernel: np.ndarray, *seqs: np.ndarray) -> np.ndarray:
    """``p(z^n | codeword tuple)`` as a dense table over all tuples and all ``z^n``."""
    n = seqs[0].shape[1]
    nz = kernel.shape[-1]
    sizes = [s.shape[0] for s in seqs]
    out = np.ones(sizes + [1])
    for i in range(n):
        grids = np.ix_(*[s[:, i] for s in seqs])
        sym = kernel[grids]
        out = (out[..., :, None] * sym[..., None, :]).reshape(sizes + [-1])
    assert out.shape[-1] == nz**n
    return out


def _check_exact(ch: TwoWayChannel, cfg: SimConfig):
    if not ch.is_deterministic():
        raise NondeterministicChannel(
            "exact leakage needs a deterministic channel; use the estimated mode"
        )
    count = cfg.tuple_count()
    if count > cfg.cap:
        raise CapExceeded(
            f"exact leakage would enumerate {count} index tuples, above the cap of {cfg.cap}"
        )


def _mi_from_joint(j: np.ndarray) -> float:
    """``I(A;B)`` in bits for a 2-d joint table."""
    pa = j.sum(axis=1, keepdims=True)
    pb = j.sum(axis=0, keepdims=True)
    mask = j > 0
    ratio = j[mask] / (pa * pb)[mask]
    v = float(np.sum(j[mask] * np.log2(ratio)))
    return 0.0 if abs(v) < 1e-12 else v


def exact_leakage(cb: CodebookPair, ch: TwoWayChannel, cfg: SimConfig) -> float:
    """``(1/n) I((M1)_2^b ; Z^b | C1, C2)`` by exhaustive enumeration.

    Keys are assumed to reach user 1 correctly (the leakage is a property of
    the code, not of decoding luck). All message, key and randomisation
    indices are uniform and independent.
    """
    _check_exact(ch, cfg)
    kern, kern1 = _eve_kernel(ch, cb.policy)
    M1u, M1s, M1x = cb.c1.shape[:3]
    M2, K2, M2x = cb.c2.shape[:3]
    S = M1u * M1s
    zn = ch.z_size**cb.n
    if S ** (cfg.b - 1) * zn**cfg.b * K2 > cfg.cap * 16:
        raise CapExceeded("posterior table over (messages, z^b) exceeds the cap")

    p1 = _sequence_law(kern1, cb.flat2).reshape(M2, K2, M2x, zn)
    first = p1.mean(axis=(0, 2))  # [k, z]
    pair = _sequence_law(kern, cb.flat1, cb.flat2).reshape(M1u, M1s, M1x, M2, K2, M2x, zn)
    q = pair.mean(axis=(2, 3, 5))  # [m1u_enc, m1s, kcur, z]
    shift = (np.arange(M1u)[:, None] + np.arange(K2)[None, :]) % M1u  # [m1u, kprev]
    kernel = q[shift]  # [m1u, kprev, m1s, kcur, z]
    kernel = kernel.transpose(0, 2, 1, 3, 4).reshape(S, K2, K2, zn)

    # forward pass: F[s-history, z-history, k_current]
    f = (first / K2).T[None, :, :]  # [1, z1, k1]
    for _ in range(2, cfg.b + 1):
        f = np.einsum("azk,skcw->aszwc", f, kernel) / (S * K2)
        a, s, z0, w, c = f.shape
        f = f.reshape(a * s, z0 * w, c)
    joint = f.sum(axis=2)
    return _mi_from_joint(joint) / cb.n


def joint_leakage_exact(cb: CodebookPair, ch: TwoWayChannel, cfg: SimConfig) -> float:
    """``(1/n) I(M1, M2 ; Z)`` within one regular block, key uniform."""
    if not ch.is_deterministic():
        raise NondeterministicChannel("exact leakage needs a deterministic channel")
    size = cb.flat1.shape[0] * cb.flat2.shape[0] * ch.z_size**cb.n
    if size > cfg.cap:
        raise CapExceeded(f"single-block table of {size} entries exceeds the cap")
    kern, _ = _eve_kernel(ch, cb.policy)
    M1u, M1s, M1x = cb.c1.shape[:3]
    M2, K2, M2x = cb.c2.shape[:3]
    pair = _sequence_law(kern, cb.flat1, cb.flat2).reshape(M1u, M1s, M1x, M2, K2, M2x, -1)
    # the padded index is uniform and independent of m1u, so m1u drops out
    t = pair.mean(axis=(0, 2, 4, 5)) / (M1s * M2)
    return _mi_from_joint(t.reshape(M1s * M2, -1)) / cb.n


def _plugin_mi(labels_a: np.ndarray, labels_b: np.ndarray) -> float:
    _, a = np.unique(labels_a, axis=0, return_inverse=True)
    _, b = np.unique(labels_b, axis=0, return_inverse=True)
    a, b = a.ravel(), b.ravel()
    counts = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(counts, (a, b), 1.0)
    return _mi_from_joint(counts / counts.sum())


def _sample_blocks(cb, ch, cfg, rng, samples):
    """Vectorised draw of secret messages and eavesdropper observations over b blocks."""
    M1u, M1s, M1x = cb.c1.shape[:3]
    M2, K2, M2x = cb.c2.shape[:3]
    n = cb.n
    wz = ch.eavesdropper_law()
    keys = rng.integers(K2, size=(samples, cfg.b))
    secrets, zs = [], []
    for j in range(1, cfg.b + 1):
        m2 = rng.integers(M2, size=samples)
        m2x = rng.integers(M2x, size=samples)
        u2 = cb.c2[m2, keys[:, j - 1], m2x]
        x2 = _prefix_many(u2, cb.policy.x2_given_u2, rng)
        if j == 1:
            x1 = np.zeros_like(x2)
        else:
            m1u = rng.integers(M1u, size=samples)
            m1s = rng.integers(M1s, size=samples)
            m1x = rng.integers(M1x, size=samples)
            u1 = cb.c1[(m1u + keys[:, j - 2]) % M1u, m1s, m1x]
            x1 = _prefix_many(u1, cb.policy.x1_given_u1, rng)
            secrets.append(m1u * M1s + m1s)
        rows = wz[x1, x2]
        cdf = np.cumsum(rows, axis=-1)
        u = rng.random(x1.shape)[..., None]
        zs.append(np.minimum((u >= cdf).sum(axis=-1), wz.shape[-1] - 1))
    return np.stack(secrets, axis=1), np.concatenate(zs, axis=1)


def _prefix_many(u: np.ndarray, table: np.ndarray, rng) -> np.ndarray:
    rows = table[u]
    if np.all(table.max(axis=1) == 1.0):
        return rows.argmax(axis=-1)
    cdf = np.cumsum(rows, axis=-1)
    r = rng.random(u.shape)[..., None]
    return np.minimum((r >= cdf).sum(axis=-1), table.shape[1] - 1)


def estimate_leakage(cb: CodebookPair, ch: TwoWayChannel, cfg: SimConfig, rng, samples: int | None = None) -> float:
    """Plug-in estimate of the one-sided leakage rate from sampled transmissions.

    Biased upward at small sample sizes relative to the alphabet of ``z^b``.
    """
    samples = samples or cfg.leakage_samples
    s, z = _sample_blocks(cb, ch, cfg, rng, samples)
    return max(0.0, _plugin_mi(s, z)) / cb.n


# ---------------------------------------------------------------------------
# equivocation lemma


@dataclass(frozen=True)
class Lemma1Check:
    lhs: float
    rhs: float
    holds: bool


def lemma_delta(cfg: SimConfig, ch: TwoWayChannel) -> float:
    """Slack ``4 eps log2(|U1||U2||Z|) + 2/n`` added to the lemma's bound."""
    card = cfg.policy.u1_card * cfg.policy.u2_card * ch.z_size
    return 4 * cfg.epsilon * math.log2(card) + 2.0 / cfg.n


def lemma1_bound_check(cb: CodebookPair, ch: TwoWayChannel, cfg: SimConfig) -> Lemma1Check:
    """Compare ``H(L1, L2 | Z^n)`` with ``n (Rbar1 + Rbar2 - I(U1,U2;Z) + delta)``.

    ``L1`` and ``L2`` are uniform over the full codebooks and the block is a
    regular one (both users transmit).
    """
    p = joint_from_policy(ch, cfg.policy)
    iz = mutual_info(p, ("U1", "U2"), "Z")
    iz1 = mutual_info(p, "U1", "Z")
    iz2 = mutual_info(p, "U2", "Z")
    tol = 1e-12
    r1, r2 = cfg.rbar1, cfg.rbar2
    if r1 + r2 < iz - tol or r1 < iz1 - tol or r2 < iz2 - tol:
        raise PreconditionUnmet(
            f"rates (Rbar1={r1}, Rbar2={r2}) violate the lemma hypotheses "
            f"(I(U1U2;Z)={iz:.4f}, I(U1;Z)={iz1:.4f}, I(U2;Z)={iz2:.4f})"
        )
    n1, n2 = cb.flat1.shape[0], cb.flat2.shape[0]
    size = n1 * n2 * ch.z_size**cb.n
    if size > cfg.cap:
        raise CapExceeded(f"posterior table of {size} entries exceeds the cap")
    kern, _ = _eve_kernel(ch, cb.policy)
    pz_l = _sequence_law(kern, cb.flat1, cb.flat2).reshape(n1 * n2, -1)
    pz = pz_l.mean(axis=0)
    h_l = math.log2(n1 * n2)
    # H(L|Z) = H(L) - H(Z) + H(Z|L)
    h_z = float(-np.sum(pz[pz > 0] * np.log2(pz[pz > 0])))
    nz = pz_l > 0
    h_z_l = float(-np.sum(pz_l[nz] * np.log2(pz_l[nz]))) / (n1 * n2)
    lhs = max(0.0, h_l - h_z + h_z_l)
    rhs = cfg.n * (r1 + r2 - iz + lemma_delta(cfg, ch))
    return Lemma1Check(lhs=lhs, rhs=rhs, holds=lhs <= rhs + 1e-12)


# ---------------------------------------------------------------------------
# experiment driver


@dataclass(frozen=True)
class SimReport:
    pe1: float
    pe2: float
    leakage_onesided: float | None
    leakage_joint: float | None
    leakage_mode: str
    equivocation_lhs: float | None
    equivocation_rhs: float | None
    lemma_status: str
    trials: int
    seed: int
    config: dict = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _leakage_mode(ch: TwoWayChannel, cfg: SimConfig) -> str:
    if cfg.leakage != "auto":
        return cfg.leakage
    if ch.is_deterministic() and cfg.tuple_count() <= cfg.cap:
        return "exact"
    return "estimate"


def run_experiment(ch: TwoWayChannel, cfg: SimConfig) -> SimReport:
    """Run ``cfg.trials`` independent codebook/message draws over ``b`` blocks.

    Decoding errors are averaged per block: user 1's over blocks 1..b, user
    2's over blocks 2..b. A failed key decode at user 1 makes it encrypt with
    a wrong key, which then shows up as an error at user 2.
    """
    pol = cfg.policy
    if pol.x1_card != ch.x1_size or pol.x2_card != ch.x2_size:
        raise DimensionMismatch("policy inputs do not match the channel")
    design = design_laws(ch, pol)
    mode = _leakage_mode(ch, cfg)
    if cfg.leakage_trials == 0:
        mode = "off"
    if mode == "exact":
        _check_exact(ch, cfg)

    M1u, M1s, _ = cfg.shape1
    M2, K2, _ = cfg.shape2
    err1 = err2 = 0
    leak, leak_joint, lhs_vals, rhs_vals = [], [], [], []
    lemma_status = "ok"

    for t in range(cfg.trials):
        cb = build_codebooks(cfg, trial=t)
        rng = _child_rng(cfg.seed, t, 1)
        k_true = rng.integers(K2, size=cfg.b + 1)
        k_user1 = 0
        for j in range(1, cfg.b + 1):
            m2 = int(rng.integers(M2))
            m1u = int(rng.integers(M1u)) if j > 1 else 0
            m1s = int(rng.integers(M1s)) if j > 1 else 0
            x1, x2 = encode_block(cb, j, m1u, m1s, m2, int(k_true[j]), k_user1, rng)
            y1, y2, _ = transmit(ch, x1, x2, rng)
            got1 = decode_user1(cb, y1, x1, cfg.epsilon, design, cfg.typicality_floor)
            if isinstance(got1, DecodeFailure):
                err1 += 1
                k_user1 = 0
            else:
                err1 += got1[0] != m2
                k_user1 = got1[1]
            if j > 1:
                got2 = decode_user2(cb, y2, x2, int(k_true[j - 1]), cfg.epsilon, design, cfg.typicality_floor)
                err2 += isinstance(got2, DecodeFailure) or got2 != (m1u, m1s)

        if mode == "exact" and t < cfg.leakage_trials:
            leak.append(exact_leakage(cb, ch, cfg))
            try:
                leak_joint.append(joint_leakage_exact(cb, ch, cfg))
            except CapExceeded:
                pass
        elif mode == "estimate" and t < min(8, cfg.leakage_trials):
            erng = _child_rng(cfg.seed, t, 2)
            leak.append(estimate_leakage(cb, ch, cfg, erng))

        if lemma_status == "ok" and t < cfg.lemma_trials:
            try:
                res = lemma1_bound_check(cb, ch, cfg)
                lhs_vals.append(res.lhs)
                rhs_vals.append(res.rhs)
            except PreconditionUnmet:
                lemma_status = "precondition_unmet"
            except CapExceeded:
                lemma_status = "cap_exceeded"

    if lemma_status == "ok" and not lhs_vals:
        lemma_status = "off"
    if lemma_status == "ok":
        lhs = float(np.mean(lhs_vals))
        rhs = float(np.mean(rhs_vals))
        lemma_status = "holds" if lhs <= rhs + 1e-12 else "violated"
    else:
        lhs = rhs = None
    return SimReport(
        pe1=err1 / (cfg.trials * cfg.b),
        pe2=err2 / (cfg.trials * (cfg.b - 1)),
        leakage_onesided=float(np.mean(leak)) if leak else None,
        leakage_joint=float(np.mean(leak_joint)) if leak_joint else None,
        leakage_mode={"exact": "exact", "estimate": "estimated"}.get(mode, "off"),
        equivocation_lhs=lhs,
        equivocation_rhs=rhs,
        lemma_status=lemma_status,
        trials=cfg.trials,
        seed=int(cfg.seed),
        config=cfg.echo(),
    )
