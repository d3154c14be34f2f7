"""Deterministic pseudorandom walks over the two meet-in-the-middle sides.

A point is (x, b): x indexes a sequence of non-identity Paulis in base
xi = 4^n - 1, and the side tag b selects which half-product the point
represents.  Side 1 is the forward product of rotation channels (times the
chunk Pauli's rotation when the T-count is odd); side 2 is the transposed
product folded into the target channel.  One step hashes the coset label of
that product with a keyed 128-bit hash and reinterprets the digest as the
next point, so equal labels across sides collide into identical successors.

Trails run until a distinguished point (hash-selected with probability
2^-theta_exp) and are abandoned past a length cap, since a walk can fall
into a cycle containing no distinguished point.  Everything is a pure
function of (config, target), which is what makes single-worker runs
bit-reproducible and lets label results be memoized.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from hashlib import blake2b
from typing import Callable, Iterable, Iterator, NamedTuple

import numpy as np

from .coset import coset_label
from .exact import ChannelMatrix, _canonicalize
from .paulis import Pauli, check_qubit_count

SALT_BYTES = 8
HASH_NAME = "blake2b-128-pre"

_PERSON_SALT = b"salt"
_PERSON_LABEL = b"lbl"
_PERSON_STEP = b"step"
_PERSON_DP = b"dp"
_PERSON_START = b"start"


class Point(NamedTuple):
    x: int
    b: int


class TrailTriple(NamedTuple):
    start: Point
    end: Point
    length: int


@dataclass(frozen=True)
class CycleAbandoned:
    """A trail dropped without reaching a distinguished point."""

    start: Point
    steps: int
    reason: str  # "cycle" (length cap) or "budget" (caller-imposed limit)


@dataclass(frozen=True)
class WalkConfig:
    n: int
    t: int
    chunk: int
    theta_exp: int
    salt: bytes
    max_trail_factor: int = 20

    def __post_init__(self):
        check_qubit_count(self.n)
        if self.t < 2:
            raise ValueError("walks need t >= 2 (smaller t is scanned directly)")
        if not 0 <= self.chunk < self.xi:
            raise ValueError(f"chunk {self.chunk} outside [0, {self.xi})")
        if not 0 <= self.theta_exp <= 62:
            raise ValueError("theta_exp outside [0, 62]")
        if len(self.salt) != SALT_BYTES:
            raise ValueError(f"salt must be {SALT_BYTES} bytes")
        if self.max_trail_factor < 1:
            raise ValueError("max_trail_factor must be positive")
        if self.space >= 1 << 128:
            raise ValueError("side space exceeds 128 bits")

    @cached_property
    def xi(self) -> int:
        return 4**self.n - 1

    @cached_property
    def half(self) -> int:
        return self.t // 2

    @cached_property
    def space(self) -> int:
        return self.xi**self.half

    @cached_property
    def trail_cap(self) -> int:
        return self.max_trail_factor << self.theta_exp

    @cached_property
    def chunk_pauli(self) -> Pauli:
        return Pauli.from_index(self.chunk + 1, self.n)

    @cached_property
    def theta(self) -> float:
        return 2.0**-self.theta_exp


def derive_salt(seed: int, n: int, t: int, chunk: int, round_index: int) -> bytes:
    """Per-(run, chunk, round) salt; fresh rounds get fresh walk functions."""
    msg = struct.pack("<QIIII", seed & (2**64 - 1), n, t, chunk, round_index)
    return blake2b(msg, digest_size=SALT_BYTES, person=_PERSON_SALT).digest()


def decode_point(x: int, cfg: WalkConfig) -> list[Pauli]:
    """Base-xi digits of x, least significant first, each a non-identity Pauli."""
    if not 0 <= x < cfg.space:
        raise ValueError(f"point index {x} outside [0, {cfg.space})")
    out = []
    for _ in range(cfg.half):
        x, g = divmod(x, cfg.xi)
        out.append(Pauli.from_index(g + 1, cfg.n))
    return out


def left_product(x: int, cfg: WalkConfig) -> ChannelMatrix:
    """Side-1 product: chunk rotation (odd t) times the decoded rotations,
    first digit innermost."""
    from .channel import rotation_channel

    rots = [rotation_channel(p) for p in decode_point(x, cfg)]
    if cfg.t % 2:
        rots.append(rotation_channel(cfg.chunk_pauli))
    return _fold_left(rots, None, cfg.n)


def right_product(x: int, cfg: WalkConfig, c_hat: ChannelMatrix) -> ChannelMatrix:
    """Side-2 product: transposed decoded rotations applied to the target,
    first digit outermost."""
    from .channel import rotation_channel_t

    rots = [rotation_channel_t(p) for p in reversed(decode_point(x, cfg))]
    return _fold_left(rots, c_hat, cfg.n)


def _fold_left(rots: list[ChannelMatrix], seed: ChannelMatrix | None, n: int) -> ChannelMatrix:
    """Fold rotation factors onto seed, each multiplying from the left.

    Runs on raw float64 arrays with one canonicalization at the end: column
    norms bound every partial-product entry by ~2^(sde/2), so each matmul
    stays integer-exact whenever the guard below holds.
    """
    sde = sum(r.sde for r in rots)
    fa = fb = None
    if seed is not None:
        sde += seed.sde
        bound = max(seed._max_abs, 1) << (len(rots) // 2 + 3)
        if seed.a.dtype != np.int64 or 3 * seed.dim * bound >= 1 << 53:
            m = seed
            for r in rots:
                m = r @ m
            return m
        fa, fb = seed.float_pair()
    for r in rots:
        ra, rb = r.float_pair()
        if fa is None:
            fa, fb = ra, rb
        else:
            fa, fb = ra @ fa + 2.0 * (rb @ fb), ra @ fb + rb @ fa
    a = np.rint(fa).astype(np.int64)
    b = np.rint(fb).astype(np.int64)
    return ChannelMatrix(n, sde, a, b)


class LabelCache:
    """Bounded (x, b) -> label-digest memo, valid for one (n, t, chunk, target).

    Holds the 16-byte unsalted digest of each label, not the label bytes:
    digests are salt-independent (a cache survives round changes) and keep
    memory flat where full labels run to kilobytes.
    """

    __slots__ = ("limit", "data", "hits", "misses")

    def __init__(self, limit: int):
        self.limit = limit
        self.data: dict[Point, bytes] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self.data)


def point_label(p: Point, cfg: WalkConfig, c_hat: ChannelMatrix) -> bytes:
    """Full coset label of the point's side product."""
    if p.b == 1:
        return coset_label(left_product(p.x, cfg))
    if p.b == 2:
        return coset_label(right_product(p.x, cfg, c_hat))
    raise ValueError(f"side tag {p.b} not in (1, 2)")


def label_digest(
    p: Point, cfg: WalkConfig, c_hat: ChannelMatrix, cache: LabelCache | None = None
) -> bytes:
    """16-byte unsalted digest of the point's coset label."""
    if cache is not None:
        d = cache.data.get(p)
        if d is not None:
            cache.hits += 1
            return d
        cache.misses += 1
    d = blake2b(point_label(p, cfg, c_hat), digest_size=16, person=_PERSON_LABEL).digest()
    if cache is not None and len(cache.data) < cache.limit:
        cache.data[p] = d
    return d


def _next_point(digest: bytes, salt: bytes, space: int) -> Point:
    h = blake2b(digest, digest_size=16, key=salt, person=_PERSON_STEP).digest()
    v = int.from_bytes(h, "big")
    return Point(v % space, (v >> 127) + 1)


def _dp_check(p: Point, salt: bytes, theta_exp: int) -> bool:
    if theta_exp == 0:
        return True
    msg = p.x.to_bytes(16, "little") + bytes([p.b])
    h = blake2b(msg, digest_size=16, key=salt, person=_PERSON_DP).digest()
    return int.from_bytes(h, "big") >> (128 - theta_exp) == 0


def step(
    p: Point, cfg: WalkConfig, c_hat: ChannelMatrix, cache: LabelCache | None = None
) -> Point:
    """One walk step: hash the point's coset label into the next point.

    The keyed step hash runs over the label's fixed-width digest rather than
    the raw label bytes; the composition is still a keyed 128-bit hash of the
    label, and equal labels still collide into identical successors.
    """
    return _next_point(label_digest(p, cfg, c_hat, cache), cfg.salt, cfg.space)


def is_distinguished(p: Point, cfg: WalkConfig) -> bool:
    """True iff the top theta_exp bits of the point's keyed hash are zero."""
    return _dp_check(p, cfg.salt, cfg.theta_exp)


def start_point(cfg: WalkConfig, worker_id: int, counter: int) -> Point:
    """Deterministic per-worker start stream."""
    msg = struct.pack("<QQ", worker_id, counter)
    h = blake2b(msg, digest_size=16, key=cfg.salt, person=_PERSON_START).digest()
    v = int.from_bytes(h, "big")
    return Point(v % cfg.space, (v >> 127) + 1)


def run_trail(
    start: Point,
    cfg: WalkConfig,
    c_hat: ChannelMatrix,
    *,
    cache: LabelCache | None = None,
    step_fn: Callable[[Point], Point] | None = None,
    dp_fn: Callable[[Point], bool] | None = None,
    max_steps: int | None = None,
) -> TrailTriple | CycleAbandoned:
    """Walk from start until a distinguished point, the cycle cap, or a
    caller-imposed step budget.  step_fn/dp_fn exist for tests only."""
    if step_fn is None:
        step_fn = lambda q: step(q, cfg, c_hat, cache)
    if dp_fn is None:
        dp_fn = lambda q: is_distinguished(q, cfg)
    cap = cfg.trail_cap
    limit = cap if max_steps is None else min(cap, max_steps)
    p = start
    d = 0
    while d < limit:
        p = step_fn(p)
        d += 1
        if dp_fn(p):
            return TrailTriple(start, p, d)
    return CycleAbandoned(start, d, "cycle" if limit == cap else "budget")


class BatchWalker:
    """Lockstep trail engine: many concurrent trails, one salt per trail.

    Produces byte-identical trails to run_trail/step; the only difference is
    that label arithmetic runs on stacked arrays, amortizing per-call array
    overhead across every active trail.  Per-trail salts make this serve both
    a single search round (all salts equal) and ensemble statistics (one
    fresh walk function per trail).
    """

    def __init__(self, cfg: WalkConfig, c_hat: ChannelMatrix, slots: int = 256):
        from .channel import rotation_channel, rotation_channel_t

        if c_hat.a.dtype != np.int64:
            raise ValueError("target entries too large for batched walking")
        bound = max(c_hat._max_abs, 1) << (cfg.half // 2 + 3)
        if 3 * c_hat.dim * bound >= 1 << 53:
            raise ValueError("target entries too large for batched walking")
        self.cfg = cfg
        self.c_hat = c_hat
        self.slots = slots
        self.dim = c_hat.dim
        xi = cfg.xi
        fa = np.empty((xi, self.dim, self.dim))
        fb = np.empty_like(fa)
        ta = np.empty_like(fa)
        tb = np.empty_like(fa)
        for g in range(xi):
            p = Pauli.from_index(g + 1, cfg.n)
            fa[g], fb[g] = rotation_channel(p).float_pair()
            ta[g], tb[g] = rotation_channel_t(p).float_pair()
        self._rot = (fa, fb)
        self._rot_t = (ta, tb)
        self._chunk_f = (
            rotation_channel(cfg.chunk_pauli).float_pair() if cfg.t % 2 else None
        )
        self._c_f = c_hat.float_pair()
        self._sde1 = cfg.half + (1 if cfg.t % 2 else 0)
        self._sde2 = cfg.half + c_hat.sde

    def _digit_matrix(self, xs: list[int]) -> np.ndarray:
        cfg = self.cfg
        out = np.empty((len(xs), cfg.half), dtype=np.int64)
        if cfg.space < 1 << 63:
            rem = np.asarray(xs, dtype=np.int64)
            for lvl in range(cfg.half):
                rem, g = np.divmod(rem, cfg.xi)
                out[:, lvl] = g
        else:
            for i, x in enumerate(xs):
                for lvl in range(cfg.half):
                    x, g = divmod(x, cfg.xi)
                    out[i, lvl] = g
        return out

    def _products(self, xs: list[int], side: int) -> tuple[np.ndarray, np.ndarray, int]:
        digits = self._digit_matrix(xs)
        half = self.cfg.half
        if side == 1:
            ra, rb = self._rot
            a = ra[digits[:, 0]]
            b = rb[digits[:, 0]]
            for lvl in range(1, half):
                fa = ra[digits[:, lvl]]
                fb = rb[digits[:, lvl]]
                a, b = fa @ a + 2.0 * (fb @ b), fa @ b + fb @ a
            if self._chunk_f is not None:
                ca, cb = self._chunk_f
                a, b = ca @ a + 2.0 * (cb @ b), ca @ b + cb @ a
            sde = self._sde1
        else:
            ta, tb = self._rot_t
            ca, cb = self._c_f
            fa = ta[digits[:, half - 1]]
            fb = tb[digits[:, half - 1]]
            a, b = fa @ ca + 2.0 * (fb @ cb), fa @ cb + fb @ ca
            for lvl in range(half - 2, -1, -1):
                fa = ta[digits[:, lvl]]
                fb = tb[digits[:, lvl]]
                a, b = fa @ a + 2.0 * (fb @ b), fa @ b + fb @ a
            sde = self._sde2
        ai = np.rint(a).astype(np.int64)
        bi = np.rint(b).astype(np.int64)
        return ai, bi, sde

    def label_digests(self, points: list[Point]) -> list[bytes]:
        """Unsalted label digests for a mixed-side batch, in input order."""
        out: list[bytes | None] = [None] * len(points)
        for side in (1, 2):
            idx = [i for i, p in enumerate(points) if p.b == side]
            if not idx:
                continue
            for i, d in zip(idx, self._side_digests([points[i].x for i in idx], side)):
                out[i] = d
        bad = [points[i] for i, d in enumerate(out) if d is None]
        if bad:
            raise ValueError(f"side tag {bad[0].b} not in (1, 2)")
        return out

    def _side_digests(self, xs: list[int], side: int) -> list[bytes]:
        from .coset import _FLOAT_SIGN_MAX, _SQRT2, assemble_label, entry_bytes

        ai, bi, sde = self._products(xs, side)
        k, dim = len(xs), self.dim
        sdes = np.full(k, sde, dtype=np.int64)
        if sde > 0:
            reducible = ~((ai & 1).any(axis=(1, 2)))
            for i in np.nonzero(reducible)[0]:
                s2, a2, b2 = _canonicalize(int(sdes[i]), ai[i], bi[i])
                sdes[i] = s2
                ai[i] = a2
                bi[i] = b2
        if max(ai.max(initial=0), bi.max(initial=0), -ai.min(initial=0), -bi.min(initial=0)) > _FLOAT_SIGN_MAX:
            # huge entries: defer to the scalar exact path per matrix
            return [
                blake2b(
                    coset_label(ChannelMatrix(self.cfg.n, int(sdes[i]), ai[i].copy(), bi[i].copy(), _canonical=True)),
                    digest_size=16,
                    person=_PERSON_LABEL,
                ).digest()
                for i in range(k)
            ]
        midx, cols, rows = np.nonzero((ai | bi).transpose(0, 2, 1))
        ea = ai[midx, rows, cols]
        eb = bi[midx, rows, cols]
        counts = np.bincount(midx * dim + cols, minlength=k * dim)
        flat_starts = np.cumsum(counts) - counts
        counts = counts.reshape(k, dim)
        starts = flat_starts.reshape(k, dim)
        even = (sdes % 2) == 0
        ua = np.where(even, np.int64(1) << (sdes >> 1), 0)
        ub = np.where(even, 0, np.int64(1) << (sdes >> 1))
        first = starts[:, 0]
        ok = (
            (counts[:, 0] == 1)
            & (rows[first] == 0)
            & (ea[first] == ua)
            & (eb[first] == ub)
        )
        if not ok.all():
            raise ValueError("matrix does not fix the identity column")
        head = starts.ravel()
        hf = ea[head].astype(np.float64) + eb[head].astype(np.float64) * _SQRT2
        sign = np.where(hf < 0.0, -1, 1).reshape(k, dim)
        sign[:, 0] = 1
        kbytes, pbytes = entry_bytes(rows, sign[midx, cols], ea, eb)
        out = []
        for i in range(k):
            base = int(starts[i, 0])
            rel = (starts[i] - base).tolist()
            lbl = assemble_label(dim, int(sdes[i]), counts[i].tolist(), rel, kbytes, pbytes, base=base)
            out.append(blake2b(lbl, digest_size=16, person=_PERSON_LABEL).digest())
        return out

    def run_trails(
        self,
        specs: Iterable[tuple[Point, bytes]],
        *,
        step_budget: int | None = None,
    ) -> Iterator[tuple[int, TrailTriple | CycleAbandoned]]:
        """Run (start, salt) trails lockstep; yield (spec index, outcome).

        Outcomes match run_trail under a config carrying each trail's salt.
        Completions surface in slot order per sweep, so the stream is
        deterministic for a fixed spec sequence.  A global step budget cuts
        the sweep width deterministically; trails still in flight when it
        runs out are yielded as CycleAbandoned("budget").
        """
        cfg = self.cfg
        cap = cfg.trail_cap
        it = enumerate(iter(specs))
        slots: list[list] = []  # [spec_idx, start, salt, point, steps]
        remaining = step_budget if step_budget is not None else -1
        self.steps_taken = 0
        while True:
            # Never hold more in-flight trails than the budget could advance.
            room = self.slots if remaining < 0 else min(self.slots, remaining)
            while len(slots) < room:
                nxt = next(it, None)
                if nxt is None:
                    break
                idx, (start, salt) = nxt
                slots.append([idx, start, salt, start, 0])
            if not slots:
                return
            width = len(slots) if remaining < 0 else min(len(slots), remaining)
            if width == 0:
                for idx, start, salt, p, d in slots:
                    yield idx, CycleAbandoned(start, d, "budget")
                return
            digests = self.label_digests([s[3] for s in slots[:width]])
            finished = []
            for j in range(width):
                slot = slots[j]
                p = _next_point(digests[j], slot[2], cfg.space)
                slot[3] = p
                slot[4] += 1
                if _dp_check(p, slot[2], cfg.theta_exp):
                    finished.append(j)
                elif slot[4] >= cap:
                    finished.append(j)
            self.steps_taken += width
            if remaining > 0:
                remaining -= width
            for j in finished:
                idx, start, salt, p, d = slots[j]
                if _dp_check(p, salt, cfg.theta_exp):
                    yield idx, TrailTriple(start, p, d)
                else:
                    yield idx, CycleAbandoned(start, d, "cycle")
            for j in reversed(finished):
                slots.pop(j)
