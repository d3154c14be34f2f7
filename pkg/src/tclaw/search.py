"""Parallel claw search over the walk's two meet-in-the-middle sides.

Workers run deterministic trails to distinguished points; a bounded
direct-mapped store keeps one trail triple per slot and surfaces end-point
collisions as candidate pairs; candidates are traced back to their merge
point and, when the pre-merge points straddle the two sides, verified in
exact arithmetic.  A verified claw yields the full Pauli sequence together
with the Clifford remainder, so every returned solution recomposes the
target channel exactly.

A single-worker search runs inline (no threads or processes) and is
bit-reproducible.  Multi-worker searches put each worker in its own
process, since trail generation is CPU-bound Python; collectors and
verifiers are threads of the coordinating process connected by bounded
queues, and each store shard has a single owning collector.
"""

from __future__ import annotations

import multiprocessing as mp
import queue
import threading
from dataclasses import dataclass, fields
from hashlib import blake2b
from typing import NamedTuple

from .coset import clifford_quotient, coset_label
from .errors import ConsistencyError, StoreCorruptionError
from .exact import ChannelMatrix
from .paulis import Pauli
from .walk import (
    BatchWalker,
    CycleAbandoned,
    LabelCache,
    Point,
    TrailTriple,
    WalkConfig,
    decode_point,
    left_product,
    right_product,
    run_trail,
    start_point,
    step,
)

_PERSON_SLOT = b"slot"
_PERSON_SHARD = b"shrd"


@dataclass(frozen=True)
class Inserted:
    pass


@dataclass(frozen=True)
class DuplicateStart:
    pass


@dataclass(frozen=True)
class CandidatePair:
    """Same end point as a resident triple with a different start."""

    resident: TrailTriple


InsertResult = Inserted | DuplicateStart | CandidatePair


@dataclass(frozen=True)
class PrefixOrIdentical:
    """One trail is a suffix of the other; no new collision information."""


@dataclass(frozen=True)
class SameSideCollision:
    """The colliding pre-merge points carry the same side tag."""


@dataclass(frozen=True)
class Claw:
    """Pre-merge points straddling the sides: (x1, 1) and (x2, 2)."""

    x1: int
    x2: int


MergeOutcome = PrefixOrIdentical | SameSideCollision | Claw


@dataclass
class SearchStats:
    """Counters for one search; steps counts worker walk steps only."""

    trails: int = 0
    abandoned: int = 0
    insertions: int = 0
    duplicate_starts: int = 0
    candidate_pairs: int = 0
    same_side: int = 0
    prefix_merges: int = 0
    claws: int = 0
    steps: int = 0

    def merge(self, other: SearchStats) -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class Solution:
    """Verified decomposition: rotations P1..Pt applied to the Clifford."""

    t: int
    chunk: int
    pauli_sequence: list[Pauli]
    clifford: ChannelMatrix
    stats: SearchStats | None = None


@dataclass(frozen=True)
class RoleConfig:
    """Role counts and sizing for one search.

    collectors/verifiers default to workers//8 and workers//4 (at least one
    each), the ratio that balanced the pipeline in practice; they only come
    into play when workers > 1.
    """

    workers: int = 1
    collectors: int | None = None
    verifiers: int | None = None
    store_capacity: int = 1 << 16
    memo_limit: int = 1 << 18
    queue_size: int = 4096
    batch_slots: int = 256

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.store_capacity < 1:
            raise ValueError("store_capacity must be positive")
        if self.queue_size < 1 or self.batch_slots < 1:
            raise ValueError("queue_size and batch_slots must be positive")
        for v in (self.collectors, self.verifiers):
            if v is not None and v < 1:
                raise ValueError("role counts must be positive")

    @property
    def n_collectors(self) -> int:
        return self.collectors if self.collectors is not None else max(1, self.workers // 8)

    @property
    def n_verifiers(self) -> int:
        return self.verifiers if self.verifiers is not None else max(1, self.workers // 4)


class ChunkResult(NamedTuple):
    solution: Solution | None
    stats: SearchStats


class DPStore:
    """Bounded distinguished-point table holding one trail triple per slot.

    Direct-mapped: a salted hash of the end point picks the slot, so all
    triples sharing an end point contend for the same slot and a lookup is
    one probe.  Occupancy by a different end point is overwritten, keeping
    memory fixed at ``capacity`` triples.  Not thread-safe; every store
    needs a single owner.
    """

    __slots__ = ("capacity", "salt", "_slots", "_filled")

    def __init__(self, capacity: int, salt: bytes):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.salt = salt
        self._slots: list[TrailTriple | None] = [None] * capacity
        self._filled = 0

    def __len__(self) -> int:
        return self._filled

    def _slot_index(self, end: Point) -> int:
        msg = end.x.to_bytes(16, "little") + bytes([end.b])
        h = blake2b(msg, digest_size=8, key=self.salt, person=_PERSON_SLOT).digest()
        return int.from_bytes(h, "big") % self.capacity

    def lookup(self, end: Point) -> TrailTriple | None:
        t = self._slots[self._slot_index(end)]
        return t if t is not None and t.end == end else None

    def insert(self, triple: TrailTriple) -> InsertResult:
        j = self._slot_index(triple.end)
        resident = self._slots[j]
        if resident is not None and resident.end == triple.end:
            if resident.start == triple.start:
                return DuplicateStart()
            return CandidatePair(resident)
        if resident is None:
            self._filled += 1
        self._slots[j] = triple
        assert self._filled <= self.capacity
        return Inserted()


def locate_merge(
    t1: TrailTriple,
    t2: TrailTriple,
    cfg: WalkConfig,
    c_hat: ChannelMatrix,
    *,
    cache: LabelCache | None = None,
) -> MergeOutcome:
    """Replay two same-end trails to their merge point and classify it.

    The longer trail is advanced until both have the same distance left,
    then both step in lockstep until their successors coincide; the pair of
    points just before that is the collision.  Two trails whose recorded
    lengths cannot reconcile with their shared end indicate a corrupted
    store entry.
    """
    if t1.end != t2.end:
        raise ValueError("triples do not share an end point")
    if t1.start == t2.start:
        raise ValueError("triples share a start point")
    long_t, short_t = (t1, t2) if t1.length >= t2.length else (t2, t1)
    p_long = long_t.start
    for _ in range(long_t.length - short_t.length):
        p_long = step(p_long, cfg, c_hat, cache)
    p_short = short_t.start
    if p_long == p_short:
        return PrefixOrIdentical()
    for _ in range(short_t.length):
        q_long = step(p_long, cfg, c_hat, cache)
        q_short = step(p_short, cfg, c_hat, cache)
        if q_long == q_short:
            if p_long.b == p_short.b:
                return SameSideCollision()
            if p_long.b == 1:
                return Claw(p_long.x, p_short.x)
            return Claw(p_short.x, p_long.x)
        p_long, p_short = q_long, q_short
    raise StoreCorruptionError(
        "trails with a common recorded end failed to merge within their lengths"
    )


def verify_claw(
    x1: int, x2: int, cfg: WalkConfig, c_hat: ChannelMatrix
) -> Solution | None:
    """Check a claw candidate in exact arithmetic and build the solution.

    Step-level collisions can pair points whose labels differ, so the two
    side products are recomputed and compared by label first.  On a match
    the Pauli sequence reads off the two point indices (the chunk Pauli
    sits between the halves when t is odd) and the Clifford remainder is
    the quotient of the side products, which label soundness guarantees is
    a signed permutation.
    """
    v = left_product(x1, cfg)
    w = right_product(x2, cfg, c_hat)
    if coset_label(v) != coset_label(w):
        return None
    d_hat = clifford_quotient(v, w)
    if d_hat is None:
        raise ConsistencyError("equal labels with a non-signed-permutation quotient")
    seq = decode_point(x1, cfg)
    if cfg.t % 2:
        seq.append(cfg.chunk_pauli)
    seq.extend(decode_point(x2, cfg))
    return Solution(t=cfg.t, chunk=cfg.chunk, pauli_sequence=seq, clifford=d_hat)


def default_budget(cfg: WalkConfig) -> int:
    """Per-chunk step allowance: ten times the two-sided space size."""
    return 20 * cfg.space


class TrailSource:
    """Deterministic trail-outcome stream for one worker id.

    Wraps the lockstep batch engine whenever the target qualifies and falls
    back to scalar trails otherwise; either way the outcome stream is a
    pure function of (cfg, worker id, budget).  ``steps`` tracks walk steps
    actually taken, never exceeding the budget.
    """

    def __init__(
        self,
        cfg: WalkConfig,
        c_hat: ChannelMatrix,
        worker_id: int,
        budget: int,
        *,
        batch_slots: int = 256,
        memo_limit: int = 1 << 18,
        cache: LabelCache | None = None,
    ):
        self.cfg = cfg
        self.c_hat = c_hat
        self.worker_id = worker_id
        self.budget = budget
        self.steps = 0
        self.cache = cache
        try:
            self._walker = BatchWalker(cfg, c_hat, slots=batch_slots)
        except ValueError:
            self._walker = None
            if self.cache is None:
                self.cache = LabelCache(memo_limit)

    def outcomes(self):
        cfg = self.cfg
        if self._walker is not None:
            walker = self._walker

            def specs():
                i = 0
                while True:
                    yield start_point(cfg, self.worker_id, i), cfg.salt
                    i += 1

            for _, out in walker.run_trails(specs(), step_budget=self.budget):
                self.steps = walker.steps_taken
                yield out
            self.steps = walker.steps_taken
        else:
            i = 0
            while self.steps < self.budget:
                out = run_trail(
                    start_point(cfg, self.worker_id, i),
                    cfg,
                    self.c_hat,
                    cache=self.cache,
                    max_steps=self.budget - self.steps,
                )
                i += 1
                self.steps += out.length if isinstance(out, TrailTriple) else out.steps
                yield out


def _absorb(
    triple: TrailTriple,
    store: DPStore,
    cfg: WalkConfig,
    c_hat: ChannelMatrix,
    stats: SearchStats,
    cache: LabelCache | None,
) -> Solution | None:
    res = store.insert(triple)
    if isinstance(res, Inserted):
        stats.insertions += 1
        return None
    if isinstance(res, DuplicateStart):
        stats.duplicate_starts += 1
        return None
    stats.candidate_pairs += 1
    outcome = locate_merge(triple, res.resident, cfg, c_hat, cache=cache)
    if isinstance(outcome, PrefixOrIdentical):
        stats.prefix_merges += 1
        return None
    if isinstance(outcome, SameSideCollision):
        stats.same_side += 1
        return None
    stats.claws += 1
    return verify_claw(outcome.x1, outcome.x2, cfg, c_hat)


def _search_inline(
    cfg: WalkConfig,
    c_hat: ChannelMatrix,
    budget: int,
    roles: RoleConfig,
    cancel=None,
) -> tuple[Solution | None, SearchStats]:
    stats = SearchStats()
    store = DPStore(roles.store_capacity, cfg.salt)
    cache = LabelCache(roles.memo_limit)
    source = TrailSource(
        cfg, c_hat, 0, budget, batch_slots=roles.batch_slots, cache=cache
    )
    solution = None
    for out in source.outcomes():
        stats.trails += 1
        if isinstance(out, CycleAbandoned):
            stats.abandoned += 1
            continue
        solution = _absorb(out, store, cfg, c_hat, stats, cache)
        if solution is not None:
            break
        if cancel is not None and cancel.is_set():
            break
    stats.steps += source.steps
    return solution, stats


def _worker_main(cfg, c_hat, worker_id, budget, out_q, cancel, batch_slots, memo_limit):
    trails = abandoned = 0
    source = None
    try:
        source = TrailSource(
            cfg, c_hat, worker_id, budget,
            batch_slots=batch_slots, memo_limit=memo_limit,
        )
        for out in source.outcomes():
            trails += 1
            if isinstance(out, CycleAbandoned):
                abandoned += 1
            else:
                out_q.put(("t", out))
            if cancel.is_set():
                break
    finally:
        steps = source.steps if source is not None else 0
        out_q.put(("d", steps, trails, abandoned))


def _shard_index(end: Point, salt: bytes, shards: int) -> int:
    if shards == 1:
        return 0
    msg = end.x.to_bytes(16, "little") + bytes([end.b])
    h = blake2b(msg, digest_size=8, key=salt, person=_PERSON_SHARD).digest()
    return int.from_bytes(h, "big") % shards


def _search_parallel(
    cfg: WalkConfig, c_hat: ChannelMatrix, budget: int, roles: RoleConfig
) -> tuple[Solution | None, SearchStats]:
    ctx = mp.get_context()
    cancel = ctx.Event()
    triple_q = ctx.Queue(roles.queue_size)
    m = roles.workers
    shares = [budget // m + (1 if i < budget % m else 0) for i in range(m)]
    procs = [
        ctx.Process(
            target=_worker_main,
            args=(
                cfg, c_hat, i, shares[i], triple_q, cancel,
                roles.batch_slots, roles.memo_limit,
            ),
            daemon=True,
        )
        for i in range(m)
        if shares[i] > 0
    ]
    # Workers fork before any coordinator thread starts.
    for p in procs:
        p.start()

    n_coll = roles.n_collectors
    n_ver = roles.n_verifiers
    stores = [
        DPStore(max(1, roles.store_capacity // n_coll), cfg.salt)
        for _ in range(n_coll)
    ]
    coll_qs: list[queue.Queue] = [queue.Queue(roles.queue_size) for _ in range(n_coll)]
    cand_q: queue.Queue = queue.Queue(roles.queue_size)
    stats = SearchStats()
    coll_stats = [SearchStats() for _ in range(n_coll)]
    ver_stats = [SearchStats() for _ in range(n_ver)]
    box: dict[str, Solution] = {}
    box_lock = threading.Lock()

    def dispatch():
        done = 0
        while done < len(procs):
            msg = triple_q.get()
            if msg[0] == "d":
                done += 1
                stats.steps += msg[1]
                stats.trails += msg[2]
                stats.abandoned += msg[3]
            else:
                t = msg[1]
                coll_qs[_shard_index(t.end, cfg.salt, n_coll)].put(t)
        for q in coll_qs:
            q.put(None)

    def collect(shard: int):
        st = coll_stats[shard]
        store = stores[shard]
        q = coll_qs[shard]
        while (t := q.get()) is not None:
            res = store.insert(t)
            if isinstance(res, Inserted):
                st.insertions += 1
            elif isinstance(res, DuplicateStart):
                st.duplicate_starts += 1
            else:
                st.candidate_pairs += 1
                cand_q.put((t, res.resident))
            assert len(store) <= store.capacity

    def verify(vid: int):
        st = ver_stats[vid]
        cache = LabelCache(roles.memo_limit)
        while (pair := cand_q.get()) is not None:
            if box:
                continue
            outcome = locate_merge(pair[0], pair[1], cfg, c_hat, cache=cache)
            if isinstance(outcome, PrefixOrIdentical):
                st.prefix_merges += 1
            elif isinstance(outcome, SameSideCollision):
                st.same_side += 1
            else:
                st.claws += 1
                sol = verify_claw(outcome.x1, outcome.x2, cfg, c_hat)
                if sol is not None:
                    with box_lock:
                        box.setdefault("solution", sol)
                    cancel.set()

    threads = [threading.Thread(target=dispatch, daemon=True)]
    threads += [
        threading.Thread(target=collect, args=(s,), daemon=True) for s in range(n_coll)
    ]
    verifiers = [
        threading.Thread(target=verify, args=(v,), daemon=True) for v in range(n_ver)
    ]
    for th in threads:
        th.start()
    for th in verifiers:
        th.start()
    for p in procs:
        p.join()
    for th in threads:
        th.join()
    for _ in verifiers:
        cand_q.put(None)
    for th in verifiers:
        th.join()
    for st in coll_stats + ver_stats:
        stats.merge(st)
    return box.get("solution"), stats


def search_chunk(
    cfg: WalkConfig,
    c_hat: ChannelMatrix,
    budget: int | None = None,
    roles: RoleConfig | None = None,
    cancel=None,
) -> ChunkResult:
    """Search one chunk for a claw, stopping at the first verified solution.

    Returns the solution (stats attached) or None once the walk-step budget
    is spent.  The search is probabilistic: an empty result does not prove
    the chunk contains no decomposition.  With workers=1 the run is
    bit-deterministic in (cfg, budget).  ``cancel`` is any object with an
    ``is_set()`` method; it is polled between trails on the inline path so
    concurrent chunk searches can stop each other early.
    """
    if roles is None:
        roles = RoleConfig()
    if budget is None:
        budget = default_budget(cfg)
    if budget < 1:
        raise ValueError("budget must be positive")
    if c_hat.dim != 4**cfg.n:
        raise ValueError("target dimension mismatch")
    if roles.workers == 1:
        solution, stats = _search_inline(cfg, c_hat, budget, roles, cancel)
    else:
        solution, stats = _search_parallel(cfg, c_hat, budget, roles)
    if solution is not None:
        solution.stats = stats
    return ChunkResult(solution, stats)
