"""T-count synthesis: minimal pi/4 Pauli-rotation decompositions.

``synthesize`` climbs a ladder of candidate T-counts.  Count 0 is a
signed-permutation test, count 1 a direct label scan, and every larger
count runs either a complete meet-in-the-middle enumeration (while one
side fits the exhaustive threshold) or the distinguished-point claw
search from :mod:`tclaw.search`.  The first decomposition found wins;
the optimality flag records whether every smaller count was excluded
exhaustively or merely walked without success.

The remaining helpers turn a solution into checkable artifacts: a
Clifford tableau extracted from the signed-permutation factor, a gate
list over {H, S, Sdg, X, Y, Z, CNOT, CZ, SWAP, T}, and an exact
recomposition check.
"""

from __future__ import annotations

import math
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from hashlib import blake2b

import numpy as np

from .channel import (
    Gate,
    circuit_channel,
    conjugate_phased,
    gate,
    rotation_channel,
    rotation_channel_t,
)
from .coset import clifford_quotient, coset_label
from .errors import ConsistencyError, NotFoundError
from .exact import ChannelMatrix
from .paulis import Pauli, PhasedPauli
from .search import RoleConfig, SearchStats, Solution, default_budget, search_chunk
from .walk import WalkConfig, derive_salt

__all__ = [
    "DEFAULT_EXHAUSTIVE_THRESHOLD",
    "SynthOptions",
    "SynthesisResult",
    "Tableau",
    "extract_clifford",
    "tableau_to_gates",
    "rotation_gates",
    "emit_gates",
    "mitm_exhaustive",
    "synthesize",
    "verify_solution",
]

DEFAULT_EXHAUSTIVE_THRESHOLD = 1 << 20

PROVEN = "ProvenOptimal"
HEURISTIC = "HeuristicOptimal"


# ----------------------------------------------------------------- tableau


@dataclass(frozen=True)
class Tableau:
    """Clifford action on the Pauli group, stored as generator images.

    ``x_images[q]`` and ``z_images[q]`` are the images of X_q and Z_q
    under conjugation, each a canonical Pauli with a real sign.
    """

    n: int
    x_images: tuple[PhasedPauli, ...]
    z_images: tuple[PhasedPauli, ...]

    def __post_init__(self):
        if len(self.x_images) != self.n or len(self.z_images) != self.n:
            raise ValueError("need one X and one Z image per qubit")
        for img in self.x_images + self.z_images:
            if img.pauli.n != self.n:
                raise ValueError("image register size mismatch")
            if img.phase_exp % 2:
                raise ValueError("generator images must carry real signs")

    def image(self, p: Pauli) -> PhasedPauli:
        """Image of an arbitrary Pauli under the tableau's conjugation.

        Follows from the generator images and the phase convention
        P = i**|x&z| X^x Z^z; the result is real only if the tableau is
        consistent.
        """
        if p.n != self.n:
            raise ValueError("register size mismatch")
        acc = PhasedPauli(Pauli.identity(self.n), (p.x & p.z).bit_count())
        for q in range(self.n):
            if (p.x >> q) & 1:
                acc = acc.mul(self.x_images[q])
        for q in range(self.n):
            if (p.z >> q) & 1:
                acc = acc.mul(self.z_images[q])
        return acc

    def to_matrix(self) -> ChannelMatrix:
        """Signed-permutation channel of the tableau.

        Raises ConsistencyError if any composite image comes out with an
        imaginary phase, which happens exactly when the generator images
        are not a Clifford action.
        """
        dim = 4**self.n
        a = np.zeros((dim, dim), dtype=np.int64)
        b = np.zeros((dim, dim), dtype=np.int64)
        for j in range(dim):
            img = self.image(Pauli.from_index(j, self.n))
            try:
                a[img.pauli.index, j] = img.sign()
            except ValueError as e:
                raise ConsistencyError(
                    f"generator images are not a Clifford action: image of "
                    f"basis Pauli {j} has phase i**{img.phase_exp}"
                ) from e
        return ChannelMatrix(self.n, 0, a, b, _canonical=True)


def extract_clifford(d_hat: ChannelMatrix) -> Tableau:
    """Read a tableau off a signed-permutation channel and validate it.

    The column of each generator gives its image directly.  Validation
    rebuilds the full matrix from the generator images; any mismatch
    (anticommutation violated, or signs inconsistent with Y = iXZ, e.g.
    a map swapping X and Z while fixing +Y) raises ConsistencyError.
    """
    if not d_hat.is_signed_permutation():
        raise ConsistencyError("clifford factor is not a signed permutation")
    n = d_hat.n
    a = d_hat.a

    def col_image(p: Pauli) -> PhasedPauli:
        col = a[:, p.index]
        row = int(np.nonzero(col)[0][0])
        return PhasedPauli(Pauli.from_index(row, n), 0 if col[row] > 0 else 2)

    tab = Tableau(
        n,
        tuple(col_image(Pauli(n, 1 << q, 0)) for q in range(n)),
        tuple(col_image(Pauli(n, 0, 1 << q)) for q in range(n)),
    )
    if tab.to_matrix() != d_hat:
        raise ConsistencyError(
            "signed permutation is inconsistent with its generator images"
        )
    return tab


# -------------------------------------------------------------- gate lists


def _xbit(img: PhasedPauli, q: int) -> int:
    return (img.pauli.x >> q) & 1


def _zbit(img: PhasedPauli, q: int) -> int:
    return (img.pauli.z >> q) & 1


def tableau_to_gates(tab: Tableau) -> list[Gate]:
    """Clifford gate list (application order) realizing the tableau.

    Sweeps qubit by qubit, reducing the tracked generator images to the
    identity tableau with gates on qubits >= q only, then returns the
    daggered gates in reverse.  Favors simplicity over depth.
    """
    n = tab.n
    im_x = list(tab.x_images)
    im_z = list(tab.z_images)
    applied: list[Gate] = []

    def apply(g: Gate) -> None:
        for i in range(n):
            im_x[i] = conjugate_phased(g, im_x[i])
            im_z[i] = conjugate_phased(g, im_z[i])
        applied.append(g)

    def reduce_to_x(images: list[PhasedPauli], k: int, lo: int) -> None:
        # Normalize every local letter of images[k] on qubits >= lo to X,
        # then fold the support onto qubit lo with CNOTs.
        for r in range(lo, n):
            x, z = _xbit(images[k], r), _zbit(images[k], r)
            if x and z:
                apply(gate("Sdg", r))
            elif z:
                apply(gate("H", r))
        support = [r for r in range(lo, n) if _xbit(images[k], r)]
        if not support:
            raise ConsistencyError("tableau image vanished during reduction")
        if support[0] != lo:
            apply(gate("SWAP", lo, support[0]))
        for r in range(lo + 1, n):
            if _xbit(images[k], r):
                apply(gate("CNOT", lo, r))

    for q in range(n):
        reduce_to_x(im_x, q, q)
        if im_x[q].pauli != Pauli(n, 1 << q, 0):
            raise ConsistencyError("tableau sweep failed to isolate X image")
        if not (im_z[q].pauli.x == 0 and im_z[q].pauli.z == 1 << q):
            # Work in the H-conjugated frame: im_x[q] parks as Z_q, which
            # every gate below fixes, while im_z[q] reduces like an X row.
            apply(gate("H", q))
            reduce_to_x(im_z, q, q)
            apply(gate("H", q))
        if im_x[q].sign() < 0:
            apply(gate("Z", q))
        if im_z[q].sign() < 0:
            apply(gate("X", q))

    for q in range(n):
        assert im_x[q] == PhasedPauli(Pauli(n, 1 << q, 0), 0)
        assert im_z[q] == PhasedPauli(Pauli(n, 0, 1 << q), 0)
    return [g.dagger() for g in reversed(applied)]


def rotation_gates(p: Pauli) -> list[Gate]:
    """Gate list (application order) for the pi/4 rotation about a Pauli.

    Conjugates the axis to Z on the lowest support qubit (single-qubit
    basis changes, then a CNOT fan-in), applies T there, and undoes the
    conjugation.  Z on one qubit yields [T]; X yields [H, T, H].
    """
    if p.is_identity():
        raise ValueError("rotation axis must be a non-identity Pauli")
    basis: list[Gate] = []
    support = []
    for q in range(p.n):
        x, z = (p.x >> q) & 1, (p.z >> q) & 1
        if not (x or z):
            continue
        support.append(q)
        if x and z:
            basis.append(gate("Sdg", q))
            basis.append(gate("H", q))
        elif x:
            basis.append(gate("H", q))
    pivot = support[0]
    for q in support[1:]:
        basis.append(gate("CNOT", q, pivot))
    undo = [g.dagger() for g in reversed(basis)]
    return basis + [gate("T", pivot)] + undo


def emit_gates(solution) -> list[Gate]:
    """Full gate list for a solution: Clifford first, then each rotation.

    Accepts anything with ``pauli_sequence`` and ``clifford`` attributes.
    """
    tab = extract_clifford(solution.clifford)
    gates = tableau_to_gates(tab)
    for p in solution.pauli_sequence:
        gates.extend(rotation_gates(p))
    return gates


def verify_solution(obj, c_hat: ChannelMatrix) -> bool:
    """Exact recomposition check against the target channel.

    ``obj`` is either a solution (Pauli sequence plus Clifford factor) or
    a plain gate list.
    """
    if isinstance(obj, (list, tuple)):
        return circuit_channel(list(obj), c_hat.n) == c_hat
    m = obj.clifford
    for p in obj.pauli_sequence:
        m = rotation_channel(p) @ m
    return m == c_hat


# ---------------------------------------------------- exhaustive meet-in-middle


def _digits(x: int, base: int, count: int, n: int) -> list[Pauli]:
    out = []
    for _ in range(count):
        out.append(Pauli.from_index(x % base + 1, n))
        x //= base
    return out


def mitm_exhaustive(
    c_hat: ChannelMatrix,
    t: int,
    n: int | None = None,
    *,
    threshold: int = DEFAULT_EXHAUSTIVE_THRESHOLD,
) -> Solution | None:
    """Complete two-sided enumeration at a fixed T-count.

    Tabulates the coset-label digest of every ceil(t/2)-factor rotation
    product, then probes each floor(t/2)-factor counterpart against the
    table.  Returns a verified solution, or None only when no length-t
    decomposition of the target exists.  Refuses counts whose larger side
    exceeds ``threshold`` labels.
    """
    if n is None:
        n = c_hat.n
    if n != c_hat.n:
        raise ValueError("register size does not match the target")
    if t < 2:
        raise ValueError("exhaustive engine needs t >= 2")
    xi = 4**n - 1
    k1, k2 = (t + 1) // 2, t // 2
    if xi**k1 > threshold:
        raise ValueError(
            f"side of {xi**k1} labels exceeds the exhaustive threshold {threshold}"
        )

    paulis = [Pauli.from_index(i, n) for i in range(1, xi + 1)]
    rots = [rotation_channel(p) for p in paulis]
    trots = [rotation_channel_t(p) for p in paulis]

    def digest(label: bytes) -> bytes:
        return blake2b(label, digest_size=16).digest()

    # Side 1: depth-first over digit positions, digit i scaled by xi**i so
    # encodings match the walk side.  Digest collisions chain into lists.
    table: dict[bytes, int | list[int]] = {}
    stack = [(0, 0, ChannelMatrix.identity(n))]
    while stack:
        depth, x, part = stack.pop()
        if depth == k1:
            key = digest(coset_label(part))
            held = table.get(key)
            if held is None:
                table[key] = x
            elif isinstance(held, int):
                table[key] = [held, x]
            else:
                held.append(x)
            continue
        place = xi**depth
        for d in reversed(range(xi)):
            stack.append((depth + 1, x + d * place, rots[d] @ part))

    def left(x: int) -> ChannelMatrix:
        m = ChannelMatrix.identity(n)
        for p in _digits(x, xi, k1, n):
            m = rotation_channel(p) @ m
        return m

    # Side 2: fold transposed rotations onto the target, innermost digit
    # first, and test each completed product against the table.
    stack2 = [(k2, 0, c_hat)]
    while stack2:
        pos, x2, part = stack2.pop()
        if pos == 0:
            label = coset_label(part)
            held = table.get(digest(label))
            if held is None:
                continue
            for x1 in [held] if isinstance(held, int) else held:
                v = left(x1)
                if coset_label(v) != label:
                    continue
                d_hat = clifford_quotient(v, part)
                if d_hat is None:
                    raise ConsistencyError(
                        "equal labels with a non-signed-permutation quotient"
                    )
                seq = _digits(x1, xi, k1, n) + _digits(x2, xi, k2, n)
                chunk = x1 // xi ** (k1 - 1) if t % 2 else 0
                return Solution(
                    t=t, chunk=chunk, pauli_sequence=seq, clifford=d_hat
                )
            continue
        place = xi ** (pos - 1)
        for d in reversed(range(xi)):
            stack2.append((pos - 1, x2 + d * place, trots[d] @ part))
    return None


# ------------------------------------------------------------------ ladder


@dataclass(frozen=True)
class SynthOptions:
    """Ladder controls.

    ``engine`` picks the search for counts >= 2: "auto" enumerates while
    the larger side fits ``exhaustive_threshold`` and walks beyond,
    "exhaustive" always enumerates (refusing oversized sides), "walk"
    always walks.  ``budget`` is walk steps per chunk per round (default
    20x the side space); ``theta_exp`` overrides the auto-tuned
    distinguished-point rate; ``chunk_parallel`` > 1 searches that many
    chunks at once in separate processes.
    """

    t_min: int = 0
    t_max: int = 16
    engine: str = "auto"
    exhaustive_threshold: int = DEFAULT_EXHAUSTIVE_THRESHOLD
    seed: int = 0
    theta_exp: int | None = None
    budget: int | None = None
    rounds: int = 3
    roles: RoleConfig = RoleConfig()
    chunk_parallel: int = 0
    emit: bool = True

    def __post_init__(self):
        if not 0 <= self.t_min <= self.t_max:
            raise ValueError("need 0 <= t_min <= t_max")
        if self.engine not in ("auto", "walk", "exhaustive"):
            raise ValueError("engine must be auto, walk, or exhaustive")
        if self.exhaustive_threshold < 1:
            raise ValueError("exhaustive_threshold must be positive")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be positive")
        if self.rounds < 1:
            raise ValueError("rounds must be positive")
        if self.theta_exp is not None and not 0 <= self.theta_exp <= 62:
            raise ValueError("theta_exp outside [0, 62]")
        if self.chunk_parallel < 0:
            raise ValueError("chunk_parallel must be non-negative")


@dataclass(frozen=True)
class SynthesisResult:
    """A minimal decomposition with its provenance.

    ``optimality_flag`` is ProvenOptimal when every smaller T-count was
    excluded by a complete engine, HeuristicOptimal when some smaller
    count was only walked without success.
    """

    t: int
    pauli_sequence: tuple[Pauli, ...]
    clifford: ChannelMatrix
    clifford_tableau: Tableau
    gate_list: tuple[Gate, ...] | None
    engine: str
    optimality_flag: str
    stats: dict


def _auto_theta_exp(space: int, capacity: int) -> int:
    # Balance walk length against store pressure: rate ~ sqrt(w / space),
    # floored at 1/2 which measures best on small sides.
    if space <= capacity:
        return 1
    return min(20, max(1, round(0.5 * math.log2(space / capacity))))


def _chunk_job(cfg, c_hat, budget, roles, cancel):
    return search_chunk(cfg, c_hat, budget=budget, roles=roles, cancel=cancel)


def _walk_count(
    c_hat: ChannelMatrix, n: int, t: int, opts: SynthOptions
) -> tuple[Solution | None, dict]:
    xi = 4**n - 1
    chunks = list(range(xi)) if t % 2 else [0]
    texp = opts.theta_exp
    if texp is None:
        texp = _auto_theta_exp(xi ** (t // 2), opts.roles.store_capacity)
    agg = SearchStats()
    solution = None
    budget = opts.budget
    rounds_run = 0
    for rnd in range(opts.rounds):
        rounds_run = rnd + 1
        cfgs = [
            WalkConfig(n, t, chunk, texp, derive_salt(opts.seed, n, t, chunk, rnd))
            for chunk in chunks
        ]
        if budget is None:
            budget = default_budget(cfgs[0])
        if opts.chunk_parallel > 1 and len(cfgs) > 1:
            solution = _parallel_round(cfgs, c_hat, budget, opts, agg)
        else:
            for cfg in cfgs:
                res = search_chunk(cfg, c_hat, budget=budget, roles=opts.roles)
                agg.merge(res.stats)
                if res.solution is not None:
                    solution = res.solution
                    break
        if solution is not None:
            break
    info = {
        "engine": "walk",
        "chunks": len(chunks),
        "rounds": rounds_run,
        "theta_exp": texp,
        "budget": budget,
        "search": agg.as_dict(),
    }
    return solution, info


def _parallel_round(
    cfgs: list[WalkConfig],
    c_hat: ChannelMatrix,
    budget: int,
    opts: SynthOptions,
    agg: SearchStats,
) -> Solution | None:
    solution = None
    with mp.Manager() as mgr:
        cancel = mgr.Event()
        with ProcessPoolExecutor(max_workers=opts.chunk_parallel) as ex:
            futures = [
                ex.submit(_chunk_job, cfg, c_hat, budget, opts.roles, cancel)
                for cfg in cfgs
            ]
            for fut in as_completed(futures):
                res = fut.result()
                agg.merge(res.stats)
                if res.solution is not None and solution is None:
                    solution = res.solution
                    cancel.set()
    return solution


def synthesize(
    target: list[Gate] | ChannelMatrix,
    n: int | None = None,
    options: SynthOptions | None = None,
) -> SynthesisResult:
    """Find a minimal-T-count decomposition of a Clifford+T target.

    ``target`` is a gate list or a precomputed channel.  Tries T-counts
    from ``t_min`` up: 0 is a signed-permutation test, 1 scans all
    rotation labels, and larger counts use the exhaustive engine while
    its larger side fits ``exhaustive_threshold``, then the claw search.
    Raises NotFoundError (with a per-count report) if ``t_max`` is
    exhausted.
    """
    opts = options if options is not None else SynthOptions()
    if isinstance(target, ChannelMatrix):
        if n is not None and n != target.n:
            raise ValueError("register size does not match the target")
        c_hat = target
        n = target.n
    else:
        if n is None:
            n = 1 + max((max(g.qubits) for g in target), default=0)
        c_hat = circuit_channel(target, n)
    xi = 4**n - 1

    attempts: list[dict] = []
    proven = opts.t_min == 0

    def finish(t, seq, d_hat, engine, extra=None):
        attempts.append({"t": t, "engine": engine, "found": True, **(extra or {})})
        tab = extract_clifford(d_hat)
        sol = Solution(t=t, chunk=0, pauli_sequence=list(seq), clifford=d_hat)
        gates = tuple(emit_gates(sol)) if opts.emit else None
        return SynthesisResult(
            t=t,
            pauli_sequence=tuple(seq),
            clifford=d_hat,
            clifford_tableau=tab,
            gate_list=gates,
            engine=engine,
            optimality_flag=PROVEN if proven else HEURISTIC,
            stats={"attempts": attempts},
        )

    for t in range(opts.t_min, opts.t_max + 1):
        if t == 0:
            if c_hat.is_signed_permutation():
                return finish(0, [], c_hat, "clifford")
            attempts.append({"t": 0, "engine": "clifford", "found": False})
        elif t == 1:
            want = coset_label(c_hat)
            hit = None
            for i in range(1, xi + 1):
                p = Pauli.from_index(i, n)
                v = rotation_channel(p)
                if coset_label(v) == want:
                    hit = (p, v)
                    break
            if hit is not None:
                p, v = hit
                d_hat = clifford_quotient(v, c_hat)
                if d_hat is None:
                    raise ConsistencyError(
                        "equal labels with a non-signed-permutation quotient"
                    )
                return finish(1, [p], d_hat, "scan")
            attempts.append({"t": 1, "engine": "scan", "labels": xi, "found": False})
        elif opts.engine == "exhaustive" or (
            opts.engine == "auto"
            and xi ** ((t + 1) // 2) <= opts.exhaustive_threshold
        ):
            sol = mitm_exhaustive(c_hat, t, threshold=opts.exhaustive_threshold)
            sizes = {"side_labels": xi ** ((t + 1) // 2), "probes": xi ** (t // 2)}
            if sol is not None:
                return finish(t, sol.pauli_sequence, sol.clifford, "mitm", sizes)
            attempts.append({"t": t, "engine": "mitm", "found": False, **sizes})
        else:
            sol, info = _walk_count(c_hat, n, t, opts)
            if sol is not None:
                return finish(t, sol.pauli_sequence, sol.clifford, "walk", info)
            attempts.append({"t": t, "found": False, **info})
            proven = False

    raise NotFoundError(
        f"no decomposition with at most {opts.t_max} T gates found", attempts
    )
