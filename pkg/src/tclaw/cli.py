"""Command-line interface.

Subcommands: ``synth`` (minimal T-count of a circuit file, JSON result),
``verify`` (recheck a result file against its circuit), ``label`` (hex
coset label of a circuit's channel), and ``estimate`` (cost-model table,
optionally CSV plus figures).

Exit codes: 0 success or verified, 1 no decomposition found or failed
verification, 2 usage or parse errors, 3 internal consistency failures.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
import time
from pathlib import Path

from .channel import circuit_channel
from .circuits import parse_circuit
from .coset import coset_label
from .errors import ConsistencyError, NotFoundError, ParseError
from .paulis import Pauli, PhasedPauli
from .report import estimate_grid, format_table, render_figures, write_csv
from .search import RoleConfig, Solution
from .synth import SynthOptions, Tableau, synthesize, verify_solution
from .walk import HASH_NAME

SCHEMA = 1


def _int_list(spec: str) -> list[int]:
    """Comma-separated positive ints; ``a:b`` inclusive ranges and
    ``b^e`` powers are allowed, e.g. ``1,2,3``, ``2:7``, ``2^20``."""
    out = []
    for part in spec.split(","):
        part = part.strip()
        if ":" in part:
            a, b = map(int, part.split(":", 1))
            if b < a:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(a, b + 1))
        elif "^" in part:
            base, exp = map(int, part.split("^", 1))
            out.append(base**exp)
        else:
            out.append(int(part))
    if any(v < 0 for v in out):
        raise ValueError("values must be non-negative")
    return out


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _parse_phased(s: str, n: int) -> PhasedPauli:
    sign, rest = (0, s[1:]) if s[0] == "+" else (2, s[1:])
    if s[0] not in "+-" or rest[:1] == "i":
        raise ValueError(f"expected a signed Pauli string, got {s!r}")
    p = Pauli.from_string(rest)
    if p.n != n:
        raise ValueError("image register size mismatch")
    return PhasedPauli(p, sign)


def _result_payload(result, n: int, seed: int, wall: float) -> dict:
    tab = result.clifford_tableau
    return {
        "schema": SCHEMA,
        "found": True,
        "n": n,
        "t": result.t,
        "optimality_flag": result.optimality_flag,
        "engine": result.engine,
        "seed": seed,
        "hash": HASH_NAME,
        "wall_seconds": round(wall, 3),
        "pauli_sequence": [
            {"x": f"{p.x:#x}", "z": f"{p.z:#x}", "axes": str(p)}
            for p in result.pauli_sequence
        ],
        "clifford_tableau": {
            "x_images": [str(i) for i in tab.x_images],
            "z_images": [str(i) for i in tab.z_images],
        },
        "gate_list": (
            None
            if result.gate_list is None
            else [" ".join([g.kind, *map(str, g.qubits)]) for g in result.gate_list]
        ),
        "stats": result.stats,
    }


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cmd_synth(args) -> int:
    n, gates = parse_circuit(_read_text(args.circuit))
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    roles = RoleConfig(
        workers=args.workers,
        collectors=args.collectors,
        verifiers=args.verifiers,
        store_capacity=args.store_capacity,
    )
    opts = SynthOptions(
        t_min=args.t_min,
        t_max=args.t_max,
        engine=args.engine,
        exhaustive_threshold=args.exhaustive_threshold,
        seed=seed,
        theta_exp=args.theta_exp,
        budget=args.budget,
        rounds=args.rounds,
        roles=roles,
        chunk_parallel=args.chunk_parallel,
        emit=not args.no_gates,
    )
    start = time.perf_counter()
    try:
        result = synthesize(gates, n, opts)
    except NotFoundError as e:
        payload = {
            "schema": SCHEMA,
            "found": False,
            "n": n,
            "t_max": args.t_max,
            "seed": seed,
            "hash": HASH_NAME,
            "wall_seconds": round(time.perf_counter() - start, 3),
            "report": e.report,
        }
        _emit(payload, args.out)
        print(f"no decomposition with t <= {args.t_max}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - start
    _emit(_result_payload(result, n, seed, wall), args.out)
    if args.out is not None:
        print(
            f"t={result.t} {result.optimality_flag} ({result.engine}, "
            f"{wall:.1f}s) -> {args.out}",
            file=sys.stderr,
        )
    return 0


def _cmd_verify(args) -> int:
    n, gates = parse_circuit(_read_text(args.circuit))
    try:
        payload = json.loads(_read_text(args.result))
    except json.JSONDecodeError as e:
        print(f"error: unreadable result file: {e}", file=sys.stderr)
        return 2
    if payload.get("schema") != SCHEMA:
        print("error: unsupported result schema", file=sys.stderr)
        return 2
    if not payload.get("found", False):
        print("result records no decomposition", file=sys.stderr)
        return 1

    c_hat = circuit_channel(gates, n)

    def fail(msg: str) -> int:
        print(f"not verified: {msg}", file=sys.stderr)
        return 1

    if payload["n"] != n:
        return fail(f"result register {payload['n']} != circuit register {n}")
    try:
        seq = [
            Pauli(n, int(e["x"], 16), int(e["z"], 16))
            for e in payload["pauli_sequence"]
        ]
        tab = Tableau(
            n,
            tuple(_parse_phased(s, n) for s in payload["clifford_tableau"]["x_images"]),
            tuple(_parse_phased(s, n) for s in payload["clifford_tableau"]["z_images"]),
        )
        d_hat = tab.to_matrix()
    except (KeyError, ValueError, ConsistencyError) as e:
        return fail(f"result content is not a valid decomposition ({e})")
    if len(seq) != payload["t"]:
        return fail("sequence length does not match the recorded t")
    sol = Solution(t=payload["t"], chunk=0, pauli_sequence=seq, clifford=d_hat)
    if not verify_solution(sol, c_hat):
        return fail("rotation sequence does not recompose the circuit")
    if payload.get("gate_list") is not None:
        text = "\n".join([f"qubits {n}", *payload["gate_list"]])
        gn, glist = parse_circuit(text)
        if not verify_solution(glist, c_hat):
            return fail("gate list does not recompose the circuit")
    print(f"verified: t={payload['t']} on {n} qubit(s)")
    return 0


def _cmd_label(args) -> int:
    n, gates = parse_circuit(_read_text(args.circuit))
    print(coset_label(circuit_channel(gates, n)).hex())
    return 0


def _cmd_estimate(args) -> int:
    rows = estimate_grid(args.n, args.t, args.w, args.m, args.alpha)
    sys.stdout.write(format_table(rows))
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        csv_path = os.path.join(args.out, "estimate.csv")
        write_csv(rows, csv_path)
        written = [csv_path] + render_figures(rows, args.out)
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tclaw",
        description="Minimal T-count synthesis for Clifford+T circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize a circuit file")
    synth.add_argument("circuit", help="circuit file path, or - for stdin")
    synth.add_argument("--out", help="write the JSON result here")
    synth.add_argument("--t-min", type=int, default=0)
    synth.add_argument("--t-max", type=int, default=16)
    synth.add_argument("--seed", type=int, default=None,
                       help="walk seed; random and recorded by default")
    synth.add_argument("--engine", choices=("auto", "walk", "exhaustive"),
                       default="auto")
    synth.add_argument("--exhaustive-threshold", type=int,
                       default=SynthOptions().exhaustive_threshold)
    synth.add_argument("--theta-exp", type=int, default=None,
                       help="distinguished-point rate 2^-k (default: tuned)")
    synth.add_argument("--budget", type=int, default=None,
                       help="walk steps per chunk per round")
    synth.add_argument("--rounds", type=int, default=3)
    synth.add_argument("--workers", type=int,
                       default=int(os.environ.get("TCLAW_WORKERS", "1")))
    synth.add_argument("--collectors", type=int, default=None)
    synth.add_argument("--verifiers", type=int, default=None)
    synth.add_argument("--store-capacity", type=_int_list_single,
                       default=RoleConfig().store_capacity)
    synth.add_argument("--chunk-parallel", type=int, default=0)
    synth.add_argument("--no-gates", action="store_true",
                       help="skip gate-list emission")
    synth.set_defaults(func=_cmd_synth)

    verify = sub.add_parser("verify", help="recheck a result file")
    verify.add_argument("result", help="JSON result path")
    verify.add_argument("circuit", help="circuit file path, or - for stdin")
    verify.set_defaults(func=_cmd_verify)

    label = sub.add_parser("label", help="hex coset label of a circuit")
    label.add_argument("circuit", help="circuit file path, or - for stdin")
    label.set_defaults(func=_cmd_label)

    est = sub.add_parser("estimate", help="cost-model table")
    est.add_argument("--n", type=_int_list, default=[1, 2, 3])
    est.add_argument("--t", type=_int_list, default=list(range(1, 9)))
    est.add_argument("--w", type=_int_list, default=[1 << 20])
    est.add_argument("--m", type=_int_list, default=[1])
    est.add_argument("--alpha", type=float, default=3.0)
    est.add_argument("--out", help="directory for estimate.csv and figures")
    est.set_defaults(func=_cmd_estimate)
    return parser


def _int_list_single(spec: str) -> int:
    values = _int_list(spec)
    if len(values) != 1:
        raise ValueError("expected a single value")
    return values[0]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ConsistencyError as e:
        print(f"internal consistency failure: {e}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
