"""Command-line entry point.

Every command returns a list of flat records which are rendered as text,
CSV or JSON lines.  All randomness flows from ``--seed``, so identical argv
gives identical output.

Exit codes: 0 success, 2 protocol abort, 1 usage or internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import security as sec
from .errors import TDIQKDError
from .game import NoiseSpec, eta_from_p, simulate_rounds
from .gates import bell_state, circuit_settings, run_circuit
from .ks import check_colouring, colouring_search, load_rayset, ortho_structure
from .linalg import fidelity_pure
from .protocol import SessionConfig, run_session
from .protocol.postprocess import RATE_FUNCTIONS
from .streams import GAME, substream

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ABORT = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for protocol aborts
    def error(self, message):
        self.print_help(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class Result:
    """Records to render plus the exit status of the command."""

    def __init__(self, rows: list, status: int = EXIT_OK, columns: Optional[list] = None):
        self.rows = rows
        self.status = status
        self.columns = columns or (list(rows[0]) if rows else [])


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def render(result: Result, fmt: str) -> str:
    cols = result.columns
    if fmt == "json-lines":
        return "".join(json.dumps({c: row.get(c) for c in cols}) + "\n" for row in result.rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in result.rows:
            w.writerow([_fmt(row.get(c)) for c in cols])
        return buf.getvalue()
    if len(result.rows) == 1:
        width = max(len(c) for c in cols)
        return "".join(f"{c:<{width}}  {_fmt(result.rows[0].get(c))}\n" for c in cols)
    table = [cols] + [[_fmt(row.get(c)) for c in cols] for row in result.rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    return "".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip() + "\n" for r in table)


# ---------------------------------------------------------------------------
# commands


def cmd_run_session(args) -> Result:
    config = SessionConfig(
        rounds=args.rounds,
        eta_tolerance=args.eta_tol,
        gamma=args.gamma,
        noise=NoiseSpec.depolarizing(args.noise),
        block_size=args.block_size,
        seed=args.seed,
        epsilon_sec=args.epsilon_sec,
        rate_fn=args.rate_fn,
        finite_key_c=args.finite_c,
        rayset=load_rayset(args.set),
        transport=args.transport,
    )
    tr = run_session(config)
    if args.transcript:
        Path(args.transcript).write_text(tr.dumps())
    row = {
        "outcome": tr.status,
        "rounds": tr.rounds,
        "kept": len(tr.kept_indices),
        "tested": len(tr.test_indices),
        "discarded": tr.discarded,
        "observed_failure": tr.observed_failure,
        "raw_key_bits": len(tr.raw_key_a),
        "raw_keys_equal": tr.raw_key_a == tr.raw_key_b,
        "leakage_bits": tr.leakage_bits,
        "hash_verified": tr.hash_verified,
        "sizing": tr.sizing,
        "output_length": tr.output_length,
        "final_keys_equal": tr.final_key_a == tr.final_key_b if tr.completed else None,
    }
    return Result([row], EXIT_OK if tr.completed else EXIT_ABORT)


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with ``stop`` included (to within a tenth of a step)."""
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise _UsageError(f"grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise _UsageError("grid needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 0.1)) + 1
    # round away accumulated step error so the column reads back cleanly
    return np.round(start + step * np.arange(n), 12)


def _optional(fn, *args):
    try:
        return fn(*args)
    except TDIQKDError:
        return None


def cmd_keyrate_curve(args) -> Result:
    mi_col = f"mutual_info_r{args.r:g}"
    cols = ["eta", "key_rate", "bb84_rate", mi_col]
    rows = []
    for eta in parse_grid(args.grid).tolist():
        rows.append(
            {
                "eta": eta,
                "key_rate": _optional(sec.key_rate, eta),
                "bb84_rate": _optional(sec.bb84_rate, eta),
                mi_col: _optional(sec.mutual_information_printed, eta, args.r),
            }
        )
    return Result(rows, columns=cols)


def cmd_rate_bound(args) -> Result:
    try:
        lam = [float(t) for t in args.lambdas.split(",")]
    except ValueError:
        raise _UsageError("--lambdas takes nine comma-separated numbers") from None
    report = sec.entropies(sec.Spectrum9(lam))
    row = {
        "h_XE": report.h_XE,
        "h_E": report.h_E,
        "h_XY": report.h_XY,
        "h_Y": report.h_Y,
        "rate_lower_bound": report.rate_lb,
        "trace_XY": report.trace_XY,
    }
    return Result([row])


def cmd_ks_verify(args) -> Result:
    rayset = load_rayset(args.set)
    structure = ortho_structure(rayset)
    result = colouring_search(rayset, structure)
    row = {
        "set": rayset.name,
        "rays": len(rayset),
        "pairs": len(structure.pairs),
        "triples": len(structure.triples),
        "verdict": "Colourable" if result.colourable else "Uncolourable",
        "nodes_explored": result.nodes_explored,
    }
    if result.colourable:
        violations = check_colouring(structure, result.assignment)
        row["colouring_valid"] = not violations
        if violations:
            return Result([row], EXIT_ERROR)
    return Result([row])


def cmd_circuit_check(args) -> Result:
    rows = []
    ok = True
    for j in range(9):
        x, u = circuit_settings(j)
        f = fidelity_pure(run_circuit(x, u), bell_state(j))
        ok &= f >= 1.0 - 1e-12
        rows.append({"j": j, "input": x, "U": u, "fidelity": round(f, 15)})
    return Result(rows, EXIT_OK if ok else EXIT_ERROR)


def cmd_game_montecarlo(args) -> Result:
    if args.rounds <= 0:
        raise _UsageError("--rounds must be positive")
    noise = NoiseSpec.depolarizing(args.noise)
    rayset = load_rayset(args.set)
    records = simulate_rounds(noise.state(), rayset, args.rounds, substream(args.seed, GAME))
    kept = [r for r in records if r.kept]
    matched = sum(r.matched for r in kept)
    match_rate = matched / len(kept) if kept else None
    row = {
        "rounds": args.rounds,
        "noise_p": noise.effective_p,
        "kept": len(kept),
        "keep_rate": len(kept) / args.rounds,
        "match_rate": match_rate,
        "eta_estimate": None if match_rate is None else 1.0 - match_rate,
        "eta_analytic": eta_from_p(noise.effective_p),
    }
    return Result([row])


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="write records to this file instead of stdout")
    g.add_argument(
        "--format",
        choices=("text", "csv", "json-lines"),
        default=argparse.SUPPRESS,
        help="output format (default: from the --out suffix, else text)",
    )

    parser = _Parser(prog="tdiqkd", description="Ternary DIQKD simulator.", parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("run-session", parents=[common], help="run one full key-distribution session")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0, help="depolarizing probability p")
    p.add_argument("--eta-tol", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=0.2, help="fraction of kept rounds used for testing")
    p.add_argument("--block-size", type=int, default=8)
    p.add_argument("--epsilon-sec", type=float, default=1e-9)
    p.add_argument("--rate-fn", choices=RATE_FUNCTIONS, default="h2")
    p.add_argument("--finite-c", type=float, default=0.0, help="finite-key constant c (0 means asymptotic)")
    p.add_argument("--set", default="peres33", help="built-in ray set name or ray file")
    p.add_argument("--transport", choices=("memory", "socket"), default="memory")
    p.add_argument("--transcript", help="write the serialized transcript here")
    p.set_defaults(fn=cmd_run_session)

    p = sub.add_parser("keyrate-curve", parents=[common], help="tabulate key rate, BB84 rate and mutual information")
    p.add_argument("--r", type=float, default=1.5, help="noise-family parameter r")
    p.add_argument("--grid", default="0:0.5:0.005", help="start:stop:step")
    p.set_defaults(fn=cmd_keyrate_curve)

    p = sub.add_parser("rate-bound", parents=[common], help="entropies for a Bell-diagonal spectrum")
    p.add_argument("--lambdas", required=True, help="nine comma-separated eigenvalues")
    p.set_defaults(fn=cmd_rate_bound)

    p = sub.add_parser("ks-verify", parents=[common], help="decide colourability of a ray set")
    p.add_argument("--set", default="peres33", help="built-in ray set name or ray file")
    p.set_defaults(fn=cmd_ks_verify)

    p = sub.add_parser("circuit-check", parents=[common], help="fidelity of the Bell-state circuit")
    p.set_defaults(fn=cmd_circuit_check)

    p = sub.add_parser("game-montecarlo", parents=[common], help="Monte-Carlo estimate of keep and match rates")
    p.add_argument("--rounds", type=int, default=10000)
    p.add_argument("--noise", type=float, default=0.0, help="depolarizing probability p")
    p.add_argument("--set", default="peres33", help="built-in ray set name or ray file")
    p.set_defaults(fn=cmd_game_montecarlo)
    return parser


_SUFFIX_FORMATS = {".csv": "csv", ".jsonl": "json-lines", ".ndjson": "json-lines"}


def _format_for(out: Optional[str]) -> str:
    """Default format: taken from the ``--out`` suffix, else text."""
    return _SUFFIX_FORMATS.get(Path(out).suffix.lower(), "text") if out else "text"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    args.seed = getattr(args, "seed", 0)
    args.out = getattr(args, "out", None)
    args.format = getattr(args, "format", None) or _format_for(args.out)
    if not 0 <= args.seed < 2**64:
        print("tdiqkd: error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_ERROR

    try:
        result = args.fn(args)
    except _UsageError as exc:
        print(f"tdiqkd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (TDIQKDError, ValueError, KeyError, OSError) as exc:
        print(f"tdiqkd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    body = render(result, args.format)
    seed_line = json.dumps({"seed": args.seed}) if args.format == "json-lines" else f"# seed={args.seed}"
    if args.out:
        Path(args.out).write_text(body)
        print(seed_line)
        print(f"# wrote {len(result.rows)} records to {args.out}")
    else:
        sys.stdout.write(seed_line + "\n" + body)
    return result.status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
