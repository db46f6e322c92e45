"""Command-line entry point: ``swaphom <subcommand> ...``.

Exit codes: 0 success, 1 failed verification, 2 bad arguments or input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fingerprint as fp
from . import fock_sim as fs
from . import protocols as pr
from . import qubit_sim as qs
from . import verify
from .exceptions import SwapHomError

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _load_json_arg(text: str):
    """Inline JSON, or ``@path`` to read it from a file."""
    try:
        if text.startswith("@"):
            text = Path(text[1:]).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read state {text!r}: {exc}") from exc


def _amplitudes(text: str) -> np.ndarray:
    data = _load_json_arg(text)
    if not isinstance(data, list) or not data:
        raise UsageError("a state is a non-empty JSON list of [re, im] pairs")
    return qs.parse_amplitudes(data)


def _normalized(amps: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise UsageError("state amplitudes must not all vanish")
    return amps / norm


def _cmd_swap_test(args) -> tuple[dict, int]:
    phi = qs.PureState.from_amplitudes(_amplitudes(args.phi))
    psi = qs.PureState.from_amplitudes(_amplitudes(args.psi))
    if args.variant == "ancilla":
        stats = pr.ancilla_swap_test_prob(phi, psi)
    else:
        stats = pr.destructive_swap_test(phi, psi)
    report = {"variant": args.variant, "stats": stats.to_dict()}
    if args.shots > 0:
        if args.variant == "destructive":
            sampler = verify.destructive_sampler(phi, psi)
        else:
            sampler = _bernoulli_sampler(stats.p_pass)
        est, err = verify.monte_carlo_estimate(sampler, args.shots, args.seed)
        report["sampled"] = {"shots": args.shots, "seed": args.seed,
                             "pass_frequency": est, "std_error": err}
    return report, 0


def _bernoulli_sampler(p_pass: float):
    def sample(rng, shots):
        return rng.random(shots) < p_pass
    return sample


def _cmd_hom(args) -> tuple[dict, int]:
    phi, psi = _normalized(_amplitudes(args.phi)), _normalized(_amplitudes(args.psi))
    if args.d is not None and not (phi.size == psi.size == args.d):
        raise UsageError(f"--d {args.d} does not match state lengths {phi.size}, {psi.size}")
    det, stats = pr.hom_swap_test(phi, psi)
    return {"detector_stats": det.to_dict(), "stats": stats.to_dict()}, 0


def _cmd_optical(args) -> tuple[dict, int]:
    phi, psi = _normalized(_amplitudes(args.phi)), _normalized(_amplitudes(args.psi))
    _, hom = pr.hom_swap_test(phi, psi)
    report = {
        "hom_destructive": hom.to_dict(),
        "detector_reduction": pr.optical_detector_reduction(phi, psi).to_dict(),
    }
    if args.with_ancilla:
        report["ancilla_test"] = pr.optical_swap_test_with_ancilla(phi, psi).to_dict()
    return report, 0


def _cmd_fingerprint(args) -> tuple[dict, int]:
    if args.generator:
        code = fp.linear_code(fp.load_generator(args.generator))
    else:
        code = fp.simplex_code(args.k)
    result = fp.compare_strings(code, args.x, args.y, args.rounds, args.backend, args.seed)
    report = {
        "x": args.x,
        "y": args.y,
        "code": code.to_dict(),
        "rounds": args.rounds,
        "verdict": result.verdict.value,
        "fail_round": result.fail_round,
        "p_false_equal_bound": fp.false_equal_bound(code.delta, args.rounds),
    }
    return report, 0


def _cmd_verify(args) -> tuple[dict, int]:
    try:
        dims = [int(d) for d in args.dims.split(",") if d.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --dims {args.dims!r}") from exc
    report = verify.run_default_suite(dims, args.trials, args.tol, args.seed)
    return report, 0 if report["passed"] else 1


def _cmd_wavepacket(args) -> tuple[dict, int]:
    xi1, dt1 = fs.load_wavepacket_csv(args.xi1)
    xi2, dt2 = fs.load_wavepacket_csv(args.xi2)
    if abs(dt1 - dt2) > 1e-9 * dt1:
        raise UsageError(f"sample spacings differ: {dt1} vs {dt2}")
    p = fs.wavepacket_coincidence(xi1, xi2, dt1)
    return {"samples": int(xi1.size), "dt": dt1, "p_coincidence": p, "p_pass": 1.0 - p}, 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="seed for every random stream (default: %(default)s)")
    common.add_argument("--json", action="store_true", help="print machine-readable JSON")

    parser = argparse.ArgumentParser(
        prog="swaphom", description="SWAP tests, Hong-Ou-Mandel interference and fingerprinting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("swap-test", parents=[common], help="qubit-circuit SWAP test")
    p.add_argument("--phi", required=True, help="JSON list of [re, im] pairs, or @file")
    p.add_argument("--psi", required=True)
    p.add_argument("--variant", choices=["ancilla", "destructive"], default="ancilla")
    p.add_argument("--shots", type=int, default=0)
    p.set_defaults(func=_cmd_swap_test)

    p = sub.add_parser("hom", parents=[common], help="Hong-Ou-Mandel test on two photons")
    p.add_argument("--d", type=int, default=None, help="internal dimension (checked)")
    p.add_argument("--phi", required=True)
    p.add_argument("--psi", required=True)
    p.set_defaults(func=_cmd_hom)

    p = sub.add_parser("optical", parents=[common], help="optical SWAP-test chain")
    p.add_argument("--phi", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--with-ancilla", action="store_true")
    p.set_defaults(func=_cmd_optical)

    p = sub.add_parser("fingerprint", parents=[common], help="compare two bitstrings")
    p.add_argument("--k", type=int, default=3, help="simplex code dimension")
    p.add_argument("--generator", help="0/1 generator matrix file (overrides --k)")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument("--backend", choices=list(fp.BACKENDS), default="optical")
    p.set_defaults(func=_cmd_fingerprint)

    p = sub.add_parser("verify", parents=[common], help="identity and agreement checks")
    p.add_argument("--dims", default="2,4,8")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--tol", type=float, default=verify.DEFAULT_TOL)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("wavepacket", parents=[common], help="coincidence of sampled wavepackets")
    p.add_argument("--xi1", required=True, help="CSV with columns t, re[, im]")
    p.add_argument("--xi2", required=True)
    p.set_defaults(func=_cmd_wavepacket)
    return parser


def _format_human(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item and not _is_flat_list(item):
                lines.append(f"{pad}{key}:")
                lines.extend(_format_human(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, dict):
                lines.append(f"{pad}-")
                lines.extend(_format_human(item, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    return lines


def _is_flat_list(value) -> bool:
    return isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value)


def _scalar(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, list):
        return ", ".join(_scalar(v) for v in value)
    if isinstance(value, dict):
        return "{}"
    return str(value)


def _format_verify(report: dict) -> list[str]:
    rows = [(r["identity_name"], f"{r['max_deviation']:.3e}", "ok" if r["passed"] else "FAILED")
            for r in report["identities"]]
    width = max(len(name) for name, _, _ in rows)
    lines = [f"{'identity':<{width}}  {'deviation':>10}  status"]
    lines += [f"{name:<{width}}  {dev:>10}  {status}" for name, dev, status in rows]
    agr = report["agreement"]
    dims = ",".join(map(str, agr["dims_tested"]))
    lines.append("")
    lines.append(f"agreement: {agr['trial_count']} pairs at d={dims}, seed {agr['seed']}, "
                 f"max_abs_error {agr['max_abs_error']:.3e} (tol {agr['tolerance']:g})")
    lines.append("PASSED" if report["passed"] else "FAILED")
    return lines


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except (UsageError, SwapHomError, OSError) as exc:
        print(f"swaphom {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps(report, indent=2))
    elif args.command == "verify":
        print("\n".join(_format_verify(report)))
    else:
        print("\n".join(_format_human(report)))
    return code


if __name__ == "__main__":
    sys.exit(main())
