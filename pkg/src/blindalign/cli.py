"""
Command-line front end.

Subcommands::

    blindalign pattern  --tx M --users K [--emit-beamforming]
    blindalign verify   --tx M --users K [--group-size J] [--draws N] [--seed S]
    blindalign rate     --tx M --users K [--snr 40:10:70] [--trials N] [--json]
    blindalign dof      --tx M --users K [--snr ...] [--trials N]
    blindalign selftest

Exit status is 0 on success, 1 when a check reports FAIL and 2 for usage
errors. All randomness comes from ``--seed``.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .analysis import dof_slope, monte_carlo_rate, verify_alignment
from .beamform import build_beamforming
from .config import DEFAULT_MAX_LENGTH, DEFAULT_SNR_DB, SystemConfig
from .errors import BlindAlignError
from .golden import run_golden
from .matkernel import DEFAULT_REL_TOL
from .pattern import build_supersymbol

DOF_TOLERANCE = 0.02


def parse_snr(text: str) -> tuple[float, ...]:
    """``"40,50,60"`` or ``"start:step:stop"`` (stop included) in dB."""
    try:
        if ":" in text:
            start, step, stop = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(float(start + i * step) for i in range(n))
        values = tuple(float(v) for v in text.split(",") if v.strip())
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid SNR grid {text!r}; use a comma list or start:step:stop") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tx", type=int, required=True, metavar="M",
                        help="transmit antennas (and receive antenna modes)")
    common.add_argument("--users", type=int, required=True, metavar="K",
                        help="number of users (multicast groups)")
    common.add_argument("--group-size", type=int, default=1, metavar="J",
                        help="receivers per multicast group (default 1)")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL,
                        help="relative tolerance for numeric ranks")
    common.add_argument("--max-length", type=int, default=DEFAULT_MAX_LENGTH,
                        help="refuse supersymbols longer than this")
    common.add_argument("--out", help="write the result to this file instead of stdout")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--snr", type=parse_snr, default=DEFAULT_SNR_DB,
                    help="SNR grid in dB: comma list or start:step:stop")
    mc.add_argument("--trials", type=_positive_int, default=1000,
                    help="channel draws per SNR point (default 1000)")
    mc.add_argument("--workers", type=_positive_int, default=1,
                    help="worker processes for the Monte Carlo loop")

    parser = argparse.ArgumentParser(
        prog="blindalign",
        description="Blind interference alignment for the MISO broadcast channel.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pattern", parents=[common], help="dump the switching pattern")
    p.add_argument("--emit-beamforming", action="store_true",
                   help="also dump every user's beamforming matrix")

    v = sub.add_parser("verify", parents=[common], help="check effective-channel ranks")
    v.add_argument("--draws", type=_positive_int, default=1,
                   help="number of channel draws (default 1)")

    r = sub.add_parser("rate", parents=[common, mc], help="Monte Carlo rate curve as CSV")
    r.add_argument("--json", action="store_true", help="emit the rows as a JSON array")

    sub.add_parser("dof", parents=[common, mc], help="fit the DoF slope")
    sub.add_parser("selftest", help="run the built-in reference cases")
    return parser


def _config(args) -> SystemConfig:
    return SystemConfig(
        M=args.tx, K=args.users, J=args.group_size,
        snr_db=getattr(args, "snr", DEFAULT_SNR_DB),
        trials=getattr(args, "trials", 1), seed=args.seed, rel_tol=args.rel_tol,
        out=args.out, max_length=args.max_length,
        workers=getattr(args, "workers", 1),
    )


def _emit(text: str, path: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_pattern(cfg: SystemConfig, args) -> int:
    pat = build_supersymbol(cfg.M, cfg.K)
    text = pat.dump()
    if args.emit_beamforming:
        text += "\n" + build_beamforming(pat).dump()
    _emit(text, cfg.out)
    return 0


def cmd_verify(cfg: SystemConfig, args) -> int:
    report = verify_alignment(cfg, draws=args.draws)
    _emit(report.to_text(), cfg.out)
    return 0 if report.passed else 1


def cmd_rate(cfg: SystemConfig, args) -> int:
    curve = monte_carlo_rate(cfg)
    _emit(curve.to_json() if args.json else curve.to_csv(), cfg.out)
    return 0


def cmd_dof(cfg: SystemConfig, args) -> int:
    curve = monte_carlo_rate(cfg)
    slope = dof_slope(curve)
    target = cfg.dof_target
    ok = abs(slope - target) <= DOF_TOLERANCE * target
    text = (f"M={cfg.M} K={cfg.K} J={cfg.J} trials={cfg.trials} "
            f"snr_db={','.join(f'{s:g}' for s in cfg.snr_db)}\n"
            f"slope={slope:.6f} target={target:.6f} "
            f"rel_err={abs(slope - target) / target:.4%}\n"
            f"{'PASS' if ok else 'FAIL'}")
    _emit(text, cfg.out)
    return 0 if ok else 1


def cmd_selftest() -> int:
    results = run_golden()
    lines = [f"{'ok  ' if r.passed else 'FAIL'} {r.name}" + (f": {r.detail}" if r.detail else "")
             for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} passed")
    lines.append("PASS" if ok else "FAIL")
    _emit("\n".join(lines), None)
    return 0 if ok else 1


COMMANDS = {"pattern": cmd_pattern, "verify": cmd_verify, "rate": cmd_rate, "dof": cmd_dof}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "selftest":
        return cmd_selftest()
    try:
        cfg = _config(args)
    except BlindAlignError as exc:
        parser.error(str(exc))
    return COMMANDS[args.command](cfg, args)


if __name__ == "__main__":
    sys.exit(main())
