"""
Achievable rates, Monte Carlo curves, DoF slopes and alignment verification.

Rates are in bits per channel use. With zero-forcing, user ``k`` gets
``log2 det(I + p H H^H) / (M + K - 1)`` where ``p = (M+K-1) P / (M^2 K)``
and ``H`` stacks ``h(1..M-1) / sqrt(K)`` over ``h(M)``. With multicast
groups (``J > 1``) a user's rate is the mean over its group members, whose
rates share one distribution.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .beamform import build_beamforming, stream_power
from .channel import (ChannelRealization, effective_channel, sample_channels,
                      sample_streams, simulate_transmission)
from .config import SystemConfig
from .errors import InvalidArgument
from .matkernel import (DEFAULT_REL_TOL, certify_full_rank, child_rng,
                        log_det_hermitian_plus_identity, numeric_rank)
from .pattern import (blocks_per_user, build_supersymbol, supersymbol_length)
from .receiver import build_projectors, zf_decode

CSV_HEADER = ("M", "K", "J", "snr_db", "trials", "sum_rate_closed", "sum_rate_sim",
              "sum_rate_approx", "stderr")

# Joint-rank checks switch to the sparse certificate above this many entries.
_DENSE_JOINT_ENTRIES = 250_000


def db_to_linear(snr_db) -> np.ndarray:
    return 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)


def zf_channel(ch: ChannelRealization) -> np.ndarray:
    """``H`` for every receiver, shape ``(K, J, M, M)``: rows 1..M-1 scaled by ``1/sqrt(K)``."""
    scale = np.full(ch.M, 1.0 / np.sqrt(ch.K))
    scale[-1] = 1.0
    return ch.h * scale[:, None]


def _gram(H: np.ndarray) -> np.ndarray:
    return H @ np.conj(np.swapaxes(H, -1, -2))


def _check_ch(ch: ChannelRealization, M: int, K: int) -> None:
    if (ch.M, ch.K) != (M, K):
        raise InvalidArgument(f"channel is for (M, K)={(ch.M, ch.K)}, not {(M, K)}")


@dataclass(frozen=True)
class Rates:
    """Rates of every receiver; ``per_receiver[k-1, member-1]``."""

    per_receiver: np.ndarray

    @property
    def per_user(self) -> np.ndarray:
        return self.per_receiver.mean(axis=1)

    @property
    def sum_rate(self) -> float:
        return float(self.per_user.sum())


def closed_form_rate(ch: ChannelRealization, M: int, K: int, P: float) -> Rates:
    """Zero-forcing rate of every receiver for one channel realization."""
    _check_ch(ch, M, K)
    if P < 0:
        raise InvalidArgument(f"power must be nonnegative, got {P}")
    p = (M + K - 1) * P / (M * M * K)
    r = log_det_hermitian_plus_identity(_gram(zf_channel(ch)), p) / (M + K - 1)
    return Rates(np.asarray(r))


def high_snr_approx(ch: ChannelRealization, M: int, K: int, P: float) -> Rates:
    """High-SNR form ``log2 det(p Hbar Hbar^H)/(M+K-1) - (M-1) log2 K/(M+K-1)``."""
    _check_ch(ch, M, K)
    if not P > 0:
        raise InvalidArgument(f"power must be positive, got {P}")
    p = (M + K - 1) * P / (M * M * K)
    _, logdet = np.linalg.slogdet(_gram(ch.h))
    r = (M * np.log2(p) + logdet / np.log(2.0)) / (M + K - 1)
    return Rates(r - (M - 1) * np.log2(K) / (M + K - 1))


def tdma_rate(ch: ChannelRealization, P: float) -> float:
    """Reference: users take turns, each served over mode 1 at full power."""
    g = np.sum(np.abs(ch.h[:, 0, 0, :]) ** 2, axis=-1)
    return float(np.mean(np.log2(1.0 + P * g)))


@dataclass
class RateCurve:
    """Monte Carlo averages per SNR point (sum rates in bits per channel use)."""

    M: int
    K: int
    J: int
    trials: int
    snr_db: np.ndarray
    sum_rate_closed: np.ndarray
    sum_rate_sim: np.ndarray
    sum_rate_approx: np.ndarray
    stderr: np.ndarray
    per_receiver_closed: np.ndarray
    per_receiver_stderr: np.ndarray
    tdma: np.ndarray
    max_identity_gap: float
    max_residual: float
    samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def half_width(self) -> np.ndarray:
        """95% normal confidence half-widths of the closed-form sum rate."""
        return 1.96 * self.stderr

    @property
    def per_user_closed(self) -> np.ndarray:
        return self.per_receiver_closed.mean(axis=-1)

    def rows(self) -> list[dict]:
        return [
            {"M": self.M, "K": self.K, "J": self.J, "snr_db": float(s),
             "trials": self.trials, "sum_rate_closed": float(c),
             "sum_rate_sim": float(m), "sum_rate_approx": float(a), "stderr": float(e)}
            for s, c, m, a, e in zip(self.snr_db, self.sum_rate_closed, self.sum_rate_sim,
                                     self.sum_rate_approx, self.stderr)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows():
            w.writerow([_fmt(row[key]) for key in CSV_HEADER])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.rows(), indent=2)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(round(v, 12)) if np.isfinite(v) else "nan"
    return str(v)


def _trial_chunk(cfg: SystemConfig, indices) -> dict[str, np.ndarray]:
    """Run trials `indices`; every trial draws from its own child generator."""
    M, K, J = cfg.M, cfg.K, cfg.J
    powers = db_to_linear(cfg.snr_db)
    pat = build_supersymbol(M, K)
    bf = build_beamforming(pat)
    projectors = {k: build_projectors(pat, k) for k in range(1, K + 1)}
    L = pat.L
    n = len(indices)
    shape = (n, powers.size, K, J)
    closed, sim, approx = np.empty(shape), np.empty(shape), np.empty(shape)
    tdma = np.empty((n, powers.size))
    residual = np.zeros(n)
    for i, index in enumerate(indices):
        rng = child_rng(cfg.seed, index)
        ch = sample_channels(M, K, J, rng, cfg.rel_tol)
        for s, P in enumerate(powers):
            closed[i, s] = closed_form_rate(ch, M, K, P).per_receiver
            approx[i, s] = high_snr_approx(ch, M, K, P).per_receiver
            tdma[i, s] = tdma_rate(ch, P)
            pw = stream_power(M, K, P)
            u = sample_streams(bf, rng)
            for recv in simulate_transmission(ch, pat, bf, pw, u, rng):
                k, member = recv.rx
                total = 0.0
                for proj in projectors[k]:
                    out = zf_decode(proj, ch, recv)
                    total += out.mutual_information(pw.per_stream_power)
                    ub = u[k - 1, (proj.block - 1) * M: proj.block * M]
                    expect = (np.sqrt(pw.per_stream_power) * out.channel @ ub
                              + proj.matrix @ proj.gather(recv.noise))
                    err = np.linalg.norm(out.observation - expect)
                    residual[i] = max(residual[i],
                                      err / max(np.linalg.norm(out.observation), 1e-300))
                sim[i, s, k - 1, member - 1] = total / L
    return {"closed": closed, "sim": sim, "approx": approx, "tdma": tdma,
            "residual": residual}


def _run_trials(cfg: SystemConfig) -> dict[str, np.ndarray]:
    indices = np.arange(cfg.trials)
    if cfg.workers <= 1 or cfg.trials < 2:
        return _trial_chunk(cfg, indices)
    chunks = [c for c in np.array_split(indices, min(cfg.workers * 4, cfg.trials)) if c.size]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        parts = list(pool.map(_trial_chunk, [cfg] * len(chunks), chunks))
    return {key: np.concatenate([part[key] for part in parts]) for key in parts[0]}


def _stderr(x: np.ndarray, axis: int = 0) -> np.ndarray:
    n = x.shape[axis]
    if n < 2:
        return np.full(np.delete(x.shape, axis), np.nan)
    return np.std(x, axis=axis, ddof=1) / np.sqrt(n)


def monte_carlo_rate(cfg: SystemConfig, keep_samples: bool = False) -> RateCurve:
    """
    Average the closed-form rates over ``cfg.trials`` channel draws.

    Each trial also simulates the full transmission, zero-forces every
    alignment block and evaluates the mutual information of the projected
    channel. ``max_identity_gap`` is the largest per-realization difference
    between the two rate computations. The same draws serve every SNR point.
    """
    res = _run_trials(cfg)
    sums = res["closed"].mean(axis=-1).sum(axis=-1)      # (trials, snr)
    gap = float(np.max(np.abs(res["sim"] - res["closed"])))
    return RateCurve(
        M=cfg.M, K=cfg.K, J=cfg.J, trials=cfg.trials,
        snr_db=np.asarray(cfg.snr_db),
        sum_rate_closed=sums.mean(axis=0),
        sum_rate_sim=res["sim"].mean(axis=-1).sum(axis=-1).mean(axis=0),
        sum_rate_approx=res["approx"].mean(axis=-1).sum(axis=-1).mean(axis=0),
        stderr=_stderr(sums),
        per_receiver_closed=res["closed"].mean(axis=0),
        per_receiver_stderr=_stderr(res["closed"]),
        tdma=res["tdma"].mean(axis=0),
        max_identity_gap=gap,
        max_residual=float(res["residual"].max()),
        samples=sums if keep_samples else None,
    )


def dof_slope(curve: RateCurve, which: str = "closed") -> float:
    """
    Least-squares slope of sum rate against ``log2 P``.

    Needs at least two SNR points, all at 40 dB or more, where the constant
    term of the rate no longer distorts the pre-log.
    """
    snr = np.asarray(curve.snr_db, dtype=float)
    if snr.size < 2:
        raise InvalidArgument("need at least two SNR points")
    if np.any(snr < 40.0):
        raise InvalidArgument("DoF fits use SNR points of 40 dB or more")
    rates = getattr(curve, f"sum_rate_{which}")
    x = np.log2(db_to_linear(snr))
    return float(np.polyfit(x, rates, 1)[0])


@dataclass(frozen=True)
class ReceiverRanks:
    draw: int
    rx: tuple[int, int]
    desired: int
    interferers: tuple[int, ...]
    joint: int
    passed: bool


@dataclass
class AlignmentReport:
    """Effective-channel ranks for every receiver of every channel draw."""

    M: int
    K: int
    J: int
    L: int
    rel_tol: float
    expected_desired: int
    expected_interferer: int
    expected_joint: int
    entries: list[ReceiverRanks]
    min_pass_fraction: float = 0.99

    @property
    def draws(self) -> int:
        return len({e.draw for e in self.entries})

    @property
    def draws_passed(self) -> int:
        failed = {e.draw for e in self.entries if not e.passed}
        return self.draws - len(failed)

    def member_passes(self) -> dict[tuple[int, int], int]:
        """Number of passing draws for each receiver."""
        out: dict[tuple[int, int], int] = {}
        for e in self.entries:
            out[e.rx] = out.get(e.rx, 0) + int(e.passed)
        return out

    @property
    def passed(self) -> bool:
        return self.draws > 0 and self.draws_passed >= self.min_pass_fraction * self.draws

    def to_text(self) -> str:
        lines = [
            f"M={self.M} K={self.K} J={self.J} L={self.L} draws={self.draws} "
            f"rel_tol={self.rel_tol:g}",
            f"expected desired={self.expected_desired} "
            f"interferer={self.expected_interferer} joint={self.expected_joint}",
        ]
        for e in self.entries:
            inter = ",".join(map(str, e.interferers)) or "-"
            lines.append(
                f"draw {e.draw} rx {e.rx[0]}.{e.rx[1]} desired={e.desired} "
                f"interferer={inter} joint={e.joint} {'ok' if e.passed else 'MISMATCH'}"
            )
        lines.append(f"draws passed {self.draws_passed}/{self.draws}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def joint_rank(A, rel_tol: float = DEFAULT_REL_TOL) -> int:
    """
    Numeric rank of a joint effective channel.

    Large matrices first try the sparse full-rank certificate, falling back
    to the full singular value decomposition when it does not confirm full
    rank.
    """
    rows, cols = A.shape
    if rows * cols > _DENSE_JOINT_ENTRIES:
        cert = certify_full_rank(A, rel_tol)
        if cert.full_rank:
            return min(rows, cols)
    return numeric_rank(A, rel_tol).numeric_rank


def verify_alignment(cfg: SystemConfig, draws: int = 1,
                     min_pass_fraction: float = 0.99) -> AlignmentReport:
    """Rank profile of every receiver's effective channels over fresh channel draws."""
    M, K, J = cfg.M, cfg.K, cfg.J
    pat = build_supersymbol(M, K)
    bf = build_beamforming(pat)
    B = blocks_per_user(M, K)
    L = supersymbol_length(M, K)
    entries = []
    for d in range(draws):
        ch = sample_channels(M, K, J, child_rng(cfg.seed, d), cfg.rel_tol)
        for rx in ch.receivers():
            eff = effective_channel(ch, pat, bf, rx)
            desired = numeric_rank(eff.desired, cfg.rel_tol).numeric_rank
            inter = tuple(numeric_rank(g, cfg.rel_tol).numeric_rank
                          for g in eff.interferers.values())
            jr = joint_rank(eff.joint(), cfg.rel_tol)
            ok = desired == M * B and all(r == B for r in inter) and jr == L
            entries.append(ReceiverRanks(d, rx, desired, inter, jr, ok))
    return AlignmentReport(M, K, J, L, cfg.rel_tol, M * B, B, L, entries,
                           min_pass_fraction)
