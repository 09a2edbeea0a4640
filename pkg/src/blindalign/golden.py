"""
Reference cases with known exact answers, run by ``blindalign selftest``.

Each check raises ``AssertionError`` with a short explanation when the
library disagrees with the hand-worked value. Block-structured matrices are
written as one block-column index per block row (``0`` for a zero block),
in the canonical symbol order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import dof_slope, monte_carlo_rate, verify_alignment
from .beamform import build_beamforming, stream_power
from .channel import effective_channel, sample_channels, simulate_transmission
from .config import SystemConfig
from .matkernel import numeric_rank, orthonormal_complement
from .pattern import (block1_mode, build_supersymbol, enumerate_alignment_blocks,
                      supersymbol_length)
from .receiver import blind_cancel, build_block_projector, zf_decode

R2 = 1.0 / np.sqrt(2.0)

# Block-row -> block-column maps of the three user matrices for M = K = 3.
BEAMFORMING_3X3 = {
    1: [1, 1, 2, 2, 3, 3, 4, 4, 1, 2, 3, 4, 0, 0, 0, 0, 0, 0, 0, 0],
    2: [1, 2, 1, 2, 3, 4, 3, 4, 0, 0, 0, 0, 1, 2, 3, 4, 0, 0, 0, 0],
    3: [1, 2, 3, 4, 1, 2, 3, 4, 0, 0, 0, 0, 0, 0, 0, 0, 1, 2, 3, 4],
}


def block_matrix(layout, M: int, n_cols: int) -> np.ndarray:
    """Expand a block-row -> block-column map into a 0/1 matrix of ``M x M`` blocks."""
    out = np.zeros((len(layout) * M, n_cols * M), dtype=np.uint8)
    for r, c in enumerate(layout):
        if c:
            out[r * M:(r + 1) * M, (c - 1) * M:c * M] = np.eye(M, dtype=np.uint8)
    return out


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise AssertionError(msg)


def _close(a, b, tol: float = 1e-12) -> bool:
    return bool(np.allclose(a, b, atol=tol, rtol=0.0))


def check_block1_mode() -> None:
    got = [block1_mode(1, t, 3) for t in (1, 2, 3)]
    _expect(got == [1, 2, 1], f"user 1, M=3: {got}")
    got = [block1_mode(2, t, 3) for t in range(1, 5)]
    _expect(got == [1, 1, 2, 2], f"user 2, M=3: {got}")


def check_pattern_2x2() -> None:
    p = build_supersymbol(2, 2)
    _expect(p.L == 3, f"L={p.L}")
    _expect(p.modes == ((1, 2, 1), (1, 1, 2)), f"modes {p.modes}")


def check_pattern_2xk() -> None:
    for K in (3, 4, 5):
        p = build_supersymbol(2, K)
        _expect(p.L == K + 1, f"K={K}: L={p.L}")
        for k in range(1, K + 1):
            want = tuple(2 if t == k + 1 else 1 for t in range(1, K + 2))
            _expect(p.modes[k - 1] == want, f"K={K} user {k}: {p.modes[k - 1]}")
        for n in range(1, K + 1):
            (blk,) = enumerate_alignment_blocks(2, K, n)
            _expect(blk.block1_times == (1,) and blk.block2_time == n + 1,
                    f"K={K} user {n}: {blk}")


def check_length_3x3() -> None:
    p = build_supersymbol(3, 3)
    _expect((p.block1_len, p.block2_len, p.L) == (8, 12, 20),
            f"lengths {(p.block1_len, p.block2_len, p.L)}")


def check_beamforming_2x2() -> None:
    bf = build_beamforming(build_supersymbol(2, 2))
    _expect(np.array_equal(bf.matrices[0], block_matrix([1, 1, 0], 2, 1)), "user 1")
    _expect(np.array_equal(bf.matrices[1], block_matrix([1, 0, 1], 2, 1)), "user 2")


def check_beamforming_2x3() -> None:
    bf = build_beamforming(build_supersymbol(2, 3))
    want = np.hstack([block_matrix([1, 1, 0, 0], 2, 1),
                      block_matrix([1, 0, 1, 0], 2, 1),
                      block_matrix([1, 0, 0, 1], 2, 1)])
    _expect(bf.combined().shape == (8, 6), f"shape {bf.combined().shape}")
    _expect(np.array_equal(bf.combined(), want), "combined matrix differs")


def check_beamforming_3x3() -> None:
    bf = build_beamforming(build_supersymbol(3, 3))
    for k, layout in BEAMFORMING_3X3.items():
        _expect(np.array_equal(bf.matrices[k - 1], block_matrix(layout, 3, 4)), f"user {k}")


def check_stream_power() -> None:
    P = 10.0
    _expect(np.isclose(stream_power(2, 2, P).per_stream_power, 3 * P / 8), "M=2, K=2")
    _expect(np.isclose(stream_power(3, 2, P).per_stream_power, 2 * P / 9), "M=3, K=2")


def check_complement() -> None:
    Q = orthonormal_complement(np.array([1.0, 0.0, 1.0]))
    ref = np.array([[R2, 0, -R2], [0, 1, 0]])
    # Same row space as the reference choice.
    _expect(_close(Q.conj().T @ Q, ref.T @ ref), "row space differs from reference")


def check_projector_2x2() -> None:
    proj = build_block_projector(build_supersymbol(2, 2), 1, 1)
    _expect(proj.gathered_times == (1, 2, 3), f"times {proj.gathered_times}")
    _expect(_close(proj.matrix, [[R2, 0, -R2], [0, 1, 0]]), f"matrix\n{proj.matrix}")


def check_projector_2xk() -> None:
    for K in (3, 4, 6):
        proj = build_block_projector(build_supersymbol(2, K), 1, 1)
        s = 1 / np.sqrt(K)
        want = np.zeros((2, K + 1))
        want[0, 0], want[0, 2:] = s, -s
        want[1, 1] = 1.0
        _expect(_close(proj.matrix, want), f"K={K}\n{proj.matrix}")


def check_projector_3x2() -> None:
    proj = build_block_projector(build_supersymbol(3, 2), 1, 1)
    want = [[R2, 0, 0, -R2, 0], [0, R2, 0, 0, -R2], [0, 0, 1, 0, 0]]
    _expect(len(proj.gathered_times) == 5, f"times {proj.gathered_times}")
    _expect(_close(proj.matrix, want), f"matrix\n{proj.matrix}")


def check_effective_2x2() -> None:
    p = build_supersymbol(2, 2)
    ch = sample_channels(2, 2, 1, np.random.default_rng(11))
    eff = effective_channel(ch, p, build_beamforming(p), 1)
    h = ch.modes_matrix(1)
    _expect(_close(eff.dense(1), np.vstack([h[0], h[1], np.zeros(2)])), "desired rows")
    G2 = eff.dense(2)
    _expect(_close(G2, np.vstack([h[0], np.zeros(2), h[0]])), "interference rows")
    _expect(numeric_rank(eff.dense(1)).numeric_rank == 2, "desired rank")
    _expect(numeric_rank(G2).numeric_rank == 1, "interference rank")


def check_effective_3x2() -> None:
    p = build_supersymbol(3, 2)
    ch = sample_channels(3, 2, 1, np.random.default_rng(12))
    eff = effective_channel(ch, p, build_beamforming(p), 1)
    _expect(numeric_rank(eff.desired).numeric_rank == 6, "desired rank")
    G2 = eff.dense(2)
    _expect(numeric_rank(G2).numeric_rank == 2, "interference rank")
    # Interference lies in the span of user 2's two block indicators.
    V = np.zeros((p.L, 2))
    for b, blk in enumerate(p.blocks[1]):
        V[np.asarray(blk.times) - 1, b] = 1.0
    Q = orthonormal_complement(V)
    _expect(np.max(np.abs(Q @ G2)) < 1e-10 * np.max(np.abs(G2)), "interference leaks")


def check_zf_channel_2x2() -> None:
    p = build_supersymbol(2, 2)
    ch = sample_channels(2, 2, 1, np.random.default_rng(13))
    bf = build_beamforming(p)
    y = simulate_transmission(ch, p, bf, stream_power(2, 2, 100.0),
                              np.ones((2, 2)), noise=False)[0]
    out = zf_decode(build_block_projector(p, 1, 1), ch, y)
    h = ch.modes_matrix(1)
    _expect(_close(out.channel, np.vstack([R2 * h[0], h[1]])), f"channel\n{out.channel}")


def check_blind_cancel() -> None:
    rng = np.random.default_rng(14)
    for K, subtract in ((2, [3]), (3, [3, 4])):
        p = build_supersymbol(2, K)
        ch = sample_channels(2, K, 1, rng)
        bf = build_beamforming(p)
        u = rng.standard_normal((K, 2)) + 1j * rng.standard_normal((K, 2))
        u_alone = np.zeros_like(u)
        u_alone[0] = u[0]
        pw = stream_power(2, K, 1.0)
        y = simulate_transmission(ch, p, bf, pw, u, noise=False)[0].y
        clean = simulate_transmission(ch, p, bf, pw, u_alone, noise=False)[0].y
        first = y[0] - sum(y[t - 1] for t in subtract)
        _expect(abs(first - clean[0]) < 1e-12, f"K={K}: symbol 1 still has interference")
        _expect(_close(blind_cancel(p, 1, y)[0], clean[:2]), f"K={K}: blind_cancel")


def check_ranks() -> None:
    for (M, K), want in {(2, 2): (2, 1, 3), (3, 2): (6, 2, 8)}.items():
        rep = verify_alignment(SystemConfig(M, K, seed=7), draws=1)
        e = rep.entries[0]
        got = (e.desired, e.interferers[0], e.joint)
        _expect(rep.passed and got == want, f"(M,K)=({M},{K}): ranks {got}")


def check_dof() -> None:
    for (M, K), target, trials in (((2, 2), 4 / 3, 400), ((3, 3), 9 / 5, 200)):
        slope = dof_slope(monte_carlo_rate(SystemConfig(M, K, trials=trials, seed=1)))
        _expect(abs(slope - target) <= 0.02 * target,
                f"(M,K)=({M},{K}): slope {slope:.4f}, target {target:.4f}")


def check_dimension_count() -> None:
    for M in (2, 3, 4):
        for K in range(1, 7):
            B = (M - 1) ** (K - 1)
            L = supersymbol_length(M, K)
            _expect(M * B + (K - 1) * B == L, f"(M,K)=({M},{K})")


@dataclass(frozen=True)
class GoldenResult:
    name: str
    passed: bool
    detail: str = ""


CHECKS: dict[str, Callable[[], None]] = {
    "block1-mode": check_block1_mode,
    "pattern-2x2": check_pattern_2x2,
    "pattern-2xK": check_pattern_2xk,
    "length-3x3": check_length_3x3,
    "dimension-count": check_dimension_count,
    "beamforming-2x2": check_beamforming_2x2,
    "beamforming-2x3": check_beamforming_2x3,
    "beamforming-3x3": check_beamforming_3x3,
    "stream-power": check_stream_power,
    "complement": check_complement,
    "projector-2x2": check_projector_2x2,
    "projector-2xK": check_projector_2xk,
    "projector-3x2": check_projector_3x2,
    "effective-2x2": check_effective_2x2,
    "effective-3x2": check_effective_3x2,
    "zf-channel-2x2": check_zf_channel_2x2,
    "blind-cancel": check_blind_cancel,
    "ranks": check_ranks,
    "dof": check_dof,
}


def run_golden(names=None) -> list[GoldenResult]:
    """Run the selected checks (all by default) and collect their verdicts."""
    out = []
    for name in names or CHECKS:
        try:
            CHECKS[name]()
        except AssertionError as exc:
            out.append(GoldenResult(name, False, str(exc)))
        else:
            out.append(GoldenResult(name, True))
    return out
